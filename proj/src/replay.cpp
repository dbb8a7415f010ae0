#include "wfal/replay.hpp"

#include <array>
#include <map>

#include "wfal/error.hpp"

namespace wfal {

PoolRun make_pool_run(std::vector<TraceRecord> records) {
  if (records.empty()) raise(ErrorCode::empty_input, "pool run with no records");
  PoolRun run;
  run.workflow = records.front().workflow;
  run.run_id = records.front().run_id;
  // Injected class = most frequent non-normal label; ties go to the lower
  // enum value. All-normal runs index as normal.
  std::array<int, kAnomalyTypeCount> counts{};
  for (const auto& r : records) counts[static_cast<int>(r.anomaly.type)] += 1;
  int best = 0, best_count = 0;
  for (int t = 1; t < kAnomalyTypeCount; ++t) {
    if (counts[t] > best_count) {
      best = t;
      best_count = counts[t];
    }
  }
  run.injected = best_count > 0 ? static_cast<AnomalyType>(best) : AnomalyType::normal;
  run.records = std::move(records);
  return run;
}

std::vector<PoolRun> pool_runs_from_records(const std::vector<TraceRecord>& records) {
  std::vector<std::vector<TraceRecord>> groups;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.workflow, r.run_id);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, groups.size());
      groups.emplace_back();
      groups.back().push_back(r);
    } else {
      groups[it->second].push_back(r);
    }
  }
  std::vector<PoolRun> runs;
  runs.reserve(groups.size());
  for (auto& group : groups) runs.push_back(make_pool_run(std::move(group)));
  return runs;
}

TracePool::TracePool(std::vector<PoolRun> runs, RngStream shuffle_rng) : runs_(std::move(runs)) {
  shuffle_rng.shuffle(runs_);
  consumed_.assign(runs_.size(), false);
}

std::vector<PoolRun> TracePool::take_sequential(int count) {
  if (count < 1) raise(ErrorCode::config_invalid, "take_sequential: count must be >= 1");
  if (remaining() < static_cast<std::size_t>(count)) {
    raise(ErrorCode::pool_exhausted, "pool has " + std::to_string(remaining()) +
                                         " runs left, requested " + std::to_string(count));
  }
  std::vector<PoolRun> out;
  for (std::size_t i = 0; i < runs_.size() && out.size() < static_cast<std::size_t>(count); ++i) {
    if (consumed_[i]) continue;
    consumed_[i] = true;
    consumed_ids_.push_back(runs_[i].run_id);
    out.push_back(runs_[i]);
  }
  return out;
}

std::vector<PoolRun> TracePool::take_matching(AnomalyType type, int count) {
  if (count < 1) raise(ErrorCode::config_invalid, "take_matching: count must be >= 1");
  if (remaining(type) < static_cast<std::size_t>(count)) {
    raise(ErrorCode::pool_exhausted, std::string("pool class '") + to_string(type) + "' has " +
                                         std::to_string(remaining(type)) +
                                         " runs left, requested " + std::to_string(count));
  }
  std::vector<PoolRun> out;
  for (std::size_t i = 0; i < runs_.size() && out.size() < static_cast<std::size_t>(count); ++i) {
    if (consumed_[i] || runs_[i].injected != type) continue;
    consumed_[i] = true;
    consumed_ids_.push_back(runs_[i].run_id);
    out.push_back(runs_[i]);
  }
  return out;
}

std::size_t TracePool::remaining() const {
  std::size_t n = 0;
  for (bool c : consumed_) n += c ? 0 : 1;
  return n;
}

std::size_t TracePool::remaining(AnomalyType type) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (!consumed_[i] && runs_[i].injected == type) ++n;
  }
  return n;
}

std::vector<PoolRun> replay_select(TracePool& pool, const ExperimentRequest& request) {
  request.validate();
  if (request.origin == RequestOrigin::burn_in) {
    return pool.take_sequential(request.executions);
  }
  return pool.take_matching(request.anomaly.type, request.executions);
}

}  // namespace wfal
