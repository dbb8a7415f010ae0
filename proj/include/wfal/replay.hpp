#pragma once

#include "wfal/request.hpp"
#include "wfal/rng.hpp"
#include "wfal/trace.hpp"

namespace wfal {

// One pre-captured run plus the anomaly class that was injected into it
// (derived from the record labels when building a pool).
struct PoolRun {
  std::string workflow;
  std::string run_id;
  std::vector<TraceRecord> records;
  AnomalyType injected = AnomalyType::normal;
};

PoolRun make_pool_run(std::vector<TraceRecord> records);
std::vector<PoolRun> pool_runs_from_records(const std::vector<TraceRecord>& records);

// A labeled trace pool consumed without replacement. The pool is shuffled
// once with the given stream; selection then walks the shuffled order, so
// draws are uniform and a replay under the same seed is identical.
class TracePool {
 public:
  TracePool(std::vector<PoolRun> runs, RngStream shuffle_rng);

  // Next `count` unconsumed runs in shuffled order, any class. Used for
  // burn-in draws and sequential baseline consumption.
  std::vector<PoolRun> take_sequential(int count);

  // Next `count` unconsumed runs whose injected class matches. Throws
  // PoolExhausted naming the class and what is left.
  std::vector<PoolRun> take_matching(AnomalyType type, int count);

  std::size_t remaining() const;
  std::size_t remaining(AnomalyType type) const;
  const std::vector<std::string>& consumed_run_ids() const { return consumed_ids_; }

 private:
  std::vector<PoolRun> runs_;       // shuffled order
  std::vector<bool> consumed_;
  std::vector<std::string> consumed_ids_;
};

// The emulation backend's selection step: runs matching request.anomaly,
// drawn without replacement.
std::vector<PoolRun> replay_select(TracePool& pool, const ExperimentRequest& request);

}  // namespace wfal
