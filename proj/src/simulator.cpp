#include "wfal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wfal/error.hpp"

namespace wfal {

PerturbationFactors perturbation_factors(const AnomalyClass& anomaly, double cpu_fraction) {
  PerturbationFactors f;
  if (anomaly.is_normal()) return f;
  const double m = anomaly.magnitude;
  if (!(m > 0.0 && m <= 1.0)) {
    raise(ErrorCode::magnitude_out_of_range, "magnitude must lie in (0,1]");
  }
  switch (anomaly.type) {
    case AnomalyType::cpu:
      if (m >= 1.0) raise(ErrorCode::magnitude_out_of_range, "cpu magnitude must be < 1");
      f.runtime = cpu_fraction / (1.0 - m) + (1.0 - cpu_fraction);
      break;
    case AnomalyType::hdd:
      if (m >= 1.0) raise(ErrorCode::magnitude_out_of_range, "hdd magnitude must be < 1");
      f.runtime = cpu_fraction + (1.0 - cpu_fraction) / (1.0 - m);
      f.stage = 1.0 / (1.0 - m);
      break;
    case AnomalyType::net_loss:
      if (m >= 1.0) raise(ErrorCode::magnitude_out_of_range, "net_loss magnitude must be < 1");
      f.stage = 1.0 / (1.0 - m);
      break;
    case AnomalyType::net_dup:
      f.stage = 1.0 + m;
      break;
    case AnomalyType::normal:
      break;
  }
  return f;
}

TraceRecord perturb(const TraceRecord& base, double cpu_fraction, const AnomalyClass& anomaly) {
  TraceRecord out = base;
  if (anomaly.is_normal()) return out;
  const auto f = perturbation_factors(anomaly, cpu_fraction);
  out.runtime_s = base.runtime_s * f.runtime;
  out.stage_in_s = base.stage_in_s * f.stage;
  out.stage_out_s = base.stage_out_s * f.stage;
  out.start_ts = base.submit_ts + out.stage_in_s;
  out.end_ts = out.start_ts + out.runtime_s;
  out.anomaly = anomaly;
  return out;
}

std::vector<TraceRecord> simulate_execution(const WorkflowDesc& workflow,
                                            const InfrastructureDesc& infra,
                                            const ExperimentRequest& request,
                                            const std::string& run_id, RngStream rng,
                                            const SimOptions& options) {
  if (request.workflow_name != workflow.name) {
    raise(ErrorCode::unknown_workflow, "request names workflow '" + request.workflow_name +
                                           "', simulator has '" + workflow.name + "'");
  }
  if (infra.nodes.empty()) raise(ErrorCode::config_invalid, "infrastructure has no nodes");
  std::set<std::string> hinted(request.job_hints.begin(), request.job_hints.end());
  for (const auto& hint : request.job_hints) {
    if (workflow.find_job(hint) == nullptr) {
      raise(ErrorCode::unknown_job_hint,
            "hinted job '" + hint + "' is not part of workflow '" + workflow.name + "'");
    }
  }

  // Core slots, one job per core, in declaration order.
  struct Slot {
    double available = 0.0;
    bool anomalous = false;
  };
  std::vector<Slot> slots;
  for (const auto& node : infra.nodes) {
    for (int c = 0; c < node.cores; ++c) slots.push_back({0.0, node.anomalous});
  }

  // Topological order over the job list (stable: Kahn with list order).
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < workflow.jobs.size(); ++i) index[workflow.jobs[i].id] = i;
  WorkflowGraph skeleton;
  skeleton.n_nodes = workflow.jobs.size();
  skeleton.features = DenseMatrix(workflow.jobs.size(), 1);
  for (std::size_t i = 0; i < workflow.jobs.size(); ++i) {
    skeleton.node_ids.push_back(workflow.jobs[i].id);
    for (const auto& parent : workflow.jobs[i].parents) {
      skeleton.edges.emplace_back(index.at(parent), i);
    }
  }
  const auto order = topological_order(skeleton);

  std::vector<TraceRecord> records(workflow.jobs.size());
  std::vector<double> finished_at(workflow.jobs.size(), 0.0);  // end + stage_out
  for (std::size_t job_index : order) {
    const JobDesc& job = workflow.jobs[job_index];

    // Noisy base durations; the noise factors are drawn even at sigma = 0 so
    // the stream layout does not depend on the option value.
    const double noise_runtime = std::exp(options.noise_sigma * rng.normal());
    const double noise_stage_in = std::exp(options.noise_sigma * rng.normal());
    const double noise_stage_out = std::exp(options.noise_sigma * rng.normal());
    const double stage_base = static_cast<double>(job.transfer_bytes) * 0.5 /
                              options.stage_bandwidth_bytes_per_s;
    double runtime = job.base_runtime_s * noise_runtime;
    double stage_in = stage_base * noise_stage_in;
    double stage_out = stage_base * noise_stage_out;
    const double cpu_time = job.cpu_fraction * runtime;

    double ready = 0.0;
    for (const auto& parent : job.parents) ready = std::max(ready, finished_at[index.at(parent)]);

    // Earliest-available core; ties go to the lowest slot index.
    std::size_t best = 0;
    for (std::size_t s = 1; s < slots.size(); ++s) {
      if (slots[s].available < slots[best].available) best = s;
    }

    const bool perturb_this =
        hinted.contains(job.id) && !request.anomaly.is_normal() &&
        (!options.anomalous_nodes_only || slots[best].anomalous);
    AnomalyClass label = AnomalyClass::normal();
    if (perturb_this) {
      const auto f = perturbation_factors(request.anomaly, job.cpu_fraction);
      runtime *= f.runtime;
      stage_in *= f.stage;
      stage_out *= f.stage;
      label = request.anomaly;
    }

    TraceRecord r;
    r.workflow = workflow.name;
    r.run_id = run_id;
    r.job_id = job.id;
    r.job_type = job.type;
    r.ready_ts = ready;
    r.submit_ts = std::max(ready, slots[best].available);
    r.start_ts = r.submit_ts + stage_in;
    r.end_ts = r.start_ts + runtime;
    r.runtime_s = runtime;
    r.cpu_time_s = cpu_time;
    r.bytes_read = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(job.io_bytes) * options.read_share));
    r.bytes_written = job.io_bytes - r.bytes_read;
    r.stage_in_s = stage_in;
    r.stage_out_s = stage_out;
    r.anomaly = label;
    validate_record(r);

    slots[best].available = r.end_ts + stage_out;
    finished_at[job_index] = r.end_ts + stage_out;
    records[job_index] = std::move(r);
  }
  return records;
}

}  // namespace wfal
