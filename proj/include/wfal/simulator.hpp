#pragma once

#include "wfal/descriptors.hpp"
#include "wfal/request.hpp"
#include "wfal/rng.hpp"
#include "wfal/trace.hpp"

namespace wfal {

// Multiplicative inflation applied by one anomaly at one magnitude. Factors
// are >= 1 and reduce to 1 at magnitude 0.
struct PerturbationFactors {
  double runtime = 1.0;
  double stage = 1.0;
};

// cpu: the cpu-bound share of the runtime divides by the remaining core
// fraction. hdd: the io-bound share of the runtime and the staging divide by
// the remaining bandwidth. net_loss: staging divides by the delivery rate.
// net_dup: staging scales with the duplication overhead.
PerturbationFactors perturbation_factors(const AnomalyClass& anomaly, double cpu_fraction);

// Applies the factors to one record: runtime, staging and end_ts move, the
// cpu seconds and byte counts do not.
TraceRecord perturb(const TraceRecord& base, double cpu_fraction, const AnomalyClass& anomaly);

struct SimOptions {
  double noise_sigma = 0.05;  // lognormal factor exp(sigma * N(0,1)) per duration
  // When set, hinted jobs are perturbed only if they land on a node marked
  // anomalous; otherwise every hinted job is perturbed regardless of placement.
  bool anomalous_nodes_only = false;
  double stage_bandwidth_bytes_per_s = 125e6;  // nominal 1 Gbps staging link
  double read_share = 0.6;                     // of io_bytes
};

// List-scheduling simulation of one run: jobs start in topological order on
// the earliest-available core, children wait for parent stage-out. Fully
// deterministic given the rng stream.
std::vector<TraceRecord> simulate_execution(const WorkflowDesc& workflow,
                                            const InfrastructureDesc& infra,
                                            const ExperimentRequest& request,
                                            const std::string& run_id, RngStream rng,
                                            const SimOptions& options = {});

}  // namespace wfal
