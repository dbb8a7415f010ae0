#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wfal/featurize.hpp"
#include "wfal/graph.hpp"

namespace wfal {

struct InfraNode {
  std::string id;
  int cores = 1;
  double disk_bw_mbps = 0.0;
  std::string subnet;
  bool anomalous = false;
};

struct InfrastructureDesc {
  std::vector<InfraNode> nodes;
  int total_cores() const;
};

struct JobDesc {
  std::string id;
  std::string type;
  double base_runtime_s = 0.0;
  double cpu_fraction = 0.0;
  std::uint64_t io_bytes = 0;
  std::uint64_t transfer_bytes = 0;
  std::vector<std::string> parents;
};

struct WorkflowDesc {
  std::string name;
  std::vector<JobDesc> jobs;

  const JobDesc* find_job(const std::string& id) const;
  JobTopology topology() const;
  // Distinct job types in first-appearance order, used as the one-hot
  // vocabulary of the feature schema.
  std::vector<std::string> job_types() const;
};

struct ExperimentSpec {
  std::string workflow;
  int executions = 1;
  AnomalyClass anomaly;
  std::vector<std::string> job_hints;
};

struct ExperimentsDesc {
  std::vector<ExperimentSpec> experiments;
};

// Strict by default: unknown object keys are rejected unless `lax`.
InfrastructureDesc load_infrastructure(const std::string& path, bool lax = false);
std::vector<WorkflowDesc> load_workflows(const std::string& path, bool lax = false);
ExperimentsDesc load_experiments(const std::string& path, bool lax = false);

InfrastructureDesc parse_infrastructure_json(const std::string& text, bool lax = false);
std::vector<WorkflowDesc> parse_workflows_json(const std::string& text, bool lax = false);
ExperimentsDesc parse_experiments_json(const std::string& text, bool lax = false);

// Which anomaly classes a job can plausibly express: cpu always, hdd only
// with io traffic, the network pair only with transfers.
using ClassMap = std::map<std::string, std::vector<AnomalyType>>;
ClassMap build_class_map(const WorkflowDesc& workflow);

}  // namespace wfal
