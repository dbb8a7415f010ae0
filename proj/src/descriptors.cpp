#include "wfal/descriptors.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wfal/error.hpp"

namespace wfal {

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::parse_error, what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::config_invalid, "cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void check_keys(const json& object, const std::set<std::string>& allowed, bool lax,
                const std::string& path) {
  if (lax) return;
  for (const auto& [key, value] : object.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      raise(ErrorCode::schema_violation, path + ": unknown field '" + key + "'");
    }
  }
}

const json& field(const json& object, const std::string& key, const std::string& path) {
  const auto it = object.find(key);
  if (it == object.end()) {
    raise(ErrorCode::schema_violation, path + ": missing field '" + key + "'");
  }
  return *it;
}

double number_field(const json& object, const std::string& key, const std::string& path) {
  const json& value = field(object, key, path);
  if (!value.is_number()) {
    raise(ErrorCode::schema_violation, path + "." + key + ": expected a number");
  }
  return value.get<double>();
}

std::string string_field(const json& object, const std::string& key, const std::string& path) {
  const json& value = field(object, key, path);
  if (!value.is_string()) {
    raise(ErrorCode::schema_violation, path + "." + key + ": expected a string");
  }
  return value.get<std::string>();
}

AnomalyClass parse_anomaly(const json& object, bool lax, const std::string& path) {
  if (!object.is_object()) raise(ErrorCode::schema_violation, path + ": expected an object");
  check_keys(object, {"type", "magnitude", "job_hints"}, lax, path);
  const AnomalyType type = anomaly_type_from_string(string_field(object, "type", path));
  if (type == AnomalyType::normal) {
    if (object.contains("magnitude") && object["magnitude"].get<double>() != 0.0) {
      raise(ErrorCode::schema_violation, path + ": normal anomaly carries no magnitude");
    }
    return AnomalyClass::normal();
  }
  const double magnitude = number_field(object, "magnitude", path);
  if (!(magnitude > 0.0 && magnitude <= 1.0)) {
    raise(ErrorCode::schema_violation, path + ".magnitude: must lie in (0,1]");
  }
  return AnomalyClass::make(type, magnitude);
}

}  // namespace

int InfrastructureDesc::total_cores() const {
  int total = 0;
  for (const auto& node : nodes) total += node.cores;
  return total;
}

const JobDesc* WorkflowDesc::find_job(const std::string& id) const {
  for (const auto& job : jobs) {
    if (job.id == id) return &job;
  }
  return nullptr;
}

JobTopology WorkflowDesc::topology() const {
  JobTopology topo;
  for (const auto& job : jobs) topo.parents[job.id] = job.parents;
  return topo;
}

std::vector<std::string> WorkflowDesc::job_types() const {
  std::vector<std::string> types;
  std::set<std::string> seen;
  for (const auto& job : jobs) {
    if (seen.insert(job.type).second) types.push_back(job.type);
  }
  return types;
}

InfrastructureDesc parse_infrastructure_json(const std::string& text, bool lax) {
  const json root = parse_json_text(text, "infrastructure");
  if (!root.is_object()) raise(ErrorCode::schema_violation, "infrastructure: expected an object");
  check_keys(root, {"nodes"}, lax, "infrastructure");
  const json& nodes = field(root, "nodes", "infrastructure");
  if (!nodes.is_array() || nodes.empty()) {
    raise(ErrorCode::schema_violation, "infrastructure.nodes: expected a nonempty array");
  }
  InfrastructureDesc desc;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "infrastructure.nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    if (!n.is_object()) raise(ErrorCode::schema_violation, path + ": expected an object");
    check_keys(n, {"id", "cores", "disk_bw_mbps", "subnet", "anomalous"}, lax, path);
    InfraNode node;
    node.id = string_field(n, "id", path);
    node.cores = static_cast<int>(number_field(n, "cores", path));
    node.disk_bw_mbps = number_field(n, "disk_bw_mbps", path);
    node.subnet = string_field(n, "subnet", path);
    const json& anomalous = field(n, "anomalous", path);
    if (!anomalous.is_boolean()) {
      raise(ErrorCode::schema_violation, path + ".anomalous: expected a boolean");
    }
    node.anomalous = anomalous.get<bool>();
    if (node.cores < 1) raise(ErrorCode::schema_violation, path + ".cores: must be >= 1");
    if (!(node.disk_bw_mbps > 0.0)) {
      raise(ErrorCode::schema_violation, path + ".disk_bw_mbps: must be > 0");
    }
    if (!ids.insert(node.id).second) {
      raise(ErrorCode::schema_violation, path + ".id: duplicate node id '" + node.id + "'");
    }
    desc.nodes.push_back(std::move(node));
  }
  return desc;
}

namespace {

void check_job_dag(const WorkflowDesc& workflow) {
  // Reuse the graph validator for acyclicity over the parent relation.
  WorkflowGraph skeleton;
  skeleton.workflow_name = workflow.name;
  skeleton.n_nodes = workflow.jobs.size();
  skeleton.features = DenseMatrix(workflow.jobs.size(), 1);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < workflow.jobs.size(); ++i) {
    skeleton.node_ids.push_back(workflow.jobs[i].id);
    index[workflow.jobs[i].id] = i;
  }
  for (std::size_t i = 0; i < workflow.jobs.size(); ++i) {
    for (const auto& parent : workflow.jobs[i].parents) {
      const auto it = index.find(parent);
      if (it == index.end()) {
        raise(ErrorCode::unresolved_reference, "workflow '" + workflow.name + "': job '" +
                                                   workflow.jobs[i].id +
                                                   "' references unknown parent '" + parent + "'");
      }
      skeleton.edges.emplace_back(it->second, i);
    }
  }
  validate_dag(skeleton);
}

}  // namespace

std::vector<WorkflowDesc> parse_workflows_json(const std::string& text, bool lax) {
  const json root = parse_json_text(text, "workflows");
  if (!root.is_object()) raise(ErrorCode::schema_violation, "workflows: expected an object");
  check_keys(root, {"workflows"}, lax, "workflows");
  const json& list = field(root, "workflows", "workflows");
  if (!list.is_array() || list.empty()) {
    raise(ErrorCode::schema_violation, "workflows.workflows: expected a nonempty array");
  }
  std::vector<WorkflowDesc> out;
  for (std::size_t w = 0; w < list.size(); ++w) {
    const std::string wpath = "workflows[" + std::to_string(w) + "]";
    const json& entry = list[w];
    if (!entry.is_object()) raise(ErrorCode::schema_violation, wpath + ": expected an object");
    check_keys(entry, {"name", "jobs"}, lax, wpath);
    WorkflowDesc workflow;
    workflow.name = string_field(entry, "name", wpath);
    const json& jobs = field(entry, "jobs", wpath);
    if (!jobs.is_array() || jobs.empty()) {
      raise(ErrorCode::schema_violation, wpath + ".jobs: expected a nonempty array");
    }
    std::set<std::string> ids;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const std::string path = wpath + ".jobs[" + std::to_string(j) + "]";
      const json& job_json = jobs[j];
      if (!job_json.is_object()) raise(ErrorCode::schema_violation, path + ": expected an object");
      check_keys(job_json,
                 {"id", "type", "base_runtime_s", "cpu_fraction", "io_bytes", "transfer_bytes",
                  "parents"},
                 lax, path);
      JobDesc job;
      job.id = string_field(job_json, "id", path);
      job.type = string_field(job_json, "type", path);
      job.base_runtime_s = number_field(job_json, "base_runtime_s", path);
      job.cpu_fraction = number_field(job_json, "cpu_fraction", path);
      job.io_bytes = static_cast<std::uint64_t>(number_field(job_json, "io_bytes", path));
      job.transfer_bytes =
          static_cast<std::uint64_t>(number_field(job_json, "transfer_bytes", path));
      const json& parents = field(job_json, "parents", path);
      if (!parents.is_array()) {
        raise(ErrorCode::schema_violation, path + ".parents: expected an array");
      }
      for (const auto& parent : parents) {
        if (!parent.is_string()) {
          raise(ErrorCode::schema_violation, path + ".parents: expected strings");
        }
        job.parents.push_back(parent.get<std::string>());
      }
      if (!(job.base_runtime_s > 0.0)) {
        raise(ErrorCode::schema_violation, path + ".base_runtime_s: must be > 0");
      }
      if (!(job.cpu_fraction >= 0.0 && job.cpu_fraction <= 1.0)) {
        raise(ErrorCode::schema_violation, path + ".cpu_fraction: must lie in [0,1]");
      }
      if (!ids.insert(job.id).second) {
        raise(ErrorCode::schema_violation, path + ".id: duplicate job id '" + job.id + "'");
      }
      workflow.jobs.push_back(std::move(job));
    }
    check_job_dag(workflow);
    out.push_back(std::move(workflow));
  }
  return out;
}

ExperimentsDesc parse_experiments_json(const std::string& text, bool lax) {
  const json root = parse_json_text(text, "experiments");
  if (!root.is_object()) raise(ErrorCode::schema_violation, "experiments: expected an object");
  check_keys(root, {"experiments"}, lax, "experiments");
  const json& list = field(root, "experiments", "experiments");
  if (!list.is_array() || list.empty()) {
    raise(ErrorCode::schema_violation, "experiments.experiments: expected a nonempty array");
  }
  ExperimentsDesc desc;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "experiments[" + std::to_string(i) + "]";
    const json& entry = list[i];
    if (!entry.is_object()) raise(ErrorCode::schema_violation, path + ": expected an object");
    check_keys(entry, {"workflow", "executions", "anomaly"}, lax, path);
    ExperimentSpec spec;
    spec.workflow = string_field(entry, "workflow", path);
    spec.executions = static_cast<int>(number_field(entry, "executions", path));
    if (spec.executions < 1) {
      raise(ErrorCode::schema_violation, path + ".executions: must be >= 1");
    }
    const json& anomaly = field(entry, "anomaly", path);
    spec.anomaly = parse_anomaly(anomaly, lax, path + ".anomaly");
    if (anomaly.contains("job_hints")) {
      for (const auto& hint : anomaly["job_hints"]) {
        if (!hint.is_string()) {
          raise(ErrorCode::schema_violation, path + ".anomaly.job_hints: expected strings");
        }
        spec.job_hints.push_back(hint.get<std::string>());
      }
    }
    desc.experiments.push_back(std::move(spec));
  }
  return desc;
}

InfrastructureDesc load_infrastructure(const std::string& path, bool lax) {
  return parse_infrastructure_json(read_file(path), lax);
}

std::vector<WorkflowDesc> load_workflows(const std::string& path, bool lax) {
  return parse_workflows_json(read_file(path), lax);
}

ExperimentsDesc load_experiments(const std::string& path, bool lax) {
  return parse_experiments_json(read_file(path), lax);
}

ClassMap build_class_map(const WorkflowDesc& workflow) {
  ClassMap map;
  for (const auto& job : workflow.jobs) {
    std::vector<AnomalyType> classes = {AnomalyType::cpu};
    if (job.io_bytes > 0) classes.push_back(AnomalyType::hdd);
    if (job.transfer_bytes > 0) {
      classes.push_back(AnomalyType::net_loss);
      classes.push_back(AnomalyType::net_dup);
    }
    map[job.id] = std::move(classes);
  }
  return map;
}

}  // namespace wfal
