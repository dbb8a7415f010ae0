#include "wfal/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "wfal/error.hpp"

namespace wfal {

const AnomalyType kInjectableTypes[4] = {AnomalyType::cpu, AnomalyType::hdd,
                                         AnomalyType::net_loss, AnomalyType::net_dup};

const char* to_string(AnomalyType type) {
  switch (type) {
    case AnomalyType::normal: return "normal";
    case AnomalyType::cpu: return "cpu";
    case AnomalyType::hdd: return "hdd";
    case AnomalyType::net_loss: return "net_loss";
    case AnomalyType::net_dup: return "net_dup";
  }
  return "normal";
}

AnomalyType anomaly_type_from_string(const std::string& name) {
  if (name == "normal") return AnomalyType::normal;
  if (name == "cpu") return AnomalyType::cpu;
  if (name == "hdd") return AnomalyType::hdd;
  if (name == "net_loss") return AnomalyType::net_loss;
  if (name == "net_dup") return AnomalyType::net_dup;
  raise(ErrorCode::schema_violation, "unknown anomaly type '" + name + "'");
}

AnomalyClass AnomalyClass::make(AnomalyType type, double magnitude) {
  if (type == AnomalyType::normal) {
    if (magnitude != 0.0) {
      raise(ErrorCode::schema_violation, "normal class carries no magnitude");
    }
    return {};
  }
  if (!(magnitude > 0.0 && magnitude <= 1.0)) {
    raise(ErrorCode::magnitude_out_of_range,
          "anomaly magnitude must lie in (0,1], got " + std::to_string(magnitude));
  }
  return {type, magnitude};
}

namespace {

void check_edges(const WorkflowGraph& graph) {
  for (const auto& [parent, child] : graph.edges) {
    if (parent >= graph.n_nodes || child >= graph.n_nodes) {
      std::ostringstream msg;
      msg << "edge (" << parent << " -> " << child << ") outside graph of "
          << graph.n_nodes << " nodes";
      raise(ErrorCode::index_out_of_range, msg.str());
    }
    if (parent == child) {
      raise(ErrorCode::cycle_detected, "self-loop on node " + std::to_string(parent));
    }
  }
}

// Kahn's algorithm with an index-ordered frontier. Returns the order, or the
// set of nodes stuck on cycles via `cyclic` when the graph is not a DAG.
std::vector<std::size_t> kahn_order(const WorkflowGraph& graph, std::vector<std::size_t>* cyclic) {
  std::vector<std::size_t> in_degree(graph.n_nodes, 0);
  std::vector<std::vector<std::size_t>> children(graph.n_nodes);
  for (const auto& [parent, child] : graph.edges) {
    ++in_degree[child];
    children[parent].push_back(child);
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> frontier;
  for (std::size_t i = 0; i < graph.n_nodes; ++i) {
    if (in_degree[i] == 0) frontier.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(graph.n_nodes);
  while (!frontier.empty()) {
    const std::size_t node = frontier.top();
    frontier.pop();
    order.push_back(node);
    for (std::size_t child : children[node]) {
      if (--in_degree[child] == 0) frontier.push(child);
    }
  }
  if (order.size() != graph.n_nodes && cyclic != nullptr) {
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
      if (in_degree[i] > 0) cyclic->push_back(i);
    }
  }
  return order;
}

std::string node_name(const WorkflowGraph& graph, std::size_t index) {
  if (index < graph.node_ids.size()) return graph.node_ids[index];
  return std::to_string(index);
}

}  // namespace

void validate_dag(const WorkflowGraph& graph) {
  check_edges(graph);
  if (graph.features.rows() != graph.n_nodes) {
    raise(ErrorCode::feature_dim_mismatch,
          "feature matrix has " + std::to_string(graph.features.rows()) + " rows for " +
              std::to_string(graph.n_nodes) + " nodes");
  }
  if (!graph.features.all_finite()) {
    raise(ErrorCode::invariant_violation, "non-finite feature value in run " + graph.run_id);
  }
  if (graph.labels && graph.labels->size() != graph.n_nodes) {
    raise(ErrorCode::feature_dim_mismatch, "label vector length does not match node count");
  }
  std::vector<std::size_t> cyclic;
  const auto order = kahn_order(graph, &cyclic);
  if (order.size() != graph.n_nodes) {
    std::ostringstream msg;
    msg << "cycle through nodes:";
    for (std::size_t i : cyclic) msg << ' ' << node_name(graph, i);
    raise(ErrorCode::cycle_detected, msg.str());
  }
}

std::vector<std::size_t> topological_order(const WorkflowGraph& graph) {
  check_edges(graph);
  std::vector<std::size_t> cyclic;
  auto order = kahn_order(graph, &cyclic);
  if (order.size() != graph.n_nodes) {
    raise(ErrorCode::cycle_detected, "graph has a cycle; no topological order");
  }
  return order;
}

DenseMatrix normalized_adjacency(const WorkflowGraph& graph) {
  check_edges(graph);
  const std::size_t n = graph.n_nodes;
  DenseMatrix a_tilde(n, n);
  for (std::size_t i = 0; i < n; ++i) a_tilde(i, i) = 1.0;
  for (const auto& [parent, child] : graph.edges) {
    a_tilde(parent, child) = 1.0;
    a_tilde(child, parent) = 1.0;
  }
  std::vector<double> inv_sqrt_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += a_tilde(i, j);
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (a_tilde(i, j) != 0.0) {
        out(i, j) = inv_sqrt_degree[i] * a_tilde(i, j) * inv_sqrt_degree[j];
      }
    }
  }
  return out;
}

AccumulatedGraph accumulate(const std::vector<WorkflowGraph>& graphs) {
  if (graphs.empty()) raise(ErrorCode::empty_input, "accumulate: no graphs given");
  const std::size_t d = graphs.front().features.cols();
  std::size_t total = 0;
  bool all_labeled = true;
  for (const auto& graph : graphs) {
    validate_dag(graph);
    if (graph.features.cols() != d) {
      raise(ErrorCode::feature_dim_mismatch,
            "graph " + graph.run_id + " has feature dim " +
                std::to_string(graph.features.cols()) + ", expected " + std::to_string(d));
    }
    total += graph.n_nodes;
    all_labeled = all_labeled && graph.labels.has_value();
  }

  AccumulatedGraph out;
  out.n_nodes = total;
  out.normalized_adjacency = DenseMatrix(total, total);
  out.features = DenseMatrix(total, d);
  out.node_to_graph.reserve(total);
  out.node_ids.reserve(total);
  if (all_labeled) out.labels.emplace();

  std::size_t offset = 0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const auto& graph = graphs[g];
    const DenseMatrix block = normalized_adjacency(graph);
    for (std::size_t i = 0; i < graph.n_nodes; ++i) {
      for (std::size_t j = 0; j < graph.n_nodes; ++j) {
        out.normalized_adjacency(offset + i, offset + j) = block(i, j);
      }
      for (std::size_t c = 0; c < d; ++c) {
        out.features(offset + i, c) = graph.features(i, c);
      }
      out.node_to_graph.push_back(g);
      out.node_ids.push_back(i < graph.node_ids.size() ? graph.node_ids[i]
                                                       : std::to_string(i));
      if (all_labeled) out.labels->push_back((*graph.labels)[i]);
    }
    offset += graph.n_nodes;
  }
  return out;
}

TaskBatch make_task_batch(int iteration_index, std::vector<WorkflowGraph> graphs) {
  if (iteration_index < 1) {
    raise(ErrorCode::config_invalid, "task batch iteration index must be >= 1");
  }
  TaskBatch batch;
  batch.iteration_index = iteration_index;
  batch.accumulated = accumulate(graphs);
  batch.graphs = std::move(graphs);
  return batch;
}

}  // namespace wfal
