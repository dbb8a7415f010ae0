#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wfal/matrix.hpp"

namespace wfal {

enum class AnomalyType { normal = 0, cpu = 1, hdd = 2, net_loss = 3, net_dup = 4 };

constexpr int kAnomalyTypeCount = 5;
// The injectable (non-normal) classes, in enum order. Ties between class
// confidences are broken toward the lower enum value.
extern const AnomalyType kInjectableTypes[4];

const char* to_string(AnomalyType type);
AnomalyType anomaly_type_from_string(const std::string& name);

// A class label plus the injected magnitude. Normal carries no magnitude;
// anomalies carry one in (0,1].
struct AnomalyClass {
  AnomalyType type = AnomalyType::normal;
  double magnitude = 0.0;

  static AnomalyClass normal() { return {}; }
  static AnomalyClass make(AnomalyType type, double magnitude);

  bool is_normal() const { return type == AnomalyType::normal; }
  bool operator==(const AnomalyClass& other) const = default;
};

// One workflow execution as a DAG with per-node features. Edges run from
// parent to child; indices refer to rows of `features`.
struct WorkflowGraph {
  std::string workflow_name;
  std::string run_id;
  std::size_t n_nodes = 0;
  std::vector<std::string> node_ids;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  DenseMatrix features;  // n_nodes x d
  std::optional<std::vector<AnomalyClass>> labels;
};

// Throws CycleDetected (listing the node ids stuck on a cycle) or
// IndexOutOfRange. A graph that validates has a computable topological order.
void validate_dag(const WorkflowGraph& graph);

// Topological order of a validated graph; stable under the node numbering
// (Kahn's algorithm with an index-ordered frontier).
std::vector<std::size_t> topological_order(const WorkflowGraph& graph);

// D^{-1/2} (sym(A) + I) D^{-1/2}: direction dropped, self-loops added,
// symmetric degree normalization.
DenseMatrix normalized_adjacency(const WorkflowGraph& graph);

// Several graphs merged into one training graph with a block-diagonal
// normalized adjacency. Labels are present only when every member had them.
struct AccumulatedGraph {
  std::size_t n_nodes = 0;
  DenseMatrix normalized_adjacency;  // n x n, block diagonal
  DenseMatrix features;              // n x d
  std::vector<std::size_t> node_to_graph;
  std::vector<std::string> node_ids;
  std::optional<std::vector<AnomalyClass>> labels;
};

AccumulatedGraph accumulate(const std::vector<WorkflowGraph>& graphs);

// The batch of workflow graphs delivered at one iteration of the loop.
struct TaskBatch {
  int iteration_index = 1;
  std::vector<WorkflowGraph> graphs;
  AccumulatedGraph accumulated;
};

TaskBatch make_task_batch(int iteration_index, std::vector<WorkflowGraph> graphs);

}  // namespace wfal
