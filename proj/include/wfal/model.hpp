#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wfal/graph.hpp"
#include "wfal/matrix.hpp"

namespace wfal {

// Anchors the randomness and the node subset of one loss evaluation. Models
// derive their substreams from (seed, iteration) per call, so re-evaluating
// under the same context reproduces the same draws. The probe updates, the
// feature-space finite differences and the post-update scoring all rely on
// seeing one consistent realization of the task's noise.
struct EvalContext {
  std::uint64_t seed = 0;
  int iteration = 0;
  const std::vector<std::size_t>* loss_nodes = nullptr;  // null: every node
};

struct LossGrads {
  double loss = 0.0;
  std::vector<DenseMatrix> param_grads;  // ordered like Model::tensors()
  DenseMatrix feature_grad;              // n x d
};

// Common surface of the two detectors. Training code treats parameters as a
// flat list of tensors so the optimizer and the probe machinery stay generic.
class Model {
 public:
  virtual ~Model() = default;

  virtual const char* kind() const = 0;
  virtual double loss(const AccumulatedGraph& graph, const EvalContext& ctx) const = 0;
  virtual LossGrads loss_and_grads(const AccumulatedGraph& graph,
                                   const EvalContext& ctx) const = 0;

  virtual std::vector<DenseMatrix*> tensors() = 0;
  virtual std::vector<const DenseMatrix*> tensors() const = 0;
  virtual std::vector<std::string> tensor_names() const = 0;
  virtual std::unique_ptr<Model> clone() const = 0;

  // Per-node class probabilities, when the model has a classification head.
  virtual std::optional<DenseMatrix> class_probabilities(const AccumulatedGraph& graph,
                                                         const EvalContext& ctx) const {
    (void)graph;
    (void)ctx;
    return std::nullopt;
  }

  // Per-node anomaly score, higher = more anomalous.
  virtual std::vector<double> anomaly_scores(const AccumulatedGraph& graph,
                                             const EvalContext& ctx) const = 0;
};

// Class index used for supervised training: the anomaly type, or a collapsed
// normal/anomalous pair when `classes` == 2.
int class_index_of(const AnomalyClass& label, int classes);

}  // namespace wfal
