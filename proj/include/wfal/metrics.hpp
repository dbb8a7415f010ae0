#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wfal/matrix.hpp"

namespace wfal {

// Mann-Whitney ROC-AUC: P(score+ > score-) + 0.5 * P(tie), computed exactly
// via rank sums. Needs at least one positive and one negative label.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// One-vs-rest macro average over the classes that have both positives and
// negatives; `scores` holds one column of class scores per node.
double macro_roc_auc(const DenseMatrix& class_scores, const std::vector<int>& labels);

// AP over positives ranked by descending score, ties broken by stable input
// order. Needs at least one positive.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

double macro_average_precision(const DenseMatrix& class_scores, const std::vector<int>& labels);

// Fraction of rows whose true class is among the k highest-probability
// classes; per-row ties resolved toward the lower class index.
double top_k_precision(const DenseMatrix& probabilities, const std::vector<int>& labels, int k);

struct ConfidenceHistogram {
  int iteration = 0;
  std::vector<double> edges;   // bin_count + 1 edges covering [0,1]
  std::vector<std::size_t> counts;
};

// Uniform bins over [0,1]; first bin closed on both sides, the rest
// right-closed. Values outside [0,1] raise OutOfRangeValue.
ConfidenceHistogram confidence_histogram(const std::vector<double>& confidences, int bins = 10);

struct MetricsRecord {
  std::string mode;     // active | baseline | ablation
  std::uint64_t seed = 0;
  int iteration = 0;
  std::uint64_t samples_seen = 0;
  double auc = 0.0;
  double average_precision = 0.0;
  double top_k = 0.0;
  int k = 1;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> parse_metrics_csv(std::istream& in);
std::vector<MetricsRecord> parse_metrics_csv_file(const std::string& path);

void write_histograms_csv(std::ostream& out, const std::vector<ConfidenceHistogram>& histograms);

}  // namespace wfal
