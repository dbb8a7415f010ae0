#include "wfal/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "wfal/error.hpp"

namespace wfal {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    raise(ErrorCode::shape_mismatch, "roc_auc: scores and labels differ in length");
  }
  std::size_t positives = 0, negatives = 0;
  for (int label : labels) (label != 0 ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0) {
    raise(ErrorCode::degenerate_labels, "roc_auc needs both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum with average ranks for ties.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] != 0) positive_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double macro_roc_auc(const DenseMatrix& class_scores, const std::vector<int>& labels) {
  if (class_scores.rows() != labels.size()) {
    raise(ErrorCode::shape_mismatch, "macro_roc_auc: row count != label count");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < class_scores.cols(); ++c) {
    std::vector<double> scores(labels.size());
    std::vector<int> binary(labels.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = class_scores(i, c);
      binary[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
      positives += binary[i];
    }
    if (positives == 0 || positives == labels.size()) continue;
    sum += roc_auc(scores, binary);
    ++used;
  }
  if (used == 0) raise(ErrorCode::degenerate_labels, "no class has both positives and negatives");
  return sum / static_cast<double>(used);
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    raise(ErrorCode::shape_mismatch, "average_precision: scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (int label : labels) positives += label != 0 ? 1 : 0;
  if (positives == 0) raise(ErrorCode::no_positives, "average precision needs a positive item");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

double macro_average_precision(const DenseMatrix& class_scores, const std::vector<int>& labels) {
  if (class_scores.rows() != labels.size()) {
    raise(ErrorCode::shape_mismatch, "macro_average_precision: row count != label count");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < class_scores.cols(); ++c) {
    std::vector<double> scores(labels.size());
    std::vector<int> binary(labels.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = class_scores(i, c);
      binary[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
      positives += binary[i];
    }
    if (positives == 0) continue;
    sum += average_precision(scores, binary);
    ++used;
  }
  if (used == 0) raise(ErrorCode::no_positives, "no class has positives");
  return sum / static_cast<double>(used);
}

double top_k_precision(const DenseMatrix& probabilities, const std::vector<int>& labels, int k) {
  if (probabilities.rows() != labels.size()) {
    raise(ErrorCode::shape_mismatch, "top_k_precision: row count != label count");
  }
  const int classes = static_cast<int>(probabilities.cols());
  if (k < 1 || k > classes) {
    raise(ErrorCode::k_out_of_range,
          "k = " + std::to_string(k) + " outside [1, " + std::to_string(classes) + "]");
  }
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  std::vector<int> class_order(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      raise(ErrorCode::label_out_of_range, "label " + std::to_string(labels[i]));
    }
    std::iota(class_order.begin(), class_order.end(), 0);
    std::stable_sort(class_order.begin(), class_order.end(), [&](int a, int b) {
      return probabilities(i, a) > probabilities(i, b);
    });
    for (int r = 0; r < k; ++r) {
      if (class_order[r] == labels[i]) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

ConfidenceHistogram confidence_histogram(const std::vector<double>& confidences, int bins) {
  if (bins < 1) raise(ErrorCode::config_invalid, "histogram needs at least one bin");
  ConfidenceHistogram hist;
  hist.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) hist.edges[b] = static_cast<double>(b) / bins;
  hist.counts.assign(bins, 0);
  for (double value : confidences) {
    if (!(value >= 0.0 && value <= 1.0)) {
      raise(ErrorCode::out_of_range_value,
            "confidence " + std::to_string(value) + " outside [0,1]");
    }
    // First bin is closed on both sides, the others are (lo, hi].
    int bin = value <= hist.edges[1] ? 0 : static_cast<int>(std::ceil(value * bins)) - 1;
    bin = std::min(bin, bins - 1);
    ++hist.counts[bin];
  }
  return hist;
}

namespace {

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_real_cell(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    raise(ErrorCode::parse_error,
          "metrics line " + std::to_string(line) + ": bad real '" + text + "'");
  }
  return value;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << "mode,seed,iteration,samples_seen,auc,average_precision,top_k,k\n";
  for (const auto& r : records) {
    out << r.mode << ',' << r.seed << ',' << r.iteration << ',' << r.samples_seen << ','
        << format_real(r.auc) << ',' << format_real(r.average_precision) << ','
        << format_real(r.top_k) << ',' << r.k << '\n';
  }
}

std::vector<MetricsRecord> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) raise(ErrorCode::parse_error, "empty metrics file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "mode,seed,iteration,samples_seen,auc,average_precision,top_k,k") {
    raise(ErrorCode::parse_error, "unexpected metrics header: '" + line + "'");
  }
  std::vector<MetricsRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) {
      raise(ErrorCode::parse_error, "metrics line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells");
    }
    MetricsRecord r;
    r.mode = cells[0];
    r.seed = static_cast<std::uint64_t>(parse_real_cell(cells[1], line_no));
    r.iteration = static_cast<int>(parse_real_cell(cells[2], line_no));
    r.samples_seen = static_cast<std::uint64_t>(parse_real_cell(cells[3], line_no));
    r.auc = parse_real_cell(cells[4], line_no);
    r.average_precision = parse_real_cell(cells[5], line_no);
    r.top_k = parse_real_cell(cells[6], line_no);
    r.k = static_cast<int>(parse_real_cell(cells[7], line_no));
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<MetricsRecord> parse_metrics_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open metrics file '" + path + "'");
  return parse_metrics_csv(in);
}

void write_histograms_csv(std::ostream& out, const std::vector<ConfidenceHistogram>& histograms) {
  out << "iteration,bin_lo,bin_hi,count\n";
  for (const auto& hist : histograms) {
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
      out << hist.iteration << ',' << format_real(hist.edges[b]) << ','
          << format_real(hist.edges[b + 1]) << ',' << hist.counts[b] << '\n';
    }
  }
}

}  // namespace wfal
