// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if
// anything fails. Run it from ctest or directly; an optional argument
// restricts the run to one criterion number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "wfal/active_learning.hpp"
#include "wfal/experiment.hpp"
#include "wfal/gcn.hpp"
#include "wfal/metrics.hpp"
#include "wfal/ssl.hpp"

using namespace wfal;
namespace fs = std::filesystem;

namespace {

#ifndef WFAL_CLI_PATH
#define WFAL_CLI_PATH "./wfal"
#endif
#ifndef WFAL_DATA_DIR
#define WFAL_DATA_DIR "data"
#endif

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

AccumulatedGraph random_labeled_graph(std::size_t n, std::size_t d, RngStream& rng,
                                      int classes = 5) {
  WorkflowGraph g;
  g.workflow_name = "wf";
  g.run_id = "r";
  g.n_nodes = n;
  g.features = DenseMatrix(n, d);
  for (double& v : g.features.data()) v = rng.normal();
  g.labels.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    g.node_ids.push_back("j" + std::to_string(i));
    const int cls = static_cast<int>(rng.uniform_index(classes));
    g.labels->push_back(cls == 0 ? AnomalyClass::normal()
                                 : AnomalyClass::make(static_cast<AnomalyType>(cls), 0.5));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.4) g.edges.emplace_back(i, j);
    }
  }
  return accumulate({g});
}

// ---- criterion 1: gradient correctness -------------------------------

bool check_gradients_for(const std::string& kind, int wanted, double* worst) {
  int checked = 0;
  for (std::uint64_t attempt = 0; attempt < 200 && checked < wanted; ++attempt) {
    RngStream rng(1000 + attempt);
    const std::size_t n = 3 + rng.uniform_index(6);  // n <= 8
    const auto graph = random_labeled_graph(n, 3, rng, 2);

    std::unique_ptr<Model> model;
    EvalContext ctx{700 + attempt, 1, nullptr};
    if (kind == "gcn") {
      GcnConfig cfg{3, 4, 2};
      model = std::make_unique<GcnModel>(cfg, RngStream(2000 + attempt).substream("init"));
      const auto& gcn = static_cast<const GcnModel&>(*model);
      const auto trace =
          gcn_forward(gcn.params(), graph.normalized_adjacency, graph.features);
      if (!testing::away_from_zero(trace.a1) || !testing::away_from_zero(trace.a2)) continue;
    } else {
      SslConfig cfg;
      cfg.input_dim = 3;
      cfg.hidden = 4;
      cfg.latent = 3;
      cfg.mask_fraction = 0.4;
      model = std::make_unique<SslModel>(cfg, RngStream(3000 + attempt).substream("init"));
      const auto& ssl = static_cast<const SslModel&>(*model);
      RngStream aug_rng = RngStream(ctx.seed).substream("ssl-aug", 1);
      const auto augmented =
          augment_features(graph.features, cfg.mask_fraction, cfg.noise_scale, aug_rng);
      RngStream fwd_rng = RngStream(ctx.seed).substream("ssl-gumbel", 1);
      const auto trace = ssl_forward(ssl.params(), cfg, graph.normalized_adjacency,
                                     graph.features, augmented.features, fwd_rng);
      bool safe = testing::away_from_zero(trace.clean.ea1) &&
                  testing::away_from_zero(trace.clean.ea2) &&
                  testing::away_from_zero(trace.clean.da1) &&
                  testing::away_from_zero(trace.aug.ea1) &&
                  testing::away_from_zero(trace.aug.ea2) &&
                  testing::away_from_zero(trace.aug.da1);
      for (std::size_t i = 0; safe && i < n; ++i) {
        double dist_sq = 0.0;
        for (std::size_t j = 0; j < trace.clean.z.cols(); ++j) {
          const double e = trace.clean.z(i, j) - trace.aug.z(i, j);
          dist_sq += e * e;
        }
        const double dist = std::sqrt(dist_sq);
        if (dist < 1e-3 || std::abs(dist - cfg.margin) < 1e-3) safe = false;
      }
      if (!safe) continue;
    }
    ++checked;

    const auto analytic = model->loss_and_grads(graph, ctx);
    auto loss_fn = [&]() { return model->loss(graph, ctx); };
    const auto tensors = model->tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      const auto numeric = testing::fd_gradient(*tensors[t], loss_fn, 1e-5);
      const double err = testing::norm_relative_error(analytic.param_grads[t], numeric);
      *worst = std::max(*worst, err);
      if (err >= 1e-6) return false;
    }
    AccumulatedGraph mutable_graph = graph;
    auto feature_loss = [&]() { return model->loss(mutable_graph, ctx); };
    const auto numeric_features =
        testing::fd_gradient(mutable_graph.features, feature_loss, 1e-5);
    const double err = testing::norm_relative_error(analytic.feature_grad, numeric_features);
    *worst = std::max(*worst, err);
    if (err >= 1e-6) return false;
  }
  return checked == wanted;
}

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  const bool ok = check_gradients_for("gcn", 20, &worst) && check_gradients_for("ssl", 20, &worst);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "gradient checks, 20 gcn + 20 ssl instances, worst rel err %.2e, %.1fs", worst,
                secs);
  report(1, ok && secs < 60.0, buf);
}

// ---- criterion 2: metric oracles -------------------------------------

double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

double ap_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double positives = 0.0;
  for (int label : labels) positives += label != 0 ? 1.0 : 0.0;
  double hits = 0.0, sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) {
      hits += 1.0;
      sum += hits / static_cast<double>(rank + 1);
    }
  }
  return sum / positives;
}

void criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(555);
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(199);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::floor(rng.uniform() * 16.0) / 16.0;
      labels[i] = rng.uniform() < 0.3 ? 1 : 0;
      pos = pos || labels[i] == 1;
      neg = neg || labels[i] == 0;
    }
    if (!pos) labels[0] = 1;
    if (!neg) labels[n - 1] = 0;
    worst = std::max(worst, std::abs(roc_auc(scores, labels) - auc_oracle(scores, labels)));
    worst = std::max(worst,
                     std::abs(average_precision(scores, labels) - ap_oracle(scores, labels)));
    ok = ok && worst <= 1e-12;

    DenseMatrix probs(n, 4);
    std::vector<int> multi(n);
    for (std::size_t i = 0; i < n; ++i) {
      multi[i] = static_cast<int>(rng.uniform_index(4));
      for (std::size_t c = 0; c < 4; ++c) probs(i, c) = rng.uniform();
    }
    double previous = 0.0;
    for (int k = 1; k <= 4; ++k) {
      const double value = top_k_precision(probs, multi, k);
      ok = ok && value >= previous;
      previous = value;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "auc/ap vs brute-force oracles on 100 instances, worst |diff| %.1e, %.1fs", worst,
                secs);
  report(2, ok && secs < 60.0, buf);
}

// ---- criterion 3: block-diagonal equivalence --------------------------

void criterion_3() {
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    RngStream rng(777 + trial);
    const std::size_t count = 2 + rng.uniform_index(3);
    std::vector<WorkflowGraph> graphs;
    for (std::size_t g = 0; g < count; ++g) {
      WorkflowGraph wg;
      wg.workflow_name = "wf";
      wg.run_id = "r" + std::to_string(g);
      wg.n_nodes = 2 + rng.uniform_index(6);
      wg.features = DenseMatrix(wg.n_nodes, 4);
      for (double& v : wg.features.data()) v = rng.normal();
      wg.labels.emplace();
      for (std::size_t i = 0; i < wg.n_nodes; ++i) {
        wg.node_ids.push_back("j" + std::to_string(i));
        wg.labels->push_back(AnomalyClass::normal());
        for (std::size_t j = i + 1; j < wg.n_nodes; ++j) {
          if (rng.uniform() < 0.5) wg.edges.emplace_back(i, j);
        }
      }
      graphs.push_back(std::move(wg));
    }
    GcnConfig cfg{4, 8, 5};
    GcnModel model(cfg, RngStream(881 + trial).substream("init"));
    const auto accumulated = accumulate(graphs);
    const auto whole = *model.class_probabilities(accumulated, {});
    std::size_t row = 0;
    for (const auto& graph : graphs) {
      const auto part = *model.class_probabilities(accumulate({graph}), {});
      for (std::size_t i = 0; i < part.rows(); ++i, ++row) {
        for (std::size_t c = 0; c < part.cols(); ++c) {
          worst = std::max(worst, std::abs(part(i, c) - whole(row, c)));
        }
      }
    }
    ok = ok && worst <= 1e-10;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "block-diagonal forward == concatenated per-graph forwards, worst |diff| %.1e",
                worst);
  report(3, ok, buf);
}

// ---- criteria 4-7, 10: training experiments ---------------------------

RunConfig base_train_config(const std::string& model, const std::string& mode) {
  std::ostringstream config;
  config << "{\"command\":\"train\",\"model\":\"" << model << "\",\"mode\":\"" << mode
         << "\",\"preset\":\"genome\",\"data_dir\":\"" << WFAL_DATA_DIR
         << "\",\"baseline_pool\":20,\"baseline_chunk\":2}";
  return parse_run_config(config.str());
}

double final_mean_auc(const TrainOutcome& outcome) {
  double sum = 0.0;
  for (const auto& seed : outcome.per_seed) sum += seed.history.back().auc;
  return sum / static_cast<double>(outcome.per_seed.size());
}

void criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail = "active vs baseline at matched budget:";
  for (const std::string model : {"gcn", "ssl"}) {
    const auto active = run_training(base_train_config(model, "active"), false);
    const auto baseline = run_training(base_train_config(model, "baseline"), false);
    const double gap = final_mean_auc(active) - final_mean_auc(baseline);
    char buf[96];
    std::snprintf(buf, sizeof(buf), " %s %.3f vs %.3f (gap %+.3f)", model.c_str(),
                  final_mean_auc(active), final_mean_auc(baseline), gap);
    detail += buf;
    ok = ok && gap >= 0.02;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), ", %.0fs", secs);
  report(4, ok && secs < 600.0, detail + buf);
}

void criterion_5() {
  bool ok = true;
  std::string detail = "third-term ablation:";
  for (const std::string model : {"gcn", "ssl"}) {
    const auto with_term = run_training(base_train_config(model, "active"), false);
    const auto without = run_training(base_train_config(model, "ablation"), false);
    const double full = final_mean_auc(with_term);
    const double ablated = final_mean_auc(without);
    char buf[96];
    std::snprintf(buf, sizeof(buf), " %s lambda1 %.3f >= lambda0 %.3f", model.c_str(), full,
                  ablated);
    detail += buf;
    ok = ok && full >= ablated;
  }
  report(5, ok, detail);
}

void criterion_6() {
  const auto outcome = run_training(base_train_config("gcn", "active"), false);
  int narrowed = 0;
  for (const auto& seed : outcome.per_seed) {
    // First post-burn-in iteration (burn_in = 1 -> k = 2) vs the final one.
    const ScoreReport* first = nullptr;
    const ScoreReport* last = nullptr;
    for (const auto& event : seed.events) {
      if (event.iteration == 2) first = &event.report;
      last = &event.report;
    }
    if (first == nullptr || last == nullptr) continue;
    auto stats = [](const ScoreReport& r) {
      double mean = 0.0;
      for (double c : r.confidence) mean += c;
      mean /= static_cast<double>(r.confidence.size());
      double var = 0.0;
      for (double c : r.confidence) var += (c - mean) * (c - mean);
      return std::make_pair(mean, std::sqrt(var / static_cast<double>(r.confidence.size())));
    };
    const auto [first_mean, first_std] = stats(*first);
    const auto [last_mean, last_std] = stats(*last);
    if (last_std < first_std && last_mean > first_mean) ++narrowed;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "confidence narrowing (std down, mean up) for %d of %d seeds", narrowed,
                static_cast<int>(outcome.per_seed.size()));
  report(6, narrowed >= 4, buf);
}

void criterion_7() {
  RunConfig active_cfg = base_train_config("gcn", "active");
  active_cfg.al.lambda = 0.0;
  active_cfg.al.zeta = 0;
  active_cfg.al.burn_in = active_cfg.al.max_iterations;  // every request random
  RunConfig baseline_cfg = base_train_config("gcn", "baseline");
  baseline_cfg.al.lambda = 0.0;
  baseline_cfg.al.zeta = 0;

  const auto active = run_training(active_cfg, false);
  const auto baseline = run_training(baseline_cfg, false);
  bool ok = active.all_metrics.size() == baseline.all_metrics.size();
  for (std::size_t i = 0; ok && i < active.all_metrics.size(); ++i) {
    const auto& a = active.all_metrics[i];
    const auto& b = baseline.all_metrics[i];
    ok = a.seed == b.seed && a.iteration == b.iteration && a.samples_seen == b.samples_seen &&
         a.auc == b.auc && a.average_precision == b.average_precision && a.top_k == b.top_k;
  }
  report(7, ok,
         "lambda=0, zeta=0, burn_in=K active history is bit-identical to the baseline history");
}

// ---- criterion 8: CLI determinism -------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return fs::exists(a) && fs::exists(b) && slurp(a) == slurp(b);
}

void criterion_8() {
  const fs::path root = fs::temp_directory_path() / "wfal_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = WFAL_CLI_PATH;
  const std::string data = WFAL_DATA_DIR;
  auto shell = [&](const std::string& command) {
    const std::string full = command + " > /dev/null 2>&1";
    return std::system(full.c_str()) == 0;
  };

  bool ok = true;
  for (int run = 1; run <= 2 && ok; ++run) {
    ok = shell(cli + " simulate --workflows " + data + "/genome.json --infra " + data +
               "/infrastructure.json --experiments " + data + "/experiments_example.json" +
               " --out " + (root / ("sim" + std::to_string(run))).string());
  }
  ok = ok && same_bytes(root / "sim1/traces.csv", root / "sim2/traces.csv");

  for (int run = 1; run <= 2 && ok; ++run) {
    ok = shell(cli + " train-active --paper-preset genome --model gcn --seeds 7 --iters 3 --out " +
               (root / ("train" + std::to_string(run))).string());
  }
  ok = ok && same_bytes(root / "train1/metrics.csv", root / "train2/metrics.csv") &&
       same_bytes(root / "train1/histograms.csv", root / "train2/histograms.csv") &&
       same_bytes(root / "train1/checkpoint_seed7.json", root / "train2/checkpoint_seed7.json");

  for (int run = 1; run <= 2 && ok; ++run) {
    ok = shell(cli + " report " + (root / "train1/metrics.csv").string() + " --out " +
               (root / ("rep" + std::to_string(run))).string());
  }
  ok = ok && same_bytes(root / "rep1/report.csv", root / "rep2/report.csv") &&
       same_bytes(root / "rep1/report.json", root / "rep2/report.json");

  report(8, ok, "simulate/train-active/report run twice produce byte-identical outputs");
}

// ---- criterion 9: simulator monotonicity ------------------------------

void criterion_9() {
  bool ok = true;
  std::size_t checked = 0;
  for (const std::string name : {"genome", "montage", "sales"}) {
    const auto workflows = load_workflows(std::string(WFAL_DATA_DIR) + "/" + name + ".json");
    for (const auto& job : workflows.front().jobs) {
      for (AnomalyType type : kInjectableTypes) {
        double previous_runtime = 0.0, previous_stage = 0.0;
        for (int step = 1; step <= 9; ++step) {
          const double magnitude = 0.1 * step;
          const auto factors =
              perturbation_factors(AnomalyClass::make(type, magnitude), job.cpu_fraction);
          const double runtime = job.base_runtime_s * factors.runtime;
          const double stage = factors.stage;
          ok = ok && runtime >= job.base_runtime_s && runtime >= previous_runtime &&
               stage >= previous_stage;
          previous_runtime = runtime;
          previous_stage = stage;
          ++checked;
        }
      }
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "perturbed runtime non-decreasing over magnitudes 0.1..0.9, %zu cases", checked);
  report(9, ok, buf);
}

// ---- criterion 10: paper-scale sanity ----------------------------------

void criterion_10() {
  RunConfig cfg = base_train_config("gcn", "active");
  cfg.seeds = {1};
  const auto outcome = run_training(cfg, false);
  bool ok = outcome.per_seed.size() == 1 && outcome.per_seed[0].events.size() == 10;
  std::uint64_t runs = 0;
  if (ok) {
    for (const auto& event : outcome.per_seed[0].events) {
      ok = ok && event.batch_records == 2 * 138;
    }
    runs = outcome.per_seed[0].history.back().samples_seen;
    ok = ok && runs == 20;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "genome preset: 276 job records per iteration, %llu runs over 10 iterations",
                static_cast<unsigned long long>(runs));
  report(10, ok, buf);
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::vector<std::pair<int, std::function<void()>>> criteria = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
      {9, criterion_9}, {10, criterion_10}};
  for (const auto& [number, fn] : criteria) {
    if (only != 0 && number != only) continue;
    fn();
  }
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  return 0;
}
