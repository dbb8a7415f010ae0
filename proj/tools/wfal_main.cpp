// Command-line front end. Flags are assembled into the JSON run configuration
// understood by the shared library and executed through the C API.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfal.h"

namespace {

using nlohmann::json;

#ifndef WFAL_DEFAULT_DATA_DIR
#define WFAL_DEFAULT_DATA_DIR "data"
#endif

struct CommonFlags {
  std::string model = "gcn";
  std::string backend = "sim";
  std::string workflows, infra, experiments, traces, out = "out";
  std::string seeds;
  std::string preset;
  int iters = 0;
  int execs_per_iter = 0;
  int burn_in = 0;
  double threshold = -1.0;
  double lambda = -1.0;
  int zeta = -1;
  int random_period = 0;
  int top_k = 0;
  bool force = false;
  bool lax = false;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::string current;
  for (char c : text + ",") {
    if (c == ',') {
      if (!current.empty()) seeds.push_back(std::stoull(current));
      current.clear();
    } else {
      current += c;
    }
  }
  return seeds;
}

void add_common_options(CLI::App* cmd, CommonFlags& flags, bool training) {
  cmd->add_option("--workflows", flags.workflows, "workflows JSON file");
  cmd->add_option("--infra", flags.infra, "infrastructure JSON file");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seeds", flags.seeds, "comma-separated seed list");
  cmd->add_flag("--force", flags.force, "overwrite existing outputs");
  cmd->add_flag("--lax", flags.lax, "accept unknown fields in input files");
  if (training) {
    cmd->add_option("--model", flags.model, "gcn | ssl")
        ->check(CLI::IsMember({"gcn", "ssl"}));
    cmd->add_option("--backend", flags.backend, "sim | replay")
        ->check(CLI::IsMember({"sim", "replay"}));
    cmd->add_option("--traces", flags.traces, "trace CSV for the replay backend");
    cmd->add_option("--iters", flags.iters, "iterations K");
    cmd->add_option("--execs-per-iter", flags.execs_per_iter, "workflow executions per iteration");
    cmd->add_option("--burn-in", flags.burn_in, "burn-in iterations");
    cmd->add_option("--threshold", flags.threshold, "early-stopping threshold on ||s||");
    cmd->add_option("--lambda", flags.lambda, "weight of the task-gradient cost term");
    cmd->add_option("--zeta", flags.zeta, "probe updates for the finite-difference term");
    cmd->add_option("--random-period", flags.random_period,
                    "pick the anomaly class at random every R-th request");
    cmd->add_option("--top-k", flags.top_k, "k for top-k precision");
    cmd->add_option("--paper-preset", flags.preset, "genome | montage | sales")
        ->check(CLI::IsMember({"genome", "montage", "sales"}));
  }
}

json build_config(const CLI::App* cmd, const CommonFlags& flags, const std::string& command,
                  const std::string& mode) {
  json cfg;
  cfg["command"] = command;
  if (!mode.empty()) cfg["mode"] = mode;
  json paths;
  if (cmd->count("--workflows") > 0) paths["workflows"] = flags.workflows;
  if (cmd->count("--infra") > 0) paths["infrastructure"] = flags.infra;
  if (cmd->count("--traces") > 0) paths["traces"] = flags.traces;
  paths["out"] = flags.out;
  cfg["paths"] = std::move(paths);

  if (cmd->count("--model") > 0) cfg["model"] = flags.model;
  if (cmd->count("--backend") > 0) cfg["backend"] = flags.backend;
  if (cmd->count("--paper-preset") > 0) {
    cfg["preset"] = flags.preset;
    cfg["data_dir"] = std::getenv("WFAL_DATA_DIR") != nullptr
                          ? std::string(std::getenv("WFAL_DATA_DIR"))
                          : std::string(WFAL_DEFAULT_DATA_DIR);
  }
  if (cmd->count("--seeds") > 0) {
    cfg["seeds"] = parse_seeds(flags.seeds);
  } else if (const char* env = std::getenv("WFAL_SEED"); env != nullptr) {
    cfg["seeds"] = std::vector<std::uint64_t>{std::stoull(env)};
  }

  json al;
  if (cmd->count("--iters") > 0) al["iterations"] = flags.iters;
  if (cmd->count("--execs-per-iter") > 0) al["executions_per_iteration"] = flags.execs_per_iter;
  if (cmd->count("--burn-in") > 0) al["burn_in"] = flags.burn_in;
  if (cmd->count("--threshold") > 0) al["threshold"] = flags.threshold;
  if (cmd->count("--lambda") > 0) al["lambda"] = flags.lambda;
  if (cmd->count("--zeta") > 0) al["zeta"] = flags.zeta;
  if (cmd->count("--random-period") > 0) al["random_period"] = flags.random_period;
  if (!al.empty()) cfg["al"] = std::move(al);
  if (cmd->count("--top-k") > 0) cfg["top_k"] = flags.top_k;
  if (flags.force) cfg["force"] = true;
  if (flags.lax) cfg["lax"] = true;
  return cfg;
}

int run(const json& cfg) {
  wfal_session* session = nullptr;
  wfal_status status = wfal_session_create(cfg.dump().c_str(), &session);
  if (status == WFAL_OK) status = wfal_run_command(session);
  if (status != WFAL_OK && session != nullptr) {
    std::cerr << "wfal: " << wfal_session_error(session) << "\n";
  }
  wfal_session_destroy(session);
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-learning anomaly detection for computational workflows"};
  app.require_subcommand(1);
  app.set_version_flag("--version", wfal_version());

  CommonFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "run the listed experiments, write traces.csv");
  add_common_options(simulate, sim_flags, false);
  std::string experiments;
  simulate->add_option("--experiments", experiments, "experiments JSON file");

  CommonFlags active_flags;
  auto* train_active =
      app.add_subcommand("train-active", "score-guided training loop against a backend");
  add_common_options(train_active, active_flags, true);

  CommonFlags baseline_flags;
  auto* train_baseline =
      app.add_subcommand("train-baseline", "same update schedule over a fixed random pool");
  add_common_options(train_baseline, baseline_flags, true);

  CommonFlags ablate_flags;
  auto* ablate =
      app.add_subcommand("ablate", "active loop with the task-gradient term removed (lambda=0)");
  add_common_options(ablate, ablate_flags, true);

  CommonFlags report_flags;
  std::vector<std::string> report_inputs;
  auto* report = app.add_subcommand("report", "aggregate metrics files into mean/min/max bands");
  report->add_option("metrics", report_inputs, "metrics.csv files")->required();
  report->add_option("--out", report_flags.out, "output directory");
  report->add_flag("--force", report_flags.force, "overwrite existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (simulate->parsed()) {
    json cfg = build_config(simulate, sim_flags, "simulate", "");
    if (simulate->count("--experiments") > 0) cfg["paths"]["experiments"] = experiments;
    return run(cfg);
  }
  if (train_active->parsed()) {
    return run(build_config(train_active, active_flags, "train", "active"));
  }
  if (train_baseline->parsed()) {
    return run(build_config(train_baseline, baseline_flags, "train", "baseline"));
  }
  if (ablate->parsed()) {
    return run(build_config(ablate, ablate_flags, "train", "ablation"));
  }
  json cfg;
  cfg["command"] = "report";
  cfg["report_inputs"] = report_inputs;
  cfg["paths"] = {{"out", report_flags.out}};
  if (report_flags.force) cfg["force"] = true;
  return run(cfg);
}
