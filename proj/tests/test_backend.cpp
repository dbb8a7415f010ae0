#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "wfal/descriptors.hpp"
#include "wfal/error.hpp"
#include "wfal/replay.hpp"
#include "wfal/simulator.hpp"

using namespace wfal;

namespace {

const char* kMinimalWorkflow = R"({
  "workflows": [{
    "name": "tiny",
    "jobs": [
      {"id": "a", "type": "t1", "base_runtime_s": 100.0, "cpu_fraction": 0.8,
       "io_bytes": 1000, "transfer_bytes": 250000000, "parents": []},
      {"id": "b", "type": "t2", "base_runtime_s": 50.0, "cpu_fraction": 0.5,
       "io_bytes": 2000, "transfer_bytes": 0, "parents": ["a"]}
    ]
  }]
})";

const char* kInfra = R"({
  "nodes": [
    {"id": "n1", "cores": 2, "disk_bw_mbps": 200.0, "subnet": "10.0.1.0/24", "anomalous": false},
    {"id": "n2", "cores": 2, "disk_bw_mbps": 200.0, "subnet": "10.0.2.0/24", "anomalous": true}
  ]
})";

WorkflowDesc tiny_workflow() { return parse_workflows_json(kMinimalWorkflow).front(); }

}  // namespace

TEST_CASE("descriptor loaders: minimal valid, ghost parent, negative runtime") {
  const auto workflows = parse_workflows_json(R"({
    "workflows": [{"name": "w", "jobs": [
      {"id": "only", "type": "t", "base_runtime_s": 1.0, "cpu_fraction": 0.5,
       "io_bytes": 1, "transfer_bytes": 1, "parents": []}]}]
  })");
  CHECK(workflows.size() == 1);
  CHECK(workflows[0].jobs.size() == 1);

  try {
    parse_workflows_json(R"({
      "workflows": [{"name": "w", "jobs": [
        {"id": "x", "type": "t", "base_runtime_s": 1.0, "cpu_fraction": 0.5,
         "io_bytes": 1, "transfer_bytes": 1, "parents": ["ghost"]}]}]
    })");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unresolved_reference);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }

  try {
    parse_workflows_json(R"({
      "workflows": [{"name": "w", "jobs": [
        {"id": "x", "type": "t", "base_runtime_s": -2.0, "cpu_fraction": 0.5,
         "io_bytes": 1, "transfer_bytes": 1, "parents": []}]}]
    })");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::schema_violation);
  }

  CHECK_THROWS_AS(parse_workflows_json("not json"), Error);
}

TEST_CASE("descriptor loaders: unknown fields rejected unless lax") {
  const std::string with_extra = R"({
    "nodes": [{"id": "n", "cores": 1, "disk_bw_mbps": 10.0, "subnet": "s",
               "anomalous": false, "comment": "hi"}]
  })";
  CHECK_THROWS_AS(parse_infrastructure_json(with_extra, false), Error);
  CHECK_NOTHROW(parse_infrastructure_json(with_extra, true));
}

TEST_CASE("experiments loader validates magnitudes and counts") {
  const auto experiments = parse_experiments_json(R"({
    "experiments": [{"workflow": "tiny", "executions": 2,
                     "anomaly": {"type": "cpu", "magnitude": 0.5, "job_hints": ["a"]}}]
  })");
  CHECK(experiments.experiments[0].executions == 2);
  CHECK(experiments.experiments[0].anomaly.type == AnomalyType::cpu);

  CHECK_THROWS_AS(parse_experiments_json(R"({
    "experiments": [{"workflow": "w", "executions": 0,
                     "anomaly": {"type": "cpu", "magnitude": 0.5}}]
  })"),
                  Error);
  CHECK_THROWS_AS(parse_experiments_json(R"({
    "experiments": [{"workflow": "w", "executions": 1,
                     "anomaly": {"type": "cpu", "magnitude": 1.5}}]
  })"),
                  Error);
}

TEST_CASE("perturb: stated formulas and identity") {
  TraceRecord base;
  base.workflow = "w";
  base.run_id = "r";
  base.job_id = "a";
  base.job_type = "t";
  base.submit_ts = 10.0;
  base.start_ts = 12.0;
  base.end_ts = 112.0;
  base.runtime_s = 100.0;
  base.cpu_time_s = 80.0;
  base.stage_in_s = 2.0;
  base.stage_out_s = 10.0;

  const auto cpu = perturb(base, 0.8, AnomalyClass::make(AnomalyType::cpu, 0.5));
  CHECK(cpu.runtime_s == doctest::Approx(180.0));
  CHECK(cpu.cpu_time_s == doctest::Approx(80.0));
  CHECK(cpu.end_ts - cpu.start_ts == doctest::Approx(cpu.runtime_s));
  CHECK(cpu.anomaly.type == AnomalyType::cpu);

  const auto same = perturb(base, 0.8, AnomalyClass::normal());
  CHECK(same.runtime_s == base.runtime_s);
  CHECK(same.stage_in_s == base.stage_in_s);

  const auto dup = perturb(base, 0.8, AnomalyClass::make(AnomalyType::net_dup, 0.5));
  CHECK(dup.stage_out_s == doctest::Approx(15.0));
  CHECK(dup.runtime_s == doctest::Approx(100.0));

  const auto hdd = perturb(base, 0.8, AnomalyClass::make(AnomalyType::hdd, 0.5));
  CHECK(hdd.runtime_s == doctest::Approx(100.0 * (0.8 + 0.2 / 0.5)));
  CHECK(hdd.stage_in_s == doctest::Approx(4.0));

  CHECK_THROWS_AS(perturbation_factors(AnomalyClass{AnomalyType::cpu, 1.0}, 0.8), Error);
}

TEST_CASE("perturbation is monotone in magnitude") {
  for (AnomalyType type : kInjectableTypes) {
    double previous_runtime = 1.0, previous_stage = 1.0;
    for (double m = 0.1; m < 0.95; m += 0.1) {
      const auto f = perturbation_factors(AnomalyClass::make(type, m), 0.7);
      CHECK(f.runtime >= previous_runtime);
      CHECK(f.stage >= previous_stage);
      CHECK(f.runtime >= 1.0);
      CHECK(f.stage >= 1.0);
      previous_runtime = f.runtime;
      previous_stage = f.stage;
    }
  }
}

TEST_CASE("simulate_execution: noiseless identity and hinted perturbation") {
  const auto workflow = tiny_workflow();
  const auto infra = parse_infrastructure_json(kInfra);
  SimOptions options;
  options.noise_sigma = 0.0;

  ExperimentRequest normal;
  normal.workflow_name = "tiny";
  normal.executions = 1;
  const auto records = simulate_execution(workflow, infra, normal, "r0", RngStream(1), options);
  REQUIRE(records.size() == 2);
  CHECK(records[0].runtime_s == doctest::Approx(100.0));
  CHECK(records[1].runtime_s == doctest::Approx(50.0));
  CHECK(records[0].anomaly.is_normal());
  // Child starts after the parent's end plus its stage-out.
  CHECK(records[1].start_ts >= records[0].end_ts);

  ExperimentRequest hinted = normal;
  hinted.anomaly = AnomalyClass::make(AnomalyType::cpu, 0.5);
  hinted.job_hints = {"a"};
  const auto perturbed =
      simulate_execution(workflow, infra, hinted, "r1", RngStream(1), options);
  CHECK(perturbed[0].runtime_s == doctest::Approx(100.0 * (0.8 / 0.5 + 0.2)));
  CHECK(perturbed[0].anomaly.type == AnomalyType::cpu);
  CHECK(perturbed[1].anomaly.is_normal());

  ExperimentRequest ghost = normal;
  ghost.anomaly = AnomalyClass::make(AnomalyType::cpu, 0.5);
  ghost.job_hints = {"nope"};
  CHECK_THROWS_AS(simulate_execution(workflow, infra, ghost, "r2", RngStream(1), options), Error);

  ExperimentRequest wrong = normal;
  wrong.workflow_name = "other";
  CHECK_THROWS_AS(simulate_execution(workflow, infra, wrong, "r3", RngStream(1), options), Error);
}

TEST_CASE("simulate_execution: determinism and noise substreams") {
  const auto workflow = tiny_workflow();
  const auto infra = parse_infrastructure_json(kInfra);
  SimOptions options;  // default noise

  ExperimentRequest request;
  request.workflow_name = "tiny";
  request.executions = 1;
  const auto a = simulate_execution(workflow, infra, request, "r0", RngStream(5, 1), options);
  const auto b = simulate_execution(workflow, infra, request, "r0", RngStream(5, 1), options);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].runtime_s == b[i].runtime_s);
    CHECK(a[i].end_ts == b[i].end_ts);
  }
  const auto c = simulate_execution(workflow, infra, request, "r1", RngStream(5, 2), options);
  CHECK(a[0].runtime_s != c[0].runtime_s);
}

TEST_CASE("schedule validity on a wider synthetic run") {
  const auto workflows = parse_workflows_json(R"({
    "workflows": [{"name": "fan", "jobs": [
      {"id": "root", "type": "t", "base_runtime_s": 5.0, "cpu_fraction": 0.5,
       "io_bytes": 10, "transfer_bytes": 1000000, "parents": []},
      {"id": "m1", "type": "t", "base_runtime_s": 7.0, "cpu_fraction": 0.5,
       "io_bytes": 10, "transfer_bytes": 1000000, "parents": ["root"]},
      {"id": "m2", "type": "t", "base_runtime_s": 7.0, "cpu_fraction": 0.5,
       "io_bytes": 10, "transfer_bytes": 1000000, "parents": ["root"]},
      {"id": "m3", "type": "t", "base_runtime_s": 7.0, "cpu_fraction": 0.5,
       "io_bytes": 10, "transfer_bytes": 1000000, "parents": ["root"]},
      {"id": "join", "type": "t", "base_runtime_s": 3.0, "cpu_fraction": 0.5,
       "io_bytes": 10, "transfer_bytes": 1000000, "parents": ["m1", "m2", "m3"]}
    ]}]
  })");
  const auto infra = parse_infrastructure_json(R"({
    "nodes": [{"id": "n", "cores": 2, "disk_bw_mbps": 100.0, "subnet": "s", "anomalous": false}]
  })");
  ExperimentRequest request;
  request.workflow_name = "fan";
  request.executions = 1;
  const auto records =
      simulate_execution(workflows[0], infra, request, "r", RngStream(3), SimOptions{});
  std::map<std::string, const TraceRecord*> by_id;
  for (const auto& r : records) by_id[r.job_id] = &r;
  for (const auto& job : workflows[0].jobs) {
    for (const auto& parent : job.parents) {
      CHECK(by_id.at(job.id)->start_ts >= by_id.at(parent)->end_ts);
    }
    CHECK(by_id.at(job.id)->ready_ts <= by_id.at(job.id)->submit_ts);
  }
}

TEST_CASE("trace csv: round trip, invariant line numbers, bad header") {
  const auto workflow = tiny_workflow();
  const auto infra = parse_infrastructure_json(kInfra);
  ExperimentRequest request;
  request.workflow_name = "tiny";
  request.executions = 1;
  const auto records =
      simulate_execution(workflow, infra, request, "r0", RngStream(7), SimOptions{});

  std::stringstream buffer;
  write_traces_csv(buffer, records);
  const auto parsed = parse_traces_csv(buffer);
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed[i].runtime_s == records[i].runtime_s);
    CHECK(parsed[i].end_ts == records[i].end_ts);
    CHECK(parsed[i].bytes_read == records[i].bytes_read);
    CHECK(parsed[i].job_id == records[i].job_id);
    CHECK(parsed[i].anomaly == records[i].anomaly);
  }

  // end_ts < start_ts on data line 2 (file line 3).
  std::stringstream bad;
  write_traces_csv(bad, records);
  std::string text = bad.str();
  const auto line_start = text.find('\n', text.find('\n') + 1) + 1;
  std::string broken = text.substr(0, line_start);
  std::string line = text.substr(line_start);
  // Swap start_ts/end_ts by rewriting the record.
  TraceRecord flipped = records[1];
  std::swap(flipped.start_ts, flipped.end_ts);
  flipped.start_ts += 1.0;
  (void)line;
  std::stringstream one_row;
  one_row << broken;
  one_row << flipped.workflow << ',' << flipped.run_id << ',' << flipped.job_id << ','
          << flipped.job_type << ',' << flipped.ready_ts << ',' << flipped.submit_ts << ','
          << flipped.start_ts << ',' << flipped.end_ts << ',' << flipped.runtime_s << ','
          << flipped.cpu_time_s << ',' << flipped.bytes_read << ',' << flipped.bytes_written
          << ',' << flipped.stage_in_s << ',' << flipped.stage_out_s << ','
          << to_string(flipped.anomaly.type) << ',' << flipped.anomaly.magnitude << "\n";
  try {
    parse_traces_csv(one_row);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invariant_violation);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::stringstream wrong_header("a,b,c\n");
  try {
    parse_traces_csv(wrong_header);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
  }
}

TEST_CASE("trace pool: exhaustion, determinism, no repeated run ids") {
  const auto workflow = tiny_workflow();
  const auto infra = parse_infrastructure_json(kInfra);
  SimOptions options;
  std::vector<PoolRun> runs;
  for (int i = 0; i < 4; ++i) {
    ExperimentRequest request;
    request.workflow_name = "tiny";
    request.executions = 1;
    request.anomaly = AnomalyClass::make(i % 2 == 0 ? AnomalyType::cpu : AnomalyType::hdd, 0.5);
    request.job_hints = {"a"};
    const auto records = simulate_execution(workflow, infra, request, "run" + std::to_string(i),
                                            RngStream(10).substream("sim-run", i), options);
    runs.push_back(make_pool_run(records));
  }
  CHECK(runs[0].injected == AnomalyType::cpu);
  CHECK(runs[1].injected == AnomalyType::hdd);

  TracePool pool(runs, RngStream(2).substream("pool-shuffle"));
  ExperimentRequest want_cpu;
  want_cpu.workflow_name = "tiny";
  want_cpu.executions = 2;
  want_cpu.anomaly = AnomalyClass::make(AnomalyType::cpu, 0.3);
  want_cpu.origin = RequestOrigin::random;
  const auto selected = replay_select(pool, want_cpu);
  CHECK(selected.size() == 2);
  for (const auto& run : selected) CHECK(run.injected == AnomalyType::cpu);
  CHECK(pool.remaining(AnomalyType::cpu) == 0);

  try {
    TracePool p2(runs, RngStream(2).substream("pool-shuffle"));
    ExperimentRequest too_many = want_cpu;
    too_many.executions = 3;
    replay_select(p2, too_many);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::pool_exhausted);
    CHECK(std::string(e.what()).find("cpu") != std::string::npos);
  }

  // Same seed, same selection order.
  TracePool p3(runs, RngStream(9).substream("pool-shuffle"));
  TracePool p4(runs, RngStream(9).substream("pool-shuffle"));
  const auto s3 = p3.take_sequential(4);
  const auto s4 = p4.take_sequential(4);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(s3[i].run_id == s4[i].run_id);
    CHECK(seen.insert(s3[i].run_id).second);  // never the same run twice
  }
}
