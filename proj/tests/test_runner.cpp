#include <catch2/catch_amalgamated.hpp>

#include <atomic>

#include "planprobe/runner.hpp"
#include "support/synthetic_scenarios.hpp"

using namespace planprobe;

TEST_CASE("worker pool covers every index once and propagates errors", "[runner]")
{
  SECTION("full coverage under parallelism")
  {
    std::vector<std::atomic<int>> hits(100);
    run_worker_pool(
      hits.size(), 4, [] { return std::make_unique<int>(0); },
      [&](int &, size_t i) { hits[i].fetch_add(1); });
    for (const auto & h : hits) {
      CHECK(h.load() == 1);
    }
  }
  SECTION("a worker exception reaches the caller")
  {
    CHECK_THROWS_AS(run_worker_pool(
                      8, 3, [] { return std::make_unique<int>(0); },
                      [&](int &, size_t i) {
                        if (i == 5) {
                          throw ValidationError("boom");
                        }
                      }),
                    ValidationError);
  }
}

TEST_CASE("open-loop runner ranks the expert echo above the extrapolator", "[runner]")
{
  const auto corpus = testsupport::make_replay_corpus();  // contains curved roads
  RunConfig cfg;
  cfg.jobs = 2;

  cfg.agent.kind = "expert_echo";
  const auto echo_rows = run_open_loop_corpus(corpus, cfg);
  cfg.agent.kind = "mock_prior_extrapolator";
  const auto extrapolator_rows = run_open_loop_corpus(corpus, cfg);
  REQUIRE(echo_rows.size() == extrapolator_rows.size());
  REQUIRE(echo_rows.size() == corpus.size() * 3);

  double echo_mean = 0.0;
  double extrapolator_mean = 0.0;
  for (size_t i = 0; i < echo_rows.size(); ++i) {
    CHECK(echo_rows[i].ok);
    CHECK(echo_rows[i].breakdown.composite == 100.0);
    echo_mean += echo_rows[i].breakdown.composite;
    extrapolator_mean += extrapolator_rows[i].breakdown.composite;
  }
  CHECK(echo_mean > extrapolator_mean);

  // Rows come out in corpus-then-horizon order regardless of scheduling.
  for (size_t i = 0; i < corpus.size(); ++i) {
    for (size_t h = 0; h < 3; ++h) {
      CHECK(echo_rows[i * 3 + h].scenario_id == corpus[i].id);
    }
  }
}

TEST_CASE("closed-loop runner tags agent failures and scores them zero", "[runner]")
{
  auto corpus = testsupport::make_replay_corpus();
  RunConfig cfg;
  cfg.horizons = {3.0};
  cfg.agent.kind = "mock_scene_grounded";
  // Strand one scenario's ego far away from any lane.
  corpus[1].ego_state.pose = Pose2D{500.0, 500.0, 0.0};
  corpus[1].ego_history.points.back().pose = corpus[1].ego_state.pose;
  const auto rows = run_closed_loop_corpus(corpus, cfg);
  REQUIRE(rows.size() == corpus.size());
  CHECK_FALSE(rows[1].ok);
  CHECK(rows[1].breakdown.composite == 0.0);
  CHECK(rows[1].breakdown.error_tag == "agent_error");
  CHECK(rows[0].ok);
}

TEST_CASE("probe runner honors the kind selection", "[runner]")
{
  const auto corpus = testsupport::make_replay_corpus();
  RunConfig cfg;
  cfg.jobs = 2;
  cfg.agent.kind = "mock_prior_extrapolator";
  cfg.probe_kinds = "lateral_offset";
  auto reports = run_probe_corpus(corpus, cfg);
  CHECK(reports.size() == 1);
  CHECK(reports.begin()->first == ProbeKind::lateral_offset);

  cfg.probe_kinds = "both";
  reports = run_probe_corpus(corpus, cfg);
  CHECK(reports.size() == 2);
  // Parallel and serial paths agree.
  RunConfig serial = cfg;
  serial.jobs = 1;
  const auto serial_reports = run_probe_corpus(corpus, serial);
  for (const auto & [kind, report] : reports) {
    CHECK(report.flagged_fraction == serial_reports.at(kind).flagged_fraction);
    CHECK(report.mean_abs_deviation_m == serial_reports.at(kind).mean_abs_deviation_m);
  }
}

TEST_CASE("comfort bounds can be tightened through the replay config", "[runner]")
{
  const auto corpus = testsupport::make_replay_corpus();
  RunConfig cfg;
  cfg.horizons = {3.0};
  cfg.agent.kind = "expert_echo";
  cfg.replay.comfort.yaw_rate_abs = 0.05;  // below the curved scenarios' yaw rate
  const auto rows = run_closed_loop_corpus(corpus, cfg);
  bool any_comfort_fail = false;
  for (const auto & row : rows) {
    any_comfort_fail = any_comfort_fail || row.breakdown.s_comfort == 0;
  }
  CHECK(any_comfort_fail);
}
