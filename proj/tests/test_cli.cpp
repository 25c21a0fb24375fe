#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "planprobe/attention.hpp"
#include "planprobe/config.hpp"
#include "planprobe/report.hpp"
#include "planprobe/scenario_io.hpp"
#include "support/synthetic_dumps.hpp"
#include "support/synthetic_scenarios.hpp"

using namespace planprobe;
namespace fs = std::filesystem;

namespace {

struct CliFixture {
  fs::path dir;
  fs::path corpus_path;

  CliFixture()
  {
    dir = fs::temp_directory_path() /
          ("planprobe_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
    corpus_path = dir / "corpus.jsonl";
    save_scenarios(corpus_path.string(), testsupport::make_replay_corpus());
  }
  ~CliFixture() { fs::remove_all(dir); }

  static int & counter()
  {
    static int n = 0;
    return n;
  }

  int run(const std::string & args, const std::string & env_prefix = "") const
  {
    const std::string cmd =
      env_prefix + " " + std::string(PLANPROBE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string & name) const
  {
    std::ifstream in(dir / name, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  }
};

}  // namespace

TEST_CASE("run config round-trips through JSON", "[cli]")
{
  RunConfig cfg;
  cfg.corpus = "x.jsonl";
  cfg.agent.kind = "mock_noisy";
  cfg.agent.noise_sigma = 0.5;
  cfg.horizons = {1.0, 3.0};
  cfg.probe.offset_factor = 0.2;
  cfg.replay.replan_period_s = 0.5;
  cfg.replay.ablation_flags = {"no_history"};
  cfg.seed = 42;
  cfg.jobs = 3;
  const RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.corpus == cfg.corpus);
  CHECK(back.agent.kind == cfg.agent.kind);
  CHECK(back.agent.noise_sigma == cfg.agent.noise_sigma);
  CHECK(back.horizons == cfg.horizons);
  CHECK(back.probe.offset_factor == cfg.probe.offset_factor);
  CHECK(back.replay.replan_period_s == cfg.replay.replan_period_s);
  CHECK(back.replay.ablation_flags == cfg.replay.ablation_flags);
  CHECK(back.seed == cfg.seed);
  CHECK(back.jobs == cfg.jobs);
  CHECK(back.agent.seed == 42);  // the master seed reaches the agent
}

TEST_CASE("config validation rejects bad values", "[cli]")
{
  RunConfig cfg;
  cfg.horizons = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.horizons = {1.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.horizons = {1.0};
  cfg.jobs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.jobs = 1;
  cfg.probe_kinds = "sideways";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("score-open via the CLI writes the documented report fields", "[cli]")
{
  CliFixture fx;
  const int rc = fx.run("score-open --corpus " + fx.corpus_path.string() +
                        " --agent expert_echo --out " + fx.dir.string() + " --log-level error");
  REQUIRE(rc == 0);
  const std::string jsonl = fx.slurp("open_loop_3s.jsonl");
  REQUIRE_FALSE(jsonl.empty());
  std::istringstream lines(jsonl);
  std::string line;
  size_t rows = 0;
  while (std::getline(lines, line)) {
    const json row = json::parse(line);
    for (const char * key :
         {"scenario_id", "horizon_s", "ade", "fde", "ahe", "fhe", "miss_rate", "binaries",
          "score"}) {
      INFO("missing key " << key);
      CHECK(row.contains(key));
    }
    CHECK(row["score"].get<double>() == 100.0);
    ++rows;
  }
  CHECK(rows == 6);
  CHECK_FALSE(fx.slurp("open_loop_summary.json").empty());
  CHECK_FALSE(fx.slurp("manifest.json").empty());
  CHECK(fx.slurp("manifest.json").find("corpus_digest") != std::string::npos);
}

TEST_CASE("the config file and CLI overrides compose", "[cli]")
{
  CliFixture fx;
  json cfg;
  cfg["corpus"] = fx.corpus_path.string();
  cfg["agent"] = {{"kind", "expert_echo"}};
  cfg["horizons"] = {1.0};
  cfg["out"] = fx.dir.string();
  cfg["log_level"] = "error";
  const fs::path cfg_path = fx.dir / "run.json";
  std::ofstream(cfg_path) << cfg.dump();

  SECTION("--config flag")
  {
    REQUIRE(fx.run("score-open --config " + cfg_path.string()) == 0);
    CHECK_FALSE(fx.slurp("open_loop_1s.jsonl").empty());
    CHECK(fx.slurp("open_loop_2s.jsonl").empty());  // only 1 s configured
  }
  SECTION("CAUSAL_PROBE_CONFIG environment fallback")
  {
    REQUIRE(fx.run("score-open", "CAUSAL_PROBE_CONFIG=" + cfg_path.string()) == 0);
    CHECK_FALSE(fx.slurp("open_loop_1s.jsonl").empty());
  }
  SECTION("a flag overrides the config value")
  {
    REQUIRE(fx.run("score-open --config " + cfg_path.string() + " --horizons 2.0") == 0);
    CHECK_FALSE(fx.slurp("open_loop_2s.jsonl").empty());
  }
}

TEST_CASE("configuration errors exit before any scenario runs", "[cli]")
{
  CliFixture fx;
  CHECK(fx.run("probe --corpus " + fx.corpus_path.string() + " --agent vlm_magic --out " +
               fx.dir.string()) == 1);
  CHECK(fx.run("score-open --agent expert_echo --out " + fx.dir.string()) == 1);  // no corpus
  const fs::path empty = fx.dir / "empty.jsonl";
  std::ofstream(empty).close();
  CHECK(fx.run("score-open --corpus " + empty.string() + " --agent expert_echo --out " +
               fx.dir.string()) == 1);
}

TEST_CASE("an agent failing every scenario trips the failure exit code", "[cli]")
{
  CliFixture fx;
  const std::string garbage_agent = " --agent external --agent-cmd \"" +
                                    std::string(STUB_AGENT_PATH) + " --mode garbage\" --out " +
                                    fx.dir.string() + " --log-level error";
  const int rc = fx.run("probe --corpus " + fx.corpus_path.string() + garbage_agent);
  CHECK(rc == 2);
  const json report = json::parse(fx.slurp("probe_lateral_offset.json"));
  CHECK(report["invalid_count"].get<size_t>() == 6);

  CHECK(fx.run("score-open --corpus " + fx.corpus_path.string() + garbage_agent) == 2);
}

TEST_CASE("attention subcommand renders a dump into JSON and CSV", "[cli]")
{
  CliFixture fx;
  SegmentMap segmap;
  segmap.segments["image"] = {0, 8};
  segmap.segments["priors"] = {8, 12};
  segmap.segments["other_text"] = {12, 16};
  segmap.segments["reasoning"] = {16, 24};
  segmap.segments["planning"] = {24, 32};
  auto dump = testsupport::priors_heavy_dump(4, 2, segmap, 32, 0.9);
  dump.segments = segmap;
  const fs::path dump_path = fx.dir / "attn.bin";
  save_attention_dump(dump_path.string(), dump);

  REQUIRE(fx.run("attention --dump " + dump_path.string() + " --out " + fx.dir.string()) == 0);
  const json report = json::parse(fx.slurp("attention_report.json"));
  CHECK(report["rows"].size() == 30);
  const std::string csv = fx.slurp("attention_report.csv");
  CHECK(csv.rfind("bucket,layer,target,source,proportion\n", 0) == 0);

  // Truncated dumps are rejected with a nonzero exit.
  fs::resize_file(dump_path, fs::file_size(dump_path) - 4);
  CHECK(fx.run("attention --dump " + dump_path.string() + " --out " + fx.dir.string()) == 1);
}

TEST_CASE("report subcommand converts score files to CSV", "[cli]")
{
  CliFixture fx;
  REQUIRE(fx.run("score-closed --corpus " + fx.corpus_path.string() +
                 " --agent expert_echo --out " + fx.dir.string() + " --log-level error") == 0);
  REQUIRE(fx.run("report --dir " + fx.dir.string()) == 0);
  const std::string csv = fx.slurp("closed_loop_3s.csv");
  REQUIRE_FALSE(csv.empty());
  CHECK(csv.rfind("scenario_id,", 0) == 0);
  CHECK(csv.find("\r\n") == std::string::npos);  // LF endings only
}

TEST_CASE("ingest rewrites a normalized corpus byte-stably", "[cli]")
{
  CliFixture fx;
  const fs::path rewritten = fx.dir / "normalized.jsonl";
  REQUIRE(fx.run("ingest --corpus " + fx.corpus_path.string() + " --out " + fx.dir.string() +
                 " --rewrite " + rewritten.string()) == 0);
  const fs::path again = fx.dir / "normalized2.jsonl";
  REQUIRE(fx.run("ingest --corpus " + rewritten.string() + " --out " + fx.dir.string() +
                 " --rewrite " + again.string()) == 0);
  std::ifstream a(rewritten, std::ios::binary);
  std::ifstream b(again, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("csv doubles use shortest round-trip formatting", "[cli]")
{
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(100.0) == "100");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
}
