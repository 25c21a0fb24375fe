// Copyright 2026 The planprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planprobe/attention.hpp"
#include "planprobe/config.hpp"
#include "planprobe/grpo.hpp"
#include "planprobe/report.hpp"
#include "planprobe/runner.hpp"
#include "planprobe/scenario_io.hpp"
#include "planprobe/version.hpp"

namespace fs = std::filesystem;
using namespace planprobe;

namespace {

// Exit codes: 0 success, 1 configuration or input error, 2 more than half of
// the scenarios failed, 3 internal/IO failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTooManyFailures = 2;
constexpr int kExitInternal = 3;

int log_rank(const std::string & level)
{
  if (level == "error") return 0;
  if (level == "warn") return 1;
  if (level == "info") return 2;
  if (level == "debug") return 3;
  return 2;
}

struct Logger {
  std::string level{"info"};
  void log(const std::string & at, const std::string & message) const
  {
    if (log_rank(at) <= log_rank(level)) {
      std::cerr << "[" << at << "] " << message << "\n";
    }
  }
};

std::string iso_now()
{
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string horizon_label(double h)
{
  std::ostringstream out;
  out << h;
  return out.str();
}

struct CommonFlags {
  std::string config_path;
  std::string corpus;
  std::string out;
  std::string agent_kind;
  std::string agent_cmd;
  double agent_timeout_s{30.0};
  double noise_sigma{0.1};
  std::string noise_base;
  std::vector<double> horizons;
  uint64_t seed{0};
  int jobs{1};
  std::string log_level;
  // probe
  std::string probe_kind;
  double offset_factor{0.1};
  double deviation_threshold_m{1.85};
  double turn_threshold_m{1.0};
  // replay
  double tick_s{0.1};
  double replan_period_s{1.0};
  double ttc_horizon_s{3.0};
  double ttc_step_s{0.1};
  double plan_horizon_s{3.0};
  std::vector<std::string> ablation;
};

void add_common_options(CLI::App * cmd, CommonFlags & flags)
{
  cmd->add_option("--config", flags.config_path,
                  "JSON config file; falls back to $CAUSAL_PROBE_CONFIG");
  cmd->add_option("--corpus", flags.corpus, "scenario corpus (JSON Lines)");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed for all randomness");
  cmd->add_option("--jobs", flags.jobs, "parallel scenario workers");
  cmd->add_option("--log-level", flags.log_level, "error|warn|info|debug");
  cmd->add_option("--agent", flags.agent_kind,
                  "mock_prior_extrapolator|mock_scene_grounded|mock_noisy|expert_echo|external");
  cmd->add_option("--agent-cmd", flags.agent_cmd,
                  "external agent command line (whitespace-split)");
  cmd->add_option("--agent-timeout-s", flags.agent_timeout_s, "external agent reply timeout");
  cmd->add_option("--noise-sigma", flags.noise_sigma, "mock_noisy waypoint sigma");
  cmd->add_option("--noise-base", flags.noise_base, "mock wrapped by mock_noisy");
  cmd->add_option("--horizons", flags.horizons, "scoring horizons in seconds");
}

void add_probe_options(CLI::App * cmd, CommonFlags & flags)
{
  cmd->add_option("--probe-kind", flags.probe_kind,
                  "lateral_offset|direction_inversion|both");
  cmd->add_option("--offset-factor", flags.offset_factor, "lateral offset as a speed fraction");
  cmd->add_option("--deviation-threshold-m", flags.deviation_threshold_m,
                  "flagging threshold on the endpoint deviation");
  cmd->add_option("--turn-threshold-m", flags.turn_threshold_m,
                  "endpoint lateral offset separating a turn from lane keeping");
}

void add_replay_options(CLI::App * cmd, CommonFlags & flags)
{
  cmd->add_option("--tick-s", flags.tick_s, "simulation tick");
  cmd->add_option("--replan-period-s", flags.replan_period_s, "agent re-query period");
  cmd->add_option("--ttc-horizon-s", flags.ttc_horizon_s, "TTC projection horizon");
  cmd->add_option("--ttc-step-s", flags.ttc_step_s, "TTC projection step");
  cmd->add_option("--plan-horizon-s", flags.plan_horizon_s, "plan length requested per replan");
  cmd->add_option("--ablation", flags.ablation, "prior ablation flags (no_history|no_ego|no_navigation)");
}

std::vector<std::string> split_command(const std::string & line)
{
  std::vector<std::string> parts;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    parts.push_back(token);
  }
  return parts;
}

/// Config file first (flag, then environment), CLI flags override.
RunConfig resolve_config(const CLI::App * cmd, const CommonFlags & flags)
{
  RunConfig cfg;
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char * env = std::getenv("CAUSAL_PROBE_CONFIG")) {
      path = env;
    }
  }
  if (!path.empty()) {
    cfg = load_run_config(path);
  }
  const auto passed = [&](const std::string & name) {
    const CLI::Option * opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (passed("--corpus")) cfg.corpus = flags.corpus;
  if (passed("--out")) cfg.out = flags.out;
  if (passed("--seed")) cfg.seed = flags.seed;
  if (passed("--jobs")) cfg.jobs = flags.jobs;
  if (passed("--log-level")) cfg.log_level = flags.log_level;
  if (passed("--agent")) cfg.agent.kind = flags.agent_kind;
  if (passed("--agent-cmd")) cfg.agent.command = split_command(flags.agent_cmd);
  if (passed("--agent-timeout-s")) cfg.agent.timeout_s = flags.agent_timeout_s;
  if (passed("--noise-sigma")) cfg.agent.noise_sigma = flags.noise_sigma;
  if (passed("--noise-base")) cfg.agent.noise_base = flags.noise_base;
  if (passed("--horizons")) cfg.horizons = flags.horizons;
  if (passed("--probe-kind")) cfg.probe_kinds = flags.probe_kind;
  if (passed("--offset-factor")) cfg.probe.offset_factor = flags.offset_factor;
  if (passed("--deviation-threshold-m")) {
    cfg.probe.deviation_threshold_m = flags.deviation_threshold_m;
  }
  if (passed("--turn-threshold-m")) cfg.probe.turn_threshold_m = flags.turn_threshold_m;
  if (passed("--tick-s")) cfg.replay.tick_s = flags.tick_s;
  if (passed("--replan-period-s")) cfg.replay.replan_period_s = flags.replan_period_s;
  if (passed("--ttc-horizon-s")) cfg.replay.ttc_horizon_s = flags.ttc_horizon_s;
  if (passed("--ttc-step-s")) cfg.replay.ttc_step_s = flags.ttc_step_s;
  if (passed("--plan-horizon-s")) cfg.replay.plan_horizon_s = flags.plan_horizon_s;
  if (passed("--ablation")) cfg.replay.ablation_flags = flags.ablation;
  cfg.agent.seed = cfg.seed;
  cfg.replay.agent_timeout_s = cfg.agent.timeout_s;
  cfg.validate();
  return cfg;
}

std::vector<ScenarioRecord> load_corpus_or_fail(const RunConfig & cfg)
{
  if (cfg.corpus.empty()) {
    throw ConfigError("no corpus given (use --corpus or the config file)");
  }
  std::vector<ScenarioRecord> corpus = load_scenarios(cfg.corpus);
  if (corpus.empty()) {
    throw ConfigError("corpus is empty: " + cfg.corpus);
  }
  return corpus;
}

RunManifest start_manifest(const std::string & command, const RunConfig & cfg,
                           const std::string & corpus_path)
{
  RunManifest manifest;
  manifest.command = command;
  manifest.config_snapshot = run_config_to_json(cfg);
  manifest.started_at = iso_now();
  if (!corpus_path.empty()) {
    manifest.corpus_digest = file_digest(corpus_path);
  }
  return manifest;
}

void finish_manifest(RunManifest manifest, const std::string & out_dir)
{
  manifest.finished_at = iso_now();
  write_text_file((fs::path(out_dir) / "manifest.json").string(),
                  run_manifest_to_json(manifest).dump(2) + "\n");
}

int cmd_ingest(const CLI::App * cmd, const CommonFlags & flags, const std::string & rewrite_path)
{
  RunConfig cfg = resolve_config(cmd, flags);
  const auto corpus = load_corpus_or_fail(cfg);
  json by_type;
  for (const ScenarioRecord & rec : corpus) {
    if (!by_type.contains(rec.scenario_type)) {
      by_type[rec.scenario_type] = 0;
    }
    by_type[rec.scenario_type] = by_type[rec.scenario_type].get<int>() + 1;
  }
  json summary;
  summary["corpus"] = cfg.corpus;
  summary["n_scenarios"] = corpus.size();
  summary["by_scenario_type"] = by_type;
  summary["digest"] = file_digest(cfg.corpus);
  std::cout << summary.dump(2) << "\n";
  fs::create_directories(cfg.out);
  write_text_file((fs::path(cfg.out) / "corpus_summary.json").string(),
                  summary.dump(2) + "\n");
  if (!rewrite_path.empty()) {
    save_scenarios(rewrite_path, corpus);
  }
  return kExitOk;
}

template <typename Row>
int write_score_outputs(const std::string & command, const RunConfig & cfg,
                        const std::vector<Row> & rows, const std::string & prefix,
                        json (*row_to_json)(const Row &), const Logger & logger)
{
  fs::create_directories(cfg.out);
  RunManifest manifest = start_manifest(command, cfg, cfg.corpus);
  for (double h : cfg.horizons) {
    const std::string name = prefix + "_" + horizon_label(h) + "s.jsonl";
    std::string body;
    for (const Row & row : rows) {
      if (row.horizon_s == h) {
        body += row_to_json(row).dump() + "\n";
      }
    }
    write_text_file((fs::path(cfg.out) / name).string(), body);
    manifest.results[prefix + "_" + horizon_label(h) + "s"] = name;
  }
  const json summary = {{"command", command}, {"horizons", summarize_rows(rows, cfg.horizons)}};
  const std::string summary_name = prefix + "_summary.json";
  write_text_file((fs::path(cfg.out) / summary_name).string(), summary.dump(2) + "\n");
  manifest.results["summary"] = summary_name;
  finish_manifest(std::move(manifest), cfg.out);
  std::cout << summary.dump(2) << "\n";

  size_t failed = 0;
  size_t total = 0;
  for (const Row & row : rows) {
    if (row.horizon_s == cfg.horizons.front()) {
      ++total;
      failed += row.ok ? 0 : 1;
    }
  }
  if (failed > 0) {
    logger.log("warn", std::to_string(failed) + " of " + std::to_string(total) +
                         " scenarios failed");
  }
  return 2 * failed > total ? kExitTooManyFailures : kExitOk;
}

int cmd_score_open(const CLI::App * cmd, const CommonFlags & flags)
{
  RunConfig cfg = resolve_config(cmd, flags);
  Logger logger{cfg.log_level};
  const auto corpus = load_corpus_or_fail(cfg);
  logger.log("info", "scoring " + std::to_string(corpus.size()) + " scenarios open-loop with " +
                       cfg.agent.kind);
  const auto rows = run_open_loop_corpus(corpus, cfg);
  return write_score_outputs("score-open", cfg, rows, "open_loop", &open_loop_row_to_json,
                             logger);
}

int cmd_score_closed(const CLI::App * cmd, const CommonFlags & flags)
{
  RunConfig cfg = resolve_config(cmd, flags);
  Logger logger{cfg.log_level};
  const auto corpus = load_corpus_or_fail(cfg);
  logger.log("info", "replaying " + std::to_string(corpus.size()) + " scenarios closed-loop with " +
                       cfg.agent.kind);
  const auto rows = run_closed_loop_corpus(corpus, cfg);
  return write_score_outputs("score-closed", cfg, rows, "closed_loop", &closed_loop_row_to_json,
                             logger);
}

int cmd_probe(const CLI::App * cmd, const CommonFlags & flags)
{
  RunConfig cfg = resolve_config(cmd, flags);
  Logger logger{cfg.log_level};
  const auto corpus = load_corpus_or_fail(cfg);
  logger.log("info", "probing " + cfg.agent.kind + " over " + std::to_string(corpus.size()) +
                       " scenarios");
  const auto reports = run_probe_corpus(corpus, cfg);
  fs::create_directories(cfg.out);
  RunManifest manifest = start_manifest("probe", cfg, cfg.corpus);
  size_t worst_invalid = 0;
  for (const auto & [kind, report] : reports) {
    const std::string stem = std::string("probe_") + to_string(kind);
    write_text_file((fs::path(cfg.out) / (stem + ".json")).string(),
                    probe_report_to_json(report).dump(2) + "\n");
    write_text_file((fs::path(cfg.out) / (stem + ".csv")).string(), probe_report_to_csv(report));
    manifest.results[stem] = stem + ".json";
    manifest.results[stem + "_csv"] = stem + ".csv";
    worst_invalid = std::max(worst_invalid, report.invalid_count);
    std::cout << to_string(kind) << ": verdict " << to_string(report.verdict)
              << " (flagged " << format_double(report.flagged_fraction) << ", inversion "
              << format_double(report.inversion_rate) << ", mean |deviation| "
              << format_double(report.mean_abs_deviation_m) << " m, invalid "
              << report.invalid_count << ")\n";
  }
  finish_manifest(std::move(manifest), cfg.out);
  return 2 * worst_invalid > corpus.size() ? kExitTooManyFailures : kExitOk;
}

int cmd_attention(const CLI::App * cmd, const CommonFlags & flags, const std::string & dump_path,
                  long long shallow, long long middle, long long final_layer)
{
  RunConfig cfg = resolve_config(cmd, flags);
  if (dump_path.empty()) {
    throw ConfigError("attention: --dump is required");
  }
  const AttentionDump dump = load_attention_dump(dump_path);
  LayerBuckets buckets = LayerBuckets::defaults(dump.layers);
  if (shallow >= 0) buckets.shallow = static_cast<size_t>(shallow);
  if (middle >= 0) buckets.middle = static_cast<size_t>(middle);
  if (final_layer >= 0) buckets.final_layer = static_cast<size_t>(final_layer);
  const AttentionReport report = build_report(dump, dump.segments, buckets);
  fs::create_directories(cfg.out);
  RunManifest manifest = start_manifest("attention", cfg, "");
  manifest.corpus_digest = file_digest(dump_path);
  write_text_file((fs::path(cfg.out) / "attention_report.json").string(),
                  attention_report_to_json(report).dump(2) + "\n");
  write_text_file((fs::path(cfg.out) / "attention_report.csv").string(),
                  attention_report_to_csv(report));
  manifest.results["attention_report"] = "attention_report.json";
  manifest.results["attention_report_csv"] = "attention_report.csv";
  finish_manifest(std::move(manifest), cfg.out);
  std::cout << attention_report_to_json(report).dump(2) << "\n";
  return kExitOk;
}

int cmd_grpo(const CLI::App * cmd, const CommonFlags & flags, const std::string & group_path)
{
  RunConfig cfg = resolve_config(cmd, flags);
  if (group_path.empty()) {
    throw ConfigError("grpo: --group is required");
  }
  std::ifstream in(group_path);
  if (!in) {
    throw ConfigError("cannot open group file: " + group_path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception & e) {
    throw ParseError(group_path + ": " + e.what());
  }
  RewardWeights weights = RewardWeights::cot_grpo();
  if (j.contains("preset")) {
    const std::string preset = j["preset"].get<std::string>();
    if (preset == "cot_grpo") {
      weights = RewardWeights::cot_grpo();
    } else if (preset == "base_grpo") {
      weights = RewardWeights::base_grpo();
    } else {
      throw ConfigError("unknown weight preset: " + preset);
    }
  }
  if (j.contains("weights")) {
    weights.location = j["weights"].value("location", weights.location);
    weights.velocity = j["weights"].value("velocity", weights.velocity);
    weights.format = j["weights"].value("format", weights.format);
  }
  GrpoConfig grpo_cfg;
  grpo_cfg.clip_epsilon = j.value("clip_epsilon", grpo_cfg.clip_epsilon);
  grpo_cfg.kl_beta = j.value("kl_beta", grpo_cfg.kl_beta);
  grpo_cfg.std_guard = j.value("std_guard", grpo_cfg.std_guard);
  GroupSample group;
  for (const json & o : j.at("outputs")) {
    OutputSample sample;
    sample.r_location = o.at("r_location").get<double>();
    sample.r_velocity = o.at("r_velocity").get<double>();
    sample.r_format = o.at("r_format").get<double>();
    sample.policy_prob = o.at("policy_prob").get<double>();
    sample.old_policy_prob = o.at("old_policy_prob").get<double>();
    sample.ref_policy_prob = o.at("ref_policy_prob").get<double>();
    group.outputs.push_back(sample);
  }
  grpo_cfg.group_size = std::max<size_t>(2, group.outputs.size());
  const GrpoTerms terms = grpo_objective_terms(group, grpo_cfg, weights);
  json out;
  out["combined_rewards"] = terms.combined_rewards;
  out["advantages"] = terms.advantages;
  out["importance_weights"] = terms.importance_weights;
  out["kl_penalties"] = terms.kl_penalties;
  out["per_output_terms"] = terms.per_output_terms;
  out["objective"] = terms.objective;
  std::cout << out.dump(2) << "\n";
  if (cmd->get_option_no_throw("--out") != nullptr &&
      cmd->get_option_no_throw("--out")->count() > 0) {
    fs::create_directories(cfg.out);
    write_text_file((fs::path(cfg.out) / "grpo_terms.json").string(), out.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_sample(const CLI::App * cmd, const CommonFlags & flags, const std::string & strata_path,
               long long m)
{
  RunConfig cfg = resolve_config(cmd, flags);
  if (strata_path.empty()) {
    throw ConfigError("sample: --strata is required");
  }
  std::ifstream in(strata_path);
  if (!in) {
    throw ConfigError("cannot open strata file: " + strata_path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception & e) {
    throw ParseError(strata_path + ": " + e.what());
  }
  std::vector<std::string> names;
  std::vector<long long> sizes;
  for (const auto & [name, size] : j.items()) {  // nlohmann objects iterate sorted by key
    names.push_back(name);
    sizes.push_back(size.get<long long>());
  }
  const auto allocation = sqrt_stratified_sample(sizes, m);
  json allocations;
  for (size_t i = 0; i < names.size(); ++i) {
    allocations[names[i]] = allocation[i];
  }
  json out;
  out["m"] = m;
  out["allocations"] = allocations;
  std::cout << out.dump(2) << "\n";
  if (cmd->get_option_no_throw("--out") != nullptr &&
      cmd->get_option_no_throw("--out")->count() > 0) {
    fs::create_directories(cfg.out);
    write_text_file((fs::path(cfg.out) / "allocations.json").string(), out.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_report(const CLI::App * cmd, const CommonFlags & flags, const std::string & dir_flag)
{
  RunConfig cfg = resolve_config(cmd, flags);
  const std::string dir = dir_flag.empty() ? cfg.out : dir_flag;
  if (!fs::is_directory(dir)) {
    throw ConfigError("report: not a directory: " + dir);
  }
  size_t converted = 0;
  for (const auto & entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const bool open_loop = name.starts_with("open_loop_") && name.ends_with(".jsonl");
    const bool closed_loop = name.starts_with("closed_loop_") && name.ends_with(".jsonl");
    if (!open_loop && !closed_loop) {
      continue;
    }
    std::ifstream in(entry.path());
    std::string line;
    std::string csv =
      open_loop
        ? "scenario_id,scenario_type,horizon_s,ade,fde,ahe,fhe,miss_rate,score,error\n"
        : "scenario_id,scenario_type,horizon_s,no_collision,drivable_area,making_progress,"
          "direction,ttc,speed,progress,comfort,score,error\n";
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      const json row = json::parse(line);
      csv += row["scenario_id"].get<std::string>();
      csv += ',';
      csv += row["scenario_type"].get<std::string>();
      csv += ',';
      csv += format_double(row["horizon_s"].get<double>());
      csv += ',';
      if (open_loop) {
        for (const char * key : {"ade", "fde", "ahe", "fhe", "miss_rate"}) {
          csv += format_double(row[key].get<double>());
          csv += ',';
        }
      } else {
        const json & sub = row["sub_metrics"];
        for (const char * key : {"no_collision", "drivable_area", "making_progress", "direction",
                                 "ttc", "speed", "progress", "comfort"}) {
          csv += format_double(sub[key].get<double>());
          csv += ',';
        }
      }
      csv += format_double(row["score"].get<double>());
      csv += ',';
      csv += row.value("error", "");
      csv += '\n';
    }
    fs::path csv_path = entry.path();
    csv_path.replace_extension(".csv");
    write_text_file(csv_path.string(), csv);
    ++converted;
  }
  std::cout << "converted " << converted << " report files to CSV in " << dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"evaluation and causal diagnostics for driving planners"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  std::string rewrite_path;
  std::string dump_path;
  long long shallow = -1;
  long long middle = -1;
  long long final_layer = -1;
  std::string group_path;
  std::string strata_path;
  long long sample_m = 0;
  std::string report_dir;

  CLI::App * ingest = app.add_subcommand("ingest", "validate and summarize a corpus");
  add_common_options(ingest, flags);
  ingest->add_option("--rewrite", rewrite_path, "write the normalized corpus here");

  CLI::App * score_open = app.add_subcommand("score-open", "open-loop scoring");
  add_common_options(score_open, flags);
  add_replay_options(score_open, flags);

  CLI::App * score_closed = app.add_subcommand("score-closed", "closed-loop (non-reactive) scoring");
  add_common_options(score_closed, flags);
  add_replay_options(score_closed, flags);

  CLI::App * probe = app.add_subcommand("probe", "training-free causal probes");
  add_common_options(probe, flags);
  add_probe_options(probe, flags);

  CLI::App * attention = app.add_subcommand("attention", "attention-flow report from a dump");
  add_common_options(attention, flags);
  attention->add_option("--dump", dump_path, "attention dump file");
  attention->add_option("--shallow-layer", shallow, "override the shallow bucket layer");
  attention->add_option("--middle-layer", middle, "override the middle bucket layer");
  attention->add_option("--final-layer", final_layer, "override the final bucket layer");

  CLI::App * grpo = app.add_subcommand("grpo", "policy-alignment math over a sampled group");
  add_common_options(grpo, flags);
  grpo->add_option("--group", group_path, "JSON group file");

  CLI::App * sample = app.add_subcommand("sample", "square-root stratified allocation");
  add_common_options(sample, flags);
  sample->add_option("--strata", strata_path, "JSON object of {stratum: size}");
  sample->add_option("--m", sample_m, "total sample count")->required();

  CLI::App * report = app.add_subcommand("report", "convert result files to CSV");
  add_common_options(report, flags);
  report->add_option("--dir", report_dir, "result directory (defaults to --out)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest, flags, rewrite_path);
    if (score_open->parsed()) return cmd_score_open(score_open, flags);
    if (score_closed->parsed()) return cmd_score_closed(score_closed, flags);
    if (probe->parsed()) return cmd_probe(probe, flags);
    if (attention->parsed()) {
      return cmd_attention(attention, flags, dump_path, shallow, middle, final_layer);
    }
    if (grpo->parsed()) return cmd_grpo(grpo, flags, group_path);
    if (sample->parsed()) return cmd_sample(sample, flags, strata_path, sample_m);
    if (report->parsed()) return cmd_report(report, flags, report_dir);
  } catch (const ConfigError & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError & e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError & e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
