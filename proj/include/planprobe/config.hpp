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

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "planprobe/agent_factory.hpp"
#include "planprobe/closedloop.hpp"
#include "planprobe/errors.hpp"
#include "planprobe/openloop.hpp"
#include "planprobe/probe.hpp"

namespace planprobe {

/// One run of the tool: corpus, agent, what to score, where to write.
/// Config files are JSON with these exact snake_case keys; CLI flags use the
/// kebab-case spellings of the same names.
struct RunConfig {
  std::string corpus;
  AgentSpec agent;
  std::vector<double> horizons{1.0, 2.0, 3.0};
  PerturbationSpec probe;
  std::string probe_kinds{"both"};  // lateral_offset | direction_inversion | both
  ReplayConfig replay;
  std::string out{"planprobe_out"};
  uint64_t seed{0};
  int jobs{1};
  std::string log_level{"info"};

  void validate() const
  {
    if (horizons.empty()) {
      throw ConfigError("config: horizons must be non-empty");
    }
    for (double h : horizons) {
      make_horizon(h);
    }
    if (jobs < 1) {
      throw ConfigError("config: jobs must be at least 1");
    }
    if (probe_kinds != "both" && probe_kinds != "lateral_offset" &&
        probe_kinds != "direction_inversion") {
      throw ConfigError("config: probe_kinds must be lateral_offset, direction_inversion, or both");
    }
    replay.validate();
    probe.validate();
  }
};

inline json run_config_to_json(const RunConfig & cfg)
{
  json j;
  j["corpus"] = cfg.corpus;
  j["agent"] = {{"kind", cfg.agent.kind},
                {"cmd", cfg.agent.command},
                {"timeout_s", cfg.agent.timeout_s},
                {"noise_base", cfg.agent.noise_base},
                {"noise_sigma", cfg.agent.noise_sigma}};
  j["horizons"] = cfg.horizons;
  j["probe"] = {{"kind", cfg.probe_kinds},
                {"offset_factor", cfg.probe.offset_factor},
                {"deviation_threshold_m", cfg.probe.deviation_threshold_m},
                {"turn_threshold_m", cfg.probe.turn_threshold_m},
                {"horizon_s", cfg.probe.horizon_s},
                {"dt_s", cfg.probe.dt_s}};
  j["replay"] = {{"tick_s", cfg.replay.tick_s},
                 {"replan_period_s", cfg.replay.replan_period_s},
                 {"ttc_horizon_s", cfg.replay.ttc_horizon_s},
                 {"ttc_step_s", cfg.replay.ttc_step_s},
                 {"agent_timeout_s", cfg.replay.agent_timeout_s},
                 {"plan_horizon_s", cfg.replay.plan_horizon_s},
                 {"ego_half_length_m", cfg.replay.ego_half_length_m},
                 {"ego_half_width_m", cfg.replay.ego_half_width_m},
                 {"at_fault_speed_mps", cfg.replay.at_fault_speed_mps},
                 {"ablation", cfg.replay.ablation_flags},
                 {"comfort",
                  {{"lon_accel_min", cfg.replay.comfort.lon_accel_min},
                   {"lon_accel_max", cfg.replay.comfort.lon_accel_max},
                   {"lat_accel_abs", cfg.replay.comfort.lat_accel_abs},
                   {"yaw_rate_abs", cfg.replay.comfort.yaw_rate_abs},
                   {"yaw_accel_abs", cfg.replay.comfort.yaw_accel_abs},
                   {"lon_jerk_abs", cfg.replay.comfort.lon_jerk_abs},
                   {"jerk_abs", cfg.replay.comfort.jerk_abs}}}};
  j["out"] = cfg.out;
  j["seed"] = cfg.seed;
  j["jobs"] = cfg.jobs;
  j["log_level"] = cfg.log_level;
  return j;
}

inline RunConfig run_config_from_json(const json & j)
{
  RunConfig cfg;
  if (j.contains("corpus")) cfg.corpus = j["corpus"].get<std::string>();
  if (j.contains("agent")) {
    const json & a = j["agent"];
    if (a.contains("kind")) cfg.agent.kind = a["kind"].get<std::string>();
    if (a.contains("cmd")) cfg.agent.command = a["cmd"].get<std::vector<std::string>>();
    if (a.contains("timeout_s")) cfg.agent.timeout_s = a["timeout_s"].get<double>();
    if (a.contains("noise_base")) cfg.agent.noise_base = a["noise_base"].get<std::string>();
    if (a.contains("noise_sigma")) cfg.agent.noise_sigma = a["noise_sigma"].get<double>();
  }
  if (j.contains("horizons")) cfg.horizons = j["horizons"].get<std::vector<double>>();
  if (j.contains("probe")) {
    const json & p = j["probe"];
    if (p.contains("kind")) cfg.probe_kinds = p["kind"].get<std::string>();
    if (p.contains("offset_factor")) cfg.probe.offset_factor = p["offset_factor"].get<double>();
    if (p.contains("deviation_threshold_m")) {
      cfg.probe.deviation_threshold_m = p["deviation_threshold_m"].get<double>();
    }
    if (p.contains("turn_threshold_m")) {
      cfg.probe.turn_threshold_m = p["turn_threshold_m"].get<double>();
    }
    if (p.contains("horizon_s")) cfg.probe.horizon_s = p["horizon_s"].get<double>();
    if (p.contains("dt_s")) cfg.probe.dt_s = p["dt_s"].get<double>();
  }
  if (j.contains("replay")) {
    const json & r = j["replay"];
    if (r.contains("tick_s")) cfg.replay.tick_s = r["tick_s"].get<double>();
    if (r.contains("replan_period_s")) {
      cfg.replay.replan_period_s = r["replan_period_s"].get<double>();
    }
    if (r.contains("ttc_horizon_s")) cfg.replay.ttc_horizon_s = r["ttc_horizon_s"].get<double>();
    if (r.contains("ttc_step_s")) cfg.replay.ttc_step_s = r["ttc_step_s"].get<double>();
    if (r.contains("agent_timeout_s")) {
      cfg.replay.agent_timeout_s = r["agent_timeout_s"].get<double>();
    }
    if (r.contains("plan_horizon_s")) {
      cfg.replay.plan_horizon_s = r["plan_horizon_s"].get<double>();
    }
    if (r.contains("ego_half_length_m")) {
      cfg.replay.ego_half_length_m = r["ego_half_length_m"].get<double>();
    }
    if (r.contains("ego_half_width_m")) {
      cfg.replay.ego_half_width_m = r["ego_half_width_m"].get<double>();
    }
    if (r.contains("at_fault_speed_mps")) {
      cfg.replay.at_fault_speed_mps = r["at_fault_speed_mps"].get<double>();
    }
    if (r.contains("ablation")) {
      cfg.replay.ablation_flags = r["ablation"].get<std::vector<std::string>>();
    }
    if (r.contains("comfort")) {
      const json & c = r["comfort"];
      ComfortBounds & bounds = cfg.replay.comfort;
      bounds.lon_accel_min = c.value("lon_accel_min", bounds.lon_accel_min);
      bounds.lon_accel_max = c.value("lon_accel_max", bounds.lon_accel_max);
      bounds.lat_accel_abs = c.value("lat_accel_abs", bounds.lat_accel_abs);
      bounds.yaw_rate_abs = c.value("yaw_rate_abs", bounds.yaw_rate_abs);
      bounds.yaw_accel_abs = c.value("yaw_accel_abs", bounds.yaw_accel_abs);
      bounds.lon_jerk_abs = c.value("lon_jerk_abs", bounds.lon_jerk_abs);
      bounds.jerk_abs = c.value("jerk_abs", bounds.jerk_abs);
    }
  }
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
  if (j.contains("log_level")) cfg.log_level = j["log_level"].get<std::string>();
  // A single seed drives every random component, including agent noise.
  cfg.agent.seed = cfg.seed;
  cfg.replay.agent_timeout_s = cfg.agent.timeout_s;
  return cfg;
}

inline RunConfig load_run_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  try {
    return run_config_from_json(json::parse(in));
  } catch (const json::exception & e) {
    throw ConfigError(path + ": malformed config JSON: " + e.what());
  }
}

}  // namespace planprobe
