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

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planprobe/agents.hpp"
#include "planprobe/errors.hpp"
#include "planprobe/geometry.hpp"
#include "planprobe/scenario.hpp"
#include "planprobe/trajectory.hpp"

namespace planprobe {

/// Final lateral deviations measured for two trained production VLM planners
/// under the 0.1-factor offset probe; carried in reports as reference context
/// for calibrating expectations, never asserted against.
inline constexpr double kReferenceShortcutDeviationsM[2] = {8.71, 7.58};

enum class ProbeKind { lateral_offset, direction_inversion };

inline const char * to_string(ProbeKind k)
{
  return k == ProbeKind::lateral_offset ? "lateral_offset" : "direction_inversion";
}

inline ProbeKind probe_kind_from_string(const std::string & s)
{
  if (s == "lateral_offset") return ProbeKind::lateral_offset;
  if (s == "direction_inversion") return ProbeKind::direction_inversion;
  throw ConfigError("unknown probe kind: " + s);
}

struct PerturbationSpec {
  ProbeKind kind{ProbeKind::lateral_offset};
  double offset_factor{0.1};          // fraction of the ego speed
  double deviation_threshold_m{1.85};  // half of a 3.7 m lane
  double turn_threshold_m{1.0};        // endpoint lateral offset for a maneuver
  double horizon_s{3.0};
  double dt_s{kCanonicalTickS};

  void validate() const
  {
    // offset_factor 0 is the null probe used for self-checks.
    if (offset_factor < 0.0 || !std::isfinite(offset_factor)) {
      throw ConfigError("probe: offset_factor must be non-negative");
    }
    if (deviation_threshold_m <= 0.0 || turn_threshold_m <= 0.0) {
      throw ConfigError("probe: thresholds must be positive");
    }
    if (horizon_s <= 0.0 || dt_s <= 0.0) {
      throw ConfigError("probe: horizon and dt must be positive");
    }
  }
};

/// Adds factor * |v| to the ego velocity along the unit vector to the left of
/// the heading; everything else is untouched.
inline EgoState perturb_lateral_offset(const EgoState & ego, double factor)
{
  EgoState out = ego;
  const double delta = factor * ego.velocity.norm();
  out.velocity = ego.velocity + ego.pose.left() * delta;
  return out;
}

/// Mirrors a history about the anchor heading axis: lateral coordinates and
/// headings flip sign in the anchor frame, longitudinal coordinates and
/// timestamps stay. An involution; points on the axis are fixed.
inline Trajectory invert_history(const Trajectory & history, const Pose2D & anchor)
{
  if (history.empty()) {
    throw ValidationError("invert_history: history must be non-empty");
  }
  Trajectory out = history;
  for (TimedPose & p : out.points) {
    const FrameCoords c = lateral_longitudinal(p.pose, anchor);
    const Vec2 mirrored = frame_to_global({c.longitudinal, -c.lateral}, anchor);
    p.pose = {mirrored.x, mirrored.y, wrap_angle(2.0 * anchor.heading - p.pose.heading)};
  }
  return out;
}

/// Signed lateral coordinate difference of the two plan endpoints in the
/// anchor frame (perturbed minus baseline).
inline double final_lateral_deviation(const Trajectory & baseline, const Trajectory & perturbed,
                                      const Pose2D & anchor)
{
  if (baseline.empty() || perturbed.empty()) {
    throw ValidationError("final_lateral_deviation: plans must be non-empty");
  }
  const double lat_baseline = lateral_longitudinal(baseline.back().pose, anchor).lateral;
  const double lat_perturbed = lateral_longitudinal(perturbed.back().pose, anchor).lateral;
  return lat_perturbed - lat_baseline;
}

/// left / straight / right from the endpoint lateral offset in the anchor
/// frame against the turn threshold.
inline ManeuverDirection classify_direction(const Trajectory & plan, const Pose2D & anchor,
                                            double turn_threshold)
{
  if (plan.empty()) {
    throw ValidationError("classify_direction: plan must be non-empty");
  }
  if (turn_threshold <= 0.0) {
    throw ConfigError("classify_direction: turn threshold must be positive");
  }
  const double lat = lateral_longitudinal(plan.back().pose, anchor).lateral;
  if (lat > turn_threshold) {
    return ManeuverDirection::left;
  }
  if (lat < -turn_threshold) {
    return ManeuverDirection::right;
  }
  return ManeuverDirection::straight;
}

struct ProbeOutcome {
  std::string scenario_id;
  bool valid{true};
  std::string error;
  Trajectory baseline_plan;
  Trajectory perturbed_plan;
  double final_lateral_deviation_m{0.0};
  ManeuverDirection direction_baseline{ManeuverDirection::straight};
  ManeuverDirection direction_perturbed{ManeuverDirection::straight};
  bool flipped{false};
  std::optional<ManeuverDirection> reasoning_direction;
  bool contradiction{false};
  bool flagged{false};
};

enum class ProbeVerdict { shortcut_reliant, grounded, inconclusive };

inline const char * to_string(ProbeVerdict v)
{
  switch (v) {
    case ProbeVerdict::shortcut_reliant:
      return "shortcut_reliant";
    case ProbeVerdict::grounded:
      return "grounded";
    case ProbeVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

struct ProbeReport {
  PerturbationSpec spec;
  std::vector<ProbeOutcome> outcomes;
  double mean_abs_deviation_m{0.0};
  double flagged_fraction{0.0};
  double inversion_rate{0.0};
  size_t contradictions{0};
  size_t invalid_count{0};
  ProbeVerdict verdict{ProbeVerdict::inconclusive};
};

/// One baseline/perturbed query pair against the agent. Agent failures turn
/// into invalid outcomes rather than propagating.
inline ProbeOutcome probe_scenario(Agent & agent, const ScenarioRecord & scenario,
                                   const PerturbationSpec & spec)
{
  ProbeOutcome outcome;
  outcome.scenario_id = scenario.id;
  const Pose2D anchor = scenario.ego_state.pose;
  try {
    const PlanRequest baseline_request = make_plan_request(scenario, spec.horizon_s, spec.dt_s);
    PlanRequest perturbed_request = baseline_request;
    if (spec.kind == ProbeKind::lateral_offset) {
      perturbed_request.ego_state =
        perturb_lateral_offset(*baseline_request.ego_state, spec.offset_factor);
    } else {
      perturbed_request.ego_history = invert_history(*baseline_request.ego_history, anchor);
    }
    PlanResponse baseline = agent.plan(baseline_request);
    validate_plan_response(baseline, baseline_request);
    PlanResponse perturbed = agent.plan(perturbed_request);
    validate_plan_response(perturbed, perturbed_request);

    outcome.baseline_plan = std::move(baseline.trajectory);
    outcome.perturbed_plan = std::move(perturbed.trajectory);
    outcome.final_lateral_deviation_m =
      final_lateral_deviation(outcome.baseline_plan, outcome.perturbed_plan, anchor);
    outcome.direction_baseline =
      classify_direction(outcome.baseline_plan, anchor, spec.turn_threshold_m);
    outcome.direction_perturbed =
      classify_direction(outcome.perturbed_plan, anchor, spec.turn_threshold_m);
    outcome.flipped = outcome.direction_baseline != outcome.direction_perturbed;
    outcome.reasoning_direction = perturbed.reasoning_direction;
    outcome.contradiction = outcome.reasoning_direction.has_value() &&
                            *outcome.reasoning_direction != outcome.direction_perturbed;
    outcome.flagged = spec.kind == ProbeKind::lateral_offset
                        ? std::abs(outcome.final_lateral_deviation_m) > spec.deviation_threshold_m
                        : outcome.flipped;
  } catch (const AgentError & e) {
    outcome.valid = false;
    outcome.error = std::string(to_string(e.code)) + ": " + e.what();
  }
  return outcome;
}

/// Aggregates outcomes over the valid subset and applies the verdict rule:
/// shortcut-reliant at a flagged fraction (offset) or inversion rate of 0.5,
/// grounded below 0.1 on both.
inline ProbeReport aggregate_probe_outcomes(const PerturbationSpec & spec,
                                            std::vector<ProbeOutcome> outcomes)
{
  ProbeReport report;
  report.spec = spec;
  report.outcomes = std::move(outcomes);
  double abs_deviation_sum = 0.0;
  size_t valid = 0;
  size_t flagged = 0;
  size_t flipped = 0;
  for (const ProbeOutcome & outcome : report.outcomes) {
    if (!outcome.valid) {
      ++report.invalid_count;
      continue;
    }
    ++valid;
    abs_deviation_sum += std::abs(outcome.final_lateral_deviation_m);
    flagged += outcome.flagged ? 1 : 0;
    flipped += outcome.flipped ? 1 : 0;
    report.contradictions += outcome.contradiction ? 1 : 0;
  }
  if (valid > 0) {
    report.mean_abs_deviation_m = abs_deviation_sum / static_cast<double>(valid);
    report.flagged_fraction = static_cast<double>(flagged) / static_cast<double>(valid);
    report.inversion_rate = static_cast<double>(flipped) / static_cast<double>(valid);
    const bool shortcut = spec.kind == ProbeKind::lateral_offset
                            ? (report.flagged_fraction >= 0.5 || report.inversion_rate >= 0.5)
                            : report.inversion_rate >= 0.5;
    if (shortcut) {
      report.verdict = ProbeVerdict::shortcut_reliant;
    } else if (report.flagged_fraction < 0.1 && report.inversion_rate < 0.1) {
      report.verdict = ProbeVerdict::grounded;
    } else {
      report.verdict = ProbeVerdict::inconclusive;
    }
  }
  return report;
}

/// Queries the agent on the baseline and perturbed variants of every
/// scenario and aggregates the outcomes.
inline ProbeReport run_probe(Agent & agent, std::span<const ScenarioRecord> scenarios,
                             const PerturbationSpec & spec)
{
  spec.validate();
  if (scenarios.empty()) {
    throw ValidationError("run_probe: at least one scenario is required");
  }
  std::vector<ProbeOutcome> outcomes;
  outcomes.reserve(scenarios.size());
  for (const ScenarioRecord & scenario : scenarios) {
    outcomes.push_back(probe_scenario(agent, scenario, spec));
  }
  return aggregate_probe_outcomes(spec, std::move(outcomes));
}

}  // namespace planprobe
