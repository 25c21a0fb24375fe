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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "planprobe/errors.hpp"
#include "planprobe/trajectory.hpp"

namespace planprobe {

struct RewardWeights {
  double location{0.45};
  double velocity{0.45};
  double format{0.1};

  void validate() const
  {
    if (location < 0.0 || velocity < 0.0 || format < 0.0) {
      throw ConfigError("reward weights must be non-negative");
    }
    if (location + velocity + format <= 0.0) {
      throw ConfigError("at least one reward weight must be positive");
    }
  }

  /// Location/velocity-heavy preset used with full chain-of-thought training.
  static RewardWeights cot_grpo() { return {0.45, 0.45, 0.1}; }
  /// Equal-weight preset used when training from the base model.
  static RewardWeights base_grpo() { return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; }
};

struct GrpoConfig {
  size_t group_size{8};
  double clip_epsilon{0.2};  // default, not calibrated
  double kl_beta{0.04};      // default, not calibrated
  double std_guard{1e-8};

  void validate() const
  {
    if (group_size < 2) {
      throw ConfigError("grpo: group size must be at least 2");
    }
    if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0) {
      throw ConfigError("grpo: clip epsilon must lie in (0, 1)");
    }
    if (kl_beta < 0.0 || std_guard <= 0.0) {
      throw ConfigError("grpo: kl beta must be non-negative and std guard positive");
    }
  }
};

struct OutputSample {
  double r_location{0.0};
  double r_velocity{0.0};
  double r_format{0.0};
  double policy_prob{1.0};
  double old_policy_prob{1.0};
  double ref_policy_prob{1.0};

  void validate() const
  {
    for (double r : {r_location, r_velocity, r_format}) {
      if (!(r >= 0.0 && r <= 1.0)) {
        throw ValidationError("grpo: rewards must lie in [0, 1]");
      }
    }
    for (double p : {policy_prob, old_policy_prob, ref_policy_prob}) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw ValidationError("grpo: probabilities must be positive");
      }
    }
  }
};

struct GroupSample {
  std::vector<OutputSample> outputs;

  void validate() const
  {
    if (outputs.size() < 2) {
      throw ValidationError("grpo: a group needs at least 2 outputs");
    }
    for (const OutputSample & o : outputs) {
      o.validate();
    }
  }
};

inline double combined_reward(double r_location, double r_velocity, double r_format,
                              const RewardWeights & weights)
{
  weights.validate();
  return weights.location * r_location + weights.velocity * r_velocity +
         weights.format * r_format;
}

inline double combined_reward(const OutputSample & output, const RewardWeights & weights)
{
  return combined_reward(output.r_location, output.r_velocity, output.r_format, weights);
}

/// Bounded linear reward shaping r = max(0, 1 - error/tau) over the mean L2
/// position error and the mean L2 finite-difference velocity error.
inline std::pair<double, double> location_velocity_rewards(const Trajectory & plan,
                                                           const Trajectory & expert,
                                                           double tau_location_m = 2.0,
                                                           double tau_velocity_mps = 2.0)
{
  if (tau_location_m <= 0.0 || tau_velocity_mps <= 0.0) {
    throw ConfigError("reward shaping: tau must be positive");
  }
  if (plan.size() != expert.size() || plan.size() < 2) {
    throw ValidationError("reward shaping: trajectories must share at least 2 timestamps");
  }
  for (size_t i = 0; i < plan.size(); ++i) {
    if (std::abs(plan.points[i].t - expert.points[i].t) > 1e-9) {
      throw ValidationError("reward shaping: mismatched timestamps");
    }
  }
  double position_error = 0.0;
  for (size_t i = 0; i < plan.size(); ++i) {
    position_error +=
      (plan.points[i].pose.position() - expert.points[i].pose.position()).norm();
  }
  position_error /= static_cast<double>(plan.size());

  double velocity_error = 0.0;
  for (size_t i = 0; i + 1 < plan.size(); ++i) {
    const double dt = plan.points[i + 1].t - plan.points[i].t;
    const Vec2 vp =
      (plan.points[i + 1].pose.position() - plan.points[i].pose.position()) / dt;
    const Vec2 ve =
      (expert.points[i + 1].pose.position() - expert.points[i].pose.position()) / dt;
    velocity_error += (vp - ve).norm();
  }
  velocity_error /= static_cast<double>(plan.size() - 1);

  return {std::max(0.0, 1.0 - position_error / tau_location_m),
          std::max(0.0, 1.0 - velocity_error / tau_velocity_mps)};
}

/// 1 iff the response is exactly one <think>...</think> block followed by
/// one <answer>...</answer> block, with only whitespace around them.
inline int format_reward(std::string_view text)
{
  const auto skip_ws = [](std::string_view & s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' ||
                          s.front() == '\r')) {
      s.remove_prefix(1);
    }
  };
  const auto consume_block = [&](std::string_view & s, std::string_view open,
                                 std::string_view close) {
    if (s.substr(0, open.size()) != open) {
      return false;
    }
    s.remove_prefix(open.size());
    const size_t end = s.find(close);
    if (end == std::string_view::npos) {
      return false;
    }
    // A nested re-opening inside the block would make it more than one block.
    if (s.substr(0, end).find(open) != std::string_view::npos) {
      return false;
    }
    s.remove_prefix(end + close.size());
    return true;
  };
  std::string_view s = text;
  skip_ws(s);
  if (!consume_block(s, "<think>", "</think>")) {
    return 0;
  }
  skip_ws(s);
  if (!consume_block(s, "<answer>", "</answer>")) {
    return 0;
  }
  skip_ws(s);
  return s.empty() ? 1 : 0;
}

/// Group-relative advantages normalized by the population standard
/// deviation; a degenerate group (std below the guard) maps to all zeros.
inline std::vector<double> normalized_advantage(std::span<const double> group_rewards,
                                                double std_guard = 1e-8)
{
  const size_t n = group_rewards.size();
  if (n < 2) {
    throw ValidationError("normalized_advantage: group size must be at least 2");
  }
  double mean = 0.0;
  for (double r : group_rewards) {
    mean += r;
  }
  mean /= static_cast<double>(n);
  double variance = 0.0;
  for (double r : group_rewards) {
    variance += (r - mean) * (r - mean);
  }
  variance /= static_cast<double>(n);
  const double std_dev = std::sqrt(variance);
  std::vector<double> advantages(n, 0.0);
  if (std_dev < std_guard) {
    return advantages;
  }
  for (size_t i = 0; i < n; ++i) {
    advantages[i] = (group_rewards[i] - mean) / std_dev;
  }
  return advantages;
}

/// min(ratio, clip(ratio, 1-eps, 1+eps)): caps upside at 1+eps while leaving
/// the downside at the raw ratio.
inline double clipped_weight(double ratio, double epsilon)
{
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw ValidationError("clipped_weight: ratio must be positive");
  }
  return std::min(ratio, std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon));
}

/// x - ln x - 1 for x = pi_ref / pi_theta; non-negative, zero only at x = 1.
inline double kl_penalty(double ratio_ref_over_theta)
{
  if (!(ratio_ref_over_theta > 0.0) || !std::isfinite(ratio_ref_over_theta)) {
    throw ValidationError("kl_penalty: ratio must be positive");
  }
  return ratio_ref_over_theta - std::log(ratio_ref_over_theta) - 1.0;
}

struct GrpoTerms {
  std::vector<double> combined_rewards;
  std::vector<double> advantages;
  std::vector<double> importance_weights;
  std::vector<double> kl_penalties;
  std::vector<double> per_output_terms;
  double objective{0.0};
};

/// Per-output contributions A_i * w_i - beta * KL_i and their group mean.
inline GrpoTerms grpo_objective_terms(const GroupSample & group, const GrpoConfig & cfg,
                                      const RewardWeights & weights)
{
  cfg.validate();
  group.validate();
  weights.validate();
  GrpoTerms terms;
  for (const OutputSample & o : group.outputs) {
    terms.combined_rewards.push_back(combined_reward(o, weights));
  }
  terms.advantages = normalized_advantage(terms.combined_rewards, cfg.std_guard);
  for (size_t i = 0; i < group.outputs.size(); ++i) {
    const OutputSample & o = group.outputs[i];
    const double ratio = o.policy_prob / o.old_policy_prob;
    terms.importance_weights.push_back(clipped_weight(ratio, cfg.clip_epsilon));
    terms.kl_penalties.push_back(kl_penalty(o.ref_policy_prob / o.policy_prob));
    terms.per_output_terms.push_back(terms.advantages[i] * terms.importance_weights[i] -
                                     cfg.kl_beta * terms.kl_penalties[i]);
    terms.objective += terms.per_output_terms.back();
  }
  terms.objective /= static_cast<double>(group.outputs.size());
  return terms;
}

/// Square-root weighted stratified allocation: real quotas M*sqrt(N_i)/sum
/// resolved by largest-remainder rounding, capped at the stratum sizes with
/// overflow redistributed by the same rule.
inline std::vector<long long> sqrt_stratified_sample(std::span<const long long> strata_sizes,
                                                     long long sample_count)
{
  if (strata_sizes.empty()) {
    throw ValidationError("stratified sampling: at least one stratum is required");
  }
  long long total = 0;
  for (long long n : strata_sizes) {
    if (n < 0) {
      throw ValidationError("stratified sampling: stratum sizes must be non-negative");
    }
    total += n;
  }
  if (sample_count < 0) {
    throw ValidationError("stratified sampling: sample count must be non-negative");
  }
  if (sample_count > total) {
    throw ValidationError("stratified sampling: sample count exceeds the population");
  }
  const size_t k = strata_sizes.size();
  std::vector<long long> allocation(k, 0);
  if (sample_count == 0) {
    return allocation;
  }

  double weight_sum = 0.0;
  std::vector<double> weights(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    weights[i] = std::sqrt(static_cast<double>(strata_sizes[i]));
    weight_sum += weights[i];
  }
  std::vector<double> quotas(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    quotas[i] = static_cast<double>(sample_count) * weights[i] / weight_sum;
  }
  long long allocated = 0;
  for (size_t i = 0; i < k; ++i) {
    allocation[i] =
      std::min(static_cast<long long>(std::floor(quotas[i] + 1e-9)), strata_sizes[i]);
    allocated += allocation[i];
  }
  // Floor rounding can only overshoot through the epsilon; pull back from the
  // most over-allocated strata first.
  while (allocated > sample_count) {
    size_t worst = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < k; ++i) {
      const double excess = static_cast<double>(allocation[i]) - quotas[i];
      if (allocation[i] > 0 && excess > worst_excess) {
        worst_excess = excess;
        worst = i;
      }
    }
    --allocation[worst];
    --allocated;
  }
  // Largest remainder, respecting the per-stratum caps.
  while (allocated < sample_count) {
    size_t best = k;
    double best_remainder = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < k; ++i) {
      if (allocation[i] >= strata_sizes[i]) {
        continue;
      }
      const double remainder = quotas[i] - static_cast<double>(allocation[i]);
      if (remainder > best_remainder) {
        best_remainder = remainder;
        best = i;
      }
    }
    if (best == k) {
      throw Error("stratified sampling: no capacity left to allocate");
    }
    ++allocation[best];
    ++allocated;
  }
  return allocation;
}

}  // namespace planprobe
