#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "planprobe/grpo.hpp"

using namespace planprobe;

TEST_CASE("combined reward is the weighted sum", "[grpo]")
{
  const RewardWeights w = RewardWeights::cot_grpo();
  CHECK(combined_reward(1.0, 1.0, 1.0, w) == Catch::Approx(1.0));
  CHECK(combined_reward(0.0, 0.0, 0.0, w) == 0.0);
  CHECK(combined_reward(0.5, 0.5, 1.0, w) == Catch::Approx(0.55));
  CHECK_THROWS_AS(combined_reward(1, 1, 1, RewardWeights{0, 0, 0}), ConfigError);
}

TEST_CASE("location and velocity rewards ramp down with error", "[grpo]")
{
  Trajectory expert;
  for (int k = 0; k <= 10; ++k) {
    expert.points.push_back({0.1 * k, {k * 1.0, 0.0, 0.0}});
  }
  SECTION("a perfect plan earns both rewards")
  {
    const auto [r_loc, r_vel] = location_velocity_rewards(expert, expert, 2.0, 2.0);
    CHECK(r_loc == 1.0);
    CHECK(r_vel == 1.0);
  }
  SECTION("a constant 1 m offset halves the location reward at tau 2")
  {
    Trajectory plan = expert;
    for (auto & p : plan.points) {
      p.pose.y += 1.0;
    }
    const auto [r_loc, r_vel] = location_velocity_rewards(plan, expert, 2.0, 2.0);
    CHECK(r_loc == Catch::Approx(0.5));
    CHECK(r_vel == Catch::Approx(1.0));  // same velocities
  }
  SECTION("errors at or beyond tau clamp to zero")
  {
    Trajectory plan = expert;
    for (auto & p : plan.points) {
      p.pose.y += 5.0;
    }
    const auto [r_loc, r_vel] = location_velocity_rewards(plan, expert, 2.0, 2.0);
    CHECK(r_loc == 0.0);
    CHECK(r_vel == Catch::Approx(1.0));
  }
  SECTION("mismatched timestamps are rejected")
  {
    Trajectory shifted = expert;
    shifted.points[3].t += 0.01;
    CHECK_THROWS_AS(location_velocity_rewards(shifted, expert, 2.0, 2.0), ValidationError);
  }
}

TEST_CASE("format reward accepts exactly one think block then one answer block", "[grpo]")
{
  CHECK(format_reward("<think>a</think><answer>b</answer>") == 1);
  CHECK(format_reward("  <think>a</think>\n\n<answer>b</answer>  \n") == 1);
  CHECK(format_reward("<answer>b</answer>") == 0);
  CHECK(format_reward("") == 0);
  CHECK(format_reward("<think>a</think>") == 0);
  CHECK(format_reward("<answer>b</answer><think>a</think>") == 0);
  CHECK(format_reward("<think>a</think>x<answer>b</answer>") == 0);
  CHECK(format_reward("<think>a</think><answer>b</answer>trailing") == 0);
  CHECK(format_reward("<think>a</think><think>c</think><answer>b</answer>") == 0);
  CHECK(format_reward("<think>a</think><answer>b</answer><answer>c</answer>") == 0);
  // Idempotent under surrounding whitespace changes.
  CHECK(format_reward("<think>multi\nline</think> <answer>[1,2]</answer>") == 1);
  CHECK(format_reward("\t<think>multi\nline</think> <answer>[1,2]</answer>\r\n") == 1);
}

TEST_CASE("normalized advantage matches the hand case", "[grpo]")
{
  const std::vector<double> rewards{1.0, 2.0, 3.0};
  const auto a = normalized_advantage(rewards, 1e-8);
  REQUIRE(a.size() == 3);
  CHECK(a[0] == Catch::Approx(-1.2247).margin(1e-4));
  CHECK(a[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(a[2] == Catch::Approx(1.2247).margin(1e-4));
}

TEST_CASE("normalized advantage guards degenerate groups", "[grpo]")
{
  const std::vector<double> equal{0.7, 0.7, 0.7, 0.7};
  for (double v : normalized_advantage(equal, 1e-8)) {
    CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(normalized_advantage(std::vector<double>{1.0}, 1e-8), ValidationError);
}

TEST_CASE("normalized advantage has zero mean and unit std", "[grpo]")
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> reward(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 64);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> rewards(size(rng));
    for (double & r : rewards) {
      r = reward(rng);
    }
    const auto a = normalized_advantage(rewards, 1e-8);
    if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) {
      continue;  // guard triggered
    }
    double mean = 0.0;
    for (double v : a) {
      mean += v;
    }
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (double v : a) {
      var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(a.size());
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("clipped weight hand cases", "[grpo]")
{
  CHECK(clipped_weight(1.0, 0.2) == 1.0);
  CHECK(clipped_weight(1.5, 0.2) == 1.2);
  CHECK(clipped_weight(0.5, 0.2) == 0.5);
  CHECK_THROWS_AS(clipped_weight(0.0, 0.2), ValidationError);
  CHECK_THROWS_AS(clipped_weight(-1.0, 0.2), ValidationError);
}

TEST_CASE("clipped weight is bounded and monotone below the cap", "[grpo]")
{
  const double eps = 0.2;
  double previous = 0.0;
  for (double ratio = 0.05; ratio <= 1.0 + eps; ratio += 0.01) {
    const double w = clipped_weight(ratio, eps);
    CHECK(w <= 1.0 + eps + 1e-12);
    CHECK(w >= previous - 1e-12);
    previous = w;
  }
  CHECK(clipped_weight(100.0, eps) == Catch::Approx(1.2));
}

TEST_CASE("kl penalty hand cases and convexity", "[grpo]")
{
  CHECK(kl_penalty(1.0) == 0.0);
  CHECK(kl_penalty(2.0) == Catch::Approx(0.30685).margin(1e-4));
  CHECK(kl_penalty(0.5) == Catch::Approx(0.19315).margin(1e-4));
  CHECK_THROWS_AS(kl_penalty(0.0), ValidationError);
  for (double x = 0.01; x < 100.0; x *= 1.5) {
    CHECK(kl_penalty(x) >= 0.0);
  }
}

TEST_CASE("grpo objective terms compose the components", "[grpo]")
{
  GrpoConfig cfg;
  cfg.kl_beta = 0.1;
  const RewardWeights w{1.0, 0.0, 0.0};

  SECTION("beta 0, unit ratios: objective is the advantage mean, zero")
  {
    GrpoConfig flat = cfg;
    flat.kl_beta = 0.0;
    GroupSample group;
    group.outputs = {{0.2, 0, 0, 1, 1, 1}, {0.8, 0, 0, 1, 1, 1}, {0.5, 0, 0, 1, 1, 1}};
    const auto terms = grpo_objective_terms(group, flat, w);
    CHECK(terms.objective == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("two outputs with rewards 0 and 1 give terms -1 and +1")
  {
    GroupSample group;
    group.outputs = {{0.0, 0, 0, 1, 1, 1}, {1.0, 0, 0, 1, 1, 1}};
    const auto terms = grpo_objective_terms(group, cfg, w);
    CHECK(terms.advantages[0] == Catch::Approx(-1.0));
    CHECK(terms.advantages[1] == Catch::Approx(1.0));
    CHECK(terms.per_output_terms[0] == Catch::Approx(-1.0));
    CHECK(terms.per_output_terms[1] == Catch::Approx(1.0));
    CHECK(terms.objective == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("a reference ratio away from 1 strictly lowers the objective")
  {
    GroupSample group;
    group.outputs = {{0.0, 0, 0, 1, 1, 1}, {1.0, 0, 0, 1, 1, 1}};
    GroupSample drifted = group;
    drifted.outputs[0].ref_policy_prob = 2.0;
    const auto base = grpo_objective_terms(group, cfg, w);
    const auto drift = grpo_objective_terms(drifted, cfg, w);
    CHECK(drift.objective < base.objective);
  }
}

TEST_CASE("sqrt stratified sampling hand cases", "[sampling]")
{
  SECTION("single stratum")
  {
    const std::vector<long long> sizes{25};
    CHECK(sqrt_stratified_sample(sizes, 10) == std::vector<long long>{10});
  }
  SECTION("largest remainder on (100, 400) with M=50")
  {
    const std::vector<long long> sizes{100, 400};
    CHECK(sqrt_stratified_sample(sizes, 50) == std::vector<long long>{17, 33});
  }
  SECTION("symmetric strata split evenly")
  {
    const std::vector<long long> sizes{4, 4, 4};
    CHECK(sqrt_stratified_sample(sizes, 6) == std::vector<long long>{2, 2, 2});
  }
  SECTION("caps redistribute overflow to strata with capacity")
  {
    const std::vector<long long> sizes{1, 100};
    const auto n = sqrt_stratified_sample(sizes, 50);
    CHECK(n == std::vector<long long>{1, 49});
  }
  SECTION("errors")
  {
    const std::vector<long long> sizes{3, 3};
    CHECK_THROWS_AS(sqrt_stratified_sample(sizes, 7), ValidationError);
    const std::vector<long long> zeros{0, 0};
    CHECK_THROWS_AS(sqrt_stratified_sample(zeros, 1), ValidationError);
    CHECK(sqrt_stratified_sample(zeros, 0) == std::vector<long long>{0, 0});
  }
}

TEST_CASE("sqrt stratified sampling invariants", "[sampling]")
{
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> k_dist(1, 61);
  std::uniform_int_distribution<long long> n_dist(0, 3000);
  for (int rep = 0; rep < 200; ++rep) {
    const int k = k_dist(rng);
    std::vector<long long> sizes(k);
    long long total = 0;
    for (auto & n : sizes) {
      n = n_dist(rng);
      total += n;
    }
    if (total == 0) {
      continue;
    }
    const long long m = static_cast<long long>(rng() % static_cast<uint64_t>(total + 1));
    const auto allocation = sqrt_stratified_sample(sizes, m);

    long long allocated = 0;
    for (size_t i = 0; i < sizes.size(); ++i) {
      allocated += allocation[i];
      CHECK(allocation[i] >= 0);
      CHECK(allocation[i] <= sizes[i]);
    }
    CHECK(allocated == m);

    // Monotone in the stratum size (strictly larger strata get at least as
    // many samples).
    for (size_t i = 0; i < sizes.size(); ++i) {
      for (size_t j = 0; j < sizes.size(); ++j) {
        if (sizes[i] > sizes[j]) {
          CHECK(allocation[i] >= allocation[j]);
        }
      }
    }

    // Scale invariance: doubling every stratum size leaves the quotas, and
    // hence the allocations, unchanged. This is a property of the quota
    // formula, so it only applies while no per-stratum cap binds.
    const bool cap_bound = [&] {
      for (size_t i = 0; i < sizes.size(); ++i) {
        if (allocation[i] == sizes[i]) {
          return true;
        }
      }
      return false;
    }();
    if (!cap_bound) {
      std::vector<long long> doubled(sizes);
      for (auto & n : doubled) {
        n *= 2;
      }
      CHECK(sqrt_stratified_sample(doubled, m) == allocation);
    }
  }
}
