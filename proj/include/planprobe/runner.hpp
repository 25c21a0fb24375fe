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

#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "planprobe/agent_factory.hpp"
#include "planprobe/closedloop.hpp"
#include "planprobe/config.hpp"
#include "planprobe/openloop.hpp"
#include "planprobe/probe.hpp"
#include "planprobe/report.hpp"

namespace planprobe {

/// Runs fn(context, index) over [0, count) with one context per worker.
/// Results land in caller-owned slots, so output order is independent of
/// scheduling.
template <typename MakeContext, typename Fn>
inline void run_worker_pool(size_t count, int jobs, MakeContext && make_context, Fn && fn)
{
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    auto context = make_context();
    for (size_t i = 0; i < count; ++i) {
      fn(*context, i);
    }
    return;
  }
  std::atomic<size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  const size_t n_workers = std::min<size_t>(static_cast<size_t>(jobs), count);
  workers.reserve(n_workers);
  for (size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      try {
        auto context = make_context();
        while (true) {
          const size_t i = next.fetch_add(1);
          if (i >= count) {
            break;
          }
          fn(*context, i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        next.store(count);  // drain remaining work
      }
    });
  }
  for (std::thread & worker : workers) {
    worker.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

/// Queries each agent once per scenario at its decision time and scores the
/// plan against the expert at every configured horizon. Agent failures yield
/// zero-score rows tagged with the error.
inline std::vector<OpenLoopRow> run_open_loop_corpus(std::span<const ScenarioRecord> corpus,
                                                     const RunConfig & cfg)
{
  double max_horizon = 0.0;
  for (double h : cfg.horizons) {
    max_horizon = std::max(max_horizon, h);
  }
  std::vector<OpenLoopRow> rows(corpus.size() * cfg.horizons.size());
  run_worker_pool(
    corpus.size(), cfg.jobs, [&] { return make_agent(cfg.agent, corpus); },
    [&](Agent & agent, size_t index) {
      const ScenarioRecord & scenario = corpus[index];
      Trajectory plan;
      std::string error;
      try {
        const PlanRequest request =
          make_plan_request(scenario, max_horizon, cfg.replay.tick_s);
        PlanResponse response = agent.plan(request);
        validate_plan_response(response, request);
        plan = std::move(response.trajectory);
      } catch (const AgentError & e) {
        error = std::string("agent_error: ") + to_string(e.code) + ": " + e.what();
      }
      for (size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
        OpenLoopRow & row = rows[index * cfg.horizons.size() + hi];
        row.scenario_id = scenario.id;
        row.scenario_type = scenario.scenario_type;
        row.horizon_s = cfg.horizons[hi];
        if (!error.empty()) {
          row.ok = false;
          row.error = error;
          row.breakdown = {};
          row.breakdown.composite = 0.0;
          continue;
        }
        row.breakdown =
          score_open_loop_scenario(plan, scenario.expert_future, scenario.ego_state.pose,
                                   scenario.t0(), make_horizon(cfg.horizons[hi]),
                                   cfg.replay.tick_s);
      }
    });
  return rows;
}

/// One non-reactive rollout per (scenario, horizon); the horizon sets the
/// plan length requested from the agent.
inline std::vector<ClosedLoopRow> run_closed_loop_corpus(std::span<const ScenarioRecord> corpus,
                                                         const RunConfig & cfg)
{
  const size_t n_h = cfg.horizons.size();
  std::vector<ClosedLoopRow> rows(corpus.size() * n_h);
  run_worker_pool(
    corpus.size() * n_h, cfg.jobs, [&] { return make_agent(cfg.agent, corpus); },
    [&](Agent & agent, size_t index) {
      const ScenarioRecord & scenario = corpus[index / n_h];
      const double horizon = cfg.horizons[index % n_h];
      ReplayConfig replay = cfg.replay;
      replay.plan_horizon_s = std::max(horizon, cfg.replay.replan_period_s);
      ClosedLoopRow & row = rows[index];
      row.scenario_id = scenario.id;
      row.scenario_type = scenario.scenario_type;
      row.horizon_s = horizon;
      const Rollout rollout = run_replay(scenario, agent, replay);
      row.breakdown = score_closed_loop(rollout, scenario, replay);
      row.ok = !rollout.aborted;
    });
  return rows;
}

/// Both probe kinds (or the selected one), each over the full corpus.
inline std::map<ProbeKind, ProbeReport> run_probe_corpus(std::span<const ScenarioRecord> corpus,
                                                         const RunConfig & cfg)
{
  if (corpus.empty()) {
    throw ValidationError("probe: at least one scenario is required");
  }
  std::vector<ProbeKind> kinds;
  if (cfg.probe_kinds == "both" || cfg.probe_kinds == "lateral_offset") {
    kinds.push_back(ProbeKind::lateral_offset);
  }
  if (cfg.probe_kinds == "both" || cfg.probe_kinds == "direction_inversion") {
    kinds.push_back(ProbeKind::direction_inversion);
  }
  std::map<ProbeKind, ProbeReport> reports;
  for (ProbeKind kind : kinds) {
    PerturbationSpec spec = cfg.probe;
    spec.kind = kind;
    spec.validate();
    std::vector<ProbeOutcome> outcomes(corpus.size());
    run_worker_pool(
      corpus.size(), cfg.jobs, [&] { return make_agent(cfg.agent, corpus); },
      [&](Agent & agent, size_t index) {
        outcomes[index] = probe_scenario(agent, corpus[index], spec);
      });
    reports.emplace(kind, aggregate_probe_outcomes(spec, std::move(outcomes)));
  }
  return reports;
}

}  // namespace planprobe
