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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "planprobe/agents.hpp"
#include "planprobe/errors.hpp"
#include "planprobe/subprocess_agent.hpp"

namespace planprobe {

struct AgentSpec {
  std::string kind{"mock_prior_extrapolator"};
  std::vector<std::string> command;  // external only
  double timeout_s{30.0};
  std::string noise_base{"mock_prior_extrapolator"};  // mock_noisy only
  double noise_sigma{0.1};
  uint64_t seed{0};
};

/// Builds one agent connection. The corpus is required for expert_echo.
/// Unknown kinds fail before any scenario runs.
inline std::unique_ptr<Agent> make_agent(const AgentSpec & spec,
                                         std::span<const ScenarioRecord> corpus = {})
{
  if (spec.kind == "mock_prior_extrapolator") {
    return std::make_unique<PriorExtrapolatorAgent>();
  }
  if (spec.kind == "mock_scene_grounded") {
    return std::make_unique<SceneGroundedAgent>();
  }
  if (spec.kind == "mock_noisy") {
    AgentSpec inner = spec;
    inner.kind = spec.noise_base;
    if (inner.kind == "mock_noisy") {
      throw ConfigError("mock_noisy cannot wrap itself");
    }
    return std::make_unique<NoisyAgent>(make_agent(inner, corpus), spec.noise_sigma, spec.seed);
  }
  if (spec.kind == "expert_echo") {
    if (corpus.empty()) {
      throw ConfigError("expert_echo requires a loaded corpus");
    }
    return std::make_unique<ExpertEchoAgent>(corpus);
  }
  if (spec.kind == "external") {
    if (spec.command.empty()) {
      throw ConfigError("external agent requires a command");
    }
    return std::make_unique<SubprocessAgent>(spec.command, spec.timeout_s);
  }
  throw ConfigError("unknown agent kind: " + spec.kind);
}

}  // namespace planprobe
