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

#include <stdexcept>
#include <string>

namespace planprobe {

struct Error : std::runtime_error {
  explicit Error(const std::string & what) : std::runtime_error(what) {}
};

/// Malformed input data (JSON syntax, schema violations, binary layout).
struct ParseError : Error {
  using Error::Error;
};

/// Structurally valid input that violates a domain invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// Bad run configuration (unknown agent kind, unwritable output, ...).
struct ConfigError : Error {
  using Error::Error;
};

enum class AgentErrorCode { timeout, protocol, invalid_trajectory, process };

inline const char * to_string(AgentErrorCode code)
{
  switch (code) {
    case AgentErrorCode::timeout:
      return "timeout";
    case AgentErrorCode::protocol:
      return "protocol";
    case AgentErrorCode::invalid_trajectory:
      return "invalid_trajectory";
    case AgentErrorCode::process:
      return "process";
  }
  return "unknown";
}

/// Failure while obtaining a plan from an agent. `raw` carries the offending
/// wire payload when one exists.
struct AgentError : Error {
  AgentError(AgentErrorCode code_, const std::string & what, std::string raw_ = {})
  : Error(what), code(code_), raw(std::move(raw_))
  {
  }
  AgentErrorCode code;
  std::string raw;
};

}  // namespace planprobe
