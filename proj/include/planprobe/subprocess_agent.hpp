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

#include <csignal>
#include <cstring>
#include <chrono>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "planprobe/agents.hpp"
#include "planprobe/errors.hpp"

namespace planprobe {

/// Attaches an external planner as a child process speaking line-delimited
/// JSON over its standard streams, one request in flight at a time. A timeout
/// kills the child and resets the connection; the next request respawns it.
class SubprocessAgent : public Agent {
public:
  SubprocessAgent(std::vector<std::string> command, double timeout_s = 30.0)
  : command_(std::move(command)), timeout_s_(timeout_s)
  {
    if (command_.empty()) {
      throw ConfigError("external agent: command must be non-empty");
    }
    // Broken pipes surface as write errors instead of killing the harness.
    static const bool sigpipe_ignored = [] {
      std::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)sigpipe_ignored;
  }

  ~SubprocessAgent() override { shutdown(); }

  SubprocessAgent(const SubprocessAgent &) = delete;
  SubprocessAgent & operator=(const SubprocessAgent &) = delete;

  PlanResponse plan(const PlanRequest & request) override
  {
    const std::string reply = exchange(plan_request_to_json(request).dump());
    json parsed;
    try {
      parsed = json::parse(reply);
    } catch (const json::exception & e) {
      throw AgentError(AgentErrorCode::protocol,
                       std::string("agent wrote invalid JSON: ") + e.what(), reply);
    }
    PlanResponse response;
    try {
      response = plan_response_from_json(parsed);
    } catch (const Error & e) {
      throw AgentError(AgentErrorCode::protocol,
                       std::string("agent response missing fields: ") + e.what(), reply);
    }
    validate_plan_response(response, request);
    return response;
  }

  /// Liveness check: {"proto":1,"type":"ping"} must come back as a pong.
  void ping()
  {
    json msg;
    msg["proto"] = kProtocolVersion;
    msg["type"] = "ping";
    const std::string reply = exchange(msg.dump());
    try {
      if (json::parse(reply).value("type", "") != "pong") {
        throw AgentError(AgentErrorCode::protocol, "expected a pong", reply);
      }
    } catch (const json::exception & e) {
      throw AgentError(AgentErrorCode::protocol, std::string("bad ping reply: ") + e.what(),
                       reply);
    }
  }

  std::string name() const override
  {
    std::string joined = "external:";
    for (const std::string & part : command_) {
      joined += part + " ";
    }
    joined.pop_back();
    return joined;
  }

private:
  void spawn()
  {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw AgentError(AgentErrorCode::process, "failed to create agent pipes");
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      throw AgentError(AgentErrorCode::process, "failed to fork the agent process");
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      std::vector<char *> argv;
      argv.reserve(command_.size() + 1);
      for (const std::string & arg : command_) {
        argv.push_back(const_cast<char *>(arg.c_str()));
      }
      argv.push_back(nullptr);
      ::execvp(argv[0], argv.data());
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    buffer_.clear();
  }

  void shutdown()
  {
    if (write_fd_ >= 0) {
      ::close(write_fd_);
      write_fd_ = -1;
    }
    if (read_fd_ >= 0) {
      ::close(read_fd_);
      read_fd_ = -1;
    }
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  std::string exchange(const std::string & line)
  {
    if (pid_ <= 0) {
      spawn();
    }
    const std::string framed = line + "\n";
    size_t written = 0;
    while (written < framed.size()) {
      const ssize_t n = ::write(write_fd_, framed.data() + written, framed.size() - written);
      if (n <= 0) {
        shutdown();
        throw AgentError(AgentErrorCode::process,
                         std::string("agent process closed its input: ") + std::strerror(errno));
      }
      written += static_cast<size_t>(n);
    }
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_s_);
    while (true) {
      const size_t newline = buffer_.find('\n');
      if (newline != std::string::npos) {
        std::string reply = buffer_.substr(0, newline);
        buffer_.erase(0, newline + 1);
        return reply;
      }
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) {
        shutdown();
        throw AgentError(AgentErrorCode::timeout,
                         "agent exceeded the " + std::to_string(timeout_s_) +
                           " s timeout; connection reset");
      }
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0) {
        shutdown();
        throw AgentError(AgentErrorCode::process, "poll on the agent pipe failed");
      }
      if (rc == 0) {
        continue;  // deadline re-checked above
      }
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n <= 0) {
        shutdown();
        throw AgentError(AgentErrorCode::process, "agent process exited before replying");
      }
      buffer_.append(chunk, static_cast<size_t>(n));
    }
  }

  std::vector<std::string> command_;
  double timeout_s_;
  pid_t pid_{-1};
  int write_fd_{-1};
  int read_fd_{-1};
  std::string buffer_;
};

}  // namespace planprobe
