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

// Reference implementation of the external-agent wire protocol: reads one
// JSON request per line on stdin, answers one JSON response per line on
// stdout. The failure modes exist to exercise the adapter's error paths.

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "planprobe/agents.hpp"

using planprobe::json;

int main(int argc, char ** argv)
{
  std::string mode = "extrapolate";
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--mode") {
      mode = argv[i + 1];
    }
  }

  planprobe::PriorExtrapolatorAgent planner;
  std::string line;
  int requests = 0;
  while (std::getline(std::cin, line)) {
    if (line.empty()) {
      continue;
    }
    json msg;
    try {
      msg = json::parse(line);
    } catch (const json::exception &) {
      std::cout << R"({"proto":1,"error":"unparseable request"})" << "\n" << std::flush;
      continue;
    }
    if (msg.value("type", "") == "ping") {
      std::cout << R"({"proto":1,"type":"pong"})" << "\n" << std::flush;
      continue;
    }
    ++requests;

    if (mode == "garbage") {
      std::cout << "this is not json\n" << std::flush;
      continue;
    }
    if (mode == "hang" || (mode == "hang-second" && requests == 2)) {
      std::this_thread::sleep_for(std::chrono::seconds(30));
      continue;
    }
    if (mode == "bad-trajectory") {
      std::cout << R"({"proto":1,"trajectory":[[99.0,0.0,0.0,0.0]]})" << "\n" << std::flush;
      continue;
    }

    try {
      const auto request = planprobe::plan_request_from_json(msg);
      auto response = planner.plan(request);
      if (mode == "reasoning-left") {
        response.reasoning_direction = planprobe::ManeuverDirection::left;
      }
      std::cout << planprobe::plan_response_to_json(response).dump() << "\n" << std::flush;
    } catch (const std::exception & e) {
      json err;
      err["proto"] = 1;
      err["error"] = e.what();
      std::cout << err.dump() << "\n" << std::flush;
    }
  }
  return 0;
}
