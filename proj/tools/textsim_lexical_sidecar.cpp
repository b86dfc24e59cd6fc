// Copyright 2026 The chaptereval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Reference textsim/1 sidecar backed by the lexical F1 scorer. Used by the
// protocol conformance tests; the fault flags make it misbehave on purpose.

#include <algorithm>
#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "chaptereval/textsim.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lexical textsim/1 sidecar"};
  std::string drop_id;
  std::string extra_id;
  int sleep_ms = 0;
  bool bad_handshake = false;
  bool reverse = false;
  bool exit_after_handshake = false;
  double scale = 1.0;
  app.add_option("--drop-id", drop_id, "Never answer this id");
  app.add_option("--extra-id", extra_id, "Also answer this unknown id");
  app.add_option("--sleep-ms", sleep_ms, "Delay before answering a batch");
  app.add_flag("--bad-handshake", bad_handshake, "Announce a wrong protocol");
  app.add_flag("--reverse", reverse, "Answer in reverse request order");
  app.add_flag("--exit-after-handshake", exit_after_handshake,
               "Exit right after the handshake");
  app.add_option("--scale", scale, "Multiply every score");
  CLI11_PARSE(app, argc, argv);

  std::ios::sync_with_stdio(false);
  if (bad_handshake) {
    std::cout << "{\"protocol\":\"textsim/0\",\"backend\":\"lexical_f1\"}\n";
  } else {
    std::cout << chaptereval::EncodeHandshakeLine("lexical_f1");
  }
  std::cout.flush();
  if (exit_after_handshake) return 0;

  std::vector<chaptereval::ScoreRequest> pending;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      std::cout << "{\"error\":\"request is not JSON\"}\n";
      return 3;
    }
    if (j.is_object() && j.contains("flush")) {
      if (sleep_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
      }
      chaptereval::LexicalScorer scorer;
      auto responses = scorer.Score(pending);
      if (reverse) std::reverse(responses.begin(), responses.end());
      for (auto& r : responses) {
        if (r.id == drop_id) continue;
        r.score *= scale;
        std::cout << chaptereval::EncodeResponseLine(r);
      }
      if (!extra_id.empty()) {
        std::cout << chaptereval::EncodeResponseLine({extra_id, 0.5});
      }
      std::cout << chaptereval::EncodeDoneLine();
      std::cout.flush();
      pending.clear();
      continue;
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("candidate") || !j["candidate"].is_string() ||
        !j.contains("reference") || !j["reference"].is_string()) {
      std::cout << "{\"error\":\"request needs string id, candidate and "
                   "reference\"}\n";
      std::cout.flush();
      return 3;
    }
    pending.push_back({j["id"].get<std::string>(),
                       j["candidate"].get<std::string>(),
                       j["reference"].get<std::string>()});
  }
  return 0;
}
