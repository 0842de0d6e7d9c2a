/*
 * Copyright (C) 2026 The Secsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "secsim/world.hpp"

namespace secsim {

// Scenario scripts and their deterministic replay.
//
// Script format (LF line endings, UTF-8, '#' comments):
//   scenario <name>
//   tags <T.x>[,<T.y>...]
//   init <kind> key=value ...
//   t=<int> <verb> key=value ...
// Event times are non-negative and non-decreasing.

struct ScenarioEvent {
    uint64_t t = 0;
    std::string verb;
    std::map<std::string, std::string> args;
    int line = 0;
};

struct Scenario {
    std::string name;
    std::set<std::string> tags;
    std::vector<ScenarioEvent> init;    // world construction directives
    std::vector<ScenarioEvent> events;  // timed events
};

enum class ParseCode {
    SyntaxError,
    UnknownVerb,
    NonMonotonicTime,
    UnknownTag,
};

class ParseError : public std::runtime_error {
  public:
    ParseError(ParseCode code, int line, const std::string& what)
        : std::runtime_error(what), code_(code), line_(line) {}
    ParseCode code() const { return code_; }
    int line() const { return line_; }

  private:
    ParseCode code_;
    int line_;
};

// Threat-model tags a scenario may claim coverage for.
const std::set<std::string>& known_threat_tags();

Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

struct TraceRecord {
    uint64_t t = 0;
    std::string verb;
    std::string args;      // canonical "k=v" joined by ' '
    std::string decision;  // allow | deny | ok | error | pass | fail | info
    std::string reason;
    std::string digest;    // world digest hex after the event
};

struct Trace {
    std::string scenario_name;
    std::string tags;
    uint64_t seed = 0;
    std::vector<TraceRecord> records;
    int asserts_passed = 0;
    int asserts_failed = 0;
};

// Replays a scenario from a fresh world. Identical (scenario, seed) pairs
// yield byte-identical traces.
Trace run_scenario(const Scenario& scenario, uint64_t seed = 0);

// text: human-oriented report; machine: line-oriented canonical form intended
// for byte comparison.
std::string format_trace(const Trace& trace, bool machine);

// 0 all assertions passed, 1 assertion failures.
int trace_exit_code(const Trace& trace);

}  // namespace secsim
