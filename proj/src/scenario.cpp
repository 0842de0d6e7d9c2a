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

#include "secsim/scenario.hpp"

#include <fstream>
#include <sstream>

namespace secsim {

namespace {

const std::set<std::string> kInitKinds = {
    "boot",  "user",    "perm",      "object", "enroll", "consent", "key",
    "macallow", "key-entry", "kernel-compromise", "install",
};

const std::set<std::string> kVerbs = {
    "install",      "uninstall",       "grant",          "request",     "revoke",
    "settings-toggle", "access",       "share",          "query-packages", "enroll",
    "auth",         "lock",            "reboot",         "flash",       "unlock-bootloader",
    "relock",       "factory-reset",   "ota",            "trh-update",  "create-profile",
    "set-foreground", "confirm",       "key-entry",      "key-sign",    "attest",
    "respond",      "evaluate",        "reset-party",    "assert",      "kernel-compromise",
};

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::map<std::string, std::string> parse_args(const std::vector<std::string>& tokens, size_t from,
                                              int line_no) {
    std::map<std::string, std::string> args;
    for (size_t i = from; i < tokens.size(); ++i) {
        auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError(ParseCode::SyntaxError, line_no,
                             "expected key=value, got '" + tokens[i] + "'");
        }
        std::string key = tokens[i].substr(0, eq);
        if (args.count(key)) {
            throw ParseError(ParseCode::SyntaxError, line_no, "duplicate argument " + key);
        }
        args[key] = tokens[i].substr(eq + 1);
    }
    return args;
}

}  // namespace

const std::set<std::string>& known_threat_tags() {
    static const std::set<std::string> tags = {
        "T.P1", "T.P2", "T.P3", "T.P4", "T.N1", "T.N2", "T.A1", "T.A2",
        "T.A3", "T.A4", "T.A5", "T.A6", "T.A7", "T.D1", "T.D2",
    };
    return tags;
}

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool have_time = false;
    uint64_t last_t = 0;

    while (std::getline(in, raw)) {
        line_no++;
        if (raw.find('\r') != std::string::npos) {
            throw ParseError(ParseCode::SyntaxError, line_no,
                             "carriage return: scripts are LF-terminated");
        }
        std::string line = raw;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        if (tokens[0] == "scenario") {
            if (tokens.size() != 2) {
                throw ParseError(ParseCode::SyntaxError, line_no, "scenario takes one name");
            }
            if (!sc.name.empty()) {
                throw ParseError(ParseCode::SyntaxError, line_no, "duplicate scenario header");
            }
            sc.name = tokens[1];
            continue;
        }
        if (sc.name.empty()) {
            throw ParseError(ParseCode::SyntaxError, line_no,
                             "the scenario header must come first");
        }
        if (tokens[0] == "tags") {
            if (tokens.size() != 2) {
                throw ParseError(ParseCode::SyntaxError, line_no, "tags takes one comma list");
            }
            std::string cur;
            for (char c : tokens[1] + ",") {
                if (c == ',') {
                    if (cur.empty()) continue;
                    if (!known_threat_tags().count(cur)) {
                        throw ParseError(ParseCode::UnknownTag, line_no, "unknown tag " + cur);
                    }
                    sc.tags.insert(cur);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            continue;
        }
        if (tokens[0] == "init") {
            if (have_time) {
                throw ParseError(ParseCode::SyntaxError, line_no,
                                 "init lines must precede timed events");
            }
            if (tokens.size() < 2 || !kInitKinds.count(tokens[1])) {
                throw ParseError(ParseCode::SyntaxError, line_no, "unknown init kind");
            }
            ScenarioEvent ev;
            ev.t = 0;
            ev.verb = tokens[1];
            ev.args = parse_args(tokens, 2, line_no);
            ev.line = line_no;
            sc.init.push_back(std::move(ev));
            continue;
        }
        if (tokens[0].rfind("t=", 0) == 0) {
            uint64_t t = 0;
            const std::string num = tokens[0].substr(2);
            if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) {
                throw ParseError(ParseCode::SyntaxError, line_no, "bad time " + tokens[0]);
            }
            t = std::stoull(num);
            if (have_time && t < last_t) {
                throw ParseError(ParseCode::NonMonotonicTime, line_no,
                                 "time goes backwards at t=" + num);
            }
            have_time = true;
            last_t = t;
            if (tokens.size() < 2) {
                throw ParseError(ParseCode::SyntaxError, line_no, "missing verb");
            }
            if (!kVerbs.count(tokens[1])) {
                throw ParseError(ParseCode::UnknownVerb, line_no, "unknown verb " + tokens[1]);
            }
            ScenarioEvent ev;
            ev.t = t;
            ev.verb = tokens[1];
            ev.args = parse_args(tokens, 2, line_no);
            ev.line = line_no;
            sc.events.push_back(std::move(ev));
            continue;
        }
        throw ParseError(ParseCode::SyntaxError, line_no, "unrecognized line: " + tokens[0]);
    }
    if (sc.name.empty()) {
        throw ParseError(ParseCode::SyntaxError, line_no, "missing scenario header");
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(ParseCode::SyntaxError, 0, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace secsim
