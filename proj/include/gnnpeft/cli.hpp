// Copyright 2026 The gnnpeft Authors.
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

#include <iosfwd>
#include <string>
#include <vector>

#include "gnnpeft/analysis.hpp"

namespace gnnpeft {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Flat config file: one key=value per line, '#' starts a comment, blank lines
// ignored. Throws ConfigError naming the line for malformed lines, repeated
// keys and keys outside experiment_keys().
ConfigMap parse_config(std::istream& is);
ConfigMap load_config(const std::string& path);
// Sorted key=value lines; parse_config(config_text(c)) == c.
std::string config_text(const ConfigMap& config);

// Runs one invocation; args[0] is the subcommand. Output goes to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gnnpeft
