// include/rawcnn/cli.hpp
// Copyright 2026 The rawcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RAWCNN_CLI_HPP_
#define RAWCNN_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "rawcnn/nn.hpp"

namespace rawcnn::cli {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one invocation. `args` excludes the program name, e.g.
/// {"train", "--train", "t.jsonl", ...}. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "kW,dW,filters,pool;kW,dW,filters,pool;..." (an empty string means no
/// filter stages). Throws UsageError on malformed input.
std::vector<StageConfig> parse_stages(const std::string& text);
std::string format_stages(const std::vector<StageConfig>& stages);

}  // namespace rawcnn::cli

#endif  // RAWCNN_CLI_HPP_
