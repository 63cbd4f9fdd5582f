// Copyright 2026 The svkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SVKIT_TOOLS_CLI_COMMON_HPP_
#define SVKIT_TOOLS_CLI_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

namespace svkit::cli {

enum ExitCode { kOk = 0, kRuntimeFailure = 1, kValidationFailure = 2 };

struct GlobalOptions {
  int verbosity = 0;
};

/// Explicit --seed wins, then $SVKIT_SEED, then 0.
std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag);

/// Writes `<dir>/run.json` with the resolved configuration of this run. The
/// timestamp lives only here so every other artifact stays byte-stable.
void WriteRunJson(const std::filesystem::path& dir, const std::string& command,
                  const nlohmann::ordered_json& config);

/// Parent directory of an output file, created if needed.
std::filesystem::path PrepareOutput(const std::filesystem::path& file);

std::vector<std::string> ReadIdList(const std::filesystem::path& path);

// Each registers one subcommand; the callback stores its exit code.
void RegisterManifest(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterSplit(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterTrials(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterAugment(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterTrain(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterScore(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterEval(CLI::App& app, const GlobalOptions& global, int& exit_code);
void RegisterDet(CLI::App& app, const GlobalOptions& global, int& exit_code);

}  // namespace svkit::cli

#endif  // SVKIT_TOOLS_CLI_COMMON_HPP_
