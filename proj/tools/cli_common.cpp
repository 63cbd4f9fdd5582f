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

#include "cli_common.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "svkit/error.hpp"

namespace svkit::cli {

namespace fs = std::filesystem;

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SVKIT_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::kInvalidArgument,
                std::string("SVKIT_SEED='") + env + "' is not an unsigned integer");
  }
  return 0;
}

void WriteRunJson(const fs::path& dir, const std::string& command,
                  const nlohmann::ordered_json& config) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);

  nlohmann::ordered_json run;
  run["command"] = command;
  run["version"] = "0.1.0";
  run["timestamp"] = stamp;
  run["config"] = config;
  std::ofstream out(dir / "run.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "run.json").string());
  out << run.dump(2) << '\n';
}

fs::path PrepareOutput(const fs::path& file) {
  fs::path dir = file.parent_path();
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> ReadIdList(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<std::string> ids;
  std::string id;
  while (in >> id) ids.push_back(id);
  return ids;
}

}  // namespace svkit::cli
