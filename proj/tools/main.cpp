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

// svkit: manifest -> split -> augment -> (external embeddings) -> train ->
// score -> eval / det.
//
// Exit status: 0 success, 2 configuration or validation error, 1 runtime
// failure.

#include <cstdio>

#include "cli_common.hpp"
#include "svkit/error.hpp"

int main(int argc, char** argv) {
  using namespace svkit::cli;
  CLI::App app{"Speaker-verification augmentation, training and evaluation toolkit"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_flag("-v,--verbose", global.verbosity, "More progress output (repeatable)");

  int exit_code = kOk;
  RegisterManifest(app, global, exit_code);
  RegisterSplit(app, global, exit_code);
  RegisterTrials(app, global, exit_code);
  RegisterAugment(app, global, exit_code);
  RegisterTrain(app, global, exit_code);
  RegisterScore(app, global, exit_code);
  RegisterEval(app, global, exit_code);
  RegisterDet(app, global, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationFailure;
  } catch (const svkit::Error& e) {
    std::fprintf(stderr, "svkit: %s\n", e.what());
    return svkit::IsValidationError(e.code()) ? kValidationFailure : kRuntimeFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "svkit: %s\n", e.what());
    return kRuntimeFailure;
  }
  return exit_code;
}
