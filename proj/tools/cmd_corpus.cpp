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

// manifest, split and trials subcommands.

#include <cstdio>
#include <memory>

#include "cli_common.hpp"
#include "svkit/corpus.hpp"

namespace svkit::cli {

namespace fs = std::filesystem;

namespace {

struct ManifestOptions {
  std::string source;
  std::string out;
  double min_duration = corpus::kMinDurationS;
  std::string name;
};

int RunManifest(const ManifestOptions& o) {
  const auto result = corpus::BuildManifest(o.source, o.min_duration, o.name);
  const fs::path dir = PrepareOutput(o.out);
  corpus::WriteManifest(result.manifest, fs::path(o.out));
  const auto& s = result.summary;
  std::printf("manifest %s: %zu speakers, %zu utterances, %.3f hours\n",
              result.manifest.name.c_str(), s.speakers, s.utterances, s.hours);
  std::printf("excluded %zu recording(s) shorter than %g s\n", s.excluded_short,
              o.min_duration);
  WriteRunJson(dir, "manifest",
               {{"source", o.source},
                {"out", o.out},
                {"min_duration_s", o.min_duration},
                {"name", result.manifest.name},
                {"speakers", s.speakers},
                {"utterances", s.utterances},
                {"excluded_short", s.excluded_short}});
  return kOk;
}

struct SplitOptions {
  std::string manifest;
  std::string out;
  corpus::SplitRatios ratios;
  std::optional<std::uint64_t> seed;
  bool speaker_disjoint = false;
};

int RunSplit(const SplitOptions& o) {
  const std::uint64_t seed = ResolveSeed(o.seed);
  const auto in = corpus::ReadManifest(o.manifest);
  const auto out = corpus::StratifiedSplit(
      in, o.ratios, seed,
      o.speaker_disjoint ? corpus::SplitMode::kSpeakerDisjoint : corpus::SplitMode::kPerSpeaker);
  const fs::path dir = PrepareOutput(o.out);
  corpus::WriteManifest(out, fs::path(o.out));
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& r : out.records) ++counts[static_cast<int>(r.split)];
  std::printf("train %zu  val %zu  test %zu\n", counts[1], counts[2], counts[3]);
  WriteRunJson(dir, "split",
               {{"manifest", o.manifest},
                {"out", o.out},
                {"train", o.ratios.train},
                {"val", o.ratios.val},
                {"test", o.ratios.test},
                {"seed", seed},
                {"speaker_disjoint", o.speaker_disjoint}});
  return kOk;
}

struct TrialsOptions {
  std::string manifest;
  std::string out;
  std::string split = "test";
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  std::optional<std::uint64_t> seed;
};

int RunTrials(const TrialsOptions& o) {
  const std::uint64_t seed = ResolveSeed(o.seed);
  const auto m = corpus::ReadManifest(o.manifest);
  std::optional<corpus::Split> split;
  if (o.split != "all") split = corpus::ParseSplit(o.split);
  const auto trials = corpus::GenerateTrials(m, split, o.n_target, o.n_nontarget, seed);
  const fs::path dir = PrepareOutput(o.out);
  corpus::WriteTrials(trials, fs::path(o.out));
  std::printf("%zu target + %zu nontarget trials from split '%s'\n", o.n_target,
              o.n_nontarget, o.split.c_str());
  WriteRunJson(dir, "trials",
               {{"manifest", o.manifest},
                {"out", o.out},
                {"split", o.split},
                {"n_target", o.n_target},
                {"n_nontarget", o.n_nontarget},
                {"seed", seed}});
  return kOk;
}

}  // namespace

void RegisterManifest(CLI::App& app, const GlobalOptions&, int& exit_code) {
  auto o = std::make_shared<ManifestOptions>();
  auto* sub = app.add_subcommand("manifest", "Build a JSONL manifest from a directory or table");
  sub->add_option("--source", o->source, "speaker_id/... WAV tree, CSV, or JSONL")->required();
  sub->add_option("--out", o->out, "Output manifest (JSONL)")->required();
  sub->add_option("--min-duration", o->min_duration, "Drop recordings shorter than this (s)")
      ->capture_default_str();
  sub->add_option("--name", o->name, "Manifest name");
  sub->callback([o, &exit_code] { exit_code = RunManifest(*o); });
}

void RegisterSplit(CLI::App& app, const GlobalOptions&, int& exit_code) {
  auto o = std::make_shared<SplitOptions>();
  auto* sub = app.add_subcommand("split", "Assign train/val/test per speaker");
  sub->add_option("--manifest", o->manifest, "Input manifest")->required();
  sub->add_option("--out", o->out, "Output manifest")->required();
  sub->add_option("--train", o->ratios.train)->capture_default_str();
  sub->add_option("--val", o->ratios.val)->capture_default_str();
  sub->add_option("--test", o->ratios.test)->capture_default_str();
  sub->add_option("--seed", o->seed, "Shuffle seed (default $SVKIT_SEED or 0)");
  sub->add_flag("--speaker-disjoint", o->speaker_disjoint,
                "Apportion whole speakers instead of each speaker's utterances");
  sub->callback([o, &exit_code] { exit_code = RunSplit(*o); });
}

void RegisterTrials(CLI::App& app, const GlobalOptions&, int& exit_code) {
  auto o = std::make_shared<TrialsOptions>();
  auto* sub = app.add_subcommand("trials", "Sample verification trials");
  sub->add_option("--manifest", o->manifest, "Split manifest")->required();
  sub->add_option("--out", o->out, "Trial list")->required();
  sub->add_option("--split", o->split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "test", "unassigned", "all"}))
      ->capture_default_str();
  sub->add_option("--n-target", o->n_target)->required();
  sub->add_option("--n-nontarget", o->n_nontarget)->required();
  sub->add_option("--seed", o->seed, "Sampling seed (default $SVKIT_SEED or 0)");
  sub->callback([o, &exit_code] { exit_code = RunTrials(*o); });
}

}  // namespace svkit::cli
