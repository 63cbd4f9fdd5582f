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

#ifndef SVKIT_CORPUS_HPP_
#define SVKIT_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svkit::corpus {

enum class Split { kUnassigned, kTrain, kVal, kTest };

std::string_view SplitName(Split split);
/// Accepts "train", "val", "test", "unassigned" (and "" for unassigned).
Split ParseSplit(std::string_view name);

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::filesystem::path path;
  double duration_s = 0.0;
  Split split = Split::kUnassigned;

  bool operator==(const UtteranceRecord&) const = default;
};

struct Manifest {
  std::string name;
  std::vector<UtteranceRecord> records;

  /// Ids unique, speakers non-empty, durations non-negative. Throws.
  void Validate() const;
  /// Sorted distinct speaker ids.
  std::vector<std::string> Speakers() const;
  bool operator==(const Manifest&) const = default;
};

struct ManifestSummary {
  std::size_t speakers = 0;
  std::size_t utterances = 0;
  double hours = 0.0;
  std::size_t excluded_short = 0;
};

struct BuildResult {
  Manifest manifest;
  ManifestSummary summary;
};

inline constexpr double kMinDurationS = 3.0;

/// Builds a manifest from either a `speaker_id/...` tree of WAV files or a
/// CSV/JSONL table. Records shorter than `min_duration_s` are dropped; the
/// boundary itself is kept. Missing durations are read from WAV headers.
BuildResult BuildManifest(const std::filesystem::path& source,
                          double min_duration_s = kMinDurationS,
                          std::string name = {});

ManifestSummary Summarize(const Manifest& manifest);

// JSON-lines manifest I/O: keys utterance_id, speaker_id, path, duration_s,
// split.
Manifest ReadManifest(const std::filesystem::path& path);
void WriteManifest(const Manifest& manifest, std::ostream& out);
void WriteManifest(const Manifest& manifest, const std::filesystem::path& path);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

enum class SplitMode {
  /// Every speaker contributes to every split (stratified per speaker).
  kPerSpeaker,
  /// Speakers, not utterances, are apportioned; no speaker crosses splits.
  kSpeakerDisjoint,
};

/// Largest-remainder apportionment of `count` items. Ties in the remainder go
/// to train, then val, then test.
std::vector<std::size_t> Apportion(std::size_t count, const SplitRatios& ratios);

/// Returns a copy of `manifest` with every record's split assigned. Groups
/// of one go to train; groups of two go to train and test.
Manifest StratifiedSplit(const Manifest& manifest, const SplitRatios& ratios,
                         std::uint64_t seed,
                         SplitMode mode = SplitMode::kPerSpeaker);

enum class TrialLabel { kNontarget = 0, kTarget = 1 };

struct TrialPair {
  std::string enroll_utt;
  std::string test_utt;
  TrialLabel label = TrialLabel::kNontarget;

  bool operator==(const TrialPair&) const = default;
};

/// Samples distinct unordered utterance pairs uniformly without replacement
/// among the records of `split` (all records when nullopt).
std::vector<TrialPair> GenerateTrials(const Manifest& manifest,
                                      std::optional<Split> split,
                                      std::size_t n_target,
                                      std::size_t n_nontarget,
                                      std::uint64_t seed);

// Trial file: `<enroll> <test> <0|1>` per line.
std::vector<TrialPair> ReadTrials(const std::filesystem::path& path);
std::vector<TrialPair> ReadTrials(std::istream& in);
void WriteTrials(const std::vector<TrialPair>& trials, std::ostream& out);
void WriteTrials(const std::vector<TrialPair>& trials,
                 const std::filesystem::path& path);

}  // namespace svkit::corpus

#endif  // SVKIT_CORPUS_HPP_
