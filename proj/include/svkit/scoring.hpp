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

#ifndef SVKIT_SCORING_HPP_
#define SVKIT_SCORING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "svkit/corpus.hpp"

namespace svkit::scoring {

using corpus::TrialLabel;
using corpus::TrialPair;

/// Fixed-dimension float32 embeddings keyed by utterance id, in insertion
/// order.
class EmbeddingArchive {
 public:
  EmbeddingArchive(std::uint32_t dim, std::string model_id);

  std::uint32_t dim() const noexcept { return dim_; }
  const std::string& model_id() const noexcept { return model_id_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  /// Throws DimMismatch, DuplicateId, or InvalidArgument (non-finite value).
  void Add(std::string utterance_id, std::span<const float> vector);

  std::span<const float> Row(std::size_t i) const;
  std::optional<std::span<const float>> Find(const std::string& utterance_id) const;
  /// Throws UnknownId.
  std::span<const float> At(const std::string& utterance_id) const;

  bool operator==(const EmbeddingArchive& other) const;

 private:
  std::uint32_t dim_;
  std::string model_id_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary SVEM v1, little-endian:
//   "SVEM" u32 version u32 dim u64 count u16 len + model_id
//   then per entry: u16 len + id, dim x float32.
inline constexpr std::uint32_t kArchiveVersion = 1;

EmbeddingArchive ReadArchive(const std::filesystem::path& path);
EmbeddingArchive ReadArchive(std::istream& in);
void WriteArchive(const EmbeddingArchive& archive, const std::filesystem::path& path);
void WriteArchive(const EmbeddingArchive& archive, std::ostream& out);

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws LengthMismatch or
/// ZeroVector.
double CosineScore(std::span<const float> a, std::span<const float> b);
double CosineScore(std::span<const double> a, std::span<const double> b);

struct ScoreRecord {
  TrialPair trial;
  double raw_score = 0.0;
  std::optional<double> normalized_score;
};

/// Cosine-scores every trial. Output order follows `trials` regardless of
/// `jobs`.
std::vector<ScoreRecord> ScoreTrials(const std::vector<TrialPair>& trials,
                                     const EmbeddingArchive& archive,
                                     unsigned jobs = 1);

struct CohortStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and population standard deviation of the `top_k` highest cosine
/// scores of `embedding` against the cohort rows.
CohortStats TopKCohortStats(std::span<const float> embedding,
                            const std::vector<std::span<const float>>& cohort,
                            std::size_t top_k);

inline constexpr std::size_t kDefaultTopK = 200;

/// Adaptive symmetric s-norm:
///   0.5 * ((s - mu_e) / sigma_e + (s - mu_t) / sigma_t)
/// with enroll- and test-side statistics over the top_k closest cohort
/// members. Throws UnknownId, DegenerateCohort.
std::vector<ScoreRecord> SNorm(const std::vector<ScoreRecord>& scores,
                               const EmbeddingArchive& archive,
                               const std::vector<std::string>& cohort,
                               std::size_t top_k, unsigned jobs = 1);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

/// Equal error rate over a threshold sweep. Accept when score >= threshold:
/// FRR(t) = fraction of targets below t, FAR(t) = fraction of nontargets at
/// or above t. Between the adjacent operating points that bracket FAR = FRR
/// the crossing is linearly interpolated. Throws MissingClass.
EerResult ComputeEer(std::span<const double> scores,
                     std::span<const TrialLabel> labels);
EerResult ComputeEer(std::span<const double> target_scores,
                     std::span<const double> nontarget_scores);

struct DetPoint {
  double threshold = 0.0;  ///< +inf for the reject-everything point
  double far = 0.0;
  double frr = 0.0;
  bool operator==(const DetPoint&) const = default;
};

/// One operating point per distinct score plus the +inf threshold, in
/// ascending threshold order (FAR non-increasing, FRR non-decreasing).
std::vector<DetPoint> DetPoints(std::span<const double> scores,
                                std::span<const TrialLabel> labels);

void WriteDetCsv(const std::vector<DetPoint>& points, std::ostream& out);

struct ScoreLine {
  std::string enroll_utt;
  std::string test_utt;
  double score = 0.0;
};

// Score file: `<enroll> <test> <score>` per line.
std::vector<ScoreLine> ReadScores(const std::filesystem::path& path);
std::vector<ScoreLine> ReadScores(std::istream& in);
void WriteScores(const std::vector<ScoreLine>& lines, std::ostream& out);

/// Raw (or normalized, when `normalized` and present) scores as lines.
std::vector<ScoreLine> ToScoreLines(const std::vector<ScoreRecord>& records,
                                    bool normalized = false);

/// Shortest round-trip decimal form.
std::string FormatDouble(double value);

}  // namespace svkit::scoring

#endif  // SVKIT_SCORING_HPP_
