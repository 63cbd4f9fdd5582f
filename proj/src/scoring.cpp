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

#include "svkit/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "svkit/error.hpp"
#include "svkit/parallel.hpp"

namespace svkit::scoring {

EmbeddingArchive::EmbeddingArchive(std::uint32_t dim, std::string model_id)
    : dim_(dim), model_id_(std::move(model_id)) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "archive dim must be positive");
  if (model_id_.size() > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "model id longer than 65535 bytes");
  }
}

void EmbeddingArchive::Add(std::string utterance_id, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                utterance_id + " has " + std::to_string(vector.size()) +
                    " components, archive dim is " + std::to_string(dim_));
  }
  if (utterance_id.empty() || utterance_id.size() > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "utterance id must be 1..65535 bytes");
  }
  for (float v : vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, utterance_id + " has a non-finite component");
    }
  }
  if (!index_.emplace(utterance_id, ids_.size()).second) {
    throw Error(ErrorCode::kDuplicateId, utterance_id);
  }
  ids_.push_back(std::move(utterance_id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::span<const float> EmbeddingArchive::Row(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::optional<std::span<const float>> EmbeddingArchive::Find(
    const std::string& utterance_id) const {
  auto it = index_.find(utterance_id);
  if (it == index_.end()) return std::nullopt;
  return Row(it->second);
}

std::span<const float> EmbeddingArchive::At(const std::string& utterance_id) const {
  auto row = Find(utterance_id);
  if (!row) throw Error(ErrorCode::kUnknownId, utterance_id + " not in archive");
  return *row;
}

bool EmbeddingArchive::operator==(const EmbeddingArchive& other) const {
  return dim_ == other.dim_ && model_id_ == other.model_id_ && ids_ == other.ids_ &&
         data_ == other.data_;
}

namespace {

constexpr char kMagic[4] = {'S', 'V', 'E', 'M'};

template <typename T>
void PutLe(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T GetLe(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorCode::kTruncatedFile, std::string("while reading ") + what);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::string GetString(std::istream& in, const char* what) {
  const auto len = GetLe<std::uint16_t>(in, what);
  std::string s(len, '\0');
  if (len > 0 && !in.read(s.data(), len)) {
    throw Error(ErrorCode::kTruncatedFile, std::string("while reading ") + what);
  }
  return s;
}

}  // namespace

EmbeddingArchive ReadArchive(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (std::memcmp(magic, kMagic, got) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an SVEM embedding archive");
  }
  if (got < 4) throw Error(ErrorCode::kTruncatedFile, "missing header");
  const auto version = GetLe<std::uint32_t>(in, "version");
  if (version != kArchiveVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "SVEM version " + std::to_string(version));
  }
  const auto dim = GetLe<std::uint32_t>(in, "dim");
  const auto count = GetLe<std::uint64_t>(in, "count");
  if (dim == 0) throw Error(ErrorCode::kDimMismatch, "header dim is zero");
  EmbeddingArchive archive(dim, GetString(in, "model id"));
  std::vector<float> row(dim);
  std::vector<unsigned char> raw(static_cast<std::size_t>(dim) * 4);
  for (std::uint64_t e = 0; e < count; ++e) {
    std::string id = GetString(in, "entry id");
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
      throw Error(ErrorCode::kTruncatedFile,
                  "entry " + std::to_string(e) + " of " + std::to_string(count));
    }
    for (std::uint32_t k = 0; k < dim; ++k) {
      const unsigned char* p = raw.data() + 4 * k;
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      std::memcpy(&row[k], &bits, 4);
    }
    archive.Add(std::move(id), row);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kDimMismatch,
                "bytes left after " + std::to_string(count) + " entries of dim " +
                    std::to_string(dim));
  }
  return archive;
}

EmbeddingArchive ReadArchive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return ReadArchive(in);
}

void WriteArchive(const EmbeddingArchive& archive, std::ostream& out) {
  out.write(kMagic, 4);
  PutLe<std::uint32_t>(out, kArchiveVersion);
  PutLe<std::uint32_t>(out, archive.dim());
  PutLe<std::uint64_t>(out, archive.size());
  PutLe<std::uint16_t>(out, static_cast<std::uint16_t>(archive.model_id().size()));
  out.write(archive.model_id().data(), static_cast<std::streamsize>(archive.model_id().size()));
  for (std::size_t i = 0; i < archive.size(); ++i) {
    const auto& id = archive.ids()[i];
    const auto row = archive.Row(i);
    if (row.size() != archive.dim()) throw Error(ErrorCode::kDimMismatch, id);
    PutLe<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float v : row) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      PutLe<std::uint32_t>(out, bits);
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "archive write failed");
}

void WriteArchive(const EmbeddingArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  WriteArchive(archive, out);
}

namespace {

template <typename T>
double Cosine(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

double CosineScore(std::span<const float> a, std::span<const float> b) {
  return Cosine(a, b);
}

double CosineScore(std::span<const double> a, std::span<const double> b) {
  return Cosine(a, b);
}

std::vector<ScoreRecord> ScoreTrials(const std::vector<TrialPair>& trials,
                                     const EmbeddingArchive& archive, unsigned jobs) {
  std::vector<ScoreRecord> out(trials.size());
  ParallelFor(trials.size(), jobs, [&](std::size_t i) {
    const auto& t = trials[i];
    out[i].trial = t;
    out[i].raw_score = CosineScore(archive.At(t.enroll_utt), archive.At(t.test_utt));
  });
  return out;
}

CohortStats TopKCohortStats(std::span<const float> embedding,
                            const std::vector<std::span<const float>>& cohort,
                            std::size_t top_k) {
  if (top_k == 0 || top_k > cohort.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "top_k " + std::to_string(top_k) + " with a cohort of " +
                    std::to_string(cohort.size()));
  }
  std::vector<double> s(cohort.size());
  for (std::size_t i = 0; i < cohort.size(); ++i) s[i] = CosineScore(embedding, cohort[i]);
  std::partial_sort(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(top_k), s.end(),
                    std::greater<>());
  double mean = 0.0;
  for (std::size_t i = 0; i < top_k; ++i) mean += s[i];
  mean /= static_cast<double>(top_k);
  double var = 0.0;
  for (std::size_t i = 0; i < top_k; ++i) var += (s[i] - mean) * (s[i] - mean);
  var /= static_cast<double>(top_k);
  return {mean, std::sqrt(var)};
}

std::vector<ScoreRecord> SNorm(const std::vector<ScoreRecord>& scores,
                               const EmbeddingArchive& archive,
                               const std::vector<std::string>& cohort, std::size_t top_k,
                               unsigned jobs) {
  std::vector<std::span<const float>> cohort_rows;
  cohort_rows.reserve(cohort.size());
  for (const auto& id : cohort) cohort_rows.push_back(archive.At(id));

  // Statistics depend only on the utterance, so compute each once.
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<const std::string*> unique;
  for (const auto& r : scores) {
    for (const std::string* id : {&r.trial.enroll_utt, &r.trial.test_utt}) {
      if (slot.emplace(*id, unique.size()).second) unique.push_back(id);
    }
  }
  std::vector<CohortStats> stats(unique.size());
  ParallelFor(unique.size(), jobs, [&](std::size_t i) {
    stats[i] = TopKCohortStats(archive.At(*unique[i]), cohort_rows, top_k);
    if (!(stats[i].stddev > 0.0)) {
      throw Error(ErrorCode::kDegenerateCohort,
                  "zero cohort spread for " + *unique[i]);
    }
  });

  std::vector<ScoreRecord> out = scores;
  for (auto& r : out) {
    const auto& e = stats[slot.at(r.trial.enroll_utt)];
    const auto& t = stats[slot.at(r.trial.test_utt)];
    r.normalized_score =
        0.5 * ((r.raw_score - e.mean) / e.stddev + (r.raw_score - t.mean) / t.stddev);
  }
  return out;
}

std::vector<DetPoint> DetPoints(std::span<const double> scores,
                                std::span<const TrialLabel> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scores and labels differ in length");
  }
  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(scores.size());
  std::size_t n_target = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite score");
    }
    const bool is_target = labels[i] == TrialLabel::kTarget;
    n_target += is_target;
    sorted.emplace_back(scores[i], is_target);
  }
  const std::size_t n_nontarget = scores.size() - n_target;
  if (n_target == 0 || n_nontarget == 0) {
    throw Error(ErrorCode::kMissingClass, "need at least one target and one nontarget score");
  }
  std::sort(sorted.begin(), sorted.end());

  // At threshold sorted[i].first everything before i is rejected.
  std::vector<DetPoint> points;
  std::size_t targets_below = 0;
  std::size_t nontargets_below = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].first;
    points.push_back({t, static_cast<double>(n_nontarget - nontargets_below) / n_nontarget,
                      static_cast<double>(targets_below) / n_target});
    for (; i < sorted.size() && sorted[i].first == t; ++i) {
      (sorted[i].second ? targets_below : nontargets_below) += 1;
    }
  }
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return points;
}

EerResult ComputeEer(std::span<const double> scores, std::span<const TrialLabel> labels) {
  const auto points = DetPoints(scores, labels);
  // FAR - FRR starts at 1 (lowest threshold) and ends at -1 (+inf).
  for (std::size_t j = 1; j < points.size(); ++j) {
    const DetPoint& hi = points[j];
    const double d_hi = hi.far - hi.frr;
    if (d_hi > 0.0) continue;
    const DetPoint& lo = points[j - 1];
    if (d_hi == 0.0) return {hi.far, hi.threshold};
    const double d_lo = lo.far - lo.frr;
    const double lambda = d_lo / (d_lo - d_hi);
    const double eer = lo.far + lambda * (hi.far - lo.far);
    const double threshold = std::isinf(hi.threshold)
                                 ? lo.threshold
                                 : lo.threshold + lambda * (hi.threshold - lo.threshold);
    return {eer, threshold};
  }
  return {1.0, points.back().threshold};  // unreachable: last point has FAR - FRR = -1
}

EerResult ComputeEer(std::span<const double> target_scores,
                     std::span<const double> nontarget_scores) {
  std::vector<double> scores(target_scores.begin(), target_scores.end());
  scores.insert(scores.end(), nontarget_scores.begin(), nontarget_scores.end());
  std::vector<TrialLabel> labels(target_scores.size(), TrialLabel::kTarget);
  labels.resize(scores.size(), TrialLabel::kNontarget);
  return ComputeEer(scores, labels);
}

std::string FormatDouble(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

void WriteDetCsv(const std::vector<DetPoint>& points, std::ostream& out) {
  out << "threshold,far,frr\n";
  for (const auto& p : points) {
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.far) << ','
        << FormatDouble(p.frr) << '\n';
  }
}

std::vector<ScoreLine> ReadScores(std::istream& in) {
  std::vector<ScoreLine> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    ScoreLine s;
    std::string value;
    std::string extra;
    if (!(fields >> s.enroll_utt)) continue;  // blank
    bool ok = static_cast<bool>(fields >> s.test_utt >> value) && !(fields >> extra);
    if (ok) {
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s.score);
      ok = ec == std::errc() && ptr == value.data() + value.size() && std::isfinite(s.score);
    }
    if (!ok) {
      throw Error(ErrorCode::kMalformedRow,
                  "score line " + std::to_string(line_no) + " is not '<enroll> <test> <score>'");
    }
    lines.push_back(std::move(s));
  }
  return lines;
}

std::vector<ScoreLine> ReadScores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return ReadScores(in);
}

void WriteScores(const std::vector<ScoreLine>& lines, std::ostream& out) {
  for (const auto& s : lines) {
    out << s.enroll_utt << ' ' << s.test_utt << ' ' << FormatDouble(s.score) << '\n';
  }
}

std::vector<ScoreLine> ToScoreLines(const std::vector<ScoreRecord>& records,
                                    bool normalized) {
  std::vector<ScoreLine> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const double s = normalized && r.normalized_score ? *r.normalized_score : r.raw_score;
    out.push_back({r.trial.enroll_utt, r.trial.test_utt, s});
  }
  return out;
}

}  // namespace svkit::scoring
