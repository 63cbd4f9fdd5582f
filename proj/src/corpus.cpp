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

#include "svkit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "svkit/audio.hpp"
#include "svkit/error.hpp"
#include "svkit/random.hpp"

namespace svkit::corpus {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  if (name == "unassigned" || name.empty()) return Split::kUnassigned;
  throw Error(ErrorCode::kMalformedRow, "unknown split '" + std::string(name) + "'");
}

void Manifest::Validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (r.utterance_id.empty()) throw Error(ErrorCode::kMalformedRow, "empty utterance id");
    if (r.speaker_id.empty()) {
      throw Error(ErrorCode::kMalformedRow, "empty speaker id for " + r.utterance_id);
    }
    if (!(r.duration_s >= 0.0)) {
      throw Error(ErrorCode::kMalformedRow, "negative duration for " + r.utterance_id);
    }
    if (!seen.insert(r.utterance_id).second) {
      throw Error(ErrorCode::kDuplicateId, r.utterance_id);
    }
  }
}

std::vector<std::string> Manifest::Speakers() const {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.speaker_id);
  return {ids.begin(), ids.end()};
}

ManifestSummary Summarize(const Manifest& manifest) {
  ManifestSummary s;
  s.speakers = manifest.Speakers().size();
  s.utterances = manifest.records.size();
  double seconds = 0.0;
  for (const auto& r : manifest.records) seconds += r.duration_s;
  s.hours = seconds / 3600.0;
  return s;
}

namespace {

bool IsWav(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::string SanitizeId(std::string id) {
  for (char& c : id) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '\\') c = '-';
  }
  return id;
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(Trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(Trim(cur));
  return fields;
}

double ProbeDuration(const fs::path& path) {
  return audio::ProbeWav(path).duration_s();
}

fs::path Resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

std::vector<UtteranceRecord> ScanDirectory(const fs::path& root) {
  std::vector<fs::path> speaker_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) speaker_dirs.push_back(entry.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  std::vector<UtteranceRecord> records;
  for (const auto& dir : speaker_dirs) {
    const std::string speaker = SanitizeId(dir.filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && IsWav(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      fs::path rel = fs::relative(file, dir);
      rel.replace_extension();
      UtteranceRecord r;
      r.speaker_id = speaker;
      r.utterance_id = speaker + "-" + SanitizeId(rel.generic_string());
      r.path = file;
      r.duration_s = ProbeDuration(file);
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<UtteranceRecord> ReadCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUnreadableSource, path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kMalformedRow, "missing CSV header");
  const auto header = SplitCsvLine(line);
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto c_id = column("utterance_id");
  const auto c_spk = column("speaker_id");
  const auto c_path = column("path");
  const auto c_dur = column("duration_s");
  const auto c_split = column("split");
  if (!c_id || !c_spk || !c_path) {
    throw Error(ErrorCode::kMalformedRow,
                "CSV header needs utterance_id, speaker_id and path columns");
  }
  const fs::path base = path.parent_path();
  std::vector<UtteranceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitCsvLine(line);
    auto get = [&](std::optional<std::size_t> c) -> std::string {
      return c && *c < f.size() ? f[*c] : std::string();
    };
    UtteranceRecord r;
    r.utterance_id = get(c_id);
    r.speaker_id = get(c_spk);
    const std::string p = get(c_path);
    if (r.utterance_id.empty() || r.speaker_id.empty() || p.empty()) {
      throw Error(ErrorCode::kMalformedRow,
                  path.string() + ":" + std::to_string(line_no) +
                      " lacks id, speaker or path");
    }
    r.path = Resolve(base, p);
    const std::string dur = get(c_dur);
    if (dur.empty()) {
      r.duration_s = ProbeDuration(r.path);
    } else {
      try {
        r.duration_s = std::stod(dur);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kMalformedRow, path.string() + ":" +
                                                  std::to_string(line_no) +
                                                  " bad duration '" + dur + "'");
      }
    }
    r.split = ParseSplit(get(c_split));
    records.push_back(std::move(r));
  }
  return records;
}

UtteranceRecord RecordFromJson(const nlohmann::json& j, const fs::path& base,
                               const std::string& where) {
  auto text = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return {};
    return it->get<std::string>();
  };
  UtteranceRecord r;
  r.utterance_id = text("utterance_id");
  r.speaker_id = text("speaker_id");
  const std::string p = text("path");
  if (r.utterance_id.empty() || r.speaker_id.empty() || p.empty()) {
    throw Error(ErrorCode::kMalformedRow, where + " lacks id, speaker or path");
  }
  r.path = Resolve(base, p);
  auto dur = j.find("duration_s");
  if (dur != j.end() && dur->is_number()) {
    r.duration_s = dur->get<double>();
  } else {
    r.duration_s = ProbeDuration(r.path);
  }
  r.split = ParseSplit(text("split"));
  return r;
}

std::vector<UtteranceRecord> ReadJsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kUnreadableSource, path.string());
  const fs::path base = path.parent_path();
  std::vector<UtteranceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRow, where + ": " + e.what());
    }
    records.push_back(RecordFromJson(j, base, where));
  }
  return records;
}

}  // namespace

BuildResult BuildManifest(const fs::path& source, double min_duration_s,
                          std::string name) {
  std::error_code ec;
  if (!fs::exists(source, ec)) throw Error(ErrorCode::kUnreadableSource, source.string());
  std::vector<UtteranceRecord> all;
  if (fs::is_directory(source, ec)) {
    all = ScanDirectory(source);
  } else {
    std::string ext = source.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    all = ext == ".csv" ? ReadCsv(source) : ReadJsonl(source);
  }

  BuildResult result;
  result.manifest.name =
      name.empty() ? source.filename().replace_extension().string() : std::move(name);
  for (auto& r : all) {
    if (r.duration_s < min_duration_s) {
      ++result.summary.excluded_short;
      continue;
    }
    result.manifest.records.push_back(std::move(r));
  }
  result.manifest.Validate();
  const std::size_t excluded = result.summary.excluded_short;
  result.summary = Summarize(result.manifest);
  result.summary.excluded_short = excluded;
  return result;
}

Manifest ReadManifest(const fs::path& path) {
  Manifest m;
  m.name = path.filename().replace_extension().string();
  m.records = ReadJsonl(path);
  m.Validate();
  return m;
}

void WriteManifest(const Manifest& manifest, std::ostream& out) {
  for (const auto& r : manifest.records) {
    ordered_json j;
    j["utterance_id"] = r.utterance_id;
    j["speaker_id"] = r.speaker_id;
    j["path"] = r.path.generic_string();
    j["duration_s"] = r.duration_s;
    j["split"] = SplitName(r.split);
    out << j.dump() << '\n';
  }
}

void WriteManifest(const Manifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  WriteManifest(manifest, out);
}

std::vector<std::size_t> Apportion(std::size_t count, const SplitRatios& ratios) {
  const double weights[3] = {ratios.train, ratios.val, ratios.test};
  std::vector<std::size_t> out(3);
  // Remainders in units of 1e-9 so equal exact remainders tie.
  long long fraction[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(count) * weights[i];
    // Absorb representation error so that e.g. 0.7 * 20 floors to 14.
    const double floor_q = std::floor(quota + 1e-9);
    out[i] = static_cast<std::size_t>(floor_q);
    fraction[i] = std::llround(std::max(0.0, quota - floor_q) * 1e9);
    assigned += out[i];
  }
  int order[3] = {0, 1, 2};
  std::stable_sort(std::begin(order), std::end(order),
                   [&](int a, int b) { return fraction[a] > fraction[b]; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++out[order[k % 3]];
  return out;
}

namespace {

void CheckRatios(const SplitRatios& r) {
  const double sum = r.train + r.val + r.test;
  if (!(r.train > 0 && r.val > 0 && r.test > 0) || std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kBadRatios,
                "ratios (" + std::to_string(r.train) + ", " + std::to_string(r.val) +
                    ", " + std::to_string(r.test) +
                    ") must be positive and sum to 1");
  }
}

// Small groups cannot honour the ratios; fill train first, then test.
std::vector<std::size_t> GroupCounts(std::size_t n, const SplitRatios& ratios) {
  if (n == 1) return {1, 0, 0};
  if (n == 2) return {1, 0, 1};
  return Apportion(n, ratios);
}

constexpr Split kOrder[3] = {Split::kTrain, Split::kVal, Split::kTest};

}  // namespace

Manifest StratifiedSplit(const Manifest& manifest, const SplitRatios& ratios,
                         std::uint64_t seed, SplitMode mode) {
  if (manifest.records.empty()) throw Error(ErrorCode::kEmptyManifest, manifest.name);
  CheckRatios(ratios);

  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    by_speaker[manifest.records[i].speaker_id].push_back(i);
  }

  Manifest out = manifest;
  Rng rng(seed);
  if (mode == SplitMode::kPerSpeaker) {
    for (auto& [speaker, idx] : by_speaker) {
      rng.Shuffle(std::span<std::size_t>(idx));
      const auto counts = GroupCounts(idx.size(), ratios);
      std::size_t k = 0;
      for (int s = 0; s < 3; ++s) {
        for (std::size_t c = 0; c < counts[s]; ++c) out.records[idx[k++]].split = kOrder[s];
      }
    }
  } else {
    std::vector<const std::vector<std::size_t>*> groups;
    for (const auto& [speaker, idx] : by_speaker) groups.push_back(&idx);
    rng.Shuffle(std::span(groups));
    const auto counts = GroupCounts(groups.size(), ratios);
    std::size_t k = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t c = 0; c < counts[s]; ++c, ++k) {
        for (std::size_t i : *groups[k]) out.records[i].split = kOrder[s];
      }
    }
  }
  return out;
}

namespace {

std::uint64_t PairKey(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return std::min(a, b) * n + std::max(a, b);
}

}  // namespace

std::vector<TrialPair> GenerateTrials(const Manifest& manifest,
                                      std::optional<Split> split,
                                      std::size_t n_target,
                                      std::size_t n_nontarget,
                                      std::uint64_t seed) {
  std::vector<const UtteranceRecord*> pool;
  for (const auto& r : manifest.records) {
    if (!split || r.split == *split) pool.push_back(&r);
  }
  const std::uint64_t n = pool.size();

  // Speaker index per pooled utterance, plus members per speaker.
  std::map<std::string, std::vector<std::uint64_t>> members_by_id;
  for (std::uint64_t i = 0; i < n; ++i) members_by_id[pool[i]->speaker_id].push_back(i);
  std::vector<std::vector<std::uint64_t>> members;
  std::vector<std::size_t> speaker_of(n);
  for (auto& [id, m] : members_by_id) {
    for (auto i : m) speaker_of[i] = members.size();
    members.push_back(std::move(m));
  }

  std::vector<std::uint64_t> cumulative;  // running count of target pairs
  std::uint64_t target_available = 0;
  for (const auto& m : members) {
    target_available += m.size() * (m.size() - 1) / 2;
    cumulative.push_back(target_available);
  }
  const std::uint64_t all_pairs = n * (n > 0 ? n - 1 : 0) / 2;
  const std::uint64_t nontarget_available = all_pairs - target_available;

  if (n_nontarget > 0 && members.size() < 2) {
    throw Error(ErrorCode::kInsufficientSpeakers,
                "nontarget trials need at least 2 speakers in the split");
  }
  if (n_target > 0 && target_available == 0) {
    throw Error(ErrorCode::kInsufficientUtterances,
                "target trials need a speaker with at least 2 utterances");
  }
  if (n_target > target_available) {
    throw Error(ErrorCode::kNotEnoughDistinctPairs,
                "requested " + std::to_string(n_target) + " target pairs, only " +
                    std::to_string(target_available) + " exist");
  }
  if (n_nontarget > nontarget_available) {
    throw Error(ErrorCode::kNotEnoughDistinctPairs,
                "requested " + std::to_string(n_nontarget) + " nontarget pairs, only " +
                    std::to_string(nontarget_available) + " exist");
  }

  Rng rng(seed);
  std::vector<TrialPair> trials;
  trials.reserve(n_target + n_nontarget);
  auto emit = [&](std::uint64_t a, std::uint64_t b, TrialLabel label) {
    if (a > b) std::swap(a, b);
    trials.push_back({pool[a]->utterance_id, pool[b]->utterance_id, label});
  };

  // Dense requests enumerate and partially shuffle; sparse ones reject.
  auto sample = [&](std::size_t wanted, std::uint64_t available, bool target,
                    auto&& draw) {
    if (wanted == 0) return;
    const TrialLabel label = target ? TrialLabel::kTarget : TrialLabel::kNontarget;
    if (2 * static_cast<std::uint64_t>(wanted) >= available) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
      pairs.reserve(available);
      if (target) {
        for (const auto& m : members) {
          for (std::size_t a = 0; a < m.size(); ++a) {
            for (std::size_t b = a + 1; b < m.size(); ++b) pairs.emplace_back(m[a], m[b]);
          }
        }
      } else {
        for (std::uint64_t a = 0; a < n; ++a) {
          for (std::uint64_t b = a + 1; b < n; ++b) {
            if (speaker_of[a] != speaker_of[b]) pairs.emplace_back(a, b);
          }
        }
      }
      for (std::size_t i = 0; i < wanted; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.Below(pairs.size() - i));
        std::swap(pairs[i], pairs[j]);
        emit(pairs[i].first, pairs[i].second, label);
      }
    } else {
      std::unordered_set<std::uint64_t> seen;
      while (seen.size() < wanted) {
        const auto [a, b] = draw();
        if (seen.insert(PairKey(a, b, n)).second) emit(a, b, label);
      }
    }
  };

  sample(n_target, target_available, true, [&] {
    const std::uint64_t r = rng.Below(target_available);
    const auto s = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    const auto& m = members[s];
    const std::uint64_t i = rng.Below(m.size());
    std::uint64_t j = rng.Below(m.size() - 1);
    if (j >= i) ++j;
    return std::pair{m[i], m[j]};
  });
  sample(n_nontarget, nontarget_available, false, [&] {
    for (;;) {
      const std::uint64_t a = rng.Below(n);
      const std::uint64_t b = rng.Below(n);
      if (speaker_of[a] != speaker_of[b]) return std::pair{a, b};
    }
  });

  rng.Shuffle(std::span(trials));
  return trials;
}

std::vector<TrialPair> ReadTrials(std::istream& in) {
  std::vector<TrialPair> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::istringstream fields(line);
    TrialPair t;
    std::string label;
    std::string extra;
    if (!(fields >> t.enroll_utt >> t.test_utt >> label) || (fields >> extra) ||
        (label != "0" && label != "1") || t.enroll_utt == t.test_utt) {
      throw Error(ErrorCode::kMalformedRow,
                  "trial line " + std::to_string(line_no) +
                      " is not '<enroll> <test> <0|1>'");
    }
    t.label = label == "1" ? TrialLabel::kTarget : TrialLabel::kNontarget;
    trials.push_back(std::move(t));
  }
  return trials;
}

std::vector<TrialPair> ReadTrials(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return ReadTrials(in);
}

void WriteTrials(const std::vector<TrialPair>& trials, std::ostream& out) {
  for (const auto& t : trials) {
    out << t.enroll_utt << ' ' << t.test_utt << ' '
        << (t.label == TrialLabel::kTarget ? '1' : '0') << '\n';
  }
}

void WriteTrials(const std::vector<TrialPair>& trials, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  WriteTrials(trials, out);
}

}  // namespace svkit::corpus
