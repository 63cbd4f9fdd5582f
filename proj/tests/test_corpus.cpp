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

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "svkit/audio.hpp"
#include "svkit/corpus.hpp"
#include "svkit/error.hpp"
#include "test_util.hpp"

using namespace svkit;
using namespace svkit::corpus;
using svkit::testing::TempDir;
namespace fs = std::filesystem;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected svkit::Error");
  return ErrorCode::kIo;
}

void WriteSilence(const fs::path& path, double seconds, int rate = 16000) {
  fs::create_directories(path.parent_path());
  audio::WriteWav({std::vector<double>(static_cast<std::size_t>(seconds * rate), 0.0), rate},
                  path, audio::SampleFormat::kPcm16);
}

/// Manifest with the given utterance count per speaker.
Manifest MakeManifest(const std::vector<std::size_t>& counts) {
  Manifest m;
  m.name = "synthetic";
  for (std::size_t s = 0; s < counts.size(); ++s) {
    for (std::size_t u = 0; u < counts[s]; ++u) {
      UtteranceRecord r;
      r.speaker_id = "spk" + std::to_string(s);
      r.utterance_id = r.speaker_id + "-" + std::to_string(u);
      r.path = r.utterance_id + ".wav";
      r.duration_s = 3.0 + static_cast<double>(u);
      m.records.push_back(r);
    }
  }
  return m;
}

/// Largest remainder over integer percentages, exact.
std::array<std::size_t, 3> OracleApportion(std::size_t count, std::array<int, 3> pct) {
  std::array<std::size_t, 3> out{};
  std::array<std::size_t, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    out[i] = count * pct[i] / 100;
    rem[i] = count * pct[i] % 100;
    assigned += out[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++out[order[k]];
  return out;
}

std::map<std::string, std::array<std::size_t, 3>> PerSpeakerCounts(const Manifest& m) {
  std::map<std::string, std::array<std::size_t, 3>> out;
  for (const auto& r : m.records) {
    auto& c = out[r.speaker_id];
    if (r.split == Split::kTrain) ++c[0];
    if (r.split == Split::kVal) ++c[1];
    if (r.split == Split::kTest) ++c[2];
  }
  return out;
}

}  // namespace

TEST_CASE("split names round-trip") {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest, Split::kUnassigned}) {
    CHECK(ParseSplit(SplitName(s)) == s);
  }
  CHECK(ParseSplit("") == Split::kUnassigned);
  CHECK(CodeOf([] { ParseSplit("dev"); }) == ErrorCode::kMalformedRow);
}

TEST_CASE("directory manifest: 2 speakers x 3 files, short files dropped") {
  TempDir dir;
  for (const char* spk : {"alice", "bob"}) {
    for (int u = 0; u < 3; ++u) {
      WriteSilence(dir / (std::string(spk) + "/utt" + std::to_string(u) + ".wav"), 3.5 + u);
    }
  }
  WriteSilence(dir / "bob/short.wav", 2.9);
  WriteSilence(dir / "bob/edge.wav", 3.0);
  std::ofstream(dir / "alice/notes.txt") << "ignore me";

  const auto built = BuildManifest(dir.path());
  const auto& m = built.manifest;
  CHECK(m.records.size() == 7);
  CHECK(m.Speakers() == std::vector<std::string>{"alice", "bob"});
  CHECK(built.summary.speakers == 2);
  CHECK(built.summary.utterances == 7);
  CHECK(built.summary.excluded_short == 1);
  double seconds = 0.0;
  std::set<std::string> ids;
  for (const auto& r : m.records) {
    seconds += r.duration_s;
    ids.insert(r.utterance_id);
    CHECK(r.duration_s >= 3.0);
    CHECK(r.split == Split::kUnassigned);
    CHECK(r.utterance_id.rfind(r.speaker_id + "-", 0) == 0);
  }
  CHECK(ids.count("bob-edge") == 1);
  CHECK(ids.count("bob-short") == 0);
  CHECK(built.summary.hours == doctest::Approx(seconds / 3600.0));
  CHECK_NOTHROW(m.Validate());
}

TEST_CASE("2.9 s is excluded and exactly 3.0 s is kept from tables") {
  TempDir dir;
  {
    std::ofstream csv(dir / "list.csv");
    csv << "utterance_id,speaker_id,path,duration_s\n"
        << "u1,s1,a.wav,2.9\n"
        << "u2,s1,b.wav,3.0\n"
        << "u3,s2,c.wav,10\n";
  }
  const auto built = BuildManifest(dir / "list.csv");
  REQUIRE(built.manifest.records.size() == 2);
  CHECK(built.manifest.records[0].utterance_id == "u2");
  CHECK(built.manifest.records[0].path == dir / "b.wav");
  CHECK(built.summary.excluded_short == 1);
  CHECK(built.manifest.name == "list");
}

TEST_CASE("tables probe missing durations from WAV headers") {
  TempDir dir;
  WriteSilence(dir / "wavs/x.wav", 4.0, 8000);
  WriteSilence(dir / "wavs/y.wav", 1.0);
  {
    std::ofstream j(dir / "list.jsonl");
    j << R"({"utterance_id":"x","speaker_id":"s","path":"wavs/x.wav"})" << "\n\n"
      << R"({"utterance_id":"y","speaker_id":"s","path":"wavs/y.wav"})" << "\n";
  }
  const auto built = BuildManifest(dir / "list.jsonl", 3.0, "kids");
  REQUIRE(built.manifest.records.size() == 1);
  CHECK(built.manifest.records[0].duration_s == doctest::Approx(4.0));
  CHECK(built.manifest.name == "kids");
}

TEST_CASE("manifest source errors") {
  TempDir dir;
  CHECK(CodeOf([&] { BuildManifest(dir / "absent.csv"); }) == ErrorCode::kUnreadableSource);
  std::ofstream(dir / "bad.csv") << "utterance_id,speaker_id,path\nu1,,a.wav\n";
  CHECK(CodeOf([&] { BuildManifest(dir / "bad.csv"); }) == ErrorCode::kMalformedRow);
  std::ofstream(dir / "nohdr.csv") << "id,who\n1,2\n";
  CHECK(CodeOf([&] { BuildManifest(dir / "nohdr.csv"); }) == ErrorCode::kMalformedRow);
  std::ofstream(dir / "bad.jsonl") << R"({"utterance_id":"u","path":"a.wav"})" << "\n";
  CHECK(CodeOf([&] { BuildManifest(dir / "bad.jsonl"); }) == ErrorCode::kMalformedRow);
  std::ofstream(dir / "junk.jsonl") << "{not json\n";
  CHECK(CodeOf([&] { BuildManifest(dir / "junk.jsonl"); }) == ErrorCode::kMalformedRow);
  std::ofstream(dir / "dup.csv") << "utterance_id,speaker_id,path,duration_s\nu,s,a,4\nu,t,b,5\n";
  CHECK(CodeOf([&] { BuildManifest(dir / "dup.csv"); }) == ErrorCode::kDuplicateId);
}

TEST_CASE("manifest JSONL round-trip") {
  TempDir dir;
  auto m = MakeManifest({3, 2});
  m.records[0].split = Split::kTrain;
  m.records[1].split = Split::kVal;
  m.records[2].split = Split::kTest;
  m.records[3].duration_s = 3.125;
  WriteManifest(m, dir / "m.jsonl");
  auto back = ReadManifest(dir / "m.jsonl");
  CHECK(back.name == "m");
  back.name = m.name;
  // Relative paths resolve against the manifest's directory.
  auto expected = m;
  for (auto& r : expected.records) r.path = dir.path() / r.path;
  CHECK(back == expected);
  WriteManifest(back, dir / "abs.jsonl");
  CHECK(ReadManifest(dir / "abs.jsonl").records == back.records);

  std::ostringstream text;
  WriteManifest(m, text);
  const auto first = text.str().substr(0, text.str().find('\n'));
  CHECK(first ==
        R"({"utterance_id":"spk0-0","speaker_id":"spk0","path":"spk0-0.wav","duration_s":3.0,"split":"train"})");
}

TEST_CASE("apportionment examples") {
  CHECK(Apportion(100, {}) == std::vector<std::size_t>{70, 15, 15});
  CHECK(Apportion(20, {}) == std::vector<std::size_t>{14, 3, 3});
  CHECK(Apportion(1, {}) == std::vector<std::size_t>{1, 0, 0});
  CHECK(Apportion(0, {}) == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("apportionment matches the exact largest-remainder oracle") {
  const std::vector<std::array<int, 3>> ratios{{70, 15, 15}, {80, 10, 10}, {34, 33, 33}, {50, 25, 25},
                                               {60, 30, 10}};
  for (const auto& pct : ratios) {
    const SplitRatios r{pct[0] / 100.0, pct[1] / 100.0, pct[2] / 100.0};
    for (std::size_t n = 0; n <= 500; ++n) {
      const auto got = Apportion(n, r);
      const auto want = OracleApportion(n, pct);
      CHECK(got == std::vector<std::size_t>(want.begin(), want.end()));
    }
  }
}

TEST_CASE("per-speaker split follows the apportionment") {
  const auto m = MakeManifest({100, 20, 1, 2, 3, 7});
  const auto split = StratifiedSplit(m, {}, 1);
  const auto counts = PerSpeakerCounts(split);
  CHECK(counts.at("spk0") == std::array<std::size_t, 3>{70, 15, 15});
  CHECK(counts.at("spk1") == std::array<std::size_t, 3>{14, 3, 3});
  CHECK(counts.at("spk2") == std::array<std::size_t, 3>{1, 0, 0});
  CHECK(counts.at("spk3") == std::array<std::size_t, 3>{1, 0, 1});
  for (const auto& r : split.records) CHECK(r.split != Split::kUnassigned);
}

TEST_CASE("split is a seeded partition within +-1 of the ratios") {
  std::mt19937_64 gen(3);
  std::vector<std::size_t> sizes;
  for (int s = 0; s < 120; ++s) sizes.push_back(1 + gen() % 60);
  const auto m = MakeManifest(sizes);
  const auto a = StratifiedSplit(m, {}, 11);
  const auto b = StratifiedSplit(m, {}, 11);
  const auto c = StratifiedSplit(m, {}, 12);
  CHECK(a == b);
  CHECK(a != c);
  REQUIRE(a.records.size() == m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    CHECK(a.records[i].utterance_id == m.records[i].utterance_id);
  }
  for (const auto& [spk, c3] : PerSpeakerCounts(a)) {
    const double n = static_cast<double>(c3[0] + c3[1] + c3[2]);
    if (n < 3) continue;
    CHECK(std::abs(c3[0] - 0.70 * n) <= 1.0);
    CHECK(std::abs(c3[1] - 0.15 * n) <= 1.0);
    CHECK(std::abs(c3[2] - 0.15 * n) <= 1.0);
  }
}

TEST_CASE("split shuffles which utterances land where") {
  const auto m = MakeManifest({40});
  std::set<std::vector<Split>> layouts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<Split> layout;
    for (const auto& r : StratifiedSplit(m, {}, seed).records) layout.push_back(r.split);
    layouts.insert(layout);
  }
  CHECK(layouts.size() == 20);
}

TEST_CASE("speaker-disjoint split keeps speakers whole") {
  std::vector<std::size_t> sizes(40, 5);
  const auto split = StratifiedSplit(MakeManifest(sizes), {}, 5, SplitMode::kSpeakerDisjoint);
  std::map<std::string, std::set<Split>> seen;
  std::map<Split, std::set<std::string>> speakers;
  for (const auto& r : split.records) {
    seen[r.speaker_id].insert(r.split);
    speakers[r.split].insert(r.speaker_id);
  }
  for (const auto& [spk, s] : seen) CHECK(s.size() == 1);
  CHECK(speakers[Split::kTrain].size() == 28);
  CHECK(speakers[Split::kVal].size() == 6);
  CHECK(speakers[Split::kTest].size() == 6);
}

TEST_CASE("split errors") {
  CHECK(CodeOf([] { StratifiedSplit(Manifest{}, {}, 0); }) == ErrorCode::kEmptyManifest);
  const auto m = MakeManifest({5});
  CHECK(CodeOf([&] { StratifiedSplit(m, {0.7, 0.2, 0.2}, 0); }) == ErrorCode::kBadRatios);
  CHECK(CodeOf([&] { StratifiedSplit(m, {1.0, 0.0, 0.0}, 0); }) == ErrorCode::kBadRatios);
  CHECK(CodeOf([&] { StratifiedSplit(m, {1.2, -0.1, -0.1}, 0); }) == ErrorCode::kBadRatios);
}

TEST_CASE("trial generation contract") {
  const auto m = MakeManifest({30, 25, 40, 12, 9});
  const auto trials = GenerateTrials(m, std::nullopt, 500, 500, 17);
  std::map<std::string, std::string> speaker_of;
  for (const auto& r : m.records) speaker_of[r.utterance_id] = r.speaker_id;
  std::size_t targets = 0;
  std::set<std::pair<std::string, std::string>> unordered;
  for (const auto& t : trials) {
    CHECK(t.enroll_utt != t.test_utt);
    const bool same = speaker_of.at(t.enroll_utt) == speaker_of.at(t.test_utt);
    CHECK(same == (t.label == TrialLabel::kTarget));
    targets += same;
    unordered.insert(std::minmax(t.enroll_utt, t.test_utt));
  }
  CHECK(trials.size() == 1000);
  CHECK(targets == 500);
  CHECK(unordered.size() == 1000);
  CHECK(GenerateTrials(m, std::nullopt, 500, 500, 17) == trials);
  CHECK(GenerateTrials(m, std::nullopt, 500, 500, 18) != trials);
}

TEST_CASE("3 speakers x 2 utterances give exactly 3 target pairs") {
  const auto m = MakeManifest({2, 2, 2});
  const auto trials = GenerateTrials(m, std::nullopt, 3, 12, 4);
  std::set<std::pair<std::string, std::string>> targets;
  for (const auto& t : trials) {
    if (t.label == TrialLabel::kTarget) targets.insert(std::minmax(t.enroll_utt, t.test_utt));
  }
  CHECK(targets == std::set<std::pair<std::string, std::string>>{
                       {"spk0-0", "spk0-1"}, {"spk1-0", "spk1-1"}, {"spk2-0", "spk2-1"}});
  CHECK(trials.size() == 15);
  CHECK(CodeOf([&] { GenerateTrials(m, std::nullopt, 4, 0, 4); }) ==
        ErrorCode::kNotEnoughDistinctPairs);
  CHECK(CodeOf([&] { GenerateTrials(m, std::nullopt, 0, 13, 4); }) ==
        ErrorCode::kNotEnoughDistinctPairs);
}

TEST_CASE("trial errors") {
  CHECK(CodeOf([] { GenerateTrials(MakeManifest({10}), std::nullopt, 0, 10, 1); }) ==
        ErrorCode::kInsufficientSpeakers);
  CHECK(CodeOf([] { GenerateTrials(MakeManifest({1, 1, 1}), std::nullopt, 1, 0, 1); }) ==
        ErrorCode::kInsufficientUtterances);
  // Only the test split is considered.
  auto m = StratifiedSplit(MakeManifest({1, 1}), {}, 0);
  CHECK(CodeOf([&] { GenerateTrials(m, Split::kTest, 0, 1, 1); }) ==
        ErrorCode::kInsufficientSpeakers);
}

TEST_CASE("trials are restricted to the requested split") {
  const auto m = StratifiedSplit(MakeManifest({20, 20, 20, 20}), {}, 2);
  std::map<std::string, Split> split_of;
  for (const auto& r : m.records) split_of[r.utterance_id] = r.split;
  for (const auto& t : GenerateTrials(m, Split::kTest, 10, 50, 3)) {
    CHECK(split_of.at(t.enroll_utt) == Split::kTest);
    CHECK(split_of.at(t.test_utt) == Split::kTest);
  }
}

TEST_CASE("trial sampling is uniform over distinct pairs") {
  // Dense regime: 4 target and 24 nontarget pairs in total.
  const auto small = MakeManifest({2, 2, 2, 2});
  std::map<std::pair<std::string, std::string>, int> hits;
  const int runs = 4000;
  for (int seed = 0; seed < runs; ++seed) {
    for (const auto& t : GenerateTrials(small, std::nullopt, 1, 1, static_cast<std::uint64_t>(seed))) {
      ++hits[std::minmax(t.enroll_utt, t.test_utt)];
    }
  }
  CHECK(hits.size() == 28);
  for (const auto& [pair, count] : hits) {
    const bool target = pair.first.substr(0, 4) == pair.second.substr(0, 4);
    const double p = target ? 1.0 / 4 : 1.0 / 24;
    CHECK(std::abs(count - runs * p) < 5 * std::sqrt(runs * p * (1 - p)));
  }

  // Sparse regime: targets are weighted by how many pairs each speaker owns.
  const auto skewed = MakeManifest({2, 3, 10, 2, 2, 2, 2, 2, 2, 2});
  const int target_pairs = 1 + 3 + 45 + 7;
  int big = 0;
  for (int seed = 0; seed < runs; ++seed) {
    const auto t = GenerateTrials(skewed, std::nullopt, 1, 0, static_cast<std::uint64_t>(seed));
    big += t[0].enroll_utt.rfind("spk2-", 0) == 0;
  }
  const double p = 45.0 / target_pairs;
  CHECK(std::abs(big - runs * p) < 5 * std::sqrt(runs * p * (1 - p)));
}

TEST_CASE("trial file round-trip and parse errors") {
  TempDir dir;
  const auto trials = GenerateTrials(MakeManifest({4, 4, 4}), std::nullopt, 5, 5, 9);
  WriteTrials(trials, dir / "t.txt");
  CHECK(ReadTrials(dir / "t.txt") == trials);
  const auto text = svkit::testing::ReadFileBytes(dir / "t.txt");
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);
  CHECK(text.find('\r') == std::string::npos);

  std::istringstream bad1("a b 2\n");
  CHECK(CodeOf([&] { ReadTrials(bad1); }) == ErrorCode::kMalformedRow);
  std::istringstream bad2("a b\n");
  CHECK(CodeOf([&] { ReadTrials(bad2); }) == ErrorCode::kMalformedRow);
  std::istringstream bad3("a a 1\n");
  CHECK(CodeOf([&] { ReadTrials(bad3); }) == ErrorCode::kMalformedRow);
  CHECK(CodeOf([&] { ReadTrials(dir / "none.txt"); }) == ErrorCode::kMissingFile);
}
