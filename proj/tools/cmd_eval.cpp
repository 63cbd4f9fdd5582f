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

// score, eval and det subcommands.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <unordered_map>

#include "cli_common.hpp"
#include "svkit/error.hpp"
#include "svkit/scoring.hpp"
#include "svkit/trainer.hpp"

namespace svkit::cli {

namespace fs = std::filesystem;

namespace {

scoring::EmbeddingArchive LoadArchive(const std::string& archive, const std::string& adapter) {
  auto a = scoring::ReadArchive(fs::path(archive));
  if (adapter.empty()) return a;
  return train::AdaptArchive(train::ReadCheckpoint(fs::path(adapter)), a);
}

std::size_t ResolveTopK(std::size_t requested, std::size_t cohort_size) {
  return requested == 0 ? std::min(scoring::kDefaultTopK, cohort_size) : requested;
}

void WriteScoreFile(const std::vector<scoring::ScoreLine>& lines, const std::string& path) {
  PrepareOutput(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  scoring::WriteScores(lines, out);
}

struct ScoreOptions {
  std::string archive;
  std::string trials;
  std::string out;
  std::string adapter;
  std::string cohort;
  std::string snorm_out;
  std::size_t top_k = 0;
  unsigned jobs = 1;
};

int RunScore(const ScoreOptions& o) {
  if (!o.snorm_out.empty() && o.cohort.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--snorm-out needs --cohort");
  }
  const auto archive = LoadArchive(o.archive, o.adapter);
  const auto trials = corpus::ReadTrials(fs::path(o.trials));
  auto records = scoring::ScoreTrials(trials, archive, o.jobs);
  const fs::path dir = PrepareOutput(o.out);
  WriteScoreFile(scoring::ToScoreLines(records), o.out);

  std::size_t top_k = 0;
  if (!o.cohort.empty()) {
    const auto cohort = ReadIdList(o.cohort);
    top_k = ResolveTopK(o.top_k, cohort.size());
    records = scoring::SNorm(records, archive, cohort, top_k, o.jobs);
    if (!o.snorm_out.empty()) WriteScoreFile(scoring::ToScoreLines(records, true), o.snorm_out);
  }
  std::printf("scored %zu trials\n", records.size());
  WriteRunJson(dir, "score",
               {{"archive", o.archive},
                {"trials", o.trials},
                {"out", o.out},
                {"adapter", o.adapter},
                {"cohort", o.cohort},
                {"snorm_out", o.snorm_out},
                {"top_k", top_k},
                {"jobs", o.jobs}});
  return kOk;
}

std::string PairKey(const std::string& e, const std::string& t) { return e + '\n' + t; }

/// Scores aligned with `trials`, looked up by (enroll, test).
std::vector<double> AlignScores(const std::vector<corpus::TrialPair>& trials,
                                const std::vector<scoring::ScoreLine>& lines,
                                const std::string& source) {
  std::unordered_map<std::string, double> by_pair;
  for (const auto& l : lines) by_pair[PairKey(l.enroll_utt, l.test_utt)] = l.score;
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& t : trials) {
    auto it = by_pair.find(PairKey(t.enroll_utt, t.test_utt));
    if (it == by_pair.end()) {
      throw Error(ErrorCode::kUnknownId,
                  source + " has no score for trial " + t.enroll_utt + " " + t.test_utt);
    }
    out.push_back(it->second);
  }
  return out;
}

nlohmann::ordered_json EerJson(const scoring::EerResult& r) {
  return {{"eer", r.eer}, {"eer_percent", 100.0 * r.eer}, {"threshold", r.threshold}};
}

struct EvalOptions {
  std::string trials;
  std::string scores;
  std::string snorm_scores;
  std::string archive;
  std::string adapter;
  std::string cohort;
  std::size_t top_k = 0;
  std::string report = "report.json";
  unsigned jobs = 1;
};

int RunEval(const EvalOptions& o) {
  if (o.scores.empty() == o.archive.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --scores or --archive");
  }
  if (!o.cohort.empty() && o.archive.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--cohort needs --archive");
  }
  const auto trials = corpus::ReadTrials(fs::path(o.trials));
  std::vector<corpus::TrialLabel> labels;
  for (const auto& t : trials) labels.push_back(t.label);

  std::vector<double> raw;
  std::optional<std::vector<double>> normalized;
  std::size_t top_k = 0;
  if (!o.scores.empty()) {
    raw = AlignScores(trials, scoring::ReadScores(fs::path(o.scores)), o.scores);
    if (!o.snorm_scores.empty()) {
      normalized =
          AlignScores(trials, scoring::ReadScores(fs::path(o.snorm_scores)), o.snorm_scores);
    }
  } else {
    const auto archive = LoadArchive(o.archive, o.adapter);
    auto records = scoring::ScoreTrials(trials, archive, o.jobs);
    for (const auto& r : records) raw.push_back(r.raw_score);
    if (!o.cohort.empty()) {
      const auto cohort = ReadIdList(o.cohort);
      top_k = ResolveTopK(o.top_k, cohort.size());
      records = scoring::SNorm(records, archive, cohort, top_k, o.jobs);
      normalized.emplace();
      for (const auto& r : records) normalized->push_back(*r.normalized_score);
    }
  }

  const auto raw_eer = scoring::ComputeEer(raw, labels);
  std::optional<scoring::EerResult> snorm_eer;
  if (normalized) snorm_eer = scoring::ComputeEer(*normalized, labels);

  const auto n_target = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), corpus::TrialLabel::kTarget));
  std::printf("%-10s %8s %10s\n", "condition", "EER%", "threshold");
  std::printf("%-10s %8.2f %10.4f\n", "raw", 100.0 * raw_eer.eer, raw_eer.threshold);
  if (snorm_eer) {
    std::printf("%-10s %8.2f %10.4f\n", "s-norm", 100.0 * snorm_eer->eer, snorm_eer->threshold);
  } else {
    std::printf("%-10s %8s %10s\n", "s-norm", "n/a", "-");
  }
  std::printf("(%zu trials: %zu target, %zu nontarget)\n", trials.size(), n_target,
              trials.size() - n_target);

  nlohmann::ordered_json report;
  report["trials"] = trials.size();
  report["targets"] = n_target;
  report["nontargets"] = trials.size() - n_target;
  report["raw"] = EerJson(raw_eer);
  report["snorm"] = snorm_eer ? EerJson(*snorm_eer) : nlohmann::ordered_json();
  if (top_k > 0) report["top_k"] = top_k;
  const fs::path dir = PrepareOutput(o.report);
  {
    std::ofstream out(o.report, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + o.report);
    out << report.dump(2) << '\n';
  }
  WriteRunJson(dir, "eval",
               {{"trials", o.trials},
                {"scores", o.scores},
                {"snorm_scores", o.snorm_scores},
                {"archive", o.archive},
                {"adapter", o.adapter},
                {"cohort", o.cohort},
                {"top_k", top_k},
                {"report", o.report}});
  return kOk;
}

struct DetOptions {
  std::string scores;
  std::string trials;
  std::string out;
};

int RunDet(const DetOptions& o) {
  const auto trials = corpus::ReadTrials(fs::path(o.trials));
  std::vector<corpus::TrialLabel> labels;
  for (const auto& t : trials) labels.push_back(t.label);
  const auto scores = AlignScores(trials, scoring::ReadScores(fs::path(o.scores)), o.scores);
  const auto points = scoring::DetPoints(scores, labels);
  const fs::path dir = PrepareOutput(o.out);
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + o.out);
  scoring::WriteDetCsv(points, out);
  std::printf("wrote %zu operating points\n", points.size());
  WriteRunJson(dir, "det", {{"scores", o.scores}, {"trials", o.trials}, {"out", o.out}});
  return kOk;
}

}  // namespace

void RegisterScore(CLI::App& app, const GlobalOptions&, int& exit_code) {
  auto o = std::make_shared<ScoreOptions>();
  auto* sub = app.add_subcommand("score", "Cosine-score trials, optionally with s-norm");
  sub->add_option("--archive", o->archive, "SVEM embedding archive")->required();
  sub->add_option("--trials", o->trials, "Trial list")->required();
  sub->add_option("--out", o->out, "Raw score file")->required();
  sub->add_option("--adapter", o->adapter, "Apply this SVAD adapter before scoring");
  sub->add_option("--cohort", o->cohort, "File of cohort utterance ids for s-norm");
  sub->add_option("--snorm-out", o->snorm_out, "Normalized score file");
  sub->add_option("--top-k", o->top_k, "Cohort top-k (0 = min(200, cohort size))")
      ->capture_default_str();
  sub->add_option("--jobs", o->jobs, "Worker threads")->capture_default_str();
  sub->callback([o, &exit_code] { exit_code = RunScore(*o); });
}

void RegisterEval(CLI::App& app, const GlobalOptions&, int& exit_code) {
  auto o = std::make_shared<EvalOptions>();
  auto* sub = app.add_subcommand("eval", "Report EER with and without s-norm");
  sub->add_option("--trials", o->trials, "Labelled trial list")->required();
  sub->add_option("--scores", o->scores, "Raw score file");
  sub->add_option("--snorm-scores", o->snorm_scores, "Normalized score file");
  sub->add_option("--archive", o->archive, "Score directly from this archive");
  sub->add_option("--adapter", o->adapter, "Adapter applied to --archive");
  sub->add_option("--cohort", o->cohort, "Cohort id list for s-norm (with --archive)");
  sub->add_option("--top-k", o->top_k, "Cohort top-k (0 = min(200, cohort size))")
      ->capture_default_str();
  sub->add_option("--report", o->report, "JSON report path")->capture_default_str();
  sub->add_option("--jobs", o->jobs, "Worker threads")->capture_default_str();
  sub->callback([o, &exit_code] { exit_code = RunEval(*o); });
}

void RegisterDet(CLI::App& app, const GlobalOptions&, int& exit_code) {
  auto o = std::make_shared<DetOptions>();
  auto* sub = app.add_subcommand("det", "Write DET operating points as CSV");
  sub->add_option("--scores", o->scores, "Score file")->required();
  sub->add_option("--trials", o->trials, "Labelled trial list")->required();
  sub->add_option("--out", o->out, "CSV threshold,far,frr")->required();
  sub->callback([o, &exit_code] { exit_code = RunDet(*o); });
}

}  // namespace svkit::cli
