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

#include <cstdio>
#include <fstream>
#include <memory>

#include "cli_common.hpp"
#include "svkit/augment.hpp"
#include "svkit/error.hpp"
#include "svkit/parallel.hpp"

namespace svkit::cli {

namespace fs = std::filesystem;

namespace {

struct AugmentOptions {
  std::string manifest;
  std::string noise_dir;
  std::string out_dir;
  std::string split = "all";
  std::string babble_manifest;
  augment::AugmentPolicy policy;
  augment::NoiseDirLayout layout;
  double max_rir_seconds = 4.0;
  int copies = 1;
  std::uint64_t epoch = 0;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool pcm16 = false;
};

audio::AudioBuffer LoadForPipeline(const corpus::UtteranceRecord& r) {
  return audio::Resample(audio::LoadAudio(r.path), audio::kPipelineRateHz);
}

int RunAugment(const AugmentOptions& o, const GlobalOptions& global) {
  augment::AugmentPolicy policy = o.policy;
  policy.seed = ResolveSeed(o.seed);
  policy.max_rir_samples =
      static_cast<std::size_t>(o.max_rir_seconds * audio::kPipelineRateHz);
  policy.Validate();
  if (o.copies < 1) throw Error(ErrorCode::kInvalidArgument, "--copies must be >= 1");

  const auto manifest = corpus::ReadManifest(o.manifest);
  std::vector<const corpus::UtteranceRecord*> inputs;
  for (const auto& r : manifest.records) {
    if (o.split == "all" || r.split == corpus::ParseSplit(o.split)) inputs.push_back(&r);
  }

  // Babble comes from development speakers only: never from the test split.
  augment::BabblePool pool;
  const auto babble_source =
      o.babble_manifest.empty() ? manifest : corpus::ReadManifest(o.babble_manifest);
  for (const auto& r : babble_source.records) {
    if (r.split != corpus::Split::kTest) pool.records.push_back(r);
  }
  pool.loader = LoadForPipeline;

  std::vector<augment::NoiseSource> noises;
  if (!o.noise_dir.empty()) {
    noises = augment::LoadNoiseSources(o.noise_dir, o.layout, audio::kPipelineRateHz,
                                       policy.max_rir_samples);
  }
  // Fail on a policy the noise inventory cannot satisfy before touching any
  // utterance.
  auto count = [&](augment::NoiseKind kind) {
    std::size_t n = 0;
    for (const auto& s : noises) n += s.kind == kind;
    return n;
  };
  if (policy.p_reverb > 0 && count(augment::NoiseKind::kRir) == 0) {
    throw Error(ErrorCode::kMissingNoiseKind, "--p-reverb > 0 but no RIR files under " +
                                                  (fs::path(o.noise_dir) / o.layout.rir_subdir).string());
  }
  if (policy.p_noise > 0 && count(augment::NoiseKind::kBackground) == 0) {
    throw Error(ErrorCode::kMissingNoiseKind,
                "--p-noise > 0 but no noise files under " +
                    (fs::path(o.noise_dir) / o.layout.background_subdir).string());
  }
  if (policy.p_babble > 0 && pool.records.empty() && count(augment::NoiseKind::kBabble) == 0) {
    throw Error(ErrorCode::kMissingNoiseKind, "--p-babble > 0 but the babble pool is empty");
  }

  const fs::path out_dir(o.out_dir);
  fs::create_directories(out_dir / "wav");

  struct Job {
    const corpus::UtteranceRecord* record;
    int copy;
  };
  std::vector<Job> jobs;
  for (const auto* r : inputs) {
    for (int c = 0; c < o.copies; ++c) jobs.push_back({r, c});
  }
  struct Outcome {
    corpus::UtteranceRecord record;
    nlohmann::ordered_json log;
    bool ok = false;
  };
  std::vector<Outcome> outcomes(jobs.size());
  const auto format = o.pcm16 ? audio::SampleFormat::kPcm16 : audio::SampleFormat::kFloat32;

  ParallelFor(jobs.size(), o.jobs, [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& rec = *job.record;
    Outcome& out = outcomes[i];
    out.record = rec;
    out.record.utterance_id = rec.utterance_id + "-aug" + std::to_string(job.copy);
    out.record.path = out_dir / "wav" / (out.record.utterance_id + ".wav");
    const std::uint64_t seed =
        augment::UtteranceSeed(policy.seed, rec.utterance_id, o.epoch, job.copy);
    try {
      const auto clean = LoadForPipeline(rec);
      Rng rng(seed);
      auto result = augment::AugmentUtterance(clean, policy, noises, rng, &pool);
      result.log.utterance_id = out.record.utterance_id;
      result.log.seed = seed;
      audio::WriteWav(result.buffer, out.record.path, format);
      out.record.duration_s = result.buffer.duration_s();
      out.log = result.log.ToJson();
      out.log["source"] = rec.utterance_id;
      out.ok = true;
    } catch (const std::exception& e) {
      out.log = {{"utterance_id", out.record.utterance_id},
                 {"source", rec.utterance_id},
                 {"seed", seed},
                 {"error", e.what()}};
    }
  });

  corpus::Manifest augmented;
  augmented.name = manifest.name + "-aug";
  std::ofstream log(out_dir / "augment_log.jsonl", std::ios::binary | std::ios::trunc);
  std::size_t failures = 0;
  for (auto& out : outcomes) {
    log << out.log.dump() << '\n';
    if (out.ok) {
      augmented.records.push_back(std::move(out.record));
    } else {
      ++failures;
      std::fprintf(stderr, "augment failed for %s: %s\n",
                   out.log["source"].get<std::string>().c_str(),
                   out.log["error"].get<std::string>().c_str());
    }
  }
  corpus::WriteManifest(augmented, out_dir / "manifest.jsonl");
  if (global.verbosity > 0 || failures > 0) {
    std::fprintf(stderr, "augmented %zu of %zu utterance copies\n", jobs.size() - failures,
                 jobs.size());
  }
  std::printf("wrote %zu augmented utterances to %s\n", augmented.records.size(),
              o.out_dir.c_str());

  WriteRunJson(out_dir, "augment",
               {{"manifest", o.manifest},
                {"noise_dir", o.noise_dir},
                {"babble_manifest", o.babble_manifest},
                {"split", o.split},
                {"snr_db_min", policy.snr_db_min},
                {"snr_db_max", policy.snr_db_max},
                {"babble_speakers_min", policy.babble_speakers_min},
                {"babble_speakers_max", policy.babble_speakers_max},
                {"babble_balance", policy.babble_balance},
                {"p_noise", policy.p_noise},
                {"p_babble", policy.p_babble},
                {"p_reverb", policy.p_reverb},
                {"max_rir_samples", policy.max_rir_samples},
                {"copies", o.copies},
                {"epoch", o.epoch},
                {"seed", policy.seed},
                {"jobs", o.jobs},
                {"format", o.pcm16 ? "pcm16" : "float32"},
                {"failures", failures}});
  return failures == 0 ? kOk : kRuntimeFailure;
}

}  // namespace

void RegisterAugment(CLI::App& app, const GlobalOptions& global, int& exit_code) {
  auto o = std::make_shared<AugmentOptions>();
  auto* sub = app.add_subcommand("augment", "Corrupt utterances with noise, babble and reverb");
  sub->add_option("--manifest", o->manifest, "Utterances to augment")->required();
  sub->add_option("--noise-dir", o->noise_dir, "Root holding noise/, babble/ and rir/ subtrees");
  sub->add_option("--out-dir", o->out_dir, "Receives wav/, augment_log.jsonl, manifest.jsonl")
      ->required();
  sub->add_option("--split", o->split, "Only augment this split")
      ->check(CLI::IsMember({"train", "val", "test", "unassigned", "all"}))
      ->capture_default_str();
  sub->add_option("--babble-manifest", o->babble_manifest,
                  "Babble speaker pool (default: --manifest minus its test split)");
  sub->add_option("--snr-min", o->policy.snr_db_min, "dB")->capture_default_str();
  sub->add_option("--snr-max", o->policy.snr_db_max, "dB")->capture_default_str();
  sub->add_option("--babble-min", o->policy.babble_speakers_min)->capture_default_str();
  sub->add_option("--babble-max", o->policy.babble_speakers_max)->capture_default_str();
  sub->add_flag("!--no-babble-balance", o->policy.babble_balance,
                "Sum babble tracks without scaling each to unit RMS");
  sub->add_option("--p-noise", o->policy.p_noise)->capture_default_str();
  sub->add_option("--p-babble", o->policy.p_babble)->capture_default_str();
  sub->add_option("--p-reverb", o->policy.p_reverb)->capture_default_str();
  sub->add_option("--noise-subdir", o->layout.background_subdir)->capture_default_str();
  sub->add_option("--babble-subdir", o->layout.babble_subdir)->capture_default_str();
  sub->add_option("--rir-subdir", o->layout.rir_subdir)->capture_default_str();
  sub->add_option("--max-rir-seconds", o->max_rir_seconds)->capture_default_str();
  sub->add_option("--copies", o->copies, "Augmented copies per utterance")->capture_default_str();
  sub->add_option("--epoch", o->epoch, "Epoch index mixed into per-utterance seeds")
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Master seed (default $SVKIT_SEED or 0)");
  sub->add_option("--jobs", o->jobs, "Worker threads")->capture_default_str();
  sub->add_flag("--pcm16", o->pcm16, "Write 16-bit PCM instead of 32-bit float");
  sub->callback([o, &global, &exit_code] { exit_code = RunAugment(*o, global); });
}

}  // namespace svkit::cli
