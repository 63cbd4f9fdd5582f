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

#include "svkit/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "svkit/convolve.hpp"
#include "svkit/error.hpp"

namespace svkit::augment {

namespace fs = std::filesystem;

void AugmentPolicy::Validate() const {
  auto bad = [](const std::string& what) {
    return Error(ErrorCode::kInvalidArgument, "augment policy: " + what);
  };
  if (!(snr_db_min <= snr_db_max)) throw bad("snr_db_min must not exceed snr_db_max");
  if (babble_speakers_min < 1 || babble_speakers_min > babble_speakers_max) {
    throw bad("need 1 <= babble_speakers_min <= babble_speakers_max");
  }
  for (double p : {p_noise, p_babble, p_reverb}) {
    if (!(p >= 0.0 && p <= 1.0)) throw bad("probabilities must lie in [0, 1]");
  }
  if (p_noise + p_babble > 1.0 + 1e-12) {
    throw bad("p_noise + p_babble must not exceed 1 (the branches are exclusive)");
  }
}

std::string_view NoiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kBackground: return "background";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kRir: return "rir";
  }
  return "background";
}

std::string_view NoiseBranchName(NoiseBranch branch) {
  switch (branch) {
    case NoiseBranch::kNone: return "none";
    case NoiseBranch::kBackground: return "background";
    case NoiseBranch::kBabble: return "babble";
  }
  return "none";
}

BabbleTrack SynthBabble(const std::vector<corpus::UtteranceRecord>& pool,
                        int n_speakers, std::size_t target_len, Rng& rng,
                        const AudioLoader& loader, bool balance) {
  if (pool.empty()) throw Error(ErrorCode::kEmptyPool, "babble pool is empty");
  if (target_len == 0 || n_speakers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "babble needs target_len > 0 and n_speakers >= 1");
  }
  std::map<std::string, std::vector<const corpus::UtteranceRecord*>> by_speaker;
  for (const auto& r : pool) by_speaker[r.speaker_id].push_back(&r);
  if (by_speaker.size() < static_cast<std::size_t>(n_speakers)) {
    throw Error(ErrorCode::kInsufficientSpeakers,
                "babble of " + std::to_string(n_speakers) + " speakers from a pool of " +
                    std::to_string(by_speaker.size()));
  }
  std::vector<const std::vector<const corpus::UtteranceRecord*>*> speakers;
  for (const auto& [id, recs] : by_speaker) speakers.push_back(&recs);

  BabbleTrack out;
  out.buffer.samples.assign(target_len, 0.0);
  std::optional<int> rate;
  for (int k = 0; k < n_speakers; ++k) {
    // Partial Fisher-Yates: slot k receives a uniformly drawn unused speaker.
    const auto pick = k + static_cast<std::size_t>(rng.Below(speakers.size() - k));
    std::swap(speakers[k], speakers[pick]);
    const auto& recs = *speakers[k];
    const auto* rec = recs[static_cast<std::size_t>(rng.Below(recs.size()))];
    AudioBuffer track = loader(*rec);
    if (track.empty()) throw Error(ErrorCode::kEmptyBuffer, "babble track " + rec->utterance_id);
    if (rate && *rate != track.sample_rate_hz) {
      throw Error(ErrorCode::kRateMismatch, "babble track " + rec->utterance_id);
    }
    rate = track.sample_rate_hz;
    const auto fitted = audio::FitLength(track.samples, target_len);
    double gain = 1.0;
    if (balance) {
      const double rms = audio::RmsPower(fitted);
      gain = rms > 0.0 ? 1.0 / rms : 0.0;
    }
    for (std::size_t i = 0; i < target_len; ++i) out.buffer.samples[i] += gain * fitted[i];
    out.speaker_ids.push_back(rec->speaker_id);
    out.utterance_ids.push_back(rec->utterance_id);
  }
  out.buffer.sample_rate_hz = *rate;
  const double rms = audio::RmsPower(out.buffer);
  if (rms <= 0.0) throw Error(ErrorCode::kSilentNoise, "babble sum is silent");
  for (double& s : out.buffer.samples) s /= rms;
  return out;
}

double NoiseGain(double signal_rms, double noise_rms, double snr_db) {
  return signal_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
}

MixResult MixAtSnrDetailed(const AudioBuffer& signal, const AudioBuffer& noise,
                           double snr_db) {
  if (signal.sample_rate_hz != noise.sample_rate_hz) {
    throw Error(ErrorCode::kRateMismatch,
                std::to_string(signal.sample_rate_hz) + " Hz signal vs " +
                    std::to_string(noise.sample_rate_hz) + " Hz noise");
  }
  if (signal.empty()) throw Error(ErrorCode::kSilentSignal, "empty signal");
  if (noise.empty()) throw Error(ErrorCode::kSilentNoise, "empty noise");
  const double signal_rms = audio::RmsPower(signal);
  if (signal_rms <= 0.0) throw Error(ErrorCode::kSilentSignal, "signal RMS is zero");
  const auto fitted = audio::FitLength(noise.samples, signal.size());
  const double noise_rms = audio::RmsPower(fitted);
  if (noise_rms <= 0.0) throw Error(ErrorCode::kSilentNoise, "noise RMS is zero");

  MixResult out;
  out.noise_gain = NoiseGain(signal_rms, noise_rms, snr_db);
  out.buffer.sample_rate_hz = signal.sample_rate_hz;
  out.buffer.samples.resize(signal.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double v = signal.samples[i] + out.noise_gain * fitted[i];
    out.buffer.samples[i] = v;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 1.0) {
    out.output_scale = 0.99 / peak;
    for (double& s : out.buffer.samples) s *= out.output_scale;
  }
  return out;
}

AudioBuffer MixAtSnr(const AudioBuffer& signal, const AudioBuffer& noise,
                     double snr_db) {
  return MixAtSnrDetailed(signal, noise, snr_db).buffer;
}

AudioBuffer ApplyRir(const AudioBuffer& signal, const AudioBuffer& rir) {
  if (signal.sample_rate_hz != rir.sample_rate_hz) {
    throw Error(ErrorCode::kRateMismatch,
                std::to_string(signal.sample_rate_hz) + " Hz signal vs " +
                    std::to_string(rir.sample_rate_hz) + " Hz RIR");
  }
  if (rir.empty()) throw Error(ErrorCode::kEmptyRir, "room impulse response is empty");
  if (signal.empty()) return signal;

  auto wet = dsp::FftConvolve(signal.samples, rir.samples);
  wet.resize(signal.size());
  AudioBuffer out{std::move(wet), signal.sample_rate_hz};
  const double in_rms = audio::RmsPower(signal);
  const double out_rms = audio::RmsPower(out);
  if (in_rms > 0.0 && out_rms > 0.0) {
    const double scale = in_rms / out_rms;
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

nlohmann::ordered_json AugmentationLog::ToJson() const {
  nlohmann::ordered_json j;
  j["utterance_id"] = utterance_id;
  j["seed"] = seed;
  j["rir"] = rir_label ? nlohmann::ordered_json(*rir_label) : nlohmann::ordered_json();
  j["branch"] = NoiseBranchName(branch);
  j["snr_db"] = snr_db ? nlohmann::ordered_json(*snr_db) : nlohmann::ordered_json();
  j["noise"] = noise_label.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(noise_label);
  j["babble_speakers"] = babble_speakers;
  j["babble_utterances"] = babble_utterances;
  return j;
}

namespace {

std::vector<const NoiseSource*> OfKind(const std::vector<NoiseSource>& noises,
                                       NoiseKind kind) {
  std::vector<const NoiseSource*> out;
  for (const auto& n : noises) {
    if (n.kind == kind) out.push_back(&n);
  }
  return out;
}

}  // namespace

AugmentResult AugmentUtterance(const AudioBuffer& buf,
                               const AugmentPolicy& policy,
                               const std::vector<NoiseSource>& noises, Rng& rng,
                               const BabblePool* babble) {
  policy.Validate();
  const auto rirs = OfKind(noises, NoiseKind::kRir);
  const auto backgrounds = OfKind(noises, NoiseKind::kBackground);
  const auto babbles = OfKind(noises, NoiseKind::kBabble);
  const bool pool_babble = babble != nullptr && !babble->records.empty();
  if (policy.p_reverb > 0.0 && rirs.empty()) {
    throw Error(ErrorCode::kMissingNoiseKind, "p_reverb > 0 but no RIRs were supplied");
  }
  if (policy.p_noise > 0.0 && backgrounds.empty()) {
    throw Error(ErrorCode::kMissingNoiseKind,
                "p_noise > 0 but no background noises were supplied");
  }
  if (policy.p_babble > 0.0 && !pool_babble && babbles.empty()) {
    throw Error(ErrorCode::kMissingNoiseKind,
                "p_babble > 0 but neither a babble pool nor babble recordings were supplied");
  }
  for (const auto* r : rirs) {
    if (r->buffer.size() > policy.max_rir_samples) {
      throw Error(ErrorCode::kInvalidArgument, "RIR '" + r->label + "' exceeds " +
                                                   std::to_string(policy.max_rir_samples) +
                                                   " samples");
    }
  }

  AugmentResult result;
  result.buffer = buf;

  // Both gates are drawn every time so the stream layout does not depend on
  // the outcome.
  const double reverb_draw = rng.Uniform();
  const double noise_draw = rng.Uniform();

  if (reverb_draw < policy.p_reverb) {
    const auto* rir = rirs[static_cast<std::size_t>(rng.Below(rirs.size()))];
    result.buffer = ApplyRir(result.buffer, rir->buffer);
    result.log.rir_label = rir->label;
  }

  NoiseBranch branch = NoiseBranch::kNone;
  if (noise_draw < policy.p_noise) {
    branch = NoiseBranch::kBackground;
  } else if (noise_draw < policy.p_noise + policy.p_babble) {
    branch = NoiseBranch::kBabble;
  }
  if (branch == NoiseBranch::kNone) return result;

  const double snr_db = rng.Uniform(policy.snr_db_min, policy.snr_db_max);
  AudioBuffer noise;
  if (branch == NoiseBranch::kBackground) {
    const auto* src = backgrounds[static_cast<std::size_t>(rng.Below(backgrounds.size()))];
    noise = src->buffer;
    result.log.noise_label = src->label;
  } else if (pool_babble) {
    const int n_speakers = static_cast<int>(
        rng.UniformInt(policy.babble_speakers_min, policy.babble_speakers_max));
    auto track = SynthBabble(babble->records, n_speakers, result.buffer.size(), rng,
                             babble->loader, policy.babble_balance);
    noise = std::move(track.buffer);
    result.log.noise_label = "synth-babble";
    result.log.babble_speakers = std::move(track.speaker_ids);
    result.log.babble_utterances = std::move(track.utterance_ids);
  } else {
    const auto* src = babbles[static_cast<std::size_t>(rng.Below(babbles.size()))];
    noise = src->buffer;
    result.log.noise_label = src->label;
  }
  result.buffer = MixAtSnr(result.buffer, noise, snr_db);
  result.log.branch = branch;
  result.log.snr_db = snr_db;
  return result;
}

std::uint64_t UtteranceSeed(std::uint64_t master, std::string_view utterance_id,
                            std::uint64_t epoch, std::uint64_t copy) {
  return DeriveSeed(master, HashString(utterance_id), (epoch << 32) ^ copy);
}

std::vector<NoiseSource> LoadNoiseSources(const fs::path& root,
                                          const NoiseDirLayout& layout,
                                          int target_hz,
                                          std::size_t max_rir_samples) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::kUnreadableSource, root.string());
  std::vector<NoiseSource> out;
  const std::pair<std::string, NoiseKind> kinds[] = {
      {layout.background_subdir, NoiseKind::kBackground},
      {layout.babble_subdir, NoiseKind::kBabble},
      {layout.rir_subdir, NoiseKind::kRir},
  };
  for (const auto& [subdir, kind] : kinds) {
    const fs::path dir = root / subdir;
    if (subdir.empty() || !fs::is_directory(dir, ec)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (entry.is_regular_file() && ext == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      NoiseSource src;
      src.kind = kind;
      src.buffer = audio::Resample(audio::LoadAudio(file), target_hz);
      src.label = fs::relative(file, root).generic_string();
      if (src.buffer.empty()) {
        throw Error(ErrorCode::kEmptyBuffer, "noise file " + file.string() + " is empty");
      }
      if (kind == NoiseKind::kRir && src.buffer.size() > max_rir_samples) {
        throw Error(ErrorCode::kInvalidArgument,
                    "RIR " + file.string() + " is longer than the configured maximum");
      }
      out.push_back(std::move(src));
    }
  }
  return out;
}

}  // namespace svkit::augment
