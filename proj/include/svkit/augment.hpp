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

#ifndef SVKIT_AUGMENT_HPP_
#define SVKIT_AUGMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "svkit/audio.hpp"
#include "svkit/corpus.hpp"
#include "svkit/random.hpp"

namespace svkit::augment {

using audio::AudioBuffer;

/// Classroom corruption policy. Reverb is drawn independently; background
/// noise and babble are mutually exclusive, so p_noise + p_babble <= 1.
struct AugmentPolicy {
  double snr_db_min = 5.0;
  double snr_db_max = 15.0;
  int babble_speakers_min = 12;
  int babble_speakers_max = 25;
  double p_noise = 0.5;
  double p_babble = 0.5;
  double p_reverb = 0.5;
  /// Each babble track is scaled to unit RMS before summation.
  bool babble_balance = true;
  std::size_t max_rir_samples = 4 * audio::kPipelineRateHz;
  std::uint64_t seed = 0;

  void Validate() const;
};

enum class NoiseKind { kBackground, kBabble, kRir };

std::string_view NoiseKindName(NoiseKind kind);

struct NoiseSource {
  NoiseKind kind = NoiseKind::kBackground;
  AudioBuffer buffer;
  std::string label;
};

using AudioLoader = std::function<AudioBuffer(const corpus::UtteranceRecord&)>;

/// Utterances babble is synthesized from, with the loader used to fetch
/// their audio.
struct BabblePool {
  std::vector<corpus::UtteranceRecord> records;
  AudioLoader loader;
};

struct BabbleTrack {
  AudioBuffer buffer;
  std::vector<std::string> speaker_ids;
  std::vector<std::string> utterance_ids;
};

/// Picks `n_speakers` distinct speakers from `pool`, one utterance each,
/// fits every track to `target_len`, sums them and scales the sum to unit
/// RMS.
BabbleTrack SynthBabble(const std::vector<corpus::UtteranceRecord>& pool,
                        int n_speakers, std::size_t target_len, Rng& rng,
                        const AudioLoader& loader, bool balance = true);

/// SNR gain: rms(signal) / (rms(noise) * 10^(snr_db / 20)).
double NoiseGain(double signal_rms, double noise_rms, double snr_db);

struct MixResult {
  AudioBuffer buffer;
  /// Gain applied to the length-fitted noise before summation.
  double noise_gain = 1.0;
  /// Whole-mix scale; below 1 only when the clipping rescue fired.
  double output_scale = 1.0;
};

/// signal + gain * noise at the requested component SNR. Noise is looped or
/// truncated to the signal length first. A mix peaking above 1.0 is scaled
/// as a whole to peak 0.99.
MixResult MixAtSnrDetailed(const AudioBuffer& signal, const AudioBuffer& noise,
                           double snr_db);
AudioBuffer MixAtSnr(const AudioBuffer& signal, const AudioBuffer& noise,
                     double snr_db);

/// Reverberates `signal` with `rir`: full convolution, truncated to the input
/// length, rescaled to the input RMS.
AudioBuffer ApplyRir(const AudioBuffer& signal, const AudioBuffer& rir);

enum class NoiseBranch { kNone, kBackground, kBabble };

std::string_view NoiseBranchName(NoiseBranch branch);

struct AugmentationLog {
  std::string utterance_id;
  std::uint64_t seed = 0;
  std::optional<std::string> rir_label;
  NoiseBranch branch = NoiseBranch::kNone;
  std::optional<double> snr_db;
  std::string noise_label;
  std::vector<std::string> babble_speakers;
  std::vector<std::string> babble_utterances;

  /// True when no corruption was drawn.
  bool empty() const { return !rir_label && branch == NoiseBranch::kNone; }
  nlohmann::ordered_json ToJson() const;
  bool operator==(const AugmentationLog&) const = default;
};

struct AugmentResult {
  AudioBuffer buffer;
  AugmentationLog log;
};

/// Optional reverb, then at most one additive branch. `babble` may be null
/// when babble comes from pre-recorded kBabble sources instead.
AugmentResult AugmentUtterance(const AudioBuffer& buf,
                               const AugmentPolicy& policy,
                               const std::vector<NoiseSource>& noises, Rng& rng,
                               const BabblePool* babble = nullptr);

/// Seed for one (utterance, epoch, copy) so every epoch and every copy sees
/// a fresh corruption, independent of processing order.
std::uint64_t UtteranceSeed(std::uint64_t master, std::string_view utterance_id,
                            std::uint64_t epoch, std::uint64_t copy);

struct NoiseDirLayout {
  std::string background_subdir = "noise";
  std::string babble_subdir = "babble";
  std::string rir_subdir = "rir";
};

/// Loads every WAV under the configured subdirectories of `root`, resampled
/// to `target_hz`. Labels are paths relative to `root`.
std::vector<NoiseSource> LoadNoiseSources(const std::filesystem::path& root,
                                          const NoiseDirLayout& layout = {},
                                          int target_hz = audio::kPipelineRateHz,
                                          std::size_t max_rir_samples =
                                              4 * audio::kPipelineRateHz);

}  // namespace svkit::augment

#endif  // SVKIT_AUGMENT_HPP_
