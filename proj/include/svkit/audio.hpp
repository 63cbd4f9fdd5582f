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

#ifndef SVKIT_AUDIO_HPP_
#define SVKIT_AUDIO_HPP_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace svkit::audio {

inline constexpr int kPipelineRateHz = 16000;

/// Mono audio. Samples are nominally in [-1, 1] and always finite.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate_hz = kPipelineRateHz;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  /// Throws InvalidArgument if the rate is not positive or a sample is not
  /// finite.
  void Validate() const;

  bool operator==(const AudioBuffer&) const = default;
};

enum class SampleFormat { kPcm16, kFloat32 };

struct WavInfo {
  int sample_rate_hz = 0;
  int channels = 0;
  SampleFormat format = SampleFormat::kFloat32;
  std::size_t frames = 0;

  double duration_s() const {
    return static_cast<double>(frames) / sample_rate_hz;
  }
};

/// Reads only the RIFF header.
WavInfo ProbeWav(const std::filesystem::path& path);

/// Loads a 16-bit PCM or 32-bit float WAV file. Channels are averaged
/// sample-wise; integer PCM is divided by 32768.
AudioBuffer LoadAudio(const std::filesystem::path& path);

/// Writes a mono WAV at the buffer's rate. Float output is the default so
/// augmentation chains never quantize; PCM16 output is clamped to range.
void WriteWav(const AudioBuffer& buf, const std::filesystem::path& path,
              SampleFormat format = SampleFormat::kFloat32);

/// Averages interleaved frames into one channel.
std::vector<double> Downmix(const std::vector<double>& interleaved,
                            int channels);

struct ResamplerQuality {
  /// Zero crossings of the sinc kernel on each side of the centre tap.
  int half_width_zeros = 32;
  double kaiser_beta = 8.6;
  /// Cutoff as a fraction of the narrower Nyquist band.
  double rolloff = 0.945;
};

/// Windowed-sinc polyphase resampler. Equal rates return an exact copy.
/// The output length is round(n * target / source).
AudioBuffer Resample(const AudioBuffer& buf, int target_hz,
                     const ResamplerQuality& quality = {});

/// sqrt(mean(x^2)). Throws EmptyBuffer on an empty buffer.
double RmsPower(const AudioBuffer& buf);
double RmsPower(const std::vector<double>& samples);

/// Returns `samples` looped or truncated to exactly `length` samples.
std::vector<double> FitLength(const std::vector<double>& samples,
                              std::size_t length);

}  // namespace svkit::audio

#endif  // SVKIT_AUDIO_HPP_
