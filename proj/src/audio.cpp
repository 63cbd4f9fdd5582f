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

#include "svkit/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "svkit/error.hpp"

namespace svkit::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct ParsedWav {
  WavInfo info;
  std::size_t data_offset = 0;
};

std::vector<unsigned char> ReadBytes(const std::filesystem::path& path,
                                     std::size_t max_bytes) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kMissingFile, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<unsigned char> bytes;
  char chunk[1 << 16];
  while (bytes.size() < max_bytes && in) {
    in.read(chunk, sizeof(chunk));
    bytes.insert(bytes.end(), chunk, chunk + in.gcount());
  }
  return bytes;
}

// Walks the chunk list. When `need_data` is false the data chunk may be
// truncated (header probing reads a prefix of the file only).
ParsedWav ParseHeader(const std::vector<unsigned char>& bytes,
                      const std::filesystem::path& path, bool need_data) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::kUnsupportedFormat, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  ParsedWav out;
  bool have_fmt = false;
  std::uint16_t bits = 0;
  std::uint16_t tag = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw fail("short fmt chunk");
      tag = ReadU16(bytes.data() + body);
      out.info.channels = ReadU16(bytes.data() + body + 2);
      out.info.sample_rate_hz = static_cast<int>(ReadU32(bytes.data() + body + 4));
      bits = ReadU16(bytes.data() + body + 14);
      if (tag == kFormatExtensible) {
        if (size < 40) throw fail("short extensible fmt chunk");
        tag = ReadU16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      if (tag == kFormatPcm && bits == 16) {
        out.info.format = SampleFormat::kPcm16;
      } else if (tag == kFormatFloat && bits == 32) {
        out.info.format = SampleFormat::kFloat32;
      } else {
        throw fail("format tag " + std::to_string(tag) + " with " +
                   std::to_string(bits) + "-bit samples");
      }
      if (out.info.channels <= 0 || out.info.sample_rate_hz <= 0) {
        throw fail("bad channel count or sample rate");
      }
      const std::size_t frame_bytes =
          static_cast<std::size_t>(out.info.channels) * (bits / 8);
      std::size_t data_bytes = size;
      if (need_data && body + data_bytes > bytes.size()) {
        throw fail("data chunk runs past end of file");
      }
      out.info.frames = data_bytes / frame_bytes;
      out.data_offset = body;
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw fail("no data chunk");
}

}  // namespace

void AudioBuffer::Validate() const {
  if (sample_rate_hz <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  }
  for (double s : samples) {
    if (!std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
    }
  }
}

WavInfo ProbeWav(const std::filesystem::path& path) {
  // Headers with LIST/INFO chunks can be long; 64 KiB covers anything sane.
  const auto bytes = ReadBytes(path, 1 << 16);
  return ParseHeader(bytes, path, /*need_data=*/false).info;
}

std::vector<double> Downmix(const std::vector<double>& interleaved,
                            int channels) {
  if (channels == 1) return interleaved;
  const std::size_t frames = interleaved.size() / channels;
  std::vector<double> mono(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) acc += interleaved[f * channels + c];
    mono[f] = acc / channels;
  }
  return mono;
}

AudioBuffer LoadAudio(const std::filesystem::path& path) {
  const auto bytes = ReadBytes(path, static_cast<std::size_t>(-1));
  const ParsedWav parsed = ParseHeader(bytes, path, /*need_data=*/true);
  const WavInfo& info = parsed.info;
  const std::size_t count = info.frames * info.channels;
  std::vector<double> interleaved(count);
  const unsigned char* p = bytes.data() + parsed.data_offset;
  if (info.format == SampleFormat::kPcm16) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = static_cast<std::int16_t>(ReadU16(p + 2 * i));
      interleaved[i] = v / 32768.0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t bits = ReadU32(p + 4 * i);
      float v;
      std::memcpy(&v, &bits, sizeof(v));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    path.string() + ": non-finite float sample");
      }
      interleaved[i] = v;
    }
  }
  return AudioBuffer{Downmix(interleaved, info.channels), info.sample_rate_hz};
}

void WriteWav(const AudioBuffer& buf, const std::filesystem::path& path,
              SampleFormat format) {
  buf.Validate();
  const bool is_float = format == SampleFormat::kFloat32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint16_t block_align = bits / 8;
  const auto data_bytes =
      static_cast<std::uint32_t>(buf.samples.size() * block_align);

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  PutU32(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  PutU32(out, 16);
  PutU16(out, is_float ? kFormatFloat : kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(buf.sample_rate_hz));
  PutU32(out, static_cast<std::uint32_t>(buf.sample_rate_hz) * block_align);
  PutU16(out, block_align);
  PutU16(out, bits);
  out.append("data");
  PutU32(out, data_bytes);
  for (double s : buf.samples) {
    if (is_float) {
      const float f = static_cast<float>(s);
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof(u));
      PutU32(out, u);
    } else {
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      PutU16(out, static_cast<std::uint16_t>(v));
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

AudioBuffer Resample(const AudioBuffer& buf, int target_hz,
                     const ResamplerQuality& quality) {
  if (target_hz <= 0 || buf.sample_rate_hz <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "sample rates must be positive");
  }
  if (target_hz == buf.sample_rate_hz) return buf;

  const std::int64_t g = std::gcd(buf.sample_rate_hz, target_hz);
  const std::int64_t up = target_hz / g;            // L
  const std::int64_t down = buf.sample_rate_hz / g;  // M
  const auto n_in = static_cast<std::int64_t>(buf.samples.size());
  const std::int64_t n_out = (2 * n_in * up + down) / (2 * down);

  // Kernel in input-sample units: rho * sinc(rho * tau) under a Kaiser window
  // spanning half_width_zeros zero crossings each side.
  const double rho =
      quality.rolloff * std::min(1.0, static_cast<double>(up) / down);
  const double half_width = quality.half_width_zeros / rho;
  const auto taps_each_side = static_cast<std::int64_t>(std::ceil(half_width));
  const std::int64_t taps = 2 * taps_each_side;
  const double i0_beta = std::cyl_bessel_i(0.0, quality.kaiser_beta);

  auto kernel = [&](double tau) {
    const double r = tau / half_width;
    if (std::abs(r) >= 1.0) return 0.0;
    const double window =
        std::cyl_bessel_i(0.0, quality.kaiser_beta * std::sqrt(1.0 - r * r)) /
        i0_beta;
    const double x = rho * tau;
    const double sinc =
        x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    return rho * sinc * window;
  };

  // Output n sits at input position n*M/L = base + phase/L. Tap i reads
  // input base + 1 - taps_each_side + i at offset tau = phase/L + W - 1 - i.
  constexpr std::int64_t kMaxTablePhases = 4096;
  std::vector<double> table;
  if (up <= kMaxTablePhases) {
    table.resize(static_cast<std::size_t>(up * taps));
    for (std::int64_t p = 0; p < up; ++p) {
      for (std::int64_t i = 0; i < taps; ++i) {
        table[p * taps + i] = kernel(static_cast<double>(p) / up +
                                     static_cast<double>(taps_each_side - 1 - i));
      }
    }
  }

  AudioBuffer out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(static_cast<std::size_t>(n_out));
  std::vector<double> row(static_cast<std::size_t>(taps));
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t base = pos / up;
    const std::int64_t phase = pos % up;
    const double* coef;
    if (!table.empty()) {
      coef = table.data() + phase * taps;
    } else {
      for (std::int64_t i = 0; i < taps; ++i) {
        row[i] = kernel(static_cast<double>(phase) / up +
                        static_cast<double>(taps_each_side - 1 - i));
      }
      coef = row.data();
    }
    const std::int64_t first = base + 1 - taps_each_side;
    const std::int64_t lo = std::max<std::int64_t>(0, -first);
    const std::int64_t hi = std::min<std::int64_t>(taps, n_in - first);
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) acc += coef[i] * buf.samples[first + i];
    out.samples[n] = acc;
  }
  return out;
}

double RmsPower(const std::vector<double>& samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyBuffer, "rms of empty buffer");
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double RmsPower(const AudioBuffer& buf) { return RmsPower(buf.samples); }

std::vector<double> FitLength(const std::vector<double>& samples,
                              std::size_t length) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyBuffer, "cannot loop empty buffer");
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = samples[i % samples.size()];
  return out;
}

}  // namespace svkit::audio
