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

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "svkit/augment.hpp"
#include "svkit/convolve.hpp"
#include "svkit/error.hpp"
#include "test_util.hpp"

using namespace svkit;
using namespace svkit::augment;
using audio::AudioBuffer;
using svkit::testing::DirectConvolve;
using svkit::testing::DirectRms;

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

AudioBuffer Gaussian(std::mt19937_64& gen, std::size_t n, double sigma, int rate = 16000) {
  std::normal_distribution<double> dist(0.0, sigma);
  AudioBuffer b{std::vector<double>(n), rate};
  for (double& v : b.samples) v = dist(gen);
  return b;
}

corpus::UtteranceRecord Rec(const std::string& utt, const std::string& spk) {
  corpus::UtteranceRecord r;
  r.utterance_id = utt;
  r.speaker_id = spk;
  r.path = utt + ".wav";
  r.duration_s = 3.0;
  return r;
}

/// Pool of `speakers` x `per_speaker` records whose audio is a deterministic
/// function of the utterance id.
BabblePool MakePool(int speakers, int per_speaker) {
  BabblePool pool;
  for (int s = 0; s < speakers; ++s) {
    for (int u = 0; u < per_speaker; ++u) {
      pool.records.push_back(
          Rec("s" + std::to_string(s) + "_u" + std::to_string(u), "s" + std::to_string(s)));
    }
  }
  pool.loader = [](const corpus::UtteranceRecord& r) {
    std::mt19937_64 gen(std::hash<std::string>{}(r.utterance_id));
    return Gaussian(gen, 3000 + gen() % 4000, 0.05 + 0.01 * (gen() % 10));
  };
  return pool;
}

std::vector<NoiseSource> MakeNoises(std::mt19937_64& gen) {
  std::vector<NoiseSource> out;
  for (int i = 0; i < 3; ++i) {
    out.push_back({NoiseKind::kBackground, Gaussian(gen, 5000 + 1000 * i, 0.2),
                   "noise/n" + std::to_string(i) + ".wav"});
  }
  out.push_back({NoiseKind::kBabble, Gaussian(gen, 7000, 0.3), "babble/b0.wav"});
  for (int i = 0; i < 2; ++i) {
    auto rir = Gaussian(gen, 400, 1.0);
    for (std::size_t k = 0; k < rir.size(); ++k) rir.samples[k] *= std::exp(-0.01 * k);
    out.push_back({NoiseKind::kRir, rir, "rir/r" + std::to_string(i) + ".wav"});
  }
  return out;
}

double ComponentSnrDb(const std::vector<double>& signal, const std::vector<double>& noise) {
  return 20.0 * std::log10(DirectRms(signal) / DirectRms(noise));
}

}  // namespace

TEST_CASE("policy validation") {
  AugmentPolicy ok;
  CHECK_NOTHROW(ok.Validate());
  auto bad = [](auto mutate) {
    AugmentPolicy p;
    mutate(p);
    return CodeOf([&] { p.Validate(); });
  };
  CHECK(bad([](AugmentPolicy& p) { p.snr_db_min = 20; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](AugmentPolicy& p) { p.babble_speakers_min = 0; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](AugmentPolicy& p) { p.babble_speakers_max = 11; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](AugmentPolicy& p) { p.p_reverb = 1.5; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](AugmentPolicy& p) { p.p_noise = -0.1; }) == ErrorCode::kInvalidArgument);
  CHECK(bad([](AugmentPolicy& p) { p.p_noise = 0.6; }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("default policy matches the classroom recipe") {
  AugmentPolicy p;
  CHECK(p.snr_db_min == 5.0);
  CHECK(p.snr_db_max == 15.0);
  CHECK(p.babble_speakers_min == 12);
  CHECK(p.babble_speakers_max == 25);
}

TEST_CASE("babble needs enough distinct speakers") {
  Rng rng(1);
  BabblePool one = MakePool(1, 30);
  CHECK(CodeOf([&] { SynthBabble(one.records, 12, 1000, rng, one.loader); }) ==
        ErrorCode::kInsufficientSpeakers);
  CHECK(CodeOf([&] { SynthBabble({}, 12, 1000, rng, one.loader); }) == ErrorCode::kEmptyPool);
  BabblePool many = MakePool(12, 1);
  CHECK(CodeOf([&] { SynthBabble(many.records, 12, 0, rng, many.loader); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("12 identical constant tracks give a unit-RMS babble") {
  std::vector<corpus::UtteranceRecord> pool;
  for (int s = 0; s < 12; ++s) pool.push_back(Rec("u" + std::to_string(s), "s" + std::to_string(s)));
  AudioLoader constant = [](const corpus::UtteranceRecord&) {
    return AudioBuffer{std::vector<double>(700, 0.1), 16000};
  };
  for (bool balance : {true, false}) {
    Rng rng(5);
    const auto track = SynthBabble(pool, 12, 1000, rng, constant, balance);
    REQUIRE(track.buffer.size() == 1000);
    CHECK(std::abs(DirectRms(track.buffer.samples) - 1.0) < 1e-9);
    for (double v : track.buffer.samples) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("babble picks distinct speakers and has unit RMS") {
  const BabblePool pool = MakePool(30, 3);
  std::map<std::string, std::string> speaker_of;
  for (const auto& r : pool.records) speaker_of[r.utterance_id] = r.speaker_id;
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = static_cast<int>(rng.UniformInt(12, 25));
    const std::size_t len = 500 + rng.Below(9000);
    const auto track = SynthBabble(pool.records, n, len, rng, pool.loader, trial % 2 == 0);
    CHECK(track.buffer.size() == len);
    CHECK(std::abs(DirectRms(track.buffer.samples) - 1.0) < 1e-9);
    REQUIRE(track.speaker_ids.size() == static_cast<std::size_t>(n));
    REQUIRE(track.utterance_ids.size() == static_cast<std::size_t>(n));
    CHECK(std::set<std::string>(track.speaker_ids.begin(), track.speaker_ids.end()).size() ==
          static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < track.speaker_ids.size(); ++i) {
      CHECK(speaker_of.at(track.utterance_ids[i]) == track.speaker_ids[i]);
    }
  }
}

TEST_CASE("babble is the normalized sum of the chosen, length-fitted tracks") {
  const BabblePool pool = MakePool(15, 2);
  Rng rng(3);
  const std::size_t len = 8000;
  const auto track = SynthBabble(pool.records, 13, len, rng, pool.loader, false);
  std::map<std::string, corpus::UtteranceRecord> by_id;
  for (const auto& r : pool.records) by_id[r.utterance_id] = r;
  std::vector<double> sum(len, 0.0);
  for (const auto& id : track.utterance_ids) {
    const auto audio = pool.loader(by_id.at(id)).samples;
    for (std::size_t i = 0; i < len; ++i) sum[i] += audio[i % audio.size()];
  }
  const double rms = DirectRms(sum);
  for (std::size_t i = 0; i < len; ++i) {
    CHECK(track.buffer.samples[i] == doctest::Approx(sum[i] / rms).epsilon(1e-9));
  }
}

TEST_CASE("noise gain examples") {
  CHECK(NoiseGain(0.1, 0.1, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(NoiseGain(1.0, 1.0, 10.0) == doctest::Approx(0.316228).epsilon(1e-6));
  CHECK(std::abs(NoiseGain(1.0, 1.0, 10.0) - std::pow(10.0, -0.5)) < 1e-15);
}

TEST_CASE("mix at 10 dB with unit-power inputs") {
  std::mt19937_64 gen(2);
  const int n = 16000;
  auto s = svkit::testing::Sine(440.0, 16000, n, std::sqrt(2.0));
  auto noise = Gaussian(gen, n, 1.0);
  const double nr = DirectRms(noise.samples);
  for (double& v : noise.samples) v /= nr;
  const auto mix = MixAtSnrDetailed(AudioBuffer{s, 16000}, noise, 10.0);
  CHECK(mix.noise_gain == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-3));
  std::vector<double> sig_part(n), noise_part(n);
  for (int i = 0; i < n; ++i) {
    sig_part[i] = mix.output_scale * s[i];
    noise_part[i] = mix.buffer.samples[i] - sig_part[i];
  }
  CHECK(std::abs(ComponentSnrDb(sig_part, noise_part) - 10.0) < 0.01);
}

TEST_CASE("mix errors") {
  AudioBuffer sig{std::vector<double>(100, 0.5), 16000};
  AudioBuffer noise{std::vector<double>(100, 0.5), 16000};
  CHECK(CodeOf([&] { MixAtSnr(AudioBuffer{std::vector<double>(100, 0.0), 16000}, noise, 5); }) ==
        ErrorCode::kSilentSignal);
  CHECK(CodeOf([&] { MixAtSnr(sig, AudioBuffer{std::vector<double>(50, 0.0), 16000}, 5); }) ==
        ErrorCode::kSilentNoise);
  CHECK(CodeOf([&] { MixAtSnr(sig, AudioBuffer{std::vector<double>(50, 0.1), 8000}, 5); }) ==
        ErrorCode::kRateMismatch);
}

TEST_CASE("component SNR holds for random draws, with and without clip rescue") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> snr_dist(5.0, 15.0);
  int rescued = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 200 + gen() % 8000;
    // Loud signals every few draws so the clip rescue is exercised.
    const double level = trial % 3 == 0 ? 0.9 : 0.1;
    const auto s = Gaussian(gen, n, level);
    const auto noise = Gaussian(gen, 100 + gen() % 12000, 0.3);
    const double snr = snr_dist(gen);
    const auto mix = MixAtSnrDetailed(s, noise, snr);
    REQUIRE(mix.buffer.size() == n);

    double peak = 0.0;
    for (double v : mix.buffer.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 1.0);
    if (mix.output_scale < 1.0) {
      ++rescued;
      CHECK(peak == doctest::Approx(0.99).epsilon(1e-12));
    }

    // The noise component is whatever the output holds beyond the (scaled)
    // clean signal; it must be the looped noise up to a constant.
    std::vector<double> sig_part(n), noise_part(n);
    for (std::size_t i = 0; i < n; ++i) {
      sig_part[i] = mix.output_scale * s.samples[i];
      noise_part[i] = mix.buffer.samples[i] - sig_part[i];
    }
    CHECK(std::abs(ComponentSnrDb(sig_part, noise_part) - snr) < 0.01);
    const double ratio = noise_part[0] / noise.samples[0];
    for (std::size_t i = 0; i < n; i += 97) {
      CHECK(noise_part[i] == doctest::Approx(ratio * noise.samples[i % noise.size()]).epsilon(1e-9));
    }
  }
  CHECK(rescued > 0);
}

TEST_CASE("FFT convolution equals direct convolution") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> x(1 + gen() % 3000), h(1 + gen() % 600);
    for (double& v : x) v = dist(gen);
    for (double& v : h) v = dist(gen);
    // Small blocks force the overlap-add path through many segments.
    const std::size_t block = trial % 2 == 0 ? 16384 : 64 + gen() % 512;
    const auto y = dsp::FftConvolve(x, h, block);
    const auto ref = DirectConvolve(x, h);
    REQUIRE(y.size() == ref.size());
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      err = std::max(err, std::abs(y[i] - ref[i]));
      norm = std::max(norm, std::abs(ref[i]));
    }
    CHECK(err <= 1e-9 * norm);
  }
}

TEST_CASE("unit impulse RIR is the identity") {
  std::mt19937_64 gen(5);
  const auto x = Gaussian(gen, 3000, 0.2);
  const auto y = ApplyRir(x, AudioBuffer{{1.0}, 16000});
  REQUIRE(y.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y.samples[i] - x.samples[i]) < 1e-9);
}

TEST_CASE("delayed impulse shifts then renormalizes") {
  std::mt19937_64 gen(6);
  const auto x = Gaussian(gen, 2000, 0.2);
  for (std::size_t k : {1u, 17u, 300u}) {
    std::vector<double> h(k + 1, 0.0);
    h[k] = 0.5;
    const auto y = ApplyRir(x, AudioBuffer{h, 16000});
    REQUIRE(y.size() == x.size());
    std::vector<double> shifted(x.size(), 0.0);
    for (std::size_t i = k; i < x.size(); ++i) shifted[i] = x.samples[i - k];
    const double scale = DirectRms(x.samples) / DirectRms(shifted);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(y.samples[i] - scale * shifted[i]) < 1e-9);
    }
  }
}

TEST_CASE("RIR output equals the truncated direct convolution and keeps RMS") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = Gaussian(gen, 1 + gen() % 4096, 0.3);
    const auto h = Gaussian(gen, 1 + gen() % 512, 1.0);
    const auto y = ApplyRir(x, h);
    auto ref = DirectConvolve(x.samples, h.samples);
    ref.resize(x.size());
    const double scale = DirectRms(x.samples) / DirectRms(ref);
    double err = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      err = std::max(err, std::abs(y.samples[i] - scale * ref[i]));
      norm = std::max(norm, std::abs(scale * ref[i]));
    }
    CHECK(err <= 1e-6 * norm);
    CHECK(std::abs(DirectRms(y.samples) - DirectRms(x.samples)) < 1e-12);
  }
}

TEST_CASE("RIR errors") {
  AudioBuffer x{std::vector<double>(10, 0.1), 16000};
  CHECK(CodeOf([&] { ApplyRir(x, AudioBuffer{{}, 16000}); }) == ErrorCode::kEmptyRir);
  CHECK(CodeOf([&] { ApplyRir(x, AudioBuffer{{1.0}, 8000}); }) == ErrorCode::kRateMismatch);
}

TEST_CASE("all-zero policy is a no-op") {
  std::mt19937_64 gen(9);
  const auto x = Gaussian(gen, 48000, 0.1);
  AugmentPolicy p;
  p.p_noise = p.p_babble = p.p_reverb = 0.0;
  Rng rng(1);
  const auto r = AugmentUtterance(x, p, {}, rng);
  CHECK(r.buffer == x);
  CHECK(r.log.empty());
  CHECK_FALSE(r.log.snr_db.has_value());
}

TEST_CASE("augmentation is deterministic in the seed") {
  std::mt19937_64 gen(10);
  const auto x = Gaussian(gen, 16000, 0.1);
  const auto noises = MakeNoises(gen);
  const BabblePool pool = MakePool(30, 2);
  AugmentPolicy p;
  p.p_noise = 0.3;
  p.p_babble = 0.6;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const auto ra = AugmentUtterance(x, p, noises, a, &pool);
    const auto rb = AugmentUtterance(x, p, noises, b, &pool);
    CHECK(ra.buffer == rb.buffer);
    CHECK(ra.log == rb.log);
    CHECK(ra.log.ToJson().dump() == rb.log.ToJson().dump());
  }
}

TEST_CASE("changing the seed changes the log") {
  std::mt19937_64 gen(11);
  const auto x = Gaussian(gen, 4000, 0.1);
  const auto noises = MakeNoises(gen);
  const AugmentPolicy p;
  int changed = 0;
  const int pairs = 500;
  for (int i = 0; i < pairs; ++i) {
    Rng a(gen()), b(gen());
    changed += AugmentUtterance(x, p, noises, a).log != AugmentUtterance(x, p, noises, b).log;
  }
  CHECK(changed >= 0.99 * pairs);
}

TEST_CASE("full babble and reverb on a 3 s utterance") {
  std::mt19937_64 gen(12);
  const auto x = Gaussian(gen, 48000, 0.1);
  const auto noises = MakeNoises(gen);
  const BabblePool pool = MakePool(40, 2);
  AugmentPolicy p;
  p.p_noise = 0.0;
  p.p_babble = 1.0;
  p.p_reverb = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto r = AugmentUtterance(x, p, noises, rng, &pool);
    CHECK(r.buffer.size() == x.size());
    REQUIRE(r.log.rir_label.has_value());
    CHECK(r.log.rir_label->rfind("rir/", 0) == 0);
    CHECK(r.log.branch == NoiseBranch::kBabble);
    REQUIRE(r.log.snr_db.has_value());
    CHECK(*r.log.snr_db >= 5.0);
    CHECK(*r.log.snr_db <= 15.0);
    CHECK(r.log.babble_speakers.size() >= 12);
    CHECK(r.log.babble_speakers.size() <= 25);
    const auto j = r.log.ToJson();
    CHECK(j["branch"] == "babble");
    CHECK(j["babble_speakers"].size() == r.log.babble_speakers.size());
  }
}

TEST_CASE("policy draws span the configured ranges") {
  std::mt19937_64 gen(13);
  const auto x = Gaussian(gen, 2000, 0.1);
  const auto noises = MakeNoises(gen);
  const BabblePool pool = MakePool(30, 1);
  AugmentPolicy p;
  p.p_noise = 0.3;
  p.p_babble = 0.5;
  p.p_reverb = 0.4;
  const int n = 2000;
  std::map<NoiseBranch, int> branches;
  std::set<std::size_t> babble_sizes;
  int reverbed = 0;
  double snr_sum = 0.0;
  int snr_count = 0;
  double snr_lo = 100, snr_hi = -100;
  for (int i = 0; i < n; ++i) {
    Rng rng(UtteranceSeed(42, "utt", 0, static_cast<std::uint64_t>(i)));
    const auto r = AugmentUtterance(x, p, noises, rng, &pool);
    ++branches[r.log.branch];
    reverbed += r.log.rir_label.has_value();
    if (r.log.snr_db) {
      snr_sum += *r.log.snr_db;
      ++snr_count;
      snr_lo = std::min(snr_lo, *r.log.snr_db);
      snr_hi = std::max(snr_hi, *r.log.snr_db);
    }
    if (r.log.branch == NoiseBranch::kBabble) babble_sizes.insert(r.log.babble_speakers.size());
    if (r.log.branch == NoiseBranch::kBackground) {
      CHECK(r.log.noise_label.rfind("noise/", 0) == 0);
      CHECK(r.log.babble_speakers.empty());
    }
  }
  // Binomial 4-sigma bands.
  auto near = [&](int count, double prob) {
    return std::abs(count - n * prob) < 4.0 * std::sqrt(n * prob * (1 - prob));
  };
  CHECK(near(branches[NoiseBranch::kBackground], 0.3));
  CHECK(near(branches[NoiseBranch::kBabble], 0.5));
  CHECK(near(branches[NoiseBranch::kNone], 0.2));
  CHECK(near(reverbed, 0.4));
  CHECK(snr_lo >= 5.0);
  CHECK(snr_hi <= 15.0);
  CHECK(snr_lo < 5.1);
  CHECK(snr_hi > 14.9);
  CHECK(std::abs(snr_sum / snr_count - 10.0) < 0.3);
  CHECK(*babble_sizes.begin() == 12);
  CHECK(*babble_sizes.rbegin() == 25);
  CHECK(babble_sizes.size() == 14);
}

TEST_CASE("pre-recorded babble is used without a pool") {
  std::mt19937_64 gen(14);
  const auto x = Gaussian(gen, 2000, 0.1);
  const auto noises = MakeNoises(gen);
  AugmentPolicy p;
  p.p_noise = 0.0;
  p.p_babble = 1.0;
  p.p_reverb = 0.0;
  Rng rng(1);
  const auto r = AugmentUtterance(x, p, noises, rng);
  CHECK(r.log.branch == NoiseBranch::kBabble);
  CHECK(r.log.noise_label == "babble/b0.wav");
  CHECK(r.log.babble_speakers.empty());
}

TEST_CASE("missing noise kinds are reported up front") {
  const AudioBuffer x{std::vector<double>(1000, 0.1), 16000};
  Rng rng(1);
  AugmentPolicy p;
  p.p_noise = 1.0;
  p.p_babble = 0.0;
  p.p_reverb = 0.0;
  CHECK(CodeOf([&] { AugmentUtterance(x, p, {}, rng); }) == ErrorCode::kMissingNoiseKind);
  p.p_noise = 0.0;
  p.p_reverb = 0.1;
  CHECK(CodeOf([&] { AugmentUtterance(x, p, {}, rng); }) == ErrorCode::kMissingNoiseKind);
  p.p_reverb = 0.0;
  p.p_babble = 0.5;
  CHECK(CodeOf([&] { AugmentUtterance(x, p, {}, rng); }) == ErrorCode::kMissingNoiseKind);

  std::vector<NoiseSource> long_rir{{NoiseKind::kRir, {std::vector<double>(200, 0.1), 16000}, "r"}};
  AugmentPolicy q;
  q.p_noise = q.p_babble = 0.0;
  q.p_reverb = 1.0;
  q.max_rir_samples = 100;
  CHECK(CodeOf([&] { AugmentUtterance(x, q, long_rir, rng); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("utterance seeds differ by id, epoch and copy") {
  std::set<std::uint64_t> seeds;
  for (const char* id : {"a", "b", "spk1-utt1"}) {
    for (std::uint64_t epoch = 0; epoch < 5; ++epoch) {
      for (std::uint64_t copy = 0; copy < 3; ++copy) seeds.insert(UtteranceSeed(7, id, epoch, copy));
    }
  }
  CHECK(seeds.size() == 45);
  CHECK(UtteranceSeed(7, "a", 1, 0) == UtteranceSeed(7, "a", 1, 0));
  CHECK(UtteranceSeed(7, "a", 1, 0) != UtteranceSeed(8, "a", 1, 0));
}

TEST_CASE("noise directories are loaded by kind and resampled") {
  svkit::testing::TempDir dir;
  std::filesystem::create_directories(dir / "noise/hvac");
  std::filesystem::create_directories(dir / "babble");
  std::filesystem::create_directories(dir / "rir");
  audio::WriteWav({std::vector<double>(8000, 0.1), 8000}, dir / "noise/hvac/fan.wav");
  audio::WriteWav({std::vector<double>(16000, 0.1), 16000}, dir / "noise/chairs.WAV");
  audio::WriteWav({std::vector<double>(4800, 0.1), 48000}, dir / "babble/room.wav");
  audio::WriteWav({std::vector<double>(100, 0.1), 16000}, dir / "rir/small.wav");
  std::ofstream(dir / "noise/readme.txt") << "not audio";

  const auto sources = LoadNoiseSources(dir.path());
  REQUIRE(sources.size() == 4);
  std::map<std::string, const NoiseSource*> by_label;
  for (const auto& s : sources) {
    CHECK(s.buffer.sample_rate_hz == 16000);
    by_label[s.label] = &s;
  }
  REQUIRE(by_label.count("noise/hvac/fan.wav"));
  CHECK(by_label["noise/hvac/fan.wav"]->kind == NoiseKind::kBackground);
  CHECK(by_label["noise/hvac/fan.wav"]->buffer.size() == 16000);
  REQUIRE(by_label.count("noise/chairs.WAV"));
  CHECK(by_label["babble/room.wav"]->kind == NoiseKind::kBabble);
  CHECK(by_label["babble/room.wav"]->buffer.size() == 1600);
  CHECK(by_label["rir/small.wav"]->kind == NoiseKind::kRir);

  CHECK(CodeOf([&] { LoadNoiseSources(dir.path(), {}, 16000, 50); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] { LoadNoiseSources(dir / "missing"); }) == ErrorCode::kUnreadableSource);
}
