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

#include "svkit/convolve.hpp"

#include <algorithm>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace svkit::dsp {

namespace {

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> FftConvolve(std::span<const double> signal,
                                std::span<const double> kernel,
                                std::size_t block) {
  if (signal.empty() || kernel.empty()) return {};
  const std::size_t n = signal.size();
  const std::size_t m = kernel.size();
  block = std::min(std::max<std::size_t>(block, 1), n);
  const std::size_t fft_size = NextPow2(block + m - 1);

  Eigen::FFT<double> fft;
  std::vector<double> padded(fft_size, 0.0);
  std::copy(kernel.begin(), kernel.end(), padded.begin());
  std::vector<std::complex<double>> kernel_spec;
  fft.fwd(kernel_spec, padded);

  std::vector<double> out(n + m - 1, 0.0);
  std::vector<std::complex<double>> spec;
  std::vector<double> piece;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    std::fill(padded.begin(), padded.end(), 0.0);
    std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(start), len,
                padded.begin());
    fft.fwd(spec, padded);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel_spec[k];
    fft.inv(piece, spec);
    const std::size_t valid = len + m - 1;
    for (std::size_t i = 0; i < valid; ++i) out[start + i] += piece[i];
  }
  return out;
}

}  // namespace svkit::dsp
