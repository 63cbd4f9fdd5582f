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

#ifndef SVKIT_CONVOLVE_HPP_
#define SVKIT_CONVOLVE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace svkit::dsp {

/// Full linear convolution (length n + m - 1) computed with FFTs. Signals
/// longer than `block` samples are processed by overlap-add.
std::vector<double> FftConvolve(std::span<const double> signal,
                                std::span<const double> kernel,
                                std::size_t block = 16384);

}  // namespace svkit::dsp

#endif  // SVKIT_CONVOLVE_HPP_
