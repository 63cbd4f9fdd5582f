# Copyright 2026 The svkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Speaker-verification data and adaptation toolkit."""

from ._svkit import (
    SvkitError,
    Archive,
    apply_rir,
    compute_eer,
    cosine_score,
    det_points,
    fft_convolve,
    load_audio,
    mix_at_snr,
    read_manifest,
    resample,
    rms,
    split_manifest,
    write_wav,
)

__all__ = [
    "SvkitError",
    "Archive",
    "apply_rir",
    "compute_eer",
    "cosine_score",
    "det_points",
    "fft_convolve",
    "load_audio",
    "mix_at_snr",
    "read_manifest",
    "resample",
    "rms",
    "split_manifest",
    "write_wav",
]
