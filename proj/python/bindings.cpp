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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <vector>

#include "svkit/audio.hpp"
#include "svkit/augment.hpp"
#include "svkit/convolve.hpp"
#include "svkit/corpus.hpp"
#include "svkit/error.hpp"
#include "svkit/scoring.hpp"

namespace py = pybind11;
using namespace svkit;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<double> ToVector(const DoubleArray& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::kInvalidArgument, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> ToArray(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<corpus::TrialLabel> ToLabels(const py::array_t<int, py::array::forcecast>& labels) {
  std::vector<corpus::TrialLabel> out;
  out.reserve(labels.size());
  for (py::ssize_t i = 0; i < labels.size(); ++i) {
    out.push_back(labels.data()[i] ? corpus::TrialLabel::kTarget : corpus::TrialLabel::kNontarget);
  }
  return out;
}

audio::AudioBuffer Buffer(const DoubleArray& samples, int rate) { return {ToVector(samples), rate}; }

py::dict RecordDict(const corpus::UtteranceRecord& r) {
  py::dict d;
  d["utterance_id"] = r.utterance_id;
  d["speaker_id"] = r.speaker_id;
  d["path"] = r.path.string();
  d["duration_s"] = r.duration_s;
  d["split"] = std::string(corpus::SplitName(r.split));
  return d;
}

}  // namespace

PYBIND11_MODULE(_svkit, m) {
  m.doc() = "Native core of svkit";

  // Leaked on purpose: the type must outlive every translated exception.
  static py::handle error_type =
      py::exception<Error>(m, "SvkitError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object value = py::reinterpret_steal<py::object>(
          PyObject_CallFunction(error_type.ptr(), "s", e.what()));
      value.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(error_type.ptr(), value.ptr());
    }
  });

  m.def(
      "load_audio",
      [](const std::filesystem::path& path) {
        const auto buf = audio::LoadAudio(path);
        return py::make_tuple(ToArray(buf.samples), buf.sample_rate_hz);
      },
      py::arg("path"), "Mono float64 samples and sample rate of a WAV file.");
  m.def(
      "write_wav",
      [](const std::filesystem::path& path, const DoubleArray& samples, int rate, bool pcm16) {
        audio::WriteWav(Buffer(samples, rate), path,
                        pcm16 ? audio::SampleFormat::kPcm16 : audio::SampleFormat::kFloat32);
      },
      py::arg("path"), py::arg("samples"), py::arg("rate") = audio::kPipelineRateHz,
      py::arg("pcm16") = false);
  m.def(
      "resample",
      [](const DoubleArray& samples, int rate, int target) {
        return ToArray(audio::Resample(Buffer(samples, rate), target).samples);
      },
      py::arg("samples"), py::arg("rate"), py::arg("target_rate") = audio::kPipelineRateHz);
  m.def(
      "rms", [](const DoubleArray& samples) { return audio::RmsPower(Buffer(samples, 16000)); },
      py::arg("samples"));

  m.def(
      "mix_at_snr",
      [](const DoubleArray& signal, const DoubleArray& noise, double snr_db, int rate) {
        const auto r = augment::MixAtSnrDetailed(Buffer(signal, rate), Buffer(noise, rate), snr_db);
        return py::make_tuple(ToArray(r.buffer.samples), r.noise_gain, r.output_scale);
      },
      py::arg("signal"), py::arg("noise"), py::arg("snr_db"), py::arg("rate") = audio::kPipelineRateHz,
      "Returns (mix, noise_gain, output_scale).");
  m.def(
      "apply_rir",
      [](const DoubleArray& signal, const DoubleArray& rir, int rate) {
        return ToArray(augment::ApplyRir(Buffer(signal, rate), Buffer(rir, rate)).samples);
      },
      py::arg("signal"), py::arg("rir"), py::arg("rate") = audio::kPipelineRateHz);
  m.def(
      "fft_convolve",
      [](const DoubleArray& signal, const DoubleArray& kernel) {
        return ToArray(dsp::FftConvolve(ToVector(signal), ToVector(kernel)));
      },
      py::arg("signal"), py::arg("kernel"));

  m.def(
      "cosine_score",
      [](const DoubleArray& a, const DoubleArray& b) {
        return scoring::CosineScore(std::span<const double>(ToVector(a)),
                                    std::span<const double>(ToVector(b)));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "compute_eer",
      [](const DoubleArray& scores, const py::array_t<int, py::array::forcecast>& labels) {
        const auto r = scoring::ComputeEer(ToVector(scores), ToLabels(labels));
        return py::make_tuple(r.eer, r.threshold);
      },
      py::arg("scores"), py::arg("labels"), "Returns (eer, threshold); labels are 1 for target.");
  m.def(
      "det_points",
      [](const DoubleArray& scores, const py::array_t<int, py::array::forcecast>& labels) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& p : scoring::DetPoints(ToVector(scores), ToLabels(labels))) {
          out.emplace_back(p.threshold, p.far, p.frr);
        }
        return out;
      },
      py::arg("scores"), py::arg("labels"));

  py::class_<scoring::EmbeddingArchive>(m, "Archive")
      .def(py::init<std::uint32_t, std::string>(), py::arg("dim"), py::arg("model_id"))
      .def_property_readonly("dim", &scoring::EmbeddingArchive::dim)
      .def_property_readonly("model_id", &scoring::EmbeddingArchive::model_id)
      .def_property_readonly("ids", &scoring::EmbeddingArchive::ids)
      .def("__len__", &scoring::EmbeddingArchive::size)
      .def(
          "add",
          [](scoring::EmbeddingArchive& a, std::string id, const FloatArray& v) {
            a.Add(std::move(id), std::span<const float>(v.data(), static_cast<std::size_t>(v.size())));
          },
          py::arg("utterance_id"), py::arg("vector"))
      .def(
          "__getitem__",
          [](const scoring::EmbeddingArchive& a, const std::string& id) {
            const auto row = a.At(id);
            py::array_t<float> out(static_cast<py::ssize_t>(row.size()));
            std::copy(row.begin(), row.end(), out.mutable_data());
            return out;
          })
      .def(
          "save",
          [](const scoring::EmbeddingArchive& a, const std::filesystem::path& path) {
            scoring::WriteArchive(a, path);
          },
          py::arg("path"))
      .def_static(
          "load",
          [](const std::filesystem::path& path) { return scoring::ReadArchive(path); },
          py::arg("path"));

  m.def(
      "read_manifest",
      [](const std::filesystem::path& path) {
        py::list out;
        for (const auto& r : corpus::ReadManifest(path).records) out.append(RecordDict(r));
        return out;
      },
      py::arg("path"));
  m.def(
      "split_manifest",
      [](const std::filesystem::path& in, const std::filesystem::path& out, double train, double val,
         double test, std::uint64_t seed, bool speaker_disjoint) {
        const auto split = corpus::StratifiedSplit(
            corpus::ReadManifest(in), {train, val, test}, seed,
            speaker_disjoint ? corpus::SplitMode::kSpeakerDisjoint : corpus::SplitMode::kPerSpeaker);
        corpus::WriteManifest(split, out);
      },
      py::arg("manifest"), py::arg("out"), py::arg("train") = 0.70, py::arg("val") = 0.15,
      py::arg("test") = 0.15, py::arg("seed") = 0, py::arg("speaker_disjoint") = false);
}
