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

#include "svkit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <unordered_map>

#include "svkit/error.hpp"

namespace svkit::train {

AdapterModel AdapterModel::Identity(Eigen::Index d_in, Eigen::Index d_out) {
  if (d_in <= 0 || d_out <= 0 || d_out > d_in) {
    throw Error(ErrorCode::kInvalidArgument, "adapter needs 0 < d_out <= d_in");
  }
  AdapterModel m;
  m.weight = Matrix::Identity(d_out, d_in);
  m.bias = Vector::Zero(d_out);
  return m;
}

void AdapterModel::Validate() const {
  if (d_out() <= 0 || d_out() > d_in()) {
    throw Error(ErrorCode::kInvalidArgument, "adapter needs 0 < d_out <= d_in");
  }
  if (bias.size() != d_out()) throw Error(ErrorCode::kInvalidArgument, "bias length != d_out");
  if (!weight.allFinite() || !bias.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "adapter has non-finite parameters");
  }
}

Matrix AdapterModel::EmbedRows(const Matrix& inputs) const {
  if (inputs.cols() != d_in()) {
    throw Error(ErrorCode::kDimMismatch, "inputs have " + std::to_string(inputs.cols()) +
                                             " columns, adapter expects " +
                                             std::to_string(d_in()));
  }
  Matrix z = (inputs * weight.transpose()).rowwise() + bias.transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double norm = z.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::kNonFiniteLoss, "adapter output row " + std::to_string(i) +
                                                 " has zero or non-finite norm");
    }
    z.row(i) /= norm;
  }
  return z;
}

Vector AdapterModel::Embed(std::span<const float> input) const {
  Matrix row(1, static_cast<Eigen::Index>(input.size()));
  for (std::size_t k = 0; k < input.size(); ++k) row(0, static_cast<Eigen::Index>(k)) = input[k];
  return EmbedRows(row).row(0).transpose();
}

double TripletLoss(const Vector& anchor, const Vector& positive, const Vector& negative,
                   double margin) {
  return std::max(0.0, (anchor - positive).norm() - (anchor - negative).norm() + margin);
}

std::vector<Triplet> MineHardBatch(const Matrix& embeddings, std::span<const int> labels,
                                   double margin, const MiningOptions& options) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  if (labels.size() != n) throw Error(ErrorCode::kDimMismatch, "one label per row required");
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  if (counts.size() < 2) {
    throw Error(ErrorCode::kDegenerateBatch, "batch needs at least two speakers");
  }
  for (const auto& [label, count] : counts) {
    if (count < 2) {
      throw Error(ErrorCode::kDegenerateBatch,
                  "speaker label " + std::to_string(label) + " has a single utterance");
    }
  }

  // Pairwise Euclidean distances from the Gram matrix of unit rows.
  const Matrix gram = embeddings * embeddings.transpose();
  auto dist = [&](std::size_t i, std::size_t j) {
    const double sq = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
    return std::sqrt(std::max(0.0, sq));
  };

  std::vector<Triplet> out;
  out.reserve(n);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t pos = n;
    double d_pos = -1.0;
    std::size_t neg = n;
    double d_neg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      const double d = dist(a, j);
      if (labels[j] == labels[a]) {
        if (d > d_pos) {
          d_pos = d;
          pos = j;
        }
      } else if (neg == n || d < d_neg) {
        d_neg = d;
        neg = j;
      }
    }
    if (options.mode == MiningMode::kSemiHard) {
      std::size_t semi = n;
      double d_semi = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] == labels[a]) continue;
        const double d = dist(a, j);
        if (d > d_pos && d < d_pos + margin && (semi == n || d < d_semi)) {
          d_semi = d;
          semi = j;
        }
      }
      if (semi != n) {
        neg = semi;
        d_neg = d_semi;
      }
    }
    if (!options.keep_zero_loss && d_pos - d_neg + margin <= 0.0) continue;
    out.push_back({a, pos, neg});
  }
  return out;
}

ForwardBackwardResult ForwardBackward(const AdapterModel& model, const Batch& batch,
                                      double margin, const MiningOptions& options) {
  const Matrix& x = batch.inputs;
  if (x.cols() != model.d_in()) {
    throw Error(ErrorCode::kDimMismatch, "batch dim " + std::to_string(x.cols()) +
                                             " vs adapter d_in " +
                                             std::to_string(model.d_in()));
  }
  const Matrix z = (x * model.weight.transpose()).rowwise() + model.bias.transpose();
  const Vector norms = z.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0) || !std::isfinite(norms(i))) {
      throw Error(ErrorCode::kNonFiniteLoss, "adapter output with zero or non-finite norm");
    }
  }
  const Matrix u = z.array().colwise() / norms.array();

  ForwardBackwardResult result;
  result.triplets = MineHardBatch(u, batch.labels, margin, options);
  result.grads.weight = Matrix::Zero(model.d_out(), model.d_in());
  result.grads.bias = Vector::Zero(model.d_out());
  if (result.triplets.empty()) return result;

  const double scale = 1.0 / static_cast<double>(result.triplets.size());
  Matrix grad_u = Matrix::Zero(u.rows(), u.cols());
  double total = 0.0;
  for (const auto& t : result.triplets) {
    const Vector diff_p = u.row(t.anchor) - u.row(t.positive);
    const Vector diff_n = u.row(t.anchor) - u.row(t.negative);
    const double d_p = diff_p.norm();
    const double d_n = diff_n.norm();
    const double loss = d_p - d_n + margin;
    if (loss <= 0.0) continue;
    total += loss;
    // d|v|/dv = v/|v|; a coincident pair contributes the zero subgradient.
    if (d_p > 0.0) {
      const Vector g = scale * diff_p / d_p;
      grad_u.row(t.anchor) += g.transpose();
      grad_u.row(t.positive) -= g.transpose();
    }
    if (d_n > 0.0) {
      const Vector g = scale * diff_n / d_n;
      grad_u.row(t.anchor) -= g.transpose();
      grad_u.row(t.negative) += g.transpose();
    }
  }
  result.loss = total * scale;

  // Through the normalization: dL/dz = (I - u u^T) dL/du / |z|.
  Matrix grad_z(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double radial = u.row(i).dot(grad_u.row(i));
    grad_z.row(i) = (grad_u.row(i) - radial * u.row(i)) / norms(i);
  }
  result.grads.weight = grad_z.transpose() * x;
  result.grads.bias = grad_z.colwise().sum().transpose();
  return result;
}

namespace {

template <typename Param>
void AdamUpdate(Param& param, const Param& grad, Param& m, Param& v, double bc1, double bc2,
                const AdamConfig& c) {
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  param.array() -= c.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
}

}  // namespace

void AdamStep(AdapterModel& model, const Gradients& grads, AdamState& state,
              const AdamConfig& config) {
  if (grads.weight.rows() != model.weight.rows() || grads.weight.cols() != model.weight.cols() ||
      grads.bias.size() != model.bias.size()) {
    throw Error(ErrorCode::kDimMismatch, "gradient shape differs from the parameters");
  }
  if (state.step == 0) {
    state.m_weight = Matrix::Zero(model.weight.rows(), model.weight.cols());
    state.v_weight = state.m_weight;
    state.m_bias = Vector::Zero(model.bias.size());
    state.v_bias = state.m_bias;
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  AdamUpdate(model.weight, grads.weight, state.m_weight, state.v_weight, bc1, bc2, config);
  AdamUpdate(model.bias, grads.bias, state.m_bias, state.v_bias, bc1, bc2, config);
}

PlateauScheduler::PlateauScheduler(double lr, double factor, int patience,
                                   double initial_best)
    : lr_(lr), factor_(factor), patience_(patience), best_(initial_best) {}

bool PlateauScheduler::Observe(double metric) {
  if (metric < best_) {
    best_ = metric;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr_ *= factor_;
  bad_epochs_ = 0;
  return true;
}

EarlyStopping::EarlyStopping(int patience, double initial_best)
    : patience_(patience), best_(initial_best) {}

bool EarlyStopping::Observe(double metric) {
  if (metric < best_) {
    best_ = metric;
    bad_epochs_ = 0;
    return false;
  }
  return ++bad_epochs_ >= patience_;
}

void TrainerConfig::Validate() const {
  auto bad = [](const std::string& what) {
    return Error(ErrorCode::kInvalidArgument, "trainer config: " + what);
  };
  if (!(margin > 0.0)) throw bad("margin must be positive");
  if (!(adam.lr > 0.0)) throw bad("lr must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw bad("adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw bad("adam eps must be positive");
  if (plateau_patience < 1 || early_stop_patience < 1) throw bad("patience values must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
    throw bad("plateau_factor must lie in (0, 1)");
  }
  if (max_epochs < 1) throw bad("max_epochs must be >= 1");
  if (batch_speakers < 2) throw bad("batch_speakers (P) must be >= 2");
  if (utts_per_speaker < 2) throw bad("utts_per_speaker (K) must be >= 2");
  if (d_out < 0) throw bad("d_out must be >= 0");
}

LabeledSet BuildTrainSet(const scoring::EmbeddingArchive& archive,
                         const corpus::Manifest& manifest, corpus::Split split) {
  std::vector<const corpus::UtteranceRecord*> chosen;
  for (const auto& r : manifest.records) {
    if (r.split == split) chosen.push_back(&r);
  }
  LabeledSet set;
  set.inputs.resize(static_cast<Eigen::Index>(chosen.size()), archive.dim());
  std::map<std::string, int> label_of;
  for (const auto* r : chosen) label_of.emplace(r->speaker_id, 0);
  for (auto& [speaker, label] : label_of) {
    label = static_cast<int>(set.speakers.size());
    set.speakers.push_back(speaker);
  }
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto row = archive.At(chosen[i]->utterance_id);
    for (std::size_t k = 0; k < row.size(); ++k) {
      set.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    set.labels.push_back(label_of.at(chosen[i]->speaker_id));
  }
  return set;
}

ValidationSet BuildValidationSet(const scoring::EmbeddingArchive& archive,
                                 const std::vector<corpus::TrialPair>& trials) {
  ValidationSet val;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::span<const float>> rows;
  auto index_of = [&](const std::string& id) {
    auto [it, fresh] = slot.emplace(id, rows.size());
    if (fresh) rows.push_back(archive.At(id));
    return it->second;
  };
  for (const auto& t : trials) {
    const std::size_t e = index_of(t.enroll_utt);
    const std::size_t s = index_of(t.test_utt);
    val.pairs.emplace_back(e, s);
    val.labels.push_back(t.label);
  }
  val.inputs.resize(static_cast<Eigen::Index>(rows.size()), archive.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      val.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return val;
}

double ValidationEer(const AdapterModel& model, const ValidationSet& val) {
  const Matrix u = model.EmbedRows(val.inputs);
  std::vector<double> scores(val.pairs.size());
  for (std::size_t i = 0; i < val.pairs.size(); ++i) {
    const auto [e, t] = val.pairs[i];
    scores[i] = std::clamp(u.row(static_cast<Eigen::Index>(e)).dot(u.row(static_cast<Eigen::Index>(t))),
                           -1.0, 1.0);
  }
  return scoring::ComputeEer(scores, val.labels).eer;
}

std::vector<Batch> AssembleBatches(const LabeledSet& set, int batch_speakers,
                                   int utts_per_speaker, Rng& rng) {
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < set.labels.size(); ++i) by_label[set.labels[i]].push_back(i);

  struct Chunk {
    int label;
    std::vector<std::size_t> rows;
  };
  std::vector<Chunk> chunks;
  const auto k = static_cast<std::size_t>(utts_per_speaker);
  for (auto& [label, rows] : by_label) {
    if (rows.size() < 2) continue;
    rng.Shuffle(std::span(rows));
    for (std::size_t start = 0; start < rows.size(); start += k) {
      const std::size_t end = std::min(rows.size(), start + k);
      if (end - start == 1) {
        chunks.back().rows.push_back(rows[start]);  // a lone leftover joins its sibling
      } else {
        chunks.push_back({label, {rows.begin() + static_cast<std::ptrdiff_t>(start),
                                  rows.begin() + static_cast<std::ptrdiff_t>(end)}});
      }
    }
  }
  rng.Shuffle(std::span(chunks));

  std::vector<Batch> batches;
  std::vector<bool> taken(chunks.size(), false);
  std::size_t first_free = 0;
  const auto p = static_cast<std::size_t>(batch_speakers);
  while (first_free < chunks.size()) {
    std::vector<std::size_t> members;
    std::vector<int> labels_in_batch;
    for (std::size_t c = first_free; c < chunks.size() && members.size() < p; ++c) {
      if (taken[c]) continue;
      if (std::find(labels_in_batch.begin(), labels_in_batch.end(), chunks[c].label) !=
          labels_in_batch.end()) {
        continue;
      }
      members.push_back(c);
      labels_in_batch.push_back(chunks[c].label);
    }
    for (std::size_t c : members) taken[c] = true;
    while (first_free < chunks.size() && taken[first_free]) ++first_free;
    if (members.size() < 2) break;  // only one speaker's chunks remain

    Batch batch;
    std::size_t total = 0;
    for (std::size_t c : members) total += chunks[c].rows.size();
    batch.inputs.resize(static_cast<Eigen::Index>(total), set.inputs.cols());
    Eigen::Index r = 0;
    for (std::size_t c : members) {
      for (std::size_t row : chunks[c].rows) {
        batch.inputs.row(r++) = set.inputs.row(static_cast<Eigen::Index>(row));
        batch.labels.push_back(chunks[c].label);
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::string_view StopReasonName(StopReason reason) {
  return reason == StopReason::kEarlyStop ? "early_stop" : "max_epochs";
}

TrainResult Train(const AdapterModel& model, const LabeledSet& train_set,
                  const ValidationSet& val_set, const TrainerConfig& config,
                  const EpochCallback& on_epoch) {
  config.Validate();
  model.Validate();
  if (train_set.inputs.cols() != model.d_in()) {
    throw Error(ErrorCode::kDimMismatch, "training embeddings do not match adapter d_in");
  }

  TrainResult result;
  result.best_model = model;
  AdapterModel current = model;
  TrainHistory& history = result.history;
  history.baseline_eer = ValidationEer(current, val_set);
  history.best_eer = history.baseline_eer;

  PlateauScheduler scheduler(config.adam.lr, config.plateau_factor, config.plateau_patience,
                             history.baseline_eer);
  EarlyStopping stopper(config.early_stop_patience, history.baseline_eer);
  AdamState adam_state;
  Rng rng(config.seed);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    AdamConfig adam = config.adam;
    adam.lr = scheduler.lr();
    const auto batches =
        AssembleBatches(train_set, config.batch_speakers, config.utts_per_speaker, rng);
    if (batches.empty()) {
      throw Error(ErrorCode::kDegenerateBatch,
                  "training set yields no batch of two speakers with two utterances each");
    }
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      auto fb = ForwardBackward(current, batch, config.margin, config.mining);
      if (!std::isfinite(fb.loss) || !fb.grads.weight.allFinite() ||
          !fb.grads.bias.allFinite()) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "epoch " + std::to_string(epoch) + ": loss " + std::to_string(fb.loss) +
                        " at lr " + std::to_string(adam.lr));
      }
      loss_sum += fb.loss;
      AdamStep(current, fb.grads, adam_state, adam);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.loss = loss_sum / static_cast<double>(batches.size());
    record.val_eer = ValidationEer(current, val_set);
    record.lr = adam.lr;
    history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_eer < history.best_eer) {
      history.best_eer = record.val_eer;
      history.best_epoch = epoch;
      result.best_model = current;
    }
    scheduler.Observe(record.val_eer);
    if (stopper.Observe(record.val_eer)) {
      history.stop_reason = StopReason::kEarlyStop;
      break;
    }
  }
  return result;
}

void WriteHistoryCsv(const TrainHistory& history, std::ostream& out) {
  out << "epoch,loss,val_eer,lr\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << scoring::FormatDouble(e.loss) << ','
        << scoring::FormatDouble(e.val_eer) << ',' << scoring::FormatDouble(e.lr) << '\n';
  }
}

namespace {

void PutU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorCode::kTruncatedFile, "adapter checkpoint is truncated");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void PutF32(std::ostream& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  PutU32(out, bits);
}

double GetF32(std::istream& in) {
  const std::uint32_t bits = GetU32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void WriteCheckpoint(const AdapterModel& model, std::ostream& out) {
  model.Validate();
  out.write("SVAD", 4);
  PutU32(out, kCheckpointVersion);
  PutU32(out, static_cast<std::uint32_t>(model.d_in()));
  PutU32(out, static_cast<std::uint32_t>(model.d_out()));
  for (Eigen::Index r = 0; r < model.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weight.cols(); ++c) PutF32(out, model.weight(r, c));
  }
  for (Eigen::Index r = 0; r < model.bias.size(); ++r) PutF32(out, model.bias(r));
  if (!out) throw Error(ErrorCode::kIo, "checkpoint write failed");
}

void WriteCheckpoint(const AdapterModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  WriteCheckpoint(model, out);
}

AdapterModel ReadCheckpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw Error(ErrorCode::kTruncatedFile, "adapter checkpoint is empty");
  if (std::memcmp(magic, "SVAD", 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an SVAD adapter checkpoint");
  }
  const std::uint32_t version = GetU32(in);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "SVAD version " + std::to_string(version));
  }
  const std::uint32_t d_in = GetU32(in);
  const std::uint32_t d_out = GetU32(in);
  if (d_in == 0 || d_out == 0 || d_out > d_in) {
    throw Error(ErrorCode::kDimMismatch, "checkpoint header has invalid dimensions");
  }
  AdapterModel m;
  m.weight.resize(d_out, d_in);
  m.bias.resize(d_out);
  for (Eigen::Index r = 0; r < m.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.weight.cols(); ++c) m.weight(r, c) = GetF32(in);
  }
  for (Eigen::Index r = 0; r < m.bias.size(); ++r) m.bias(r) = GetF32(in);
  m.Validate();
  return m;
}

AdapterModel ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return ReadCheckpoint(in);
}

scoring::EmbeddingArchive AdaptArchive(const AdapterModel& model,
                                       const scoring::EmbeddingArchive& archive) {
  if (archive.dim() != model.d_in()) {
    throw Error(ErrorCode::kDimMismatch, "archive dim " + std::to_string(archive.dim()) +
                                             " vs adapter d_in " +
                                             std::to_string(model.d_in()));
  }
  scoring::EmbeddingArchive out(static_cast<std::uint32_t>(model.d_out()),
                                archive.model_id() + "+adapter");
  std::vector<float> row(static_cast<std::size_t>(model.d_out()));
  for (std::size_t i = 0; i < archive.size(); ++i) {
    const Vector u = model.Embed(archive.Row(i));
    for (Eigen::Index k = 0; k < u.size(); ++k) row[static_cast<std::size_t>(k)] = static_cast<float>(u(k));
    out.Add(archive.ids()[i], row);
  }
  return out;
}

}  // namespace svkit::train
