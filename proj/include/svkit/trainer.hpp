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

#ifndef SVKIT_TRAINER_HPP_
#define SVKIT_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "svkit/corpus.hpp"
#include "svkit/random.hpp"
#include "svkit/scoring.hpp"

namespace svkit::train {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Affine head over frozen encoder embeddings. Outputs are always length
/// normalized: u = (W x + b) / |W x + b|.
struct AdapterModel {
  Matrix weight;  // d_out x d_in
  Vector bias;    // d_out

  Eigen::Index d_in() const { return weight.cols(); }
  Eigen::Index d_out() const { return weight.rows(); }

  /// Leading d_out rows of the identity, zero bias.
  static AdapterModel Identity(Eigen::Index d_in, Eigen::Index d_out);

  /// Throws InvalidArgument on non-finite parameters, d_out > d_in, or a
  /// bias of the wrong length.
  void Validate() const;

  /// Unit-norm outputs for each row of `inputs` (N x d_in).
  Matrix EmbedRows(const Matrix& inputs) const;
  Vector Embed(std::span<const float> input) const;
};

/// max(0, |a - p| - |a - n| + margin).
double TripletLoss(const Vector& anchor, const Vector& positive,
                   const Vector& negative, double margin);

struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  bool operator==(const Triplet&) const = default;
};

enum class MiningMode {
  /// Hardest positive and hardest negative per anchor.
  kBatchHard,
  /// Closest negative beyond the hardest positive but inside the margin;
  /// falls back to the hardest negative when none exists.
  kSemiHard,
};

struct MiningOptions {
  MiningMode mode = MiningMode::kBatchHard;
  bool keep_zero_loss = true;
};

/// One triplet per anchor row of `embeddings` (rows are unit vectors).
/// Throws DegenerateBatch unless there are >= 2 labels, each with >= 2 rows.
std::vector<Triplet> MineHardBatch(const Matrix& embeddings,
                                   std::span<const int> labels, double margin,
                                   const MiningOptions& options = {});

struct Batch {
  Matrix inputs;  // N x d_in
  std::vector<int> labels;
};

struct Gradients {
  Matrix weight;
  Vector bias;
};

struct ForwardBackwardResult {
  double loss = 0.0;
  Gradients grads;
  std::vector<Triplet> triplets;
};

/// Mean triplet loss over the mined triplets and its exact gradient with
/// respect to the adapter parameters. Mining is recomputed from the current
/// outputs and treated as fixed when differentiating.
ForwardBackwardResult ForwardBackward(const AdapterModel& model, const Batch& batch,
                                      double margin, const MiningOptions& options = {});

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Matrix m_weight, v_weight;
  Vector m_bias, v_bias;
  std::int64_t step = 0;
};

/// Bias-corrected Adam. The state is lazily sized on first use.
void AdamStep(AdapterModel& model, const Gradients& grads, AdamState& state,
              const AdamConfig& config);

/// Lowers the learning rate by `factor` once `patience` consecutive epochs
/// fail to improve on the best (lowest) metric, then starts counting again.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, int patience, double initial_best);
  /// Returns true when this observation triggered a reduction; the new rate
  /// applies from the next epoch.
  bool Observe(double metric);
  double lr() const noexcept { return lr_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double best_;
  int bad_epochs_ = 0;
};

/// Signals a stop after `patience` consecutive non-improving epochs.
class EarlyStopping {
 public:
  EarlyStopping(int patience, double initial_best);
  bool Observe(double metric);
  int bad_epochs() const noexcept { return bad_epochs_; }

 private:
  int patience_;
  double best_;
  int bad_epochs_ = 0;
};

struct TrainerConfig {
  double margin = 0.2;
  AdamConfig adam;
  int plateau_patience = 8;
  double plateau_factor = 0.5;
  int early_stop_patience = 8;
  int max_epochs = 100;
  int batch_speakers = 8;    // P
  int utts_per_speaker = 4;  // K
  /// 0 keeps the input dimension.
  int d_out = 0;
  MiningOptions mining;
  std::uint64_t seed = 0;

  void Validate() const;
};

/// Rows of embeddings with integer speaker labels.
struct LabeledSet {
  Matrix inputs;
  std::vector<int> labels;
  std::vector<std::string> speakers;  // label -> speaker id
};

/// Embeddings of every `split` record of `manifest`. Throws UnknownId.
LabeledSet BuildTrainSet(const scoring::EmbeddingArchive& archive,
                         const corpus::Manifest& manifest,
                         corpus::Split split = corpus::Split::kTrain);

struct ValidationSet {
  Matrix inputs;  // one row per distinct utterance
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<corpus::TrialLabel> labels;
};

ValidationSet BuildValidationSet(const scoring::EmbeddingArchive& archive,
                                 const std::vector<corpus::TrialPair>& trials);

/// Cosine EER of the adapted embeddings over the validation trials.
double ValidationEer(const AdapterModel& model, const ValidationSet& val);

/// P x K batches for one epoch: each speaker's utterances are shuffled and
/// cut into groups of K, and the groups are dealt into batches of P distinct
/// speakers in random order. Speakers with one utterance are skipped.
std::vector<Batch> AssembleBatches(const LabeledSet& set, int batch_speakers,
                                   int utts_per_speaker, Rng& rng);

enum class StopReason { kMaxEpochs, kEarlyStop };

std::string_view StopReasonName(StopReason reason);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_eer = 0.0;
  double lr = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  double baseline_eer = 0.0;  // before the first update
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0 means the initial model was never beaten
  double best_eer = 0.0;
  StopReason stop_reason = StopReason::kMaxEpochs;
};

struct TrainResult {
  AdapterModel best_model;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `model` and returns the snapshot with the lowest validation EER.
TrainResult Train(const AdapterModel& model, const LabeledSet& train_set,
                  const ValidationSet& val_set, const TrainerConfig& config,
                  const EpochCallback& on_epoch = {});

/// `epoch,loss,val_eer,lr` with a header row.
void WriteHistoryCsv(const TrainHistory& history, std::ostream& out);

// SVAD checkpoint: "SVAD" u32 version u32 d_in u32 d_out, row-major float32
// weight, then float32 bias.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void WriteCheckpoint(const AdapterModel& model, const std::filesystem::path& path);
void WriteCheckpoint(const AdapterModel& model, std::ostream& out);
AdapterModel ReadCheckpoint(const std::filesystem::path& path);
AdapterModel ReadCheckpoint(std::istream& in);

/// Maps every entry of `archive` through the adapter.
scoring::EmbeddingArchive AdaptArchive(const AdapterModel& model,
                                       const scoring::EmbeddingArchive& archive);

}  // namespace svkit::train

#endif  // SVKIT_TRAINER_HPP_
