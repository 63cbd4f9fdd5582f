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

#include <cstdio>
#include <fstream>
#include <memory>

#include "cli_common.hpp"
#include "svkit/error.hpp"
#include "svkit/trainer.hpp"

namespace svkit::cli {

namespace fs = std::filesystem;

namespace {

struct TrainOptions {
  std::string train_archive;
  std::string manifest;
  std::string train_split = "train";
  std::string val_archive;
  std::string val_trials;
  std::string out;
  std::string history;
  std::string init;
  std::string mining = "batch-hard";
  bool drop_easy = false;
  train::TrainerConfig config;
  std::optional<std::uint64_t> seed;
};

int RunTrain(const TrainOptions& o, const GlobalOptions& global) {
  train::TrainerConfig config = o.config;
  config.seed = ResolveSeed(o.seed);
  config.mining.mode =
      o.mining == "semi-hard" ? train::MiningMode::kSemiHard : train::MiningMode::kBatchHard;
  config.mining.keep_zero_loss = !o.drop_easy;
  config.Validate();

  const auto train_archive = scoring::ReadArchive(o.train_archive);
  const auto val_archive =
      o.val_archive.empty() ? train_archive : scoring::ReadArchive(o.val_archive);
  const auto manifest = corpus::ReadManifest(o.manifest);
  const auto trials = corpus::ReadTrials(fs::path(o.val_trials));

  const auto train_set =
      train::BuildTrainSet(train_archive, manifest, corpus::ParseSplit(o.train_split));
  const auto val_set = train::BuildValidationSet(val_archive, trials);

  train::AdapterModel init;
  if (!o.init.empty()) {
    init = train::ReadCheckpoint(fs::path(o.init));
  } else {
    const Eigen::Index d_in = train_archive.dim();
    init = train::AdapterModel::Identity(d_in, config.d_out > 0 ? config.d_out : d_in);
  }

  auto progress = [&](const train::EpochRecord& r) {
    if (global.verbosity > 0) {
      std::fprintf(stderr, "epoch %3d  loss %.6f  val EER %6.2f%%  lr %.3g\n", r.epoch, r.loss,
                   100.0 * r.val_eer, r.lr);
    }
  };
  const auto result = train::Train(init, train_set, val_set, config, progress);
  const auto& h = result.history;

  const fs::path dir = PrepareOutput(o.out);
  train::WriteCheckpoint(result.best_model, fs::path(o.out));
  const std::string history_path =
      o.history.empty() ? (dir / "history.csv").string() : o.history;
  {
    PrepareOutput(history_path);
    std::ofstream csv(history_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(ErrorCode::kIo, "cannot open " + history_path);
    train::WriteHistoryCsv(h, csv);
  }
  std::printf("validation EER %.2f%% -> %.2f%% (best epoch %d of %zu, %s)\n",
              100.0 * h.baseline_eer, 100.0 * h.best_eer, h.best_epoch, h.epochs.size(),
              std::string(train::StopReasonName(h.stop_reason)).c_str());

  WriteRunJson(dir, "train",
               {{"train_archive", o.train_archive},
                {"val_archive", o.val_archive.empty() ? o.train_archive : o.val_archive},
                {"manifest", o.manifest},
                {"train_split", o.train_split},
                {"val_trials", o.val_trials},
                {"out", o.out},
                {"history", history_path},
                {"init", o.init},
                {"margin", config.margin},
                {"lr", config.adam.lr},
                {"beta1", config.adam.beta1},
                {"beta2", config.adam.beta2},
                {"eps", config.adam.eps},
                {"plateau_patience", config.plateau_patience},
                {"plateau_factor", config.plateau_factor},
                {"early_stop_patience", config.early_stop_patience},
                {"max_epochs", config.max_epochs},
                {"batch_speakers", config.batch_speakers},
                {"utts_per_speaker", config.utts_per_speaker},
                {"d_out", init.d_out()},
                {"mining", o.mining},
                {"keep_zero_loss", config.mining.keep_zero_loss},
                {"seed", config.seed},
                {"baseline_eer", h.baseline_eer},
                {"best_eer", h.best_eer},
                {"best_epoch", h.best_epoch},
                {"stop_reason", train::StopReasonName(h.stop_reason)}});
  return kOk;
}

}  // namespace

void RegisterTrain(CLI::App& app, const GlobalOptions& global, int& exit_code) {
  auto o = std::make_shared<TrainOptions>();
  auto& c = o->config;
  auto* sub = app.add_subcommand("train", "Train a triplet-loss adapter over embeddings");
  sub->add_option("--train-archive", o->train_archive, "SVEM archive of training embeddings")
      ->required();
  sub->add_option("--manifest", o->manifest, "Split manifest naming speakers")->required();
  sub->add_option("--train-split", o->train_split)
      ->check(CLI::IsMember({"train", "val", "test", "unassigned"}))
      ->capture_default_str();
  sub->add_option("--val-archive", o->val_archive, "Default: --train-archive");
  sub->add_option("--val-trials", o->val_trials, "Validation trial list")->required();
  sub->add_option("--out", o->out, "Best adapter checkpoint (SVAD)")->required();
  sub->add_option("--history", o->history, "Per-epoch CSV (default: history.csv next to --out)");
  sub->add_option("--init", o->init, "Start from this checkpoint instead of identity");
  sub->add_option("--margin", c.margin)->capture_default_str();
  sub->add_option("--lr", c.adam.lr)->capture_default_str();
  sub->add_option("--beta1", c.adam.beta1)->capture_default_str();
  sub->add_option("--beta2", c.adam.beta2)->capture_default_str();
  sub->add_option("--eps", c.adam.eps)->capture_default_str();
  sub->add_option("--plateau-patience", c.plateau_patience)->capture_default_str();
  sub->add_option("--plateau-factor", c.plateau_factor)->capture_default_str();
  sub->add_option("--early-stop-patience", c.early_stop_patience)->capture_default_str();
  sub->add_option("--max-epochs", c.max_epochs)->capture_default_str();
  sub->add_option("--batch-speakers", c.batch_speakers, "P")->capture_default_str();
  sub->add_option("--utts-per-speaker", c.utts_per_speaker, "K")->capture_default_str();
  sub->add_option("--d-out", c.d_out, "Adapter output dim (0 = input dim)")
      ->capture_default_str();
  sub->add_option("--mining", o->mining)
      ->check(CLI::IsMember({"batch-hard", "semi-hard"}))
      ->capture_default_str();
  sub->add_flag("--drop-easy", o->drop_easy, "Drop mined triplets that already have zero loss");
  sub->add_option("--seed", o->seed, "Batch seed (default $SVKIT_SEED or 0)");
  sub->callback([o, &global, &exit_code] { exit_code = RunTrain(*o, global); });
}

}  // namespace svkit::cli
