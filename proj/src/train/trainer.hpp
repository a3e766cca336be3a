#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/adam.hpp"
#include "data/dataset.hpp"
#include "model/losses.hpp"
#include "model/model.hpp"

namespace lirec {

struct TrainConfig {
  ModelConfig model;  // partial: class counts / feature dims filled from data
  LossConfig loss;
  AdamConfig optim;
  int epochs = 60;
  std::size_t batch_size = 64;
  std::size_t bundle_cap = 18;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // 0: only the final checkpoint

  void validate() const;
  static TrainConfig from_json(const Json& j);
  Json to_json() const;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;  // batch-mean objective averaged over the epoch
  std::size_t samples = 0;
  std::string reduction;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::filesystem::path checkpoint;  // final checkpoint
  std::vector<EpochLog> log;
  int epochs_run = 0;
};

// Fills zero class counts and feature dims from the dataset; explicit
// nonzero values must agree with it.
ModelConfig resolve_model_config(ModelConfig base, const MovieDataset& ds);

// Runs cfg.epochs epochs from a fresh model. Writes checkpoint_final.lirc
// (plus its .meta.json sidecar) and train_log.jsonl under out_dir.
TrainResult train(const TrainConfig& cfg, const MovieDataset& ds,
                  const std::filesystem::path& out_dir);

// Continues a run from its checkpoint up to cfg.epochs total epochs. Model
// architecture and seed come from the sidecar, so the continued run streams
// the same randomness the uninterrupted one would.
TrainResult resume(const std::filesystem::path& checkpoint,
                   const TrainConfig& cfg, const MovieDataset& ds,
                   const std::filesystem::path& out_dir);

// Rebuilds a model from a checkpoint and its sidecar. meta_out / raw_out,
// when given, receive the sidecar and the raw tensor container.
Model load_model(const std::filesystem::path& checkpoint,
                 ModelMeta* meta_out = nullptr,
                 io::Checkpoint* raw_out = nullptr);

}  // namespace lirec
