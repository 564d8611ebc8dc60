#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockgnn/graph/encoder.h"
#include "blockgnn/graph/vocabulary.h"
#include "blockgnn/model/checkpoint.h"
#include "blockgnn/model/config.h"
#include "blockgnn/train/loss.h"
#include "blockgnn/train/sample.h"
#include "json.hpp"

namespace blockgnn::train {

struct TrainConfig {
  LossKind loss = LossKind::kMape;
  size_t batch_size_blocks = 100;
  double learning_rate = 1e-3;
  size_t max_steps = 1000;
  size_t eval_every = 100;
  uint64_t seed = 0;
  // Tasks contributing to the loss; empty means every model task.
  std::vector<std::string> tasks;
  // When set, best.ckpt and metrics.jsonl are written here.
  std::string checkpoint_dir;
  std::optional<double> clip_gradient_norm;

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json TrainConfigToJson(const TrainConfig& cfg);
// Missing fields keep their defaults; unknown fields are rejected.
// Throws Error(kInvalidConfig).
TrainConfig TrainConfigFromJson(const nlohmann::json& value);

// One line of the metrics log.
struct EvalRecord {
  size_t step = 0;
  // Mean batch loss over the steps since the previous record.
  double train_loss = 0.0;
  // MAPE per task on the selection set.
  std::map<std::string, double> val_mape_per_task;
  double val_mape_mean = 0.0;
  // "validation", or "train" when no validation samples were given.
  std::string selection_set;
};

nlohmann::json EvalRecordToJson(const EvalRecord& r);

struct TrainHooks {
  // Called after each optimizer step; return false to stop.
  std::function<bool(size_t step, double batch_loss)> on_step;
  // Called after each evaluation; return false to stop.
  std::function<bool(const EvalRecord&)> on_eval;
};

struct TrainResult {
  // Parameters with the lowest mean selection MAPE; earliest wins ties.
  model::ModelBundle best;
  model::ModelParams last;
  std::vector<EvalRecord> log;
  size_t steps = 0;
};

struct TrainInputs {
  std::span<const Sample> train;
  // May be empty, in which case checkpoints are selected on `train`.
  std::span<const Sample> validation;
  graph::Vocabulary vocab;
  graph::EncoderConfig encoder;
  // Stored in the checkpoint so evaluation can rebuild the split.
  nlohmann::json split_info = nlohmann::json::object();
};

// Seeded per-epoch shuffling; every step takes the next batch_size_blocks
// samples of the epoch (the last batch of an epoch may be short). The loss
// is the unweighted sum over trained tasks of the mean per-sample loss,
// followed by one Adam step. Every eval_every steps (and after the last
// step) the selection set is evaluated by MAPE and the best checkpoint kept.
//
// Throws Error(kMissingTaskLabel) if a sample lacks a trained task,
// Error(kUnknownTask) if a trained task is not a model task, and
// Error(kNonFiniteLoss) naming the batch's block ids if the loss or any
// intermediate value is not finite.
TrainResult Train(const TrainInputs& inputs, const TrainConfig& cfg,
                  const model::ModelConfig& mcfg, const TrainHooks& hooks = {});

}  // namespace blockgnn::train
