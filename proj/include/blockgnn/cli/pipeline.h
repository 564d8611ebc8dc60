#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockgnn/data/corpus.h"
#include "blockgnn/eval/evaluate.h"
#include "blockgnn/graph/encoder.h"
#include "blockgnn/graph/vocabulary.h"
#include "blockgnn/model/checkpoint.h"
#include "blockgnn/model/config.h"
#include "blockgnn/train/split.h"
#include "blockgnn/train/trainer.h"
#include "json.hpp"

namespace blockgnn::cli {

// Where labeled blocks come from. For csv, each corpus entry is
// "<microarchitecture>=<path>" and `disasm` names the sidecar file.
struct DataConfig {
  std::vector<std::string> corpus;
  data::CorpusFormat format = data::CorpusFormat::kJsonl;
  std::string disasm;
  // When false every sample is used for training and checkpoints are
  // selected on the training set.
  bool holdout = true;
};

// A training config file:
//   {"model": {...}, "train": {...}, "encoder": {...}, "data": {...}}
// Every section is optional; unknown sections or fields are rejected.
struct ExperimentConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  graph::EncoderConfig encoder;
  DataConfig data;
};

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& value);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);
ExperimentConfig LoadExperimentConfig(const std::string& path);

data::CorpusFormat ParseFormat(const std::string& name);
data::Corpus LoadCorpus(const DataConfig& data);

enum class SplitPart { kAll, kTrain, kValidation, kTest };
SplitPart ParseSplitPart(const std::string& name);

// Records with every required task, partitioned as during training.
struct PartitionedRecords {
  std::vector<data::CorpusRecord> train, validation, test;
  size_t dropped_missing_labels = 0;
  // Stored in checkpoints: {"seed", "holdout", "required_tasks"}.
  nlohmann::json split_info;
};

PartitionedRecords PartitionRecords(const std::vector<data::CorpusRecord>& records,
                                    const std::vector<std::string>& required_tasks, uint64_t seed,
                                    bool holdout);
// Rebuilds the partition described by a checkpoint's split info.
PartitionedRecords PartitionFromInfo(const std::vector<data::CorpusRecord>& records,
                                     const nlohmann::json& split_info);

struct Experiment {
  PartitionedRecords parts;
  graph::Vocabulary vocab;
  std::vector<train::Sample> train, validation, test;
};

// Splits, builds the vocabulary from the training partition and encodes
// every partition.
Experiment PrepareExperiment(const std::vector<data::CorpusRecord>& records,
                             const ExperimentConfig& cfg);

// Trains and returns the result; the trained tasks default to the model's.
train::TrainResult RunTraining(const Experiment& experiment, const ExperimentConfig& cfg,
                               const train::TrainHooks& hooks = {});

// Encodes `records` with the bundle's vocabulary and encoder, then evaluates.
eval::Evaluation EvaluateRecords(const model::ModelBundle& bundle,
                                 const std::vector<data::CorpusRecord>& records);

}  // namespace blockgnn::cli
