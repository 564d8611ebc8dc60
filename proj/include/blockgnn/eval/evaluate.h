#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "blockgnn/eval/metrics.h"
#include "blockgnn/model/model.h"
#include "blockgnn/train/sample.h"

namespace blockgnn::eval {

// Fixed so that evaluation after reload repeats the exact floating-point
// work done during training.
inline constexpr size_t kEvalBatchSize = 100;

struct TaskEvaluation {
  std::vector<double> predicted;  // samples carrying this task's label, input order
  std::vector<double> actual;
  std::vector<std::string> block_ids;
  Metrics metrics;
};

struct Evaluation {
  std::map<std::string, TaskEvaluation> tasks;
  // Mean MAPE over tasks with at least one labeled sample.
  double mean_mape = 0.0;
};

// Predicts every sample in batches of kEvalBatchSize and scores each
// configured task on the samples that carry its label; tasks without any
// labeled sample are omitted. Throws Error(kMissingTaskLabel) when no task
// remains.
Evaluation Evaluate(std::span<const train::Sample* const> samples,
                    const model::ModelParams& model);

nlohmann::json EvaluationToJson(const Evaluation& e);

}  // namespace blockgnn::eval
