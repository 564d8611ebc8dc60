#include "blockgnn/eval/evaluate.h"

#include "blockgnn/error.h"

namespace blockgnn::eval {

Evaluation Evaluate(std::span<const train::Sample* const> samples,
                    const model::ModelParams& model) {
  std::vector<const graph::BlockGraph*> graphs;
  graphs.reserve(samples.size());
  for (const auto* s : samples) graphs.push_back(&s->graph);
  const auto predictions = model::PredictMany(graphs, model, kEvalBatchSize);
  Evaluation out;
  double mape_sum = 0.0;
  const auto& tasks = model.config.task_names;
  for (size_t t = 0; t < tasks.size(); ++t) {
    TaskEvaluation te;
    for (size_t i = 0; i < samples.size(); ++i) {
      auto it = samples[i]->labels.find(tasks[t]);
      if (it == samples[i]->labels.end()) continue;
      te.predicted.push_back(predictions[i][t]);
      te.actual.push_back(it->second);
      te.block_ids.push_back(samples[i]->block_id);
    }
    if (te.actual.empty()) continue;
    te.metrics = ComputeMetrics(te.predicted, te.actual);
    mape_sum += te.metrics.mape;
    out.tasks.emplace(tasks[t], std::move(te));
  }
  if (out.tasks.empty()) {
    throw Error(ErrorCode::kMissingTaskLabel, "no sample carries a label for any model task");
  }
  out.mean_mape = mape_sum / static_cast<double>(out.tasks.size());
  return out;
}

nlohmann::json EvaluationToJson(const Evaluation& e) {
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [name, te] : e.tasks) tasks[name] = MetricsToJson(te.metrics);
  return {{"tasks", tasks}, {"mean_mape", e.mean_mape}};
}

}  // namespace blockgnn::eval
