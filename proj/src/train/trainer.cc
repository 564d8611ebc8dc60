#include "blockgnn/train/trainer.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "blockgnn/error.h"
#include "blockgnn/eval/evaluate.h"
#include "blockgnn/random.h"
#include "blockgnn/tensor/adam.h"

namespace blockgnn::train {
namespace {

constexpr uint64_t kShuffleSalt = 0x73687566666c65ULL;

size_t SizeField(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::kInvalidConfig, "'" + key + "' must be a nonnegative integer");
  }
  return v.get<size_t>();
}

std::string JoinIds(const std::vector<const Sample*>& batch) {
  std::string out;
  for (const auto* s : batch) {
    if (!out.empty()) out += ",";
    out += s->block_id;
  }
  return out;
}

void Shuffle(std::vector<size_t>& order, Rng& rng) {
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
}

}  // namespace

nlohmann::json TrainConfigToJson(const TrainConfig& cfg) {
  return {
      {"loss", LossKindName(cfg.loss)},
      {"batch_size_blocks", cfg.batch_size_blocks},
      {"learning_rate", cfg.learning_rate},
      {"max_steps", cfg.max_steps},
      {"eval_every", cfg.eval_every},
      {"seed", cfg.seed},
      {"tasks", cfg.tasks},
      {"checkpoint_dir", cfg.checkpoint_dir},
      {"clip_gradient_norm",
       cfg.clip_gradient_norm ? nlohmann::json(*cfg.clip_gradient_norm) : nlohmann::json(nullptr)},
  };
}

TrainConfig TrainConfigFromJson(const nlohmann::json& value) {
  if (!value.is_object()) throw Error(ErrorCode::kInvalidConfig, "train config must be an object");
  TrainConfig cfg;
  try {
    for (const auto& [key, v] : value.items()) {
      if (key == "loss") {
        cfg.loss = LossKindFromName(v.get<std::string>());
      } else if (key == "batch_size_blocks") {
        cfg.batch_size_blocks = SizeField(v, key);
      } else if (key == "learning_rate") {
        cfg.learning_rate = v.get<double>();
      } else if (key == "max_steps") {
        cfg.max_steps = SizeField(v, key);
      } else if (key == "eval_every") {
        cfg.eval_every = SizeField(v, key);
      } else if (key == "seed") {
        cfg.seed = v.get<uint64_t>();
      } else if (key == "tasks") {
        cfg.tasks = v.get<std::vector<std::string>>();
      } else if (key == "checkpoint_dir") {
        cfg.checkpoint_dir = v.get<std::string>();
      } else if (key == "clip_gradient_norm") {
        if (v.is_null()) {
          cfg.clip_gradient_norm.reset();
        } else {
          cfg.clip_gradient_norm = v.get<double>();
        }
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown train config field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("train config: ") + e.what());
  }
  if (cfg.batch_size_blocks == 0) throw Error(ErrorCode::kInvalidConfig, "batch_size_blocks must be >= 1");
  if (cfg.eval_every == 0) throw Error(ErrorCode::kInvalidConfig, "eval_every must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning_rate must be > 0");
  if (cfg.clip_gradient_norm && !(*cfg.clip_gradient_norm > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "clip_gradient_norm must be > 0");
  }
  return cfg;
}

nlohmann::json EvalRecordToJson(const EvalRecord& r) {
  return {{"step", r.step},
          {"train_loss", r.train_loss},
          {"val_mape_per_task", r.val_mape_per_task},
          {"val_mape_mean", r.val_mape_mean},
          {"selection_set", r.selection_set}};
}

TrainResult Train(const TrainInputs& inputs, const TrainConfig& cfg,
                  const model::ModelConfig& mcfg, const TrainHooks& hooks) {
  model::ValidateModelConfig(mcfg);
  if (inputs.train.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training samples");
  if (cfg.batch_size_blocks == 0 || cfg.eval_every == 0) {
    throw Error(ErrorCode::kInvalidConfig, "batch_size_blocks and eval_every must be >= 1");
  }

  model::ModelParams params = model::InitModel(mcfg, inputs.vocab.size(), cfg.seed);
  std::vector<size_t> task_ids;
  std::vector<std::string> tasks = cfg.tasks.empty() ? mcfg.task_names : cfg.tasks;
  for (const auto& t : tasks) task_ids.push_back(params.TaskIndex(t));
  for (const auto* set : {&inputs.train, &inputs.validation}) {
    for (const auto& s : *set) {
      for (const auto& t : tasks) {
        if (!s.labels.contains(t)) {
          throw Error(ErrorCode::kMissingTaskLabel, "block '" + s.block_id + "' has no '" + t + "' label");
        }
      }
    }
  }

  const bool has_validation = !inputs.validation.empty();
  std::vector<const Sample*> selection;
  for (const auto& s : has_validation ? inputs.validation : inputs.train) selection.push_back(&s);

  // The stored config omits the output directory so checkpoints do not
  // depend on where they were written.
  TrainConfig stored_cfg = cfg;
  stored_cfg.checkpoint_dir.clear();

  std::ofstream metrics_log;
  std::string best_path;
  if (!cfg.checkpoint_dir.empty()) {
    std::filesystem::create_directories(cfg.checkpoint_dir);
    best_path = (std::filesystem::path(cfg.checkpoint_dir) / "best.ckpt").string();
    const auto log_path = std::filesystem::path(cfg.checkpoint_dir) / "metrics.jsonl";
    metrics_log.open(log_path, std::ios::trunc);
    if (!metrics_log) throw Error(ErrorCode::kIo, "cannot open '" + log_path.string() + "'");
  }

  tensor::Adam adam(params.params, {.learning_rate = cfg.learning_rate});
  Rng shuffle_rng(SplitMix64(cfg.seed ^ kShuffleSalt));
  std::vector<size_t> order(inputs.train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();

  TrainResult result;
  result.best.vocab = inputs.vocab;
  result.best.encoder = inputs.encoder;
  std::optional<double> best_mape;
  double loss_since_eval = 0.0;
  size_t steps_since_eval = 0;
  bool stop = false;

  auto evaluate = [&](size_t step) {
    const eval::Evaluation ev = eval::Evaluate(selection, params);
    EvalRecord rec;
    rec.step = step;
    rec.train_loss = steps_since_eval ? loss_since_eval / static_cast<double>(steps_since_eval) : 0.0;
    rec.selection_set = has_validation ? "validation" : "train";
    double sum = 0.0;
    for (size_t t : task_ids) {
      const double m = ev.tasks.at(mcfg.task_names[t]).metrics.mape;
      rec.val_mape_per_task[mcfg.task_names[t]] = m;
      sum += m;
    }
    rec.val_mape_mean = sum / static_cast<double>(task_ids.size());
    loss_since_eval = 0.0;
    steps_since_eval = 0;
    result.log.push_back(rec);
    if (metrics_log.is_open()) {
      metrics_log << EvalRecordToJson(rec).dump() << "\n";
      metrics_log.flush();
    }
    if (!std::isfinite(rec.val_mape_mean)) {
      throw Error(ErrorCode::kNonFiniteLoss, "selection MAPE is not finite at step " + std::to_string(step));
    }
    if (!best_mape || rec.val_mape_mean < *best_mape) {
      best_mape = rec.val_mape_mean;
      result.best.model = params;
      result.best.info = {
          {"step", step},
          {"validation_mape", rec.val_mape_per_task},
          {"validation_mape_mean", rec.val_mape_mean},
          {"selection_set", rec.selection_set},
          {"train_config", TrainConfigToJson(stored_cfg)},
          {"split", inputs.split_info},
      };
      if (!best_path.empty()) model::SaveBundle(best_path, result.best);
    }
    if (hooks.on_eval && !hooks.on_eval(rec)) stop = true;
  };

  for (size_t step = 1; step <= cfg.max_steps && !stop; ++step) {
    if (cursor >= order.size()) {
      Shuffle(order, shuffle_rng);
      cursor = 0;
    }
    const size_t n = std::min(cfg.batch_size_blocks, order.size() - cursor);
    std::vector<const Sample*> batch;
    std::vector<const graph::BlockGraph*> graphs;
    for (size_t i = 0; i < n; ++i) {
      batch.push_back(&inputs.train[order[cursor + i]]);
      graphs.push_back(&batch.back()->graph);
    }
    cursor += n;

    double loss_value = 0.0;
    std::vector<tensor::Tensor> grads;
    try {
      tensor::Tape tape;
      model::Network net(tape, params, true);
      const model::GraphBatch gb = model::MakeBatch(graphs, params.vocab_size);
      const auto state = net.Run(gb);
      tensor::Var total;
      for (size_t k = 0; k < task_ids.size(); ++k) {
        std::vector<double> actual;
        actual.reserve(n);
        for (const auto* s : batch) actual.push_back(s->labels.at(tasks[k]));
        tensor::Var task_loss = BatchLoss(cfg.loss, net.Decode(state, gb, task_ids[k]), actual);
        total = k == 0 ? task_loss : tensor::ops::Add(total, task_loss);
      }
      loss_value = total.value().item();
      if (!std::isfinite(loss_value)) throw Error(ErrorCode::kNonFiniteValue, "loss");
      tape.Backward(total);
      grads.reserve(params.params.size());
      for (const auto& v : net.parameters()) grads.push_back(v.grad());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteValue) throw;
      throw Error(ErrorCode::kNonFiniteLoss, "step " + std::to_string(step) + " (" + e.what() +
                                                 "); batch blocks: " + JoinIds(batch));
    }
    if (cfg.clip_gradient_norm) tensor::ClipGlobalNorm(grads, *cfg.clip_gradient_norm);
    adam.Step(params.params, grads);
    result.steps = step;
    loss_since_eval += loss_value;
    ++steps_since_eval;
    if (hooks.on_step && !hooks.on_step(step, loss_value)) stop = true;
    if (step % cfg.eval_every == 0 || step == cfg.max_steps || stop) evaluate(step);
  }
  if (!best_mape) evaluate(0);
  result.last = std::move(params);
  return result;
}

}  // namespace blockgnn::train
