#include "blockgnn/model/config.h"

#include <set>

#include "blockgnn/error.h"

namespace blockgnn::model {

ModelConfig ModelConfig::Scaled(size_t size) const {
  ModelConfig out = *this;
  out.node_embedding_size = size;
  out.edge_embedding_size = size;
  out.global_embedding_size = size;
  for (auto& w : out.update_hidden_layers) w = size;
  for (auto& w : out.decoder_hidden_layers) w = size;
  return out;
}

void ValidateModelConfig(const ModelConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (cfg.node_embedding_size == 0 || cfg.edge_embedding_size == 0 ||
      cfg.global_embedding_size == 0) {
    fail("embedding sizes must be >= 1");
  }
  for (size_t w : cfg.update_hidden_layers) {
    if (w == 0) fail("update_hidden_layers entries must be >= 1");
  }
  for (size_t w : cfg.decoder_hidden_layers) {
    if (w == 0) fail("decoder_hidden_layers entries must be >= 1");
  }
  if (cfg.num_message_passing_iterations == 0) fail("num_message_passing_iterations must be >= 1");
  if (cfg.task_names.empty()) fail("task_names must not be empty");
  std::set<std::string> seen;
  for (const auto& t : cfg.task_names) {
    if (t.empty()) fail("task names must be nonempty");
    if (!seen.insert(t).second) fail("duplicate task name '" + t + "'");
  }
}

namespace {

size_t SizeField(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::kInvalidConfig, "'" + key + "' must be a nonnegative integer");
  }
  return v.get<size_t>();
}

std::vector<size_t> SizeList(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) throw Error(ErrorCode::kInvalidConfig, "'" + key + "' must be an array");
  std::vector<size_t> out;
  for (const auto& x : v) out.push_back(SizeField(x, key));
  return out;
}

}  // namespace

nlohmann::json ModelConfigToJson(const ModelConfig& cfg) {
  return {
      {"node_embedding_size", cfg.node_embedding_size},
      {"edge_embedding_size", cfg.edge_embedding_size},
      {"global_embedding_size", cfg.global_embedding_size},
      {"update_hidden_layers", cfg.update_hidden_layers},
      {"decoder_hidden_layers", cfg.decoder_hidden_layers},
      {"num_message_passing_iterations", cfg.num_message_passing_iterations},
      {"use_layer_norm", cfg.use_layer_norm},
      {"use_residual", cfg.use_residual},
      {"use_global_in_updates", cfg.use_global_in_updates},
      {"task_names", cfg.task_names},
  };
}

ModelConfig ModelConfigFromJson(const nlohmann::json& value) {
  if (!value.is_object()) throw Error(ErrorCode::kInvalidConfig, "model config must be an object");
  ModelConfig cfg;
  try {
    for (const auto& [key, v] : value.items()) {
      if (key == "node_embedding_size") {
        cfg.node_embedding_size = SizeField(v, key);
      } else if (key == "edge_embedding_size") {
        cfg.edge_embedding_size = SizeField(v, key);
      } else if (key == "global_embedding_size") {
        cfg.global_embedding_size = SizeField(v, key);
      } else if (key == "update_hidden_layers") {
        cfg.update_hidden_layers = SizeList(v, key);
      } else if (key == "decoder_hidden_layers") {
        cfg.decoder_hidden_layers = SizeList(v, key);
      } else if (key == "num_message_passing_iterations") {
        cfg.num_message_passing_iterations = SizeField(v, key);
      } else if (key == "use_layer_norm") {
        cfg.use_layer_norm = v.get<bool>();
      } else if (key == "use_residual") {
        cfg.use_residual = v.get<bool>();
      } else if (key == "use_global_in_updates") {
        cfg.use_global_in_updates = v.get<bool>();
      } else if (key == "task_names") {
        cfg.task_names = v.get<std::vector<std::string>>();
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown model config field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("model config: ") + e.what());
  }
  ValidateModelConfig(cfg);
  return cfg;
}

}  // namespace blockgnn::model
