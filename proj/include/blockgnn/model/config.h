#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace blockgnn::model {

struct ModelConfig {
  size_t node_embedding_size = 256;
  size_t edge_embedding_size = 256;
  size_t global_embedding_size = 256;
  // Widths of the hidden layers of each update MLP; the output layer maps
  // to the embedding size of the updated entity.
  std::vector<size_t> update_hidden_layers = {256, 256};
  // Widths of the hidden layers of each decoder MLP; output is one scalar.
  std::vector<size_t> decoder_hidden_layers = {256, 256};
  size_t num_message_passing_iterations = 8;
  bool use_layer_norm = true;
  bool use_residual = true;
  // When false the edge and node updates do not read the global vector.
  bool use_global_in_updates = true;
  std::vector<std::string> task_names = {"haswell"};

  bool operator==(const ModelConfig&) const = default;

  // Copy with every embedding and hidden width set to `size`.
  ModelConfig Scaled(size_t size) const;
};

// Throws Error(kInvalidConfig) when a size or iteration count is zero,
// task names are empty or repeated.
void ValidateModelConfig(const ModelConfig& cfg);

nlohmann::json ModelConfigToJson(const ModelConfig& cfg);
// Missing fields keep their defaults; unknown fields are rejected.
// Throws Error(kInvalidConfig).
ModelConfig ModelConfigFromJson(const nlohmann::json& value);

}  // namespace blockgnn::model
