#pragma once

#include <string>

#include "blockgnn/graph/encoder.h"
#include "blockgnn/graph/vocabulary.h"
#include "blockgnn/model/model.h"
#include "blockgnn/tensor/parameters.h"
#include "json.hpp"

namespace blockgnn::model {

// Everything needed to run a trained model on new blocks.
struct ModelBundle {
  ModelParams model;
  graph::Vocabulary vocab;
  graph::EncoderConfig encoder;
  // Free-form training metadata (validation MAPE, step, split seed, ...).
  nlohmann::json info = nlohmann::json::object();
};

tensor::Checkpoint ToCheckpoint(const ModelBundle& bundle);
// Validates the embedded configs and that the parameter manifest matches
// the one implied by the model config. Throws Error(kBadCheckpoint).
ModelBundle FromCheckpoint(const tensor::Checkpoint& checkpoint);

void SaveBundle(const std::string& path, const ModelBundle& bundle);
ModelBundle LoadBundle(const std::string& path);

}  // namespace blockgnn::model
