#include "blockgnn/model/checkpoint.h"

#include "blockgnn/error.h"

namespace blockgnn::model {

tensor::Checkpoint ToCheckpoint(const ModelBundle& bundle) {
  tensor::Checkpoint cp;
  cp.metadata = {
      {"model_config", ModelConfigToJson(bundle.model.config)},
      {"encoder_config", graph::EncoderConfigToJson(bundle.encoder)},
      {"vocabulary", bundle.vocab.ToJson()},
      {"info", bundle.info},
  };
  cp.parameters = bundle.model.params;
  return cp;
}

ModelBundle FromCheckpoint(const tensor::Checkpoint& checkpoint) {
  ModelBundle bundle;
  const auto& meta = checkpoint.metadata;
  try {
    bundle.model.config = ModelConfigFromJson(meta.at("model_config"));
    bundle.encoder = graph::EncoderConfigFromJson(meta.at("encoder_config"));
    bundle.vocab = graph::Vocabulary::FromJson(meta.at("vocabulary"));
    bundle.info = meta.value("info", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("metadata: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kBadCheckpoint, e.what());
  }
  bundle.model.vocab_size = bundle.vocab.size();
  const auto manifest = ParameterManifest(bundle.model.config, bundle.model.vocab_size);
  const auto& params = checkpoint.parameters;
  if (manifest.size() != params.size()) {
    throw Error(ErrorCode::kBadCheckpoint,
                "expected " + std::to_string(manifest.size()) + " parameters, found " +
                    std::to_string(params.size()));
  }
  for (size_t i = 0; i < manifest.size(); ++i) {
    const auto& entry = params.entry(i);
    if (entry.name != manifest[i].first || entry.value.shape() != manifest[i].second) {
      throw Error(ErrorCode::kBadCheckpoint,
                  "parameter " + std::to_string(i) + " is '" + entry.name + "' " +
                      tensor::ShapeString(entry.value.shape()) + ", expected '" +
                      manifest[i].first + "' " + tensor::ShapeString(manifest[i].second));
    }
    if (!entry.value.AllFinite()) {
      throw Error(ErrorCode::kBadCheckpoint, "parameter '" + entry.name + "' is not finite");
    }
  }
  bundle.model.params = params;
  return bundle;
}

void SaveBundle(const std::string& path, const ModelBundle& bundle) {
  tensor::WriteCheckpoint(path, ToCheckpoint(bundle));
}

ModelBundle LoadBundle(const std::string& path) {
  return FromCheckpoint(tensor::ReadCheckpoint(path));
}

}  // namespace blockgnn::model
