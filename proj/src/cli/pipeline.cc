#include "blockgnn/cli/pipeline.h"

#include <fstream>
#include <sstream>

#include "blockgnn/asm/record.h"
#include "blockgnn/error.h"

namespace blockgnn::cli {
namespace {

DataConfig DataConfigFromJson(const nlohmann::json& value) {
  asm_core::CheckObjectKeys(value, "$.data", {"corpus", "format", "disasm", "holdout"});
  DataConfig d;
  if (value.contains("corpus")) {
    const auto& c = value["corpus"];
    if (c.is_string()) {
      d.corpus = {c.get<std::string>()};
    } else {
      d.corpus = c.get<std::vector<std::string>>();
    }
  }
  if (value.contains("format")) d.format = ParseFormat(value["format"].get<std::string>());
  if (value.contains("disasm")) d.disasm = value["disasm"].get<std::string>();
  if (value.contains("holdout")) d.holdout = value["holdout"].get<bool>();
  return d;
}

std::vector<std::string> RequiredTasks(const ExperimentConfig& cfg) {
  return cfg.train.tasks.empty() ? cfg.model.task_names : cfg.train.tasks;
}

std::vector<train::Sample> Encode(const std::vector<data::CorpusRecord>& records,
                                  const graph::Vocabulary& vocab,
                                  const graph::EncoderConfig& encoder) {
  return data::MaterializeSamples(records, vocab, encoder, {}).samples;
}

}  // namespace

data::CorpusFormat ParseFormat(const std::string& name) {
  if (name == "jsonl") return data::CorpusFormat::kJsonl;
  if (name == "csv") return data::CorpusFormat::kCsv;
  throw Error(ErrorCode::kInvalidConfig, "unknown corpus format '" + name + "'");
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& value) {
  ExperimentConfig cfg;
  try {
    asm_core::CheckObjectKeys(value, "$", {"model", "train", "encoder", "data"});
    if (value.contains("model")) cfg.model = model::ModelConfigFromJson(value["model"]);
    if (value.contains("train")) cfg.train = train::TrainConfigFromJson(value["train"]);
    if (value.contains("encoder")) cfg.encoder = graph::EncoderConfigFromJson(value["encoder"]);
    if (value.contains("data")) cfg.data = DataConfigFromJson(value["data"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::kConfig) throw;
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  return cfg;
}

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  return {
      {"model", model::ModelConfigToJson(cfg.model)},
      {"train", train::TrainConfigToJson(cfg.train)},
      {"encoder", graph::EncoderConfigToJson(cfg.encoder)},
      {"data",
       {{"corpus", cfg.data.corpus},
        {"format", cfg.data.format == data::CorpusFormat::kCsv ? "csv" : "jsonl"},
        {"disasm", cfg.data.disasm},
        {"holdout", cfg.data.holdout}}},
  };
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, "config '" + path + "' is not JSON: " + e.what());
  }
  return ExperimentConfigFromJson(j);
}

data::Corpus LoadCorpus(const DataConfig& d) {
  if (d.corpus.empty()) throw Error(ErrorCode::kInvalidConfig, "no corpus given");
  if (d.format == data::CorpusFormat::kJsonl) {
    data::Corpus out;
    for (const auto& path : d.corpus) {
      data::Corpus part = data::LoadJsonlCorpus(path);
      for (auto& r : part.records) out.records.push_back(std::move(r));
      out.stats.rows += part.stats.rows;
      out.stats.duplicate_rows += part.stats.duplicate_rows;
    }
    return out;
  }
  if (d.disasm.empty()) throw Error(ErrorCode::kInvalidConfig, "csv corpora need a disassembly file");
  std::vector<data::CsvSource> sources;
  for (const auto& entry : d.corpus) {
    const size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
      throw Error(ErrorCode::kInvalidConfig, "csv corpus '" + entry + "' must be <uarch>=<path>");
    }
    sources.push_back({entry.substr(0, eq), entry.substr(eq + 1)});
  }
  return data::LoadCsvCorpus(sources, d.disasm);
}

SplitPart ParseSplitPart(const std::string& name) {
  if (name == "all") return SplitPart::kAll;
  if (name == "train") return SplitPart::kTrain;
  if (name == "validation") return SplitPart::kValidation;
  if (name == "test") return SplitPart::kTest;
  throw Error(ErrorCode::kInvalidConfig, "unknown split '" + name + "'");
}

PartitionedRecords PartitionRecords(const std::vector<data::CorpusRecord>& records,
                                    const std::vector<std::string>& required_tasks, uint64_t seed,
                                    bool holdout) {
  PartitionedRecords out;
  out.split_info = {{"seed", seed}, {"holdout", holdout}, {"required_tasks", required_tasks}};
  std::vector<const data::CorpusRecord*> kept;
  for (const auto& r : records) {
    bool complete = true;
    for (const auto& t : required_tasks) complete = complete && r.labels.contains(t);
    if (complete) {
      kept.push_back(&r);
    } else {
      ++out.dropped_missing_labels;
    }
  }
  if (kept.empty()) throw Error(ErrorCode::kEmptyCorpus, "no block carries every required label");
  if (!holdout) {
    for (const auto* r : kept) out.train.push_back(*r);
    return out;
  }
  std::vector<std::string> ids;
  for (const auto* r : kept) ids.push_back(r->block_id);
  const train::Split split = train::SplitByHash(ids, seed);
  for (size_t i : split.train) out.train.push_back(*kept[i]);
  for (size_t i : split.validation) out.validation.push_back(*kept[i]);
  for (size_t i : split.test) out.test.push_back(*kept[i]);
  return out;
}

PartitionedRecords PartitionFromInfo(const std::vector<data::CorpusRecord>& records,
                                     const nlohmann::json& split_info) {
  try {
    return PartitionRecords(records, split_info.at("required_tasks").get<std::vector<std::string>>(),
                            split_info.at("seed").get<uint64_t>(),
                            split_info.at("holdout").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("split info: ") + e.what());
  }
}

Experiment PrepareExperiment(const std::vector<data::CorpusRecord>& records,
                             const ExperimentConfig& cfg) {
  Experiment ex;
  ex.parts = PartitionRecords(records, RequiredTasks(cfg), cfg.train.seed, cfg.data.holdout);
  ex.vocab = graph::BuildVocabulary(data::Blocks(ex.parts.train));
  ex.train = Encode(ex.parts.train, ex.vocab, cfg.encoder);
  ex.validation = Encode(ex.parts.validation, ex.vocab, cfg.encoder);
  ex.test = Encode(ex.parts.test, ex.vocab, cfg.encoder);
  return ex;
}

train::TrainResult RunTraining(const Experiment& experiment, const ExperimentConfig& cfg,
                               const train::TrainHooks& hooks) {
  train::TrainInputs inputs{experiment.train, experiment.validation, experiment.vocab,
                            cfg.encoder, experiment.parts.split_info};
  return train::Train(inputs, cfg.train, cfg.model, hooks);
}

eval::Evaluation EvaluateRecords(const model::ModelBundle& bundle,
                                 const std::vector<data::CorpusRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyCorpus, "nothing to evaluate");
  const auto samples = Encode(records, bundle.vocab, bundle.encoder);
  std::vector<const train::Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  return eval::Evaluate(ptrs, bundle.model);
}

}  // namespace blockgnn::cli
