#include "blockgnn/cli/app.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "blockgnn/asm/text_parser.h"
#include "blockgnn/cli/pipeline.h"
#include "blockgnn/data/synthetic.h"
#include "blockgnn/graph/export.h"

namespace blockgnn::cli {
namespace {

namespace fs = std::filesystem;

struct Args {
  std::string config;
  std::string checkpoint;
  std::vector<std::string> corpus;
  std::string format;
  std::string disasm;
  std::string tasks;
  std::optional<uint64_t> seed;
  std::optional<size_t> max_steps;
  std::string out;
  // encode
  std::string input;
  std::string vocab;
  std::string emit = "dot";
  // evaluate
  std::string split = "all";
  std::string report_dir;
  size_t bins = 40;
  double max_cycles = 10.0;
  // sweep
  std::string kind = "iterations";
  std::string values;
  // synth
  size_t num_blocks = 1000;
  size_t min_instructions = 1;
  size_t max_instructions = 8;
  std::string csv_dir;
};

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void WriteText(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig ResolveConfig(const Args& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : LoadExperimentConfig(a.config);
  if (!a.corpus.empty()) cfg.data.corpus = a.corpus;
  if (!a.format.empty()) cfg.data.format = ParseFormat(a.format);
  if (!a.disasm.empty()) cfg.data.disasm = a.disasm;
  if (!a.tasks.empty()) {
    cfg.model.task_names = SplitList(a.tasks);
    cfg.train.tasks.clear();
    model::ValidateModelConfig(cfg.model);
  }
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.max_steps) cfg.train.max_steps = *a.max_steps;
  return cfg;
}

DataConfig ResolveData(const Args& a) {
  DataConfig d = a.config.empty() ? DataConfig{} : LoadExperimentConfig(a.config).data;
  if (!a.corpus.empty()) d.corpus = a.corpus;
  if (!a.format.empty()) d.format = ParseFormat(a.format);
  if (!a.disasm.empty()) d.disasm = a.disasm;
  return d;
}

graph::EncoderConfig ResolveEncoder(const Args& a) {
  return a.config.empty() ? graph::EncoderConfig{} : LoadExperimentConfig(a.config).encoder;
}

int CmdVocab(const Args& a, std::ostream& out, std::ostream& err) {
  const data::Corpus corpus = LoadCorpus(ResolveData(a));
  const auto vocab = graph::BuildVocabulary(data::Blocks(corpus.records));
  WriteText(a.out, vocab.ToJson().dump() + "\n", out);
  err << "vocabulary: " << vocab.size() << " tokens from " << corpus.records.size() << " blocks\n";
  return kExitOk;
}

int CmdEncode(const Args& a, std::ostream& out, std::ostream& err) {
  const std::string text = ReadText(a.input);
  const size_t first = text.find_first_not_of(" \t\r\n");
  asm_core::BasicBlock block;
  if (first != std::string::npos && text[first] == '{') {
    std::istringstream in(text);
    data::Corpus c = data::ReadJsonlCorpus(in, a.input);
    if (c.records.empty()) throw Error(ErrorCode::kEmptyBlock, "no record in '" + a.input + "'");
    block = c.records.front().block;
  } else {
    block = asm_core::ParseBlockText(text, fs::path(a.input).stem().string());
  }
  graph::Vocabulary vocab;
  if (!a.vocab.empty()) {
    try {
      vocab = graph::Vocabulary::FromJson(nlohmann::json::parse(ReadText(a.vocab)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation, "vocabulary '" + a.vocab + "': " + e.what());
    }
  } else {
    const asm_core::BasicBlock blocks[] = {block};
    vocab = graph::BuildVocabulary(blocks);
  }
  const graph::BlockGraph g = graph::Encode(block, vocab, ResolveEncoder(a));
  const auto format = a.emit == "json" ? graph::ExportFormat::kJson : graph::ExportFormat::kDot;
  WriteText(a.out, graph::ExportGraph(g, vocab, format), out);
  err << "encoded '" << g.block_id << "': " << g.nodes.size() << " nodes, " << g.edges.size()
      << " edges\n";
  return kExitOk;
}

nlohmann::json TrainSummary(const Experiment& ex, const train::TrainResult& r) {
  return {
      {"steps", r.steps},
      {"best_step", r.best.info.value("step", 0)},
      {"validation_mape", r.best.info.value("validation_mape", nlohmann::json::object())},
      {"validation_mape_mean", r.best.info.value("validation_mape_mean", 0.0)},
      {"selection_set", r.best.info.value("selection_set", "")},
      {"samples",
       {{"train", ex.train.size()}, {"validation", ex.validation.size()}, {"test", ex.test.size()}}},
      {"dropped_missing_labels", ex.parts.dropped_missing_labels},
      {"vocabulary_size", ex.vocab.size()},
  };
}

int CmdTrain(const Args& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = ResolveConfig(a);
  cfg.train.checkpoint_dir = a.out;
  const data::Corpus corpus = LoadCorpus(cfg.data);
  if (corpus.stats.missing_disassembly > 0) {
    err << "warning: " << corpus.stats.missing_disassembly << " blocks skipped without disassembly\n";
  }
  const Experiment ex = PrepareExperiment(corpus.records, cfg);
  err << "training on " << ex.train.size() << " blocks, validating on " << ex.validation.size()
      << ", holding out " << ex.test.size() << "\n";
  const auto result = RunTraining(ex, cfg, {.on_eval = [&](const train::EvalRecord& rec) {
                                    err << "step " << rec.step << " train_loss " << rec.train_loss
                                        << " " << rec.selection_set << "_mape "
                                        << rec.val_mape_mean << "\n";
                                    return true;
                                  }});
  nlohmann::json summary = TrainSummary(ex, result);
  summary["checkpoint"] = (fs::path(a.out) / "best.ckpt").string();
  summary["metrics"] = (fs::path(a.out) / "metrics.jsonl").string();
  out << summary.dump() << "\n";
  return kExitOk;
}

int CmdPredict(const Args& a, std::ostream& out, std::ostream& err) {
  const model::ModelBundle bundle = model::LoadBundle(a.checkpoint);
  const data::Corpus corpus = LoadCorpus(ResolveData(a));
  const auto samples = data::MaterializeSamples(corpus.records, bundle.vocab, bundle.encoder, {});
  std::vector<const graph::BlockGraph*> graphs;
  for (const auto& s : samples.samples) graphs.push_back(&s.graph);
  const auto predictions = model::PredictMany(graphs, bundle.model, eval::kEvalBatchSize);
  std::string text;
  for (size_t i = 0; i < samples.samples.size(); ++i) {
    nlohmann::json p = nlohmann::json::object();
    for (size_t t = 0; t < bundle.model.config.task_names.size(); ++t) {
      p[bundle.model.config.task_names[t]] = predictions[i][t];
    }
    text += nlohmann::json{{"id", samples.samples[i].block_id}, {"predictions", p}}.dump() + "\n";
  }
  WriteText(a.out, text, out);
  err << "predicted " << samples.samples.size() << " blocks\n";
  return kExitOk;
}

std::vector<data::CorpusRecord> SelectPart(const model::ModelBundle& bundle,
                                           const std::vector<data::CorpusRecord>& records,
                                           SplitPart part) {
  if (part == SplitPart::kAll) return records;
  if (!bundle.info.contains("split")) {
    throw Error(ErrorCode::kBadCheckpoint, "checkpoint has no split information");
  }
  PartitionedRecords parts = PartitionFromInfo(records, bundle.info["split"]);
  switch (part) {
    case SplitPart::kTrain: return parts.train;
    case SplitPart::kValidation: return parts.validation;
    case SplitPart::kTest: return parts.test;
    case SplitPart::kAll: break;
  }
  return records;
}

void WriteReports(const std::string& dir, const eval::Evaluation& ev, size_t bins,
                  double max_cycles) {
  fs::create_directories(dir);
  for (const auto& [task, te] : ev.tasks) {
    std::vector<double> p, y;
    for (double v : te.predicted) p.push_back(eval::NormalizeToSingleRun(v));
    for (double v : te.actual) y.push_back(eval::NormalizeToSingleRun(v));
    std::ostringstream sink;
    WriteText((fs::path(dir) / ("heatmap_" + task + ".csv")).string(),
              eval::HeatmapCsv(p, y, max_cycles, bins), sink);
    WriteText((fs::path(dir) / ("error_distribution_" + task + ".csv")).string(),
              eval::ErrorDistributionCsv(eval::RelativeErrors(te.predicted, te.actual), bins),
              sink);
  }
}

int CmdEvaluate(const Args& a, std::ostream& out, std::ostream& err) {
  const model::ModelBundle bundle = model::LoadBundle(a.checkpoint);
  const data::Corpus corpus = LoadCorpus(ResolveData(a));
  const auto records = SelectPart(bundle, corpus.records, ParseSplitPart(a.split));
  const eval::Evaluation ev = EvaluateRecords(bundle, records);
  nlohmann::json report = eval::EvaluationToJson(ev);
  report["split"] = a.split;
  report["checkpoint_step"] = bundle.info.value("step", 0);
  WriteText(a.out, report.dump() + "\n", out);
  if (!a.report_dir.empty()) WriteReports(a.report_dir, ev, a.bins, a.max_cycles);
  for (const auto& [task, te] : ev.tasks) {
    err << task << ": n=" << te.metrics.count << " MAPE " << te.metrics.mape << "\n";
  }
  return kExitOk;
}

int CmdSweep(const Args& a, std::ostream& out, std::ostream& err) {
  if (a.out.empty()) throw Error(ErrorCode::kInvalidConfig, "sweep needs --out <dir>");
  const ExperimentConfig base = ResolveConfig(a);
  std::vector<std::string> values = SplitList(a.values);
  if (a.kind == "iterations") {
    if (values.empty()) values = {"1", "2", "4", "8", "12"};
  } else if (a.kind == "loss") {
    if (values.empty()) values = {"mape", "mse", "relative_mse", "huber", "relative_huber"};
  } else {
    throw Error(ErrorCode::kInvalidConfig, "unknown sweep kind '" + a.kind + "'");
  }
  const data::Corpus corpus = LoadCorpus(base.data);
  // One split for every cell.
  const Experiment ex = PrepareExperiment(corpus.records, base);
  fs::create_directories(a.out);
  std::string rows;
  for (const auto& v : values) {
    ExperimentConfig cfg = base;
    nlohmann::json value;
    if (a.kind == "iterations") {
      size_t n = 0;
      try {
        n = std::stoul(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidConfig, "iteration count '" + v + "' is not a number");
      }
      cfg.model.num_message_passing_iterations = n;
      model::ValidateModelConfig(cfg.model);
      value = n;
    } else {
      cfg.train.loss = train::LossKindFromName(v);
      value = v;
    }
    cfg.train.checkpoint_dir = (fs::path(a.out) / (a.kind + "-" + v)).string();
    err << "sweep cell " << a.kind << "=" << v << "\n";
    const auto result = RunTraining(ex, cfg);
    const bool has_test = !ex.test.empty();
    std::vector<const train::Sample*> eval_set;
    for (const auto& s : has_test ? ex.test : ex.train) eval_set.push_back(&s);
    const eval::Evaluation ev = eval::Evaluate(eval_set, result.best.model);
    nlohmann::json row = {
        {"kind", a.kind},
        {"value", value},
        {"steps", result.steps},
        {"best_step", result.best.info.value("step", 0)},
        {"validation_mape", result.best.info.value("validation_mape", nlohmann::json::object())},
        {"eval_split", has_test ? "test" : "train"},
        {"eval", eval::EvaluationToJson(ev)},
        {"checkpoint", (fs::path(cfg.train.checkpoint_dir) / "best.ckpt").string()},
    };
    rows += row.dump() + "\n";
    err << "  " << row["eval_split"].get<std::string>() << " mean MAPE " << ev.mean_mape << "\n";
  }
  WriteText((fs::path(a.out) / "sweep.jsonl").string(), rows, out);
  out << rows;
  return kExitOk;
}

int CmdSynth(const Args& a, std::ostream& out, std::ostream& err) {
  data::SyntheticOptions opts;
  opts.num_blocks = a.num_blocks;
  opts.seed = a.seed.value_or(0);
  opts.min_instructions = a.min_instructions;
  opts.max_instructions = a.max_instructions;
  if (!a.tasks.empty()) opts.microarchitectures = SplitList(a.tasks);
  const auto records = data::GenerateSynthetic(opts);
  std::ostringstream text;
  data::WriteJsonlCorpus(text, records);
  WriteText(a.out, text.str(), out);
  if (!a.csv_dir.empty()) data::WriteCsvCorpus(a.csv_dir, records, opts.microarchitectures);
  err << "generated " << records.size() << " blocks\n";
  return kExitOk;
}

void AddDataOptions(CLI::App* cmd, Args& a) {
  cmd->add_option("--corpus", a.corpus,
                  "Corpus path (jsonl) or <uarch>=<path> (csv); repeatable");
  cmd->add_option("--format", a.format, "Corpus format")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--disasm", a.disasm, "Disassembly sidecar for csv corpora");
  cmd->add_option("--config", a.config, "Experiment config (JSON)");
}

}  // namespace

int ExitCodeFor(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return kExitConfig;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kNumeric: return kExitNumeric;
  }
  return kExitOther;
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Args a;
  CLI::App app{"Basic-block throughput estimation with graph neural networks", "blockgnn"};
  app.require_subcommand(1);

  auto* vocab = app.add_subcommand("vocab", "Build a vocabulary from a corpus");
  AddDataOptions(vocab, a);
  vocab->add_option("--out", a.out, "Output file (default: stdout)");

  auto* encode = app.add_subcommand("encode", "Encode one block as a graph");
  encode->add_option("--input", a.input, "Assembly text or JSON record file")->required();
  encode->add_option("--emit", a.emit, "Output format")->check(CLI::IsMember({"dot", "json"}));
  encode->add_option("--vocab", a.vocab, "Vocabulary file (default: built from the block)");
  encode->add_option("--config", a.config, "Experiment config (encoder section is used)");
  encode->add_option("--out", a.out, "Output file (default: stdout)");

  auto* trn = app.add_subcommand("train", "Train a model");
  AddDataOptions(trn, a);
  trn->add_option("--tasks", a.tasks, "Comma-separated task names");
  trn->add_option("--seed", a.seed, "Seed for initialization, shuffling and the split");
  trn->add_option("--max-steps", a.max_steps, "Override train.max_steps");
  trn->add_option("--out", a.out, "Output directory")->required();

  auto* predict = app.add_subcommand("predict", "Predict throughput for blocks");
  AddDataOptions(predict, a);
  predict->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  predict->add_option("--out", a.out, "Output file (default: stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on labeled blocks");
  AddDataOptions(evaluate, a);
  evaluate->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--split", a.split, "Partition to score")
      ->check(CLI::IsMember({"all", "train", "validation", "test"}));
  evaluate->add_option("--report-dir", a.report_dir, "Write heatmap and error CSVs here");
  evaluate->add_option("--bins", a.bins, "Histogram bins per axis")->check(CLI::PositiveNumber);
  evaluate->add_option("--max-cycles", a.max_cycles, "Heatmap range in cycles per iteration")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--out", a.out, "Output file (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over a parameter grid");
  AddDataOptions(sweep, a);
  sweep->add_option("--kind", a.kind, "Swept parameter")
      ->check(CLI::IsMember({"iterations", "loss"}));
  sweep->add_option("--values", a.values, "Comma-separated grid values");
  sweep->add_option("--tasks", a.tasks, "Comma-separated task names");
  sweep->add_option("--seed", a.seed, "Seed for initialization, shuffling and the split");
  sweep->add_option("--max-steps", a.max_steps, "Override train.max_steps");
  sweep->add_option("--out", a.out, "Output directory")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--num-blocks", a.num_blocks, "Number of blocks");
  synth->add_option("--seed", a.seed, "Generator seed");
  synth->add_option("--min-instructions", a.min_instructions, "Shortest block");
  synth->add_option("--max-instructions", a.max_instructions, "Longest block");
  synth->add_option("--tasks", a.tasks, "Comma-separated microarchitectures");
  synth->add_option("--csv-dir", a.csv_dir, "Also write per-uarch CSVs and a disassembly file");
  synth->add_option("--out", a.out, "Output corpus file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (vocab->parsed()) return CmdVocab(a, out, err);
    if (encode->parsed()) return CmdEncode(a, out, err);
    if (trn->parsed()) return CmdTrain(a, out, err);
    if (predict->parsed()) return CmdPredict(a, out, err);
    if (evaluate->parsed()) return CmdEvaluate(a, out, err);
    if (sweep->parsed()) return CmdSweep(a, out, err);
    if (synth->parsed()) return CmdSynth(a, out, err);
  } catch (const Error& e) {
    const char* names[] = {"config", "data", "numeric"};
    err << "error (" << names[static_cast<int>(e.category())] << "): " << e.what() << "\n";
    return ExitCodeFor(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}

}  // namespace blockgnn::cli
