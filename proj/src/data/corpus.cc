#include "blockgnn/data/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "blockgnn/asm/record.h"
#include "blockgnn/asm/text_parser.h"
#include "blockgnn/error.h"

namespace blockgnn::data {
namespace {

std::string Where(const std::string& source, size_t line) {
  return source + ":" + std::to_string(line);
}

std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return in;
}

nlohmann::json ParseLine(const std::string& line, const std::string& where) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, where + ": not JSON (" + e.what() + ")");
  }
}

asm_core::BasicBlock ParseInstructions(const nlohmann::json& value, const std::string& id,
                                       const std::string& where, const LoadOptions& options) {
  try {
    if (value.is_string()) return asm_core::ParseBlockText(value.get<std::string>(), id, options.semantics);
    asm_core::BasicBlock block{id, asm_core::ParseInstructionList(value, "$.instructions")};
    if (block.instructions.empty()) throw Error(ErrorCode::kEmptyBlock, "no instructions");
    return block;
  } catch (const Error& e) {
    throw Error(e.code(), where + " (block '" + id + "'): " + e.what());
  }
}

const std::set<std::string>& Allowed(const LoadOptions& options) {
  return options.microarchitectures.empty() ? DefaultMicroarchitectures()
                                            : options.microarchitectures;
}

}  // namespace

const std::set<std::string>& DefaultMicroarchitectures() {
  static const std::set<std::string> kNames = {"ivybridge", "haswell", "skylake"};
  return kNames;
}

Corpus ReadJsonlCorpus(std::istream& in, const std::string& source, const LoadOptions& options) {
  Corpus corpus;
  std::map<std::string, size_t> index;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = Where(source, line_no);
    const nlohmann::json j = ParseLine(line, where);
    asm_core::CheckObjectKeys(j, "$", {"id", "instructions", "labels"});
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("instructions")) {
      throw Error(ErrorCode::kSchemaViolation, where + ": needs string 'id' and 'instructions'");
    }
    CorpusRecord rec;
    rec.block_id = j["id"].get<std::string>();
    rec.block = ParseInstructions(j["instructions"], rec.block_id, where, options);
    if (j.contains("labels")) {
      if (!j["labels"].is_object()) {
        throw Error(ErrorCode::kSchemaViolation, where + ": 'labels' must be an object");
      }
      for (const auto& [uarch, v] : j["labels"].items()) {
        if (!Allowed(options).contains(uarch)) {
          throw Error(ErrorCode::kSchemaViolation, where + ": unknown microarchitecture '" + uarch + "'");
        }
        if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() <= 0.0) {
          throw Error(ErrorCode::kMalformedRow, where + ": label '" + uarch + "' must be a positive number");
        }
        rec.labels[uarch] = v.get<double>();
      }
    }
    ++corpus.stats.rows;
    auto [it, inserted] = index.emplace(rec.block_id, corpus.records.size());
    if (!inserted) {
      if (corpus.records[it->second] == rec) {
        ++corpus.stats.duplicate_rows;
        continue;
      }
      throw Error(ErrorCode::kDuplicateKeyConflict, where + ": id '" + rec.block_id + "' repeated with different content");
    }
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus LoadJsonlCorpus(const std::string& path, const LoadOptions& options) {
  std::ifstream in = OpenInput(path);
  return ReadJsonlCorpus(in, path, options);
}

std::map<std::string, double> ReadThroughputCsv(std::istream& in, const std::string& source,
                                                size_t* duplicate_rows) {
  std::map<std::string, double> out;
  std::string line;
  size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const std::string where = Where(source, line_no);
    const size_t comma = trimmed.find(',');
    if (comma == std::string::npos || trimmed.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::kMalformedRow, where + ": expected 'hex,throughput'");
    }
    std::string hex = Trim(std::string_view(trimmed).substr(0, comma));
    const std::string value_text = Trim(std::string_view(trimmed).substr(comma + 1));
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
    const bool numeric = ec == std::errc() && ptr == value_text.data() + value_text.size();
    if (!numeric && first) {
      first = false;
      continue;  // header
    }
    first = false;
    if (!numeric) throw Error(ErrorCode::kMalformedRow, where + ": throughput '" + value_text + "' is not a number");
    if (!std::isfinite(value) || value <= 0.0) {
      throw Error(ErrorCode::kMalformedRow, where + ": throughput must be > 0");
    }
    if (hex.empty() || !std::all_of(hex.begin(), hex.end(),
                                    [](unsigned char c) { return std::isxdigit(c) != 0; })) {
      throw Error(ErrorCode::kMalformedRow, where + ": '" + hex + "' is not a hex string");
    }
    std::transform(hex.begin(), hex.end(), hex.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto [it, inserted] = out.emplace(hex, value);
    if (!inserted) {
      if (it->second != value) {
        throw Error(ErrorCode::kDuplicateKeyConflict,
                    where + ": key '" + hex + "' has throughputs " + std::to_string(it->second) +
                        " and " + std::to_string(value));
      }
      if (duplicate_rows != nullptr) ++*duplicate_rows;
    }
  }
  return out;
}

std::map<std::string, asm_core::BasicBlock> ReadDisassembly(std::istream& in,
                                                            const std::string& source,
                                                            const LoadOptions& options) {
  std::map<std::string, asm_core::BasicBlock> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = Where(source, line_no);
    const nlohmann::json j = ParseLine(line, where);
    asm_core::CheckObjectKeys(j, "$", {"hex", "instructions"});
    if (!j.contains("hex") || !j["hex"].is_string() || !j.contains("instructions")) {
      throw Error(ErrorCode::kSchemaViolation, where + ": needs string 'hex' and 'instructions'");
    }
    std::string hex = j["hex"].get<std::string>();
    std::transform(hex.begin(), hex.end(), hex.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    asm_core::BasicBlock block = ParseInstructions(j["instructions"], hex, where, options);
    auto [it, inserted] = out.emplace(hex, block);
    if (!inserted && !(it->second == block)) {
      throw Error(ErrorCode::kDuplicateKeyConflict, where + ": hex '" + hex + "' disassembles differently");
    }
  }
  return out;
}

Corpus JoinCsvCorpus(
    const std::vector<std::pair<std::string, std::map<std::string, double>>>& labels,
    const std::map<std::string, asm_core::BasicBlock>& disassembly, const LoadOptions& options) {
  Corpus corpus;
  std::map<std::string, std::map<std::string, double>> joined;
  for (const auto& [uarch, table] : labels) {
    if (!Allowed(options).contains(uarch)) {
      throw Error(ErrorCode::kInvalidConfig, "unknown microarchitecture '" + uarch + "'");
    }
    for (const auto& [hex, value] : table) {
      auto [it, inserted] = joined[hex].emplace(uarch, value);
      if (!inserted && it->second != value) {
        throw Error(ErrorCode::kDuplicateKeyConflict,
                    "key '" + hex + "' has conflicting '" + uarch + "' throughputs");
      }
    }
    corpus.stats.rows += table.size();
  }
  for (auto& [hex, lab] : joined) {
    auto it = disassembly.find(hex);
    if (it == disassembly.end()) {
      ++corpus.stats.missing_disassembly;
      continue;
    }
    CorpusRecord rec{hex, it->second, lab};
    rec.block.id = hex;
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

Corpus LoadCsvCorpus(std::span<const CsvSource> sources, const std::string& disassembly_path,
                     const LoadOptions& options) {
  std::vector<std::pair<std::string, std::map<std::string, double>>> labels;
  size_t duplicates = 0;
  for (const auto& src : sources) {
    std::ifstream in = OpenInput(src.path);
    labels.emplace_back(src.microarchitecture, ReadThroughputCsv(in, src.path, &duplicates));
  }
  std::ifstream in = OpenInput(disassembly_path);
  Corpus corpus = JoinCsvCorpus(labels, ReadDisassembly(in, disassembly_path, options), options);
  corpus.stats.duplicate_rows = duplicates;
  return corpus;
}

void WriteJsonlCorpus(std::ostream& out, std::span<const CorpusRecord> records) {
  for (const auto& r : records) {
    const nlohmann::json j = {
        {"id", r.block_id},
        {"instructions", asm_core::InstructionListToJson(r.block.instructions)},
        {"labels", r.labels},
    };
    out << j.dump() << "\n";
  }
}

Materialized MaterializeSamples(std::span<const CorpusRecord> records,
                                const graph::Vocabulary& vocab,
                                const graph::EncoderConfig& encoder,
                                std::span<const std::string> required_tasks) {
  Materialized out;
  for (const auto& r : records) {
    const bool complete = std::all_of(required_tasks.begin(), required_tasks.end(),
                                      [&](const std::string& t) { return r.labels.contains(t); });
    if (!complete) {
      ++out.dropped_missing_labels;
      continue;
    }
    try {
      out.samples.push_back({r.block_id, graph::Encode(r.block, vocab, encoder), r.labels});
    } catch (const Error& e) {
      throw Error(e.code(), "block '" + r.block_id + "': " + e.what());
    }
  }
  return out;
}

std::vector<asm_core::BasicBlock> Blocks(std::span<const CorpusRecord> records) {
  std::vector<asm_core::BasicBlock> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.block);
  return out;
}

}  // namespace blockgnn::data
