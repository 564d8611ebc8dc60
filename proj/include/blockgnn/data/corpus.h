#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "blockgnn/asm/basic_block.h"
#include "blockgnn/asm/semantics.h"
#include "blockgnn/graph/encoder.h"
#include "blockgnn/graph/vocabulary.h"
#include "blockgnn/train/sample.h"
#include "json.hpp"

namespace blockgnn::data {

enum class CorpusFormat { kCsv, kJsonl };

// Microarchitecture names accepted as label keys by default.
const std::set<std::string>& DefaultMicroarchitectures();

// A block with its measured throughputs in cycles per 100 iterations.
struct CorpusRecord {
  std::string block_id;
  asm_core::BasicBlock block;
  std::map<std::string, double> labels;

  bool operator==(const CorpusRecord&) const = default;
};

struct LoadStats {
  size_t rows = 0;
  size_t duplicate_rows = 0;         // identical repeats dropped
  size_t missing_disassembly = 0;    // CSV keys without a sidecar entry
};

struct Corpus {
  std::vector<CorpusRecord> records;
  LoadStats stats;
};

struct LoadOptions {
  // Label keys must belong to this set; empty means DefaultMicroarchitectures().
  std::set<std::string> microarchitectures;
  // Used when instructions are given as assembly text.
  asm_core::SemanticsOptions semantics;
};

// Corpus JSON-lines: {"id": str, "instructions": [...] | str, "labels": {...}}.
// "instructions" is an asm-core record list or assembly text; "labels" may be
// omitted for unlabeled blocks. Records keep file order; an exact repeat of
// an id is dropped, a repeat with other content is
// Error(kDuplicateKeyConflict). Labels must be finite and > 0
// (Error(kMalformedRow) with the line number).
Corpus ReadJsonlCorpus(std::istream& in, const std::string& source,
                       const LoadOptions& options = {});
Corpus LoadJsonlCorpus(const std::string& path, const LoadOptions& options = {});

// Throughput CSV in the layout `hex,throughput`, optionally preceded by a
// header line. Hex keys are lowercased. Throws Error(kMalformedRow) with
// the line number and Error(kDuplicateKeyConflict).
std::map<std::string, double> ReadThroughputCsv(std::istream& in, const std::string& source,
                                                size_t* duplicate_rows = nullptr);

// Disassembly sidecar JSON-lines: {"hex": str, "instructions": [...] | str}.
std::map<std::string, asm_core::BasicBlock> ReadDisassembly(std::istream& in,
                                                            const std::string& source,
                                                            const LoadOptions& options = {});

struct CsvSource {
  std::string microarchitecture;
  std::string path;
};

// Joins per-microarchitecture CSVs by hex key and attaches the sidecar
// disassembly. Records are sorted by key; keys without disassembly are
// skipped and counted.
Corpus JoinCsvCorpus(const std::vector<std::pair<std::string, std::map<std::string, double>>>& labels,
                     const std::map<std::string, asm_core::BasicBlock>& disassembly,
                     const LoadOptions& options = {});
Corpus LoadCsvCorpus(std::span<const CsvSource> sources, const std::string& disassembly_path,
                     const LoadOptions& options = {});

void WriteJsonlCorpus(std::ostream& out, std::span<const CorpusRecord> records);

struct Materialized {
  std::vector<train::Sample> samples;
  size_t dropped_missing_labels = 0;
};

// Encodes every record carrying all `required_tasks`. Encoding failures are
// rethrown with the block id prepended to the message.
Materialized MaterializeSamples(std::span<const CorpusRecord> records,
                                const graph::Vocabulary& vocab,
                                const graph::EncoderConfig& encoder,
                                std::span<const std::string> required_tasks);

std::vector<asm_core::BasicBlock> Blocks(std::span<const CorpusRecord> records);

}  // namespace blockgnn::data
