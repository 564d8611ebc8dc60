#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockgnn/asm/basic_block.h"
#include "blockgnn/data/corpus.h"

namespace blockgnn::data {

// Generator for labeled corpora with the shape of measured x86-64 basic
// block datasets. Labels come from a small analytic throughput model, so
// they are learnable but not trivially linear in the token counts.
struct SyntheticOptions {
  size_t num_blocks = 1000;
  uint64_t seed = 0;
  size_t min_instructions = 1;
  size_t max_instructions = 8;
  std::vector<std::string> microarchitectures = {"ivybridge", "haswell", "skylake"};
};

// Block ids are 16 hex digits derived from the block text; blocks are
// distinct. Throws Error(kInvalidConfig) for impossible options.
std::vector<CorpusRecord> GenerateSynthetic(const SyntheticOptions& options);

// Steady-state cycles per 100 iterations of `block` on `microarchitecture`
// under the analytic model: the maximum of the issue-width bound, per-port
// pressure bounds and the longest loop-carried register dependency chain.
// Throws Error(kInvalidConfig) for an unknown microarchitecture.
double AnalyticThroughput(const asm_core::BasicBlock& block, const std::string& microarchitecture);

// Writes `<dir>/<uarch>.csv` per microarchitecture and `<dir>/disasm.jsonl`.
void WriteCsvCorpus(const std::string& dir, const std::vector<CorpusRecord>& records,
                    const std::vector<std::string>& microarchitectures);

}  // namespace blockgnn::data
