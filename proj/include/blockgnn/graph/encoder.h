#pragma once

#include "blockgnn/asm/basic_block.h"
#include "blockgnn/asm/semantics.h"
#include "blockgnn/graph/block_graph.h"
#include "blockgnn/graph/vocabulary.h"
#include "json.hpp"

namespace blockgnn::graph {

enum class MemoryPolicy {
  // Every memory read is a fresh MemoryValue node without a producer.
  kNoAlias,
  // A memory read consumes the value node of the latest prior memory write.
  kSingleAliasClass,
};

struct EncoderConfig {
  MemoryPolicy memory_policy = MemoryPolicy::kNoAlias;
  EdgeType prefix_edge_type = EdgeType::kInputOperand;
  // Used when blocks are parsed from text.
  asm_core::SemanticsOptions semantics;
  bool operator==(const EncoderConfig&) const = default;
};

nlohmann::json EncoderConfigToJson(const EncoderConfig& cfg);
// Missing fields keep their defaults. Throws Error(kInvalidConfig).
EncoderConfig EncoderConfigFromJson(const nlohmann::json& value);

// Builds the dependency graph of `block`.
//
// Per instruction, nodes are emitted in the order: mnemonic, prefixes,
// address components, inputs, outputs. Register reads resolve to the latest
// value written to the register's widest alias class; reads with no
// producer in the block create a Register node that later reads of the same
// class reuse. Each distinct address expression of an instruction gets one
// AddressComputation node feeding the mnemonic via an InputOperand edge.
BlockGraph Encode(const asm_core::BasicBlock& block, const Vocabulary& vocab,
                  const EncoderConfig& cfg = {});

}  // namespace blockgnn::graph
