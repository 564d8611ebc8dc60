#pragma once

#include <string>

#include "blockgnn/graph/block_graph.h"
#include "blockgnn/graph/vocabulary.h"
#include "json.hpp"

namespace blockgnn::graph {

enum class ExportFormat { kDot, kJson };

// Graphviz rendering: one node statement per node labelled with its token,
// one edge statement per edge styled by edge type.
std::string ToDot(const BlockGraph& g, const Vocabulary& vocab);

// Loss-free JSON mirroring the BlockGraph fields.
nlohmann::json ToJson(const BlockGraph& g);
// Throws Error(kSchemaViolation).
BlockGraph GraphFromJson(const nlohmann::json& value);

std::string ExportGraph(const BlockGraph& g, const Vocabulary& vocab, ExportFormat format);

}  // namespace blockgnn::graph
