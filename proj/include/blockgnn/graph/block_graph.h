#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blockgnn::graph {

enum class NodeType : uint8_t {
  kMnemonic,
  kPrefix,
  kRegister,
  kFpImmediate,
  kImmediate,
  kAddressComputation,
  kMemoryValue,
};
inline constexpr size_t kNumNodeTypes = 7;

enum class EdgeType : uint8_t {
  kStructuralDependency,
  kInputOperand,
  kOutputOperand,
  kAddressBase,
  kAddressIndex,
  kAddressSegment,
  kAddressDisplacement,
};
inline constexpr size_t kNumEdgeTypes = 7;

std::string_view NodeTypeName(NodeType type);
std::string_view EdgeTypeName(EdgeType type);
std::optional<NodeType> NodeTypeFromName(std::string_view name);
std::optional<EdgeType> EdgeTypeFromName(std::string_view name);

struct Node {
  int32_t node_id = 0;
  NodeType node_type = NodeType::kMnemonic;
  int32_t token_id = 0;
  bool operator==(const Node&) const = default;
};

struct Edge {
  int32_t src = 0;
  int32_t dst = 0;
  EdgeType edge_type = EdgeType::kStructuralDependency;
  bool operator==(const Edge&) const = default;
};

// Typed dependency graph of one basic block. node_id equals the position in
// `nodes`. `global_init` has |vocabulary| + kNumEdgeTypes entries: relative
// token frequencies over nodes followed by relative edge-type frequencies.
struct BlockGraph {
  std::string block_id;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<double> global_init;
  bool operator==(const BlockGraph&) const = default;

  size_t num_instructions() const;
  // Node ids of the Mnemonic nodes, in instruction order.
  std::vector<int32_t> MnemonicNodes() const;
};

// Checks the structural invariants (valid endpoints, producer uniqueness,
// mnemonic chain, weak connectivity, global_init normalization). Returns a
// description of the first violation.
std::optional<std::string> Validate(const BlockGraph& g, size_t vocab_size);

}  // namespace blockgnn::graph
