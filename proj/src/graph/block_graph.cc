#include "blockgnn/graph/block_graph.h"

#include <cmath>
#include <numeric>

namespace blockgnn::graph {
namespace {

constexpr std::array<std::string_view, kNumNodeTypes> kNodeNames = {
    "Mnemonic", "Prefix", "Register", "FpImmediate",
    "Immediate", "AddressComputation", "MemoryValue"};

constexpr std::array<std::string_view, kNumEdgeTypes> kEdgeNames = {
    "StructuralDependency", "InputOperand", "OutputOperand", "AddressBase",
    "AddressIndex", "AddressSegment", "AddressDisplacement"};

bool IsValueNode(NodeType t) {
  return t != NodeType::kMnemonic && t != NodeType::kPrefix;
}

int32_t Find(std::vector<int32_t>& parent, int32_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::string_view NodeTypeName(NodeType type) {
  return kNodeNames[static_cast<size_t>(type)];
}

std::string_view EdgeTypeName(EdgeType type) {
  return kEdgeNames[static_cast<size_t>(type)];
}

std::optional<NodeType> NodeTypeFromName(std::string_view name) {
  for (size_t i = 0; i < kNumNodeTypes; ++i) {
    if (kNodeNames[i] == name) return static_cast<NodeType>(i);
  }
  return std::nullopt;
}

std::optional<EdgeType> EdgeTypeFromName(std::string_view name) {
  for (size_t i = 0; i < kNumEdgeTypes; ++i) {
    if (kEdgeNames[i] == name) return static_cast<EdgeType>(i);
  }
  return std::nullopt;
}

size_t BlockGraph::num_instructions() const {
  size_t n = 0;
  for (const auto& node : nodes) n += node.node_type == NodeType::kMnemonic;
  return n;
}

std::vector<int32_t> BlockGraph::MnemonicNodes() const {
  std::vector<int32_t> out;
  for (const auto& node : nodes) {
    if (node.node_type == NodeType::kMnemonic) out.push_back(node.node_id);
  }
  return out;
}

std::optional<std::string> Validate(const BlockGraph& g, size_t vocab_size) {
  const auto n = static_cast<int32_t>(g.nodes.size());
  for (int32_t i = 0; i < n; ++i) {
    if (g.nodes[i].node_id != i) return "node ids must be dense and ordered";
    if (g.nodes[i].token_id < 0 ||
        static_cast<size_t>(g.nodes[i].token_id) >= vocab_size) {
      return "token id out of range at node " + std::to_string(i);
    }
  }
  std::vector<int> producers(n, 0);
  std::vector<int32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int32_t> next_mnemonic(n, -1);
  size_t structural = 0;
  for (const auto& e : g.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      return "edge endpoint out of range";
    }
    if (e.edge_type == EdgeType::kOutputOperand) {
      if (!IsValueNode(g.nodes[e.dst].node_type)) return "output edge into a non-value node";
      if (++producers[e.dst] > 1) {
        return "value node " + std::to_string(e.dst) + " has two producers";
      }
    }
    if (e.edge_type == EdgeType::kStructuralDependency) {
      if (g.nodes[e.src].node_type != NodeType::kMnemonic ||
          g.nodes[e.dst].node_type != NodeType::kMnemonic) {
        return "structural edge between non-mnemonic nodes";
      }
      if (next_mnemonic[e.src] != -1) return "mnemonic has two successors";
      next_mnemonic[e.src] = e.dst;
      ++structural;
    }
    parent[Find(parent, e.src)] = Find(parent, e.dst);
  }
  const auto mnemonics = g.MnemonicNodes();
  if (!mnemonics.empty()) {
    if (structural != mnemonics.size() - 1) return "mnemonic chain has wrong length";
    for (size_t i = 0; i + 1 < mnemonics.size(); ++i) {
      if (next_mnemonic[mnemonics[i]] != mnemonics[i + 1]) {
        return "mnemonic chain out of instruction order";
      }
    }
  }
  for (int32_t i = 1; i < n; ++i) {
    if (Find(parent, i) != Find(parent, 0)) return "graph is not weakly connected";
  }
  if (g.global_init.size() != vocab_size + kNumEdgeTypes) {
    return "global_init has wrong length";
  }
  double token_sum = 0.0;
  double edge_sum = 0.0;
  for (size_t i = 0; i < g.global_init.size(); ++i) {
    const double v = g.global_init[i];
    if (!(v >= 0.0) || !std::isfinite(v)) return "global_init has a negative entry";
    (i < vocab_size ? token_sum : edge_sum) += v;
  }
  if (n > 0 && std::abs(token_sum - 1.0) > 1e-9) return "token frequencies do not sum to 1";
  if (!g.edges.empty() && std::abs(edge_sum - 1.0) > 1e-9) {
    return "edge-type frequencies do not sum to 1";
  }
  return std::nullopt;
}

}  // namespace blockgnn::graph
