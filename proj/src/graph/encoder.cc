#include "blockgnn/graph/encoder.h"

#include <map>
#include <optional>

#include "blockgnn/asm/registers.h"
#include "blockgnn/error.h"

namespace blockgnn::graph {

using asm_core::AddressExpr;
using asm_core::FpImmediateOperand;
using asm_core::ImmediateOperand;
using asm_core::MemoryOperand;
using asm_core::Operand;
using asm_core::RegisterOperand;

namespace {

class GraphBuilder {
 public:
  GraphBuilder(const Vocabulary& vocab, const EncoderConfig& cfg)
      : vocab_(vocab), cfg_(cfg) {}

  BlockGraph Build(const asm_core::BasicBlock& block) {
    graph_.block_id = block.id;
    int32_t previous = -1;
    for (const auto& instr : block.instructions) {
      const int32_t mnemonic = AddNode(NodeType::kMnemonic, vocab_.IndexOf(instr.mnemonic));
      if (previous >= 0) AddEdge(previous, mnemonic, EdgeType::kStructuralDependency);
      previous = mnemonic;
      for (const auto& prefix : instr.prefixes) {
        const int32_t p = AddNode(NodeType::kPrefix, vocab_.IndexOf(prefix));
        AddEdge(p, mnemonic, cfg_.prefix_edge_type);
      }
      AddAddresses(instr, mnemonic);
      for (const auto& op : instr.inputs) AddInput(op, mnemonic);
      for (const auto& op : instr.outputs) AddOutput(op, mnemonic);
    }
    FillGlobalInit();
    return std::move(graph_);
  }

 private:
  int32_t AddNode(NodeType type, int32_t token) {
    const auto id = static_cast<int32_t>(graph_.nodes.size());
    graph_.nodes.push_back({id, type, token});
    return id;
  }

  void AddEdge(int32_t src, int32_t dst, EdgeType type) {
    graph_.edges.push_back({src, dst, type});
  }

  int32_t Reserved(std::string_view token) { return vocab_.IndexOf(token); }

  // Current value node of a register's alias class, created on first read.
  int32_t RegisterValue(const std::string& name) {
    const std::string cls = asm_core::AliasClass(name);
    auto it = current_value_.find(cls);
    if (it != current_value_.end()) return it->second;
    const int32_t node = AddNode(NodeType::kRegister, vocab_.IndexOf(name));
    current_value_.emplace(cls, node);
    return node;
  }

  void AddAddresses(const asm_core::Instruction& instr, int32_t mnemonic) {
    address_nodes_.clear();
    for (const auto* list : {&instr.inputs, &instr.outputs}) {
      for (const auto& op : *list) {
        const AddressExpr* a = asm_core::AddressOf(op);
        if (a == nullptr) continue;
        bool seen = false;
        for (const auto& [expr, node] : address_nodes_) seen |= expr == *a;
        if (seen) continue;

        std::optional<int32_t> base, index, segment, displacement;
        if (a->base) base = RegisterValue(*a->base);
        if (a->index) index = RegisterValue(*a->index);
        if (a->segment) segment = RegisterValue(*a->segment);
        if (a->displacement) {
          displacement = AddNode(NodeType::kImmediate, Reserved(kImmediateToken));
        }
        const int32_t addr =
            AddNode(NodeType::kAddressComputation, Reserved(kAddressToken));
        if (base) AddEdge(*base, addr, EdgeType::kAddressBase);
        if (index) AddEdge(*index, addr, EdgeType::kAddressIndex);
        if (segment) AddEdge(*segment, addr, EdgeType::kAddressSegment);
        if (displacement) AddEdge(*displacement, addr, EdgeType::kAddressDisplacement);
        AddEdge(addr, mnemonic, EdgeType::kInputOperand);
        address_nodes_.emplace_back(*a, addr);
      }
    }
  }

  void AddInput(const Operand& op, int32_t mnemonic) {
    if (const auto* r = std::get_if<RegisterOperand>(&op)) {
      AddEdge(RegisterValue(r->name), mnemonic, EdgeType::kInputOperand);
    } else if (std::holds_alternative<ImmediateOperand>(op)) {
      AddEdge(AddNode(NodeType::kImmediate, Reserved(kImmediateToken)), mnemonic,
              EdgeType::kInputOperand);
    } else if (std::holds_alternative<FpImmediateOperand>(op)) {
      AddEdge(AddNode(NodeType::kFpImmediate, Reserved(kFpImmediateToken)), mnemonic,
              EdgeType::kInputOperand);
    } else if (std::holds_alternative<MemoryOperand>(op)) {
      int32_t value;
      if (cfg_.memory_policy == MemoryPolicy::kSingleAliasClass && last_memory_write_) {
        value = *last_memory_write_;
      } else {
        value = AddNode(NodeType::kMemoryValue, Reserved(kMemoryToken));
      }
      AddEdge(value, mnemonic, EdgeType::kInputOperand);
    }
    // AddressOperand inputs are fully handled by AddAddresses.
  }

  void AddOutput(const Operand& op, int32_t mnemonic) {
    if (const auto* r = std::get_if<RegisterOperand>(&op)) {
      const int32_t node = AddNode(NodeType::kRegister, vocab_.IndexOf(r->name));
      AddEdge(mnemonic, node, EdgeType::kOutputOperand);
      current_value_[asm_core::AliasClass(r->name)] = node;
    } else if (std::holds_alternative<MemoryOperand>(op)) {
      const int32_t node = AddNode(NodeType::kMemoryValue, Reserved(kMemoryToken));
      AddEdge(mnemonic, node, EdgeType::kOutputOperand);
      last_memory_write_ = node;
    } else {
      throw Error(ErrorCode::kSchemaViolation,
                  "output operand must be a register or memory: " + asm_core::ToString(op));
    }
  }

  void FillGlobalInit() {
    const size_t vocab_size = vocab_.size();
    graph_.global_init.assign(vocab_size + kNumEdgeTypes, 0.0);
    std::vector<size_t> token_counts(vocab_size, 0);
    std::array<size_t, kNumEdgeTypes> edge_counts{};
    for (const auto& node : graph_.nodes) ++token_counts[node.token_id];
    for (const auto& edge : graph_.edges) ++edge_counts[static_cast<size_t>(edge.edge_type)];
    if (!graph_.nodes.empty()) {
      const double n = static_cast<double>(graph_.nodes.size());
      for (size_t i = 0; i < vocab_size; ++i) graph_.global_init[i] = token_counts[i] / n;
    }
    if (!graph_.edges.empty()) {
      const double n = static_cast<double>(graph_.edges.size());
      for (size_t i = 0; i < kNumEdgeTypes; ++i) {
        graph_.global_init[vocab_size + i] = edge_counts[i] / n;
      }
    }
  }

  const Vocabulary& vocab_;
  const EncoderConfig& cfg_;
  BlockGraph graph_;
  std::map<std::string, int32_t> current_value_;
  std::optional<int32_t> last_memory_write_;
  std::vector<std::pair<AddressExpr, int32_t>> address_nodes_;
};

}  // namespace

BlockGraph Encode(const asm_core::BasicBlock& block, const Vocabulary& vocab,
                  const EncoderConfig& cfg) {
  return GraphBuilder(vocab, cfg).Build(block);
}

nlohmann::json EncoderConfigToJson(const EncoderConfig& cfg) {
  return {
      {"memory_policy",
       cfg.memory_policy == MemoryPolicy::kNoAlias ? "no-alias" : "single-alias-class"},
      {"prefix_edge_type", std::string(EdgeTypeName(cfg.prefix_edge_type))},
      {"implicit_flags", cfg.semantics.implicit_flags},
      {"implicit_registers", cfg.semantics.implicit_registers},
  };
}

EncoderConfig EncoderConfigFromJson(const nlohmann::json& value) {
  EncoderConfig cfg;
  if (value.is_null()) return cfg;
  if (!value.is_object()) throw Error(ErrorCode::kInvalidConfig, "encoder config must be an object");
  try {
    for (const auto& [key, v] : value.items()) {
      if (key == "memory_policy") {
        const auto s = v.get<std::string>();
        if (s == "no-alias") {
          cfg.memory_policy = MemoryPolicy::kNoAlias;
        } else if (s == "single-alias-class") {
          cfg.memory_policy = MemoryPolicy::kSingleAliasClass;
        } else {
          throw Error(ErrorCode::kInvalidConfig, "unknown memory_policy '" + s + "'");
        }
      } else if (key == "prefix_edge_type") {
        auto t = EdgeTypeFromName(v.get<std::string>());
        if (!t) throw Error(ErrorCode::kInvalidConfig, "unknown prefix_edge_type");
        cfg.prefix_edge_type = *t;
      } else if (key == "implicit_flags") {
        cfg.semantics.implicit_flags = v.get<bool>();
      } else if (key == "implicit_registers") {
        cfg.semantics.implicit_registers = v.get<bool>();
      } else {
        throw Error(ErrorCode::kInvalidConfig, "unknown encoder field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("encoder config: ") + e.what());
  }
  return cfg;
}

}  // namespace blockgnn::graph
