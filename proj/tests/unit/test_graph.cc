#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "blockgnn/asm/registers.h"
#include "blockgnn/asm/text_parser.h"
#include "blockgnn/data/synthetic.h"
#include "blockgnn/error.h"
#include "blockgnn/graph/encoder.h"
#include "blockgnn/graph/export.h"
#include "blockgnn/graph/vocabulary.h"
#include "test_util.h"

namespace blockgnn::graph {
namespace {

using asm_core::BasicBlock;
using testing::kMovAddText;
using testing::kSbbCmovText;

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vocabulary VocabFor(const std::vector<BasicBlock>& blocks) { return BuildVocabulary(blocks); }

std::vector<BasicBlock> SyntheticBlocks(size_t n, uint64_t seed) {
  data::SyntheticOptions opts;
  opts.num_blocks = n;
  opts.seed = seed;
  opts.max_instructions = 12;
  std::vector<BasicBlock> out;
  for (auto& r : data::GenerateSynthetic(opts)) out.push_back(r.block);
  return out;
}

TEST(Vocabulary, MovAddHasNineTokens) {
  const BasicBlock b = asm_core::ParseBlockText(kMovAddText);
  const Vocabulary v = VocabFor({b});
  EXPECT_EQ(v.size(), 9u);
  const std::vector<std::string> expected = {"IMMEDIATE", "FP_IMMEDIATE", "MEMORY", "ADDRESS",
                                             "UNKNOWN",   "MOV",          "RAX",    "ADD",
                                             "EBX"};
  EXPECT_EQ(v.tokens(), expected);
}

TEST(Vocabulary, IdempotentOverRepeats) {
  const BasicBlock b = asm_core::ParseBlockText(kSbbCmovText);
  EXPECT_EQ(VocabFor({b, b}), VocabFor({b}));
}

TEST(Vocabulary, TableOneTokens) {
  const Vocabulary v = VocabFor({asm_core::ParseBlockText(kSbbCmovText)});
  for (const char* t : {"CMP", "SBB", "AND", "TEST", "MOV", "CMOVG", "R15D", "EAX", "ECX", "RBP",
                        "EDX"}) {
    EXPECT_TRUE(v.Contains(t)) << t;
  }
}

TEST(Vocabulary, EmptyCorpusAndUnknownTokens) {
  EXPECT_THROW(BuildVocabulary(std::vector<BasicBlock>{}), Error);
  const Vocabulary v;
  EXPECT_EQ(v.size(), kNumReservedTokens);
  EXPECT_EQ(v.IndexOf("NOT_A_TOKEN"), v.IndexOf(kUnknownToken));
  EXPECT_EQ(Vocabulary::FromJson(VocabFor(SyntheticBlocks(20, 1)).ToJson()),
            VocabFor(SyntheticBlocks(20, 1)));
}

TEST(Encode, MovAddGolden) {
  const BasicBlock b = asm_core::ParseBlockText(kMovAddText, "mov_add");
  const Vocabulary v = VocabFor({b});
  const BlockGraph g = Encode(b, v);
  ASSERT_EQ(g.nodes.size(), 9u);
  ASSERT_EQ(g.edges.size(), 9u);

  // Node n: (type, token).
  const std::vector<std::pair<NodeType, std::string>> nodes = {
      {NodeType::kMnemonic, "MOV"},           {NodeType::kImmediate, "IMMEDIATE"},
      {NodeType::kRegister, "RAX"},           {NodeType::kMnemonic, "ADD"},
      {NodeType::kImmediate, "IMMEDIATE"},    {NodeType::kAddressComputation, "ADDRESS"},
      {NodeType::kMemoryValue, "MEMORY"},     {NodeType::kRegister, "EBX"},
      {NodeType::kMemoryValue, "MEMORY"},
  };
  for (size_t i = 0; i < nodes.size(); ++i) {
    EXPECT_EQ(g.nodes[i].node_id, static_cast<int32_t>(i));
    EXPECT_EQ(g.nodes[i].node_type, nodes[i].first) << i;
    EXPECT_EQ(v.token(g.nodes[i].token_id), nodes[i].second) << i;
  }
  const std::vector<Edge> edges = {
      {1, 0, EdgeType::kInputOperand},          // Imm 12345 -> MOV
      {0, 2, EdgeType::kOutputOperand},         // MOV -> RAX
      {0, 3, EdgeType::kStructuralDependency},  // MOV -> ADD
      {2, 5, EdgeType::kAddressBase},           // RAX -> address
      {4, 5, EdgeType::kAddressDisplacement},   // Imm 16 -> address
      {5, 3, EdgeType::kInputOperand},          // address -> ADD
      {6, 3, EdgeType::kInputOperand},          // memory read -> ADD
      {7, 3, EdgeType::kInputOperand},          // EBX -> ADD
      {3, 8, EdgeType::kOutputOperand},         // ADD -> memory write
  };
  EXPECT_EQ(g.edges, edges);
  EXPECT_EQ(ToDot(g, v), Slurp(testing::GoldenPath("mov_add.dot")));
  EXPECT_EQ(GraphFromJson(nlohmann::json::parse(Slurp(testing::GoldenPath("mov_add.json")))), g);
}

TEST(Encode, TableOneDependencies) {
  const BasicBlock b = asm_core::ParseBlockText(kSbbCmovText, "t1");
  const Vocabulary v = VocabFor({b});
  const BlockGraph g = Encode(b, v);
  const auto mn = g.MnemonicNodes();
  ASSERT_EQ(mn.size(), 8u);
  auto producer = [&](int32_t node) {
    for (const auto& e : g.edges) {
      if (e.dst == node && e.edge_type == EdgeType::kOutputOperand) return e.src;
    }
    return -1;
  };
  auto register_inputs = [&](size_t instr, const std::string& token) {
    std::vector<int32_t> out;
    for (const auto& e : g.edges) {
      if (e.dst == mn[instr] && e.edge_type == EdgeType::kInputOperand &&
          g.nodes[e.src].node_type == NodeType::kRegister && v.token(g.nodes[e.src].token_id) == token) {
        out.push_back(e.src);
      }
    }
    return out;
  };
  // AND (2) reads the EAX written by SBB (1).
  const auto and_eax = register_inputs(2, "EAX");
  ASSERT_EQ(and_eax.size(), 1u);
  EXPECT_EQ(producer(and_eax[0]), mn[1]);
  // MOV EAX, 1 (5) writes a new EAX node that CMOVG (6) reads.
  std::vector<int32_t> mov5_outputs;
  for (const auto& e : g.edges) {
    if (e.src == mn[5] && e.edge_type == EdgeType::kOutputOperand) mov5_outputs.push_back(e.dst);
  }
  ASSERT_EQ(mov5_outputs.size(), 1u);
  const int32_t fresh = mov5_outputs[0];
  EXPECT_EQ(v.token(g.nodes[fresh].token_id), "EAX");
  EXPECT_NE(fresh, and_eax[0]);
  const auto cmovg_eax = register_inputs(6, "EAX");
  ASSERT_EQ(cmovg_eax.size(), 1u);
  EXPECT_EQ(cmovg_eax[0], fresh);
  // The MOV store (4) reads the EAX written by AND (2).
  const auto store_eax = register_inputs(4, "EAX");
  ASSERT_EQ(store_eax.size(), 1u);
  EXPECT_EQ(producer(store_eax[0]), mn[2]);
}

TEST(Encode, SingleNopIsOneNode) {
  const BasicBlock b = asm_core::ParseBlockText("NOP");
  const BlockGraph g = Encode(b, VocabFor({b}));
  EXPECT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(Validate(g, VocabFor({b}).size()), std::nullopt);
}

TEST(Encode, UnseenTokensMapToUnknown) {
  const BasicBlock train = asm_core::ParseBlockText("MOV RAX, RBX");
  const BasicBlock other = asm_core::ParseBlockText("IMUL RCX, RDX");
  const Vocabulary v = VocabFor({train});
  const BlockGraph g = Encode(other, v);
  for (const auto& n : g.nodes) {
    if (n.node_type == NodeType::kMnemonic || n.node_type == NodeType::kRegister) {
      EXPECT_EQ(n.token_id, v.IndexOf(kUnknownToken));
    }
  }
}

TEST(Encode, PrefixEdgeTypeIsConfigurable) {
  const BasicBlock b = asm_core::ParseBlockText("LOCK ADD QWORD PTR [RAX], RBX");
  const Vocabulary v = VocabFor({b});
  EncoderConfig cfg;
  for (EdgeType t : {EdgeType::kInputOperand, EdgeType::kStructuralDependency}) {
    cfg.prefix_edge_type = t;
    const BlockGraph g = Encode(b, v, cfg);
    ASSERT_EQ(g.nodes[1].node_type, NodeType::kPrefix);
    EXPECT_EQ(g.edges[0], (Edge{1, 0, t}));
  }
}

TEST(Encode, MemoryPolicies) {
  const BasicBlock b = asm_core::ParseBlockText("MOV QWORD PTR [RAX], RBX\nMOV RCX, QWORD PTR [RDX]");
  const Vocabulary v = VocabFor({b});
  auto load_producer = [&](const BlockGraph& g) {
    const int32_t mov2 = g.MnemonicNodes()[1];
    for (const auto& e : g.edges) {
      if (e.dst == mov2 && g.nodes[e.src].node_type == NodeType::kMemoryValue) {
        for (const auto& p : g.edges) {
          if (p.dst == e.src && p.edge_type == EdgeType::kOutputOperand) return p.src;
        }
        return -1;
      }
    }
    return -2;
  };
  EXPECT_EQ(load_producer(Encode(b, v)), -1);
  EncoderConfig cfg;
  cfg.memory_policy = MemoryPolicy::kSingleAliasClass;
  EXPECT_EQ(load_producer(Encode(b, v, cfg)), Encode(b, v).MnemonicNodes()[0]);
}

// Linear-scan oracle: a register read in instruction i resolves to the value
// written by the latest j < i that wrote any register of the same alias
// class, or to a producer-less node if there is none.
void CheckAliasOracle(const BasicBlock& b, const BlockGraph& g, const Vocabulary& v) {
  const auto mn = g.MnemonicNodes();
  std::map<int32_t, size_t> instr_of;
  for (size_t i = 0; i < mn.size(); ++i) instr_of[mn[i]] = i;
  std::map<int32_t, int32_t> producer;
  for (const auto& e : g.edges) {
    if (e.edge_type == EdgeType::kOutputOperand) producer[e.dst] = e.src;
  }
  // Which instruction consumes each address node.
  std::map<int32_t, int32_t> address_consumer;
  for (const auto& e : g.edges) {
    if (g.nodes[e.src].node_type == NodeType::kAddressComputation) address_consumer[e.src] = e.dst;
  }
  size_t checked = 0;
  for (const auto& e : g.edges) {
    if (g.nodes[e.src].node_type != NodeType::kRegister) continue;
    if (e.edge_type == EdgeType::kOutputOperand) continue;
    const int32_t consumer_node = e.edge_type == EdgeType::kInputOperand ? e.dst : address_consumer.at(e.dst);
    const size_t i = instr_of.at(consumer_node);
    const std::string cls = asm_core::AliasClass(v.token(g.nodes[e.src].token_id));
    std::optional<size_t> latest;
    for (size_t j = 0; j < i; ++j) {
      for (const auto& op : b.instructions[j].outputs) {
        if (const auto* r = std::get_if<asm_core::RegisterOperand>(&op)) {
          if (asm_core::AliasClass(r->name) == cls) latest = j;
        }
      }
    }
    const auto it = producer.find(e.src);
    if (latest) {
      ASSERT_NE(it, producer.end()) << b.id << " instr " << i << " " << cls;
      EXPECT_EQ(instr_of.at(it->second), *latest) << b.id << " instr " << i << " " << cls;
    } else {
      EXPECT_EQ(it, producer.end()) << b.id << " instr " << i << " " << cls;
    }
    ++checked;
  }
  (void)checked;
}

TEST(Encode, AliasClassOracle) {
  auto blocks = SyntheticBlocks(300, 11);
  blocks.push_back(asm_core::ParseBlockText(kSbbCmovText, "t1"));
  blocks.push_back(asm_core::ParseBlockText(
      "MOV AL, 1\nMOV AH, 2\nADD RAX, RBX\nMOVZX ECX, AX\nLEA RDX, [RCX + RAX*2]\nXOR EAX, EAX", "sub"));
  const Vocabulary v = VocabFor(blocks);
  for (const auto& b : blocks) CheckAliasOracle(b, Encode(b, v), v);
}

TEST(Encode, StructuralInvariants) {
  const auto blocks = SyntheticBlocks(300, 12);
  const Vocabulary v = VocabFor(blocks);
  for (const auto& b : blocks) {
    const BlockGraph g = Encode(b, v);
    EXPECT_EQ(Validate(g, v.size()), std::nullopt) << b.id;
    size_t structural = 0;
    std::map<int32_t, int> producers;
    for (const auto& e : g.edges) {
      structural += e.edge_type == EdgeType::kStructuralDependency;
      if (e.edge_type == EdgeType::kOutputOperand) ++producers[e.dst];
    }
    EXPECT_EQ(structural, b.instructions.size() - 1);
    for (const auto& [node, count] : producers) EXPECT_LE(count, 1);

    // global_init: nonnegative, each segment sums to one.
    ASSERT_EQ(g.global_init.size(), v.size() + kNumEdgeTypes);
    double tokens = 0.0, edges = 0.0;
    for (size_t i = 0; i < g.global_init.size(); ++i) {
      EXPECT_GE(g.global_init[i], 0.0);
      (i < v.size() ? tokens : edges) += g.global_init[i];
    }
    EXPECT_NEAR(tokens, 1.0, 1e-12);
    if (!g.edges.empty()) EXPECT_NEAR(edges, 1.0, 1e-12);

    // Weak connectivity by BFS.
    std::vector<std::vector<int32_t>> adj(g.nodes.size());
    for (const auto& e : g.edges) {
      adj[e.src].push_back(e.dst);
      adj[e.dst].push_back(e.src);
    }
    std::vector<bool> seen(g.nodes.size());
    std::queue<int32_t> q;
    q.push(0);
    seen[0] = true;
    size_t count = 1;
    while (!q.empty()) {
      const int32_t n = q.front();
      q.pop();
      for (int32_t m : adj[n]) {
        if (!seen[m]) {
          seen[m] = true;
          ++count;
          q.push(m);
        }
      }
    }
    EXPECT_EQ(count, g.nodes.size()) << b.id;
  }
}

TEST(Encode, GlobalInitCountsTokensAndEdges) {
  const BasicBlock b = asm_core::ParseBlockText(kMovAddText);
  const Vocabulary v = VocabFor({b});
  const BlockGraph g = Encode(b, v);
  // 9 nodes: IMMEDIATE x2, MEMORY x2, ADDRESS, MOV, RAX, ADD, EBX.
  EXPECT_DOUBLE_EQ(g.global_init[v.IndexOf("IMMEDIATE")], 2.0 / 9.0);
  EXPECT_DOUBLE_EQ(g.global_init[v.IndexOf("MEMORY")], 2.0 / 9.0);
  EXPECT_DOUBLE_EQ(g.global_init[v.IndexOf("RAX")], 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(g.global_init[v.IndexOf("UNKNOWN")], 0.0);
  // 9 edges: 4 InputOperand, 2 OutputOperand, 1 each of the others used.
  const size_t base = v.size();
  EXPECT_DOUBLE_EQ(g.global_init[base + static_cast<size_t>(EdgeType::kInputOperand)], 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(g.global_init[base + static_cast<size_t>(EdgeType::kOutputOperand)], 2.0 / 9.0);
  EXPECT_DOUBLE_EQ(g.global_init[base + static_cast<size_t>(EdgeType::kAddressIndex)], 0.0);
}

TEST(Encode, DeterministicAndPrefixMonotone) {
  const auto blocks = SyntheticBlocks(100, 13);
  const Vocabulary v = VocabFor(blocks);
  for (const auto& b : blocks) {
    const BlockGraph full = Encode(b, v);
    EXPECT_EQ(Encode(b, v), full);
    for (size_t k = 1; k < b.instructions.size(); ++k) {
      BasicBlock prefix = b;
      prefix.instructions.resize(k);
      const BlockGraph part = Encode(prefix, v);
      ASSERT_LE(part.nodes.size(), full.nodes.size());
      for (size_t i = 0; i < part.nodes.size(); ++i) EXPECT_EQ(part.nodes[i], full.nodes[i]);
      std::vector<Edge> restricted;
      const auto n = static_cast<int32_t>(part.nodes.size());
      for (const auto& e : full.edges) {
        if (e.src < n && e.dst < n) restricted.push_back(e);
      }
      EXPECT_EQ(part.edges, restricted) << b.id << " prefix " << k;
    }
  }
}

TEST(Export, JsonRoundTripAndDotStatements) {
  const auto blocks = SyntheticBlocks(50, 14);
  const Vocabulary v = VocabFor(blocks);
  for (const auto& b : blocks) {
    const BlockGraph g = Encode(b, v);
    EXPECT_EQ(GraphFromJson(nlohmann::json::parse(ExportGraph(g, v, ExportFormat::kJson))), g);
    const std::string dot = ExportGraph(g, v, ExportFormat::kDot);
    size_t node_statements = 0, edge_statements = 0;
    std::istringstream lines(dot);
    for (std::string line; std::getline(lines, line);) {
      if (line.find("->") != std::string::npos) {
        ++edge_statements;
      } else if (line.find("[label=") != std::string::npos) {
        ++node_statements;
      }
    }
    EXPECT_EQ(node_statements, g.nodes.size());
    EXPECT_EQ(edge_statements, g.edges.size());
  }
}

TEST(Export, EdgeStylesAreDistinct) {
  std::set<std::string> styles;
  const BasicBlock b = asm_core::ParseBlockText(
      "LOCK ADD QWORD PTR FS:[RAX + RBX*2 + 8], RCX\nMOV RDX, RAX");
  const Vocabulary v = VocabFor({b});
  const BlockGraph g = Encode(b, v);
  std::map<EdgeType, std::string> style_of;
  std::istringstream lines(ToDot(g, v));
  size_t idx = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.find("->") == std::string::npos) continue;
    const std::string style = line.substr(line.find('['));
    const std::string attrs = style.substr(0, style.find("tooltip"));
    style_of[g.edges[idx++].edge_type] = attrs;
  }
  for (const auto& [type, attrs] : style_of) styles.insert(attrs);
  EXPECT_EQ(styles.size(), style_of.size());
  EXPECT_EQ(style_of.size(), kNumEdgeTypes);
}

TEST(Export, MalformedJsonRejected) {
  EXPECT_THROW(GraphFromJson(nlohmann::json::parse(R"({"block_id":"x"})")), Error);
}

}  // namespace
}  // namespace blockgnn::graph
