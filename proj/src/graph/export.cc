#include "blockgnn/graph/export.h"

#include <sstream>

#include "blockgnn/error.h"

namespace blockgnn::graph {
namespace {

struct EdgeStyle {
  const char* color;
  const char* style;
};

// One distinct color/line style per edge type.
constexpr std::array<EdgeStyle, kNumEdgeTypes> kEdgeStyles = {{
    {"black", "dashed"},       // StructuralDependency
    {"forestgreen", "solid"},  // InputOperand
    {"blue", "solid"},         // OutputOperand
    {"firebrick", "solid"},    // AddressBase
    {"firebrick", "dotted"},   // AddressIndex
    {"darkorange", "dotted"},  // AddressSegment
    {"darkorange", "solid"},   // AddressDisplacement
}};

const char* NodeShape(NodeType t) {
  switch (t) {
    case NodeType::kMnemonic: return "box";
    case NodeType::kPrefix: return "box";
    case NodeType::kAddressComputation: return "diamond";
    default: return "ellipse";
  }
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

[[noreturn]] void Violation(const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, "graph json: " + what);
}

}  // namespace

std::string ToDot(const BlockGraph& g, const Vocabulary& vocab) {
  std::ostringstream out;
  out << "digraph \"" << Escape(g.block_id) << "\" {\n";
  for (const auto& n : g.nodes) {
    const std::string token =
        static_cast<size_t>(n.token_id) < vocab.size() ? vocab.token(n.token_id) : "?";
    out << "  n" << n.node_id << " [label=\"" << Escape(token) << "\", shape="
        << NodeShape(n.node_type) << ", tooltip=\"" << NodeTypeName(n.node_type)
        << "\"];\n";
  }
  for (const auto& e : g.edges) {
    const auto& style = kEdgeStyles[static_cast<size_t>(e.edge_type)];
    out << "  n" << e.src << " -> n" << e.dst << " [color=" << style.color
        << ", style=" << style.style << ", tooltip=\"" << EdgeTypeName(e.edge_type)
        << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

nlohmann::json ToJson(const BlockGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"node_id", n.node_id},
                     {"node_type", std::string(NodeTypeName(n.node_type))},
                     {"token_id", n.token_id}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"src", e.src},
                     {"dst", e.dst},
                     {"edge_type", std::string(EdgeTypeName(e.edge_type))}});
  }
  return {{"block_id", g.block_id},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"global_init", g.global_init}};
}

BlockGraph GraphFromJson(const nlohmann::json& value) {
  if (!value.is_object()) Violation("expected an object");
  BlockGraph g;
  try {
    g.block_id = value.at("block_id").get<std::string>();
    for (const auto& n : value.at("nodes")) {
      auto type = NodeTypeFromName(n.at("node_type").get<std::string>());
      if (!type) Violation("unknown node_type");
      g.nodes.push_back({n.at("node_id").get<int32_t>(), *type, n.at("token_id").get<int32_t>()});
    }
    for (const auto& e : value.at("edges")) {
      auto type = EdgeTypeFromName(e.at("edge_type").get<std::string>());
      if (!type) Violation("unknown edge_type");
      g.edges.push_back({e.at("src").get<int32_t>(), e.at("dst").get<int32_t>(), *type});
    }
    g.global_init = value.at("global_init").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    Violation(e.what());
  }
  return g;
}

std::string ExportGraph(const BlockGraph& g, const Vocabulary& vocab, ExportFormat format) {
  if (format == ExportFormat::kDot) return ToDot(g, vocab);
  return ToJson(g).dump(2) + "\n";
}

}  // namespace blockgnn::graph
