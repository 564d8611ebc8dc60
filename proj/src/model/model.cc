#include "blockgnn/model/model.h"

#include <algorithm>
#include <cmath>

#include "blockgnn/error.h"
#include "blockgnn/random.h"

namespace blockgnn::model {
namespace {

using tensor::Tape;
using tensor::Tensor;
using tensor::Var;
namespace ops = tensor::ops;

constexpr double kEmbeddingInitRange = 0.1;

struct MlpShape {
  std::string prefix;
  size_t in;
  std::vector<size_t> hidden;
  size_t out;
};

std::vector<MlpShape> MlpShapes(const ModelConfig& cfg) {
  const size_t dn = cfg.node_embedding_size;
  const size_t de = cfg.edge_embedding_size;
  const size_t dg = cfg.global_embedding_size;
  const size_t gu = cfg.use_global_in_updates ? dg : 0;
  std::vector<MlpShape> shapes = {
      {"edge_update", de + 2 * dn + gu, cfg.update_hidden_layers, de},
      {"node_update", dn + de + gu, cfg.update_hidden_layers, dn},
      {"global_update", dg + de + dn, cfg.update_hidden_layers, dg},
  };
  for (const auto& task : cfg.task_names) {
    shapes.push_back({"decoder/" + task, dn, cfg.decoder_hidden_layers, 1});
  }
  return shapes;
}

std::vector<std::pair<std::string, std::vector<size_t>>> MlpManifest(const MlpShape& s,
                                                                     bool layer_norm) {
  std::vector<std::pair<std::string, std::vector<size_t>>> out;
  if (layer_norm) {
    out.push_back({s.prefix + "/ln/gain", {s.in}});
    out.push_back({s.prefix + "/ln/bias", {s.in}});
  }
  size_t in = s.in;
  std::vector<size_t> widths = s.hidden;
  widths.push_back(s.out);
  for (size_t i = 0; i < widths.size(); ++i) {
    out.push_back({s.prefix + "/layer" + std::to_string(i) + "/w", {in, widths[i]}});
    out.push_back({s.prefix + "/layer" + std::to_string(i) + "/b", {widths[i]}});
    in = widths[i];
  }
  return out;
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

size_t ModelParams::TaskIndex(const std::string& task) const {
  const auto& names = config.task_names;
  auto it = std::find(names.begin(), names.end(), task);
  if (it == names.end()) throw Error(ErrorCode::kUnknownTask, "task '" + task + "' not configured");
  return static_cast<size_t>(it - names.begin());
}

std::vector<std::pair<std::string, std::vector<size_t>>> ParameterManifest(const ModelConfig& cfg,
                                                                           size_t vocab_size) {
  const size_t ne = graph::kNumEdgeTypes;
  std::vector<std::pair<std::string, std::vector<size_t>>> out = {
      {"token_embedding", {vocab_size, cfg.node_embedding_size}},
      {"edge_embedding", {ne, cfg.edge_embedding_size}},
      {"global_projection/w", {vocab_size + ne, cfg.global_embedding_size}},
      {"global_projection/b", {cfg.global_embedding_size}},
  };
  for (const auto& s : MlpShapes(cfg)) {
    for (auto& entry : MlpManifest(s, cfg.use_layer_norm)) out.push_back(std::move(entry));
  }
  return out;
}

ModelParams InitModel(const ModelConfig& cfg, size_t vocab_size, uint64_t seed) {
  ValidateModelConfig(cfg);
  if (vocab_size == 0) throw Error(ErrorCode::kInvalidConfig, "vocabulary is empty");
  ModelParams model;
  model.config = cfg;
  model.vocab_size = vocab_size;
  Rng rng(seed);
  for (auto& [name, shape] : ParameterManifest(cfg, vocab_size)) {
    Tensor t(shape);
    if (name == "token_embedding" || name == "edge_embedding") {
      for (double& x : t.storage()) x = rng.Uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
    } else if (EndsWith(name, "/ln/gain")) {
      t.Fill(1.0);
    } else if (EndsWith(name, "/w")) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      for (double& x : t.storage()) x = rng.Uniform(-bound, bound);
    }
    model.params.Add(name, std::move(t));
  }
  return model;
}

void ZeroUpdateOutputLayers(ModelParams& model) {
  const std::string last =
      "/layer" + std::to_string(model.config.update_hidden_layers.size());
  for (const char* net : {"edge_update", "node_update", "global_update"}) {
    model.params[std::string(net) + last + "/w"].Fill(0.0);
    model.params[std::string(net) + last + "/b"].Fill(0.0);
  }
}

GraphBatch MakeBatch(std::span<const graph::BlockGraph* const> graphs, size_t vocab_size) {
  GraphBatch b;
  b.num_graphs = graphs.size();
  const size_t global_dim = vocab_size + graph::kNumEdgeTypes;
  b.global_init = Tensor::Matrix(graphs.size(), global_dim);
  b.node_offset.push_back(0);
  b.edge_offset.push_back(0);
  for (size_t gi = 0; gi < graphs.size(); ++gi) {
    const graph::BlockGraph& g = *graphs[gi];
    const auto base = static_cast<int32_t>(b.token_ids.size());
    const auto gid = static_cast<int32_t>(gi);
    for (const auto& n : g.nodes) {
      b.token_ids.push_back(n.token_id);
      b.node_graph.push_back(gid);
      if (n.node_type == graph::NodeType::kMnemonic) {
        b.mnemonic_nodes.push_back(base + n.node_id);
        b.mnemonic_graph.push_back(gid);
      }
    }
    const auto n_nodes = static_cast<int32_t>(g.nodes.size());
    for (const auto& e : g.edges) {
      if (e.src < 0 || e.src >= n_nodes || e.dst < 0 || e.dst >= n_nodes) {
        throw Error(ErrorCode::kIndexOutOfRange, "edge endpoint outside graph '" + g.block_id + "'");
      }
      b.edge_types.push_back(static_cast<int32_t>(e.edge_type));
      b.edge_src.push_back(base + e.src);
      b.edge_dst.push_back(base + e.dst);
      b.edge_graph.push_back(gid);
    }
    if (g.global_init.size() != global_dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "global_init of '" + g.block_id + "' has " + std::to_string(g.global_init.size()) +
                      " entries, expected " + std::to_string(global_dim));
    }
    std::copy(g.global_init.begin(), g.global_init.end(), b.global_init.data() + gi * global_dim);
    b.node_offset.push_back(b.token_ids.size());
    b.edge_offset.push_back(b.edge_types.size());
  }
  return b;
}

GraphBatch MakeBatch(const graph::BlockGraph& g, size_t vocab_size) {
  const graph::BlockGraph* one[] = {&g};
  return MakeBatch(one, vocab_size);
}

Network::Network(Tape& tape, const ModelParams& model, bool trainable)
    : tape_(tape), model_(model) {
  vars_.reserve(model.params.size());
  for (const auto& e : model.params.entries()) {
    vars_.push_back(trainable ? tape.Leaf(e.value) : tape.Constant(e.value));
  }
  BindAll();
}

Network::Network(Tape& tape, const ModelParams& model, std::vector<Var> bound)
    : tape_(tape), model_(model), vars_(std::move(bound)) {
  if (vars_.size() != model.params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "expected " + std::to_string(model.params.size()) +
                                               " parameter handles, got " +
                                               std::to_string(vars_.size()));
  }
  for (size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].tape() != &tape || vars_[i].value().shape() != model.params.value(i).shape()) {
      throw Error(ErrorCode::kShapeMismatch, "parameter handle for '" +
                                                 model.params.entry(i).name + "' does not match");
    }
  }
  BindAll();
}

void Network::BindAll() {
  const auto& p = model_.params;
  token_embedding_ = static_cast<int32_t>(p.IndexOf("token_embedding"));
  edge_embedding_ = static_cast<int32_t>(p.IndexOf("edge_embedding"));
  global_w_ = static_cast<int32_t>(p.IndexOf("global_projection/w"));
  global_b_ = static_cast<int32_t>(p.IndexOf("global_projection/b"));
  edge_update_ = Bind("edge_update");
  node_update_ = Bind("node_update");
  global_update_ = Bind("global_update");
  for (const auto& task : model_.config.task_names) decoders_.push_back(Bind("decoder/" + task));
}

Network::Mlp Network::Bind(const std::string& prefix) const {
  const auto& p = model_.params;
  Mlp mlp;
  if (model_.config.use_layer_norm) {
    mlp.ln_gain = static_cast<int32_t>(p.IndexOf(prefix + "/ln/gain"));
    mlp.ln_bias = static_cast<int32_t>(p.IndexOf(prefix + "/ln/bias"));
  }
  for (size_t i = 0;; ++i) {
    const std::string w = prefix + "/layer" + std::to_string(i) + "/w";
    if (!p.Contains(w)) break;
    mlp.layers.emplace_back(static_cast<int32_t>(p.IndexOf(w)),
                            static_cast<int32_t>(p.IndexOf(prefix + "/layer" + std::to_string(i) + "/b")));
  }
  return mlp;
}

Var Network::Apply(const Mlp& mlp, Var x) {
  if (mlp.ln_gain >= 0) x = ops::LayerNorm(x, vars_[mlp.ln_gain], vars_[mlp.ln_bias]);
  for (size_t i = 0; i < mlp.layers.size(); ++i) {
    x = ops::Dense(x, vars_[mlp.layers[i].first], vars_[mlp.layers[i].second],
                   i + 1 < mlp.layers.size());
  }
  return x;
}

Network::State Network::Constant(const GraphState& state) {
  return {tape_.Constant(state.nodes), tape_.Constant(state.edges), tape_.Constant(state.globals)};
}

Network::State Network::InitState(const GraphBatch& batch) {
  State s;
  s.nodes = ops::EmbeddingLookup(vars_[token_embedding_], batch.token_ids);
  s.edges = ops::EmbeddingLookup(vars_[edge_embedding_], batch.edge_types);
  Var init = tape_.Constant(batch.global_init);
  s.globals = ops::Dense(init, vars_[global_w_], vars_[global_b_], false);
  return s;
}

Network::State Network::Step(const State& s, const GraphBatch& batch) {
  const bool residual = model_.config.use_residual;
  const bool with_global = model_.config.use_global_in_updates;
  const size_t n_nodes = batch.num_nodes();

  std::vector<Var> edge_in = {s.edges, ops::EmbeddingLookup(s.nodes, batch.edge_src),
                              ops::EmbeddingLookup(s.nodes, batch.edge_dst)};
  if (with_global) edge_in.push_back(ops::EmbeddingLookup(s.globals, batch.edge_graph));
  Var edge_delta = Apply(edge_update_, ops::Concat(edge_in));
  Var edges = residual ? ops::Add(s.edges, edge_delta) : edge_delta;

  std::vector<Var> node_in = {s.nodes, ops::SegmentSum(edges, batch.edge_dst, n_nodes)};
  if (with_global) node_in.push_back(ops::EmbeddingLookup(s.globals, batch.node_graph));
  Var node_delta = Apply(node_update_, ops::Concat(node_in));
  Var nodes = residual ? ops::Add(s.nodes, node_delta) : node_delta;

  const Var global_in[] = {s.globals, ops::SegmentSum(edges, batch.edge_graph, batch.num_graphs),
                           ops::SegmentSum(nodes, batch.node_graph, batch.num_graphs)};
  Var global_delta = Apply(global_update_, ops::Concat(global_in));
  Var globals = residual ? ops::Add(s.globals, global_delta) : global_delta;
  return {nodes, edges, globals};
}

Network::State Network::Run(const GraphBatch& batch) {
  State s = InitState(batch);
  for (size_t i = 0; i < model_.config.num_message_passing_iterations; ++i) s = Step(s, batch);
  return s;
}

Var Network::DecodeMnemonics(const State& state, const GraphBatch& batch, size_t task) {
  if (task >= decoders_.size()) {
    throw Error(ErrorCode::kUnknownTask, "task index " + std::to_string(task) + " out of range");
  }
  return Apply(decoders_[task], ops::EmbeddingLookup(state.nodes, batch.mnemonic_nodes));
}

Var Network::Decode(const State& state, const GraphBatch& batch, size_t task) {
  return ops::SegmentSum(DecodeMnemonics(state, batch, task), batch.mnemonic_graph,
                         batch.num_graphs);
}

namespace {

GraphState ToGraphState(const Network::State& s) {
  return {s.nodes.value(), s.edges.value(), s.globals.value()};
}

}  // namespace

GraphState InitState(const graph::BlockGraph& g, const ModelParams& model) {
  Tape tape;
  Network net(tape, model, false);
  return ToGraphState(net.InitState(MakeBatch(g, model.vocab_size)));
}

GraphState GnStep(const GraphState& state, const graph::BlockGraph& g, const ModelParams& model) {
  const GraphBatch batch = MakeBatch(g, model.vocab_size);
  if (state.nodes.rows() != batch.num_nodes() || state.edges.rows() != batch.num_edges() ||
      state.globals.rows() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "state does not match graph '" + g.block_id + "'");
  }
  Tape tape;
  Network net(tape, model, false);
  return ToGraphState(net.Step(net.Constant(state), batch));
}

GraphState FinalState(const graph::BlockGraph& g, const ModelParams& model) {
  Tape tape;
  Network net(tape, model, false);
  return ToGraphState(net.Run(MakeBatch(g, model.vocab_size)));
}

double Predict(const graph::BlockGraph& g, const ModelParams& model, const std::string& task) {
  const size_t t = model.TaskIndex(task);
  Tape tape;
  Network net(tape, model, false);
  const GraphBatch batch = MakeBatch(g, model.vocab_size);
  return net.Decode(net.Run(batch), batch, t).value()[0];
}

std::vector<double> MnemonicContributions(const graph::BlockGraph& g, const ModelParams& model,
                                          const std::string& task) {
  const size_t t = model.TaskIndex(task);
  Tape tape;
  Network net(tape, model, false);
  const GraphBatch batch = MakeBatch(g, model.vocab_size);
  const auto& v = net.DecodeMnemonics(net.Run(batch), batch, t).value();
  return {v.values().begin(), v.values().end()};
}

std::map<std::string, double> PredictAllTasks(const graph::BlockGraph& g,
                                              const ModelParams& model) {
  const graph::BlockGraph* one[] = {&g};
  const auto rows = PredictMany(one, model);
  std::map<std::string, double> out;
  for (size_t t = 0; t < model.config.task_names.size(); ++t) {
    out[model.config.task_names[t]] = rows[0][t];
  }
  return out;
}

std::vector<std::vector<double>> PredictMany(std::span<const graph::BlockGraph* const> graphs,
                                             const ModelParams& model, size_t batch_size) {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidConfig, "batch size must be >= 1");
  const size_t tasks = model.config.task_names.size();
  std::vector<std::vector<double>> out(graphs.size(), std::vector<double>(tasks));
  for (size_t start = 0; start < graphs.size(); start += batch_size) {
    const size_t n = std::min(batch_size, graphs.size() - start);
    const GraphBatch batch = MakeBatch(graphs.subspan(start, n), model.vocab_size);
    Tape tape;
    Network net(tape, model, false);
    const Network::State state = net.Run(batch);
    for (size_t t = 0; t < tasks; ++t) {
      const Tensor& pred = net.Decode(state, batch, t).value();
      for (size_t i = 0; i < n; ++i) out[start + i][t] = pred[i];
    }
  }
  return out;
}

}  // namespace blockgnn::model
