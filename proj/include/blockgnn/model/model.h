#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "blockgnn/graph/block_graph.h"
#include "blockgnn/model/config.h"
#include "blockgnn/tensor/autodiff.h"
#include "blockgnn/tensor/parameters.h"

namespace blockgnn::model {

// Parameters in a fixed order:
//   token_embedding          [vocab x node]
//   edge_embedding           [7 x edge]
//   global_projection/{w,b}  [(vocab + 7) x global], [global]
//   {edge,node,global}_update/{ln/gain, ln/bias, layer<i>/w, layer<i>/b}
//   decoder/<task>/{ln/gain, ln/bias, layer<i>/w, layer<i>/b}
// The ln/* entries exist only when use_layer_norm is set.
struct ModelParams {
  ModelConfig config;
  size_t vocab_size = 0;
  tensor::ParameterSet params;

  size_t TaskIndex(const std::string& task) const;  // Error(kUnknownTask)
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0, embedding rows
// ~ U(-0.1, 0.1), layer-norm gain 1 and bias 0.
ModelParams InitModel(const ModelConfig& cfg, size_t vocab_size, uint64_t seed);

// Names and shapes InitModel would produce; used to validate checkpoints.
std::vector<std::pair<std::string, std::vector<size_t>>> ParameterManifest(
    const ModelConfig& cfg, size_t vocab_size);

// Zeros the output layer of the edge, node and global update networks.
void ZeroUpdateOutputLayers(ModelParams& model);

// Disjoint union of several graphs with node and edge ids offset so that
// segment sums never mix graphs.
struct GraphBatch {
  size_t num_graphs = 0;
  std::vector<int32_t> token_ids;    // per node
  std::vector<int32_t> node_graph;   // per node
  std::vector<int32_t> edge_types;   // per edge
  std::vector<int32_t> edge_src;     // per edge, batch node id
  std::vector<int32_t> edge_dst;     // per edge, batch node id
  std::vector<int32_t> edge_graph;   // per edge
  std::vector<int32_t> mnemonic_nodes;
  std::vector<int32_t> mnemonic_graph;
  std::vector<size_t> node_offset;   // num_graphs + 1 entries
  std::vector<size_t> edge_offset;   // num_graphs + 1 entries
  tensor::Tensor global_init;        // [num_graphs x (vocab + 7)]

  size_t num_nodes() const { return token_ids.size(); }
  size_t num_edges() const { return edge_types.size(); }
};

// Throws Error(kShapeMismatch) if a global_init length disagrees with
// `vocab_size` and Error(kIndexOutOfRange) for bad node references.
GraphBatch MakeBatch(std::span<const graph::BlockGraph* const> graphs, size_t vocab_size);
GraphBatch MakeBatch(const graph::BlockGraph& g, size_t vocab_size);

// Message-passing state; `globals` has one row per graph.
struct GraphState {
  tensor::Tensor nodes;    // [num_nodes x node]
  tensor::Tensor edges;    // [num_edges x edge]
  tensor::Tensor globals;  // [num_graphs x global]

  bool operator==(const GraphState&) const = default;
};

// The network expressed on an autodiff tape. With `trainable` the
// parameters are tape leaves and receive gradients.
class Network {
 public:
  struct State {
    tensor::Var nodes;
    tensor::Var edges;
    tensor::Var globals;
  };

  Network(tensor::Tape& tape, const ModelParams& model, bool trainable);
  // Uses caller-made handles (one per parameter, same order and shapes) in
  // place of the model's values. Throws Error(kShapeMismatch).
  Network(tensor::Tape& tape, const ModelParams& model, std::vector<tensor::Var> bound);

  const std::vector<tensor::Var>& parameters() const { return vars_; }

  State Constant(const GraphState& state);
  State InitState(const GraphBatch& batch);
  State Step(const State& state, const GraphBatch& batch);
  // InitState followed by the configured number of steps.
  State Run(const GraphBatch& batch);
  // Decoder output for every mnemonic node: [num_mnemonics x 1].
  tensor::Var DecodeMnemonics(const State& state, const GraphBatch& batch, size_t task);
  // Per-graph prediction, the sum of its mnemonic contributions: [num_graphs x 1].
  tensor::Var Decode(const State& state, const GraphBatch& batch, size_t task);

 private:
  struct Mlp {
    int32_t ln_gain = -1;
    int32_t ln_bias = -1;
    std::vector<std::pair<int32_t, int32_t>> layers;
  };
  void BindAll();
  Mlp Bind(const std::string& prefix) const;
  tensor::Var Apply(const Mlp& mlp, tensor::Var x);

  tensor::Tape& tape_;
  const ModelParams& model_;
  std::vector<tensor::Var> vars_;
  int32_t token_embedding_, edge_embedding_, global_w_, global_b_;
  Mlp edge_update_, node_update_, global_update_;
  std::vector<Mlp> decoders_;
};

// Single-graph convenience wrappers (no gradients).
GraphState InitState(const graph::BlockGraph& g, const ModelParams& model);
GraphState GnStep(const GraphState& state, const graph::BlockGraph& g, const ModelParams& model);
GraphState FinalState(const graph::BlockGraph& g, const ModelParams& model);
// Error(kUnknownTask) if `task` is not configured.
double Predict(const graph::BlockGraph& g, const ModelParams& model, const std::string& task);
// Decoder output of each mnemonic node, in instruction order.
std::vector<double> MnemonicContributions(const graph::BlockGraph& g, const ModelParams& model,
                                          const std::string& task);
// One shared message-passing pass, every decoder applied to its result.
std::map<std::string, double> PredictAllTasks(const graph::BlockGraph& g,
                                              const ModelParams& model);
// Predictions [graph][task] in config task order, evaluated in batches.
std::vector<std::vector<double>> PredictMany(std::span<const graph::BlockGraph* const> graphs,
                                             const ModelParams& model, size_t batch_size = 100);

}  // namespace blockgnn::model
