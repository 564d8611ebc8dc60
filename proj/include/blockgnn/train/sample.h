#pragma once

#include <map>
#include <string>

#include "blockgnn/graph/block_graph.h"

namespace blockgnn::train {

// An encoded block with its measured throughputs, in cycles per 100
// iterations, keyed by task (microarchitecture) name.
struct Sample {
  std::string block_id;
  graph::BlockGraph graph;
  std::map<std::string, double> labels;

  bool operator==(const Sample&) const = default;
};

}  // namespace blockgnn::train
