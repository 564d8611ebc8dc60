#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blockgnn::train {

inline constexpr double kTestFraction = 0.17;
inline constexpr double kValidationFraction = 0.02;
inline constexpr size_t kMinSplitSamples = 10;

// Indices into the input, each partition in ascending index order.
struct Split {
  std::vector<size_t> train;
  std::vector<size_t> validation;
  std::vector<size_t> test;
};

// Ranks blocks by a keyed hash of (block_id, seed); the first
// round(0.17 n) form the test set. Of the rest, round(0.02 m) (at least 1)
// with the lowest second keyed hash form the validation set. Depends only
// on the ids and the seed. Throws Error(kTooFewSamples) below 10 ids and
// Error(kInvalidConfig) on duplicate ids.
Split SplitByHash(std::span<const std::string> block_ids, uint64_t seed);

}  // namespace blockgnn::train
