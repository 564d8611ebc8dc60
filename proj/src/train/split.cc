#include "blockgnn/train/split.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "blockgnn/error.h"
#include "blockgnn/random.h"

namespace blockgnn::train {
namespace {

constexpr uint64_t kValidationSalt = 0x76616c6964617465ULL;

// Indices sorted by (hash, id) so ties cannot depend on input order.
std::vector<size_t> RankBy(std::span<const std::string> ids, const std::vector<size_t>& subset,
                           uint64_t key) {
  std::vector<std::pair<uint64_t, size_t>> keyed;
  keyed.reserve(subset.size());
  for (size_t i : subset) keyed.emplace_back(KeyedHash(ids[i], key), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    return std::tie(a.first, ids[a.second]) < std::tie(b.first, ids[b.second]);
  });
  std::vector<size_t> out;
  out.reserve(keyed.size());
  for (const auto& [h, i] : keyed) out.push_back(i);
  return out;
}

}  // namespace

Split SplitByHash(std::span<const std::string> block_ids, uint64_t seed) {
  if (block_ids.size() < kMinSplitSamples) {
    throw Error(ErrorCode::kTooFewSamples, std::to_string(block_ids.size()) +
                                               " samples, need at least " +
                                               std::to_string(kMinSplitSamples));
  }
  std::set<std::string_view> seen;
  for (const auto& id : block_ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kInvalidConfig, "duplicate block id '" + id + "'");
    }
  }
  std::vector<size_t> all(block_ids.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto ranked = RankBy(block_ids, all, seed);
  const auto n_test = static_cast<size_t>(std::llround(kTestFraction * static_cast<double>(all.size())));
  Split split;
  split.test.assign(ranked.begin(), ranked.begin() + static_cast<long>(n_test));
  std::vector<size_t> rest(ranked.begin() + static_cast<long>(n_test), ranked.end());
  const auto ranked_rest = RankBy(block_ids, rest, SplitMix64(seed ^ kValidationSalt));
  const size_t n_val = std::max<size_t>(
      1, static_cast<size_t>(std::llround(kValidationFraction * static_cast<double>(rest.size()))));
  split.validation.assign(ranked_rest.begin(), ranked_rest.begin() + static_cast<long>(n_val));
  split.train.assign(ranked_rest.begin() + static_cast<long>(n_val), ranked_rest.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace blockgnn::train
