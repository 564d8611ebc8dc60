#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "blockgnn/asm/basic_block.h"
#include "json.hpp"

namespace blockgnn::graph {

inline constexpr std::string_view kImmediateToken = "IMMEDIATE";
inline constexpr std::string_view kFpImmediateToken = "FP_IMMEDIATE";
inline constexpr std::string_view kMemoryToken = "MEMORY";
inline constexpr std::string_view kAddressToken = "ADDRESS";
inline constexpr std::string_view kUnknownToken = "UNKNOWN";
inline constexpr size_t kNumReservedTokens = 5;

// Dense token -> index map. The five reserved tokens occupy indices 0..4 in
// the order above; other tokens follow in first-seen order.
class Vocabulary {
 public:
  // A vocabulary holding only the reserved tokens.
  Vocabulary();

  // Throws Error(kSchemaViolation) if `tokens` does not start with the
  // reserved tokens or contains duplicates.
  static Vocabulary FromTokens(std::vector<std::string> tokens);

  size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int32_t index) const { return tokens_.at(index); }

  bool Contains(std::string_view token) const;
  // Index of `token`, or the UNKNOWN index if absent.
  int32_t IndexOf(std::string_view token) const;
  // Adds `token` if absent; returns its index.
  int32_t Add(std::string_view token);

  nlohmann::json ToJson() const;
  static Vocabulary FromJson(const nlohmann::json& value);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

// Mnemonic, prefix and register tokens in the order the encoder visits them.
std::vector<std::string> BlockTokens(const asm_core::BasicBlock& block);

// Throws Error(kEmptyCorpus) when `blocks` is empty.
Vocabulary BuildVocabulary(std::span<const asm_core::BasicBlock> blocks);

}  // namespace blockgnn::graph
