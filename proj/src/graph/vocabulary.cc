#include "blockgnn/graph/vocabulary.h"

#include "blockgnn/error.h"

namespace blockgnn::graph {

using asm_core::AddressExpr;
using asm_core::AddressOf;
using asm_core::RegisterOperand;

Vocabulary::Vocabulary() {
  for (auto t : {kImmediateToken, kFpImmediateToken, kMemoryToken, kAddressToken,
                 kUnknownToken}) {
    Add(t);
  }
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens) {
  Vocabulary vocab;
  if (tokens.size() < kNumReservedTokens) {
    throw Error(ErrorCode::kSchemaViolation, "vocabulary lacks reserved tokens");
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i < kNumReservedTokens) {
      if (tokens[i] != vocab.tokens_[i]) {
        throw Error(ErrorCode::kSchemaViolation,
                    "vocabulary entry " + std::to_string(i) + " must be " +
                        vocab.tokens_[i]);
      }
      continue;
    }
    if (vocab.Contains(tokens[i])) {
      throw Error(ErrorCode::kSchemaViolation, "duplicate vocabulary token " + tokens[i]);
    }
    vocab.Add(tokens[i]);
  }
  return vocab;
}

bool Vocabulary::Contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

int32_t Vocabulary::IndexOf(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? index_.at(std::string(kUnknownToken)) : it->second;
}

int32_t Vocabulary::Add(std::string_view token) {
  auto [it, inserted] =
      index_.emplace(std::string(token), static_cast<int32_t>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

nlohmann::json Vocabulary::ToJson() const { return tokens_; }

Vocabulary Vocabulary::FromJson(const nlohmann::json& value) {
  if (!value.is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "vocabulary must be a JSON array");
  }
  std::vector<std::string> tokens;
  for (const auto& t : value) {
    if (!t.is_string()) throw Error(ErrorCode::kSchemaViolation, "vocabulary token must be a string");
    tokens.push_back(t.get<std::string>());
  }
  return FromTokens(std::move(tokens));
}

std::vector<std::string> BlockTokens(const asm_core::BasicBlock& block) {
  std::vector<std::string> out;
  auto add_address = [&out](const AddressExpr& a) {
    if (a.base) out.push_back(*a.base);
    if (a.index) out.push_back(*a.index);
    if (a.segment) out.push_back(*a.segment);
  };
  for (const auto& instr : block.instructions) {
    out.push_back(instr.mnemonic);
    for (const auto& p : instr.prefixes) out.push_back(p);
    for (const auto* list : {&instr.inputs, &instr.outputs}) {
      for (const auto& op : *list) {
        if (const auto* addr = AddressOf(op)) add_address(*addr);
      }
    }
    for (const auto* list : {&instr.inputs, &instr.outputs}) {
      for (const auto& op : *list) {
        if (const auto* r = std::get_if<RegisterOperand>(&op)) out.push_back(r->name);
      }
    }
  }
  return out;
}

Vocabulary BuildVocabulary(std::span<const asm_core::BasicBlock> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::kEmptyCorpus, "no blocks to build a vocabulary from");
  Vocabulary vocab;
  for (const auto& block : blocks) {
    for (const auto& token : BlockTokens(block)) vocab.Add(token);
  }
  return vocab;
}

}  // namespace blockgnn::graph
