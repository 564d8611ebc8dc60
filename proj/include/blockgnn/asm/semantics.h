#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blockgnn::asm_core {

// How an explicit operand position is used by an instruction.
enum class OperandRole {
  kRead,
  kWrite,
  kReadWrite,
  kAddress,  // memory syntax whose address is computed but not dereferenced
};

struct OperandSemantics {
  std::vector<OperandRole> roles;  // one per explicit operand position
  std::vector<std::string> implicit_reads;
  std::vector<std::string> implicit_writes;
  bool reads_flags = false;
  bool writes_flags = false;
};

struct SemanticsOptions {
  bool implicit_flags = false;
  bool implicit_registers = true;
  bool operator==(const SemanticsOptions&) const = default;
};

// Looks up the read/write semantics for `mnemonic` (uppercase) used with
// `arity` explicit operands. Returns nullopt if the pair is not in the
// bundled table.
std::optional<OperandSemantics> LookupSemantics(std::string_view mnemonic,
                                                size_t arity);

// True if the mnemonic appears in the table with any arity.
bool IsKnownMnemonic(std::string_view mnemonic);

// All mnemonics in the table, sorted.
std::vector<std::string> KnownMnemonics();

}  // namespace blockgnn::asm_core
