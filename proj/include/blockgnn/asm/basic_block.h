#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace blockgnn::asm_core {

// Register names are stored uppercase, e.g. "RAX", "XMM3", "R15D".
struct RegisterOperand {
  std::string name;
  bool operator==(const RegisterOperand&) const = default;
};

struct ImmediateOperand {
  int64_t value = 0;
  bool operator==(const ImmediateOperand&) const = default;
};

struct FpImmediateOperand {
  double value = 0.0;
  bool operator==(const FpImmediateOperand&) const = default;
};

// base + index * scale + displacement, optionally segment-qualified.
// `scale` is set iff `index` is set.
struct AddressExpr {
  std::optional<std::string> base;
  std::optional<std::string> index;
  std::optional<int> scale;
  std::optional<int64_t> displacement;
  std::optional<std::string> segment;
  bool operator==(const AddressExpr&) const = default;
};

// A value read from or written to memory at `address`.
struct MemoryOperand {
  AddressExpr address;
  bool operator==(const MemoryOperand&) const = default;
};

// An address that is computed but never dereferenced (LEA, multi-byte NOP).
struct AddressOperand {
  AddressExpr address;
  bool operator==(const AddressOperand&) const = default;
};

using Operand = std::variant<RegisterOperand, ImmediateOperand,
                             FpImmediateOperand, MemoryOperand, AddressOperand>;

struct Instruction {
  std::string mnemonic;
  std::vector<std::string> prefixes;
  std::vector<Operand> inputs;
  std::vector<Operand> outputs;
  bool operator==(const Instruction&) const = default;
};

struct BasicBlock {
  std::string id;
  std::vector<Instruction> instructions;
  bool operator==(const BasicBlock&) const = default;
};

// Returns the AddressExpr of a memory or address operand, nullptr otherwise.
const AddressExpr* AddressOf(const Operand& operand);

bool IsSupportedPrefix(const std::string& prefix);

// Checks the Operand invariants; returns a description of the first
// violation, or nullopt.
std::optional<std::string> ValidateOperand(const Operand& operand);
std::optional<std::string> ValidateInstruction(const Instruction& instruction);

// Human-readable rendering in Intel-like syntax, for diagnostics.
std::string ToString(const Operand& operand);
std::string ToString(const Instruction& instruction);

}  // namespace blockgnn::asm_core
