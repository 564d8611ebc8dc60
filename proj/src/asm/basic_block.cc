#include "blockgnn/asm/basic_block.h"

#include <array>
#include <sstream>

#include "blockgnn/asm/registers.h"

namespace blockgnn::asm_core {
namespace {

constexpr std::array<std::string_view, 12> kPrefixes = {
    "LOCK",   "REP",      "REPE",     "REPZ", "REPNE",  "REPNZ",
    "DATA16", "ADDR32",   "NOTRACK",  "BND",  "XACQUIRE", "XRELEASE"};

std::optional<std::string> ValidateAddress(const AddressExpr& a) {
  if (!a.base && !a.index && !a.displacement && !a.segment) {
    return "memory operand has no base, index, displacement or segment";
  }
  if (a.scale.has_value() != a.index.has_value()) {
    return "scale must be present exactly when index is present";
  }
  if (a.scale && *a.scale != 1 && *a.scale != 2 && *a.scale != 4 &&
      *a.scale != 8) {
    return "scale must be one of 1, 2, 4, 8";
  }
  for (const auto* reg : {&a.base, &a.index}) {
    if (*reg && !IsRegister(**reg)) return "unknown register '" + **reg + "'";
  }
  if (a.segment && !IsSegmentRegister(*a.segment)) {
    return "'" + *a.segment + "' is not a segment register";
  }
  return std::nullopt;
}

std::string AddressToString(const AddressExpr& a) {
  std::ostringstream out;
  if (a.segment) out << *a.segment << ":";
  out << "[";
  bool first = true;
  if (a.base) {
    out << *a.base;
    first = false;
  }
  if (a.index) {
    if (!first) out << " + ";
    out << *a.index << "*" << a.scale.value_or(1);
    first = false;
  }
  if (a.displacement) {
    const int64_t d = *a.displacement;
    if (first) {
      out << d;
    } else if (d < 0) {
      out << " - " << (0ULL - static_cast<uint64_t>(d));
    } else {
      out << " + " << d;
    }
  }
  out << "]";
  return out.str();
}

}  // namespace

const AddressExpr* AddressOf(const Operand& operand) {
  if (const auto* m = std::get_if<MemoryOperand>(&operand)) return &m->address;
  if (const auto* a = std::get_if<AddressOperand>(&operand)) return &a->address;
  return nullptr;
}

bool IsSupportedPrefix(const std::string& prefix) {
  for (auto p : kPrefixes) {
    if (p == prefix) return true;
  }
  return false;
}

std::optional<std::string> ValidateOperand(const Operand& operand) {
  if (const auto* r = std::get_if<RegisterOperand>(&operand)) {
    if (!IsRegister(r->name)) return "unknown register '" + r->name + "'";
    return std::nullopt;
  }
  if (const auto* addr = AddressOf(operand)) return ValidateAddress(*addr);
  return std::nullopt;
}

std::optional<std::string> ValidateInstruction(const Instruction& instruction) {
  if (instruction.mnemonic.empty()) return "empty mnemonic";
  for (const auto& p : instruction.prefixes) {
    if (!IsSupportedPrefix(p)) return "unsupported prefix '" + p + "'";
  }
  for (const auto& op : instruction.inputs) {
    if (auto err = ValidateOperand(op)) return err;
  }
  for (const auto& op : instruction.outputs) {
    if (std::holds_alternative<ImmediateOperand>(op) ||
        std::holds_alternative<FpImmediateOperand>(op) ||
        std::holds_alternative<AddressOperand>(op)) {
      return "only register and memory operands can be outputs";
    }
    if (auto err = ValidateOperand(op)) return err;
  }
  return std::nullopt;
}

std::string ToString(const Operand& operand) {
  struct Visitor {
    std::string operator()(const RegisterOperand& r) const { return r.name; }
    std::string operator()(const ImmediateOperand& i) const {
      return std::to_string(i.value);
    }
    std::string operator()(const FpImmediateOperand& f) const {
      std::ostringstream out;
      out << f.value;
      return out.str();
    }
    std::string operator()(const MemoryOperand& m) const {
      return "PTR " + AddressToString(m.address);
    }
    std::string operator()(const AddressOperand& a) const {
      return AddressToString(a.address);
    }
  };
  return std::visit(Visitor{}, operand);
}

std::string ToString(const Instruction& instruction) {
  std::ostringstream out;
  for (const auto& p : instruction.prefixes) out << p << " ";
  out << instruction.mnemonic << " {in:";
  for (const auto& op : instruction.inputs) out << " " << ToString(op);
  out << "; out:";
  for (const auto& op : instruction.outputs) out << " " << ToString(op);
  out << "}";
  return out.str();
}

}  // namespace blockgnn::asm_core
