#include "blockgnn/asm/record.h"

#include <algorithm>
#include <cctype>

#include "blockgnn/error.h"

namespace blockgnn::asm_core {
namespace {

using nlohmann::json;

[[noreturn]] void Violation(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchemaViolation, path + ": " + what);
}

std::string Upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

const json& Require(const json& object, const char* key, const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) Violation(path + "." + key, "missing required field");
  return *it;
}

std::string RequireString(const json& value, const std::string& path) {
  if (!value.is_string()) Violation(path, "expected a string");
  std::string s = value.get<std::string>();
  if (s.empty()) Violation(path, "must be nonempty");
  return Upper(std::move(s));
}

int64_t RequireInteger(const json& value, const std::string& path) {
  if (value.is_number_integer()) return value.get<int64_t>();
  if (value.is_number_unsigned()) {
    // Accept full 64-bit patterns written as unsigned numbers.
    return static_cast<int64_t>(value.get<uint64_t>());
  }
  Violation(path, "expected an integer");
}

AddressExpr ParseAddressFields(const json& obj, const std::string& path) {
  AddressExpr addr;
  if (auto it = obj.find("base"); it != obj.end()) {
    addr.base = RequireString(*it, path + ".base");
  }
  if (auto it = obj.find("index"); it != obj.end()) {
    addr.index = RequireString(*it, path + ".index");
  }
  if (auto it = obj.find("scale"); it != obj.end()) {
    addr.scale = static_cast<int>(RequireInteger(*it, path + ".scale"));
  }
  if (auto it = obj.find("displacement"); it != obj.end()) {
    addr.displacement = RequireInteger(*it, path + ".displacement");
  }
  if (auto it = obj.find("segment"); it != obj.end()) {
    addr.segment = RequireString(*it, path + ".segment");
  }
  return addr;
}

Operand ParseOperandObject(const json& obj, const std::string& path) {
  if (!obj.is_object()) Violation(path, "expected an object");
  const json& kind_value = Require(obj, "kind", path);
  if (!kind_value.is_string()) Violation(path + ".kind", "expected a string");
  const std::string kind = kind_value.get<std::string>();
  Operand op;
  if (kind == "reg") {
    CheckObjectKeys(obj, path, {"kind", "name"});
    op = RegisterOperand{RequireString(Require(obj, "name", path), path + ".name")};
  } else if (kind == "imm") {
    CheckObjectKeys(obj, path, {"kind", "value"});
    op = ImmediateOperand{RequireInteger(Require(obj, "value", path), path + ".value")};
  } else if (kind == "fp_imm") {
    CheckObjectKeys(obj, path, {"kind", "value"});
    const json& v = Require(obj, "value", path);
    if (!v.is_number()) Violation(path + ".value", "expected a number");
    op = FpImmediateOperand{v.get<double>()};
  } else if (kind == "mem" || kind == "addr") {
    CheckObjectKeys(obj, path,
                    {"kind", "base", "index", "scale", "displacement", "segment"});
    AddressExpr addr = ParseAddressFields(obj, path);
    if (kind == "mem") {
      op = MemoryOperand{std::move(addr)};
    } else {
      op = AddressOperand{std::move(addr)};
    }
  } else {
    Violation(path + ".kind", "unknown operand kind '" + kind + "'");
  }
  if (auto err = ValidateOperand(op)) Violation(path, *err);
  return op;
}

std::vector<Operand> ParseOperandList(const json& list, const std::string& path) {
  if (!list.is_array()) Violation(path, "expected an array");
  std::vector<Operand> out;
  for (size_t i = 0; i < list.size(); ++i) {
    out.push_back(ParseOperandObject(list[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json AddressToJson(const AddressExpr& a, const char* kind) {
  json obj = {{"kind", kind}};
  if (a.base) obj["base"] = *a.base;
  if (a.index) obj["index"] = *a.index;
  if (a.scale) obj["scale"] = *a.scale;
  if (a.displacement) obj["displacement"] = *a.displacement;
  if (a.segment) obj["segment"] = *a.segment;
  return obj;
}

json OperandToJson(const Operand& op) {
  struct Visitor {
    json operator()(const RegisterOperand& r) const {
      return {{"kind", "reg"}, {"name", r.name}};
    }
    json operator()(const ImmediateOperand& i) const {
      return {{"kind", "imm"}, {"value", i.value}};
    }
    json operator()(const FpImmediateOperand& f) const {
      return {{"kind", "fp_imm"}, {"value", f.value}};
    }
    json operator()(const MemoryOperand& m) const {
      return AddressToJson(m.address, "mem");
    }
    json operator()(const AddressOperand& a) const {
      return AddressToJson(a.address, "addr");
    }
  };
  return std::visit(Visitor{}, op);
}

}  // namespace

void CheckObjectKeys(const json& object, const std::string& path,
                     std::initializer_list<const char*> allowed) {
  if (!object.is_object()) Violation(path, "expected an object");
  for (const auto& [key, value] : object.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) Violation(path + "." + key, "unknown field");
  }
}

std::vector<Instruction> ParseInstructionList(const json& list,
                                              const std::string& path) {
  if (!list.is_array()) Violation(path, "expected an array");
  std::vector<Instruction> out;
  for (size_t i = 0; i < list.size(); ++i) {
    const std::string ipath = path + "[" + std::to_string(i) + "]";
    const json& obj = list[i];
    CheckObjectKeys(obj, ipath, {"mnemonic", "prefixes", "inputs", "outputs"});
    Instruction instr;
    instr.mnemonic = RequireString(Require(obj, "mnemonic", ipath), ipath + ".mnemonic");
    const json& prefixes = Require(obj, "prefixes", ipath);
    if (!prefixes.is_array()) Violation(ipath + ".prefixes", "expected an array");
    for (size_t p = 0; p < prefixes.size(); ++p) {
      const std::string ppath = ipath + ".prefixes[" + std::to_string(p) + "]";
      std::string prefix = RequireString(prefixes[p], ppath);
      if (!IsSupportedPrefix(prefix)) Violation(ppath, "unsupported prefix '" + prefix + "'");
      instr.prefixes.push_back(std::move(prefix));
    }
    instr.inputs = ParseOperandList(Require(obj, "inputs", ipath), ipath + ".inputs");
    instr.outputs = ParseOperandList(Require(obj, "outputs", ipath), ipath + ".outputs");
    for (size_t o = 0; o < instr.outputs.size(); ++o) {
      const auto& op = instr.outputs[o];
      if (!std::holds_alternative<RegisterOperand>(op) &&
          !std::holds_alternative<MemoryOperand>(op)) {
        Violation(ipath + ".outputs[" + std::to_string(o) + "]",
                  "only register and memory operands can be outputs");
      }
    }
    out.push_back(std::move(instr));
  }
  return out;
}

BasicBlock ParseBlockRecord(const json& record) {
  CheckObjectKeys(record, "$", {"id", "instructions"});
  BasicBlock block;
  const json& id = Require(record, "id", "$");
  if (!id.is_string()) Violation("$.id", "expected a string");
  block.id = id.get<std::string>();
  block.instructions = ParseInstructionList(Require(record, "instructions", "$"),
                                            "$.instructions");
  if (block.instructions.empty()) Violation("$.instructions", "block has no instructions");
  return block;
}

json InstructionListToJson(const std::vector<Instruction>& instructions) {
  json list = json::array();
  for (const auto& instr : instructions) {
    json inputs = json::array();
    for (const auto& op : instr.inputs) inputs.push_back(OperandToJson(op));
    json outputs = json::array();
    for (const auto& op : instr.outputs) outputs.push_back(OperandToJson(op));
    list.push_back({{"mnemonic", instr.mnemonic},
                    {"prefixes", instr.prefixes},
                    {"inputs", std::move(inputs)},
                    {"outputs", std::move(outputs)}});
  }
  return list;
}

json BlockToRecord(const BasicBlock& block) {
  return {{"id", block.id}, {"instructions", InstructionListToJson(block.instructions)}};
}

}  // namespace blockgnn::asm_core
