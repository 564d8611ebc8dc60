#pragma once

#include <string>
#include <vector>

#include "blockgnn/asm/basic_block.h"
#include "json.hpp"

namespace blockgnn::asm_core {

// Structured block records, one JSON object per line:
//
//   {"id": str, "instructions": [
//     {"mnemonic": str, "prefixes": [str], "inputs": [Op], "outputs": [Op]}]}
//
// Op is one of
//   {"kind": "reg", "name": str}
//   {"kind": "imm", "value": int}
//   {"kind": "fp_imm", "value": number}
//   {"kind": "mem"|"addr", "base"?: str, "index"?: str, "scale"?: int,
//    "displacement"?: int, "segment"?: str}
//
// "addr" is an address that is computed but not dereferenced (LEA). Unknown
// field names are rejected. Mnemonics need not be in the semantics table.

// Throws Error(kSchemaViolation) naming the offending field path.
BasicBlock ParseBlockRecord(const nlohmann::json& record);
std::vector<Instruction> ParseInstructionList(const nlohmann::json& list,
                                              const std::string& path);

nlohmann::json InstructionListToJson(const std::vector<Instruction>& instructions);
nlohmann::json BlockToRecord(const BasicBlock& block);

// Fails with SchemaViolation(path) if `object` has keys outside `allowed`
// or is not an object.
void CheckObjectKeys(const nlohmann::json& object, const std::string& path,
                     std::initializer_list<const char*> allowed);

}  // namespace blockgnn::asm_core
