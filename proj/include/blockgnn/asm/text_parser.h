#pragma once

#include <string>
#include <string_view>

#include "blockgnn/asm/basic_block.h"
#include "blockgnn/asm/semantics.h"

namespace blockgnn::asm_core {

// Parses multi-line Intel-syntax assembly, one instruction per line:
//
//   [prefix ]MNEMONIC[ op1[, op2[, op3]]]
//
// Memory operands use `[SIZE PTR ][SEG:][base + index*scale + disp]`.
// Everything after ';' on a line is ignored. Input is case-insensitive;
// tokens are stored uppercase. Operand roles come from the bundled
// semantics table.
//
// Throws Error(kEmptyBlock), Error(kUnknownMnemonic), Error(kMalformedOperand).
BasicBlock ParseBlockText(std::string_view text, std::string id = {},
                          const SemanticsOptions& options = {});

Instruction ParseInstructionLine(std::string_view line,
                                 const SemanticsOptions& options = {});

// Parses a single operand without role information. Memory syntax yields a
// MemoryOperand.
Operand ParseOperand(std::string_view text);

}  // namespace blockgnn::asm_core
