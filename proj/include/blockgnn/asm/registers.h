#pragma once

#include <string>
#include <string_view>

namespace blockgnn::asm_core {

// Pseudo-register used when flag dependencies are modeled.
inline constexpr std::string_view kFlagsRegister = "EFLAGS";

// True for architectural register names (uppercase) this library knows:
// general purpose (all widths), RIP, segment, x87, MMX, XMM/YMM/ZMM, mask
// registers and EFLAGS.
bool IsRegister(std::string_view name);

bool IsSegmentRegister(std::string_view name);

// The widest register sharing storage with `name`: EAX/AX/AH/AL -> RAX,
// R9B -> R9, XMM3/YMM3 -> ZMM3. Registers with no wider alias map to
// themselves.
std::string AliasClass(std::string_view name);

}  // namespace blockgnn::asm_core
