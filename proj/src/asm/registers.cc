#include "blockgnn/asm/registers.h"

#include <string>
#include <unordered_map>

namespace blockgnn::asm_core {
namespace {

struct RegisterTables {
  std::unordered_map<std::string, std::string> alias;  // name -> class
  std::unordered_map<std::string, bool> segment;

  RegisterTables() {
    auto add_family = [this](const std::string& widest,
                             std::initializer_list<const char*> names) {
      alias[widest] = widest;
      for (const char* n : names) alias[n] = widest;
    };
    add_family("RAX", {"EAX", "AX", "AH", "AL"});
    add_family("RBX", {"EBX", "BX", "BH", "BL"});
    add_family("RCX", {"ECX", "CX", "CH", "CL"});
    add_family("RDX", {"EDX", "DX", "DH", "DL"});
    add_family("RSI", {"ESI", "SI", "SIL"});
    add_family("RDI", {"EDI", "DI", "DIL"});
    add_family("RBP", {"EBP", "BP", "BPL"});
    add_family("RSP", {"ESP", "SP", "SPL"});
    for (int i = 8; i <= 15; ++i) {
      const std::string r = "R" + std::to_string(i);
      alias[r] = r;
      for (const char* suffix : {"D", "W", "B", "L"}) alias[r + suffix] = r;
    }
    for (int i = 0; i < 32; ++i) {
      const std::string z = "ZMM" + std::to_string(i);
      alias[z] = z;
      alias["YMM" + std::to_string(i)] = z;
      alias["XMM" + std::to_string(i)] = z;
    }
    for (int i = 0; i < 8; ++i) {
      alias["MM" + std::to_string(i)] = "MM" + std::to_string(i);
      alias["K" + std::to_string(i)] = "K" + std::to_string(i);
      alias["ST" + std::to_string(i)] = "ST" + std::to_string(i);
    }
    add_family("RIP", {"EIP"});
    alias[std::string(kFlagsRegister)] = std::string(kFlagsRegister);
    for (const char* s : {"CS", "DS", "ES", "FS", "GS", "SS"}) {
      alias[s] = s;
      segment[s] = true;
    }
  }
};

const RegisterTables& Tables() {
  static const RegisterTables tables;
  return tables;
}

}  // namespace

bool IsRegister(std::string_view name) {
  return Tables().alias.contains(std::string(name));
}

bool IsSegmentRegister(std::string_view name) {
  return Tables().segment.contains(std::string(name));
}

std::string AliasClass(std::string_view name) {
  const auto& alias = Tables().alias;
  auto it = alias.find(std::string(name));
  return it == alias.end() ? std::string(name) : it->second;
}

}  // namespace blockgnn::asm_core
