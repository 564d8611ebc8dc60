#include "blockgnn/asm/semantics.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace blockgnn::asm_core {
namespace {

// Flag usage markers for table rows.
constexpr unsigned kNoFlags = 0;
constexpr unsigned kFlagsR = 1;
constexpr unsigned kFlagsW = 2;

struct Row {
  const char* mnemonics;  // space separated, all share the row
  const char* roles;      // comma separated: R, W, RW, A; empty for arity 0
  const char* implicit_reads = "";
  const char* implicit_writes = "";
  unsigned flags = kNoFlags;
};

// Operand roles for the mnemonics that dominate BHive-class corpora:
// scalar integer ALU, moves, conditional moves/sets, shifts, multiplies and
// divides, stack and string ops, SSE and the common three-operand AVX forms.
// Implicit register operands use the widest alias.
const Row kRows[] = {
    {"ADD SUB AND OR XOR", "RW,R", "", "", kFlagsW},
    {"ADC SBB", "RW,R", "", "", kFlagsR | kFlagsW},
    {"CMP TEST", "R,R", "", "", kFlagsW},
    {"BT", "R,R", "", "", kFlagsW},
    {"BTS BTR BTC", "RW,R", "", "", kFlagsW},
    {"INC DEC NEG", "RW", "", "", kFlagsW},
    {"NOT BSWAP", "RW"},
    {"MOV MOVZX MOVSX MOVSXD MOVABS", "W,R"},
    {"LEA", "W,A"},
    {"NOP", ""},
    {"NOP", "A"},
    {"XCHG", "RW,RW"},
    {"XADD", "RW,RW", "", "", kFlagsW},
    {"CMPXCHG", "RW,R", "RAX", "RAX", kFlagsW},
    {"CMOVA CMOVAE CMOVB CMOVBE CMOVE CMOVNE CMOVG CMOVGE CMOVL CMOVLE "
     "CMOVS CMOVNS CMOVO CMOVNO CMOVP CMOVNP",
     "RW,R", "", "", kFlagsR},
    {"SETA SETAE SETB SETBE SETE SETNE SETG SETGE SETL SETLE SETS SETNS "
     "SETO SETNO SETP SETNP",
     "W", "", "", kFlagsR},
    {"SHL SHR SAR SAL ROL ROR", "RW,R", "", "", kFlagsW},
    {"SHL SHR SAR SAL ROL ROR", "RW", "", "", kFlagsW},
    {"RCL RCR", "RW,R", "", "", kFlagsR | kFlagsW},
    {"SHLD SHRD", "RW,R,R", "", "", kFlagsW},
    {"SARX SHLX SHRX RORX ANDN", "W,R,R"},
    {"BSF BSR LZCNT TZCNT POPCNT", "W,R", "", "", kFlagsW},
    {"IMUL", "R", "RAX", "RAX RDX", kFlagsW},
    {"IMUL", "RW,R", "", "", kFlagsW},
    {"IMUL", "W,R,R", "", "", kFlagsW},
    {"MUL", "R", "RAX", "RAX RDX", kFlagsW},
    {"DIV IDIV", "R", "RAX RDX", "RAX RDX", kFlagsW},
    {"CDQ", "", "RAX", "RDX"},
    {"CQO", "", "RAX", "RDX"},
    {"CDQE CWDE CBW", "", "RAX", "RAX"},
    {"PUSH", "R", "RSP", "RSP"},
    {"POP", "W", "RSP", "RSP"},
    {"MOVSB MOVSW MOVSD MOVSQ", "", "RSI RDI RCX", "RSI RDI RCX"},
    {"STOSB STOSW STOSD STOSQ", "", "RAX RDI RCX", "RDI RCX"},
    {"MOVAPS MOVAPD MOVUPS MOVUPD MOVDQA MOVDQU MOVSS MOVSD MOVD MOVQ "
     "MOVHPS MOVLPS MOVHPD MOVLPD MOVDDUP",
     "W,R"},
    {"CVTSI2SS CVTSI2SD CVTSS2SD CVTSD2SS SQRTSS SQRTSD", "RW,R"},
    {"CVTTSD2SI CVTTSS2SI CVTSD2SI CVTSS2SI CVTDQ2PS CVTPS2DQ CVTTPS2DQ "
     "CVTDQ2PD CVTPD2PS SQRTPS SQRTPD",
     "W,R"},
    {"ADDSS ADDSD ADDPS ADDPD SUBSS SUBSD SUBPS SUBPD MULSS MULSD MULPS "
     "MULPD DIVSS DIVSD DIVPS DIVPD MINSS MINSD MINPS MINPD MAXSS MAXSD "
     "MAXPS MAXPD ANDPS ANDPD ANDNPS ANDNPD ORPS ORPD XORPS XORPD",
     "RW,R"},
    {"PXOR PAND PANDN POR PADDB PADDW PADDD PADDQ PSUBB PSUBW PSUBD PSUBQ "
     "PMULLD PMULUDQ PCMPEQB PCMPEQW PCMPEQD PCMPGTB PCMPGTD PMINUB PMAXUB "
     "UNPCKLPS UNPCKLPD UNPCKHPS UNPCKHPD PUNPCKLBW PUNPCKLWD PUNPCKLDQ "
     "PUNPCKLQDQ PUNPCKHQDQ PSLLD PSRLD PSRAD PSLLQ PSRLQ PSLLDQ PSRLDQ",
     "RW,R"},
    {"SHUFPS SHUFPD PALIGNR", "RW,R,R"},
    {"PSHUFD PSHUFB PSHUFLW PSHUFHW", "W,R,R"},
    {"PSHUFB", "RW,R"},
    {"UCOMISS UCOMISD COMISS COMISD PTEST", "R,R", "", "", kFlagsW},
    {"VMOVAPS VMOVAPD VMOVUPS VMOVUPD VMOVDQA VMOVDQU VMOVSS VMOVSD VMOVD "
     "VMOVQ VBROADCASTSS VBROADCASTSD VSQRTPS VSQRTPD VCVTDQ2PS VCVTPS2DQ",
     "W,R"},
    {"VADDPS VADDPD VADDSS VADDSD VSUBPS VSUBPD VSUBSS VSUBSD VMULPS VMULPD "
     "VMULSS VMULSD VDIVPS VDIVPD VDIVSS VDIVSD VXORPS VXORPD VANDPS VANDPD "
     "VANDNPS VORPS VORPD VMAXPS VMINPS VPXOR VPAND VPANDN VPOR VPADDD "
     "VPADDQ VPSUBD VPSUBQ VPMULLD VUNPCKLPS VPUNPCKLQDQ VCVTSI2SD "
     "VCVTSI2SS",
     "W,R,R"},
    {"VSHUFPS VPSHUFD VPERMILPS VINSERTF128 VEXTRACTF128 VPERM2F128",
     "W,R,R"},
    {"VINSERTF128 VPERM2F128 VSHUFPS", "W,R,R,R"},
    {"VZEROUPPER", ""},
};

using Key = std::pair<std::string, size_t>;

std::vector<std::string> Split(const char* text, char sep) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

OperandRole ParseRole(const std::string& role) {
  if (role == "R") return OperandRole::kRead;
  if (role == "W") return OperandRole::kWrite;
  if (role == "RW") return OperandRole::kReadWrite;
  return OperandRole::kAddress;
}

const std::map<Key, OperandSemantics>& Table() {
  static const std::map<Key, OperandSemantics> table = [] {
    std::map<Key, OperandSemantics> t;
    for (const Row& row : kRows) {
      OperandSemantics sem;
      for (const auto& r : Split(row.roles, ',')) sem.roles.push_back(ParseRole(r));
      sem.implicit_reads = Split(row.implicit_reads, ' ');
      sem.implicit_writes = Split(row.implicit_writes, ' ');
      sem.reads_flags = row.flags & kFlagsR;
      sem.writes_flags = row.flags & kFlagsW;
      for (const auto& m : Split(row.mnemonics, ' ')) {
        t.emplace(Key{m, sem.roles.size()}, sem);
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

std::optional<OperandSemantics> LookupSemantics(std::string_view mnemonic,
                                                size_t arity) {
  const auto& table = Table();
  auto it = table.find(Key{std::string(mnemonic), arity});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool IsKnownMnemonic(std::string_view mnemonic) {
  const auto& table = Table();
  auto it = table.lower_bound(Key{std::string(mnemonic), 0});
  return it != table.end() && it->first.first == mnemonic;
}

std::vector<std::string> KnownMnemonics() {
  std::set<std::string> names;
  for (const auto& [key, sem] : Table()) names.insert(key.first);
  return {names.begin(), names.end()};
}

}  // namespace blockgnn::asm_core
