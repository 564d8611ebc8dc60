#include "blockgnn/asm/text_parser.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <vector>

#include "blockgnn/asm/registers.h"
#include "blockgnn/error.h"

namespace blockgnn::asm_core {
namespace {

std::string Upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void Malformed(std::string_view text, std::string_view why) {
  throw Error(ErrorCode::kMalformedOperand,
              "'" + std::string(text) + "': " + std::string(why));
}

// Parses a decimal or 0x-prefixed hexadecimal integer with optional sign.
std::optional<int64_t> ParseInteger(std::string_view s) {
  s = Trim(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
    s = Trim(s);
  }
  if (s.empty()) return std::nullopt;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'X' || s[1] == 'x')) {
    base = 16;
    s.remove_prefix(2);
  }
  uint64_t magnitude = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), magnitude, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  if (negative) {
    if (magnitude > static_cast<uint64_t>(std::numeric_limits<int64_t>::max()) + 1) {
      return std::nullopt;
    }
    return static_cast<int64_t>(0ULL - magnitude);
  }
  // Hex literals may spell out the full 64-bit pattern (e.g. 0xFFFFFFFFFFFFFFFF).
  if (base == 10 &&
      magnitude > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())) {
    return std::nullopt;
  }
  return static_cast<int64_t>(magnitude);
}

std::optional<double> ParseFloat(std::string_view s) {
  s = Trim(s);
  if (s.find('.') == std::string_view::npos &&
      s.find('E') == std::string_view::npos) {
    return std::nullopt;
  }
  std::string buf(s);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

bool IsScale(int64_t v) { return v == 1 || v == 2 || v == 4 || v == 8; }

// Parses the inside of `[...]`.
AddressExpr ParseAddressBody(std::string_view whole, std::string_view body,
                             std::optional<std::string> segment) {
  AddressExpr addr;
  addr.segment = std::move(segment);
  body = Trim(body);
  if (auto colon = body.find(':'); colon != std::string_view::npos) {
    if (addr.segment) Malformed(whole, "two segment overrides");
    addr.segment = std::string(Trim(body.substr(0, colon)));
    body = Trim(body.substr(colon + 1));
  }
  if (body.empty()) Malformed(whole, "empty address");

  // Split into signed terms.
  std::vector<std::pair<bool, std::string_view>> terms;
  bool negative = false;
  size_t start = 0;
  for (size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || body[i] == '+' || body[i] == '-') {
      std::string_view term = Trim(body.substr(start, i - start));
      if (term.empty()) {
        if (i != 0 || i == body.size()) Malformed(whole, "empty address term");
      } else {
        terms.emplace_back(negative, term);
      }
      if (i < body.size()) negative = body[i] == '-';
      start = i + 1;
    }
  }

  int64_t displacement = 0;
  bool has_displacement = false;
  for (const auto& [neg, term] : terms) {
    if (auto star = term.find('*'); star != std::string_view::npos) {
      std::string lhs(Trim(term.substr(0, star)));
      std::string rhs(Trim(term.substr(star + 1)));
      if (!IsRegister(lhs)) std::swap(lhs, rhs);
      auto scale = ParseInteger(rhs);
      if (neg || !IsRegister(lhs) || !scale || !IsScale(*scale)) {
        Malformed(whole, "bad scaled index term");
      }
      if (addr.index) Malformed(whole, "two index registers");
      addr.index = lhs;
      addr.scale = static_cast<int>(*scale);
    } else if (IsRegister(term)) {
      if (neg) Malformed(whole, "negated register");
      if (!addr.base) {
        addr.base = std::string(term);
      } else if (!addr.index) {
        addr.index = std::string(term);
        addr.scale = 1;
      } else {
        Malformed(whole, "too many registers");
      }
    } else if (auto value = ParseInteger(term)) {
      const int64_t v = neg ? static_cast<int64_t>(0ULL - static_cast<uint64_t>(*value))
                            : *value;
      displacement = static_cast<int64_t>(static_cast<uint64_t>(displacement) +
                                          static_cast<uint64_t>(v));
      has_displacement = true;
    } else {
      Malformed(whole, "unrecognized address term '" + std::string(term) + "'");
    }
  }
  if (has_displacement) addr.displacement = displacement;
  if (addr.segment && !IsSegmentRegister(*addr.segment)) {
    Malformed(whole, "'" + *addr.segment + "' is not a segment register");
  }
  if (!addr.base && !addr.index && !addr.displacement && !addr.segment) {
    Malformed(whole, "empty address");
  }
  return addr;
}

constexpr std::string_view kSizeKeywords[] = {
    "BYTE", "WORD", "DWORD", "QWORD", "TBYTE", "OWORD", "FWORD",
    "MMWORD", "XMMWORD", "YMMWORD", "ZMMWORD"};

AddressExpr ParseMemorySyntax(std::string_view text) {
  std::string_view s = Trim(text);
  for (auto kw : kSizeKeywords) {
    if (s.starts_with(kw) && s.size() > kw.size() &&
        (std::isspace(static_cast<unsigned char>(s[kw.size()])) ||
         s[kw.size()] == 'P')) {
      s = Trim(s.substr(kw.size()));
      break;
    }
  }
  if (s.starts_with("PTR")) s = Trim(s.substr(3));
  const size_t open = s.find('[');
  const size_t close = s.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open || Trim(s.substr(close + 1)).size() != 0) {
    Malformed(text, "unbalanced brackets");
  }
  std::optional<std::string> segment;
  std::string_view before = Trim(s.substr(0, open));
  if (!before.empty()) {
    if (!before.ends_with(":")) Malformed(text, "unexpected text before '['");
    segment = std::string(Trim(before.substr(0, before.size() - 1)));
  }
  return ParseAddressBody(text, s.substr(open + 1, close - open - 1),
                          std::move(segment));
}

// Splits operands on top-level commas.
std::vector<std::string_view> SplitOperands(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      out.push_back(Trim(s.substr(start, i - start)));
      start = i + 1;
    } else if (s[i] == '[') {
      ++depth;
    } else if (s[i] == ']') {
      --depth;
    }
  }
  return out;
}

}  // namespace

Operand ParseOperand(std::string_view raw) {
  const std::string text = Upper(Trim(raw));
  if (text.empty()) Malformed(raw, "empty operand");
  if (text.find('[') != std::string::npos) {
    return MemoryOperand{ParseMemorySyntax(text)};
  }
  if (IsRegister(text)) return RegisterOperand{text};
  if (auto v = ParseInteger(text)) return ImmediateOperand{*v};
  if (auto f = ParseFloat(text)) return FpImmediateOperand{*f};
  Malformed(raw, "not a register, immediate or memory reference");
}

Instruction ParseInstructionLine(std::string_view raw_line,
                                 const SemanticsOptions& options) {
  std::string line = Upper(Trim(raw_line));
  Instruction instr;

  // Leading prefixes, then the mnemonic.
  std::string_view rest = line;
  while (true) {
    rest = Trim(rest);
    size_t end = 0;
    while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end]))) {
      ++end;
    }
    std::string word(rest.substr(0, end));
    rest = rest.substr(end);
    if (IsSupportedPrefix(word) && !Trim(rest).empty()) {
      instr.prefixes.push_back(word);
      continue;
    }
    instr.mnemonic = word;
    break;
  }
  if (instr.mnemonic.empty()) {
    throw Error(ErrorCode::kUnknownMnemonic, "missing mnemonic");
  }

  std::vector<std::string_view> operand_texts;
  if (!Trim(rest).empty()) operand_texts = SplitOperands(rest);

  const auto sem = LookupSemantics(instr.mnemonic, operand_texts.size());
  if (!sem) {
    throw Error(ErrorCode::kUnknownMnemonic,
                "'" + instr.mnemonic + "' with " +
                    std::to_string(operand_texts.size()) +
                    " operands is not in the semantics table");
  }

  for (size_t i = 0; i < operand_texts.size(); ++i) {
    Operand op = ParseOperand(operand_texts[i]);
    const OperandRole role = sem->roles[i];
    const bool is_memory = std::holds_alternative<MemoryOperand>(op);
    const bool is_register = std::holds_alternative<RegisterOperand>(op);
    if (role == OperandRole::kAddress) {
      if (!is_memory) Malformed(operand_texts[i], "expected an address");
      instr.inputs.push_back(AddressOperand{std::get<MemoryOperand>(op).address});
      continue;
    }
    if ((role == OperandRole::kWrite || role == OperandRole::kReadWrite) &&
        !is_memory && !is_register) {
      Malformed(operand_texts[i], "destination must be a register or memory");
    }
    if (role == OperandRole::kRead || role == OperandRole::kReadWrite) {
      instr.inputs.push_back(op);
    }
    if (role == OperandRole::kWrite || role == OperandRole::kReadWrite) {
      instr.outputs.push_back(op);
    }
  }

  if (options.implicit_registers) {
    for (const auto& r : sem->implicit_reads) instr.inputs.push_back(RegisterOperand{r});
    for (const auto& r : sem->implicit_writes) instr.outputs.push_back(RegisterOperand{r});
  }
  if (options.implicit_flags) {
    if (sem->reads_flags) instr.inputs.push_back(RegisterOperand{std::string(kFlagsRegister)});
    if (sem->writes_flags) instr.outputs.push_back(RegisterOperand{std::string(kFlagsRegister)});
  }
  return instr;
}

BasicBlock ParseBlockText(std::string_view text, std::string id,
                          const SemanticsOptions& options) {
  BasicBlock block;
  block.id = std::move(id);
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (auto comment = line.find(';'); comment != std::string_view::npos) {
      line = line.substr(0, comment);
    }
    if (!Trim(line).empty()) {
      block.instructions.push_back(ParseInstructionLine(line, options));
    }
    start = end + 1;
  }
  if (block.instructions.empty()) {
    throw Error(ErrorCode::kEmptyBlock, "block has no instructions");
  }
  return block;
}

}  // namespace blockgnn::asm_core
