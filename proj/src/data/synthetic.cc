#include "blockgnn/data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "blockgnn/asm/record.h"
#include "blockgnn/asm/registers.h"
#include "blockgnn/asm/text_parser.h"
#include "blockgnn/error.h"
#include "blockgnn/random.h"

namespace blockgnn::data {
namespace {

const char* const kGpr64[] = {"RAX", "RBX", "RCX", "RDX", "RSI", "RDI", "R8", "R9", "R10", "R11"};
const char* const kGpr32[] = {"EAX", "EBX", "ECX", "EDX", "ESI", "EDI", "R8D", "R9D"};
const char* const kXmm[] = {"XMM0", "XMM1", "XMM2", "XMM3", "XMM4", "XMM5", "XMM6", "XMM7"};
const char* const kYmm[] = {"YMM0", "YMM1", "YMM2", "YMM3", "YMM4", "YMM5"};

// Placeholders: q = 64-bit GPR, d = 32-bit GPR, x = XMM, y = YMM,
// i = small immediate, m = qword memory operand, s = scale.
const char* const kTemplates[] = {
    "ADD q, q",        "SUB q, q",        "AND q, q",          "OR q, q",
    "XOR d, d",        "ADD q, i",        "SUB d, i",          "CMP q, q",
    "TEST q, q",       "INC q",           "DEC d",             "MOV q, q",
    "MOV d, i",        "SHL q, i",        "SAR d, i",          "LEA q, [q + q*s + i]",
    "LEA q, [q + i]",  "IMUL q, q",       "IMUL d, d, i",      "MOV q, m",
    "ADD q, m",        "MOV m, q",        "MOV d, DWORD PTR [q + i]",
    "CMP q, m",        "ADDSD x, x",      "MULSD x, x",        "DIVSD x, x",
    "SUBSD x, x",      "MOVAPS x, x",     "MOVSD x, m",        "MOVSD m, x",
    "VADDPS y, y, y",  "VMULPS y, y, y",  "VXORPS y, y, y",    "DIV q",
    "CMOVE q, q",      "SETNE DL",        "PUSH q",            "POP q",
    "NEG q",           "MOVZX d, BL",     "POPCNT q, q",       "PXOR x, x",
};

enum class OpClass { kAlu, kMul, kDiv, kFpAdd, kFpMul, kFpDiv, kVec, kStack };

struct Uarch {
  double issue_width;
  double alu_ports;
  double load_ports;
  double store_ports;
  double fp_ports;
  double lat_alu, lat_mul, lat_div, lat_load, lat_fp_add, lat_fp_mul, lat_fp_div;
  double div_occupancy, fp_div_occupancy;
};

const std::map<std::string, Uarch>& UarchTable() {
  static const std::map<std::string, Uarch> kTable = {
      {"ivybridge", {4, 3, 2, 1, 2, 1, 3, 40, 5, 3, 5, 22, 26, 14}},
      {"haswell", {4, 4, 2, 1, 2, 1, 3, 36, 5, 3, 5, 20, 24, 13}},
      {"skylake", {4, 4, 2, 1, 2, 1, 3, 42, 5, 4, 4, 14, 24, 4}},
  };
  return kTable;
}

OpClass Classify(const std::string& m) {
  if (m == "IMUL" || m == "MUL") return OpClass::kMul;
  if (m == "DIV" || m == "IDIV") return OpClass::kDiv;
  if (m == "DIVSD" || m == "DIVSS" || m == "DIVPS" || m == "DIVPD") return OpClass::kFpDiv;
  if (m == "MULSD" || m == "MULSS" || m == "VMULPS" || m == "MULPS") return OpClass::kFpMul;
  if (m == "ADDSD" || m == "SUBSD" || m == "VADDPS" || m == "ADDPS") return OpClass::kFpAdd;
  if (m == "MOVAPS" || m == "VXORPS" || m == "PXOR" || m == "MOVSD") return OpClass::kVec;
  if (m == "PUSH" || m == "POP") return OpClass::kStack;
  return OpClass::kAlu;
}

double Latency(OpClass c, const Uarch& u) {
  switch (c) {
    case OpClass::kAlu: return u.lat_alu;
    case OpClass::kMul: return u.lat_mul;
    case OpClass::kDiv: return u.lat_div;
    case OpClass::kFpAdd: return u.lat_fp_add;
    case OpClass::kFpMul: return u.lat_fp_mul;
    case OpClass::kFpDiv: return u.lat_fp_div;
    case OpClass::kVec: return 1.0;
    case OpClass::kStack: return 1.0;
  }
  return 1.0;
}

struct RegAccess {
  std::vector<std::string> reads;
  std::vector<std::string> writes;
  bool loads = false;
  bool stores = false;
};

void AddAddressReads(const asm_core::AddressExpr& a, std::vector<std::string>& reads) {
  for (const auto& r : {a.base, a.index, a.segment}) {
    if (r) reads.push_back(asm_core::AliasClass(*r));
  }
}

RegAccess Accesses(const asm_core::Instruction& ins) {
  RegAccess acc;
  for (const auto& op : ins.inputs) {
    if (const auto* r = std::get_if<asm_core::RegisterOperand>(&op)) {
      acc.reads.push_back(asm_core::AliasClass(r->name));
    } else if (const auto* m = std::get_if<asm_core::MemoryOperand>(&op)) {
      AddAddressReads(m->address, acc.reads);
      acc.loads = true;
    } else if (const auto* a = std::get_if<asm_core::AddressOperand>(&op)) {
      AddAddressReads(a->address, acc.reads);
    }
  }
  for (const auto& op : ins.outputs) {
    if (const auto* r = std::get_if<asm_core::RegisterOperand>(&op)) {
      acc.writes.push_back(asm_core::AliasClass(r->name));
    } else if (const auto* m = std::get_if<asm_core::MemoryOperand>(&op)) {
      AddAddressReads(m->address, acc.reads);
      acc.stores = true;
    }
  }
  return acc;
}

std::string Fill(const std::string& tmpl, Rng& rng) {
  std::string out;
  for (char c : tmpl) {
    switch (c) {
      case 'q': out += kGpr64[rng.Below(std::size(kGpr64))]; break;
      case 'd': out += kGpr32[rng.Below(std::size(kGpr32))]; break;
      case 'x': out += kXmm[rng.Below(std::size(kXmm))]; break;
      case 'y': out += kYmm[rng.Below(std::size(kYmm))]; break;
      case 'i': out += std::to_string(1 + rng.Below(64)); break;
      case 's': out += std::to_string(1u << rng.Below(4)); break;
      case 'm':
        out += std::string("QWORD PTR [") + kGpr64[rng.Below(std::size(kGpr64))] + " + " +
               std::to_string(8 * rng.Below(16)) + "]";
        break;
      default: out += c;
    }
  }
  return out;
}

std::string HexId(const std::string& text, uint64_t seed) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(KeyedHash(text, seed)));
  return buf;
}

}  // namespace

double AnalyticThroughput(const asm_core::BasicBlock& block, const std::string& microarchitecture) {
  auto it = UarchTable().find(microarchitecture);
  if (it == UarchTable().end()) {
    throw Error(ErrorCode::kInvalidConfig, "no analytic model for '" + microarchitecture + "'");
  }
  const Uarch& u = it->second;
  double uops = 0, alu = 0, loads = 0, stores = 0, fp = 0, div_busy = 0;
  std::vector<RegAccess> access;
  std::vector<double> latency;
  for (const auto& ins : block.instructions) {
    const OpClass c = Classify(ins.mnemonic);
    RegAccess acc = Accesses(ins);
    uops += 1.0 + (acc.loads ? 1.0 : 0.0) + (acc.stores ? 1.0 : 0.0);
    loads += acc.loads ? 1.0 : 0.0;
    stores += acc.stores ? 1.0 : 0.0;
    if (c == OpClass::kFpAdd || c == OpClass::kFpMul || c == OpClass::kFpDiv || c == OpClass::kVec) {
      fp += 1.0;
    } else {
      alu += 1.0;
    }
    if (c == OpClass::kDiv) div_busy += u.div_occupancy;
    if (c == OpClass::kFpDiv) div_busy += u.fp_div_occupancy;
    latency.push_back(Latency(c, u) + (acc.loads ? u.lat_load : 0.0));
    access.push_back(std::move(acc));
  }
  double bound = std::max({uops / u.issue_width, alu / u.alu_ports, loads / u.load_ports,
                           stores / u.store_ports, fp / u.fp_ports, div_busy});
  // Loop-carried chains: for every register class, the latency from its
  // value at block entry to its value at block exit.
  std::set<std::string> classes;
  for (const auto& a : access) classes.insert(a.writes.begin(), a.writes.end());
  for (const auto& root : classes) {
    std::map<std::string, double> ready = {{root, 0.0}};
    for (size_t i = 0; i < access.size(); ++i) {
      std::optional<double> start;
      for (const auto& r : access[i].reads) {
        auto f = ready.find(r);
        if (f != ready.end()) start = std::max(start.value_or(0.0), f->second);
      }
      for (const auto& w : access[i].writes) {
        if (start) {
          ready[w] = *start + latency[i];
        } else {
          ready.erase(w);
        }
      }
    }
    auto f = ready.find(root);
    if (f != ready.end()) bound = std::max(bound, f->second);
  }
  return std::round(bound * 100.0 * 100.0) / 100.0;
}

std::vector<CorpusRecord> GenerateSynthetic(const SyntheticOptions& options) {
  if (options.min_instructions == 0 || options.max_instructions < options.min_instructions) {
    throw Error(ErrorCode::kInvalidConfig, "instruction count range is empty");
  }
  for (const auto& u : options.microarchitectures) {
    if (!UarchTable().contains(u)) throw Error(ErrorCode::kInvalidConfig, "no analytic model for '" + u + "'");
  }
  Rng rng(options.seed);
  std::set<std::string> seen;
  std::vector<CorpusRecord> out;
  const size_t span = options.max_instructions - options.min_instructions + 1;
  size_t attempts = 0;
  while (out.size() < options.num_blocks) {
    if (++attempts > 100 * (options.num_blocks + 10)) {
      throw Error(ErrorCode::kInvalidConfig, "cannot generate enough distinct blocks");
    }
    const size_t n = options.min_instructions + rng.Below(span);
    std::string text;
    for (size_t i = 0; i < n; ++i) {
      text += Fill(kTemplates[rng.Below(std::size(kTemplates))], rng);
      text += "\n";
    }
    if (!seen.insert(text).second) continue;
    CorpusRecord rec;
    rec.block_id = HexId(text, options.seed);
    rec.block = asm_core::ParseBlockText(text, rec.block_id);
    for (const auto& u : options.microarchitectures) rec.labels[u] = AnalyticThroughput(rec.block, u);
    out.push_back(std::move(rec));
  }
  return out;
}

void WriteCsvCorpus(const std::string& dir, const std::vector<CorpusRecord>& records,
                    const std::vector<std::string>& microarchitectures) {
  std::filesystem::create_directories(dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + p.string() + "'");
    return out;
  };
  for (const auto& u : microarchitectures) {
    std::ofstream csv = open(std::filesystem::path(dir) / (u + ".csv"));
    csv << "hex,throughput\n";
    for (const auto& r : records) {
      auto it = r.labels.find(u);
      if (it == r.labels.end()) continue;
      nlohmann::json v = it->second;
      csv << r.block_id << "," << v.dump() << "\n";
    }
  }
  std::ofstream disasm = open(std::filesystem::path(dir) / "disasm.jsonl");
  for (const auto& r : records) {
    disasm << nlohmann::json{{"hex", r.block_id},
                             {"instructions", asm_core::InstructionListToJson(r.block.instructions)}}
                  .dump()
           << "\n";
  }
}

}  // namespace blockgnn::data
