#include "tcbforge/asmtext.hpp"

#include <charconv>
#include <sstream>

#include "tcbforge/interp.hpp"
#include "tcbforge/rng.hpp"

namespace tcbforge {

PrintTable PrintTable::canonical() {
  PrintTable t;
  for (BinOp op : {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::And, BinOp::Or,
                   BinOp::Xor, BinOp::Nand, BinOp::Sll, BinOp::Srl})
    t.entries[name(op)] = {name(op), OperandShape::R3, {{0, 1, 2, 3}}, 0};
  t.entries["addi"] = {"addi", OperandShape::RRI, {{0, 1, 2, 3}}, 0};
  t.entries["movi"] = {"movi", OperandShape::RI, {{0, 1, 2, 3}}, 0};
  t.entries["fmadd"] = {"fmadd", OperandShape::R4, {{0, 1, 2, 3}}, 0};
  t.entries["ld"] = {"ld", OperandShape::Mem, {{0, 1, 2, 3}}, 0};
  t.entries["sld"] = {"sld", OperandShape::Mem, {{0, 1, 2, 3}}, 0};
  t.entries["sd"] = {"sd", OperandShape::Mem, {{0, 1, 2, 3}}, 0};
  return t;
}

PrintTable make_table(PrintFault f) {
  PrintTable t = PrintTable::canonical();
  switch (f) {
    case PrintFault::None:
      break;
    case PrintFault::NandAsAnd:
      t.entries["nand"].mnemonic = "and";
      break;
    case PrintFault::FmaddSwapOperands:
      t.entries["fmadd"].order = {{0, 1, 3, 2}};
      break;
    case PrintFault::OffsetCorrupt:
      t.entries["ld"].offset_bias = 4096;
      t.entries["sld"].offset_bias = 4096;
      t.entries["sd"].offset_bias = 4096;
      break;
  }
  return t;
}

namespace {

std::string reg_text(Reg r) { return "r" + std::to_string(r.index()); }

std::string list_form(const PrintEntry& e, const std::vector<std::string>& ops) {
  std::string out = e.mnemonic;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    out += i == 0 ? " " : ", ";
    std::uint8_t src = e.order[i];
    if (src >= ops.size()) throw PrintError("print table: bad operand permutation");
    out += ops[src];
  }
  return out;
}

std::string mem_form(const PrintEntry& e, Reg value, Imm12 off, Reg base) {
  std::int64_t printed = off.value() + e.offset_bias;
  if (!Imm12::fits(printed))
    throw PrintError("offset " + std::to_string(printed) + " not encodable");
  return e.mnemonic + " " + reg_text(value) + ", " + std::to_string(printed) +
         "(" + reg_text(base) + ")";
}

}  // namespace

std::string print_instruction(const Instruction& i, const PrintTable& t) {
  auto it = t.entries.find(mnemonic(i));
  if (it == t.entries.end()) throw PrintError("print table: missing entry");
  const PrintEntry& e = it->second;
  return std::visit(
      [&e](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BinR>) {
          return list_form(e, {reg_text(x.rd), reg_text(x.rs1), reg_text(x.rs2)});
        } else if constexpr (std::is_same_v<T, AddI>) {
          return list_form(e, {reg_text(x.rd), reg_text(x.rs1),
                               std::to_string(x.imm.value())});
        } else if constexpr (std::is_same_v<T, MovI>) {
          return list_form(e, {reg_text(x.rd), std::to_string(x.imm.value())});
        } else if constexpr (std::is_same_v<T, Fmadd>) {
          return list_form(e, {reg_text(x.rd), reg_text(x.rs1), reg_text(x.rs2),
                               reg_text(x.rs3)});
        } else if constexpr (std::is_same_v<T, Ld>) {
          return mem_form(e, x.rd, x.off, x.rs);
        } else if constexpr (std::is_same_v<T, Sld>) {
          return mem_form(e, x.rd, x.off, x.rs);
        } else if constexpr (std::is_same_v<T, Sd>) {
          return mem_form(e, x.rs2, x.off, x.rs1);
        } else {
          throw ContractError("pseudo-instructions have no textual form");
        }
      },
      i);
}

AsmText print_block(const Block& b, const PrintTable& t) {
  AsmText out;
  for (const Instruction& i : b.instrs) {
    out += print_instruction(i, t);
    out += '\n';
  }
  return out;
}

AsmText print_block(const Block& b) { return print_block(b, PrintTable::canonical()); }

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t z = s.find_last_not_of(" \t\r");
  return s.substr(a, z - a + 1);
}

Reg parse_reg(int line, const std::string& tok) {
  if (tok.size() < 2 || tok[0] != 'r')
    throw ParseError(line, "expected register, got '" + tok + "'");
  unsigned idx = 0;
  auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), idx);
  if (ec != std::errc{} || p != tok.data() + tok.size() || idx >= kNumRegs)
    throw ParseError(line, "bad register '" + tok + "'");
  return Reg(idx);
}

std::int64_t parse_int(int line, const std::string& tok) {
  if (tok.empty()) throw ParseError(line, "expected immediate");
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ParseError(line, "bad immediate '" + tok + "'");
  return v;
}

Imm12 parse_imm12(int line, const std::string& tok) {
  std::int64_t v = parse_int(line, tok);
  if (!Imm12::fits(v))
    throw ParseError(line, "immediate " + std::to_string(v) +
                               " out of range (signed 12-bit)");
  return Imm12(v);
}

Imm16 parse_imm16(int line, const std::string& tok) {
  std::int64_t v = parse_int(line, tok);
  if (!Imm16::fits(v))
    throw ParseError(line, "immediate " + std::to_string(v) +
                               " out of range (signed 16-bit)");
  return Imm16(v);
}

// `<imm>(<reg>)`
std::pair<Imm12, Reg> parse_mem_operand(int line, const std::string& tok) {
  std::size_t open = tok.find('(');
  if (open == std::string::npos || tok.back() != ')')
    throw ParseError(line, "expected imm(reg), got '" + tok + "'");
  Imm12 off = parse_imm12(line, trim(tok.substr(0, open)));
  Reg base = parse_reg(line, trim(tok.substr(open + 1, tok.size() - open - 2)));
  return {off, base};
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      break;
    }
    out.push_back(trim(s.substr(start, comma - start)));
    start = comma + 1;
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::optional<BinOp> binop_of(const std::string& mn) {
  for (BinOp op : {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::And, BinOp::Or,
                   BinOp::Xor, BinOp::Nand, BinOp::Sll, BinOp::Srl})
    if (mn == name(op)) return op;
  return std::nullopt;
}

Instruction parse_instruction(int line, const std::string& mn,
                              const std::vector<std::string>& ops) {
  auto want = [&](std::size_t n) {
    if (ops.size() != n)
      throw ParseError(line, "'" + mn + "' wants " + std::to_string(n) +
                                 " operands, got " + std::to_string(ops.size()));
  };
  if (auto op = binop_of(mn)) {
    want(3);
    return BinR{*op, parse_reg(line, ops[0]), parse_reg(line, ops[1]),
                parse_reg(line, ops[2])};
  }
  if (mn == "addi") {
    want(3);
    return AddI{parse_reg(line, ops[0]), parse_reg(line, ops[1]),
                parse_imm12(line, ops[2])};
  }
  if (mn == "movi") {
    want(2);
    return MovI{parse_reg(line, ops[0]), parse_imm16(line, ops[1])};
  }
  if (mn == "fmadd") {
    want(4);
    return Fmadd{parse_reg(line, ops[0]), parse_reg(line, ops[1]),
                 parse_reg(line, ops[2]), parse_reg(line, ops[3])};
  }
  if (mn == "ld" || mn == "sld" || mn == "sd") {
    want(2);
    auto [off, base] = parse_mem_operand(line, ops[1]);
    Reg value = parse_reg(line, ops[0]);
    if (mn == "ld") return Ld{value, off, base};
    if (mn == "sld") return Sld{value, off, base};
    return Sd{value, off, base};
  }
  throw ParseError(line, "unknown mnemonic '" + mn + "'");
}

}  // namespace

Block parse_block(const AsmText& text) {
  std::vector<Instruction> instrs;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::string line = trim(raw);
    if (line.empty()) continue;
    std::size_t sp = line.find_first_of(" \t");
    std::string mn = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp + 1));
    instrs.push_back(parse_instruction(lineno, mn, split_operands(rest)));
  }
  return Block(std::move(instrs));
}

namespace {

// A mostly-benign state: a large zero-filled valid range with register values
// that make plausible in-range pointers, so typical blocks run to completion
// and checksums carry signal.
ExecState diff_state(Rng& rng, bool sprinkle_undef, bool wild) {
  ExecState s;
  s.mem.add_valid_range(0, 0x10000);
  for (unsigned r = 0; r < kNumRegs; ++r) {
    if (sprinkle_undef && rng.chance(0.2)) {
      s.regs[r] = Value::undef();
    } else if (wild) {
      s.regs[r] = Value::i64(rng.next());
    } else {
      s.regs[r] = Value::i64(2048 + 8 * rng.below((0x10000 - 4096) / 8));
    }
  }
  for (int i = 0; i < 32; ++i)
    s.mem.store(8 * rng.below(0x10000 / 8), Value::i64(rng.next()));
  return s;
}

}  // namespace

Verdict printer_differential(const Block& b, PrintFault fault,
                             const DifferentialOptions& opts) {
  AsmText text;
  try {
    text = print_block(b, make_table(fault));
  } catch (const PrintError& e) {
    return Verdict::reject(RejectKind::PrintError, e.what());
  }
  Block parsed;
  try {
    parsed = parse_block(text);
  } catch (const ParseError& e) {
    return Verdict::reject(RejectKind::ParseError, e.what());
  }
  if (!(parsed.instrs == b.instrs))
    return Verdict::reject(RejectKind::StructuralMismatch,
                           "re-parsed block differs");

  Rng rng(opts.seed);
  for (std::size_t i = 0; i < opts.random_states; ++i) {
    ExecState s0 = diff_state(rng, i % 8 == 7, i % 8 == 6);
    std::uint64_t lhs = checksum(exec_block(b, s0));
    std::uint64_t rhs = checksum(exec_block(parsed, s0));
    if (lhs != rhs)
      return Verdict::reject(RejectKind::ChecksumMismatch,
                             "checksums diverge on state " + std::to_string(i));
  }
  return Verdict::accept();
}

}  // namespace tcbforge
