#pragma once

#include <array>
#include <map>
#include <string>

#include "tcbforge/equiv.hpp"
#include "tcbforge/isa.hpp"

namespace tcbforge {

// One line per instruction: `mn rd, rs1, rs2`, `mn rd, imm`, `ld rd, imm(rs)`,
// `sd rs2, imm(rs1)`; registers r0..r15, immediates signed decimal, comments
// from '#', blank lines ignored.
using AsmText = std::string;

enum class OperandShape : std::uint8_t { R3, RRI, RI, R4, Mem };

// Format template for one instruction kind. Keeping the table as data means
// printer defects are table mutations the tests can inject, not code edits.
struct PrintEntry {
  std::string mnemonic;
  OperandShape shape;
  std::array<std::uint8_t, 4> order{{0, 1, 2, 3}};  // operand permutation
  std::int32_t offset_bias = 0;                     // added to Mem offsets
};

struct PrintTable {
  std::map<std::string, PrintEntry> entries;  // keyed by canonical mnemonic
  static PrintTable canonical();
};

enum class PrintFault : std::uint8_t {
  None,
  NandAsAnd,          // nand prints as and — mnemonic collision
  FmaddSwapOperands,  // fmadd prints rs3 before rs2
  OffsetCorrupt,      // memory offsets printed with a bias that never fits
};

PrintTable make_table(PrintFault f);

// Throws PrintError if an offset leaves the encodable range (possible only
// through a corrupted table) — never silent truncation. Pseudos don't print.
std::string print_instruction(const Instruction& i, const PrintTable& t);
AsmText print_block(const Block& b, const PrintTable& t);
AsmText print_block(const Block& b);

// Accepts exactly the canonical grammar; range-checks every immediate.
// Throws ParseError carrying the offending line number.
Block parse_block(const AsmText& text);

struct DifferentialOptions {
  std::size_t random_states = 16;
  std::uint64_t seed = 7;
};

// Prints through a (possibly faulted) table, re-parses with the canonical
// grammar, and compares against the original block both structurally and by
// execution checksum over synthesized states. The faulty-print/correct-parse
// split is what exposes consistent-looking defects like swapped operands.
Verdict printer_differential(const Block& b, PrintFault fault,
                             const DifferentialOptions& opts = {});

}  // namespace tcbforge
