#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tcbforge/errors.hpp"
#include "tcbforge/hset.hpp"
#include "tcbforge/ops.hpp"

namespace tcbforge {

inline constexpr unsigned kNumRegs = 16;
// r14/r15 are the architecture's scratch registers: pseudo-instruction
// expansions may destroy them, and pseudo arguments may not name them.
inline constexpr unsigned kScratch0 = 14;
inline constexpr unsigned kScratch1 = 15;

class Reg {
 public:
  explicit constexpr Reg(unsigned index) : idx_(index) {
    if (index >= kNumRegs) throw ContractError("register index out of range");
  }
  constexpr unsigned index() const { return idx_; }
  constexpr bool is_scratch() const { return idx_ == kScratch0 || idx_ == kScratch1; }
  friend constexpr bool operator==(Reg, Reg) = default;

 private:
  std::uint8_t idx_;
};

// Signed immediate with a declared bit width, validated at construction.
// No instruction with an out-of-range immediate can exist.
template <unsigned Bits>
class SImm {
  static_assert(Bits >= 2 && Bits <= 32);

 public:
  static constexpr std::int64_t kMin = -(std::int64_t{1} << (Bits - 1));
  static constexpr std::int64_t kMax = (std::int64_t{1} << (Bits - 1)) - 1;

  explicit constexpr SImm(std::int64_t value) : v_(static_cast<std::int32_t>(value)) {
    if (value < kMin || value > kMax)
      throw ContractError("immediate out of range for declared width");
  }
  constexpr std::int64_t value() const { return v_; }
  static constexpr bool fits(std::int64_t value) { return value >= kMin && value <= kMax; }
  friend constexpr bool operator==(SImm, SImm) = default;

 private:
  std::int32_t v_;
};

using Imm12 = SImm<12>;
using Imm16 = SImm<16>;

// 64-bit machine value or Undef. Undef is poison: absorbing under arithmetic,
// refinable into any concrete value.
class Value {
 public:
  constexpr Value() : defined_(true), bits_(0) {}
  static constexpr Value i64(std::uint64_t bits) { return Value(true, bits); }
  static constexpr Value undef() { return Value(false, 0); }

  constexpr bool defined() const { return defined_; }
  constexpr std::uint64_t bits() const { return bits_; }
  friend constexpr bool operator==(Value a, Value b) {
    return a.defined_ == b.defined_ && (!a.defined_ || a.bits_ == b.bits_);
  }

 private:
  constexpr Value(bool defined, std::uint64_t bits) : defined_(defined), bits_(bits) {}
  bool defined_;
  std::uint64_t bits_;
};

// refines(v1, v2): v1 is an acceptable concretisation of v2. Everything
// refines Undef; a concrete value refines only itself.
constexpr bool refines(Value v1, Value v2) {
  if (!v2.defined()) return true;
  return v1.defined() && v1.bits() == v2.bits();
}

// ---- Instructions ----------------------------------------------------------

struct BinR {  // rd := rs1 <op> rs2
  BinOp op;
  Reg rd, rs1, rs2;
  friend bool operator==(const BinR&, const BinR&) = default;
};

struct AddI {  // rd := rs1 + imm
  Reg rd, rs1;
  Imm12 imm;
  friend bool operator==(const AddI&, const AddI&) = default;
};

struct MovI {  // rd := imm
  Reg rd;
  Imm16 imm;
  friend bool operator==(const MovI&, const MovI&) = default;
};

struct Fmadd {  // rd := rs1*rs2 + rs3, 64-bit wraparound
  Reg rd, rs1, rs2, rs3;
  friend bool operator==(const Fmadd&, const Fmadd&) = default;
};

struct Ld {  // trapping load: rd := mem[rs + off]
  Reg rd;
  Imm12 off;
  Reg rs;
  friend bool operator==(const Ld&, const Ld&) = default;
};

struct Sld {  // dismissible load: rd := mem[rs + off], Undef instead of trap
  Reg rd;
  Imm12 off;
  Reg rs;
  friend bool operator==(const Sld&, const Sld&) = default;
};

struct Sd {  // store: mem[rs1 + off] := rs2
  Reg rs2;
  Imm12 off;
  Reg rs1;
  friend bool operator==(const Sd&, const Sd&) = default;
};

// ---- Pseudo-instructions ---------------------------------------------------

// Copy of `size` bytes (8-byte cells) from [src, src+size) to [dst, dst+size).
// Arguments may alias each other but never the scratch registers.
class MemCopy {
 public:
  static constexpr std::uint32_t kMaxSize = 4096;

  MemCopy(Reg dst, Reg src, std::uint32_t size, std::uint32_t align)
      : dst_(dst), src_(src), size_(size), align_(align) {
    if (align != 8) throw ContractError("memcopy: only 8-byte alignment is supported");
    if (size % 8 != 0 || size > kMaxSize)
      throw ContractError("memcopy: size must be a multiple of 8 in 0..=4096");
    if (dst.is_scratch() || src.is_scratch())
      throw ContractError("memcopy: arguments may not be scratch registers");
  }

  Reg dst() const { return dst_; }
  Reg src() const { return src_; }
  std::uint32_t size() const { return size_; }
  std::uint32_t align() const { return align_; }
  friend bool operator==(const MemCopy&, const MemCopy&) = default;

 private:
  Reg dst_, src_;
  std::uint32_t size_, align_;
};

class LoadImm64 {
 public:
  LoadImm64(Reg rd, std::uint64_t imm) : rd_(rd), imm_(imm) {
    if (rd.is_scratch())
      throw ContractError("loadimm64: argument may not be a scratch register");
  }
  Reg rd() const { return rd_; }
  std::uint64_t imm() const { return imm_; }
  friend bool operator==(const LoadImm64&, const LoadImm64&) = default;

 private:
  Reg rd_;
  std::uint64_t imm_;
};

using PseudoInstr = std::variant<MemCopy, LoadImm64>;

struct Pseudo {
  PseudoInstr p;
  friend bool operator==(const Pseudo&, const Pseudo&) = default;
};

using Instruction = std::variant<BinR, AddI, MovI, Fmadd, Ld, Sld, Sd, Pseudo>;

inline bool is_pseudo(const Instruction& i) { return std::holds_alternative<Pseudo>(i); }
bool is_load(const Instruction& i);       // Ld or Sld
bool is_store(const Instruction& i);      // Sd
bool is_mem_op(const Instruction& i);     // any of the above
std::optional<Reg> def_reg(const Instruction& i);      // register written, if any
std::vector<Reg> use_regs(const Instruction& i);       // registers read
const char* mnemonic(const Instruction& i);            // not for pseudos
std::vector<const char*> all_mnemonics();

// ---- Blocks ----------------------------------------------------------------

// Straight-line instruction sequence plus the set of registers observed
// after it (checked by the equivalence validator). Defaults to all registers,
// the strictest sound choice.
class Block {
 public:
  static constexpr std::size_t kMaxLen = 10000;

  Block() : live_out(all_registers()) {}
  explicit Block(std::vector<Instruction> ins) : Block(std::move(ins), all_registers()) {}
  Block(std::vector<Instruction> ins, HSet live)
      : instrs(std::move(ins)), live_out(live) {
    if (instrs.size() > kMaxLen) throw ContractError("block too long");
  }

  std::vector<Instruction> instrs;
  HSet live_out;
};

}  // namespace tcbforge
