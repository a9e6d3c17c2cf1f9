#pragma once

#include <optional>
#include <vector>

#include "tcbforge/equiv.hpp"
#include "tcbforge/isa.hpp"
#include "tcbforge/memory.hpp"

namespace tcbforge {

enum class VariantKind : std::uint8_t {
  CopyEmpty,    // size 0: nothing at all
  CopyStraight, // size <= 64: unrolled ld/sd pairs, in-place offsets
  CopyLoop,     // size > 64: offsets outgrow 12 bits, so each cell's address
                // is built in a scratch register first
  Imm16,        // constant fits a movi
  Imm64Full,    // constant rebuilt chunk by chunk, touching only rd
};

const char* name(VariantKind k);

// Expansion strategy for one pseudo-instruction. Clobbers are fixed per
// variant, never computed from the emitted code.
struct Variant {
  VariantKind kind;
  std::uint32_t n_pairs = 0;  // CopyStraight: number of ld/sd pairs
  HSet clobbers;
};

// Applicability predicate of a variant over a pseudo's static parameters.
// For any well-formed pseudo exactly one variant applies.
bool applicable(VariantKind k, const PseudoInstr& p);

Variant select_variant(const PseudoInstr& p);

struct MemEffect {
  Reg base;            // writes land in [base, base+size)
  std::uint32_t size;
};

// What an expansion may do: write `destinations` with meaningful results,
// trash `clobbers` (Undef afterwards), and write memory only inside
// mem_effect's range. destinations and clobbers never intersect.
struct ClobberSpec {
  HSet destinations;
  HSet clobbers;
  std::optional<MemEffect> mem_effect;
};

ClobberSpec clobber_spec(const PseudoInstr& p);

std::vector<Instruction> expand(const PseudoInstr& p);

// Deliberately broken expanders, for exercising the validator.
enum class ExpandFault : std::uint8_t {
  None,
  UndeclaredClobber,   // scribbles over r13 without declaring it
  AliasWrongOrder,     // when dst and src are the same register, emits each
                       // pair store-first — the skipped-aliasing-case bug
  SwapSrcDst,          // copies in the wrong direction
  StraightEverywhere,  // unrolled ld/sd pairs for any size; offsets can
                       // outgrow 12 bits, which the immediate type refuses
};

std::vector<Instruction> expand_with_fault(const PseudoInstr& p, ExpandFault f);

// Replaces every pseudo-instruction inline; everything else is kept as-is.
Block expand_block(const Block& b, ExpandFault f = ExpandFault::None);

// Reference semantics, executed directly on the state. MemCopy checks all
// accessed cells up front (any bad one traps before the first write), copies
// forward cell by cell, then sets the variant's clobbers to Undef — so a
// concrete expansion refines it.
void exec_pseudo(const PseudoInstr& p, ExecState& s);

struct ValidateOptions {
  std::size_t random_states = 512;
  std::uint64_t seed = 1;
};

// Checks a proposed expansion against the pseudo-instruction:
//  1. symbolically: a register whose final term moved must be a declared
//     destination or clobber, and memory may move only under a mem_effect;
//  2. differentially: on random states plus the exhaustive placement matrix
//     over the argument addresses (equal, overlapping, disjoint, Undef,
//     invalid), the expansion's final state must refine the reference.
Verdict validate_expansion(const PseudoInstr& p,
                           const std::vector<Instruction>& expansion,
                           const ValidateOptions& opts = {});

}  // namespace tcbforge
