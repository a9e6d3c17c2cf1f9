#pragma once

#include "tcbforge/isa.hpp"
#include "tcbforge/memory.hpp"

namespace tcbforge {

// Undef is absorbing: any Undef operand makes the result Undef.
Value eval_binop(BinOp op, Value a, Value b);

// Effective address of a memory access, or nullopt when the base is Undef.
std::optional<std::uint64_t> effective_address(Value base, Imm12 off);

// Executes one instruction in place. A trapped state is left untouched.
void exec_instr(const Instruction& i, ExecState& s);

// Runs the block front to back, stopping at the first trap.
ExecState exec_block(const Block& b, ExecState s);

}  // namespace tcbforge
