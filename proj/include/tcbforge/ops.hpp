#pragma once

#include <cstdint>

namespace tcbforge {

// Operator vocabulary shared by the ISA and the term language.
enum class BinOp : std::uint8_t { Add, Sub, Mul, And, Or, Xor, Nand, Sll, Srl };
enum class UnOp : std::uint8_t { Not, Neg };
enum class TernOp : std::uint8_t { Madd };  // a*b + c, 64-bit wraparound

const char* name(BinOp op);
const char* name(UnOp op);
const char* name(TernOp op);

}  // namespace tcbforge
