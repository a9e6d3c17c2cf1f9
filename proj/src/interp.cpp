#include "tcbforge/interp.hpp"

#include "tcbforge/expand.hpp"

namespace tcbforge {

Value eval_binop(BinOp op, Value a, Value b) {
  if (!a.defined() || !b.defined()) return Value::undef();
  std::uint64_t x = a.bits(), y = b.bits();
  switch (op) {
    case BinOp::Add: return Value::i64(x + y);
    case BinOp::Sub: return Value::i64(x - y);
    case BinOp::Mul: return Value::i64(x * y);
    case BinOp::And: return Value::i64(x & y);
    case BinOp::Or: return Value::i64(x | y);
    case BinOp::Xor: return Value::i64(x ^ y);
    case BinOp::Nand: return Value::i64(~(x & y));
    case BinOp::Sll: return Value::i64(x << (y & 63));
    case BinOp::Srl: return Value::i64(x >> (y & 63));
  }
  throw ContractError("unknown binary op");
}

std::optional<std::uint64_t> effective_address(Value base, Imm12 off) {
  if (!base.defined()) return std::nullopt;
  return base.bits() + static_cast<std::uint64_t>(off.value());
}

namespace {

// Shared by Ld and Sld; Sld dismisses both failure modes into Undef.
void do_load(ExecState& s, Reg rd, Imm12 off, Reg rs, bool dismissible) {
  auto addr = effective_address(s.regs[rs.index()], off);
  if (!addr) {
    if (dismissible)
      s.regs[rd.index()] = Value::undef();
    else
      s.trap = TrapCause::UndefAddress;
    return;
  }
  if (!s.mem.valid_address(*addr)) {
    if (dismissible)
      s.regs[rd.index()] = Value::undef();
    else
      s.trap = TrapCause::InvalidAddress;
    return;
  }
  s.regs[rd.index()] = s.mem.load(*addr);
}

}  // namespace

void exec_instr(const Instruction& i, ExecState& s) {
  if (s.trapped()) return;
  std::visit(
      [&s](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BinR>) {
          s.regs[x.rd.index()] = eval_binop(x.op, s.regs[x.rs1.index()], s.regs[x.rs2.index()]);
        } else if constexpr (std::is_same_v<T, AddI>) {
          s.regs[x.rd.index()] = eval_binop(
              BinOp::Add, s.regs[x.rs1.index()],
              Value::i64(static_cast<std::uint64_t>(x.imm.value())));
        } else if constexpr (std::is_same_v<T, MovI>) {
          s.regs[x.rd.index()] = Value::i64(static_cast<std::uint64_t>(x.imm.value()));
        } else if constexpr (std::is_same_v<T, Fmadd>) {
          Value prod = eval_binop(BinOp::Mul, s.regs[x.rs1.index()], s.regs[x.rs2.index()]);
          s.regs[x.rd.index()] = eval_binop(BinOp::Add, prod, s.regs[x.rs3.index()]);
        } else if constexpr (std::is_same_v<T, Ld>) {
          do_load(s, x.rd, x.off, x.rs, /*dismissible=*/false);
        } else if constexpr (std::is_same_v<T, Sld>) {
          do_load(s, x.rd, x.off, x.rs, /*dismissible=*/true);
        } else if constexpr (std::is_same_v<T, Sd>) {
          auto addr = effective_address(s.regs[x.rs1.index()], x.off);
          if (!addr) {
            s.trap = TrapCause::UndefAddress;
          } else if (!s.mem.valid_address(*addr)) {
            s.trap = TrapCause::InvalidAddress;
          } else {
            s.mem.store(*addr, s.regs[x.rs2.index()]);
          }
        } else {
          exec_pseudo(x.p, s);
        }
      },
      i);
}

ExecState exec_block(const Block& b, ExecState s) {
  for (const Instruction& i : b.instrs) {
    if (s.trapped()) break;
    exec_instr(i, s);
  }
  return s;
}

}  // namespace tcbforge
