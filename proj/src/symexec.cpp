#include "tcbforge/symexec.hpp"

namespace tcbforge {

namespace {

NodeId address_term(InternContext& ctx, const SymbolicState& st, Reg base, Imm12 off) {
  NodeId c = ctx.intern(tags::const_i64(static_cast<std::uint64_t>(off.value())), {});
  return ctx.intern(tags::bin_op(BinOp::Add), {st.reg_terms[base.index()], c});
}

}  // namespace

SymbolicState symb_exec(InternContext& ctx, const Block& b) {
  SymbolicState st;
  for (unsigned r = 0; r < kNumRegs; ++r)
    st.reg_terms[r] = ctx.intern(tags::init_reg(r), {});
  st.mem_term = ctx.intern(tags::init_mem(), {});

  for (const Instruction& i : b.instrs) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, BinR>) {
            st.reg_terms[x.rd.index()] = ctx.intern(
                tags::bin_op(x.op),
                {st.reg_terms[x.rs1.index()], st.reg_terms[x.rs2.index()]});
          } else if constexpr (std::is_same_v<T, AddI>) {
            NodeId c = ctx.intern(
                tags::const_i64(static_cast<std::uint64_t>(x.imm.value())), {});
            st.reg_terms[x.rd.index()] = ctx.intern(
                tags::bin_op(BinOp::Add), {st.reg_terms[x.rs1.index()], c});
          } else if constexpr (std::is_same_v<T, MovI>) {
            st.reg_terms[x.rd.index()] = ctx.intern(
                tags::const_i64(static_cast<std::uint64_t>(x.imm.value())), {});
          } else if constexpr (std::is_same_v<T, Fmadd>) {
            st.reg_terms[x.rd.index()] = ctx.intern(
                tags::tern_op(TernOp::Madd),
                {st.reg_terms[x.rs1.index()], st.reg_terms[x.rs2.index()],
                 st.reg_terms[x.rs3.index()]});
          } else if constexpr (std::is_same_v<T, Ld>) {
            NodeId addr = address_term(ctx, st, x.rs, x.off);
            st.trap_terms.push_back(addr);
            st.reg_terms[x.rd.index()] =
                ctx.intern(tags::load_tag(), {st.mem_term, addr});
          } else if constexpr (std::is_same_v<T, Sld>) {
            NodeId addr = address_term(ctx, st, x.rs, x.off);
            st.reg_terms[x.rd.index()] =
                ctx.intern(tags::dismissible_load_tag(), {st.mem_term, addr});
          } else if constexpr (std::is_same_v<T, Sd>) {
            NodeId addr = address_term(ctx, st, x.rs1, x.off);
            st.trap_terms.push_back(addr);
            st.mem_term = ctx.intern(
                tags::store_tag(), {st.mem_term, addr, st.reg_terms[x.rs2.index()]});
          } else {
            throw ContractError("symb_exec: pseudo-instructions must be expanded first");
          }
        },
        i);
  }
  return st;
}

}  // namespace tcbforge
