#include "tcbforge/isa.hpp"

namespace tcbforge {

bool is_load(const Instruction& i) {
  return std::holds_alternative<Ld>(i) || std::holds_alternative<Sld>(i);
}

bool is_store(const Instruction& i) { return std::holds_alternative<Sd>(i); }

bool is_mem_op(const Instruction& i) { return is_load(i) || is_store(i); }

std::optional<Reg> def_reg(const Instruction& i) {
  return std::visit(
      [](const auto& x) -> std::optional<Reg> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BinR> || std::is_same_v<T, AddI> ||
                      std::is_same_v<T, MovI> || std::is_same_v<T, Fmadd> ||
                      std::is_same_v<T, Ld> || std::is_same_v<T, Sld>) {
          return x.rd;
        } else {
          return std::nullopt;  // Sd and Pseudo: handled by their own effects
        }
      },
      i);
}

std::vector<Reg> use_regs(const Instruction& i) {
  return std::visit(
      [](const auto& x) -> std::vector<Reg> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BinR>) {
          return {x.rs1, x.rs2};
        } else if constexpr (std::is_same_v<T, AddI>) {
          return {x.rs1};
        } else if constexpr (std::is_same_v<T, MovI>) {
          return {};
        } else if constexpr (std::is_same_v<T, Fmadd>) {
          return {x.rs1, x.rs2, x.rs3};
        } else if constexpr (std::is_same_v<T, Ld> || std::is_same_v<T, Sld>) {
          return {x.rs};
        } else if constexpr (std::is_same_v<T, Sd>) {
          return {x.rs2, x.rs1};
        } else {
          const Pseudo& ps = x;
          if (const auto* mc = std::get_if<MemCopy>(&ps.p))
            return {mc->dst(), mc->src()};
          return {};
        }
      },
      i);
}

const char* mnemonic(const Instruction& i) {
  return std::visit(
      [](const auto& x) -> const char* {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BinR>) {
          return name(x.op);
        } else if constexpr (std::is_same_v<T, AddI>) {
          return "addi";
        } else if constexpr (std::is_same_v<T, MovI>) {
          return "movi";
        } else if constexpr (std::is_same_v<T, Fmadd>) {
          return "fmadd";
        } else if constexpr (std::is_same_v<T, Ld>) {
          return "ld";
        } else if constexpr (std::is_same_v<T, Sld>) {
          return "sld";
        } else if constexpr (std::is_same_v<T, Sd>) {
          return "sd";
        } else {
          throw ContractError("pseudo-instructions have no mnemonic");
        }
      },
      i);
}

std::vector<const char*> all_mnemonics() {
  return {"add", "sub", "mul", "and",  "or",    "xor", "nand", "sll",
          "srl", "addi", "movi", "fmadd", "ld",  "sld", "sd"};
}

}  // namespace tcbforge
