#include <fmt/format.h>

#include "nisqsim/program.hpp"

namespace nisqsim {

namespace {

template <class Op>
std::vector<QubitIndex> qubits_of(const Op& op) {
  using T = std::decay_t<Op>;
  if constexpr (std::is_same_v<T, UGate> || std::is_same_v<T, Measure> || std::is_same_v<T, Reset>) {
    return {op.qubit};
  } else if constexpr (std::is_same_v<T, CXGate>) {
    return {op.control, op.target};
  } else if constexpr (std::is_same_v<T, IfBit>) {
    return std::visit([](const auto& inner) { return qubits_of(inner); }, op.inner);
  } else {
    return {};
  }
}

void check_op(const Instruction& instr, const Program& p, std::size_t index) {
  for (const QubitIndex q : operand_qubits(instr)) {
    if (q >= p.qubit_count) {
      throw ProgramError(fmt::format("instruction {}: qubit {} out of range ({} qubits)", index, q, p.qubit_count));
    }
  }
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, CXGate>) {
          if (op.control == op.target) {
            throw ProgramError(fmt::format("instruction {}: CX control equals target ({})", index, op.control));
          }
        } else if constexpr (std::is_same_v<T, Measure>) {
          if (op.cbit >= p.cbit_count) {
            throw ProgramError(
                fmt::format("instruction {}: cbit {} out of range ({} cbits)", index, op.cbit, p.cbit_count));
          }
        } else if constexpr (std::is_same_v<T, IfBit>) {
          if (op.cbit >= p.cbit_count) {
            throw ProgramError(
                fmt::format("instruction {}: cbit {} out of range ({} cbits)", index, op.cbit, p.cbit_count));
          }
          if (op.value != 0 && op.value != 1) {
            throw ProgramError(fmt::format("instruction {}: conditional value must be 0 or 1", index));
          }
          check_op(to_instruction(op.inner), p, index);
        }
      },
      instr);
}

}  // namespace

std::vector<QubitIndex> operand_qubits(const Instruction& instr) {
  return std::visit([](const auto& op) { return qubits_of(op); }, instr);
}

std::vector<QubitIndex> operand_qubits(const QuantumOp& op) {
  return std::visit([](const auto& o) { return qubits_of(o); }, op);
}

std::string mnemonic(const Instruction& instr) {
  static constexpr const char* kNames[] = {"U", "CX", "Measure", "Reset", "If", "Wait"};
  return kNames[instr.index()];
}

void validate_program(const Program& program) {
  for (std::size_t i = 0; i < program.instructions.size(); ++i) check_op(program.instructions[i], program, i);
}

}  // namespace nisqsim
