#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace nisqsim {

using QubitIndex = std::uint32_t;
using CbitIndex = std::uint32_t;

struct UGate {
  double theta = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  QubitIndex qubit = 0;
  bool operator==(const UGate&) const = default;
};

struct CXGate {
  QubitIndex control = 0;
  QubitIndex target = 0;
  bool operator==(const CXGate&) const = default;
};

struct Measure {
  QubitIndex qubit = 0;
  CbitIndex cbit = 0;
  bool operator==(const Measure&) const = default;
};

struct Reset {
  QubitIndex qubit = 0;
  bool operator==(const Reset&) const = default;
};

struct Wait {
  std::uint64_t cycles = 0;
  bool operator==(const Wait&) const = default;
};

/// Anything that may sit behind a one-bit conditional. Conditionals do not nest.
using GuardedOp = std::variant<UGate, CXGate, Measure, Reset, Wait>;

struct IfBit {
  CbitIndex cbit = 0;
  int value = 1;
  GuardedOp inner;
  bool operator==(const IfBit&) const = default;
};

using Instruction = std::variant<UGate, CXGate, Measure, Reset, IfBit, Wait>;

/// Quantum operations that can appear in a layered circuit.
using QuantumOp = std::variant<UGate, CXGate, Measure, Reset>;

struct Program {
  std::size_t qubit_count = 0;
  std::size_t cbit_count = 0;
  std::vector<Instruction> instructions;
  std::string source_name;

  /// Equality ignores source_name.
  bool same_code(const Program& other) const {
    return qubit_count == other.qubit_count && cbit_count == other.cbit_count &&
           instructions == other.instructions;
  }
};

/// Raised when a program breaks a structural invariant (operand range,
/// CX control == target, nested conditional).
class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand qubits of an instruction, in operand order. Conditionals report
/// their inner operation's qubits; Wait has none.
std::vector<QubitIndex> operand_qubits(const Instruction& instr);
std::vector<QubitIndex> operand_qubits(const QuantumOp& op);

/// Mnemonic used in reports ("U", "CX", "Measure", "Reset", "If", "Wait").
std::string mnemonic(const Instruction& instr);

/// Throws ProgramError describing the first invariant violation.
void validate_program(const Program& program);

inline Instruction to_instruction(const GuardedOp& op) {
  return std::visit([](const auto& o) -> Instruction { return o; }, op);
}

}  // namespace nisqsim
