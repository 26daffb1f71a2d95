#pragma once

#include <string>
#include <vector>

#include "nisqsim/coupling_graph.hpp"
#include "nisqsim/program.hpp"

namespace nisqsim {

struct LayerOp {
  QuantumOp op;
  std::size_t source_index = 0;  ///< index into Program::instructions
};

/// Ops within a layer touch pairwise-disjoint qubits.
using Layer = std::vector<LayerOp>;

struct LayeredCircuit {
  std::size_t qubit_count = 0;
  std::size_t cbit_count = 0;
  std::vector<Layer> layers;

  std::size_t depth() const { return layers.size(); }
  std::size_t op_count() const;
  /// U and CX ops, i.e. the ops that cost one matrix-vector multiplication.
  std::size_t gate_count() const;
};

/// Raised when a program contains control flow the noisy engine cannot layer.
class UnsupportedProgram : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Greedy as-soon-as-possible layering: each op lands one layer after the
/// latest layer already holding one of its qubits.
LayeredCircuit build_layers(const Program& program);

inline constexpr std::size_t kWholeProgram = static_cast<std::size_t>(-1);

struct DeviceViolation {
  enum class Kind { kQubitRange, kMissingEdge };
  Kind kind;
  std::size_t instruction_index;  ///< kWholeProgram for register-size violations
  std::string message;
};

/// Lists every CX on a pair that is not a device edge and every qubit index
/// the device does not have. An empty report means the program is compatible.
std::vector<DeviceViolation> validate_against_device(const Program& program, const CouplingGraph& device);

}  // namespace nisqsim
