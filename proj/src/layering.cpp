#include <algorithm>

#include <fmt/format.h>

#include "nisqsim/layering.hpp"

namespace nisqsim {

std::size_t LayeredCircuit::op_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

std::size_t LayeredCircuit::gate_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    for (const auto& op : layer) {
      if (std::holds_alternative<UGate>(op.op) || std::holds_alternative<CXGate>(op.op)) ++n;
    }
  }
  return n;
}

LayeredCircuit build_layers(const Program& program) {
  validate_program(program);
  LayeredCircuit circuit;
  circuit.qubit_count = program.qubit_count;
  circuit.cbit_count = program.cbit_count;
  // next_free[q] = first layer index q is not yet occupied in.
  std::vector<std::size_t> next_free(program.qubit_count, 0);
  for (std::size_t i = 0; i < program.instructions.size(); ++i) {
    const Instruction& instr = program.instructions[i];
    QuantumOp op;
    if (const auto* u = std::get_if<UGate>(&instr)) {
      op = *u;
    } else if (const auto* cx = std::get_if<CXGate>(&instr)) {
      op = *cx;
    } else if (const auto* m = std::get_if<Measure>(&instr)) {
      op = *m;
    } else if (const auto* r = std::get_if<Reset>(&instr)) {
      op = *r;
    } else {
      throw UnsupportedProgram(
          fmt::format("instruction {} ({}) is control flow; unsupported for noisy simulation", i, mnemonic(instr)));
    }
    const auto qubits = operand_qubits(op);
    std::size_t layer = 0;
    for (const QubitIndex q : qubits) layer = std::max(layer, next_free[q]);
    if (layer == circuit.layers.size()) circuit.layers.emplace_back();
    circuit.layers[layer].push_back(LayerOp{op, i});
    for (const QubitIndex q : qubits) next_free[q] = layer + 1;
  }
  return circuit;
}

std::vector<DeviceViolation> validate_against_device(const Program& program, const CouplingGraph& device) {
  std::vector<DeviceViolation> report;
  if (program.qubit_count > device.qubit_count()) {
    report.push_back({DeviceViolation::Kind::kQubitRange, kWholeProgram,
                      fmt::format("program declares {} qubits; device has {}", program.qubit_count,
                                  device.qubit_count())});
  }
  for (std::size_t i = 0; i < program.instructions.size(); ++i) {
    const Instruction& instr = program.instructions[i];
    for (const QubitIndex q : operand_qubits(instr)) {
      if (q >= device.qubit_count()) {
        report.push_back({DeviceViolation::Kind::kQubitRange, i,
                          fmt::format("instruction {}: qubit {} not on {}-qubit device", i, q, device.qubit_count())});
      }
    }
    const CXGate* cx = std::get_if<CXGate>(&instr);
    if (const auto* cond = std::get_if<IfBit>(&instr)) cx = std::get_if<CXGate>(&cond->inner);
    if (cx != nullptr && cx->control < device.qubit_count() && cx->target < device.qubit_count() &&
        !device.connected(cx->control, cx->target)) {
      report.push_back({DeviceViolation::Kind::kMissingEdge, i,
                        fmt::format("instruction {}: CX({},{}) is not a coupling edge", i, cx->control, cx->target)});
    }
  }
  return report;
}

}  // namespace nisqsim
