#pragma once

#include <cstdint>
#include <vector>

#include "nisqsim/control_sim.hpp"
#include "nisqsim/error_model.hpp"
#include "nisqsim/mc_engine.hpp"

namespace nisqsim {

/// Outcome source backed by a noisy state vector. Gates and resets arrive
/// through on_operation in dispatch order; each gate operand then draws one
/// error injection, and each measurement collapses the state and may flip
/// its reported bit at the qubit's readout rate.
class StateOutcomeSource : public OutcomeSource {
 public:
  StateOutcomeSource(std::size_t qubits, const DeviceErrorModel& model, std::uint64_t seed, std::uint64_t trial,
                     std::uint64_t initial_basis = 0);

  int next_outcome(const MeasureEvent& event) override;
  void on_operation(const QuantumOp& op) override;

  const StateVector& state() const { return state_; }

 private:
  void inject(QubitIndex qubit, double rate);

  const DeviceErrorModel& model_;
  StateVector state_;
  Rng rng_;
  Mat4 cx_;
};

struct CosimOptions {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::uint64_t initial_basis = 0;  ///< computational basis state every trial starts from
};

struct TimingSummary {
  Picoseconds min = 0;
  Picoseconds max = 0;
  double mean_ns = 0.0;
};

struct CosimResult {
  OutputDistribution distribution;
  TimingSummary timing;
  std::vector<Picoseconds> total_time;           ///< per trial
  std::vector<std::size_t> conditionals_fired;   ///< per trial
  ExecutionStats first_trial;
  /// True when the program had no feedback path and its quantum part ran
  /// through the Monte-Carlo engine, so outcomes match a plain noisy run.
  bool delegated = false;
};

/// Runs every trial through the control simulator with a state-vector
/// outcome source. Programs without conditionals, resets or mid-circuit
/// measurement starting from |0...0> hand their quantum part to the
/// Monte-Carlo engine instead; their timing is outcome independent.
CosimResult cosimulate(const Program& program, const ControlConfig& config, const DeviceErrorModel& model,
                       const CosimOptions& options);

}  // namespace nisqsim
