#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "nisqsim/cosim.hpp"

namespace nisqsim {

StateOutcomeSource::StateOutcomeSource(std::size_t qubits, const DeviceErrorModel& model, std::uint64_t seed,
                                       std::uint64_t trial, std::uint64_t initial_basis)
    : model_(model),
      state_(qubits, initial_basis),
      rng_(Rng::stream(seed, trial, Rng::Domain::kCosim)),
      cx_(cx_matrix()) {}

void StateOutcomeSource::inject(QubitIndex qubit, double rate) {
  const Injection inj = sample_injection({0, qubit, 0, rate}, model_.operators, rng_);
  if (inj.kind == Injection::Kind::kOperator) apply_1q(state_, model_.operators[inj.operator_index].matrix, qubit);
}

void StateOutcomeSource::on_operation(const QuantumOp& op) {
  if (const auto* u = std::get_if<UGate>(&op)) {
    apply_1q(state_, u_matrix(*u), u->qubit);
    inject(u->qubit, model_.gate1_error.at(u->qubit));
  } else if (const auto* cx = std::get_if<CXGate>(&op)) {
    apply_2q(state_, cx_, cx->control, cx->target);
    const double rate = model_.cx_rate(cx->control, cx->target);
    inject(cx->control, rate);
    inject(cx->target, rate);
  } else if (const auto* r = std::get_if<Reset>(&op)) {
    reset_qubit(state_, r->qubit, rng_);
  }
}

int StateOutcomeSource::next_outcome(const MeasureEvent& event) {
  int bit = measure_qubit(state_, event.qubit, rng_);
  if (rng_.uniform() < model_.readout_error.at(event.qubit)) bit ^= 1;
  return bit;
}

namespace {

void check_device(const Program& program, const DeviceErrorModel& model) {
  const auto violations = validate_against_device(program, model.coupling);
  if (!violations.empty()) {
    throw ErrorModelError(fmt::format("program does not fit the device: {}", violations.front().message));
  }
}

bool has_feedback(const Program& program) {
  return std::any_of(program.instructions.begin(), program.instructions.end(), [](const Instruction& instr) {
    return std::holds_alternative<IfBit>(instr) || std::holds_alternative<Reset>(instr);
  });
}

Program without_waits(const Program& program) {
  Program out = program;
  std::erase_if(out.instructions, [](const Instruction& instr) { return std::holds_alternative<Wait>(instr); });
  return out;
}

void summarize(CosimResult& result) {
  const auto [lo, hi] = std::minmax_element(result.total_time.begin(), result.total_time.end());
  result.timing.min = *lo;
  result.timing.max = *hi;
  double sum = 0.0;
  for (const Picoseconds t : result.total_time) sum += to_ns(t);
  result.timing.mean_ns = sum / static_cast<double>(result.total_time.size());
}

}  // namespace

CosimResult cosimulate(const Program& program, const ControlConfig& config, const DeviceErrorModel& model,
                       const CosimOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("cosimulate: trials must be at least 1");
  if (program.cbit_count > 64) throw UnsupportedProgram("co-simulation supports at most 64 classical bits");
  validate_program(program);
  config.validate();
  check_device(program, model);
  if (program.qubit_count < 64 && (options.initial_basis >> program.qubit_count) != 0) {
    throw std::invalid_argument(
        fmt::format("initial basis state {} does not fit {} qubits", options.initial_basis, program.qubit_count));
  }

  CosimResult result;
  result.distribution.cbit_count = program.cbit_count;

  std::optional<NoisyCircuit> circuit;
  if (!has_feedback(program) && options.initial_basis == 0) {
    try {
      circuit = make_noisy_circuit(build_layers(without_waits(program)));
    } catch (const UnsupportedProgram&) {
      circuit.reset();
    }
  }

  if (circuit) {
    result.delegated = true;
    const TraceSet traces = generate_traces(*circuit, model, options.trials, options.seed);
    const RunResult run = run_optimized(traces);
    result.distribution = run.distribution;
    ConstantOutcome zero(0);
    result.first_trial = simulate(program, config, zero);
    const auto first = run.outcome_by_trial.at(0);
    for (std::size_t c = 0; c < result.first_trial.registers.size(); ++c) {
      result.first_trial.registers[c] = static_cast<int>((first >> c) & 1U);
    }
    result.total_time.assign(options.trials, result.first_trial.total_time);
    result.conditionals_fired.assign(options.trials, 0);
  } else {
    for (std::uint64_t trial = 0; trial < options.trials; ++trial) {
      StateOutcomeSource source(program.qubit_count, model, options.seed, trial, options.initial_basis);
      ExecutionStats stats = simulate(program, config, source);
      result.distribution.add(stats.register_value());
      result.total_time.push_back(stats.total_time);
      result.conditionals_fired.push_back(stats.conditionals_fired);
      if (trial == 0) result.first_trial = std::move(stats);
    }
  }
  summarize(result);
  return result;
}

}  // namespace nisqsim
