#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "nisqsim/error_model.hpp"
#include "nisqsim/layering.hpp"
#include "nisqsim/state_vector.hpp"

namespace nisqsim {

/// One injected error operator: applied after the gates of `layer`.
struct TraceInjection {
  std::size_t layer = 0;
  QubitIndex qubit = 0;
  std::size_t op = 0;  ///< index into TraceSet::operators
  auto operator<=>(const TraceInjection&) const = default;
};

/// The sampled errors of one Monte-Carlo trial.
struct ErrorTrace {
  std::vector<TraceInjection> injections;  ///< sorted by (layer, qubit), at most one per slot
  std::vector<std::size_t> flipped_measurements;  ///< source indices of measurements whose result flips
  std::uint64_t trial_id = 0;

  bool error_free() const { return injections.empty() && flipped_measurements.empty(); }
};

/// Terminal measurement of one qubit into one classical bit.
struct MeasurementSlot {
  QubitIndex qubit = 0;
  CbitIndex cbit = 0;
  std::size_t source_index = 0;
};

/// A layered circuit the noisy engines accept: only U, CX and terminal Measure.
struct NoisyCircuit {
  LayeredCircuit layers;
  std::vector<MeasurementSlot> measurements;  ///< program order
};

/// Throws UnsupportedProgram for Reset, mid-circuit measurement (an op on a
/// qubit after its measurement) or more than 64 classical bits.
NoisyCircuit make_noisy_circuit(LayeredCircuit circuit);

/// Traces in execution order. Lexicographic by injection sequence, so
/// traces that share an injection prefix are contiguous; a trace whose
/// injections run out sorts after every trace that continues; ties by trial id.
struct TraceSet {
  NoisyCircuit circuit;
  std::vector<ErrorOperator> operators;
  std::vector<ErrorTrace> traces;
  std::uint64_t seed = 0;
};

/// Sorts traces into the execution order described on TraceSet.
void order_traces(std::vector<ErrorTrace>& traces);

/// Samples `trials` traces. Trial i draws from stream (seed, i), so the set
/// does not depend on generation order and the first k traces of a larger
/// run equal a k-trial run.
TraceSet generate_traces(const NoisyCircuit& circuit, const DeviceErrorModel& model, std::uint64_t trials,
                         std::uint64_t seed);

/// Counts of classical-register values over trials. Bit k of a value is cbit k.
struct OutputDistribution {
  std::size_t cbit_count = 0;
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t trials = 0;

  double probability(std::uint64_t value) const;
  /// Dense vector of 2^cbit_count probabilities.
  std::vector<double> probabilities() const;
  void add(std::uint64_t value) {
    ++counts[value];
    ++trials;
  }
  bool operator==(const OutputDistribution&) const = default;
};

struct SimMetrics {
  std::uint64_t matvec_count = 0;
  std::size_t msv_peak = 0;  ///< peak number of stored checkpoint vectors
  std::uint64_t trials = 0;
};

struct RunResult {
  OutputDistribution distribution;
  SimMetrics metrics;
  std::map<std::uint64_t, std::uint64_t> outcome_by_trial;
};

enum class ExecutionOrder {
  kReordered,   ///< grouped prefix-sharing order (TraceSet order)
  kTrialOrder,  ///< debug: trial-id order, reusing cached states where possible
};

/// Prefix-sharing execution. Every distinct injection prefix is simulated
/// once; a checkpoint is held only while some later trace still needs it.
RunResult run_optimized(const TraceSet& traces, ExecutionOrder order = ExecutionOrder::kReordered);

/// Simulates each trace from |0...0> independently.
RunResult run_bruteforce(const TraceSet& traces);

/// Fraction of trials whose outcome equals `reference`.
double fidelity(const OutputDistribution& observed, std::uint64_t reference);

struct DistributionComparison {
  double support_mass = 0.0;     ///< observed mass on outcomes the reference gives nonzero probability
  double total_variation = 0.0;  ///< 0.5 * sum |observed - reference|
};

/// Throws std::invalid_argument unless reference has 2^cbit_count entries.
DistributionComparison compare_to_reference(const OutputDistribution& observed, std::span<const double> reference);

/// Fraction of traces that injected nothing and flipped nothing.
double error_free_fraction(const TraceSet& traces);

/// Exact classical-register distribution of the noiseless circuit.
std::vector<double> noiseless_distribution(const NoisyCircuit& circuit);

/// Exact noisy distribution by enumerating every operator assignment over
/// the positions with nonzero rate. Readout flips are folded in analytically.
/// Throws std::length_error beyond kMaxOraclePositions quantum positions.
inline constexpr std::size_t kMaxOraclePositions = 12;
std::vector<double> exact_noisy_oracle(const NoisyCircuit& circuit, const DeviceErrorModel& model);

struct EngineComparison {
  RunResult optimized;
  RunResult bruteforce;
  SimMetrics trial_order;  ///< optimized engine with reordering disabled
  bool outcomes_identical = false;

  double normalized_matvec() const {
    return static_cast<double>(optimized.metrics.matvec_count) /
           static_cast<double>(bruteforce.metrics.matvec_count);
  }
  double savings() const { return 1.0 - normalized_matvec(); }
};

/// Runs the same TraceSet through every engine.
EngineComparison compare_engines(const TraceSet& traces);

}  // namespace nisqsim
