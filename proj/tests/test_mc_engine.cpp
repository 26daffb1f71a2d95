#include <gtest/gtest.h>

#include <cmath>

#include "nisqsim/mc_engine.hpp"
#include "nisqsim/qasm.hpp"
#include "support.hpp"

namespace nisqsim {
namespace {

// Four layers: {U q0, U q1}, {CX}, {U q0, U q1}, {measure, measure}.
NoisyCircuit four_layer_circuit() {
  return make_noisy_circuit(build_layers(parse_program(
      "qreg q[2]; creg c[2]; x q[0]; h q[1]; CX q[0],q[1]; h q[0]; x q[1]; "
      "measure q[0] -> c[0]; measure q[1] -> c[1];")));
}

constexpr std::size_t kX = 0;
constexpr std::size_t kY = 1;
constexpr std::size_t kZ = 2;

TraceSet hand_traces(std::vector<std::vector<TraceInjection>> injections) {
  TraceSet ts;
  ts.circuit = four_layer_circuit();
  ts.operators = default_pauli_operators();
  ts.seed = 5;
  for (std::size_t i = 0; i < injections.size(); ++i) ts.traces.push_back({injections[i], {}, i});
  order_traces(ts.traces);
  return ts;
}

TEST(NoisyCircuit, RejectsWhatTheEngineCannotRun) {
  EXPECT_THROW(make_noisy_circuit(build_layers(parse_program("qreg q[1]; reset q[0];"))), UnsupportedProgram);
  EXPECT_THROW(
      make_noisy_circuit(build_layers(parse_program("qreg q[1]; creg c[1]; measure q[0] -> c[0]; x q[0];"))),
      UnsupportedProgram);
  Program wide;
  wide.qubit_count = 1;
  wide.cbit_count = 65;
  EXPECT_THROW(make_noisy_circuit(build_layers(wide)), UnsupportedProgram);
  const NoisyCircuit ok = four_layer_circuit();
  EXPECT_EQ(ok.measurements.size(), 2u);
  EXPECT_EQ(ok.layers.depth(), 4u);
}

TEST(TraceOrder, ContinuingTracesSortBeforeFinishedOnes) {
  std::vector<ErrorTrace> t = {
      {{{0, 0, kX}}, {}, 0},
      {{{0, 0, kX}, {2, 1, kZ}}, {}, 1},
      {{{1, 1, kY}}, {}, 2},
      {{}, {}, 3},
      {{{0, 0, kX}}, {}, 4},
  };
  order_traces(t);
  std::vector<std::uint64_t> ids;
  for (const auto& tr : t) ids.push_back(tr.trial_id);
  EXPECT_EQ(ids, (std::vector<std::uint64_t>{1, 0, 4, 2, 3}));
}

// Hand count: root layer 0 (2), X branch 1 + layer 1 (1) + layer 2 (2) + Z (1),
// root layer 1 (1) + Y (1) + layer 2 (2) = 11. Brute force: 3 * 5 gates + 4 injections = 19.
TEST(OptimizedEngine, SharedPrefixHandExample) {
  const TraceSet ts = hand_traces({{{0, 0, kX}}, {{0, 0, kX}, {2, 1, kZ}}, {{1, 1, kY}}});
  const RunResult opt = run_optimized(ts);
  const RunResult brute = run_bruteforce(ts);
  const RunResult debug = run_optimized(ts, ExecutionOrder::kTrialOrder);
  EXPECT_EQ(opt.metrics.matvec_count, 11u);
  EXPECT_EQ(brute.metrics.matvec_count, 19u);
  EXPECT_EQ(debug.metrics.matvec_count, 11u);
  EXPECT_EQ(opt.metrics.msv_peak, 2u);
  EXPECT_EQ(debug.metrics.msv_peak, 2u);
  EXPECT_EQ(opt.outcome_by_trial, brute.outcome_by_trial);
  EXPECT_EQ(debug.outcome_by_trial, brute.outcome_by_trial);
}

// Injections at layers 2, 0, 1 for trials 0, 1, 2. Reordered execution keeps
// one branch point alive at a time; trial order must hold layers 0 and 1
// of the clean path together while trial 0 runs.
TEST(OptimizedEngine, ReorderingLowersStoredStates) {
  const TraceSet ts = hand_traces({{{2, 0, kX}}, {{0, 0, kZ}}, {{1, 1, kY}}});
  const RunResult opt = run_optimized(ts);
  const RunResult debug = run_optimized(ts, ExecutionOrder::kTrialOrder);
  EXPECT_EQ(opt.metrics.msv_peak, 1u);
  EXPECT_EQ(debug.metrics.msv_peak, 2u);
  EXPECT_EQ(opt.metrics.matvec_count, 13u);
  EXPECT_EQ(debug.metrics.matvec_count, 13u);
  EXPECT_EQ(run_bruteforce(ts).metrics.matvec_count, 18u);
}

TEST(OptimizedEngine, SingleCleanTraceCostsGateCount) {
  const TraceSet ts = hand_traces({{}});
  const EngineComparison c = compare_engines(ts);
  EXPECT_EQ(c.optimized.metrics.matvec_count, 5u);
  EXPECT_EQ(c.bruteforce.metrics.matvec_count, 5u);
  EXPECT_DOUBLE_EQ(c.savings(), 0.0);
  EXPECT_EQ(c.optimized.metrics.msv_peak, 0u);
}

TEST(OptimizedEngine, RejectsMalformedTraces) {
  TraceSet ts = hand_traces({{{9, 0, kX}}});
  EXPECT_THROW(run_optimized(ts), std::out_of_range);
  ts = hand_traces({{{1, 0, 7}}});
  EXPECT_THROW(run_bruteforce(ts), std::out_of_range);
  ts = hand_traces({{{1, 0, kX}, {1, 0, kY}}});
  EXPECT_THROW(run_optimized(ts), std::invalid_argument);
}

TEST(Traces, BruteForceCostIsGatesPlusInjections) {
  const auto model = load_device_model_file(testing::config("yorktown.json"));
  const NoisyCircuit c = make_noisy_circuit(build_layers(load_program(testing::benchmark("qft4"))));
  const TraceSet ts = generate_traces(c, model, 300, 9);
  std::uint64_t expected = 0;
  for (const auto& t : ts.traces) expected += c.layers.gate_count() + t.injections.size();
  EXPECT_EQ(run_bruteforce(ts).metrics.matvec_count, expected);
}

TEST(Traces, TrialStreamsAreIndependentOfTrialCount) {
  const auto model = load_device_model_file(testing::config("yorktown.json"));
  const NoisyCircuit c = make_noisy_circuit(build_layers(load_program(testing::benchmark("qv_n5d2"))));
  const TraceSet small = generate_traces(c, model, 100, 4);
  const TraceSet large = generate_traces(c, model, 400, 4);
  std::map<std::uint64_t, const ErrorTrace*> by_id;
  for (const auto& t : large.traces) by_id[t.trial_id] = &t;
  for (const auto& t : small.traces) {
    EXPECT_EQ(t.injections, by_id.at(t.trial_id)->injections);
    EXPECT_EQ(t.flipped_measurements, by_id.at(t.trial_id)->flipped_measurements);
  }
  const RunResult a = run_optimized(small);
  const RunResult b = run_optimized(large);
  for (const auto& [id, v] : a.outcome_by_trial) EXPECT_EQ(v, b.outcome_by_trial.at(id));
}

TEST(Traces, SeedChangesSamples) {
  const auto model = DeviceErrorModel::uniform(2, 0.2);
  const NoisyCircuit c = make_noisy_circuit(build_layers(load_program(testing::benchmark("bell"))));
  const auto a = run_optimized(generate_traces(c, model, 200, 1));
  const auto b = run_optimized(generate_traces(c, model, 200, 1));
  const auto d = run_optimized(generate_traces(c, model, 200, 2));
  EXPECT_EQ(a.outcome_by_trial, b.outcome_by_trial);
  EXPECT_NE(a.outcome_by_trial, d.outcome_by_trial);
}

TEST(Oracle, SingleXWithGateErrorFlipsTwoThirds) {
  const double r = 0.09;
  DeviceErrorModel m = DeviceErrorModel::uniform(1, r);
  m.readout_error = {0.0};
  const NoisyCircuit c = make_noisy_circuit(build_layers(parse_program("qreg q[1]; creg c[1]; x q[0]; measure q[0] -> c[0];")));
  const auto p = exact_noisy_oracle(c, m);
  EXPECT_NEAR(p[0], r * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 - r * 2.0 / 3.0, 1e-15);
}

TEST(Oracle, ReadoutFlipOnlyAffectsFinalWriter) {
  DeviceErrorModel m = DeviceErrorModel::uniform(2, 0.0);
  m.readout_error = {0.25, 0.1};
  const NoisyCircuit c = make_noisy_circuit(build_layers(parse_program(
      "qreg q[2]; creg c[1]; measure q[0] -> c[0]; measure q[1] -> c[0];")));
  const auto p = exact_noisy_oracle(c, m);
  EXPECT_NEAR(p[1], 0.1, 1e-15);
}

TEST(Oracle, ZeroRatesGiveIdealBell) {
  const NoisyCircuit c = make_noisy_circuit(build_layers(load_program(testing::benchmark("bell"))));
  const auto p = exact_noisy_oracle(c, DeviceErrorModel::uniform(2, 0.0));
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_NEAR(p[3], 0.5, 1e-15);
  EXPECT_EQ(noiseless_distribution(c), p);
}

TEST(Oracle, RefusesLargeEnumerations) {
  const NoisyCircuit c = make_noisy_circuit(build_layers(load_program(testing::benchmark("qft4"))));
  EXPECT_THROW(exact_noisy_oracle(c, DeviceErrorModel::uniform(4, 0.01)), std::length_error);
  EXPECT_NO_THROW(exact_noisy_oracle(c, DeviceErrorModel::uniform(4, 0.0)));
}

TEST(Oracle, MonteCarloAgreesOnSmallCircuit) {
  DeviceErrorModel m = DeviceErrorModel::uniform(2, 0.05);
  const NoisyCircuit c = make_noisy_circuit(build_layers(parse_program(
      "qreg q[2]; creg c[2]; h q[0]; CX q[0],q[1]; u3(0.4,0.1,0.2) q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];")));
  const auto exact = exact_noisy_oracle(c, m);
  const std::uint64_t n = 20000;
  const auto mc = run_optimized(generate_traces(c, m, n, 17)).distribution.probabilities();
  for (std::size_t v = 0; v < exact.size(); ++v) {
    const double sigma = std::sqrt(exact[v] * (1 - exact[v]) / static_cast<double>(n));
    EXPECT_LE(std::abs(mc[v] - exact[v]), 3 * sigma + 1e-12) << v;
  }
}

TEST(Fidelity, AgainstBitstringAndDistribution) {
  OutputDistribution d;
  d.cbit_count = 2;
  for (int i = 0; i < 3; ++i) d.add(3);
  d.add(1);
  EXPECT_DOUBLE_EQ(fidelity(d, 3), 0.75);
  EXPECT_DOUBLE_EQ(fidelity(d, 0), 0.0);
  const std::vector<double> bell = {0.5, 0.0, 0.0, 0.5};
  const auto cmp = compare_to_reference(d, bell);
  EXPECT_DOUBLE_EQ(cmp.support_mass, 0.75);
  EXPECT_DOUBLE_EQ(cmp.total_variation, 0.5 * (0.5 + 0.25 + 0.25));
  EXPECT_THROW(compare_to_reference(d, std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST(Fidelity, NoiselessRunMatchesIdeal) {
  const NoisyCircuit c = make_noisy_circuit(build_layers(load_program(testing::benchmark("bv4"))));
  const auto ts = generate_traces(c, DeviceErrorModel::uniform(4, 0.0), 256, 3);
  const auto run = run_optimized(ts);
  EXPECT_DOUBLE_EQ(fidelity(run.distribution, 0b111), 1.0);
  EXPECT_DOUBLE_EQ(compare_to_reference(run.distribution, noiseless_distribution(c)).support_mass, 1.0);
  EXPECT_DOUBLE_EQ(error_free_fraction(ts), 1.0);
}

}  // namespace
}  // namespace nisqsim
