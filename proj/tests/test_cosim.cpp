#include <gtest/gtest.h>

#include <cmath>

#include "nisqsim/cosim.hpp"
#include "nisqsim/qasm.hpp"
#include "support.hpp"

namespace nisqsim {
namespace {

constexpr Picoseconds ns(double v) { return static_cast<Picoseconds>(v * 1000.0); }

TEST(Cosim, ActiveResetReturnsExcitedQubitToGround) {
  const Program p = load_program(testing::benchmark("active_reset"));
  const auto model = DeviceErrorModel::uniform(1, 0.0);
  const auto r = cosimulate(p, {}, model, {64, 7, 1});
  EXPECT_FALSE(r.delegated);
  EXPECT_EQ(r.distribution.counts.at(0), 64u);
  for (const auto n : r.conditionals_fired) EXPECT_EQ(n, 1u);
  EXPECT_EQ(r.timing.min, ns(920));
  EXPECT_EQ(r.timing.max, ns(920));
  EXPECT_EQ(r.first_trial.records[2].start, ns(300));
}

TEST(Cosim, ActiveResetFromGroundNeverFires) {
  const Program p = load_program(testing::benchmark("active_reset"));
  const auto r = cosimulate(p, {}, DeviceErrorModel::uniform(1, 0.0), {32, 7, 0});
  EXPECT_EQ(r.distribution.counts.at(0), 32u);
  for (const auto n : r.conditionals_fired) EXPECT_EQ(n, 0u);
  EXPECT_DOUBLE_EQ(r.timing.mean_ns, 900.0);
}

TEST(Cosim, TimingDependsOnOutcomes) {
  const Program p = load_program(testing::benchmark("active_reset"));
  const auto r = cosimulate(p, {}, DeviceErrorModel::uniform(1, 0.2), {400, 3, 1});
  EXPECT_LT(r.timing.min, r.timing.max);
  EXPECT_GT(r.distribution.trials, 0u);
}

TEST(Cosim, FeedForwardFreeProgramsDelegate) {
  const Program p = load_program(testing::benchmark("bell"));
  const auto model = DeviceErrorModel::uniform(2, 0.05);
  const auto r = cosimulate(p, {}, model, {500, 11, 0});
  EXPECT_TRUE(r.delegated);
  const auto mc = run_optimized(generate_traces(make_noisy_circuit(build_layers(p)), model, 500, 11));
  EXPECT_EQ(r.distribution, mc.distribution);
  EXPECT_EQ(r.timing.min, r.timing.max);
}

TEST(Cosim, StatePathMatchesExactNoisyDistribution) {
  // A trailing reset on a spare qubit forces the per-trial state path.
  const Program p = parse_program(
      "qreg q[3]; creg c[2]; h q[0]; CX q[0],q[1]; reset q[2]; measure q[0] -> c[0]; measure q[1] -> c[1];");
  DeviceErrorModel model = DeviceErrorModel::uniform(3, 0.05);
  ControlConfig cfg;
  cfg.t1_seconds = {1e-6, 1e-6, 1e-6};
  const std::uint64_t n = 6000;
  const auto r = cosimulate(p, cfg, model, {n, 21, 0});
  ASSERT_FALSE(r.delegated);
  const auto exact = exact_noisy_oracle(
      make_noisy_circuit(build_layers(load_program(testing::benchmark("bell")))), DeviceErrorModel::uniform(2, 0.05));
  const auto got = r.distribution.probabilities();
  for (std::size_t v = 0; v < 4; ++v) {
    const double sigma = std::sqrt(exact[v] * (1 - exact[v]) / static_cast<double>(n));
    EXPECT_LE(std::abs(got[v] - exact[v]), 4 * sigma + 1e-12) << v;
  }
}

TEST(Cosim, ResetClearsStateAndHoldsQubit) {
  const Program p = parse_program("qreg q[1]; creg c[1]; x q[0]; reset q[0]; measure q[0] -> c[0];");
  const auto r = cosimulate(p, {}, DeviceErrorModel::uniform(1, 0.0), {16, 1, 0});
  EXPECT_EQ(r.distribution.counts.at(0), 16u);
  EXPECT_EQ(r.timing.max, ns(20) + ns(250000) + ns(300));
}

TEST(Cosim, DeterministicPerSeed) {
  const Program p = load_program(testing::benchmark("active_reset"));
  const auto model = DeviceErrorModel::uniform(1, 0.1);
  const auto a = cosimulate(p, {}, model, {200, 5, 1});
  const auto b = cosimulate(p, {}, model, {200, 5, 1});
  EXPECT_EQ(a.distribution, b.distribution);
  EXPECT_EQ(a.total_time, b.total_time);
}

TEST(Cosim, RejectsBadInputs) {
  const Program p = load_program(testing::benchmark("bell"));
  const auto model = DeviceErrorModel::uniform(2, 0.0);
  EXPECT_THROW(cosimulate(p, {}, model, {0, 1, 0}), std::invalid_argument);
  EXPECT_THROW(cosimulate(p, {}, model, {1, 1, 4}), std::invalid_argument);
  EXPECT_ANY_THROW(cosimulate(p, {}, DeviceErrorModel::uniform(1, 0.0), {1, 1, 0}));
}

}  // namespace
}  // namespace nisqsim
