#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nisqsim/cli.hpp"
#include "nisqsim/control_sim.hpp"
#include "nisqsim/cosim.hpp"
#include "nisqsim/encoding.hpp"
#include "nisqsim/mc_engine.hpp"
#include "nisqsim/qasm.hpp"
#include "support.hpp"

using namespace nisqsim;
namespace t = nisqsim::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

NoisyCircuit circuit_of(const std::string& name) {
  return make_noisy_circuit(build_layers(load_program(t::benchmark(name))));
}

std::vector<std::string> mc_fixtures() {
  std::vector<std::string> out;
  for (const auto& name : t::all_fixtures()) {
    try {
      circuit_of(name);
      out.push_back(name);
    } catch (const UnsupportedProgram&) {
    }
  }
  return out;
}

constexpr Picoseconds ns(double v) { return static_cast<Picoseconds>(v * 1000.0); }

Outcome oracle_equivalence() {
  Outcome o;
  const auto start = Clock::now();
  const NoisyCircuit bell = circuit_of("bell");
  const std::uint64_t n = 8192;
  for (const double r : {0.0, 1e-3, 1e-2}) {
    const auto model = DeviceErrorModel::uniform(2, r);
    const auto exact = exact_noisy_oracle(bell, model);
    const TraceSet traces = generate_traces(bell, model, n, 1);
    const auto mc = run_optimized(traces).distribution.probabilities();
    for (std::size_t v = 0; v < exact.size(); ++v) {
      const double sigma = std::sqrt(exact[v] * (1.0 - exact[v]) / static_cast<double>(n));
      o.check(std::abs(mc[v] - exact[v]) <= 3.0 * sigma,
              fmt::format("r={} outcome {}: mc {} vs exact {} (3 sigma {})", r, v, mc[v], exact[v], 3 * sigma));
    }
    if (r == 0.0) {
      const std::vector<double> ideal{0.5, 0.0, 0.0, 0.5};
      for (std::size_t v = 0; v < 4; ++v) {
        o.check(std::abs(exact[v] - ideal[v]) <= 1e-15, fmt::format("noiseless reference outcome {} = {}", v, exact[v]));
      }
      o.check(mc[1] == 0.0 && mc[2] == 0.0, "noiseless run puts no mass on 01 or 10");
      o.check(error_free_fraction(traces) == 1.0, "noiseless run samples no errors");
      o.note(fmt::format("r=0 sampled P(00)={:.4f} P(11)={:.4f}", mc[0], mc[3]));
    }
  }
  const double secs = seconds_since(start);
  o.check(secs < 10.0, fmt::format("runtime {:.2f}s under 10s", secs));
  o.note(fmt::format("{:.2f}s", secs));
  return o;
}

Outcome engine_equivalence() {
  Outcome o;
  const auto start = Clock::now();
  const auto model = load_device_model_file(t::config("yorktown.json"));
  const auto names = mc_fixtures();
  for (const auto& name : names) {
    const NoisyCircuit c = circuit_of(name);
    for (const std::uint64_t seed : {1, 2, 3}) {
      const TraceSet ts = generate_traces(c, model, 1024, seed);
      const RunResult a = run_optimized(ts);
      const RunResult b = run_bruteforce(ts);
      o.check(a.outcome_by_trial == b.outcome_by_trial, fmt::format("{} seed {} per-trial outcomes", name, seed));
      o.check(a.distribution == b.distribution, fmt::format("{} seed {} distribution", name, seed));
    }
  }
  const double secs = seconds_since(start);
  o.check(secs < 120.0, fmt::format("runtime {:.1f}s under 120s", secs));
  o.note(fmt::format("{} fixtures x 3 seeds, {:.2f}s", names.size(), secs));
  return o;
}

struct SavingsRun {
  double savings = 0.0;
  std::size_t msv = 0;
};

SavingsRun savings_at(const NoisyCircuit& c, const DeviceErrorModel& model, std::uint64_t trials) {
  const EngineComparison cmp = compare_engines(generate_traces(c, model, trials, 1));
  if (!cmp.outcomes_identical) throw std::logic_error("engines disagree");
  return {cmp.savings(), cmp.optimized.metrics.msv_peak};
}

Outcome computation_savings(SavingsRun& at_8192) {
  Outcome o;
  const auto model = load_device_model_file(t::config("yorktown.json"));
  const NoisyCircuit c = circuit_of("qv_n5d5");
  o.check(c.layers.gate_count() >= 130, fmt::format("{} gates >= 130", c.layers.gate_count()));
  const SavingsRun small = savings_at(c, model, 1024);
  at_8192 = savings_at(c, model, 8192);
  o.check(at_8192.savings >= 0.5, fmt::format("savings at 8192 = {:.3f} >= 0.5", at_8192.savings));
  o.check(at_8192.savings >= small.savings, "savings at 8192 >= savings at 1024");
  o.note(fmt::format("qv_n5d5 {} gates: {:.1f}% at 1024, {:.1f}% at 8192", c.layers.gate_count(),
                     100 * small.savings, 100 * at_8192.savings));
  return o;
}

Outcome memory(const SavingsRun& at_8192) {
  Outcome o;
  o.check(at_8192.msv <= 8, fmt::format("msv_peak {} <= 8", at_8192.msv));
  const auto model = load_device_model_file(t::config("yorktown.json"));
  for (const auto& name : mc_fixtures()) {
    const EngineComparison cmp = compare_engines(generate_traces(circuit_of(name), model, 1024, 1));
    o.check(cmp.optimized.metrics.msv_peak <= cmp.trial_order.msv_peak,
            fmt::format("{}: ordered {} <= trial order {}", name, cmp.optimized.metrics.msv_peak,
                        cmp.trial_order.msv_peak));
  }
  o.note(fmt::format("msv_peak {} at 8192 trials", at_8192.msv));
  return o;
}

Picoseconds baseline_time(const std::string& name) {
  ConstantOutcome zero(0);
  return simulate(load_program(t::benchmark(name)), ControlConfig::preset("qcb-baseline"), zero).total_time;
}

Outcome timing_goldens() {
  Outcome o;
  const Picoseconds prefix = baseline_time("bv4_prefix");
  const Picoseconds reordered = baseline_time("bv4_prefix_reordered");
  const Picoseconds allxy = baseline_time("allxy");
  o.check(prefix == ns(60), fmt::format("bv4 prefix {} ns == 60", to_ns(prefix)));
  o.check(reordered == ns(40), fmt::format("reordered prefix {} ns == 40", to_ns(reordered)));
  o.check(allxy == ns(7140), fmt::format("allxy {} ns == 7140", to_ns(allxy)));
  const Program p = load_program(t::benchmark("allxy"));
  std::size_t gates = 0, measures = 0;
  for (const auto& i : p.instructions) {
    gates += std::holds_alternative<UGate>(i);
    measures += std::holds_alternative<Measure>(i);
  }
  o.check(p.qubit_count == 1 && gates == 42 && measures == 21, "allxy has 21 x (2 gates + measure) on one qubit");
  o.note(fmt::format("{} / {} / {} ns", to_ns(prefix), to_ns(reordered), to_ns(allxy)));
  return o;
}

Outcome sweep_behavior() {
  Outcome o;
  const ControlConfig cfg = ControlConfig::preset("qcb-baseline");
  std::vector<std::optional<std::size_t>> counts;
  for (std::size_t k = 3; k <= 11; ++k) counts.push_back(k);
  counts.push_back(std::nullopt);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& name : t::all_fixtures()) {
    const Program p = load_program(t::benchmark(name));
    const auto pts = channel_sweep(p, cfg, counts, [] { return std::make_unique<RandomOutcome>(0.5, 1); });
    for (std::size_t i = 1; i < pts.size(); ++i) {
      o.check(pts[i].with_measure <= pts[i - 1].with_measure && pts[i].without_measure <= pts[i - 1].without_measure,
              fmt::format("{} nonincreasing at step {}", name, i));
    }
    if (std::find(t::kTableBenchmarks.begin(), t::kTableBenchmarks.end(), name) != t::kTableBenchmarks.end()) {
      sum += 1.0 - static_cast<double>(pts.back().with_measure) / static_cast<double>(pts.front().with_measure);
      ++n;
    }
    if (name == "rb") {
      o.check(p.qubit_count == 2, "rb is the 2-qubit fixture");
      o.check(pts.front().with_measure == pts.back().with_measure, "rb is flat");
    }
  }
  const double avg = sum / static_cast<double>(n);
  o.note(fmt::format("average saving at inf {:.1f}% over {} benchmarks ({} the 5-25% band)", 100 * avg, n,
                     avg >= 0.05 && avg <= 0.25 ? "inside" : "outside"));
  return o;
}

Outcome utilization() {
  Outcome o;
  ConstantOutcome zero(0);
  const auto stats = simulate(load_program(t::benchmark("bv4_prefix")), ControlConfig::preset("qcb-baseline"), zero);
  const auto rows = utilization_report(stats, std::vector<Interval>{{0, ns(20)}, {ns(20), ns(60)}});
  o.check(std::abs(rows[0].da_utilization - 1.0) < 1e-12, fmt::format("[0,20) = {}", rows[0].da_utilization));
  o.check(std::abs(rows[1].da_utilization - 1.0 / 3.0) <= 0.001, fmt::format("[20,60) = {}", rows[1].da_utilization));
  o.note(fmt::format("{:.1f}% / {:.1f}%", 100 * rows[0].da_utilization, 100 * rows[1].da_utilization));
  return o;
}

Outcome active_reset() {
  Outcome o;
  const Program p = load_program(t::benchmark("active_reset"));
  const ControlConfig ibm = ControlConfig::preset("ibm-experimental");
  const auto model = DeviceErrorModel::uniform(1, 0.0);
  const CosimOptions opts{256, 1, 1};
  const auto a = cosimulate(p, ibm, model, opts);
  const auto b = cosimulate(p, ibm, model, opts);
  o.check(a.distribution.trials == 256 && a.distribution.counts.size() == 1 && a.distribution.counts.count(0) == 1,
          "final bit 0 in every trial");
  bool one_each = true;
  for (const auto n : a.conditionals_fired) one_each = one_each && n == 1;
  o.check(one_each, "exactly one conditional fires per trial");
  o.check(a.total_time == b.total_time, "simulated time identical across runs");
  o.check(a.timing.min == a.timing.max, "simulated time identical across trials");
  o.note(fmt::format("ibm-experimental time {} ns", to_ns(a.timing.max)));
  return o;
}

std::string cli_output(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  if (run_cli(args, out, err) != 0) throw std::runtime_error(err.str());
  return out.str();
}

Outcome properties() {
  Outcome o;
  // Normalization and unitarity.
  for (std::uint64_t seed = 0; seed < 200 && o.pass; ++seed) {
    Rng rng = Rng::stream(seed, 0, Rng::Domain::kTrace);
    StateVector s(4);
    for (int g = 0; g < 50; ++g) {
      const auto q = static_cast<QubitIndex>(rng.next_u64() % 4);
      const Mat2 u = u_matrix(t::random_u(rng, q));
      o.check(is_unitary(u, 1e-9), "random U is unitary");
      apply_1q(s, u, q);
      apply_2q(s, cx_matrix(), q, (q + 1) % 4);
    }
    o.check(std::abs(s.norm_squared() - 1.0) <= 1e-9, fmt::format("seed {} norm", seed));
  }
  o.check(is_unitary(cx_matrix(), 1e-9), "CX is unitary");

  // Encode/decode round trip.
  for (const auto& name : t::all_fixtures()) {
    const Program p = load_program(t::benchmark(name));
    o.check(decode_program(from_binary(to_binary(encode_program(p)))).same_code(p), name + " round trip");
  }

  // Scheduler safety and critical path on 1000 random programs.
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Program p = t::random_program(seed, {5, 50, true});
    ControlConfig cfg;
    RandomOutcome outcomes(0.5, seed);
    const ExecutionStats s = simulate(p, cfg, outcomes);

    std::vector<std::pair<Picoseconds, int>> da_events, ad_events;
    std::map<QubitIndex, std::vector<Interval>> per_qubit;
    std::map<QubitIndex, Picoseconds> qubit_sum;
    for (const auto& r : s.records) {
      if (!r.executed) continue;
      for (const auto q : r.qubits) {
        per_qubit[q].push_back({r.start, r.end});
        qubit_sum[q] += r.end - r.start;
      }
      if (r.end > r.start) {
        da_events.push_back({r.start, static_cast<int>(r.da.size())});
        da_events.push_back({r.end, -static_cast<int>(r.da.size())});
        ad_events.push_back({r.start, static_cast<int>(r.ad.size())});
        ad_events.push_back({r.end, -static_cast<int>(r.ad.size())});
      }
    }
    auto peak = [](std::vector<std::pair<Picoseconds, int>> ev) {
      std::sort(ev.begin(), ev.end());
      int cur = 0, best = 0;
      for (const auto& [time, d] : ev) best = std::max(best, cur += d);
      return static_cast<std::size_t>(best);
    };
    o.check(peak(da_events) <= *cfg.da_channels, fmt::format("seed {} DA capacity", seed));
    o.check(peak(ad_events) <= *cfg.ad_channels, fmt::format("seed {} AD capacity", seed));
    for (auto& [q, ivs] : per_qubit) {
      std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < ivs.size(); ++i) {
        o.check(ivs[i - 1].end <= ivs[i].start, fmt::format("seed {} qubit {} overlap", seed, q));
      }
      o.check(s.total_time >= s.startup_offset + qubit_sum[q], fmt::format("seed {} critical path", seed));
    }
    for (std::size_t i = 1; i < s.records.size(); ++i) {
      o.check(s.records[i - 1].dispatch <= s.records[i].dispatch, fmt::format("seed {} dispatch order", seed));
    }
    if (!o.pass) break;
  }

  // Seed determinism of every report.
  const std::string dev = t::config("yorktown.json").string();
  const std::vector<std::vector<std::string>> commands = {
      {"noise", "--program", t::benchmark("qft4").string(), "--device", dev, "--trials", "256"},
      {"savings", "--program", t::benchmark("bv5").string(), "--device", dev, "--trials", "64,256"},
      {"timing", "--program", t::benchmark("allxy").string()},
      {"sweep", "--program", t::benchmark("qft5").string(), "--program", t::benchmark("rb").string()},
      {"cosim", "--program", t::benchmark("active_reset").string(), "--device", dev, "--trials", "64"},
      {"compare", "--program", t::benchmark("bv4").string(), "--program", t::benchmark("bv5").string()},
  };
  for (const auto& base : commands) {
    for (const std::string format : {"text", "structured", "csv"}) {
      auto args = base;
      args.insert(args.end(), {"--seed", "7", "--format", format});
      o.check(cli_output(args) == cli_output(args), base.front() + " " + format + " report deterministic");
    }
  }
  o.note(fmt::format("200 random states, {} fixtures round-tripped, 1000 random schedules, {} reports rerun",
                     t::all_fixtures().size(), commands.size() * 3));
  return o;
}

}  // namespace

int main() {
  SavingsRun at_8192;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence on Bell", oracle_equivalence},
      {"optimized and brute-force engines agree", engine_equivalence},
      {"computation savings", [&] { return computation_savings(at_8192); }},
      {"stored state vectors", [&] { return memory(at_8192); }},
      {"timing goldens", timing_goldens},
      {"channel sweep", sweep_behavior},
      {"utilization on bv4 prefix", utilization},
      {"active reset co-simulation", active_reset},
      {"property suites", properties},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::size_t shown = 0;
    std::string detail;
    for (const auto& n : o.notes) {
      if (shown++ == 4) {
        detail += fmt::format("; ... {} more", o.notes.size() - 4);
        break;
      }
      detail += (detail.empty() ? "" : "; ") + n;
    }
    std::cout << fmt::format("{} {} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, detail);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
