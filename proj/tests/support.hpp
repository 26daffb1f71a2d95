#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "nisqsim/program.hpp"
#include "nisqsim/rng.hpp"

namespace nisqsim::testing {

inline std::filesystem::path source_dir() { return NISQSIM_SOURCE_DIR; }
inline std::filesystem::path benchmark(const std::string& name) {
  return source_dir() / "benchmarks" / (name + ".qasm");
}
inline std::filesystem::path config(const std::string& name) { return source_dir() / "configs" / name; }

/// Gate-count-matched benchmark set.
inline const std::vector<std::string> kTableBenchmarks = {
    "rb",   "grover", "wstate", "7x1mod15", "bv4",     "bv5",     "qft4",
    "qft5", "qv_n5d2", "qv_n5d3", "qv_n5d4", "qv_n5d5",
};

/// Every file under benchmarks/.
inline std::vector<std::string> all_fixtures() {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(source_dir() / "benchmarks")) {
    if (e.path().extension() == ".qasm") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

struct RandomProgramOptions {
  std::size_t max_qubits = 5;
  std::size_t max_instructions = 50;
  bool control_flow = true;  ///< allow Measure mid-program, Reset, If, Wait
};

inline UGate random_u(Rng& rng, QubitIndex q) {
  const double two_pi = 2.0 * std::numbers::pi;
  return UGate{rng.uniform() * two_pi, rng.uniform() * two_pi, rng.uniform() * two_pi, q};
}

/// Seeded random program over all-to-all connectivity.
inline Program random_program(std::uint64_t seed, const RandomProgramOptions& opt = {}) {
  Rng rng = Rng::stream(seed, 0, Rng::Domain::kOutcome);
  auto below = [&](std::size_t n) { return static_cast<std::size_t>(rng.next_u64() % n); };
  Program p;
  p.qubit_count = 1 + below(opt.max_qubits);
  p.cbit_count = 1 + below(opt.max_qubits);
  p.source_name = "random";
  const std::size_t count = below(opt.max_instructions + 1);
  auto qubit = [&] { return static_cast<QubitIndex>(below(p.qubit_count)); };
  auto cbit = [&] { return static_cast<CbitIndex>(below(p.cbit_count)); };
  auto gate = [&]() -> GuardedOp {
    if (p.qubit_count >= 2 && below(3) == 0) {
      const QubitIndex c = qubit();
      QubitIndex t = qubit();
      while (t == c) t = qubit();
      return CXGate{c, t};
    }
    return random_u(rng, qubit());
  };
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t kind = opt.control_flow ? below(10) : 0;
    if (kind <= 5) {
      p.instructions.push_back(to_instruction(gate()));
    } else if (kind == 6) {
      p.instructions.push_back(Measure{qubit(), cbit()});
    } else if (kind == 7) {
      p.instructions.push_back(Reset{qubit()});
    } else if (kind == 8) {
      GuardedOp inner = below(4) == 0 ? GuardedOp{Measure{qubit(), cbit()}} : gate();
      p.instructions.push_back(IfBit{cbit(), static_cast<int>(below(2)), inner});
    } else {
      p.instructions.push_back(Wait{below(40)});
    }
  }
  return p;
}

/// Random gate-only circuit with terminal measurement of every qubit.
inline Program random_noisy_circuit(std::uint64_t seed, std::size_t max_qubits = 4, std::size_t max_gates = 30) {
  Program p = random_program(seed, {max_qubits, max_gates, false});
  p.cbit_count = p.qubit_count;
  for (QubitIndex q = 0; q < p.qubit_count; ++q) p.instructions.push_back(Measure{q, q});
  return p;
}

}  // namespace nisqsim::testing
