#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "nisqsim/state_vector.hpp"

namespace nisqsim {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_qubit(const StateVector& s, QubitIndex q) {
  if (q >= s.qubit_count()) {
    throw std::out_of_range(fmt::format("qubit {} out of range for {}-qubit state", q, s.qubit_count()));
  }
}

template <std::size_t N>
bool unitary_impl(const std::array<Complex, N * N>& m, double tol) {
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t c = 0; c < N; ++c) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < N; ++k) acc += std::conj(m[k * N + r]) * m[k * N + c];
      const Complex expect = (r == c) ? 1.0 : 0.0;
      if (std::abs(acc - expect) > tol) return false;
    }
  }
  return true;
}

}  // namespace

Mat2 identity2() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
Mat2 pauli_x() { return Mat2{{0.0, 1.0, 1.0, 0.0}}; }
Mat2 pauli_y() { return Mat2{{0.0, -kI, kI, 0.0}}; }
Mat2 pauli_z() { return Mat2{{1.0, 0.0, 0.0, -1.0}}; }

Mat2 adjoint(const Mat2& g) {
  return Mat2{{std::conj(g.m[0]), std::conj(g.m[2]), std::conj(g.m[1]), std::conj(g.m[3])}};
}

Mat4 adjoint(const Mat4& g) {
  Mat4 out;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) out.m[r * 4 + c] = std::conj(g.m[c * 4 + r]);
  }
  return out;
}

Mat2 multiply(const Mat2& a, const Mat2& b) {
  Mat2 out;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) out.m[r * 2 + c] = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
  }
  return out;
}

Mat2 u_matrix(double theta, double phi, double lambda) {
  if (!std::isfinite(theta) || !std::isfinite(phi) || !std::isfinite(lambda)) {
    throw std::invalid_argument("u_matrix: non-finite angle");
  }
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  return Mat2{{c, -std::exp(kI * lambda) * s, std::exp(kI * phi) * s, std::exp(kI * (phi + lambda)) * c}};
}

Mat4 cx_matrix() {
  Mat4 g;
  // Local index = control + 2*target; control set flips the target.
  g.m[0 * 4 + 0] = 1.0;
  g.m[2 * 4 + 2] = 1.0;
  g.m[1 * 4 + 3] = 1.0;
  g.m[3 * 4 + 1] = 1.0;
  return g;
}

bool is_unitary(const Mat2& g, double tol) { return unitary_impl<2>(g.m, tol); }
bool is_unitary(const Mat4& g, double tol) { return unitary_impl<4>(g.m, tol); }

StateVector::StateVector(std::size_t qubit_count, std::uint64_t basis_state) : qubits_(qubit_count) {
  if (qubit_count > kMaxQubits) {
    throw std::length_error(fmt::format("{} qubits exceeds the {}-qubit limit", qubit_count, kMaxQubits));
  }
  const std::size_t dim = std::size_t{1} << qubit_count;
  if (basis_state >= dim) throw std::out_of_range("basis state out of range");
  amps_.assign(dim, Complex{0.0, 0.0});
  amps_[basis_state] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim == 0 || (dim & (dim - 1)) != 0) throw std::invalid_argument("amplitude count must be a power of two");
  StateVector s;
  s.qubits_ = static_cast<std::size_t>(std::countr_zero(dim));
  s.amps_ = std::move(amplitudes);
  return s;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

void apply_1q(StateVector& state, const Mat2& g, QubitIndex qubit) {
  check_qubit(state, qubit);
  const std::size_t stride = std::size_t{1} << qubit;
  auto amps = state.amplitudes();
  for (std::size_t base = 0; base < amps.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = amps[i];
      const Complex a1 = amps[i + stride];
      amps[i] = g.m[0] * a0 + g.m[1] * a1;
      amps[i + stride] = g.m[2] * a0 + g.m[3] * a1;
    }
  }
}

void apply_1q(StateVector& state, const Mat2& gate, QubitIndex qubit, MatvecCounter& counter) {
  apply_1q(state, gate, qubit);
  ++counter.count;
}

void apply_2q(StateVector& state, const Mat4& g, QubitIndex q1, QubitIndex q2) {
  check_qubit(state, q1);
  check_qubit(state, q2);
  if (q1 == q2) throw std::invalid_argument("apply_2q: qubits must differ");
  const std::size_t m1 = std::size_t{1} << q1;
  const std::size_t m2 = std::size_t{1} << q2;
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & m1) != 0 || (i & m2) != 0) continue;
    const std::size_t idx[4] = {i, i | m1, i | m2, i | m1 | m2};
    const Complex in[4] = {amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]};
    for (std::size_t r = 0; r < 4; ++r) {
      amps[idx[r]] = g.m[r * 4 + 0] * in[0] + g.m[r * 4 + 1] * in[1] + g.m[r * 4 + 2] * in[2] + g.m[r * 4 + 3] * in[3];
    }
  }
}

void apply_2q(StateVector& state, const Mat4& gate, QubitIndex q1, QubitIndex q2, MatvecCounter& counter) {
  apply_2q(state, gate, q1, q2);
  ++counter.count;
}

double probability_one(const StateVector& state, QubitIndex qubit) {
  check_qubit(state, qubit);
  const std::size_t mask = std::size_t{1} << qubit;
  double p = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if ((i & mask) != 0) p += std::norm(state[i]);
  }
  return p;
}

int measure_qubit(StateVector& state, QubitIndex qubit, Rng& rng) {
  const double p1 = probability_one(state, qubit);
  const int bit = rng.uniform() < p1 ? 1 : 0;
  const double keep = bit == 1 ? p1 : 1.0 - p1;
  const double scale = 1.0 / std::sqrt(keep);
  const std::size_t mask = std::size_t{1} << qubit;
  auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const bool is_one = (i & mask) != 0;
    amps[i] = (is_one == (bit == 1)) ? amps[i] * scale : Complex{0.0, 0.0};
  }
  return bit;
}

void reset_qubit(StateVector& state, QubitIndex qubit, Rng& rng) {
  if (measure_qubit(state, qubit, rng) == 1) apply_1q(state, pauli_x(), qubit);
}

std::vector<double> distribution(const StateVector& state) {
  std::vector<double> out(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) out[i] = std::norm(state[i]);
  return out;
}

std::vector<double> cumulative_distribution(const StateVector& state) {
  std::vector<double> out(state.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    acc += std::norm(state[i]);
    out[i] = acc;
  }
  return out;
}

std::uint64_t sample_index(std::span<const double> cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto idx = static_cast<std::uint64_t>(it - cumulative.begin());
  return std::min<std::uint64_t>(idx, cumulative.size() - 1);
}

}  // namespace nisqsim
