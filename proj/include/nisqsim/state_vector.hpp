#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "nisqsim/program.hpp"
#include "nisqsim/rng.hpp"

namespace nisqsim {

using Complex = std::complex<double>;

/// Row-major 2x2 matrix.
struct Mat2 {
  std::array<Complex, 4> m{};
  Complex operator()(std::size_t r, std::size_t c) const { return m[r * 2 + c]; }
  bool operator==(const Mat2&) const = default;
};

/// Row-major 4x4 matrix over the local basis |b2 b1> with index b1 + 2*b2,
/// where b1 is the bit of the first qubit argument of apply_2q.
struct Mat4 {
  std::array<Complex, 16> m{};
  Complex operator()(std::size_t r, std::size_t c) const { return m[r * 4 + c]; }
};

Mat2 identity2();
Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
Mat2 adjoint(const Mat2& g);
Mat4 adjoint(const Mat4& g);
Mat2 multiply(const Mat2& a, const Mat2& b);

/// OpenQASM U(theta, phi, lambda). Throws std::invalid_argument on non-finite input.
Mat2 u_matrix(double theta, double phi, double lambda);
inline Mat2 u_matrix(const UGate& u) { return u_matrix(u.theta, u.phi, u.lambda); }

/// CNOT with the first apply_2q argument as control.
Mat4 cx_matrix();

bool is_unitary(const Mat2& g, double tol = 1e-9);
bool is_unitary(const Mat4& g, double tol = 1e-9);

/// Counts matrix-vector multiplications, the unit of simulation work.
struct MatvecCounter {
  std::uint64_t count = 0;
};

/// Full 2^n amplitude vector. Basis index bit k is the value of qubit k
/// (qubit 0 is the least-significant bit).
class StateVector {
 public:
  static constexpr std::size_t kMaxQubits = 28;

  explicit StateVector(std::size_t qubit_count, std::uint64_t basis_state = 0);
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  std::size_t qubit_count() const { return qubits_; }
  std::size_t size() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> amplitudes() { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;

  bool operator==(const StateVector&) const = default;

 private:
  StateVector() = default;
  std::size_t qubits_ = 0;
  std::vector<Complex> amps_;
};

void apply_1q(StateVector& state, const Mat2& gate, QubitIndex qubit);
void apply_1q(StateVector& state, const Mat2& gate, QubitIndex qubit, MatvecCounter& counter);
void apply_2q(StateVector& state, const Mat4& gate, QubitIndex q1, QubitIndex q2);
void apply_2q(StateVector& state, const Mat4& gate, QubitIndex q1, QubitIndex q2, MatvecCounter& counter);

/// Probability that measuring `qubit` yields 1.
double probability_one(const StateVector& state, QubitIndex qubit);

/// Projective measurement: draws the outcome from `rng`, collapses and
/// renormalizes the state, and returns the bit.
int measure_qubit(StateVector& state, QubitIndex qubit, Rng& rng);

/// Measures `qubit` and flips it back to |0> when the outcome is 1.
void reset_qubit(StateVector& state, QubitIndex qubit, Rng& rng);

/// |amplitude_i|^2 for every basis index.
std::vector<double> distribution(const StateVector& state);

/// Draws a basis index from a cumulative distribution with one uniform draw.
std::uint64_t sample_index(std::span<const double> cumulative, Rng& rng);
std::vector<double> cumulative_distribution(const StateVector& state);

}  // namespace nisqsim
