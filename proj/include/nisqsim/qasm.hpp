#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nisqsim/program.hpp"

namespace nisqsim {

/// Syntax or semantic error in QASM source, with a 1-based source location.
class QasmError : public std::runtime_error {
 public:
  QasmError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses the post-compilation OpenQASM 2.0 subset:
///
///   OPENQASM 2.0;  include "qelib1.inc";      (accepted, ignored)
///   qreg q[n];  creg c[m];                    (several allowed, flattened in order)
///   U(theta,phi,lambda) q[i];  u3/u2/u1/x/y/z/h/s/sdg/t/tdg/id q[i];
///   CX q[i],q[j];
///   measure q[i] -> c[j];
///   reset q[i];
///   if (c[j]==v) <statement>;   if (c==v) ... for one-bit registers
///   wait n;
///
/// Named single-qubit gates are lowered to U. Angle arguments accept `pi`
/// arithmetic.
Program parse_program(std::string_view source, std::string source_name = {});

Program load_program(const std::filesystem::path& path);

/// Canonical text form: one `qreg q`, one `creg c`, every gate as U/CX.
/// parse_program(print_program(p)) reproduces p exactly.
std::string print_program(const Program& program);

/// Evaluates an angle expression such as "3*pi/4" or "-pi/2".
double evaluate_angle(std::string_view expression);

}  // namespace nisqsim
