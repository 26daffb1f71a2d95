#include <gtest/gtest.h>

#include <numbers>

#include "nisqsim/qasm.hpp"
#include "support.hpp"

namespace nisqsim {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Qasm, ParsesBellPreparation) {
  const Program p = parse_program(R"(OPENQASM 2.0;
include "qelib1.inc";
qreg q[2];
creg c[2];
h q[0];
CX q[0],q[1];
measure q[0] -> c[0];
measure q[1] -> c[1];
)");
  EXPECT_EQ(p.qubit_count, 2u);
  EXPECT_EQ(p.cbit_count, 2u);
  const std::vector<Instruction> expected = {UGate{kPi / 2, 0, kPi, 0}, CXGate{0, 1}, Measure{0, 0}, Measure{1, 1}};
  EXPECT_EQ(p.instructions, expected);
}

TEST(Qasm, FlattensSeveralRegisters) {
  const Program p = parse_program("qreg a[2]; qreg b[3]; creg x[1]; creg y[2]; CX a[1],b[0]; measure b[2] -> y[1];");
  EXPECT_EQ(p.qubit_count, 5u);
  EXPECT_EQ(p.cbit_count, 3u);
  const std::vector<Instruction> expected = {CXGate{1, 2}, Measure{4, 2}};
  EXPECT_EQ(p.instructions, expected);
}

TEST(Qasm, LowersNamedGates) {
  const Program p = parse_program("qreg q[1]; u2(0,pi) q[0]; u1(pi/4) q[0]; x q[0]; sdg q[0]; id q[0]; u3(1,2,3) q[0];");
  const std::vector<Instruction> expected = {
      UGate{kPi / 2, 0, kPi, 0}, UGate{0, 0, kPi / 4, 0}, UGate{kPi, 0, kPi, 0},
      UGate{0, 0, -kPi / 2, 0},  UGate{0, 0, 0, 0},       UGate{1, 2, 3, 0},
  };
  EXPECT_EQ(p.instructions, expected);
}

TEST(Qasm, EvaluatesAngleArithmetic) {
  EXPECT_DOUBLE_EQ(evaluate_angle("3*pi/4"), 3 * kPi / 4);
  EXPECT_DOUBLE_EQ(evaluate_angle("-pi/2"), -kPi / 2);
  EXPECT_DOUBLE_EQ(evaluate_angle("2*(pi-1)"), 2 * (kPi - 1));
  EXPECT_DOUBLE_EQ(evaluate_angle("1.5e-1"), 0.15);
  EXPECT_THROW(evaluate_angle("pi/0"), QasmError);
  EXPECT_THROW(evaluate_angle("pi pi"), QasmError);
}

TEST(Qasm, ParsesControlFlow) {
  const Program p = parse_program("qreg q[2]; creg c[2]; creg f[1]; reset q[1]; wait 60; if (c[1]==1) x q[0]; "
                                  "if (f==0) CX q[0],q[1];");
  const std::vector<Instruction> expected = {
      Reset{1},
      Wait{60},
      IfBit{1, 1, UGate{kPi, 0, kPi, 0}},
      IfBit{2, 0, CXGate{0, 1}},
  };
  EXPECT_EQ(p.instructions, expected);
}

void expect_error_at(const std::string& source, std::size_t line, std::size_t column) {
  try {
    parse_program(source);
    FAIL() << "no error for: " << source;
  } catch (const QasmError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_EQ(e.column(), column) << e.what();
  }
}

TEST(Qasm, ReportsErrorLocations) {
  expect_error_at("qreg q[1];\nfoo q[0];", 2, 1);
  expect_error_at("qreg q[2];\nx q[2];", 2, 5);
  expect_error_at("qreg q[2];\n  CX q[1],q[1];", 2, 6);
  expect_error_at("qreg q[1]; creg c[1];\nif (c==1) if (c==1) x q[0];", 2, 11);
  expect_error_at("qreg q[1]; creg c[2];\nif (c==1) x q[0];", 2, 5);
  expect_error_at("qreg q[1];\nx q[0]", 2, 7);
  expect_error_at("qreg q[1];\nu2(1) q[0];", 2, 1);
  expect_error_at("qreg q[1]; creg c[1];\nif (c[0]==2) x q[0];", 2, 11);
  expect_error_at("qreg q[1];\nmeasure q[0] -> d[0];", 2, 17);
}

TEST(Qasm, PrintedFormReparsesExactly) {
  for (const auto& name : testing::all_fixtures()) {
    const Program p = load_program(testing::benchmark(name));
    EXPECT_EQ(p.source_name, name);
    const Program again = parse_program(print_program(p));
    EXPECT_TRUE(again.same_code(p)) << name;
  }
}

TEST(Qasm, MissingFileThrows) { EXPECT_THROW(load_program("/nonexistent/x.qasm"), std::runtime_error); }

}  // namespace
}  // namespace nisqsim
