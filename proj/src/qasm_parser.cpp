#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "nisqsim/qasm.hpp"

namespace nisqsim {

QasmError::QasmError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(fmt::format("{}:{}: {}", line, column, message)),
      line_(line),
      column_(column) {}

namespace {

enum class TokenKind { kIdent, kNumber, kString, kSymbol, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      tok.kind = TokenKind::kIdent;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
                                                               std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      tok.kind = TokenKind::kNumber;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw QasmError("unterminated string literal", line, col);
      tok.kind = TokenKind::kString;
      tok.text = std::string(src.substr(i + 1, j - i - 1));
      advance(j - i + 1);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      tok.kind = TokenKind::kSymbol;
      tok.text = "->";
      advance(2);
    } else if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
      tok.kind = TokenKind::kSymbol;
      tok.text = "==";
      advance(2);
    } else if (std::string_view("()[],;+-*/").find(c) != std::string_view::npos) {
      tok.kind = TokenKind::kSymbol;
      tok.text = std::string(1, c);
      advance(1);
    } else {
      throw QasmError(fmt::format("unexpected character '{}'", c), line, col);
    }
    tokens.push_back(std::move(tok));
  }
  Token end;
  end.line = line;
  end.column = col;
  tokens.push_back(end);
  return tokens;
}

struct Register {
  std::size_t offset = 0;
  std::size_t size = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Program parse_program() {
    Program program;
    while (peek().kind != TokenKind::kEnd) statement(program);
    program.qubit_count = qubit_total_;
    program.cbit_count = cbit_total_;
    return program;
  }

  double parse_lone_expression() {
    const double v = expression();
    if (peek().kind != TokenKind::kEnd) fail("trailing input in expression");
    return v;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] void fail(const std::string& message) const { fail_at(peek(), message); }
  [[noreturn]] static void fail_at(const Token& tok, const std::string& message) {
    throw QasmError(message, tok.line, tok.column);
  }

  bool accept(std::string_view symbol) {
    if (peek().kind == TokenKind::kSymbol && peek().text == symbol) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view symbol) {
    if (!accept(symbol)) {
      fail(fmt::format("expected '{}' but found '{}'", symbol, describe(peek())));
    }
  }

  static std::string describe(const Token& tok) { return tok.kind == TokenKind::kEnd ? "end of input" : tok.text; }

  std::string identifier() {
    if (peek().kind != TokenKind::kIdent) fail(fmt::format("expected identifier but found '{}'", describe(peek())));
    return take().text;
  }

  std::uint64_t integer() {
    const Token& tok = peek();
    if (tok.kind != TokenKind::kNumber || tok.text.find_first_of(".eE") != std::string::npos) {
      fail(fmt::format("expected non-negative integer but found '{}'", describe(tok)));
    }
    ++pos_;
    try {
      return std::stoull(tok.text);
    } catch (const std::exception&) {
      fail_at(tok, "integer literal out of range");
    }
  }

  void statement(Program& program) {
    const Token& head = peek();
    if (head.kind != TokenKind::kIdent) fail(fmt::format("expected statement but found '{}'", describe(head)));
    const std::string& word = head.text;
    if (word == "OPENQASM") {
      ++pos_;
      if (peek().kind != TokenKind::kNumber) fail("expected version number");
      ++pos_;
      expect(";");
      return;
    }
    if (word == "include") {
      ++pos_;
      if (peek().kind != TokenKind::kString) fail("expected file name string");
      ++pos_;
      expect(";");
      return;
    }
    if (word == "qreg" || word == "creg") {
      ++pos_;
      declaration(word == "qreg");
      return;
    }
    program.instructions.push_back(operation(true));
  }

  void declaration(bool quantum) {
    const Token& name_tok = peek();
    const std::string name = identifier();
    expect("[");
    const std::uint64_t size = integer();
    expect("]");
    expect(";");
    if (size == 0) fail_at(name_tok, "register size must be positive");
    if (qregs_.count(name) != 0 || cregs_.count(name) != 0) {
      fail_at(name_tok, fmt::format("register '{}' redeclared", name));
    }
    if (quantum) {
      qregs_[name] = Register{qubit_total_, size};
      qubit_total_ += size;
    } else {
      cregs_[name] = Register{cbit_total_, size};
      cbit_total_ += size;
    }
  }

  std::uint32_t indexed(const std::map<std::string, Register>& regs, const char* what) {
    const Token& name_tok = peek();
    const std::string name = identifier();
    const auto it = regs.find(name);
    if (it == regs.end()) fail_at(name_tok, fmt::format("unknown {} register '{}'", what, name));
    if (!accept("[")) fail(fmt::format("expected '[' after register '{}'", name));
    const Token& idx_tok = peek();
    const std::uint64_t idx = integer();
    expect("]");
    if (idx >= it->second.size) {
      fail_at(idx_tok, fmt::format("index {} out of range for register '{}' of size {}", idx, name, it->second.size));
    }
    return static_cast<std::uint32_t>(it->second.offset + idx);
  }

  std::vector<double> parameters() {
    std::vector<double> out;
    if (!accept("(")) return out;
    if (accept(")")) return out;
    do {
      out.push_back(expression());
    } while (accept(","));
    expect(")");
    return out;
  }

  Instruction operation(bool allow_if) {
    const Token& head = peek();
    const std::string word = identifier();
    if (word == "if") {
      if (!allow_if) fail_at(head, "nested conditional is not supported");
      return conditional(head);
    }
    if (word == "wait") {
      const std::uint64_t cycles = integer();
      expect(";");
      return Wait{cycles};
    }
    if (word == "measure") {
      const QubitIndex q = indexed(qregs_, "quantum");
      expect("->");
      const CbitIndex c = indexed(cregs_, "classical");
      expect(";");
      return Measure{q, c};
    }
    if (word == "reset") {
      const QubitIndex q = indexed(qregs_, "quantum");
      expect(";");
      return Reset{q};
    }
    if (word == "CX" || word == "cx") {
      const Token& ctl_tok = peek();
      const QubitIndex control = indexed(qregs_, "quantum");
      expect(",");
      const QubitIndex target = indexed(qregs_, "quantum");
      expect(";");
      if (control == target) fail_at(ctl_tok, "CX control equals target");
      return CXGate{control, target};
    }
    const auto params = parameters();
    UGate gate = single_qubit_gate(head, word, params);
    gate.qubit = indexed(qregs_, "quantum");
    expect(";");
    return gate;
  }

  Instruction conditional(const Token& head) {
    expect("(");
    const Token& reg_tok = peek();
    const std::string name = identifier();
    const auto it = cregs_.find(name);
    if (it == cregs_.end()) fail_at(reg_tok, fmt::format("unknown classical register '{}'", name));
    CbitIndex cbit = 0;
    if (accept("[")) {
      const Token& idx_tok = peek();
      const std::uint64_t idx = integer();
      expect("]");
      if (idx >= it->second.size) {
        fail_at(idx_tok, fmt::format("index {} out of range for register '{}' of size {}", idx, name, it->second.size));
      }
      cbit = static_cast<CbitIndex>(it->second.offset + idx);
    } else {
      if (it->second.size != 1) {
        fail_at(reg_tok, fmt::format("conditional must test a single bit; register '{}' has {} bits", name,
                                     it->second.size));
      }
      cbit = static_cast<CbitIndex>(it->second.offset);
    }
    expect("==");
    const Token& val_tok = peek();
    const std::uint64_t value = integer();
    if (value > 1) fail_at(val_tok, "conditional value must be 0 or 1");
    expect(")");
    if (peek().kind == TokenKind::kIdent && peek().text == "if") fail("nested conditional is not supported");
    const Instruction inner = operation(false);
    GuardedOp guarded = std::visit(
        [&](const auto& op) -> GuardedOp {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, IfBit>) {
            fail_at(head, "nested conditional is not supported");
          } else {
            return op;
          }
        },
        inner);
    return IfBit{cbit, static_cast<int>(value), guarded};
  }

  static UGate single_qubit_gate(const Token& head, const std::string& name, const std::vector<double>& p) {
    constexpr double pi = std::numbers::pi;
    auto arity = [&](std::size_t n) {
      if (p.size() != n) {
        fail_at(head, fmt::format("gate '{}' takes {} parameter(s), got {}", name, n, p.size()));
      }
    };
    if (name == "U" || name == "u" || name == "u3") {
      arity(3);
      return UGate{p[0], p[1], p[2], 0};
    }
    if (name == "u2") {
      arity(2);
      return UGate{pi / 2, p[0], p[1], 0};
    }
    if (name == "u1") {
      arity(1);
      return UGate{0, 0, p[0], 0};
    }
    static const std::map<std::string, UGate, std::less<>> fixed = {
        {"x", {pi, 0, pi, 0}},          {"y", {pi, pi / 2, pi / 2, 0}}, {"z", {0, 0, pi, 0}},
        {"h", {pi / 2, 0, pi, 0}},      {"s", {0, 0, pi / 2, 0}},       {"sdg", {0, 0, -pi / 2, 0}},
        {"t", {0, 0, pi / 4, 0}},       {"tdg", {0, 0, -pi / 4, 0}},    {"id", {0, 0, 0, 0}},
    };
    const auto it = fixed.find(name);
    if (it == fixed.end()) fail_at(head, fmt::format("unknown gate '{}'", name));
    arity(0);
    return it->second;
  }

  // expression := term (('+'|'-') term)*
  double expression() {
    double v = term();
    while (true) {
      if (accept("+")) {
        v += term();
      } else if (accept("-")) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = unary();
    while (true) {
      if (accept("*")) {
        v *= unary();
      } else if (accept("/")) {
        const Token& tok = peek();
        const double d = unary();
        if (d == 0.0) fail_at(tok, "division by zero in expression");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double unary() {
    if (accept("-")) return -unary();
    if (accept("+")) return unary();
    return primary();
  }

  double primary() {
    const Token& tok = peek();
    if (accept("(")) {
      const double v = expression();
      expect(")");
      return v;
    }
    if (tok.kind == TokenKind::kNumber) {
      ++pos_;
      try {
        return std::stod(tok.text);
      } catch (const std::exception&) {
        fail_at(tok, fmt::format("malformed number '{}'", tok.text));
      }
    }
    if (tok.kind == TokenKind::kIdent && tok.text == "pi") {
      ++pos_;
      return std::numbers::pi;
    }
    fail(fmt::format("expected expression but found '{}'", describe(tok)));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::map<std::string, Register> qregs_;
  std::map<std::string, Register> cregs_;
  std::size_t qubit_total_ = 0;
  std::size_t cbit_total_ = 0;
};

}  // namespace

Program parse_program(std::string_view source, std::string source_name) {
  Parser parser(tokenize(source));
  Program program = parser.parse_program();
  program.source_name = std::move(source_name);
  for (const auto& instr : program.instructions) {
    if (const auto* u = std::get_if<UGate>(&instr)) {
      if (!std::isfinite(u->theta) || !std::isfinite(u->phi) || !std::isfinite(u->lambda)) {
        throw ProgramError("non-finite U angle");
      }
    }
  }
  return program;
}

Program load_program(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open program file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str(), path.stem().string());
}

double evaluate_angle(std::string_view expression) {
  return Parser(tokenize(expression)).parse_lone_expression();
}

namespace {

std::string format_op(const Instruction& instr) {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, UGate>) {
          return fmt::format("U({:.17g},{:.17g},{:.17g}) q[{}];", op.theta, op.phi, op.lambda, op.qubit);
        } else if constexpr (std::is_same_v<T, CXGate>) {
          return fmt::format("CX q[{}],q[{}];", op.control, op.target);
        } else if constexpr (std::is_same_v<T, Measure>) {
          return fmt::format("measure q[{}] -> c[{}];", op.qubit, op.cbit);
        } else if constexpr (std::is_same_v<T, Reset>) {
          return fmt::format("reset q[{}];", op.qubit);
        } else if constexpr (std::is_same_v<T, Wait>) {
          return fmt::format("wait {};", op.cycles);
        } else {
          return fmt::format("if (c[{}]=={}) {}", op.cbit, op.value, format_op(to_instruction(op.inner)));
        }
      },
      instr);
}

}  // namespace

std::string print_program(const Program& program) {
  std::string out = "OPENQASM 2.0;\n";
  if (program.qubit_count > 0) out += fmt::format("qreg q[{}];\n", program.qubit_count);
  if (program.cbit_count > 0) out += fmt::format("creg c[{}];\n", program.cbit_count);
  for (const auto& instr : program.instructions) {
    out += format_op(instr);
    out += '\n';
  }
  return out;
}

}  // namespace nisqsim
