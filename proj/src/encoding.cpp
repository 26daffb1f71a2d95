#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "nisqsim/encoding.hpp"

namespace nisqsim {

namespace {

struct Field {
  unsigned shift;
  unsigned width;
};

// Top-level fields.
constexpr Field kOpcode{28, 4};
constexpr Field kQubitA{20, 8};
constexpr Field kParam{0, 20};
constexpr Field kQubitB{12, 8};
constexpr Field kCbit{8, 12};
constexpr Field kCycles{0, 28};
constexpr Field kIfValue{27, 1};
constexpr Field kIfCbit{20, 7};
constexpr Field kInnerOpcode{17, 3};
// Fields inside a conditional's 17-bit payload.
constexpr Field kInnerQubitA{11, 6};
constexpr Field kInnerParam{0, 11};
constexpr Field kInnerQubitB{5, 6};
constexpr Field kInnerCbit{0, 11};
constexpr Field kInnerCycles{0, 17};

std::uint32_t pack(Field f, std::uint64_t value, const char* what) {
  if (value >= (std::uint64_t{1} << f.width)) {
    throw EncodingError(fmt::format("{} {} exceeds {}-bit field", what, value, f.width));
  }
  return static_cast<std::uint32_t>(value) << f.shift;
}

std::uint32_t unpack(std::uint32_t word, Field f) { return (word >> f.shift) & ((1U << f.width) - 1U); }

class ParamTable {
 public:
  std::uint32_t index_of(const UGate& u) {
    const Key key{std::bit_cast<std::uint64_t>(u.theta), std::bit_cast<std::uint64_t>(u.phi),
                  std::bit_cast<std::uint64_t>(u.lambda)};
    const auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(table_.size()));
    if (inserted) table_.push_back({u.theta, u.phi, u.lambda});
    return it->second;
  }
  std::vector<std::array<double, 3>> take() { return std::move(table_); }

 private:
  using Key = std::array<std::uint64_t, 3>;
  std::map<Key, std::uint32_t> index_;
  std::vector<std::array<double, 3>> table_;
};

struct Layout {
  Field qubit_a, qubit_b, param, cbit, cycles;
};
constexpr Layout kTopLayout{kQubitA, kQubitB, kParam, kCbit, kCycles};
constexpr Layout kInnerLayout{kInnerQubitA, kInnerQubitB, kInnerParam, kInnerCbit, kInnerCycles};

std::pair<std::uint32_t, std::uint32_t> encode_op(const Instruction& instr, const Layout& l, ParamTable& params) {
  return std::visit(
      [&](const auto& op) -> std::pair<std::uint32_t, std::uint32_t> {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, UGate>) {
          return {opcode::kU, pack(l.qubit_a, op.qubit, "qubit") | pack(l.param, params.index_of(op), "param index")};
        } else if constexpr (std::is_same_v<T, CXGate>) {
          return {opcode::kCX, pack(l.qubit_a, op.control, "qubit") | pack(l.qubit_b, op.target, "qubit")};
        } else if constexpr (std::is_same_v<T, Measure>) {
          return {opcode::kMeasure, pack(l.qubit_a, op.qubit, "qubit") | pack(l.cbit, op.cbit, "cbit")};
        } else if constexpr (std::is_same_v<T, Reset>) {
          return {opcode::kReset, pack(l.qubit_a, op.qubit, "qubit")};
        } else if constexpr (std::is_same_v<T, Wait>) {
          return {opcode::kWait, pack(l.cycles, op.cycles, "wait cycles")};
        } else {
          throw EncodingError("nested conditional cannot be encoded");
        }
      },
      instr);
}

GuardedOp decode_op(std::uint32_t code, std::uint32_t payload, const Layout& l,
                    const std::vector<std::array<double, 3>>& params) {
  switch (code) {
    case opcode::kU: {
      const std::uint32_t idx = unpack(payload, l.param);
      if (idx >= params.size()) throw EncodingError(fmt::format("param index {} out of table range", idx));
      const auto& p = params[idx];
      return UGate{p[0], p[1], p[2], unpack(payload, l.qubit_a)};
    }
    case opcode::kCX:
      return CXGate{unpack(payload, l.qubit_a), unpack(payload, l.qubit_b)};
    case opcode::kMeasure:
      return Measure{unpack(payload, l.qubit_a), unpack(payload, l.cbit)};
    case opcode::kReset:
      return Reset{unpack(payload, l.qubit_a)};
    case opcode::kWait:
      return Wait{unpack(payload, l.cycles)};
    default:
      throw EncodingError(fmt::format("invalid opcode {}", code));
  }
}

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <class T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  return value;
}

}  // namespace

EncodedProgram encode_program(const Program& program) {
  validate_program(program);
  EncodedProgram out;
  out.qubit_count = program.qubit_count;
  out.cbit_count = program.cbit_count;
  ParamTable params;
  out.words.reserve(program.instructions.size());
  for (const auto& instr : program.instructions) {
    if (const auto* cond = std::get_if<IfBit>(&instr)) {
      const auto [inner_code, inner_payload] = encode_op(to_instruction(cond->inner), kInnerLayout, params);
      out.words.push_back(pack(kOpcode, opcode::kIf, "opcode") | pack(kIfValue, cond->value, "value") |
                          pack(kIfCbit, cond->cbit, "conditional cbit") |
                          pack(kInnerOpcode, inner_code, "opcode") | inner_payload);
    } else {
      const auto [code, payload] = encode_op(instr, kTopLayout, params);
      out.words.push_back(pack(kOpcode, code, "opcode") | payload);
    }
  }
  out.param_table = params.take();
  if (out.param_table.size() > (std::size_t{1} << kParam.width)) throw EncodingError("param table overflow");
  return out;
}

Program decode_program(const EncodedProgram& encoded) {
  Program program;
  program.qubit_count = encoded.qubit_count;
  program.cbit_count = encoded.cbit_count;
  program.instructions.reserve(encoded.words.size());
  for (const std::uint32_t word : encoded.words) {
    const std::uint32_t code = unpack(word, kOpcode);
    if (code == opcode::kIf) {
      const std::uint32_t inner_code = unpack(word, kInnerOpcode);
      const GuardedOp inner = decode_op(inner_code, word & ((1U << 17) - 1U), kInnerLayout, encoded.param_table);
      program.instructions.emplace_back(
          IfBit{unpack(word, kIfCbit), static_cast<int>(unpack(word, kIfValue)), inner});
    } else {
      program.instructions.push_back(
          to_instruction(decode_op(code, word & ((1U << 28) - 1U), kTopLayout, encoded.param_table)));
    }
  }
  validate_program(program);
  return program;
}

std::vector<std::uint8_t> to_binary(const EncodedProgram& encoded) {
  if (encoded.qubit_count > 0xff || encoded.cbit_count > 0xff) {
    throw EncodingError("binary header holds at most 255 qubits and 255 cbits");
  }
  std::vector<std::uint8_t> out = {'S', 'A', 'N', 'Q'};
  put_le<std::uint16_t>(out, kBinaryVersion);
  out.push_back(static_cast<std::uint8_t>(encoded.qubit_count));
  out.push_back(static_cast<std::uint8_t>(encoded.cbit_count));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(encoded.words.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(encoded.param_table.size()));
  for (const std::uint32_t w : encoded.words) put_le(out, w);
  for (const auto& triple : encoded.param_table) {
    for (const double v : triple) put_le(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

EncodedProgram from_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "SANQ", 4) != 0) {
    throw EncodingError("not a binary program file (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kBinaryVersion) throw EncodingError(fmt::format("unsupported binary version {}", version));
  EncodedProgram out;
  out.qubit_count = bytes[6];
  out.cbit_count = bytes[7];
  const auto word_count = get_le<std::uint32_t>(bytes, 8);
  const auto param_count = get_le<std::uint32_t>(bytes, 12);
  const std::size_t expected = 16 + std::size_t{word_count} * 4 + std::size_t{param_count} * 24;
  if (bytes.size() != expected) {
    throw EncodingError(fmt::format("binary size {} does not match header (expected {})", bytes.size(), expected));
  }
  std::size_t offset = 16;
  out.words.reserve(word_count);
  for (std::uint32_t i = 0; i < word_count; ++i, offset += 4) out.words.push_back(get_le<std::uint32_t>(bytes, offset));
  out.param_table.reserve(param_count);
  for (std::uint32_t i = 0; i < param_count; ++i) {
    std::array<double, 3> triple{};
    for (double& v : triple) {
      v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
      offset += 8;
    }
    out.param_table.push_back(triple);
  }
  return out;
}

void write_binary_file(const std::filesystem::path& path, const EncodedProgram& encoded) {
  const auto bytes = to_binary(encoded);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

EncodedProgram read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_binary(bytes);
}

}  // namespace nisqsim
