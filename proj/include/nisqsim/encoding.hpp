#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nisqsim/program.hpp"

namespace nisqsim {

/// One 32-bit word per instruction. Word layout:
///
///   [31:28] opcode  1=U 2=CX 3=Measure 4=Reset 5=If 6=Wait
///   U        [27:20] qubit    [19:0]  param-table index
///   CX       [27:20] control  [19:12] target
///   Measure  [27:20] qubit    [19:8]  cbit
///   Reset    [27:20] qubit
///   Wait     [27:0]  cycles
///   If       [27] value  [26:20] cbit  [19:17] inner opcode  [16:0] inner payload
///
/// Inner payloads of a conditional are narrower:
///   U        [16:11] qubit    [10:0] param index
///   CX       [16:11] control  [10:5] target
///   Measure  [16:11] qubit    [10:0] cbit
///   Reset    [16:11] qubit
///   Wait     [16:0]  cycles
struct EncodedProgram {
  std::size_t qubit_count = 0;
  std::size_t cbit_count = 0;
  std::vector<std::uint32_t> words;
  std::vector<std::array<double, 3>> param_table;
  bool operator==(const EncodedProgram&) const = default;
};

namespace opcode {
inline constexpr std::uint32_t kU = 1;
inline constexpr std::uint32_t kCX = 2;
inline constexpr std::uint32_t kMeasure = 3;
inline constexpr std::uint32_t kReset = 4;
inline constexpr std::uint32_t kIf = 5;
inline constexpr std::uint32_t kWait = 6;
}  // namespace opcode

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws EncodingError when an operand does not fit its field.
EncodedProgram encode_program(const Program& program);
Program decode_program(const EncodedProgram& encoded);

/// Binary program file: 16-byte little-endian header
///   [0:4) "SANQ"  [4:6) version u16  [6] qubit count u8  [7] cbit count u8
///   [8:12) word count u32  [12:16) param-table length u32
/// followed by the words (u32 LE) and the parameter triples (3 x f64 LE).
inline constexpr std::uint16_t kBinaryVersion = 1;

std::vector<std::uint8_t> to_binary(const EncodedProgram& encoded);
EncodedProgram from_binary(std::span<const std::uint8_t> bytes);

void write_binary_file(const std::filesystem::path& path, const EncodedProgram& encoded);
EncodedProgram read_binary_file(const std::filesystem::path& path);

}  // namespace nisqsim
