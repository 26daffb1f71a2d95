#pragma once

#include <cstdint>

namespace nisqsim {

/// Counter-based random stream. A stream is fully determined by
/// (seed, stream id, domain), so trial i draws the same numbers no matter
/// which order trials are generated or executed in.
class Rng {
 public:
  enum class Domain : std::uint64_t {
    kTrace = 0x7472616365ULL,
    kMeasure = 0x6d656173ULL,
    kCosim = 0x636f73ULL,
    kOutcome = 0x6f7574ULL,
  };

  explicit Rng(std::uint64_t state) : state_(state) {}

  static Rng stream(std::uint64_t seed, std::uint64_t stream_id, Domain domain) {
    std::uint64_t s = mix(seed ^ 0x9e3779b97f4a7c15ULL);
    s = mix(s ^ (stream_id * 0xd1b54a32d192ed03ULL));
    s = mix(s ^ static_cast<std::uint64_t>(domain));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace nisqsim
