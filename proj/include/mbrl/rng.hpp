#pragma once

#include <cstdint>

namespace mbrl {

/// Counter-based stream: SplitMix64 whose starting state is derived from
/// (seed, stream, substream). Streams with different keys are independent of
/// each other and of generation order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

  std::uint64_t next_u64();
  /// Uniform double in [0,1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace mbrl
