#include "mbrl/rng.hpp"

namespace mbrl {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
    : state_(mix64(mix64(mix64(seed + kGolden) ^ (stream + 0x632be59bd9b4e019ULL)) ^
                   (substream + 0x8cb92ba72f3d8dd7ULL))) {}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

}  // namespace mbrl
