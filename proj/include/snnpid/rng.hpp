#pragma once

#include <cstdint>

namespace snnpid {

// Counter-based uniform stream. Each draw is a pure function of (seed,
// position), so a stream can be replayed from any point and forked without
// touching its siblings.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t position = 0;

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, 1).
  double next() {
    const std::uint64_t bits = mix(seed ^ mix(position++));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
};

// Independent substream for (seed, stream_id). Adding streams with new ids
// never reshuffles the draws of existing ones.
inline RngStream substream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream{RngStream::mix(seed + 0x632be59bd9b4e019ULL * (stream_id + 1)), 0};
}

}  // namespace snnpid
