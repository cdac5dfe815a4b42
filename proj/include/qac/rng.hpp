#ifndef QAC_RNG_HPP
#define QAC_RNG_HPP

#include <cstdint>

namespace qac {

/// splitmix64 finalizer; used both as the stream generator and as the hash
/// that derives independent substreams from (seed, tag_a, tag_b).
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// A small deterministic random stream (splitmix64 sequence).
/// One stream per (seed, node, round) keeps trajectories comparable across
/// variants and makes parallel sweeps order-independent.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform in [0, n), n >= 1.  Rejection sampling for exact uniformity,
  /// independent of platform library implementations.
  std::uint64_t uniform(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return r % n;
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_in(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<std::int64_t>(
                    uniform(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent substream from a root seed and two tags
/// (typically node id and round index).
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t tag_a,
                               std::uint64_t tag_b) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (tag_a + 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (tag_b + 0x8cb92ba72f3d8dd7ULL));
  return RngStream(h);
}

}  // namespace qac

#endif  // QAC_RNG_HPP
