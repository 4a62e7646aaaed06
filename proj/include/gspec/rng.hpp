#pragma once

#include <cmath>
#include <cstdint>

namespace gspec {

// Counter-based pseudo-random streams.
//
// Every stream is an independent splitmix64 sequence whose starting state is a
// hash of (seed, domain, index). Parallel and serial execution therefore draw
// identical numbers for the same logical stream: replication r of a Monte Carlo
// run always uses stream (seed, domain, r) no matter which thread executes it.
//
// The algorithm is fixed by this header (not delegated to std:: distributions,
// which are implementation-defined): splitmix64 for bits, a 53-bit mantissa map
// for uniforms, Box-Muller for normals. Golden values are pinned in tests.

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
} // namespace detail

// Stream namespaces; keeps draws for different purposes non-overlapping.
enum class RngDomain : std::uint64_t {
  Simulate = 1,    // DGP innovations
  Multiplier = 2,  // split-scheme bootstrap multipliers
  Fdwb = 3,        // full-sample FDWB multipliers (index also encodes retries)
  Init = 4,        // initial values (e.g. uniform map starting points)
  Generic = 5,
};

class RngStream {
public:
  RngStream(std::uint64_t seed, RngDomain domain, std::uint64_t index)
      : state_(detail::mix64(detail::mix64(seed ^ 0x5851f42d4c957f2dull) ^
                             detail::mix64(static_cast<std::uint64_t>(domain) *
                                           0xd6e8feb86659fd93ull) ^
                             detail::mix64(index * 0xa0761d6478bd642full))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform on (0, 1]; never 0, so log() is safe
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; the sine partner is cached
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Deterministic per-replication sub-seed (used when a replication needs its
// own seed value rather than a stream, e.g. bootstrap seeds inside run_mc).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt,
                                 std::uint64_t index) {
  return detail::mix64(seed ^ detail::mix64(salt ^ detail::mix64(index)));
}

} // namespace gspec
