#pragma once

#include <cstdint>

namespace attnlab {

// Counter-based generator built on the SplitMix64 finalizer. A stream is
// keyed by (seed, stream ids); the i-th output is a pure function of the key
// and the counter i, so evaluation order never affects results and streams
// split per (seed, head, tensor) are independent by construction.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_a,
             std::uint64_t stream_b = 0);

  std::uint64_t word(std::uint64_t counter) const;

  // Uniform in (0, 1]; never returns 0 so log() is safe.
  double uniform01(std::uint64_t counter) const;

  // Standard normal via Box-Muller; draw i consumes words 2i and 2i+1.
  double gaussian(std::uint64_t counter) const;

  // Uniform integer in [0, bound) by 128-bit multiply; bound must be > 0.
  std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace attnlab
