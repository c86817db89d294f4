#include "attnlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace attnlab {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream_a,
                       std::uint64_t stream_b) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (stream_a + kGolden));
  k = splitmix64(k ^ (stream_b + kGolden));
  key_ = k;
}

std::uint64_t CounterRng::word(std::uint64_t counter) const {
  return splitmix64(key_ + counter * kGolden);
}

double CounterRng::uniform01(std::uint64_t counter) const {
  // Top 53 bits -> [0, 1), flipped to (0, 1].
  const double u = static_cast<double>(word(counter) >> 11) * 0x1.0p-53;
  return 1.0 - u;
}

double CounterRng::gaussian(std::uint64_t counter) const {
  const double u1 = uniform01(2 * counter);
  const double u2 = uniform01(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t counter,
                                std::uint64_t bound) const {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(word(counter)) * bound;
  return static_cast<std::uint64_t>(prod >> 64);
}

}  // namespace attnlab
