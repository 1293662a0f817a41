#ifndef OLAC_RNG_HPP
#define OLAC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace olac {

/// Seed expander (Steele, Lea, Flood). Used to derive independent
/// mt19937_64 streams from one user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream `index` of `seed`: mt19937_64 seeded with the (index+1)-th
/// splitmix64 output. Stream 0 drives state sampling in simulations.
inline std::mt19937_64 make_stream(std::uint64_t seed, unsigned index) {
  std::uint64_t state = seed;
  std::uint64_t value = 0;
  for (unsigned i = 0; i <= index; ++i) value = splitmix64(state);
  return std::mt19937_64(value);
}

/// Uniform on [0, 1) from the top 53 bits. Unlike std::uniform_real_distribution
/// this is identical across standard library implementations.
inline double uniform01(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Box-Muller; consumes two draws per call.
inline double standard_normal(std::mt19937_64& engine) {
  double u1 = uniform01(engine);
  while (u1 <= 0.0) u1 = uniform01(engine);
  const double u2 = uniform01(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline constexpr const char* kRngDescription =
    "mt19937_64 streams seeded by splitmix64(seed); uniform = (x>>11)*2^-53; "
    "state sampling by inverse CDF over declaration order";

}  // namespace olac

#endif  // OLAC_RNG_HPP
