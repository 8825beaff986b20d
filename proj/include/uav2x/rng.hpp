#pragma once

#include <cstdint>
#include <random>

namespace uav2x {

// Seeded generator with an explicit uniform mapping so that streams are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [lo, hi) with 53-bit resolution.
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace uav2x
