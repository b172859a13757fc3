#pragma once

#include <cstdint>
#include <random>

namespace udnn {

// Derives an independent stream seed from a base seed (splitmix64 mixing).
// Used to give every sample / trial / epoch its own generator so work can be
// distributed without coordinating RNG state.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic generator. The engine is std::mt19937_64 (bit-exact by the
// standard); the distributions are hand-rolled so output does not depend on
// the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform on {0, ..., n-1}.
  int uniform_int(int n);

  // Standard normal via Box-Muller; the paired deviate is cached.
  double gaussian();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace udnn
