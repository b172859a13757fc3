#include "udnn/rng.hpp"

#include <cmath>

#include "udnn/errors.hpp"

namespace udnn {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer applied to the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw DomainError("uniform_int: n must be positive");
  // 64-bit modulo bias is < n / 2^64, irrelevant for the n used here.
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] avoids log(0)
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace udnn
