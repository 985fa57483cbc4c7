#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace matube {

// splitmix64; used only to derive deterministic offsets from integer seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Low-discrepancy sampler: the additive-recurrence R_d sequence (component
// increments are powers of the generalized golden ratio), shifted by a
// seed-derived offset. Fully deterministic; no OS randomness anywhere.
class QuasiRandom {
 public:
  QuasiRandom(int dim, std::uint64_t seed) : alpha_(dim), offset_(dim), index_(0) {
    // phi_d solves x^(d+1) = x + 1.
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
    double inv = 1.0 / phi;
    double a = inv;
    std::uint64_t st = seed;
    for (int j = 0; j < dim; ++j) {
      alpha_[j] = a;
      a *= inv;
      offset_[j] = static_cast<double>(splitmix64(st) >> 11) * 0x1.0p-53;
    }
  }

  // Next point in [0,1)^dim.
  std::vector<double> next() {
    ++index_;
    std::vector<double> p(alpha_.size());
    for (std::size_t j = 0; j < alpha_.size(); ++j) {
      double v = offset_[j] + static_cast<double>(index_) * alpha_[j];
      p[j] = v - std::floor(v);
    }
    return p;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> offset_;
  std::uint64_t index_;
};

}  // namespace matube
