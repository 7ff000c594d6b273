#include "biasforge/rng.hpp"

#include <cmath>
#include <numbers>

namespace biasforge {

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1]: log stays finite.
  double u1 = 1.0 - uniform_real();
  double u2 = uniform_real();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(idx);
  if (k < n) idx.resize(k);
  return idx;
}

namespace {

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ull ^ base;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return splitmix_finalize(h);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix_finalize(base ^ splitmix_finalize(salt));
}

}  // namespace biasforge
