#ifndef BIASFORGE_RNG_HPP
#define BIASFORGE_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace biasforge {

// Deterministic RNG used throughout the pipeline. mt19937_64 raw output is
// fully specified by the standard; the distribution code below is written
// out explicitly so streams are identical across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n == 0 or 1 returns 0 without consuming
  // randomness.
  std::uint64_t uniform_u64(std::uint64_t n) {
    if (n <= 1) return 0;
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Uniform double in [0, 1), 53 bits of randomness.
  double uniform_real() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second value.
  double gaussian();

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_u64(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), in random order. k > n returns all n.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable seed derivation for per-example / per-epoch streams:
// seed = mix(base, tag). FNV-1a over the tag bytes followed by a splitmix64
// finalizer.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace biasforge

#endif  // BIASFORGE_RNG_HPP
