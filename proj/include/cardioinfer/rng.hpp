#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace cardioinfer {

/// Deterministic random source. All stochastic code in the library draws
/// through this class so that a (seed, draw-order) pair pins every result
/// bit-exactly; the standard-library distributions are avoided because
/// their streams are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second value of each pair is
  /// cached, so the stream state includes the cache.
  double gaussian() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(uniform() * n) % n; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[below(i + 1)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_cache_ = false;
  double cache_ = 0.0;
};

/// Mixes a base seed with a tag and an index into an independent stream
/// seed (splitmix64 finalizer). Keeps nested loops (BO iteration -> MC
/// draw) on non-overlapping streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1) +
                    0xbf58476d1ce4e5b9ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace cardioinfer
