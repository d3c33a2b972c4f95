#ifndef BQ_RNG_HPP
#define BQ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace bq {

// splitmix64 finalizer; also the basis for child-seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based child seed keyed by up to three indices. Used by the harness
// so that trial k's stream does not depend on how many trials run in total.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(root);
  s = mix64(s ^ mix64(a ^ 0x633d5c1fba2c9e35ULL));
  s = mix64(s ^ mix64(b ^ 0x1f123bb5159a55e5ULL));
  s = mix64(s ^ mix64(c ^ 0xd6e8feb86659fd93ULL));
  return s;
}

// Seeded stream with fixed draw layouts. The engine (mt19937_64) is
// standardized; the std:: distributions are not, so uniform and normal
// draws are generated here directly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // index in [0, n)
  int uniform_index(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }

  // standard normal, polar Box-Muller with cached spare
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  double gauss(double mean, double stddev) { return mean + stddev * gauss(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bq

#endif  // BQ_RNG_HPP
