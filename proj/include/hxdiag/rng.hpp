#ifndef HXDIAG_RNG_HPP
#define HXDIAG_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace hxdiag {

// splitmix64 finalizer; used to spread seeds into independent streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index * 0xD1B54A32D192ED03ULL + 1));
}

// FNV-1a, for seeding streams keyed by names rather than indices.
inline std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// mt19937_64 engine with explicit variate transforms.  The standard pins the
// engine output sequence but not the distribution adaptors, so all transforms
// are written out here to keep results reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // uniform on the open interval (0, 1)
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one variate per call
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // inversion sampler, unit mean
  double exponential() { return -std::log(uniform()); }

  double exponential_mean(double mean) {
    if (!(mean > 0.0)) throw std::invalid_argument("exponential mean must be positive");
    return mean * exponential();
  }

  double lognormal(double log_loc, double log_scale) {
    return std::exp(log_loc + log_scale * normal());
  }

  // index into an unnormalised weight vector
  template <std::size_t N>
  int categorical(const std::array<double, N>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("categorical weight must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("categorical weights sum to zero");
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < N; ++i) {
      u -= weights[i];
      if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(N - 1);
  }

  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int needs n > 0");
    return static_cast<int>(std::min<double>(uniform() * n, n - 1));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hxdiag

#endif  // HXDIAG_RNG_HPP
