#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/math/special_functions/erf.hpp>

namespace evflex {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream domains, so generation and simulation never share draws.
enum class StreamDomain : std::uint64_t { Generation = 1, Simulation = 2 };

/// Per-driver seed; a pure function of its arguments so results do not depend
/// on the order in which drivers are processed.
inline constexpr std::uint64_t stream_seed(std::uint64_t global_seed, std::uint64_t driver_id,
                                           StreamDomain domain) {
  return splitmix64(splitmix64(global_seed ^ splitmix64(driver_id)) + static_cast<std::uint64_t>(domain));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_quantile(double p) { return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

/// mt19937_64 with portable transforms (the standard distributions are not
/// bit-reproducible across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal(double mean, double sd) { return mean + sd * normal_quantile(uniform()); }

  /// Log-normal parameterised by its own mean and coefficient of variation.
  double lognormal_mean_cv(double mean, double cv) {
    if (cv <= 0.0) return mean;
    const double s2 = std::log1p(cv * cv);
    return std::exp(std::log(mean) - 0.5 * s2 + std::sqrt(s2) * normal_quantile(uniform()));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn proportionally to `weights`; all-zero weights give 0.
  template <typename Range>
  std::size_t weighted_index(const Range& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0;
    double u = uniform() * total;
    std::size_t i = 0;
    for (double w : weights) {
      if (u < w) return i;
      u -= w;
      ++i;
    }
    return i - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace evflex
