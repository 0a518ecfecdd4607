#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/linalg.hpp"

namespace wdro {

/// How the percentage scales of the market factors are read.
enum class ScaleInterpretation { StdDev, Variance };

constexpr const char* to_string(ScaleInterpretation s) { return s == ScaleInterpretation::StdDev ? "stddev" : "variance"; }

/// Returns ξ_i = ψ + ζ_i with ψ ~ N(0, s_ψ) and independent ζ_i ~ N(i·μ_step, i·s_step), i = 1..m.
struct MarketModel {
  std::size_t m = 10;
  double systematic_scale = 0.02;
  double idiosyncratic_mean_step = 0.03;
  double idiosyncratic_scale_step = 0.025;
  ScaleInterpretation scale_interpretation = ScaleInterpretation::StdDev;

  void validate() const {
    if (m == 0) fail(ErrorKind::InvalidConfig, "market needs at least one asset");
    if (!(systematic_scale > 0.0) || !(idiosyncratic_scale_step > 0.0))
      fail(ErrorKind::InvalidConfig, "market scales must be positive");
    if (!std::isfinite(idiosyncratic_mean_step)) fail(ErrorKind::InvalidConfig, "market mean step must be finite");
  }

  double stddev_of(double scale) const {
    return scale_interpretation == ScaleInterpretation::StdDev ? scale : std::sqrt(scale);
  }

  double systematic_sd() const { return stddev_of(systematic_scale); }
  double idiosyncratic_sd(std::size_t i) const { return stddev_of(static_cast<double>(i + 1) * idiosyncratic_scale_step); }

  Vector mean() const {
    Vector mu(m);
    for (std::size_t i = 0; i < m; ++i) mu[i] = static_cast<double>(i + 1) * idiosyncratic_mean_step;
    return mu;
  }

  Matrix covariance() const {
    Matrix s(m, m);
    const double v = systematic_sd() * systematic_sd();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) s(i, j) = v + (i == j ? idiosyncratic_sd(i) * idiosyncratic_sd(i) : 0.0);
    return s;
  }

  template <class Rng>
  std::vector<Vector> sample(std::size_t n, Rng& rng) const {
    validate();
    std::normal_distribution<double> z(0.0, 1.0);
    const Vector mu = mean();
    std::vector<Vector> out(n, Vector(m));
    for (auto& xi : out) {
      const double psi = systematic_sd() * z(rng);
      for (std::size_t i = 0; i < m; ++i) xi[i] = psi + mu[i] + idiosyncratic_sd(i) * z(rng);
    }
    return out;
  }
};

/// SplitMix64 step; used to derive independent per-run seeds from a master seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `a`, sub-stream `b` of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace wdro
