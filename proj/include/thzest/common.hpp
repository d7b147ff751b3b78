// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace thzest {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

namespace constants {
inline constexpr double c_light = 299792458.0;       // m/s
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double mu0 = 4.0 * pi * 1e-7;       // H/m
inline constexpr double eps0 = 8.8541878128e-12;     // F/m
inline const double z0_free_space = std::sqrt(mu0 / eps0);  // ~376.73 Ohm
}  // namespace constants

/// Bad configuration file or inconsistent scenario parameters (CLI exit 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside an estimator or bound (CLI exit 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Seeding.  Trials get independent streams derived from (master seed, salts)
// through splitmix64 so that results do not depend on execution order.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master, std::uint64_t salt_a = 0,
                       std::uint64_t salt_b = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (salt_a + 0x517cc1b727220a95ULL));
  s = splitmix64(s ^ (salt_b + 0x2545f4914f6cdd1dULL));
  return Rng(s);
}

/// Circularly symmetric complex Gaussian with unit variance.
inline cxd randn_c(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(2.0));
  return {n(rng), n(rng)};
}

inline Vec randn_cvec(Rng& rng, Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = randn_c(rng);
  return v;
}

inline double db10(double x) { return 10.0 * std::log10(x); }
inline double from_db10(double x_db) { return std::pow(10.0, x_db / 10.0); }

}  // namespace thzest
