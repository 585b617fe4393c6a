#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <cstdint>
#include <random>
#include <vector>

#include "polybreak/rng.hpp"

namespace support {

/// Quad precision for the Gram-matrix route, whose matrices are too badly
/// conditioned at the sample ends for double.
using Quad = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<113, boost::multiprecision::digit_base_2>, boost::multiprecision::et_off>;

struct Instance {
  int n = 0;
  int p = 0;
  std::vector<double> y;
};

/// Random (n, p) with n <= max_n and n >= 2p + 6, and a polynomial trend plus
/// Gaussian noise.
inline Instance random_instance(std::uint64_t seed, int max_n = 60, int max_p = 3) {
  polybreak::Engine rng = polybreak::derive_stream(seed, {0x1357ULL});
  Instance inst;
  inst.p = std::uniform_int_distribution<int>(0, max_p)(rng);
  inst.n = std::uniform_int_distribution<int>(2 * inst.p + 6, max_n)(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> beta(static_cast<std::size_t>(inst.p + 1));
  for (auto& b : beta) b = 2.0 * normal(rng);
  for (int i = 1; i <= inst.n; ++i) {
    const double t = static_cast<double>(i) / inst.n;
    double mean = 0.0;
    double pw = 1.0;
    for (double b : beta) {
      mean += b * pw;
      pw *= t;
    }
    inst.y.push_back(mean + normal(rng));
  }
  return inst;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace support
