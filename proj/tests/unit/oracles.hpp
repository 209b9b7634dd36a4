// Copyright 2026 The opufid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference implementations used only by the tests. Each one is written
// from the defining formula, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

constexpr double kC = 2.99792458e8;
constexpr double kNg = 1.468;

struct Site {
  double z;
  double r;
};

/// Term-by-term trace in long double.
inline std::vector<double> direct_sum(const std::vector<Site>& sites, double e0, double gamma,
                                      double sweep_time, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    const long double t = static_cast<long double>(sweep_time) * i / n;
    for (const auto& s : sites) {
      const long double tau = 2.0L * s.z * kNg / kC;
      acc += static_cast<long double>(e0) * e0 * std::sqrt(static_cast<long double>(s.r)) *
             std::cos(2.0L * std::numbers::pi_v<long double> * gamma * t * tau);
    }
    out[i] = static_cast<double>(acc);
  }
  return out;
}

/// |X_k| for k = 0..n/2 by the O(n^2) definition.
inline std::vector<double> dft_magnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      // Reduce k*j mod n first so the angle stays small.
      const long double a =
          -2.0L * std::numbers::pi_v<long double> * ((k * j) % n) / static_cast<long double>(n);
      re += x[j] * std::cos(a);
      im += x[j] * std::sin(a);
    }
    out[k] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return out;
}

/// Every proper crossing between the pieces of two polylines, each shifted
/// to start at 0, restricted to the common range. Returns (x, y) sorted.
inline std::vector<std::pair<double, double>> polyline_crossings(
    std::vector<double> xa, const std::vector<double>& ya, std::vector<double> xb,
    const std::vector<double>& yb) {
  const double a0 = xa.front(), b0 = xb.front();
  for (auto& x : xa) x -= a0;
  for (auto& x : xb) x -= b0;
  const double hi = std::min(xa.back(), xb.back());
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i + 1 < xa.size(); ++i) {
    for (std::size_t j = 0; j + 1 < xb.size(); ++j) {
      // Solve p + t r = q + u s.
      const double px = xa[i], py = ya[i], rx = xa[i + 1] - xa[i], ry = ya[i + 1] - ya[i];
      const double qx = xb[j], qy = yb[j], sx = xb[j + 1] - xb[j], sy = yb[j + 1] - yb[j];
      const double den = rx * sy - ry * sx;
      if (den == 0.0) continue;
      const double t = ((qx - px) * sy - (qy - py) * sx) / den;
      const double u = ((qx - px) * ry - (qy - py) * rx) / den;
      if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) continue;
      const double x = px + t * rx;
      if (x > hi) continue;
      pts.emplace_back(x, py + t * ry);
    }
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

using Big = boost::multiprecision::cpp_bin_float_100;

/// log10 P[Bin(n, p) <= k] in 100-digit arithmetic.
inline double log10_lower_tail(unsigned n, double p, long k) {
  if (k < 0) return -INFINITY;
  Big sum = 0, q = Big(1) - Big(p), term = boost::multiprecision::pow(q, n);
  for (long i = 0; i <= k && i <= static_cast<long>(n); ++i) {
    sum += term;
    term = term * Big(n - i) / Big(i + 1) * Big(p) / q;
  }
  return static_cast<double>(boost::multiprecision::log10(sum));
}

/// log10 P[Bin(n, p) > k].
inline double log10_upper_tail(unsigned n, double p, long k) {
  if (k >= static_cast<long>(n)) return -INFINITY;
  const long lo = std::max(0L, k + 1);
  Big q = Big(1) - Big(p);
  // pmf(lo) = C(n, lo) p^lo q^(n-lo)
  Big term = 1;
  for (long i = 0; i < lo; ++i) term = term * Big(n - i) / Big(i + 1);
  term *= boost::multiprecision::pow(Big(p), lo) * boost::multiprecision::pow(q, n - lo);
  Big sum = 0;
  for (long i = lo; i <= static_cast<long>(n); ++i) {
    sum += term;
    term = term * Big(n - i) / Big(i + 1) * Big(p) / q;
  }
  return static_cast<double>(boost::multiprecision::log10(sum));
}

}  // namespace oracle
