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

#include "core/decision_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "core/error.hpp"

namespace opufid {

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  require(a.size() == b.size(), "hamming distance needs equal lengths (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

std::size_t hamming(const DigitalSignature& a, const DigitalSignature& b) {
  return hamming(a.bits(), b.bits());
}

const char* to_string(HdContext context) {
  switch (context) {
    case HdContext::kInner: return "inner";
    case HdContext::kIntra: return "intra";
    case HdContext::kInter: return "inter";
  }
  return "?";
}

HdExperiment inner_hd(const DigitalSignature& sig) {
  require(sig.rows() >= 2, "inner HD needs at least two rows");
  HdExperiment e;
  e.context = HdContext::kInner;
  e.n_bits = sig.cols();
  e.values.reserve(sig.rows() * (sig.rows() - 1) / 2);
  for (std::size_t i = 0; i < sig.rows(); ++i) {
    for (std::size_t j = i + 1; j < sig.rows(); ++j) {
      e.values.push_back(hamming(sig.row(i), sig.row(j)));
    }
  }
  return e;
}

HdStatistics hd_statistics(const HdExperiment& experiment) {
  const auto& v = experiment.values;
  require(!v.empty(), "statistics of an empty HD experiment");
  HdStatistics s;
  double sum = 0.0;
  for (auto x : v) sum += static_cast<double>(x);
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (auto x : v) ss += (static_cast<double>(x) - s.mean) * (static_cast<double>(x) - s.mean);
    s.variance = ss / static_cast<double>(v.size() - 1);
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<std::size_t> counts(*hi - *lo + 1, 0);
  for (auto x : v) ++counts[x - *lo];
  for (std::size_t i = 0; i < counts.size(); ++i) s.histogram.emplace_back(*lo + i, counts[i]);
  return s;
}

void ThresholdPolicy::validate() const {
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(m_u >= 0.0 && m_u <= m_v && m_v <= static_cast<double>(n_bits),
          "threshold policy needs 0 <= M_U <= M_V <= N");
}

double threshold(const ThresholdPolicy& policy) {
  policy.validate();
  return policy.gamma * policy.m_v + (1.0 - policy.gamma) * policy.m_u;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_pmf(std::size_t n, double p, std::size_t k) {
  if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return k == n ? 0.0 : kNegInf;
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
         kk * std::log(p) + (nn - kk) * std::log1p(-p);
}

/// log10 of sum_{k=lo}^{hi} pmf(k), with Neumaier-compensated scaling sum.
double log10_range(std::size_t n, double p, std::size_t lo, std::size_t hi) {
  if (lo > hi) return kNegInf;
  std::vector<double> terms;
  terms.reserve(hi - lo + 1);
  double peak = kNegInf;
  for (std::size_t k = lo; k <= hi; ++k) {
    terms.push_back(log_pmf(n, p, k));
    peak = std::max(peak, terms.back());
  }
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0, compensation = 0.0;
  for (double t : terms) {
    const double x = std::exp(t - peak);
    const double s = sum + x;
    compensation += std::abs(sum) >= std::abs(x) ? (sum - s) + x : (x - s) + sum;
    sum = s;
  }
  return (peak + std::log(sum + compensation)) / std::numbers::ln10;
}

void check_probability(double p) {
  require(p >= 0.0 && p <= 1.0, "binomial success probability must lie in [0, 1]");
}

TailProbability from_log10(double log10_value) {
  return {std::pow(10.0, log10_value), log10_value};
}

long long floor_threshold(double t) {
  require(!std::isnan(t), "threshold is NaN");
  if (t >= 9.0e18) return std::numeric_limits<long long>::max();
  return static_cast<long long>(std::floor(t));
}

}  // namespace

double log10_binomial_lower_tail(std::size_t n, double p, long long k) {
  check_probability(p);
  if (k < 0) return kNegInf;
  if (static_cast<unsigned long long>(k) >= n) return 0.0;
  return log10_range(n, p, 0, static_cast<std::size_t>(k));
}

double log10_binomial_upper_tail(std::size_t n, double p, long long k) {
  check_probability(p);
  if (k < 0) return 0.0;
  if (static_cast<unsigned long long>(k) >= n) return kNegInf;
  return log10_range(n, p, static_cast<std::size_t>(k) + 1, n);
}

TailProbability p_false_positive(double m_v, std::size_t n_bits, double t) {
  require(n_bits > 0 && m_v >= 0.0 && m_v <= static_cast<double>(n_bits),
          "false positive needs 0 <= M_V <= N");
  require(t >= 0.0, "threshold must be >= 0");
  return from_log10(log10_binomial_lower_tail(n_bits, m_v / static_cast<double>(n_bits),
                                              floor_threshold(t)));
}

TailProbability p_false_negative(double m_u, std::size_t n_bits, double t) {
  require(n_bits > 0 && m_u >= 0.0 && m_u <= static_cast<double>(n_bits),
          "false negative needs 0 <= M_U <= N");
  require(t >= 0.0, "threshold must be >= 0");
  return from_log10(log10_binomial_upper_tail(n_bits, m_u / static_cast<double>(n_bits),
                                              floor_threshold(t)));
}

std::vector<ErrorEstimate> error_curve(double m_u, double m_v, std::size_t n_bits,
                                       std::span<const double> gamma_grid) {
  std::vector<ErrorEstimate> curve;
  curve.reserve(gamma_grid.size());
  for (double gamma : gamma_grid) {
    ErrorEstimate e;
    e.gamma = gamma;
    e.threshold = threshold({gamma, m_u, m_v, n_bits});
    e.false_positive = p_false_positive(m_v, n_bits, e.threshold);
    e.false_negative = p_false_negative(m_u, n_bits, e.threshold);
    curve.push_back(e);
  }
  return curve;
}

std::vector<double> uniform_gamma_grid(std::size_t count) {
  require(count >= 2, "a gamma grid needs at least two points");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return grid;
}

PathEstimate path_probability(std::vector<std::pair<std::string, double>> p_list) {
  PathEstimate estimate;
  for (const auto& [label, p] : p_list) {
    require(p >= 0.0 && p <= 1.0, "p for '" + label + "' is outside [0, 1]");
    estimate.p_total *= p;
  }
  estimate.per_subsystem = std::move(p_list);
  return estimate;
}

void write_histogram_csv(std::ostream& out, const HdStatistics& stats) {
  out << "bin,count\n";
  for (const auto& [bin, count] : stats.histogram) out << bin << ',' << count << '\n';
}

void write_error_curve_csv(std::ostream& out, std::span<const ErrorEstimate> curve) {
  out << "gamma,log10_fp,log10_fn\n";
  for (const auto& e : curve) {
    out << format_fixed(e.gamma) << ',' << format_fixed(e.false_positive.log10) << ','
        << format_fixed(e.false_negative.log10) << '\n';
  }
}

}  // namespace opufid
