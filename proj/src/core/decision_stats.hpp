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

// Hamming distances and the binomial accept/reject model: the threshold
// t = gamma*M_V + (1-gamma)*M_U, false-positive and false-negative tails,
// and the product rule for a path of independently checked sub-systems.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/signature.hpp"

namespace opufid {

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
std::size_t hamming(const DigitalSignature& a, const DigitalSignature& b);

enum class HdContext { kInner, kIntra, kInter };
const char* to_string(HdContext context);

struct HdExperiment {
  std::vector<std::size_t> values;
  HdContext context = HdContext::kInner;
  std::size_t n_bits = 0;
};

/// HD of every unordered row pair, C(rows, 2) values.
HdExperiment inner_hd(const DigitalSignature& sig);

struct HdStatistics {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single value
  std::vector<std::pair<std::size_t, std::size_t>> histogram;  // (bin, count), bins min..max
};

HdStatistics hd_statistics(const HdExperiment& experiment);

struct ThresholdPolicy {
  double gamma = 0.5;
  double m_u = 0.0;
  double m_v = 0.0;
  std::size_t n_bits = 0;

  void validate() const;
};

double threshold(const ThresholdPolicy& policy);

struct TailProbability {
  double linear = 0.0;
  double log10 = 0.0;
};

/// P[Binomial(N, m_v/N) <= floor(t)].
TailProbability p_false_positive(double m_v, std::size_t n_bits, double t);

/// P[Binomial(N, m_u/N) > floor(t)].
TailProbability p_false_negative(double m_u, std::size_t n_bits, double t);

/// log10 P[Binomial(n, p) <= k] and its complement, summed in log space.
double log10_binomial_lower_tail(std::size_t n, double p, long long k);
double log10_binomial_upper_tail(std::size_t n, double p, long long k);

struct ErrorEstimate {
  double gamma = 0.0;
  double threshold = 0.0;
  TailProbability false_positive;
  TailProbability false_negative;
};

std::vector<ErrorEstimate> error_curve(double m_u, double m_v, std::size_t n_bits,
                                       std::span<const double> gamma_grid);

/// `count` evenly spaced points over [0, 1].
std::vector<double> uniform_gamma_grid(std::size_t count);

struct PathEstimate {
  std::vector<std::pair<std::string, double>> per_subsystem;
  double p_total = 1.0;
};

PathEstimate path_probability(std::vector<std::pair<std::string, double>> p_list);

void write_histogram_csv(std::ostream& out, const HdStatistics& stats);
void write_error_curve_csv(std::ostream& out, std::span<const ErrorEstimate> curve);

}  // namespace opufid
