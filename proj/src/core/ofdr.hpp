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

// Coherent-OFDR acquisition: the swept-laser beat photocurrent of every
// reflector in the distance gate, white Gaussian noise, and ADC quantization.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/fiber_model.hpp"

namespace opufid {

struct DistanceGate {
  double start_m = 0.0;
  double end_m = 0.0;

  friend bool operator==(const DistanceGate&, const DistanceGate&) = default;
};

/// Sweep and acquisition parameters. The defaults are the pigtail operating
/// point: 4000 samples over a 0.5 s sweep, beat band of a 0.5 m fiber below
/// Nyquist.
struct Challenge {
  std::string challenge_id = "C1";
  double e0 = 1.0;
  double sweep_rate_hz_per_s = 7.0e11;
  double sweep_time_s = 0.5;
  std::size_t n_samples = 4000;
  std::optional<DistanceGate> gate;

  void validate() const;

  double sample_interval_s() const { return sweep_time_s / static_cast<double>(n_samples); }
  /// Distance spanned by one DFT bin.
  double resolution_m() const;
  /// Largest distance whose beat frequency is below Nyquist.
  double max_distance_m() const;

  friend bool operator==(const Challenge&, const Challenge&) = default;
};

/// Path-scan challenge alias-free over `spans` spans of 0.5 m.
Challenge default_path_challenge(std::size_t spans = 2);

/// `e0=..,sweep_rate=..,sweep_time=..,n_samples=..[,gate_start=..,gate_end=..]`
std::string encode_challenge_params(const Challenge& challenge);
Challenge decode_challenge_params(std::string challenge_id, std::string_view params);

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct RbpTrace {
  std::vector<double> samples;
  double sweep_time_s = 0.0;
  std::string challenge_id;
  std::string source;
  double snr_db = kNoiseless;

  double time_s(std::size_t i) const {
    return sweep_time_s * static_cast<double>(i) / static_cast<double>(samples.size());
  }
};

struct QuantizedTrace {
  std::vector<std::uint32_t> levels;
  int bits_per_sample = 1;
  std::vector<double> thresholds;
  double min_value = 0.0;
  double step = 0.0;

  /// Reconstruction points for multi-bit traces; 1-bit traces map to 0/1.
  std::vector<double> dequantize() const;
};

/// I(t_i) = e0^2 * sum_k sqrt(R_k) cos(2 pi gamma t_i tau_k), t_i = i T / N,
/// over the reflectors inside the gate, plus noise at `snr_db` when finite.
RbpTrace acquire(const Target& target, const Challenge& challenge,
                 double snr_db = kNoiseless, std::uint64_t noise_seed = 0);

/// Same measurement over an explicit reflector list.
RbpTrace acquire_reflectors(std::span<const Reflector> reflectors, const Challenge& challenge,
                            double snr_db = kNoiseless, std::uint64_t noise_seed = 0);

/// Ordinary median: the middle element, or the mean of the two middle ones.
double median(std::span<const double> values);

/// 1 bit: level 1 iff sample >= median. More bits: uniform quantizer over
/// [min, max] of the trace with round-to-nearest.
QuantizedTrace quantize(const RbpTrace& trace, int bits_per_sample);

void write_trace_csv(std::ostream& out, const RbpTrace& trace);
RbpTrace read_trace_csv(std::istream& in);
void write_quantized_csv(std::ostream& out, const QuantizedTrace& trace);

}  // namespace opufid
