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

#include "core/ofdr.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/text.hpp"

namespace opufid {

void Challenge::validate() const {
  require(std::isfinite(e0) && e0 > 0.0, "e0 must be > 0");
  require(std::isfinite(sweep_rate_hz_per_s) && sweep_rate_hz_per_s > 0.0,
          "sweep rate must be > 0");
  require(std::isfinite(sweep_time_s) && sweep_time_s > 0.0, "sweep time must be > 0");
  require(n_samples >= 2, "a challenge needs at least 2 samples");
  if (gate) {
    require(std::isfinite(gate->start_m) && std::isfinite(gate->end_m) &&
                gate->start_m >= 0.0 && gate->start_m < gate->end_m,
            "distance gate needs 0 <= start < end");
  }
  require(challenge_id.find_first_of("\t\n") == std::string::npos,
          "challenge id may not contain tabs or newlines");
}

double Challenge::resolution_m() const {
  return kSpeedOfLight / (2.0 * sweep_rate_hz_per_s * kGroupIndex * sweep_time_s);
}

double Challenge::max_distance_m() const {
  return resolution_m() * static_cast<double>(n_samples / 2);
}

Challenge default_path_challenge(std::size_t spans) {
  require(spans >= 1, "a path has at least one span");
  Challenge c;
  c.challenge_id = spans <= 2 ? "C-path" : "C-path3";
  c.n_samples = spans <= 2 ? 8192 : 16384;
  return c;
}

std::string encode_challenge_params(const Challenge& challenge) {
  std::string out = "e0=" + format_exact(challenge.e0) +
                    ",sweep_rate=" + format_exact(challenge.sweep_rate_hz_per_s) +
                    ",sweep_time=" + format_exact(challenge.sweep_time_s) +
                    ",n_samples=" + std::to_string(challenge.n_samples);
  if (challenge.gate) {
    out += ",gate_start=" + format_exact(challenge.gate->start_m) +
           ",gate_end=" + format_exact(challenge.gate->end_m);
  }
  return out;
}

Challenge decode_challenge_params(std::string challenge_id, std::string_view params) {
  Challenge c;
  c.challenge_id = std::move(challenge_id);
  std::optional<double> gate_start, gate_end;
  for (const auto& item : split(params, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kParse, "challenge parameter without '='");
    const auto key = item.substr(0, eq);
    const auto value = std::string_view(item).substr(eq + 1);
    if (key == "e0") {
      c.e0 = parse_double(value, key);
    } else if (key == "sweep_rate") {
      c.sweep_rate_hz_per_s = parse_double(value, key);
    } else if (key == "sweep_time") {
      c.sweep_time_s = parse_double(value, key);
    } else if (key == "n_samples") {
      c.n_samples = parse_u64(value, key);
    } else if (key == "gate_start") {
      gate_start = parse_double(value, key);
    } else if (key == "gate_end") {
      gate_end = parse_double(value, key);
    } else {
      fail(ErrorCode::kParse, "unknown challenge parameter '" + key + "'");
    }
  }
  if (gate_start.has_value() != gate_end.has_value()) {
    fail(ErrorCode::kParse, "gate needs both gate_start and gate_end");
  }
  if (gate_start) c.gate = DistanceGate{*gate_start, *gate_end};
  c.validate();
  return c;
}

RbpTrace acquire(const Target& target, const Challenge& challenge, double snr_db,
                 std::uint64_t noise_seed) {
  auto trace = acquire_reflectors(reflectors_of(target), challenge, snr_db, noise_seed);
  trace.source = target_label(target);
  return trace;
}

RbpTrace acquire_reflectors(std::span<const Reflector> reflectors, const Challenge& challenge,
                            double snr_db, std::uint64_t noise_seed) {
  challenge.validate();
  require(!std::isnan(snr_db) && snr_db != -std::numeric_limits<double>::infinity(),
          "snr_db must be finite or +inf");

  std::vector<Reflector> active;
  for (const auto& r : reflectors) {
    require(r.reflectivity >= 0.0 && r.reflectivity <= 1.0, "reflectivity must lie in [0, 1]");
    if (challenge.gate &&
        (r.position_m < challenge.gate->start_m || r.position_m > challenge.gate->end_m)) {
      continue;
    }
    active.push_back(r);
  }

  RbpTrace trace;
  trace.sweep_time_s = challenge.sweep_time_s;
  trace.challenge_id = challenge.challenge_id;
  trace.snr_db = snr_db;
  trace.samples.assign(challenge.n_samples, 0.0);

  const double gain = challenge.e0 * challenge.e0;
  const double dt = challenge.sample_interval_s();
  for (const auto& r : active) {
    const double amplitude = gain * std::sqrt(r.reflectivity);
    const double omega =
        2.0 * std::numbers::pi * challenge.sweep_rate_hz_per_s * roundtrip_time_s(r.position_m);
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
      trace.samples[i] += amplitude * std::cos(omega * (static_cast<double>(i) * dt));
    }
  }

  if (std::isfinite(snr_db)) {
    double power = 0.0;
    for (double s : trace.samples) power += s * s;
    power /= static_cast<double>(trace.samples.size());
    if (active.empty() || power == 0.0) {
      fail(ErrorCode::kAcquisition, "no reflector inside the gate: SNR is undefined");
    }
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    Rng rng = make_rng(noise_seed, 1);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& s : trace.samples) s += noise(rng);
  }
  return trace;
}

double median(std::span<const double> values) {
  require(!values.empty(), "median of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<double> QuantizedTrace::dequantize() const {
  std::vector<double> out;
  out.reserve(levels.size());
  for (auto level : levels) {
    out.push_back(bits_per_sample == 1 ? static_cast<double>(level)
                                       : min_value + step * static_cast<double>(level));
  }
  return out;
}

QuantizedTrace quantize(const RbpTrace& trace, int bits_per_sample) {
  require(bits_per_sample >= 1 && bits_per_sample <= 16, "ADC resolution must be 1..16 bits");
  require(!trace.samples.empty(), "cannot quantize an empty trace");
  QuantizedTrace q;
  q.bits_per_sample = bits_per_sample;
  q.levels.reserve(trace.samples.size());

  if (bits_per_sample == 1) {
    const double threshold = median(trace.samples);
    q.thresholds = {threshold};
    for (double s : trace.samples) q.levels.push_back(s >= threshold ? 1u : 0u);
    return q;
  }

  const auto [lo, hi] = std::minmax_element(trace.samples.begin(), trace.samples.end());
  const std::uint32_t top = (1u << bits_per_sample) - 1u;
  q.min_value = *lo;
  q.step = (*hi - *lo) / static_cast<double>(top);
  if (q.step > 0.0) {
    q.thresholds.reserve(top);
    for (std::uint32_t k = 0; k < top; ++k) {
      q.thresholds.push_back(q.min_value + (static_cast<double>(k) + 0.5) * q.step);
    }
  }
  for (double s : trace.samples) {
    std::uint32_t level = 0;
    if (q.step > 0.0) {
      const double x = std::round((s - q.min_value) / q.step);
      level = static_cast<std::uint32_t>(std::clamp(x, 0.0, static_cast<double>(top)));
    }
    q.levels.push_back(level);
  }
  return q;
}

void write_trace_csv(std::ostream& out, const RbpTrace& trace) {
  out << "index,time_s,value\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out << i << ',' << format_exact(trace.time_s(i)) << ',' << format_exact(trace.samples[i])
        << '\n';
  }
}

RbpTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "index,time_s,value") {
    fail(ErrorCode::kParse, "line 1: expected header 'index,time_s,value'");
  }
  RbpTrace trace;
  std::size_t line_no = 1;
  double last_time = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 3) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    if (parse_u64(fields[0], "index") != trace.samples.size()) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": index out of sequence");
    }
    last_time = parse_double(fields[1], "time_s");
    trace.samples.push_back(parse_double(fields[2], "value"));
  }
  if (trace.samples.size() >= 2) {
    trace.sweep_time_s = last_time * static_cast<double>(trace.samples.size()) /
                         static_cast<double>(trace.samples.size() - 1);
  }
  return trace;
}

void write_quantized_csv(std::ostream& out, const QuantizedTrace& trace) {
  out << "index,level\n";
  for (std::size_t i = 0; i < trace.levels.size(); ++i) {
    out << i << ',' << trace.levels[i] << '\n';
  }
}

}  // namespace opufid
