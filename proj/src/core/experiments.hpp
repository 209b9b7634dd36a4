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

// Seeded statistical experiments: HD distributions of pigtail signatures,
// error-probability sweeps and path-ID discrimination runs. Every routine is
// a pure function of its config.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "core/crp_db.hpp"
#include "core/decision_stats.hpp"
#include "core/fiber_model.hpp"
#include "core/ofdr.hpp"
#include "core/protocols.hpp"

namespace opufid {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t repetitions = 100;
  double length_m = 0.5;
  double density_per_m = 1000.0;
  std::size_t key_bits = 96;
  std::vector<double> snr_db{0.0};
  std::vector<double> gamma_grid = uniform_gamma_grid(21);
  Challenge challenge;

  void validate() const;
};

/// Uniform random bits from stream `stream` of `seed`.
Bits random_bits(std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// Shared key appended to every experiment signature.
Bits experiment_key(const ExperimentConfig& config);

/// Row-pair HDs of the reference fiber's signature.
HdExperiment run_inner(const ExperimentConfig& config);
/// HD between the noiseless reference and `repetitions` noisy re-acquisitions.
HdExperiment run_intra(const ExperimentConfig& config, double snr_db);
/// HD between the reference fiber and `repetitions` other fibers.
HdExperiment run_inter(const ExperimentConfig& config);

struct FpfnTable {
  double snr_db = 0.0;
  double m_u = 0.0;
  double m_v = 0.0;
  std::size_t n_bits = 0;
  std::vector<ErrorEstimate> curve;
};
/// One error curve per configured SNR; M_V is shared.
std::vector<FpfnTable> run_fpfn(const ExperimentConfig& config);

/// `kind,count,n_bits,mean,variance,min,max`
void write_hd_summary_csv(std::ostream& out, const HdExperiment& experiment);

struct PathConfig {
  std::uint64_t seed = 1;
  PathProtocol protocol = PathProtocol::kTwoSubsystems;
  double span_length_m = 0.5;
  double density_per_m = 1000.0;
  double window_m = 0.26;
  std::optional<std::size_t> side;  // default_side(protocol) when unset
  int adc_bits = 6;
  double snr_db = kNoiseless;
  std::optional<Challenge> challenge;  // alias-free default for the span count
  std::size_t calibration_trials = 8;

  void validate() const;
  Challenge effective_challenge() const;
  std::size_t effective_side() const;
  std::size_t span_count() const { return protocol == PathProtocol::kTwoSubsystems ? 2 : 3; }
};

/// Chain number `index` of the config: independently seeded spans joined by
/// connectors.
FiberChain experiment_chain(const PathConfig& config, std::uint64_t index);
/// Same chain with span `span` replaced by a fiber of another seed.
FiberChain substituted_chain(const PathConfig& config, std::uint64_t index, std::size_t span,
                             std::uint64_t variant = 0);
PathOptions path_options(const PathConfig& config, const FiberChain& chain);
std::string chain_label(std::uint64_t index);

/// M_U from noisy genuine re-measurements (0 when noiseless) and M_V as the
/// smallest per-span mean HD under single-span substitution. Uses chain
/// indices far from those of the other experiments.
Calibration calibrate_substitution(const PathConfig& config);

struct FakeIdResult {
  std::size_t matched = 0;
  std::size_t rejected = 0;
  std::size_t ambiguous = 0;
  std::size_t failed = 0;
  double threshold = 0.0;
  Calibration calibration;

  std::string summary() const;
};

/// Enrolls `genuine` chains, then probes with every genuine chain and with
/// `fake` random IDs of the same shape. M_V is the mean pairwise HD of the
/// enrolled IDs.
FakeIdResult run_fake_id(const PathConfig& config, std::size_t genuine, std::size_t fake);

struct SpoofResult {
  std::size_t sessions = 0;
  std::size_t identified = 0;
  std::size_t rejected = 0;
  std::size_t failed = 0;
  double threshold = 0.0;
};

/// Enrolls `enrolled` chains and runs `sessions` sessions in which one span
/// of an enrolled chain has been swapped for a foreign fiber.
SpoofResult run_spoof(const PathConfig& config, std::size_t enrolled, std::size_t sessions);

}  // namespace opufid
