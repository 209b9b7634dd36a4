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

#include "core/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace opufid {

namespace {

constexpr std::uint64_t kNoiseStream = 100;
constexpr std::uint64_t kKeyStream = 11;
constexpr std::uint64_t kFakeStream = 500;
constexpr std::uint64_t kChainStream = 1000;
constexpr std::uint64_t kCalibrationBase = 1000000;

Fiber reference_fiber(const ExperimentConfig& c, std::uint64_t offset) {
  return Fiber::synthesize(c.length_m, c.density_per_m, c.seed + offset);
}

DigitalSignature sign(const Fiber& fiber, const ExperimentConfig& c, const Bits& key,
                      double snr_db, std::uint64_t noise_seed) {
  return make_signature_direct(acquire(fiber, c.challenge, snr_db, noise_seed), key);
}

std::uint64_t probe_seed(const PathConfig& c, std::uint64_t index) {
  return mix_seed(mix_seed(c.seed, kNoiseStream), index);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(repetitions >= 1, "repetitions must be >= 1");
  require(length_m > 0.0 && density_per_m > 0.0, "fiber length and density must be > 0");
  require(!snr_db.empty(), "at least one SNR is required");
  for (double g : gamma_grid) require(g >= 0.0 && g <= 1.0, "gamma grid must lie in [0, 1]");
  challenge.validate();
}

Bits random_bits(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  Rng rng = make_rng(seed, stream);
  std::bernoulli_distribution coin(0.5);
  Bits bits(n);
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  return bits;
}

Bits experiment_key(const ExperimentConfig& config) {
  return random_bits(config.key_bits, config.seed, kKeyStream);
}

HdExperiment run_inner(const ExperimentConfig& config) {
  config.validate();
  return inner_hd(sign(reference_fiber(config, 0), config, experiment_key(config), kNoiseless, 0));
}

HdExperiment run_intra(const ExperimentConfig& config, double snr_db) {
  config.validate();
  const auto key = experiment_key(config);
  const auto fiber = reference_fiber(config, 0);
  const auto reference = sign(fiber, config, key, kNoiseless, 0);
  HdExperiment e;
  e.context = HdContext::kIntra;
  e.n_bits = reference.size();
  for (std::size_t i = 0; i < config.repetitions; ++i) {
    const auto noisy = sign(fiber, config, key, snr_db, mix_seed(config.seed, kNoiseStream + i));
    e.values.push_back(hamming(reference, noisy));
  }
  return e;
}

HdExperiment run_inter(const ExperimentConfig& config) {
  config.validate();
  const auto key = experiment_key(config);
  const auto reference = sign(reference_fiber(config, 0), config, key, kNoiseless, 0);
  HdExperiment e;
  e.context = HdContext::kInter;
  e.n_bits = reference.size();
  for (std::size_t i = 0; i < config.repetitions; ++i) {
    e.values.push_back(
        hamming(reference, sign(reference_fiber(config, i + 1), config, key, kNoiseless, 0)));
  }
  return e;
}

std::vector<FpfnTable> run_fpfn(const ExperimentConfig& config) {
  config.validate();
  const auto inter = run_inter(config);
  const double m_v = hd_statistics(inter).mean;
  std::vector<FpfnTable> tables;
  for (double snr : config.snr_db) {
    FpfnTable t;
    t.snr_db = snr;
    t.m_u = hd_statistics(run_intra(config, snr)).mean;
    t.m_v = m_v;
    t.n_bits = inter.n_bits;
    t.curve = error_curve(t.m_u, t.m_v, t.n_bits, config.gamma_grid);
    tables.push_back(std::move(t));
  }
  return tables;
}

void write_hd_summary_csv(std::ostream& out, const HdExperiment& experiment) {
  const auto s = hd_statistics(experiment);
  out << "kind,count,n_bits,mean,variance,min,max\n"
      << to_string(experiment.context) << ',' << experiment.values.size() << ','
      << experiment.n_bits << ',' << format_fixed(s.mean) << ',' << format_fixed(s.variance)
      << ',' << s.histogram.front().first << ',' << s.histogram.back().first << '\n';
}

void PathConfig::validate() const {
  require(span_length_m > 0.0 && density_per_m > 0.0, "span length and density must be > 0");
  require(window_m > 0.0 && window_m <= span_length_m, "window must fit inside a span");
  require(effective_side() >= 2, "ID side must be >= 2");
  require(adc_bits >= 1 && adc_bits <= 16, "ADC bits must lie in [1, 16]");
  require(calibration_trials >= 1, "calibration needs at least one trial");
  const auto c = effective_challenge();
  c.validate();
  require(c.max_distance_m() > span_length_m * static_cast<double>(span_count()),
          "challenge range does not cover the chain");
}

std::size_t PathConfig::effective_side() const {
  return side ? *side : default_side(protocol);
}

Challenge PathConfig::effective_challenge() const {
  return challenge ? *challenge : default_path_challenge(span_count());
}

std::string chain_label(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "net-%06llu", static_cast<unsigned long long>(index));
  return buf;
}

FiberChain experiment_chain(const PathConfig& config, std::uint64_t index) {
  const auto base = mix_seed(config.seed, kChainStream + index);
  std::vector<Fiber> spans;
  for (std::size_t s = 0; s < config.span_count(); ++s) {
    spans.push_back(Fiber::synthesize(config.span_length_m, config.density_per_m,
                                      mix_seed(base, s),
                                      "n" + std::to_string(index) + "s" + std::to_string(s)));
  }
  return FiberChain::concatenate(
      std::move(spans), std::vector<double>(config.span_count() + 1, kConnectorReflectivity));
}

FiberChain substituted_chain(const PathConfig& config, std::uint64_t index, std::size_t span,
                             std::uint64_t variant) {
  require(span < config.span_count(), "span index out of range");
  const auto chain = experiment_chain(config, index);
  std::vector<Fiber> spans(chain.spans().begin(), chain.spans().end());
  const auto base = mix_seed(config.seed, kChainStream + index);
  spans[span] = Fiber::synthesize(
      config.span_length_m, config.density_per_m, mix_seed(mix_seed(base, 64 + span), variant),
      "n" + std::to_string(index) + "s" + std::to_string(span) + "x" + std::to_string(variant));
  return FiberChain::concatenate(std::move(spans), std::vector<double>(
                                                       chain.connector_reflectivities().begin(),
                                                       chain.connector_reflectivities().end()));
}

PathOptions path_options(const PathConfig& config, const FiberChain& chain) {
  PathOptions o;
  o.windows = centred_windows(chain, config.window_m);
  o.adc_bits = config.adc_bits;
  o.snr_db = config.snr_db;
  o.side = config.effective_side();
  return o;
}

Calibration calibrate_substitution(const PathConfig& config) {
  config.validate();
  const auto challenge = config.effective_challenge();
  std::vector<double> sum(config.span_count(), 0.0);
  std::vector<std::size_t> count(config.span_count(), 0);
  double genuine_sum = 0.0;
  std::size_t genuine_count = 0;
  for (std::size_t trial = 0; trial < config.calibration_trials; ++trial) {
    const auto index = kCalibrationBase + trial;
    const auto chain = experiment_chain(config, index);
    auto options = path_options(config, chain);
    options.snr_db = kNoiseless;
    const auto reference = path_signature(chain, challenge, config.protocol, options);
    if (std::isfinite(config.snr_db)) {
      options.snr_db = config.snr_db;
      options.noise_seed = probe_seed(config, index);
      genuine_sum += static_cast<double>(
          hamming(reference, path_signature(chain, challenge, config.protocol, options)));
      ++genuine_count;
    }
    for (std::size_t s = 0; s < config.span_count(); ++s) {
      const auto spoof = substituted_chain(config, index, s);
      auto spoof_options = path_options(config, spoof);
      spoof_options.snr_db = kNoiseless;
      try {
        const auto id = path_signature(spoof, challenge, config.protocol, spoof_options);
        sum[s] += static_cast<double>(hamming(reference, id));
        ++count[s];
      } catch (const Error&) {
        // A spoof that cannot produce an ID never reaches the threshold.
      }
    }
  }
  Calibration c;
  c.m_u = genuine_count ? genuine_sum / static_cast<double>(genuine_count) : 0.0;
  c.m_v = static_cast<double>(config.effective_side() * config.effective_side());
  for (std::size_t s = 0; s < sum.size(); ++s) {
    if (count[s]) c.m_v = std::min(c.m_v, sum[s] / static_cast<double>(count[s]));
  }
  require(c.m_u <= c.m_v, "genuine HD exceeds substitution HD; IDs do not discriminate");
  return c;
}

std::string FakeIdResult::summary() const {
  std::string s = "matched=" + std::to_string(matched) + " rejected=" + std::to_string(rejected) +
                  " ambiguous=" + std::to_string(ambiguous);
  if (failed) s += " failed=" + std::to_string(failed);
  return s;
}

FakeIdResult run_fake_id(const PathConfig& config, std::size_t genuine, std::size_t fake) {
  config.validate();
  require(genuine >= 2, "fake-id needs at least two genuine IDs");
  const auto challenge = config.effective_challenge();
  CrpDatabase db("net");
  std::vector<FiberChain> chains;
  for (std::size_t i = 0; i < genuine; ++i) {
    chains.push_back(experiment_chain(config, i));
    enroll_path(db, chain_label(i), chains.back(), challenge, config.protocol,
                path_options(config, chains.back()));
  }

  FakeIdResult result;
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < genuine; ++i) {
    for (std::size_t j = i + 1; j < genuine; ++j) {
      pair_sum += static_cast<double>(hamming(db.records()[i].response, db.records()[j].response));
    }
  }
  result.calibration.m_v = pair_sum / static_cast<double>(genuine * (genuine - 1) / 2);
  result.calibration.m_u =
      std::isfinite(config.snr_db) ? calibrate_substitution(config).m_u : 0.0;
  db.set_calibration(result.calibration);
  const std::size_t n_bits = config.effective_side() * config.effective_side();
  result.threshold = db.default_threshold(n_bits);

  for (std::size_t i = 0; i < genuine; ++i) {
    auto options = path_options(config, chains[i]);
    options.noise_seed = probe_seed(config, i);
    const auto t = run_path_protocol(config.protocol, chains[i], chain_label(i), challenge, db,
                                     options);
    if (t.identified()) {
      ++result.matched;
    } else if (t.outcome() == "failed:ambiguous") {
      ++result.ambiguous;
    } else if (t.exit_code() == 2) {
      ++result.rejected;
    } else {
      ++result.failed;
    }
  }
  for (std::size_t k = 0; k < fake; ++k) {
    const DigitalSignature probe(config.effective_side(), config.effective_side(),
                                 random_bits(n_bits, config.seed, kFakeStream + k), 0,
                                 Scheme::kIntersection);
    switch (db.lookup(probe, result.threshold).outcome) {
      case MatchOutcome::kMatched: ++result.matched; break;
      case MatchOutcome::kAmbiguous: ++result.ambiguous; break;
      case MatchOutcome::kNoMatch: ++result.rejected; break;
    }
  }
  return result;
}

SpoofResult run_spoof(const PathConfig& config, std::size_t enrolled, std::size_t sessions) {
  config.validate();
  require(enrolled >= 1, "spoofing needs at least one enrolled chain");
  const auto challenge = config.effective_challenge();
  CrpDatabase db("net", {}, calibrate_substitution(config));
  for (std::size_t i = 0; i < enrolled; ++i) {
    const auto chain = experiment_chain(config, i);
    enroll_path(db, chain_label(i), chain, challenge, config.protocol,
                path_options(config, chain));
  }
  SpoofResult result;
  result.threshold = db.default_threshold(config.effective_side() * config.effective_side());
  for (std::size_t s = 0; s < sessions; ++s) {
    const std::size_t index = s % enrolled;
    const auto chain = substituted_chain(config, index, s % config.span_count(), s / enrolled);
    auto options = path_options(config, chain);
    options.noise_seed = probe_seed(config, s);
    const auto t =
        run_path_protocol(config.protocol, chain, chain_label(index), challenge, db, options);
    ++result.sessions;
    if (t.identified()) {
      ++result.identified;
    } else if (t.exit_code() == 2) {
      ++result.rejected;
    } else {
      ++result.failed;
    }
  }
  return result;
}

}  // namespace opufid
