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

// Fibers as random sets of discrete Rayleigh reflectors, chains of fibers
// joined by connectors, and the distance-domain reflectivity profile.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace opufid {

struct Challenge;

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
inline constexpr double kGroupIndex = 1.468;
inline constexpr double kScatterReflectivityMin = 1e-9;
inline constexpr double kScatterReflectivityMax = 1e-7;
inline constexpr double kConnectorReflectivity = 1e-4;

/// Round-trip delay of a reflector at `position_m`.
inline double roundtrip_time_s(double position_m) {
  return 2.0 * position_m * kGroupIndex / kSpeedOfLight;
}

struct Reflector {
  double position_m = 0.0;
  double reflectivity = 0.0;

  friend bool operator==(const Reflector&, const Reflector&) = default;
};

/// A fiber is fully determined by (seed, length, density); its scatter sites
/// are regenerated, never stored.
class Fiber {
 public:
  /// Poisson(length * density) sites, uniform positions, log-uniform
  /// reflectivities in [kScatterReflectivityMin, kScatterReflectivityMax].
  static Fiber synthesize(double length_m, double density_per_m, std::uint64_t seed,
                          std::string fiber_id = {});

  const std::string& id() const { return id_; }
  double length_m() const { return length_m_; }
  double density_per_m() const { return density_per_m_; }
  std::uint64_t seed() const { return seed_; }
  std::span<const Reflector> sites() const { return sites_; }

  friend bool operator==(const Fiber&, const Fiber&) = default;

 private:
  Fiber() = default;

  std::string id_;
  double length_m_ = 0.0;
  double density_per_m_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<Reflector> sites_;
};

/// Spans laid end to end with one connector per interface, the launch face
/// and the far end included.
class FiberChain {
 public:
  static FiberChain concatenate(std::vector<Fiber> spans,
                                std::vector<double> connector_reflectivities);

  std::span<const Fiber> spans() const { return spans_; }
  std::span<const double> connector_reflectivities() const { return connectors_; }
  std::vector<double> connector_positions() const;
  double total_length_m() const;
  double span_offset_m(std::size_t span) const;

  /// Every scatter site at its chain position plus the connectors, ascending.
  std::vector<Reflector> reflectors() const;

  friend bool operator==(const FiberChain&, const FiberChain&) = default;

 private:
  FiberChain() = default;

  std::vector<Fiber> spans_;
  std::vector<double> connectors_;
};

/// What a measurement can be pointed at.
using Target = std::variant<Fiber, FiberChain>;

std::vector<Reflector> reflectors_of(const Target& target);
std::string target_label(const Target& target);

struct ReflectivityProfile {
  std::vector<double> distance_m;
  std::vector<double> magnitude;
  double resolution_m = 0.0;
};

/// One-sided DFT magnitude of a sampled trace, bins mapped to distance.
ReflectivityProfile profile_from_samples(std::span<const double> samples,
                                         const Challenge& challenge);

/// Profile of the noiseless trace of `target` under `challenge`.
ReflectivityProfile reflectivity_profile(const Target& target, const Challenge& challenge);

/// Indices of the `count` largest local maxima, strongest first.
std::vector<std::size_t> strongest_peaks(const ReflectivityProfile& profile,
                                         std::size_t count);

// `opufid-fiber v1` / `opufid-chain v1` key=value documents.
void write_target(std::ostream& out, const Target& target);
Target read_target(std::istream& in);
void save_target(const std::string& path, const Target& target);
Target load_target(const std::string& path);

}  // namespace opufid
