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

#include "core/fiber_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/text.hpp"

namespace opufid {

namespace {

constexpr const char* kFiberHeader = "opufid-fiber v1";
constexpr const char* kChainHeader = "opufid-chain v1";

}  // namespace

Fiber Fiber::synthesize(double length_m, double density_per_m, std::uint64_t seed,
                        std::string fiber_id) {
  require(std::isfinite(length_m) && length_m > 0.0, "fiber length must be > 0");
  require(std::isfinite(density_per_m) && density_per_m > 0.0,
          "scatter density must be > 0");

  Fiber fiber;
  fiber.id_ = fiber_id.empty() ? "fiber-" + std::to_string(seed) : std::move(fiber_id);
  fiber.length_m_ = length_m;
  fiber.density_per_m_ = density_per_m;
  fiber.seed_ = seed;

  Rng rng = make_rng(seed);
  std::poisson_distribution<std::uint64_t> count_dist(length_m * density_per_m);
  const auto count = count_dist(rng);

  std::uniform_real_distribution<double> position(0.0, length_m);
  std::uniform_real_distribution<double> log_r(std::log10(kScatterReflectivityMin),
                                               std::log10(kScatterReflectivityMax));
  fiber.sites_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double z = position(rng);
    const double r = std::pow(10.0, log_r(rng));
    fiber.sites_.push_back({z, r});
  }
  std::sort(fiber.sites_.begin(), fiber.sites_.end(),
            [](const Reflector& a, const Reflector& b) { return a.position_m < b.position_m; });
  // Equal doubles are a measure-zero event; keep positions strictly ascending.
  fiber.sites_.erase(std::unique(fiber.sites_.begin(), fiber.sites_.end(),
                                 [](const Reflector& a, const Reflector& b) {
                                   return a.position_m == b.position_m;
                                 }),
                     fiber.sites_.end());
  return fiber;
}

FiberChain FiberChain::concatenate(std::vector<Fiber> spans,
                                   std::vector<double> connector_reflectivities) {
  require(!spans.empty(), "a chain needs at least one fiber");
  require(connector_reflectivities.size() == spans.size() + 1,
          "expected " + std::to_string(spans.size() + 1) + " connector reflectivities, got " +
              std::to_string(connector_reflectivities.size()));
  for (std::size_t c = 0; c < connector_reflectivities.size(); ++c) {
    const double r = connector_reflectivities[c];
    require(std::isfinite(r) && r > 0.0 && r <= 1.0, "connector reflectivity must be in (0, 1]");
    // Connector c touches span c-1 (left) and span c (right).
    for (std::size_t s : {c - 1, c}) {
      if (s >= spans.size()) continue;
      for (const auto& site : spans[s].sites()) {
        require(r > site.reflectivity,
                "connector " + std::to_string(c) + " does not dominate scatter in span " +
                    std::to_string(s));
      }
    }
  }
  FiberChain chain;
  chain.spans_ = std::move(spans);
  chain.connectors_ = std::move(connector_reflectivities);
  return chain;
}

double FiberChain::span_offset_m(std::size_t span) const {
  double offset = 0.0;
  for (std::size_t i = 0; i < span && i < spans_.size(); ++i) offset += spans_[i].length_m();
  return offset;
}

double FiberChain::total_length_m() const { return span_offset_m(spans_.size()); }

std::vector<double> FiberChain::connector_positions() const {
  std::vector<double> positions;
  positions.reserve(connectors_.size());
  for (std::size_t i = 0; i < connectors_.size(); ++i) positions.push_back(span_offset_m(i));
  return positions;
}

std::vector<Reflector> FiberChain::reflectors() const {
  std::vector<Reflector> all;
  for (std::size_t s = 0; s < spans_.size(); ++s) {
    const double offset = span_offset_m(s);
    for (const auto& site : spans_[s].sites()) {
      all.push_back({site.position_m + offset, site.reflectivity});
    }
  }
  const auto positions = connector_positions();
  for (std::size_t c = 0; c < connectors_.size(); ++c) {
    all.push_back({positions[c], connectors_[c]});
  }
  std::stable_sort(all.begin(), all.end(), [](const Reflector& a, const Reflector& b) {
    return a.position_m < b.position_m;
  });
  return all;
}

std::vector<Reflector> reflectors_of(const Target& target) {
  if (const auto* fiber = std::get_if<Fiber>(&target)) {
    return {fiber->sites().begin(), fiber->sites().end()};
  }
  return std::get<FiberChain>(target).reflectors();
}

std::string target_label(const Target& target) {
  if (const auto* fiber = std::get_if<Fiber>(&target)) return fiber->id();
  std::string label;
  for (const auto& span : std::get<FiberChain>(target).spans()) {
    if (!label.empty()) label += '+';
    label += span.id();
  }
  return label;
}

std::vector<std::size_t> strongest_peaks(const ReflectivityProfile& profile,
                                         std::size_t count) {
  const auto& m = profile.magnitude;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool left = i == 0 || m[i] > m[i - 1];
    const bool right = i + 1 == m.size() || m[i] >= m[i + 1];
    if (left && right && m[i] > 0.0) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
  if (peaks.size() > count) peaks.resize(count);
  return peaks;
}

namespace {

void put_fiber(KeyValueDoc& doc, const std::string& prefix, const Fiber& fiber) {
  doc.set(prefix + "fiber_id", fiber.id());
  doc.set(prefix + "seed", std::to_string(fiber.seed()));
  doc.set(prefix + "length_m", format_exact(fiber.length_m()));
  doc.set(prefix + "density_per_m", format_exact(fiber.density_per_m()));
}

Fiber get_fiber(const KeyValueDoc& doc, const std::string& prefix) {
  return Fiber::synthesize(parse_double(doc.get(prefix + "length_m"), "length_m"),
                           parse_double(doc.get(prefix + "density_per_m"), "density_per_m"),
                           parse_u64(doc.get(prefix + "seed"), "seed"),
                           doc.has(prefix + "fiber_id") ? doc.get(prefix + "fiber_id") : "");
}

}  // namespace

void write_target(std::ostream& out, const Target& target) {
  KeyValueDoc doc;
  if (const auto* fiber = std::get_if<Fiber>(&target)) {
    doc.header = kFiberHeader;
    put_fiber(doc, "", *fiber);
  } else {
    const auto& chain = std::get<FiberChain>(target);
    doc.header = kChainHeader;
    doc.set("spans", std::to_string(chain.spans().size()));
    std::string connectors;
    for (double r : chain.connector_reflectivities()) {
      if (!connectors.empty()) connectors += ',';
      connectors += format_exact(r);
    }
    doc.set("connectors", connectors);
    for (std::size_t i = 0; i < chain.spans().size(); ++i) {
      put_fiber(doc, "span" + std::to_string(i) + ".", chain.spans()[i]);
    }
  }
  doc.write(out);
}

Target read_target(std::istream& in) {
  const auto doc = KeyValueDoc::read(in);
  if (doc.header == kFiberHeader) return get_fiber(doc, "");
  if (doc.header != kChainHeader) {
    fail(ErrorCode::kParse, "line 1: unknown header '" + doc.header + "'");
  }
  const auto n = parse_u64(doc.get("spans"), "spans");
  std::vector<Fiber> spans;
  for (std::uint64_t i = 0; i < n; ++i) spans.push_back(get_fiber(doc, "span" + std::to_string(i) + "."));
  std::vector<double> connectors;
  for (const auto& part : split(doc.get("connectors"), ',')) {
    connectors.push_back(parse_double(part, "connectors"));
  }
  return FiberChain::concatenate(std::move(spans), std::move(connectors));
}

void save_target(const std::string& path, const Target& target) {
  std::ostringstream out;
  write_target(out, target);
  write_file_atomically(path, out.str());
}

Target load_target(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_target(in);
}

}  // namespace opufid
