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

// Binary IDs distilled from backscatter: the direct 1-bit pigtail signature
// and the intersection-point path signature, plus their text and PBM forms.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/fiber_model.hpp"
#include "core/ofdr.hpp"
#include "core/text.hpp"

namespace opufid {

enum class Scheme { kDirect, kIntersection };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view text);

/// Row-major bit matrix. When a key is present it occupies the last
/// `key_len()` entries of the flattening.
class DigitalSignature {
 public:
  DigitalSignature() = default;
  DigitalSignature(std::size_t rows, std::size_t cols, Bits bits, std::size_t key_len,
                   Scheme scheme);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return bits_.size(); }
  std::size_t key_len() const { return key_len_; }
  Scheme scheme() const { return scheme_; }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<const std::uint8_t> row(std::size_t r) const;
  std::span<const std::uint8_t> key_bits() const;
  std::span<const std::uint8_t> data_bits() const;
  std::uint8_t at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }

  bool same_shape(const DigitalSignature& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  std::string challenge_id;
  std::string source;

  friend bool operator==(const DigitalSignature&, const DigitalSignature&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Bits bits_;
  std::size_t key_len_ = 0;
  Scheme scheme_ = Scheme::kDirect;
};

/// 1-bit quantize the trace, append the key, reshape into a square matrix.
/// 4000 samples + 96 key bits gives 64 x 64.
DigitalSignature make_signature_direct(const RbpTrace& trace, std::span<const std::uint8_t> key);

/// A normalized window of a profile (or any ascending polyline).
struct Segment {
  std::vector<double> positions_m;
  std::vector<double> amplitudes;
  std::string label;

  std::size_t size() const { return positions_m.size(); }
};

struct IntersectionPoint {
  double position_m = 0.0;
  double amplitude = 0.0;
};

struct IntersectionSet {
  std::vector<IntersectionPoint> points;
  std::string label;
  std::vector<std::string> parents;

  std::size_t size() const { return points.size(); }
  /// The crossing points read back as a polyline, for cascading.
  Segment as_segment() const;
};

/// Grid points with start <= x <= start + length, divided by their maximum.
Segment select_window(const ReflectivityProfile& profile, double start_m, double length_m,
                      std::string label = {});

/// Both segments are shifted to start at 0, interpolated onto the union of
/// their grids over the common range, and every sign change of a - b yields
/// one crossing. Coincidence over an interval yields none.
IntersectionSet intersect(const Segment& a, const Segment& b, std::string label = {});

/// Bit per point: amplitude >= median. Key bits are appended, then the
/// largest r x r square (or the requested `side`) is kept.
DigitalSignature quantize_intersections(const IntersectionSet& points,
                                        std::span<const std::uint8_t> key = {},
                                        std::optional<std::size_t> side = std::nullopt);

/// J1 = S1 x S2, J2 = J1 x S3. Returns J2; empty when J1 has < 2 points.
IntersectionSet cascade_intersections_I(const Segment& s1, const Segment& s2,
                                        const Segment& s3);

using SubsetRule =
    std::function<IntersectionSet(const IntersectionSet& j1, const IntersectionSet& j2)>;

/// First ceil(|J1|/2) points of J1 followed by the first floor(|J2|/2) of J2.
IntersectionSet half_and_half(const IntersectionSet& j1, const IntersectionSet& j2);

/// J1 = S1 x S2, J2 = S1 x S3, J3 = subset(J1, J2).
IntersectionSet cascade_intersections_II(const Segment& s1, const Segment& s2,
                                         const Segment& s3,
                                         const SubsetRule& subset = half_and_half);

// `opufid-sig v1` text form.
void write_signature(std::ostream& out, const DigitalSignature& sig);
DigitalSignature read_signature(std::istream& in);
void save_signature(const std::string& path, const DigitalSignature& sig);
DigitalSignature load_signature(const std::string& path);

// Plain PBM (P1), 1 = black. Imports carry no key split and scheme kDirect.
void write_pbm(std::ostream& out, const DigitalSignature& sig);
DigitalSignature read_pbm(std::istream& in);
void export_qr(const DigitalSignature& sig, const std::string& path);
DigitalSignature import_qr(const std::string& path);

}  // namespace opufid
