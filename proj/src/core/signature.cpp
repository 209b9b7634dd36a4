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

#include "core/signature.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace opufid {

const char* to_string(Scheme scheme) {
  return scheme == Scheme::kDirect ? "direct" : "intersection";
}

Scheme scheme_from_string(std::string_view text) {
  if (text == "direct") return Scheme::kDirect;
  if (text == "intersection") return Scheme::kIntersection;
  fail(ErrorCode::kParse, "unknown scheme '" + std::string(text) + "'");
}

DigitalSignature::DigitalSignature(std::size_t rows, std::size_t cols, Bits bits,
                                   std::size_t key_len, Scheme scheme)
    : rows_(rows), cols_(cols), bits_(std::move(bits)), key_len_(key_len), scheme_(scheme) {
  require(rows_ * cols_ == bits_.size(), "signature shape does not match bit count");
  require(key_len_ <= bits_.size(), "key longer than signature");
  for (auto b : bits_) require(b <= 1, "signature bits must be 0 or 1");
}

std::span<const std::uint8_t> DigitalSignature::row(std::size_t r) const {
  return std::span<const std::uint8_t>(bits_).subspan(r * cols_, cols_);
}

std::span<const std::uint8_t> DigitalSignature::key_bits() const {
  return std::span<const std::uint8_t>(bits_).last(key_len_);
}

std::span<const std::uint8_t> DigitalSignature::data_bits() const {
  return std::span<const std::uint8_t>(bits_).first(bits_.size() - key_len_);
}

namespace {

std::size_t integer_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

void check_key(std::span<const std::uint8_t> key) {
  for (auto b : key) require(b <= 1, "key bits must be 0 or 1");
}

}  // namespace

DigitalSignature make_signature_direct(const RbpTrace& trace, std::span<const std::uint8_t> key) {
  check_key(key);
  const std::size_t total = trace.samples.size() + key.size();
  const std::size_t side = integer_sqrt(total);
  require(side * side == total && total > 0,
          std::to_string(trace.samples.size()) + " samples + " + std::to_string(key.size()) +
              " key bits is not a perfect square");
  const auto q = quantize(trace, 1);
  Bits bits;
  bits.reserve(total);
  for (auto level : q.levels) bits.push_back(static_cast<std::uint8_t>(level));
  bits.insert(bits.end(), key.begin(), key.end());
  DigitalSignature sig(side, side, std::move(bits), key.size(), Scheme::kDirect);
  sig.challenge_id = trace.challenge_id;
  sig.source = trace.source;
  return sig;
}

Segment IntersectionSet::as_segment() const {
  Segment s;
  s.label = label;
  s.positions_m.reserve(points.size());
  s.amplitudes.reserve(points.size());
  for (const auto& p : points) {
    s.positions_m.push_back(p.position_m);
    s.amplitudes.push_back(p.amplitude);
  }
  return s;
}

Segment select_window(const ReflectivityProfile& profile, double start_m, double length_m,
                      std::string label) {
  require(std::isfinite(start_m) && std::isfinite(length_m) && length_m >= 0.0,
          "window needs finite start and nonnegative length");
  const auto& axis = profile.distance_m;
  const double end_m = start_m + length_m;
  // A billionth of the grid step absorbs rounding in the bounds.
  const double slack = profile.resolution_m * 1e-9;
  if (axis.empty() || start_m < axis.front() - slack || end_m > axis.back() + slack) {
    fail(ErrorCode::kOutOfRange, "window [" + format_fixed(start_m) + ", " +
                                     format_fixed(end_m) + "] m lies outside the profile");
  }
  Segment seg;
  seg.label = std::move(label);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (axis[i] >= start_m - slack && axis[i] <= end_m + slack) {
      seg.positions_m.push_back(axis[i]);
      seg.amplitudes.push_back(profile.magnitude[i]);
    }
  }
  if (seg.positions_m.empty()) {
    fail(ErrorCode::kOutOfRange, "window contains no grid point");
  }
  const double peak = *std::max_element(seg.amplitudes.begin(), seg.amplitudes.end());
  if (!(peak > 0.0)) fail(ErrorCode::kDegenerateSegment, "window is identically zero");
  for (double& a : seg.amplitudes) a /= peak;
  return seg;
}

namespace {

/// Values of an ascending polyline on an ascending grid inside its range.
std::vector<double> resample(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  std::size_t j = 0;
  for (double g : grid) {
    while (j + 1 < x.size() && x[j + 1] <= g) ++j;
    if (x[j] == g || j + 1 == x.size()) {
      out.push_back(y[j]);
    } else {
      const double f = (g - x[j]) / (x[j + 1] - x[j]);
      out.push_back(y[j] + f * (y[j + 1] - y[j]));
    }
  }
  return out;
}

std::vector<double> aligned(const Segment& s) {
  std::vector<double> x(s.positions_m.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = s.positions_m[i] - s.positions_m.front();
  return x;
}

int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

IntersectionSet intersect(const Segment& a, const Segment& b, std::string label) {
  require(!a.positions_m.empty() && !b.positions_m.empty(), "segments must be nonempty");
  require(a.positions_m.size() == a.amplitudes.size() &&
              b.positions_m.size() == b.amplitudes.size(),
          "segment positions and amplitudes differ in length");

  const auto xa = aligned(a);
  const auto xb = aligned(b);
  const double hi = std::min(xa.back(), xb.back());
  if (!(hi > 0.0)) fail(ErrorCode::kEmptyOverlap, "segments do not overlap after alignment");

  std::vector<double> grid;
  grid.reserve(xa.size() + xb.size());
  std::merge(xa.begin(), xa.end(), xb.begin(), xb.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(std::upper_bound(grid.begin(), grid.end(), hi), grid.end());

  const auto va = resample(xa, a.amplitudes, grid);
  const auto vb = resample(xb, b.amplitudes, grid);
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d[i] = va[i] - vb[i];

  IntersectionSet out;
  out.label = std::move(label);
  out.parents = {a.label, b.label};
  const std::size_t m = grid.size();
  std::size_t i = 0;
  while (i < m) {
    if (d[i] == 0.0) {
      std::size_t j = i;
      while (j < m && d[j] == 0.0) ++j;
      // A lone grid-point zero between opposite signs is one crossing.
      if (j - i == 1 && i > 0 && j < m && sign(d[i - 1]) != sign(d[j])) {
        out.points.push_back({grid[i], va[i]});
      }
      i = j;
      continue;
    }
    if (i + 1 < m && d[i + 1] != 0.0 && sign(d[i]) != sign(d[i + 1])) {
      const double f = d[i] / (d[i] - d[i + 1]);
      out.points.push_back(
          {grid[i] + f * (grid[i + 1] - grid[i]), va[i] + f * (va[i + 1] - va[i])});
    }
    ++i;
  }
  return out;
}

DigitalSignature quantize_intersections(const IntersectionSet& points,
                                        std::span<const std::uint8_t> key,
                                        std::optional<std::size_t> side) {
  check_key(key);
  if (points.size() < 4) {
    fail(ErrorCode::kInsufficientEntropy,
         std::to_string(points.size()) + " intersection points, need at least 4");
  }
  std::vector<double> amplitudes;
  amplitudes.reserve(points.size());
  for (const auto& p : points.points) amplitudes.push_back(p.amplitude);
  const double threshold = median(amplitudes);

  Bits bits;
  bits.reserve(points.size() + key.size());
  for (double a : amplitudes) bits.push_back(a >= threshold ? 1 : 0);
  bits.insert(bits.end(), key.begin(), key.end());

  const std::size_t total = bits.size();
  std::size_t r = integer_sqrt(total);
  if (side) {
    require(*side >= 1, "side must be >= 1");
    if (*side * *side > total) {
      fail(ErrorCode::kInsufficientEntropy,
           std::to_string(total) + " bits cannot fill a " + std::to_string(*side) + "x" +
               std::to_string(*side) + " ID");
    }
    r = *side;
  }
  bits.resize(r * r);
  const std::size_t kept_key =
      r * r > points.size() ? std::min(key.size(), r * r - points.size()) : 0;
  return DigitalSignature(r, r, std::move(bits), kept_key, Scheme::kIntersection);
}

IntersectionSet cascade_intersections_I(const Segment& s1, const Segment& s2,
                                        const Segment& s3) {
  const auto j1 = intersect(s1, s2, "J1");
  if (j1.size() < 2) {
    IntersectionSet empty;
    empty.label = "J2";
    empty.parents = {"J1", s3.label};
    return empty;
  }
  return intersect(j1.as_segment(), s3, "J2");
}

IntersectionSet half_and_half(const IntersectionSet& j1, const IntersectionSet& j2) {
  IntersectionSet j3;
  j3.label = "J3";
  j3.parents = {j1.label, j2.label};
  const std::size_t from_j1 = (j1.size() + 1) / 2;
  const std::size_t from_j2 = j2.size() / 2;
  j3.points.insert(j3.points.end(), j1.points.begin(), j1.points.begin() + from_j1);
  j3.points.insert(j3.points.end(), j2.points.begin(), j2.points.begin() + from_j2);
  return j3;
}

IntersectionSet cascade_intersections_II(const Segment& s1, const Segment& s2,
                                         const Segment& s3, const SubsetRule& subset) {
  const auto j1 = intersect(s1, s2, "J1");
  const auto j2 = intersect(s1, s3, "J2");
  if (j1.size() == 0 && j2.size() == 0) {
    fail(ErrorCode::kInsufficientEntropy, "both intersections are empty");
  }
  return subset(j1, j2);
}

namespace {
constexpr const char* kSigHeader = "opufid-sig v1";
}

void write_signature(std::ostream& out, const DigitalSignature& sig) {
  KeyValueDoc doc;
  doc.header = kSigHeader;
  doc.set("scheme", to_string(sig.scheme()));
  doc.set("rows", std::to_string(sig.rows()));
  doc.set("cols", std::to_string(sig.cols()));
  doc.set("key_len", std::to_string(sig.key_len()));
  doc.set("challenge_id", sig.challenge_id);
  doc.set("source", sig.source);
  doc.set("bits", bits_to_hex(sig.bits()));
  doc.write(out);
}

DigitalSignature read_signature(std::istream& in) {
  const auto doc = KeyValueDoc::read(in);
  if (doc.header != kSigHeader) {
    fail(ErrorCode::kParse, "line 1: expected '" + std::string(kSigHeader) + "'");
  }
  const auto rows = parse_u64(doc.get("rows"), "rows");
  const auto cols = parse_u64(doc.get("cols"), "cols");
  DigitalSignature sig(rows, cols, hex_to_bits(doc.get("bits"), rows * cols),
                       parse_u64(doc.get("key_len"), "key_len"),
                       scheme_from_string(doc.get("scheme")));
  if (doc.has("challenge_id")) sig.challenge_id = doc.get("challenge_id");
  if (doc.has("source")) sig.source = doc.get("source");
  return sig;
}

void save_signature(const std::string& path, const DigitalSignature& sig) {
  std::ostringstream out;
  write_signature(out, sig);
  write_file_atomically(path, out.str());
}

DigitalSignature load_signature(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_signature(in);
}

void write_pbm(std::ostream& out, const DigitalSignature& sig) {
  out << "P1\n" << sig.cols() << ' ' << sig.rows() << '\n';
  for (std::size_t r = 0; r < sig.rows(); ++r) {
    for (std::size_t c = 0; c < sig.cols(); ++c) {
      if (c) out << ' ';
      out << static_cast<int>(sig.at(r, c));
    }
    out << '\n';
  }
}

DigitalSignature read_pbm(std::istream& in) {
  // Tokenize while dropping comments; P1 pixels may run together.
  std::string text, line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    text += line.substr(0, hash);
    text += '\n';
  }
  std::istringstream body(text);
  std::string magic;
  std::size_t cols = 0, rows = 0;
  if (!(body >> magic) || magic != "P1") fail(ErrorCode::kParse, "not a plain PBM (P1) file");
  if (!(body >> cols >> rows) || cols == 0 || rows == 0) {
    fail(ErrorCode::kParse, "bad PBM dimensions");
  }
  Bits bits;
  bits.reserve(rows * cols);
  char c;
  while (bits.size() < rows * cols && body.get(c)) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      fail(ErrorCode::kParse, std::string("bad PBM pixel '") + c + "'");
    }
  }
  if (bits.size() != rows * cols) fail(ErrorCode::kParse, "truncated PBM raster");
  return DigitalSignature(rows, cols, std::move(bits), 0, Scheme::kDirect);
}

void export_qr(const DigitalSignature& sig, const std::string& path) {
  std::ostringstream out;
  write_pbm(out, sig);
  write_file_atomically(path, out.str());
}

DigitalSignature import_qr(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_pbm(in);
}

}  // namespace opufid
