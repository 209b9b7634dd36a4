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

#include <random>
#include <set>
#include <sstream>

#include "core/decision_stats.hpp"
#include "core/error.hpp"
#include "core/fiber_model.hpp"
#include "core/ofdr.hpp"
#include "core/signature.hpp"
#include "doctest.h"
#include "unit/oracles.hpp"

using namespace opufid;

namespace {

Segment line(double x0, double y0, double x1, double y1, const char* label = "") {
  return Segment{{x0, x1}, {y0, y1}, label};
}

Segment random_segment(std::mt19937_64& rng, std::size_t n, double start) {
  std::uniform_real_distribution<double> step(0.1, 1.0), amp(0.0, 1.0);
  Segment s;
  double x = start;
  for (std::size_t i = 0; i < n; ++i) {
    s.positions_m.push_back(x);
    s.amplitudes.push_back(amp(rng));
    x += step(rng);
  }
  return s;
}

void check_against_oracle(const Segment& a, const Segment& b) {
  const auto got = intersect(a, b);
  const auto ref =
      oracle::polyline_crossings(a.positions_m, a.amplitudes, b.positions_m, b.amplitudes);
  REQUIRE(got.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(std::abs(got.points[i].position_m - ref[i].first) <= 1e-9);
    CHECK(std::abs(got.points[i].amplitude - ref[i].second) <= 1e-9);
  }
}

ReflectivityProfile two_span_profile(std::uint64_t s1, std::uint64_t s2) {
  const auto chain = FiberChain::concatenate(
      {Fiber::synthesize(0.5, 1000.0, s1), Fiber::synthesize(0.5, 1000.0, s2)},
      {kConnectorReflectivity, kConnectorReflectivity, kConnectorReflectivity});
  return reflectivity_profile(chain, default_path_challenge(2));
}

}  // namespace

TEST_CASE("direct signature: 4000 samples and 96 key bits make 64x64") {
  const auto t = acquire(Fiber::synthesize(0.5, 1000.0, 1), Challenge{});
  const Bits zeros(96, 0);
  const auto sig = make_signature_direct(t, zeros);
  CHECK(sig.rows() == 64);
  CHECK(sig.cols() == 64);
  CHECK(sig.key_len() == 96);
  CHECK(sig.scheme() == Scheme::kDirect);
  for (std::size_t i = 4000; i < 4096; ++i) CHECK(sig.bits()[i] == 0);
  CHECK(sig.key_bits().size() == 96);
  CHECK(sig.data_bits().size() == 4000);

  const auto again = make_signature_direct(acquire(Fiber::synthesize(0.5, 1000.0, 1), Challenge{}), zeros);
  CHECK(again == sig);
  CHECK(hamming(again, sig) == 0);

  // Median split: exactly half the data bits are ones.
  std::size_t ones = 0;
  for (auto b : sig.data_bits()) ones += b;
  CHECK(ones == 2000);
}

TEST_CASE("direct signature rejects non-square totals and bad keys") {
  const auto t = acquire(Fiber::synthesize(0.5, 1000.0, 1), Challenge{});
  CHECK_THROWS_AS(make_signature_direct(t, Bits(95, 0)), Error);
  CHECK_THROWS_AS(make_signature_direct(t, Bits(96, 2)), Error);
}

TEST_CASE("select_window: inclusive bounds and normalization") {
  ReflectivityProfile p;
  p.resolution_m = 0.001;
  for (int i = 0; i <= 1000; ++i) {
    p.distance_m.push_back(i * 0.001);
    p.magnitude.push_back(1.0 + (i % 7));
  }
  const auto w = select_window(p, 0.1, 0.26, "S1");
  CHECK(w.size() == 261);
  CHECK(w.label == "S1");
  CHECK(*std::max_element(w.amplitudes.begin(), w.amplitudes.end()) == 1.0);

  const auto one = select_window(p, 0.005, 0.0);
  REQUIRE(one.size() == 1);
  CHECK(one.amplitudes[0] == 1.0);

  try {
    select_window(p, 0.9, 0.26);
    FAIL("expected out-of-range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfRange);
  }
  std::fill(p.magnitude.begin(), p.magnitude.end(), 0.0);
  try {
    select_window(p, 0.1, 0.1);
    FAIL("expected degenerate-segment");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSegment);
  }
}

TEST_CASE("intersect: crossing lines meet at (0.5, 0.5)") {
  const auto j = intersect(line(0, 0, 1, 1, "a"), line(0, 1, 1, 0, "b"), "J");
  REQUIRE(j.size() == 1);
  CHECK(j.points[0].position_m == doctest::Approx(0.5));
  CHECK(j.points[0].amplitude == doctest::Approx(0.5));
  CHECK(j.parents == std::vector<std::string>{"a", "b"});
}

TEST_CASE("intersect: coincidence is not a crossing") {
  std::mt19937_64 rng(5);
  const auto s = random_segment(rng, 50, 0.0);
  CHECK(intersect(s, s).size() == 0);
  // Touching at one point without changing sides: no crossing either.
  CHECK(intersect(Segment{{0, 1, 2}, {0, 1, 0}, ""}, Segment{{0, 1, 2}, {1, 1, 1}, ""}).size() == 0);
  // Lone zero between opposite signs: one crossing at the grid point.
  const auto j = intersect(Segment{{0, 1, 2}, {0, 1, 2}, ""}, Segment{{0, 1, 2}, {1, 1, 1}, ""});
  REQUIRE(j.size() == 1);
  CHECK(j.points[0].position_m == 1.0);
}

TEST_CASE("intersect aligns segments to a common origin") {
  auto a = line(0, 0, 1, 1);
  auto b = line(5, 1, 6, 0);
  const auto j = intersect(a, b);
  REQUIRE(j.size() == 1);
  CHECK(j.points[0].position_m == doctest::Approx(0.5));
}

TEST_CASE("intersect: empty overlap") {
  try {
    intersect(Segment{{1.0}, {0.5}, ""}, line(0, 0, 1, 1));
    FAIL("expected empty-overlap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyOverlap);
  }
}

TEST_CASE("intersect equals the O(n^2) crossing oracle on random polylines") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_segment(rng, 20 + trial, 3.0 * trial);
    const auto b = random_segment(rng, 35 - trial / 2, -1.0 * trial);
    check_against_oracle(a, b);
  }
}

TEST_CASE("intersect equals the oracle on real profile windows") {
  const auto p = two_span_profile(1, 2);
  const auto s1 = select_window(p, 0.12, 0.26, "S1");
  const auto s2 = select_window(p, 0.62, 0.26, "S2");
  check_against_oracle(s1, s2);
}

TEST_CASE("intersection properties: ascending, inside the overlap, symmetric positions") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_segment(rng, 30, 0.0);
    const auto b = random_segment(rng, 25, 2.0);
    const auto ab = intersect(a, b);
    const auto ba = intersect(b, a);
    REQUIRE(ab.size() == ba.size());
    const double hi = std::min(a.positions_m.back() - a.positions_m.front(),
                               b.positions_m.back() - b.positions_m.front());
    for (std::size_t i = 0; i < ab.size(); ++i) {
      CHECK(ab.points[i].position_m >= 0.0);
      CHECK(ab.points[i].position_m <= hi);
      if (i) CHECK(ab.points[i - 1].position_m < ab.points[i].position_m);
      CHECK(ab.points[i].position_m == doctest::Approx(ba.points[i].position_m));
      CHECK(ab.points[i].amplitude == doctest::Approx(ba.points[i].amplitude));
    }
  }
}

TEST_CASE("quantize_intersections: median split, key, square shape") {
  IntersectionSet s;
  for (double a : {0.1, 0.9, 0.2, 0.8}) s.points.push_back({0.0, a});
  const auto id = quantize_intersections(s);
  CHECK(id.rows() == 2);
  CHECK(id.cols() == 2);
  CHECK(Bits(id.bits().begin(), id.bits().end()) == Bits{0, 1, 0, 1});
  CHECK(id.scheme() == Scheme::kIntersection);

  IntersectionSet flat;
  for (int i = 0; i < 9; ++i) flat.points.push_back({0.0, 0.5});
  const auto flat_id = quantize_intersections(flat);
  for (auto b : flat_id.bits()) CHECK(b == 1);

  // 5 points + 4 key bits = 9 = 3x3, key kept at the end.
  IntersectionSet five;
  for (double a : {0.1, 0.9, 0.2, 0.8, 0.5}) five.points.push_back({0.0, a});
  const auto keyed = quantize_intersections(five, Bits{1, 1, 0, 1});
  CHECK(keyed.rows() == 3);
  CHECK(keyed.key_len() == 4);
  CHECK(Bits(keyed.key_bits().begin(), keyed.key_bits().end()) == Bits{1, 1, 0, 1});

  IntersectionSet three;
  for (double a : {0.1, 0.9, 0.2}) three.points.push_back({0.0, a});
  try {
    quantize_intersections(three);
    FAIL("expected insufficient-entropy");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientEntropy);
  }
  CHECK_THROWS_AS(quantize_intersections(five, {}, 3), Error);
  CHECK(quantize_intersections(five, {}, 2).rows() == 2);
}

TEST_CASE("two-span intersection bits are half ones") {
  const auto p = two_span_profile(1, 2);
  auto j = intersect(select_window(p, 0.12, 0.26), select_window(p, 0.62, 0.26));
  const std::size_t side = 16;
  REQUIRE(j.size() >= side * side);
  j.points.resize(side * side);
  const auto id = quantize_intersections(j, {}, side);
  std::size_t ones = 0;
  for (auto b : id.bits()) ones += b;
  CHECK(std::abs(static_cast<long>(ones) - static_cast<long>(side * side / 2)) <= 1);
}

TEST_CASE("cascade I: chained oracle, coincidence and empty J1") {
  // Triangle of lines.
  const auto s1 = line(0, 0, 2, 2, "S1");
  const auto s2 = line(0, 2, 2, 0, "S2");
  const auto s3 = line(0, 1.5, 2, 0.5, "S3");
  const auto ref1 = oracle::polyline_crossings(s1.positions_m, s1.amplitudes, s2.positions_m,
                                               s2.amplitudes);
  REQUIRE(ref1.size() == intersect(s1, s2).size());
  // One point has no pieces, so the chained oracle and J2 are both empty.
  REQUIRE(ref1.size() == 1);
  CHECK(cascade_intersections_I(s1, s2, s3).size() == 0);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_segment(rng, 40, 0.0);
    const auto b = random_segment(rng, 40, 0.0);
    const auto c = random_segment(rng, 40, 0.0);
    const auto r1 = oracle::polyline_crossings(a.positions_m, a.amplitudes, b.positions_m, b.amplitudes);
    std::vector<double> xs, ys;
    for (const auto& [x, y] : r1) {
      xs.push_back(x);
      ys.push_back(y);
    }
    const auto got = cascade_intersections_I(a, b, c);
    if (xs.size() < 2) {
      CHECK(got.size() == 0);
      continue;
    }
    const auto r2 = oracle::polyline_crossings(xs, ys, c.positions_m, c.amplitudes);
    REQUIRE(got.size() == r2.size());
    for (std::size_t i = 0; i < r2.size(); ++i) {
      CHECK(std::abs(got.points[i].position_m - r2[i].first) <= 1e-9);
    }
  }

  // s3 identical to J1 as a segment: no crossing.
  const auto a = random_segment(rng, 40, 0.0);
  const auto b = random_segment(rng, 40, 0.0);
  const auto jj = intersect(a, b, "J1");
  REQUIRE(jj.size() >= 2);
  CHECK(cascade_intersections_I(a, b, jj.as_segment()).size() == 0);

  // Parallel, non-touching: empty J1, and quantizing it fails.
  const auto empty = cascade_intersections_I(line(0, 0, 1, 0), line(0, 1, 1, 1), s3);
  CHECK(empty.size() == 0);
  CHECK_THROWS_AS(quantize_intersections(empty), Error);
}

TEST_CASE("half_and_half subset rule") {
  auto make = [](std::size_t n, double base) {
    IntersectionSet s;
    for (std::size_t i = 0; i < n; ++i) s.points.push_back({base + i, 0.1 * i});
    return s;
  };
  CHECK(half_and_half(make(4, 0), make(4, 10)).size() == 4);
  CHECK(half_and_half(make(6, 0), make(0, 10)).size() == 3);
  CHECK(half_and_half(make(5, 0), make(3, 10)).size() == 4);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_segment(rng, 30, 0.0);
    const auto b = random_segment(rng, 30, 0.0);
    const auto c = random_segment(rng, 30, 0.0);
    const auto j1 = intersect(a, b);
    const auto j2 = intersect(a, c);
    const auto j3 = cascade_intersections_II(a, b, c);
    std::set<std::pair<double, double>> pool;
    for (const auto& p : j1.points) pool.insert({p.position_m, p.amplitude});
    for (const auto& p : j2.points) pool.insert({p.position_m, p.amplitude});
    for (const auto& p : j3.points) CHECK(pool.count({p.position_m, p.amplitude}) == 1);
  }
}

TEST_CASE("signature text round trip") {
  const auto t = acquire(Fiber::synthesize(0.5, 1000.0, 6), Challenge{});
  const auto sig = make_signature_direct(t, Bits(96, 1));
  std::ostringstream out;
  write_signature(out, sig);
  CHECK(out.str().rfind("opufid-sig v1\n", 0) == 0);
  std::istringstream in(out.str());
  CHECK(read_signature(in) == sig);
}

TEST_CASE("PBM golden bytes and round trip") {
  const DigitalSignature eye(2, 2, Bits{1, 0, 0, 1}, 0, Scheme::kDirect);
  std::ostringstream out;
  write_pbm(out, eye);
  CHECK(out.str() == "P1\n2 2\n1 0\n0 1\n");

  const auto t = acquire(Fiber::synthesize(0.5, 1000.0, 6), Challenge{});
  const auto sig = make_signature_direct(t, Bits(96, 0));
  std::ostringstream big;
  write_pbm(big, sig);
  CHECK(big.str().rfind("P1\n64 64\n", 0) == 0);
  std::istringstream in(big.str());
  const auto back = read_pbm(in);
  CHECK(back.same_shape(sig));
  CHECK(Bits(back.bits().begin(), back.bits().end()) == Bits(sig.bits().begin(), sig.bits().end()));

  std::istringstream packed("P1\n# comment\n3 1\n101\n");
  const auto row = read_pbm(packed);
  CHECK(Bits(row.bits().begin(), row.bits().end()) == Bits{1, 0, 1});
  std::istringstream truncated("P1\n2 2\n1 0 1\n");
  CHECK_THROWS_AS(read_pbm(truncated), Error);
}
