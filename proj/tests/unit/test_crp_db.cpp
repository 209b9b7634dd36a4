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

#include <filesystem>
#include <sstream>

#include "core/crp_db.hpp"
#include "core/decision_stats.hpp"
#include "core/error.hpp"
#include "core/experiments.hpp"
#include "doctest.h"

using namespace opufid;

namespace {

DigitalSignature random_sig(std::uint64_t seed, std::size_t side = 16) {
  return DigitalSignature(side, side, random_bits(side * side, seed, 0), 0, Scheme::kDirect);
}

DigitalSignature flipped(const DigitalSignature& s, std::size_t n) {
  Bits b(s.bits().begin(), s.bits().end());
  for (std::size_t i = 0; i < n; ++i) b[i] ^= 1;
  return DigitalSignature(s.rows(), s.cols(), std::move(b), s.key_len(), s.scheme());
}

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "opufid_unit";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("enroll assigns sequential ids and rejects duplicates") {
  CrpDatabase db("D1");
  const Challenge c;
  CHECK(db.enroll("a", c, random_sig(1)) == "D1-000001");
  CHECK(db.enroll("b", c, random_sig(2)) == "D1-000002");
  CHECK(db.size() == 2);
  CHECK(db.has_label("a", "C1"));
  CHECK_FALSE(db.has_label("a", "C2"));
  try {
    db.enroll("a", c, random_sig(3));
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConflict);
  }
  Challenge c2;
  c2.challenge_id = "C2";
  CHECK_NOTHROW(db.enroll("a", c2, random_sig(3)));
  CHECK(db.find("D1-000002")->subsystem_label == "b");
  CHECK(db.find("D1-000009") == nullptr);
  CHECK_THROWS_AS(db.enroll("x\ty", c, random_sig(4)), Error);
  CHECK_THROWS_AS(db.enroll("", c, random_sig(4)), Error);
  CHECK_THROWS_AS(CrpDatabase("has space"), Error);
  CHECK_THROWS_AS(CrpDatabase("D", Bits{1, 0, 1}), Error);
}

TEST_CASE("lookup outcomes") {
  CrpDatabase db("D1");
  const Challenge c;
  CHECK(db.lookup(random_sig(1), 50).outcome == MatchOutcome::kNoMatch);

  for (std::uint64_t i = 0; i < 200; ++i) db.enroll("s" + std::to_string(i), c, random_sig(i));
  CHECK(db.size() == 200);

  auto m = db.lookup(random_sig(17), 50);
  CHECK(m.outcome == MatchOutcome::kMatched);
  CHECK(*m.best_hd == 0);
  CHECK(*m.best_record_id == "D1-000018");
  CHECK(m.compared == 200);

  m = db.lookup(flipped(random_sig(17), 20), 50);
  CHECK(m.outcome == MatchOutcome::kMatched);
  CHECK(*m.best_hd == 20);

  // Far from everything: random vs random is ~128 of 256.
  m = db.lookup(random_sig(99999), 50);
  CHECK(m.outcome == MatchOutcome::kNoMatch);
  CHECK(m.best_hd.has_value());

  // A generous threshold admits many records.
  m = db.lookup(random_sig(17), 200);
  CHECK(m.outcome == MatchOutcome::kAmbiguous);
  CHECK(m.within_threshold > 1);

  // Different shape is skipped, not compared.
  m = db.lookup(random_sig(17, 8), 50);
  CHECK(m.skipped_shape == 200);
  CHECK(m.compared == 0);
  CHECK(m.outcome == MatchOutcome::kNoMatch);
}

TEST_CASE("equal-HD ties resolve to the lowest record id") {
  CrpDatabase db("D1");
  const auto s = random_sig(5);
  db.enroll("a", Challenge{}, s);
  Challenge c2;
  c2.challenge_id = "C2";
  db.enroll("b", c2, s);
  const auto m = db.lookup(s, 10);
  CHECK(m.outcome == MatchOutcome::kAmbiguous);
  CHECK(*m.best_record_id == "D1-000001");
}

TEST_CASE("default threshold needs a calibration") {
  CrpDatabase db("D1");
  CHECK_THROWS_AS(db.default_threshold(4096), Error);
  db.set_calibration({144.06, 1994.08});
  CHECK(db.default_threshold(4096) == doctest::Approx(1069.07));
}

TEST_CASE("text round trip keeps records, keys and calibration") {
  const Bits key = random_bits(8, 7, 0);
  CrpDatabase db("D2", key, Calibration{12.5, 130.25});
  Bits raw = random_bits(256, 3, 0);
  std::copy(key.begin(), key.end(), raw.end() - 8);
  db.enroll("user-1", default_path_challenge(3),
            DigitalSignature(16, 16, raw, 0, Scheme::kIntersection), std::string("K2"));
  db.enroll("user-2", Challenge{}, random_sig(4));

  std::ostringstream out;
  db.write(out);
  std::istringstream in(out.str());
  const auto back = CrpDatabase::read(in);
  CHECK(back.id() == "D2");
  CHECK(back.key() == key);
  REQUIRE(back.calibration());
  CHECK(back.calibration()->m_u == 12.5);
  CHECK(back.calibration()->m_v == 130.25);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = db.records()[i];
    const auto& b = back.records()[i];
    CHECK(a.record_id == b.record_id);
    CHECK(a.subsystem_label == b.subsystem_label);
    CHECK(a.challenge == b.challenge);
    CHECK(a.response == b.response);
    CHECK(a.key_id == b.key_id);
  }
  CHECK(back.records()[0].response.key_len() == 8);

  std::ostringstream again;
  back.write(again);
  CHECK(again.str() == out.str());
}

TEST_CASE("parse errors name the line") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return CrpDatabase::read(in);
  };
  auto message = [&](const std::string& text) -> std::string {
    try {
      parse(text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParse);
      return e.what();
    }
    return "";
  };
  CHECK(message("nope v1 D\n").find("line 1") != std::string::npos);
  CHECK(message("opufid-db v9 D\nkey -\ncalib -\n").find("version") != std::string::npos);
  CHECK(message("opufid-db v1 D\nkey zz\ncalib -\n").find("line 2") != std::string::npos);
  CHECK(message("opufid-db v1 D\nkey -\ncalib x\n").find("line 3") != std::string::npos);
  CHECK(message("opufid-db v1 D\nkey -\ncalib -\nD-000001\ta\tC1\n").find("line 4") !=
        std::string::npos);

  CrpDatabase db("D");
  db.enroll("a", Challenge{}, random_sig(1));
  std::ostringstream out;
  db.write(out);
  auto text = out.str();
  text.resize(text.size() - 10);
  CHECK(message(text).find("line 4") != std::string::npos);
  CHECK(parse("opufid-db v1 D\nkey -\ncalib -\n").size() == 0);
}

TEST_CASE("dual databases differ only in the key segment") {
  const Bits k1 = random_bits(8, 1, 0), k2 = random_bits(8, 2, 0);
  CrpDatabase d1("D1", k1), d2("D2", k2);
  Bits data = random_bits(248, 9, 0);
  Bits a = data, b = data;
  a.insert(a.end(), k1.begin(), k1.end());
  b.insert(b.end(), k2.begin(), k2.end());
  d1.enroll("u", Challenge{}, DigitalSignature(16, 16, a, 8, Scheme::kDirect), "K1");
  d2.enroll("u", Challenge{}, DigitalSignature(16, 16, b, 8, Scheme::kDirect), "K2");
  CHECK(same_records_except_key(d1, d2));

  CrpDatabase d3("D3", k2);
  d3.enroll("u", Challenge{}, flipped(DigitalSignature(16, 16, b, 8, Scheme::kDirect), 1), "K2");
  CHECK_FALSE(same_records_except_key(d1, d3));
  CHECK_FALSE(same_records_except_key(d1, CrpDatabase("D4")));
}

TEST_CASE("a bound database persists each enrollment") {
  const auto path = scratch("bound.db");
  CrpDatabase db("B");
  db.save(path.string());
  auto bound = CrpDatabase::load(path.string());
  bound.enroll("a", Challenge{}, random_sig(1));
  CHECK(CrpDatabase::load(path.string()).size() == 1);

  // Save into a missing directory fails and leaves memory unchanged.
  auto orphan = CrpDatabase::load(path.string());
  orphan.bind(path.parent_path() / "missing" / "x.db");
  CHECK_THROWS_AS(orphan.enroll("b", Challenge{}, random_sig(2)), Error);
  CHECK(orphan.size() == 1);
}
