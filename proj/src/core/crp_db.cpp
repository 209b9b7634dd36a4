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

#include "core/crp_db.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/decision_stats.hpp"
#include "core/error.hpp"

namespace opufid {

namespace {

constexpr const char* kDbMagic = "opufid-db";
constexpr const char* kDbVersion = "v1";

void check_field(const std::string& value, const char* what) {
  require(value.find_first_of("\t\n") == std::string::npos,
          std::string(what) + " may not contain tabs or newlines");
}

}  // namespace

const char* to_string(MatchOutcome outcome) {
  switch (outcome) {
    case MatchOutcome::kMatched: return "matched";
    case MatchOutcome::kNoMatch: return "no_match";
    case MatchOutcome::kAmbiguous: return "ambiguous";
  }
  return "?";
}

CrpDatabase::CrpDatabase(std::string db_id, Bits db_key, std::optional<Calibration> calibration)
    : db_id_(std::move(db_id)), db_key_(std::move(db_key)), calibration_(calibration) {
  require(!db_id_.empty() && db_id_.find_first_of(" \t\n") == std::string::npos,
          "database id must be a nonempty word");
  require(db_key_.size() % 4 == 0, "database key length must be a multiple of 4 bits");
  for (auto b : db_key_) require(b <= 1, "database key bits must be 0 or 1");
}

std::string CrpDatabase::enroll(std::string subsystem_label, Challenge challenge,
                                DigitalSignature response, std::optional<std::string> key_id) {
  challenge.validate();
  check_field(subsystem_label, "subsystem label");
  require(!subsystem_label.empty(), "subsystem label must be nonempty");
  require(response.size() > 0, "empty response");
  if (key_id) {
    check_field(*key_id, "key id");
    require(!key_id->empty() && *key_id != "-", "key id must be a nonempty label");
  }
  if (has_label(subsystem_label, challenge.challenge_id)) {
    fail(ErrorCode::kConflict, "'" + subsystem_label + "' is already enrolled under challenge '" +
                                   challenge.challenge_id + "'");
  }
  // Stored form: provenance is the record itself and the key segment is the
  // database key when the record names one. This is exactly what a reload
  // reconstructs.
  const std::size_t key_len = key_id ? db_key_.size() : 0;
  require(key_len <= response.size(), "database key longer than the response");
  response = DigitalSignature(response.rows(), response.cols(),
                              Bits(response.bits().begin(), response.bits().end()), key_len,
                              response.scheme());
  response.challenge_id = challenge.challenge_id;
  response.source = subsystem_label;

  char id[64];
  std::snprintf(id, sizeof id, "%s-%06zu", db_id_.c_str(), records_.size() + 1);
  records_.push_back({id, std::move(subsystem_label), std::move(challenge), std::move(response),
                      std::move(key_id)});
  if (backing_) {
    try {
      save(backing_->string());
    } catch (...) {
      records_.pop_back();
      throw;
    }
  }
  return id;
}

const CrpRecord* CrpDatabase::find(const std::string& record_id) const {
  for (const auto& r : records_) {
    if (r.record_id == record_id) return &r;
  }
  return nullptr;
}

bool CrpDatabase::has_label(const std::string& subsystem_label,
                            const std::string& challenge_id) const {
  return std::any_of(records_.begin(), records_.end(), [&](const CrpRecord& r) {
    return r.subsystem_label == subsystem_label && r.challenge.challenge_id == challenge_id;
  });
}

MatchResult CrpDatabase::lookup(const DigitalSignature& probe, double t) const {
  require(!std::isnan(t), "threshold is NaN");
  MatchResult result;
  result.threshold = t;
  for (const auto& r : records_) {
    if (!r.response.same_shape(probe) || r.response.scheme() != probe.scheme()) {
      ++result.skipped_shape;
      continue;
    }
    ++result.compared;
    const auto hd = hamming(r.response, probe);
    if (static_cast<double>(hd) <= t) ++result.within_threshold;
    // Lowest HD wins; record id breaks ties so record order never matters.
    if (!result.best_hd || hd < *result.best_hd ||
        (hd == *result.best_hd && r.record_id < *result.best_record_id)) {
      result.best_hd = hd;
      result.best_record_id = r.record_id;
    }
  }
  if (result.within_threshold == 1) {
    result.outcome = MatchOutcome::kMatched;
  } else if (result.within_threshold > 1) {
    result.outcome = MatchOutcome::kAmbiguous;
  }
  return result;
}

double CrpDatabase::default_threshold(std::size_t n_bits) const {
  if (!calibration_) {
    fail(ErrorCode::kInvalidParameter,
         "database '" + db_id_ + "' has no calibration; pass a threshold");
  }
  return threshold({0.5, calibration_->m_u, calibration_->m_v, n_bits});
}

MatchResult CrpDatabase::lookup(const DigitalSignature& probe) const {
  return lookup(probe, default_threshold(probe.size()));
}

void CrpDatabase::write(std::ostream& out) const {
  out << kDbMagic << ' ' << kDbVersion << ' ' << db_id_ << '\n';
  out << "key " << (db_key_.empty() ? std::string("-") : bits_to_hex(db_key_)) << '\n';
  if (calibration_) {
    out << "calib " << format_exact(calibration_->m_u) << ' ' << format_exact(calibration_->m_v)
        << '\n';
  } else {
    out << "calib -\n";
  }
  for (const auto& r : records_) {
    out << r.record_id << '\t' << r.subsystem_label << '\t' << r.challenge.challenge_id << '\t'
        << encode_challenge_params(r.challenge) << '\t' << to_string(r.response.scheme()) << '\t'
        << r.response.rows() << '\t' << r.response.cols() << '\t' << r.key_id.value_or("-")
        << '\t' << bits_to_hex(r.response.bits()) << '\n';
  }
}

CrpDatabase CrpDatabase::read(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto parse_error = [&](const std::string& what) -> Error {
    return Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + what);
  };

  ++line_no;
  if (!std::getline(in, line)) throw parse_error("missing header");
  const auto header = split(trim(line), ' ');
  if (header.size() != 3 || header[0] != kDbMagic) throw parse_error("not an opufid database");
  if (header[1] != kDbVersion) throw parse_error("unsupported version '" + header[1] + "'");

  ++line_no;
  if (!std::getline(in, line)) throw parse_error("missing key line");
  const auto key_line = split(trim(line), ' ');
  if (key_line.size() != 2 || key_line[0] != "key") throw parse_error("expected 'key <hex>'");
  Bits key;
  try {
    if (key_line[1] != "-") key = hex_to_bits(key_line[1], key_line[1].size() * 4);
  } catch (const Error& e) {
    throw parse_error(e.what());
  }

  ++line_no;
  if (!std::getline(in, line)) throw parse_error("missing calib line");
  const auto calib_line = split(trim(line), ' ');
  std::optional<Calibration> calibration;
  if (calib_line.size() == 3 && calib_line[0] == "calib") {
    try {
      calibration = Calibration{parse_double(calib_line[1], "m_u"),
                                parse_double(calib_line[2], "m_v")};
    } catch (const Error& e) {
      throw parse_error(e.what());
    }
  } else if (!(calib_line.size() == 2 && calib_line[0] == "calib" && calib_line[1] == "-")) {
    throw parse_error("expected 'calib <m_u> <m_v>' or 'calib -'");
  }

  CrpDatabase db(header[2], std::move(key), calibration);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = split(line, '\t');
    if (f.size() != 9) {
      throw parse_error("expected 9 tab-separated fields, got " + std::to_string(f.size()));
    }
    try {
      CrpRecord r;
      r.record_id = f[0];
      r.subsystem_label = f[1];
      r.challenge = decode_challenge_params(f[2], f[3]);
      const auto rows = parse_u64(f[5], "rows");
      const auto cols = parse_u64(f[6], "cols");
      if (f[7] != "-") r.key_id = f[7];
      const std::size_t key_len = r.key_id ? db.db_key_.size() : 0;
      r.response = DigitalSignature(rows, cols, hex_to_bits(f[8], rows * cols), key_len,
                                    scheme_from_string(f[4]));
      r.response.challenge_id = r.challenge.challenge_id;
      r.response.source = r.subsystem_label;
      if (db.find(r.record_id)) throw Error(ErrorCode::kParse, "duplicate record id");
      db.records_.push_back(std::move(r));
    } catch (const Error& e) {
      throw parse_error(e.what());
    }
  }
  return db;
}

void CrpDatabase::save(const std::string& path) const {
  std::ostringstream out;
  write(out);
  write_file_atomically(path, out.str());
}

CrpDatabase CrpDatabase::load(const std::string& path) {
  std::istringstream in(read_file(path));
  auto db = read(in);
  db.bind(path);
  return db;
}

bool same_records_except_key(const CrpDatabase& a, const CrpDatabase& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& ra = a.records()[i];
    const auto& rb = b.records()[i];
    if (ra.subsystem_label != rb.subsystem_label || !(ra.challenge == rb.challenge) ||
        !ra.response.same_shape(rb.response) || ra.response.key_len() != rb.response.key_len()) {
      return false;
    }
    const auto da = ra.response.data_bits();
    const auto db = rb.response.data_bits();
    if (!std::equal(da.begin(), da.end(), db.begin(), db.end())) return false;
  }
  return true;
}

}  // namespace opufid
