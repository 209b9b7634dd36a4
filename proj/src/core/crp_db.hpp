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

// Challenge-response store with Hamming-distance matching. Callers may hold
// many concurrent readers or one writer; `save` replaces the file atomically.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "core/ofdr.hpp"
#include "core/signature.hpp"
#include "core/text.hpp"

namespace opufid {

struct CrpRecord {
  std::string record_id;
  std::string subsystem_label;
  Challenge challenge;
  DigitalSignature response;
  std::optional<std::string> key_id;
};

/// Means of the genuine (M_U) and impostor (M_V) HD distributions.
struct Calibration {
  double m_u = 0.0;
  double m_v = 0.0;
};

enum class MatchOutcome { kMatched, kNoMatch, kAmbiguous };
const char* to_string(MatchOutcome outcome);

struct MatchResult {
  MatchOutcome outcome = MatchOutcome::kNoMatch;
  std::optional<std::string> best_record_id;
  std::optional<std::size_t> best_hd;
  double threshold = 0.0;
  std::size_t compared = 0;
  std::size_t skipped_shape = 0;
  std::size_t within_threshold = 0;
};

class CrpDatabase {
 public:
  explicit CrpDatabase(std::string db_id, Bits db_key = {},
                       std::optional<Calibration> calibration = std::nullopt);

  const std::string& id() const { return db_id_; }
  const Bits& key() const { return db_key_; }
  const std::optional<Calibration>& calibration() const { return calibration_; }
  void set_calibration(Calibration calibration) { calibration_ = calibration; }
  const std::vector<CrpRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Appends a record; duplicate (label, challenge_id) is a conflict. When
  /// the database is bound to a file the file is rewritten before returning.
  std::string enroll(std::string subsystem_label, Challenge challenge,
                     DigitalSignature response, std::optional<std::string> key_id = {});

  const CrpRecord* find(const std::string& record_id) const;
  bool has_label(const std::string& subsystem_label, const std::string& challenge_id) const;

  /// `matched` iff exactly one comparable record has HD <= t.
  MatchResult lookup(const DigitalSignature& probe, double t) const;
  /// Threshold from the stored calibration at gamma = 0.5.
  MatchResult lookup(const DigitalSignature& probe) const;
  double default_threshold(std::size_t n_bits) const;

  void bind(std::filesystem::path path) { backing_ = std::move(path); }

  void write(std::ostream& out) const;
  static CrpDatabase read(std::istream& in);
  void save(const std::string& path) const;
  /// Loads and binds to `path`.
  static CrpDatabase load(const std::string& path);

 private:
  std::string db_id_;
  Bits db_key_;
  std::optional<Calibration> calibration_;
  std::vector<CrpRecord> records_;
  std::optional<std::filesystem::path> backing_;
};

/// True when both databases hold the same records apart from the key segment
/// of each response.
bool same_records_except_key(const CrpDatabase& a, const CrpDatabase& b);

}  // namespace opufid
