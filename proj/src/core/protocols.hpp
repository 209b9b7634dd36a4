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

// Identification sessions: direct sub-system identification by a central
// node, the path protocols over two- and three-span chains, and the
// CN-assisted two-database protocol with key verification.
//
// Every session returns a transcript whose step labels follow the numbered
// listing of its protocol; a session that fails stops at the failing step.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/crp_db.hpp"
#include "core/fiber_model.hpp"
#include "core/ofdr.hpp"
#include "core/signature.hpp"

namespace opufid {

enum class Role { kCentralNode, kUser, kAdversary };
const char* to_string(Role role);

struct HeldKey {
  std::string key_id;
  Bits bits;
};

struct Party {
  Role role = Role::kUser;
  std::string label;
  Target target;
  std::vector<HeldKey> keys;
};

struct Message {
  std::string from;
  std::string to;
  std::string kind;  // challenge | id | key-request | key-reply
  std::optional<Challenge> challenge;
  std::optional<DigitalSignature> id;
  std::optional<std::string> key_id;
};

/// In-process message transport. An interceptor sees, and may rewrite,
/// every message in transit.
class Channel {
 public:
  using Interceptor = std::function<void(Message&)>;

  void set_interceptor(Interceptor interceptor) { interceptor_ = std::move(interceptor); }
  Message deliver(Message message);
  std::size_t delivered() const { return delivered_; }

 private:
  Interceptor interceptor_;
  std::size_t delivered_ = 0;
};

struct TranscriptStep {
  std::string step;
  std::string actor;
  std::string summary;
};

class SessionTranscript {
 public:
  void add(std::string step, std::string actor, std::string summary);
  void finish(std::string outcome);

  const std::vector<TranscriptStep>& steps() const { return steps_; }
  std::vector<std::string> step_labels() const;
  const std::string& outcome() const { return outcome_; }
  bool finished() const { return !outcome_.empty(); }
  bool identified() const { return outcome_ == "identified"; }
  /// 0 identified, 2 rejected, 3 failed.
  int exit_code() const;

  std::map<std::string, std::size_t> counters;

  void write(std::ostream& out) const;
  std::string text() const;

 private:
  std::vector<TranscriptStep> steps_;
  std::string outcome_;
};

struct DirectOptions {
  double snr_db = kNoiseless;
  std::uint64_t noise_seed = 0;
  Bits key;
  std::optional<double> threshold;  // defaults to the database calibration
};

/// CN measures the user's pigtail, signs it and looks it up.
SessionTranscript identify_subsystem(const Party& cn, const Party& user,
                                     const Challenge& challenge, const CrpDatabase& db,
                                     const DirectOptions& options = {});

/// Noiseless direct signature of a target, for enrollment.
DigitalSignature reference_signature(const Target& target, const Challenge& challenge,
                                     std::span<const std::uint8_t> key);

enum class PathProtocol { kTwoSubsystems = 1, kCascadedI = 2, kCascadedII = 3 };

struct Window {
  double start_m = 0.0;
  double length_m = 0.0;
};

struct PathOptions {
  std::vector<Window> windows;
  int adc_bits = 6;
  double snr_db = kNoiseless;
  std::uint64_t noise_seed = 0;
  Bits key;
  std::optional<std::size_t> side;
  std::optional<double> threshold;
  SubsetRule subset = half_and_half;
};

/// Path ID side used when none is requested: 16, or 14 for the lossier
/// cascade I.
std::size_t default_side(PathProtocol protocol);

/// 26 cm windows centred in each span of `chain`.
std::vector<Window> centred_windows(const FiberChain& chain, double length_m = 0.26);

/// The path ID a protocol derives from `chain`; throws on failure.
DigitalSignature path_signature(const FiberChain& chain, const Challenge& challenge,
                                PathProtocol protocol, const PathOptions& options);

std::string enroll_path(CrpDatabase& db, const std::string& label, const FiberChain& chain,
                        const Challenge& challenge, PathProtocol protocol,
                        const PathOptions& options);

SessionTranscript run_path_protocol(PathProtocol protocol, const FiberChain& chain,
                                    const std::string& claimed_label, const Challenge& challenge,
                                    const CrpDatabase& db, const PathOptions& options);

SessionTranscript protocol1_two_subsystems(const FiberChain& chain, const std::string& label,
                                           const Challenge& challenge, const CrpDatabase& db,
                                           const PathOptions& options);
SessionTranscript protocol2_cascaded(const FiberChain& chain, const std::string& label,
                                     const Challenge& challenge, const CrpDatabase& db,
                                     const PathOptions& options);
SessionTranscript protocol3_cascaded(const FiberChain& chain, const std::string& label,
                                     const Challenge& challenge, const CrpDatabase& db,
                                     const PathOptions& options);

struct Protocol4Options {
  double snr_db = kNoiseless;
  std::uint64_t seed = 0;
  /// Key the user concatenates; drawn from its held keys when unset.
  std::optional<std::string> chosen_key_id;
  /// Key the user names when asked; the chosen key when unset.
  std::optional<std::string> declared_key_id;
  std::optional<double> threshold;
};

/// Enrolls one target into both databases: identical 1-bit data followed by
/// each database's key, tagged with the key ids.
void enroll_dual(CrpDatabase& d1, const std::string& k1_id, CrpDatabase& d2,
                 const std::string& k2_id, const std::string& label, const Target& target,
                 const Challenge& challenge);

SessionTranscript protocol4_cn_assisted(const Party& cn, const Party& user,
                                        const CrpDatabase& d1, const CrpDatabase& d2,
                                        const Challenge& challenge,
                                        const Protocol4Options& options,
                                        Channel* channel = nullptr);

}  // namespace opufid
