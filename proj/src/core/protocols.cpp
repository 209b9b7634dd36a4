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

#include "core/protocols.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "core/decision_stats.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace opufid {

const char* to_string(Role role) {
  switch (role) {
    case Role::kCentralNode: return "cn";
    case Role::kUser: return "user";
    case Role::kAdversary: return "adversary";
  }
  return "?";
}

Message Channel::deliver(Message message) {
  if (interceptor_) interceptor_(message);
  ++delivered_;
  return message;
}

void SessionTranscript::add(std::string step, std::string actor, std::string summary) {
  require(!finished(), "transcript already has an outcome");
  steps_.push_back({std::move(step), std::move(actor), std::move(summary)});
}

void SessionTranscript::finish(std::string outcome) {
  require(!finished(), "transcript outcome is set exactly once");
  outcome_ = std::move(outcome);
}

std::vector<std::string> SessionTranscript::step_labels() const {
  std::vector<std::string> labels;
  for (const auto& s : steps_) labels.push_back(s.step);
  return labels;
}

int SessionTranscript::exit_code() const {
  if (outcome_ == "identified") return 0;
  if (outcome_.rfind("rejected", 0) == 0) return 2;
  return 3;
}

void SessionTranscript::write(std::ostream& out) const {
  for (const auto& s : steps_) out << s.step << '\t' << s.actor << '\t' << s.summary << '\n';
  for (const auto& [name, value] : counters) out << "counter\t" << name << '\t' << value << '\n';
  out << "outcome\t" << outcome_ << '\n';
}

std::string SessionTranscript::text() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

namespace {

std::string failure(const Error& e) { return std::string("failed:") + to_string(e.code()); }

/// Outcome of a lookup for a party claiming `claimed`.
std::string decide(const MatchResult& m, const CrpDatabase& db, const std::string& claimed,
                   const std::string& challenge_id) {
  switch (m.outcome) {
    case MatchOutcome::kMatched:
      return db.find(*m.best_record_id)->subsystem_label == claimed ? "identified" : "rejected";
    case MatchOutcome::kAmbiguous:
      return "failed:ambiguous";
    case MatchOutcome::kNoMatch:
      break;
  }
  return db.has_label(claimed, challenge_id) ? "rejected" : "failed:identification";
}

std::string describe(const MatchResult& m) {
  std::string s = std::string(to_string(m.outcome)) + " t=" + format_fixed(m.threshold) +
                  " compared=" + std::to_string(m.compared);
  if (m.best_hd) s += " best=" + *m.best_record_id + " hd=" + std::to_string(*m.best_hd);
  return s;
}

}  // namespace

DigitalSignature reference_signature(const Target& target, const Challenge& challenge,
                                     std::span<const std::uint8_t> key) {
  return make_signature_direct(acquire(target, challenge), key);
}

SessionTranscript identify_subsystem(const Party& cn, const Party& user,
                                     const Challenge& challenge, const CrpDatabase& db,
                                     const DirectOptions& options) {
  SessionTranscript t;
  const std::string actor = to_string(cn.role);
  RbpTrace trace;
  try {
    trace = acquire(user.target, challenge, options.snr_db, options.noise_seed);
    t.add("acquire", actor,
          "challenge " + challenge.challenge_id + " -> " + std::to_string(trace.samples.size()) +
              " samples from " + user.label);
  } catch (const Error& e) {
    t.add("acquire", actor, e.what());
    t.finish("failed:acquisition");
    return t;
  }
  try {
    const auto id = make_signature_direct(trace, options.key);
    t.add("sign", actor,
          std::to_string(id.rows()) + "x" + std::to_string(id.cols()) + " direct ID");
    const double threshold =
        options.threshold ? *options.threshold : db.default_threshold(id.size());
    const auto m = db.lookup(id, threshold);
    t.counters["compared"] = m.compared;
    t.add("lookup", actor, describe(m));
    t.finish(decide(m, db, user.label, challenge.challenge_id));
  } catch (const Error& e) {
    t.add(t.steps().size() == 1 ? "sign" : "lookup", actor, e.what());
    t.finish(failure(e));
  }
  return t;
}

std::size_t default_side(PathProtocol protocol) {
  return protocol == PathProtocol::kCascadedI ? 14 : 16;
}

std::vector<Window> centred_windows(const FiberChain& chain, double length_m) {
  std::vector<Window> windows;
  for (std::size_t i = 0; i < chain.spans().size(); ++i) {
    const double span = chain.spans()[i].length_m();
    require(length_m <= span, "window longer than span " + std::to_string(i));
    windows.push_back({chain.span_offset_m(i) + 0.5 * (span - length_m), length_m});
  }
  return windows;
}

namespace {

std::size_t span_count(PathProtocol protocol) {
  return protocol == PathProtocol::kTwoSubsystems ? 2 : 3;
}

std::string count_of(const IntersectionSet& set) {
  return set.label + " = " + set.parents.at(0) + " x " + set.parents.at(1) + " -> " +
         std::to_string(set.size()) + " points";
}

/// The shared measurement-to-ID pipeline. Steps are appended to `t` when given.
DigitalSignature run_pipeline(const FiberChain& chain, const Challenge& challenge,
                              PathProtocol protocol, const PathOptions& o,
                              SessionTranscript* t) {
  auto note = [&](std::string summary) {
    if (t) t->add(std::to_string(t->steps().size() + 1), "cn", std::move(summary));
  };
  const std::size_t spans = span_count(protocol);
  require(chain.spans().size() == spans,
          "protocol " + std::to_string(static_cast<int>(protocol)) + " needs a " +
              std::to_string(spans) + "-span chain");
  require(o.windows.size() == spans, "one window per span is required");

  const auto trace = acquire(chain, challenge, o.snr_db, o.noise_seed);
  const auto q = quantize(trace, o.adc_bits);
  const auto profile = profile_from_samples(q.dequantize(), challenge);
  note("measure RBP: " + std::to_string(trace.samples.size()) + " samples, " +
       std::to_string(o.adc_bits) + "-bit ADC, " + std::to_string(profile.magnitude.size()) +
       " profile bins");

  std::vector<Segment> s;
  std::string sizes;
  for (std::size_t i = 0; i < spans; ++i) {
    const auto label = "S" + std::to_string(i + 1);
    s.push_back(select_window(profile, o.windows[i].start_m, o.windows[i].length_m, label));
    sizes += (i ? ", " : "") + label + "=" + std::to_string(s.back().size());
  }
  note("select windows: " + sizes);

  IntersectionSet points;
  switch (protocol) {
    case PathProtocol::kTwoSubsystems:
      points = intersect(s[0], s[1], "J");
      note(count_of(points));
      break;
    case PathProtocol::kCascadedI: {
      const auto j1 = intersect(s[0], s[1], "J1");
      note(count_of(j1));
      if (j1.size() < 2) {
        points.label = "J2";
        points.parents = {"J1", "S3"};
      } else {
        points = intersect(j1.as_segment(), s[2], "J2");
      }
      note(count_of(points));
      break;
    }
    case PathProtocol::kCascadedII: {
      const auto j1 = intersect(s[0], s[1], "J1");
      note(count_of(j1));
      const auto j2 = intersect(s[0], s[2], "J2");
      note(count_of(j2));
      if (j1.size() == 0 && j2.size() == 0) {
        fail(ErrorCode::kInsufficientEntropy, "both intersections are empty");
      }
      points = o.subset(j1, j2);
      note("J3 = subset(J1, J2) -> " + std::to_string(points.size()) + " points");
      break;
    }
  }

  auto id = quantize_intersections(points, o.key, o.side);
  id.challenge_id = challenge.challenge_id;
  id.source = target_label(chain);
  note("two-level quantization -> " + std::to_string(id.rows()) + "x" +
       std::to_string(id.cols()) + " ID");
  return id;
}

}  // namespace

DigitalSignature path_signature(const FiberChain& chain, const Challenge& challenge,
                                PathProtocol protocol, const PathOptions& options) {
  return run_pipeline(chain, challenge, protocol, options, nullptr);
}

std::string enroll_path(CrpDatabase& db, const std::string& label, const FiberChain& chain,
                        const Challenge& challenge, PathProtocol protocol,
                        const PathOptions& options) {
  PathOptions clean = options;
  clean.snr_db = kNoiseless;
  return db.enroll(label, challenge, path_signature(chain, challenge, protocol, clean));
}

SessionTranscript run_path_protocol(PathProtocol protocol, const FiberChain& chain,
                                    const std::string& claimed_label, const Challenge& challenge,
                                    const CrpDatabase& db, const PathOptions& options) {
  SessionTranscript t;
  try {
    const auto id = run_pipeline(chain, challenge, protocol, options, &t);
    const double threshold =
        options.threshold ? *options.threshold : db.default_threshold(id.size());
    const auto m = db.lookup(id, threshold);
    t.counters["compared"] = m.compared;
    t.counters["skipped_shape"] = m.skipped_shape;
    t.add(std::to_string(t.steps().size() + 1), "cn", "HD vs reference: " + describe(m));
    t.finish(decide(m, db, claimed_label, challenge.challenge_id));
  } catch (const Error& e) {
    t.add(std::to_string(t.steps().size() + 1), "cn", e.what());
    t.finish(failure(e));
  }
  return t;
}

SessionTranscript protocol1_two_subsystems(const FiberChain& chain, const std::string& label,
                                           const Challenge& challenge, const CrpDatabase& db,
                                           const PathOptions& options) {
  return run_path_protocol(PathProtocol::kTwoSubsystems, chain, label, challenge, db, options);
}

SessionTranscript protocol2_cascaded(const FiberChain& chain, const std::string& label,
                                     const Challenge& challenge, const CrpDatabase& db,
                                     const PathOptions& options) {
  return run_path_protocol(PathProtocol::kCascadedI, chain, label, challenge, db, options);
}

SessionTranscript protocol3_cascaded(const FiberChain& chain, const std::string& label,
                                     const Challenge& challenge, const CrpDatabase& db,
                                     const PathOptions& options) {
  return run_path_protocol(PathProtocol::kCascadedII, chain, label, challenge, db, options);
}

void enroll_dual(CrpDatabase& d1, const std::string& k1_id, CrpDatabase& d2,
                 const std::string& k2_id, const std::string& label, const Target& target,
                 const Challenge& challenge) {
  require(!d1.key().empty() && d1.key().size() == d2.key().size(),
          "dual databases need keys of equal, nonzero length");
  d1.enroll(label, challenge, reference_signature(target, challenge, d1.key()), k1_id);
  d2.enroll(label, challenge, reference_signature(target, challenge, d2.key()), k2_id);
}

SessionTranscript protocol4_cn_assisted(const Party& cn, const Party& user,
                                        const CrpDatabase& d1, const CrpDatabase& d2,
                                        const Challenge& challenge,
                                        const Protocol4Options& options, Channel* channel) {
  Channel local;
  Channel& link = channel ? *channel : local;
  const std::string cn_name = to_string(cn.role);
  const std::string user_name = to_string(user.role);
  SessionTranscript t;

  // 1. CN -> user: challenge.
  const auto received = link.deliver({cn_name, user_name, "challenge", challenge, {}, {}});
  const Challenge applied = received.challenge.value_or(challenge);
  t.add("1", cn_name, "send challenge " + challenge.challenge_id);

  // 2-3. User measures and quantizes near its own site.
  RbpTrace trace;
  try {
    trace = acquire(user.target, applied, options.snr_db, options.seed);
  } catch (const Error& e) {
    t.add("2", user_name, e.what());
    t.finish("failed:acquisition");
    return t;
  }
  t.add("2", user_name,
        "measure R1 under " + applied.challenge_id + ": " + std::to_string(trace.samples.size()) +
            " samples");
  t.add("3", user_name, "two-level quantization");

  // 4. Arbitrary key concatenation.
  std::string used_key = "-";
  Bits key_bits;
  if (options.chosen_key_id) {
    const auto it = std::find_if(user.keys.begin(), user.keys.end(),
                                 [&](const HeldKey& k) { return k.key_id == *options.chosen_key_id; });
    require(it != user.keys.end(), "user does not hold key '" + *options.chosen_key_id + "'");
    used_key = it->key_id;
    key_bits = it->bits;
  } else if (!user.keys.empty()) {
    Rng rng = make_rng(options.seed, 3);
    std::uniform_int_distribution<std::size_t> pick(0, user.keys.size() - 1);
    const auto& k = user.keys[pick(rng)];
    used_key = k.key_id;
    key_bits = k.bits;
  } else {
    // Without a key the party can only pad with guesses.
    Rng rng = make_rng(options.seed, 4);
    std::bernoulli_distribution coin(0.5);
    key_bits.resize(d1.key().size());
    for (auto& b : key_bits) b = coin(rng) ? 1 : 0;
  }
  DigitalSignature id;
  try {
    id = make_signature_direct(trace, key_bits);
  } catch (const Error& e) {
    t.add("4", user_name, e.what());
    t.finish(failure(e));
    return t;
  }
  t.add("4", user_name,
        "concatenate key " + used_key + " -> " + std::to_string(id.rows()) + "x" +
            std::to_string(id.cols()) + " ID");

  // 5. User -> CN: ID.
  const auto id_msg = link.deliver({user_name, cn_name, "id", {}, id, {}});
  const DigitalSignature& probe = id_msg.id ? *id_msg.id : id;
  t.add("5", user_name, "send ID");

  // 6. CN searches both databases.
  MatchResult m1, m2;
  try {
    const double threshold =
        options.threshold ? *options.threshold : d1.default_threshold(probe.size());
    m1 = d1.lookup(probe, threshold);
    m2 = d2.lookup(probe, threshold);
  } catch (const Error& e) {
    t.add("6", cn_name, e.what());
    t.finish(failure(e));
    return t;
  }
  t.add("6", cn_name, d1.id() + ": " + describe(m1) + "; " + d2.id() + ": " + describe(m2));

  if (m1.outcome == MatchOutcome::kAmbiguous || m2.outcome == MatchOutcome::kAmbiguous) {
    t.finish("failed:ambiguous");
    return t;
  }
  const bool in1 = m1.outcome == MatchOutcome::kMatched;
  const bool in2 = m2.outcome == MatchOutcome::kMatched;
  if (!in1 && !in2) {
    t.add("6b", cn_name, "no match in either database");
    t.finish("failed:identification");
    return t;
  }
  if (in1 && in2 && *m1.best_hd == *m2.best_hd) {
    t.finish("failed:ambiguous");
    return t;
  }
  const bool first = in1 && (!in2 || *m1.best_hd < *m2.best_hd);
  const CrpDatabase& matched_db = first ? d1 : d2;
  const CrpRecord& record = *matched_db.find(first ? *m1.best_record_id : *m2.best_record_id);

  // 6a.i CN asks which key was used; the user answers.
  link.deliver({cn_name, user_name, "key-request", {}, {}, {}});
  const std::string declared = options.declared_key_id.value_or(used_key);
  const auto reply = link.deliver({user_name, cn_name, "key-reply", {}, {}, declared});
  const std::string answer = reply.key_id.value_or("-");
  t.add("6a.i", cn_name, "match in " + matched_db.id() + " (" + record.subsystem_label +
                             "); ask key -> user answers " + answer);

  // 6a.ii Key-database correspondence.
  const bool ok = record.key_id && *record.key_id == answer;
  t.add("6a.ii", cn_name,
        std::string(ok ? "key " : "key mismatch: ") + answer + " vs " +
            matched_db.id() + " key " + record.key_id.value_or("-"));
  t.finish(ok ? "identified" : "rejected:key-mismatch");
  return t;
}

}  // namespace opufid
