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

#include "opufid/opufid.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "core/crp_db.hpp"
#include "core/decision_stats.hpp"
#include "core/error.hpp"
#include "core/experiments.hpp"
#include "core/fiber_model.hpp"
#include "core/ofdr.hpp"
#include "core/protocols.hpp"
#include "core/signature.hpp"

struct opufid_target {
  opufid::Target target;
  std::string label;
};

struct opufid_trace {
  opufid::RbpTrace trace;
};

struct opufid_signature {
  opufid::DigitalSignature sig;
};

struct opufid_db {
  opufid::CrpDatabase db;
};

struct opufid_transcript {
  opufid::SessionTranscript transcript;
  std::string text;
};

namespace {

using opufid::Error;
using opufid::ErrorCode;

thread_local std::string g_last_error;

template <typename F>
opufid_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return OPUFID_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<opufid_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return OPUFID_ERR_INTERNAL;
}

template <typename T>
T& need(T* p, const char* what) {
  if (!p) opufid::fail(ErrorCode::kInvalidParameter, std::string(what) + " is NULL");
  return *p;
}

std::string need_str(const char* s, const char* what) {
  if (!s) opufid::fail(ErrorCode::kInvalidParameter, std::string(what) + " is NULL");
  return s;
}

opufid::Challenge to_core(const opufid_challenge* c) {
  const auto& in = need(c, "challenge");
  const std::size_t len = strnlen(in.challenge_id, OPUFID_LABEL_MAX);
  opufid::require(len > 0 && len < OPUFID_LABEL_MAX, "challenge id must be a terminated label");
  opufid::Challenge out;
  out.challenge_id.assign(in.challenge_id, len);
  out.e0 = in.e0;
  out.sweep_rate_hz_per_s = in.sweep_rate_hz_per_s;
  out.sweep_time_s = in.sweep_time_s;
  out.n_samples = in.n_samples;
  if (in.has_gate) out.gate = opufid::DistanceGate{in.gate_start_m, in.gate_end_m};
  out.validate();
  return out;
}

void from_core(const opufid::Challenge& c, opufid_challenge* out) {
  opufid::require(c.challenge_id.size() < OPUFID_LABEL_MAX, "challenge id too long");
  std::memset(out, 0, sizeof *out);
  std::memcpy(out->challenge_id, c.challenge_id.data(), c.challenge_id.size());
  out->e0 = c.e0;
  out->sweep_rate_hz_per_s = c.sweep_rate_hz_per_s;
  out->sweep_time_s = c.sweep_time_s;
  out->n_samples = c.n_samples;
  if (c.gate) {
    out->has_gate = 1;
    out->gate_start_m = c.gate->start_m;
    out->gate_end_m = c.gate->end_m;
  }
}

opufid::Bits bits_of(const uint8_t* p, std::size_t n) {
  if (n == 0) return {};
  need(p, "key");
  return opufid::Bits(p, p + n);
}

opufid::PathOptions to_core(const opufid_path_options* o, const opufid::FiberChain& chain,
                            opufid::PathProtocol protocol) {
  const auto& in = need(o, "path options");
  opufid::PathOptions out;
  out.windows = opufid::centred_windows(chain, in.window_m);
  out.adc_bits = in.adc_bits;
  out.snr_db = in.snr_db;
  out.noise_seed = in.noise_seed;
  out.side = in.side ? in.side : opufid::default_side(protocol);
  out.key = bits_of(in.key, in.key_len);
  return out;
}

const opufid::FiberChain& chain_of(const opufid_target* t) {
  const auto* chain = std::get_if<opufid::FiberChain>(&need(t, "chain").target);
  if (!chain) opufid::fail(ErrorCode::kInvalidParameter, "target is a single fiber, not a chain");
  return *chain;
}

opufid::ExperimentConfig to_core(const opufid_exp_config* c) {
  const auto& in = need(c, "experiment config");
  opufid::ExperimentConfig out;
  out.seed = in.seed;
  out.repetitions = in.repetitions;
  out.length_m = in.length_m;
  out.density_per_m = in.density_per_m;
  out.key_bits = in.key_bits;
  out.challenge = to_core(&in.challenge);
  return out;
}

opufid::PathConfig to_core(const opufid_path_exp_config* c) {
  const auto& in = need(c, "path experiment config");
  opufid::PathConfig out;
  out.seed = in.seed;
  out.protocol = static_cast<opufid::PathProtocol>(in.protocol);
  out.span_length_m = in.span_length_m;
  out.density_per_m = in.density_per_m;
  out.window_m = in.window_m;
  if (in.side) out.side = in.side;
  out.adc_bits = in.adc_bits;
  out.snr_db = in.snr_db;
  out.calibration_trials = in.calibration_trials;
  return out;
}

opufid::PathProtocol to_core(opufid_path_protocol p) {
  opufid::require(p >= OPUFID_PATH_TWO_SUBSYSTEMS && p <= OPUFID_PATH_CASCADED_II,
                  "protocol must be 1, 2 or 3");
  return static_cast<opufid::PathProtocol>(p);
}

void write_text(const char* path, const std::string& text) {
  opufid::write_file_atomically(need_str(path, "path"), text);
}

template <typename Fn>
void write_with(const char* path, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  write_text(path, out.str());
}

opufid_transcript* wrap(opufid::SessionTranscript t) {
  auto* h = new opufid_transcript{std::move(t), {}};
  h->text = h->transcript.text();
  return h;
}

}  // namespace

extern "C" {

const char* opufid_status_name(opufid_status status) {
  if (status == OPUFID_OK) return "ok";
  if (status >= OPUFID_ERR_INVALID_PARAMETER && status <= OPUFID_ERR_ACQUISITION) {
    return opufid::to_string(static_cast<ErrorCode>(status));
  }
  return "internal";
}

const char* opufid_last_error(void) { return g_last_error.c_str(); }

const char* opufid_version(void) { return "0.1.0"; }

void opufid_challenge_default(opufid_challenge* out) {
  if (out) from_core(opufid::Challenge{}, out);
}

opufid_status opufid_challenge_path(size_t spans, opufid_challenge* out) {
  return guarded([&] { from_core(opufid::default_path_challenge(spans), &need(out, "out")); });
}

opufid_status opufid_fiber_synthesize(double length_m, double density_per_m, uint64_t seed,
                                      const char* fiber_id, opufid_target** out) {
  return guarded([&] {
    need(out, "out");
    opufid::Target t = opufid::Fiber::synthesize(length_m, density_per_m, seed,
                                                 fiber_id ? fiber_id : "");
    auto label = opufid::target_label(t);
    *out = new opufid_target{std::move(t), std::move(label)};
  });
}

opufid_status opufid_chain_build(const opufid_target* const* spans, size_t n_spans,
                                 const double* connectors, size_t n_connectors,
                                 opufid_target** out) {
  return guarded([&] {
    need(out, "out");
    need(spans, "spans");
    std::vector<opufid::Fiber> fibers;
    for (std::size_t i = 0; i < n_spans; ++i) {
      const auto* f = std::get_if<opufid::Fiber>(&need(spans[i], "span").target);
      if (!f) opufid::fail(ErrorCode::kInvalidParameter, "chain spans must be single fibers");
      fibers.push_back(*f);
    }
    std::vector<double> c;
    if (connectors) {
      c.assign(connectors, connectors + n_connectors);
    } else {
      c.assign(n_spans + 1, opufid::kConnectorReflectivity);
    }
    opufid::Target t = opufid::FiberChain::concatenate(std::move(fibers), std::move(c));
    auto label = opufid::target_label(t);
    *out = new opufid_target{std::move(t), std::move(label)};
  });
}

opufid_status opufid_target_load(const char* path, opufid_target** out) {
  return guarded([&] {
    need(out, "out");
    auto t = opufid::load_target(need_str(path, "path"));
    auto label = opufid::target_label(t);
    *out = new opufid_target{std::move(t), std::move(label)};
  });
}

opufid_status opufid_target_save(const opufid_target* target, const char* path) {
  return guarded(
      [&] { opufid::save_target(need_str(path, "path"), need(target, "target").target); });
}

size_t opufid_target_span_count(const opufid_target* target) {
  if (!target) return 0;
  const auto* chain = std::get_if<opufid::FiberChain>(&target->target);
  return chain ? chain->spans().size() : 0;
}

size_t opufid_target_site_count(const opufid_target* target) {
  return target ? opufid::reflectors_of(target->target).size() : 0;
}

const char* opufid_target_label(const opufid_target* target) {
  return target ? target->label.c_str() : "";
}

void opufid_target_free(opufid_target* target) { delete target; }

opufid_status opufid_acquire(const opufid_target* target, const opufid_challenge* challenge,
                             double snr_db, uint64_t noise_seed, opufid_trace** out) {
  return guarded([&] {
    need(out, "out");
    auto trace =
        opufid::acquire(need(target, "target").target, to_core(challenge), snr_db, noise_seed);
    *out = new opufid_trace{std::move(trace)};
  });
}

size_t opufid_trace_size(const opufid_trace* trace) {
  return trace ? trace->trace.samples.size() : 0;
}

const double* opufid_trace_samples(const opufid_trace* trace) {
  return trace ? trace->trace.samples.data() : nullptr;
}

const char* opufid_trace_challenge_id(const opufid_trace* trace) {
  return trace ? trace->trace.challenge_id.c_str() : "";
}

opufid_status opufid_trace_save_csv(const opufid_trace* trace, const char* path) {
  return guarded([&] {
    const auto& t = need(trace, "trace").trace;
    write_with(path, [&](std::ostream& o) { opufid::write_trace_csv(o, t); });
  });
}

opufid_status opufid_trace_load_csv(const char* path, opufid_trace** out) {
  return guarded([&] {
    need(out, "out");
    std::istringstream in(opufid::read_file(need_str(path, "path")));
    *out = new opufid_trace{opufid::read_trace_csv(in)};
  });
}

opufid_status opufid_trace_save_quantized_csv(const opufid_trace* trace, int bits_per_sample,
                                              const char* path) {
  return guarded([&] {
    const auto q = opufid::quantize(need(trace, "trace").trace, bits_per_sample);
    write_with(path, [&](std::ostream& o) { opufid::write_quantized_csv(o, q); });
  });
}

void opufid_trace_free(opufid_trace* trace) { delete trace; }

opufid_status opufid_sign_direct(const opufid_trace* trace, const uint8_t* key, size_t key_len,
                                 opufid_signature** out) {
  return guarded([&] {
    need(out, "out");
    *out = new opufid_signature{
        opufid::make_signature_direct(need(trace, "trace").trace, bits_of(key, key_len))};
  });
}

void opufid_path_options_default(opufid_path_options* out) {
  if (!out) return;
  *out = opufid_path_options{};
  out->adc_bits = 6;
  out->snr_db = opufid::kNoiseless;
  out->window_m = 0.26;
}

opufid_status opufid_sign_path(const opufid_target* chain, const opufid_challenge* challenge,
                               opufid_path_protocol protocol, const opufid_path_options* options,
                               opufid_signature** out) {
  return guarded([&] {
    need(out, "out");
    const auto& c = chain_of(chain);
    const auto p = to_core(protocol);
    *out = new opufid_signature{
        opufid::path_signature(c, to_core(challenge), p, to_core(options, c, p))};
  });
}

size_t opufid_signature_rows(const opufid_signature* sig) { return sig ? sig->sig.rows() : 0; }
size_t opufid_signature_cols(const opufid_signature* sig) { return sig ? sig->sig.cols() : 0; }
size_t opufid_signature_key_len(const opufid_signature* sig) {
  return sig ? sig->sig.key_len() : 0;
}

opufid_status opufid_signature_bits(const opufid_signature* sig, uint8_t* out, size_t capacity) {
  return guarded([&] {
    const auto bits = need(sig, "signature").sig.bits();
    opufid::require(capacity >= bits.size(), "buffer holds " + std::to_string(capacity) +
                                                 " bits, need " + std::to_string(bits.size()));
    std::copy(bits.begin(), bits.end(), &need(out, "out"));
  });
}

opufid_status opufid_signature_save(const opufid_signature* sig, const char* path) {
  return guarded(
      [&] { opufid::save_signature(need_str(path, "path"), need(sig, "signature").sig); });
}

opufid_status opufid_signature_load(const char* path, opufid_signature** out) {
  return guarded([&] {
    need(out, "out");
    *out = new opufid_signature{opufid::load_signature(need_str(path, "path"))};
  });
}

opufid_status opufid_signature_export_pbm(const opufid_signature* sig, const char* path) {
  return guarded([&] { opufid::export_qr(need(sig, "signature").sig, need_str(path, "path")); });
}

opufid_status opufid_hamming(const opufid_signature* a, const opufid_signature* b, size_t* out) {
  return guarded([&] {
    const auto& x = need(a, "signature a").sig;
    const auto& y = need(b, "signature b").sig;
    opufid::require(x.same_shape(y), "signatures differ in shape");
    need(out, "out");
    *out = opufid::hamming(x, y);
  });
}

void opufid_signature_free(opufid_signature* sig) { delete sig; }

opufid_status opufid_db_create(const char* db_id, const uint8_t* key, size_t key_len,
                               opufid_db** out) {
  return guarded([&] {
    need(out, "out");
    *out = new opufid_db{opufid::CrpDatabase(need_str(db_id, "db id"), bits_of(key, key_len))};
  });
}

opufid_status opufid_db_load(const char* path, opufid_db** out) {
  return guarded([&] {
    need(out, "out");
    *out = new opufid_db{opufid::CrpDatabase::load(need_str(path, "path"))};
  });
}

opufid_status opufid_db_save(const opufid_db* db, const char* path) {
  return guarded([&] { need(db, "db").db.save(need_str(path, "path")); });
}

opufid_status opufid_db_set_calibration(opufid_db* db, double m_u, double m_v) {
  return guarded([&] {
    opufid::require(std::isfinite(m_u) && std::isfinite(m_v) && 0.0 <= m_u && m_u <= m_v,
                    "calibration needs 0 <= m_u <= m_v");
    need(db, "db");
    db->db.set_calibration({m_u, m_v});
  });
}

size_t opufid_db_size(const opufid_db* db) { return db ? db->db.size() : 0; }

opufid_status opufid_db_enroll(opufid_db* db, const char* label,
                               const opufid_challenge* challenge,
                               const opufid_signature* response, const char* key_id,
                               char* record_id, size_t capacity) {
  return guarded([&] {
    need(db, "db");
    std::optional<std::string> kid;
    if (key_id) kid = key_id;
    if (record_id) opufid::require(capacity > 0, "record id buffer is empty");
    const auto id = db->db.enroll(need_str(label, "label"), to_core(challenge),
                                  need(response, "response").sig, kid);
    if (record_id) {
      const std::size_t n = std::min(id.size(), capacity - 1);
      std::memcpy(record_id, id.data(), n);
      record_id[n] = '\0';
    }
  });
}

void opufid_db_free(opufid_db* db) { delete db; }

opufid_status opufid_identify(const opufid_target* user, const char* claimed_label,
                              const opufid_challenge* challenge, const opufid_db* db,
                              double snr_db, uint64_t noise_seed, const uint8_t* key,
                              size_t key_len, const double* threshold, opufid_transcript** out) {
  return guarded([&] {
    need(out, "out");
    opufid::Party cn{opufid::Role::kCentralNode, "cn", need(user, "user").target, {}};
    opufid::Party u{opufid::Role::kUser, need_str(claimed_label, "label"), user->target, {}};
    opufid::DirectOptions o;
    o.snr_db = snr_db;
    o.noise_seed = noise_seed;
    o.key = bits_of(key, key_len);
    if (threshold) o.threshold = *threshold;
    *out = wrap(opufid::identify_subsystem(cn, u, to_core(challenge), need(db, "db").db, o));
  });
}

opufid_status opufid_protocol_path(opufid_path_protocol protocol, const opufid_target* chain,
                                   const char* claimed_label, const opufid_challenge* challenge,
                                   const opufid_db* db, const opufid_path_options* options,
                                   const double* threshold, opufid_transcript** out) {
  return guarded([&] {
    need(out, "out");
    const auto& target = need(chain, "chain").target;
    const auto core_protocol = to_core(protocol);
    opufid::PathOptions o;
    if (const auto* c = std::get_if<opufid::FiberChain>(&target)) {
      o = to_core(options, *c, core_protocol);
    } else {
      opufid::fail(ErrorCode::kInvalidParameter, "path protocols need a chain");
    }
    if (threshold) o.threshold = *threshold;
    *out = wrap(opufid::run_path_protocol(core_protocol, std::get<opufid::FiberChain>(target),
                                          need_str(claimed_label, "label"), to_core(challenge),
                                          need(db, "db").db, o));
  });
}

void opufid_p4_options_default(opufid_p4_options* out) {
  if (!out) return;
  *out = opufid_p4_options{};
  out->snr_db = opufid::kNoiseless;
}

opufid_status opufid_enroll_dual(opufid_db* d1, const char* k1_id, opufid_db* d2,
                                 const char* k2_id, const char* label, const opufid_target* user,
                                 const opufid_challenge* challenge) {
  return guarded([&] {
    opufid::enroll_dual(need(d1, "d1").db, need_str(k1_id, "k1 id"), need(d2, "d2").db,
                        need_str(k2_id, "k2 id"), need_str(label, "label"),
                        need(user, "user").target, to_core(challenge));
  });
}

opufid_status opufid_protocol4(const opufid_target* user, const char* label,
                               const opufid_held_key* keys, size_t n_keys, const opufid_db* d1,
                               const opufid_db* d2, const opufid_challenge* challenge,
                               const opufid_p4_options* options, opufid_transcript** out) {
  return guarded([&] {
    need(out, "out");
    const auto& o = need(options, "options");
    opufid::Party cn{opufid::Role::kCentralNode, "cn", need(user, "user").target, {}};
    opufid::Party u{n_keys ? opufid::Role::kUser : opufid::Role::kAdversary,
                    need_str(label, "label"), user->target, {}};
    if (n_keys) need(keys, "keys");
    for (std::size_t i = 0; i < n_keys; ++i) {
      u.keys.push_back({need_str(keys[i].key_id, "key id"), bits_of(keys[i].bits, keys[i].n_bits)});
    }
    opufid::Protocol4Options p;
    p.snr_db = o.snr_db;
    p.seed = o.seed;
    if (o.chosen_key_id) p.chosen_key_id = o.chosen_key_id;
    if (o.declared_key_id) p.declared_key_id = o.declared_key_id;
    if (o.threshold) p.threshold = *o.threshold;
    *out = wrap(opufid::protocol4_cn_assisted(cn, u, need(d1, "d1").db, need(d2, "d2").db,
                                              to_core(challenge), p));
  });
}

const char* opufid_transcript_outcome(const opufid_transcript* t) {
  return t ? t->transcript.outcome().c_str() : "";
}

int opufid_transcript_exit_code(const opufid_transcript* t) {
  return t ? t->transcript.exit_code() : 3;
}

const char* opufid_transcript_text(const opufid_transcript* t) {
  return t ? t->text.c_str() : "";
}

size_t opufid_transcript_step_count(const opufid_transcript* t) {
  return t ? t->transcript.steps().size() : 0;
}

opufid_status opufid_transcript_save(const opufid_transcript* t, const char* path) {
  return guarded([&] { write_text(path, need(t, "transcript").text); });
}

void opufid_transcript_free(opufid_transcript* t) { delete t; }

void opufid_exp_config_default(opufid_exp_config* out) {
  if (!out) return;
  const opufid::ExperimentConfig c;
  *out = opufid_exp_config{};
  out->seed = c.seed;
  out->repetitions = c.repetitions;
  out->length_m = c.length_m;
  out->density_per_m = c.density_per_m;
  out->key_bits = c.key_bits;
  from_core(c.challenge, &out->challenge);
}

opufid_status opufid_exp_hd(const char* kind, const opufid_exp_config* config, double snr_db,
                            const char* histogram_csv, const char* summary_csv,
                            opufid_hd_summary* out) {
  return guarded([&] {
    const auto c = to_core(config);
    const std::string k = need_str(kind, "kind");
    opufid::HdExperiment e;
    if (k == "inner") {
      e = opufid::run_inner(c);
    } else if (k == "intra") {
      e = opufid::run_intra(c, snr_db);
    } else if (k == "inter") {
      e = opufid::run_inter(c);
    } else {
      opufid::fail(ErrorCode::kInvalidParameter, "unknown HD experiment '" + k + "'");
    }
    const auto s = opufid::hd_statistics(e);
    if (histogram_csv) {
      write_with(histogram_csv, [&](std::ostream& o) { opufid::write_histogram_csv(o, s); });
    }
    if (summary_csv) {
      write_with(summary_csv, [&](std::ostream& o) { opufid::write_hd_summary_csv(o, e); });
    }
    if (out) {
      *out = {e.values.size(), e.n_bits,
              s.mean,          s.variance,
              s.histogram.front().first, s.histogram.back().first};
    }
  });
}

opufid_status opufid_exp_fpfn(const opufid_exp_config* config, const double* snr_db,
                              size_t n_snr, const double* gamma, size_t n_gamma,
                              const char* out_dir) {
  return guarded([&] {
    auto c = to_core(config);
    opufid::require(n_snr > 0 && n_gamma > 0, "fpfn needs SNR and gamma values");
    c.snr_db.assign(&need(snr_db, "snr list"), snr_db + n_snr);
    c.gamma_grid.assign(&need(gamma, "gamma grid"), gamma + n_gamma);
    const std::filesystem::path dir = need_str(out_dir, "output directory");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) opufid::fail(ErrorCode::kStorage, "cannot create " + dir.string() + ": " + ec.message());
    for (const auto& table : opufid::run_fpfn(c)) {
      const auto path = dir / ("fpfn_snr" + opufid::format_fixed(table.snr_db) + ".csv");
      write_with(path.c_str(),
                 [&](std::ostream& o) { opufid::write_error_curve_csv(o, table.curve); });
    }
  });
}

void opufid_path_exp_config_default(opufid_path_exp_config* out) {
  if (!out) return;
  const opufid::PathConfig c;
  *out = opufid_path_exp_config{};
  out->seed = c.seed;
  out->protocol = OPUFID_PATH_TWO_SUBSYSTEMS;
  out->span_length_m = c.span_length_m;
  out->density_per_m = c.density_per_m;
  out->window_m = c.window_m;
  out->adc_bits = c.adc_bits;
  out->snr_db = c.snr_db;
  out->calibration_trials = c.calibration_trials;
}

opufid_status opufid_exp_fake_id(const opufid_path_exp_config* config, size_t genuine,
                                 size_t fake, opufid_fake_id_result* out) {
  return guarded([&] {
    need(out, "out");
    const auto r = opufid::run_fake_id(to_core(config), genuine, fake);
    *out = {r.matched, r.rejected, r.ambiguous, r.failed,
            r.threshold, r.calibration.m_u, r.calibration.m_v};
  });
}

opufid_status opufid_calibrate_path(const opufid_path_exp_config* config, double* m_u,
                                    double* m_v) {
  return guarded([&] {
    need(m_u, "m_u");
    need(m_v, "m_v");
    const auto c = opufid::calibrate_substitution(to_core(config));
    *m_u = c.m_u;
    *m_v = c.m_v;
  });
}

}  // extern "C"
