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

// opufid: command-line front end over the C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opufid/opufid.h"

namespace {

constexpr int kExitError = 1;

// Default calibration of a fresh direct-signature database (4096-bit IDs).
constexpr double kDirectMu = 144.06;
constexpr double kDirectMv = 1994.08;

struct Failure {
  opufid_status status;
};

void check(opufid_status status) {
  if (status != OPUFID_OK) throw Failure{status};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Target = Handle<opufid_target, opufid_target_free>;
using Trace = Handle<opufid_trace, opufid_trace_free>;
using Signature = Handle<opufid_signature, opufid_signature_free>;
using Db = Handle<opufid_db, opufid_db_free>;
using Transcript = Handle<opufid_transcript, opufid_transcript_free>;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<uint8_t> parse_hex(const std::string& hex) {
  std::vector<uint8_t> bits;
  for (char c : hex) {
    int v;
    if (c >= '0' && c <= '9') {
      v = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      v = c - 'a' + 10;
    } else if (c >= 'A' && c <= 'F') {
      v = c - 'A' + 10;
    } else {
      throw CLI::ValidationError("key", "'" + hex + "' is not hexadecimal");
    }
    for (int b = 3; b >= 0; --b) bits.push_back(static_cast<uint8_t>((v >> b) & 1));
  }
  return bits;
}

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "none") return INFINITY;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError("--snr", "'" + text + "' is not a number or 'inf'");
}

struct ChallengeArgs {
  std::optional<std::string> id;
  std::optional<double> sweep_rate;
  std::optional<double> sweep_time;
  std::optional<std::size_t> samples;
  std::optional<double> gate_start;
  std::optional<double> gate_end;

  void add(CLI::App* app) {
    app->add_option("--challenge-id", id, "Challenge label");
    app->add_option("--sweep-rate", sweep_rate, "Laser sweep rate in Hz/s");
    app->add_option("--sweep-time", sweep_time, "Sweep duration in s");
    app->add_option("--samples", samples, "Samples per sweep");
    app->add_option("--gate-start", gate_start, "Distance gate start in m");
    app->add_option("--gate-end", gate_end, "Distance gate end in m");
  }

  /// Pigtail challenge, or the path challenge for `spans` > 0.
  opufid_challenge resolve(std::size_t spans) const {
    opufid_challenge c;
    if (spans) {
      check(opufid_challenge_path(spans, &c));
    } else {
      opufid_challenge_default(&c);
    }
    if (id) {
      if (id->empty() || id->size() >= OPUFID_LABEL_MAX) {
        throw CLI::ValidationError("--challenge-id", "must be 1-63 characters");
      }
      std::snprintf(c.challenge_id, sizeof c.challenge_id, "%s", id->c_str());
    }
    if (sweep_rate) c.sweep_rate_hz_per_s = *sweep_rate;
    if (sweep_time) c.sweep_time_s = *sweep_time;
    if (samples) c.n_samples = *samples;
    if (gate_start || gate_end) {
      if (!gate_start || !gate_end) {
        throw CLI::ValidationError("--gate-start/--gate-end", "give both ends of the gate");
      }
      c.has_gate = 1;
      c.gate_start_m = *gate_start;
      c.gate_end_m = *gate_end;
    }
    return c;
  }
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;

  std::uint64_t seed_or_default() const { return seed.value_or(1); }
  const std::string& out_or(const std::string& fallback) {
    if (out.empty()) out = fallback;
    return out;
  }
  const std::string& need_out(const char* command) const {
    if (out.empty()) throw CLI::RequiredError(std::string("--out for ") + command);
    return out;
  }
};

Target load_target(const std::string& path) {
  Target t;
  check(opufid_target_load(path.c_str(), t.out()));
  return t;
}

Db load_or_create_db(const std::string& path, const std::string& db_id, const std::string& key) {
  Db db;
  if (std::filesystem::exists(path)) {
    check(opufid_db_load(path.c_str(), db.out()));
  } else {
    const auto bits = parse_hex(key);
    check(opufid_db_create(db_id.c_str(), bits.data(), bits.size(), db.out()));
  }
  return db;
}

int finish_session(const Transcript& t, const std::string& out) {
  std::fputs(opufid_transcript_text(t.get()), stdout);
  if (!out.empty()) check(opufid_transcript_save(t.get(), out.c_str()));
  return opufid_transcript_exit_code(t.get());
}

opufid_path_protocol path_protocol(int n) {
  if (n < 1 || n > 3) throw CLI::ValidationError("--protocol", "must be 1, 2 or 3");
  return static_cast<opufid_path_protocol>(n);
}

std::filesystem::path out_dir(Globals& g) {
  std::filesystem::path dir = g.out_or(".");
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical-PUF fiber identification simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file");

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("--out", g.out, "Output file, or directory for experiments");

  std::function<int()> run;

  // fiber gen
  auto* fiber = app.add_subcommand("fiber", "Fiber synthesis")->require_subcommand(1);
  auto* fiber_gen = fiber->add_subcommand("gen", "Synthesize a fiber");
  double length_m = 0.5;
  double density = 1000.0;
  std::string fiber_id;
  fiber_gen->add_option("--length-m", length_m, "Fiber length in m")->required();
  fiber_gen->add_option("--density", density, "Scatter sites per m")->required();
  fiber_gen->add_option("--id", fiber_id, "Fiber label");
  fiber_gen->callback([&] {
    if (!g.seed) throw CLI::RequiredError("--seed");
    run = [&] {
      Target t;
      check(opufid_fiber_synthesize(length_m, density, *g.seed,
                                    fiber_id.empty() ? nullptr : fiber_id.c_str(), t.out()));
      check(opufid_target_save(t.get(), g.need_out("fiber gen").c_str()));
      std::printf("%s sites=%zu\n", opufid_target_label(t.get()),
                  opufid_target_site_count(t.get()));
      return 0;
    };
  });

  // chain build
  auto* chain = app.add_subcommand("chain", "Fiber chains")->require_subcommand(1);
  auto* chain_build = chain->add_subcommand("build", "Join fibers with connectors");
  std::vector<std::string> span_files;
  std::vector<double> connectors;
  chain_build->add_option("--span", span_files, "Fiber file, in order")->required();
  chain_build->add_option("--connector", connectors, "Connector reflectivities (spans + 1)")
      ->delimiter(',');
  chain_build->callback([&] {
    run = [&] {
      std::vector<Target> spans;
      std::vector<const opufid_target*> ptrs;
      for (const auto& f : span_files) {
        spans.push_back(load_target(f));
        ptrs.push_back(spans.back().get());
      }
      Target t;
      check(opufid_chain_build(ptrs.data(), ptrs.size(),
                               connectors.empty() ? nullptr : connectors.data(),
                               connectors.size(), t.out()));
      check(opufid_target_save(t.get(), g.need_out("chain build").c_str()));
      std::printf("%s reflectors=%zu\n", opufid_target_label(t.get()),
                  opufid_target_site_count(t.get()));
      return 0;
    };
  });

  // acquire
  auto* acquire = app.add_subcommand("acquire", "Measure an RBP trace");
  std::string target_file;
  std::string snr_text = "inf";
  int quantized_bits = 0;
  std::string quantized_out;
  ChallengeArgs challenge_args;
  acquire->add_option("--target", target_file, "Fiber or chain file")->required();
  acquire->add_option("--snr", snr_text, "SNR in dB, or inf");
  acquire->add_option("--quantize-bits", quantized_bits, "Also write ADC levels at this depth");
  acquire->add_option("--quantized-out", quantized_out, "File for the ADC levels");
  challenge_args.add(acquire);
  acquire->callback([&] {
    run = [&] {
      const auto target = load_target(target_file);
      const auto c = challenge_args.resolve(opufid_target_span_count(target.get()));
      Trace trace;
      check(opufid_acquire(target.get(), &c, parse_snr(snr_text), g.seed_or_default(),
                           trace.out()));
      check(opufid_trace_save_csv(trace.get(), g.need_out("acquire").c_str()));
      if (quantized_bits > 0) {
        if (quantized_out.empty()) throw CLI::RequiredError("--quantized-out");
        check(opufid_trace_save_quantized_csv(trace.get(), quantized_bits,
                                              quantized_out.c_str()));
      }
      std::printf("samples=%zu challenge=%s\n", opufid_trace_size(trace.get()), c.challenge_id);
      return 0;
    };
  });

  // sign
  auto* sign = app.add_subcommand("sign", "Derive a digital signature");
  std::string trace_file;
  std::string key_hex;
  int protocol_number = 0;
  std::size_t side = 0;
  int adc_bits = 6;
  std::string pbm_out;
  sign->add_option("--trace", trace_file, "Trace CSV for a direct signature");
  sign->add_option("--target", target_file, "Chain file for a path ID");
  sign->add_option("--protocol", protocol_number, "Path protocol 1, 2 or 3");
  sign->add_option("--key", key_hex, "Key bits as hex");
  sign->add_option("--side", side, "Path ID side (0: protocol default)");
  sign->add_option("--adc-bits", adc_bits, "ADC depth for path scans");
  sign->add_option("--pbm", pbm_out, "Also write the ID as a PBM image");
  sign->add_option("--snr", snr_text, "SNR in dB for path scans, or inf");
  challenge_args.add(sign);
  sign->callback([&] {
    if (trace_file.empty() == target_file.empty()) {
      throw CLI::ValidationError("sign", "give exactly one of --trace or --target");
    }
    run = [&] {
      const auto key = parse_hex(key_hex);
      Signature sig;
      if (!trace_file.empty()) {
        Trace trace;
        check(opufid_trace_load_csv(trace_file.c_str(), trace.out()));
        check(opufid_sign_direct(trace.get(), key.data(), key.size(), sig.out()));
      } else {
        const auto target = load_target(target_file);
        const auto c = challenge_args.resolve(opufid_target_span_count(target.get()));
        opufid_path_options o;
        opufid_path_options_default(&o);
        o.adc_bits = adc_bits;
        o.side = side;
        o.snr_db = parse_snr(snr_text);
        o.noise_seed = g.seed_or_default();
        o.key = key.data();
        o.key_len = key.size();
        check(opufid_sign_path(target.get(), &c, path_protocol(protocol_number), &o, sig.out()));
      }
      check(opufid_signature_save(sig.get(), g.need_out("sign").c_str()));
      if (!pbm_out.empty()) check(opufid_signature_export_pbm(sig.get(), pbm_out.c_str()));
      std::printf("rows=%zu cols=%zu key_len=%zu\n", opufid_signature_rows(sig.get()),
                  opufid_signature_cols(sig.get()), opufid_signature_key_len(sig.get()));
      return 0;
    };
  });

  // enroll
  auto* enroll = app.add_subcommand("enroll", "Enroll a fiber or chain");
  std::string db_file, db_id = "D1", db_key;
  std::string db2_file, db2_id = "D2", db2_key;
  std::string key_id, key_id2;
  std::string label;
  std::optional<double> m_u, m_v;
  enroll->add_option("--db", db_file, "Database file (created when missing)")->required();
  enroll->add_option("--db-id", db_id, "Id of a new database");
  enroll->add_option("--db-key", db_key, "Key of a new database, hex");
  enroll->add_option("--target", target_file, "Fiber or chain file")->required();
  enroll->add_option("--label", label, "Sub-system label")->required();
  enroll->add_option("--protocol", protocol_number, "Enroll a path ID for protocol 1, 2 or 3");
  enroll->add_option("--key", key_hex, "Key bits appended to a direct signature, hex");
  enroll->add_option("--key-id", key_id, "Key id of the record (database key is appended)");
  enroll->add_option("--side", side, "Path ID side (0: protocol default)");
  enroll->add_option("--m-u", m_u, "Genuine HD mean for a new database");
  enroll->add_option("--m-v", m_v, "Impostor HD mean for a new database");
  enroll->add_option("--db2", db2_file, "Second database for dual enrollment");
  enroll->add_option("--db2-id", db2_id, "Id of a new second database");
  enroll->add_option("--db2-key", db2_key, "Key of a new second database, hex");
  enroll->add_option("--key-id2", key_id2, "Key id for the second database");
  challenge_args.add(enroll);
  enroll->callback([&] {
    if (m_u.has_value() != m_v.has_value()) {
      throw CLI::ValidationError("--m-u/--m-v", "give both calibration means");
    }
    run = [&] {
      const bool fresh = !std::filesystem::exists(db_file);
      auto db = load_or_create_db(db_file, db_id, db_key);
      const auto target = load_target(target_file);
      const std::size_t spans = protocol_number ? opufid_target_span_count(target.get()) : 0;
      const auto c = challenge_args.resolve(spans);

      if (fresh) {
        double mu = m_u.value_or(kDirectMu), mv = m_v.value_or(kDirectMv);
        if (protocol_number && !m_u) {
          opufid_path_exp_config pc;
          opufid_path_exp_config_default(&pc);
          pc.seed = g.seed_or_default();
          pc.protocol = path_protocol(protocol_number);
          pc.side = side;
          check(opufid_calibrate_path(&pc, &mu, &mv));
        }
        check(opufid_db_set_calibration(db.get(), mu, mv));
      }

      if (!db2_file.empty()) {
        if (key_id.empty() || key_id2.empty()) throw CLI::RequiredError("--key-id and --key-id2");
        const bool fresh2 = !std::filesystem::exists(db2_file);
        auto db2 = load_or_create_db(db2_file, db2_id, db2_key);
        if (fresh2) {
          check(opufid_db_set_calibration(db2.get(), m_u.value_or(kDirectMu),
                                          m_v.value_or(kDirectMv)));
        }
        check(opufid_enroll_dual(db.get(), key_id.c_str(), db2.get(), key_id2.c_str(),
                                 label.c_str(), target.get(), &c));
        check(opufid_db_save(db.get(), db_file.c_str()));
        check(opufid_db_save(db2.get(), db2_file.c_str()));
        std::printf("enrolled %s in %s and %s\n", label.c_str(), db_file.c_str(),
                    db2_file.c_str());
        return 0;
      }

      Signature sig;
      const auto key = parse_hex(key_hex);
      if (protocol_number) {
        opufid_path_options o;
        opufid_path_options_default(&o);
        o.side = side;
        o.key = key.data();
        o.key_len = key.size();
        check(opufid_sign_path(target.get(), &c, path_protocol(protocol_number), &o, sig.out()));
      } else {
        Trace trace;
        check(opufid_acquire(target.get(), &c, INFINITY, 0, trace.out()));
        check(opufid_sign_direct(trace.get(), key.data(), key.size(), sig.out()));
      }
      char record_id[64];
      check(opufid_db_enroll(db.get(), label.c_str(), &c, sig.get(),
                             key_id.empty() ? nullptr : key_id.c_str(), record_id,
                             sizeof record_id));
      check(opufid_db_save(db.get(), db_file.c_str()));
      std::printf("%s\n", record_id);
      return 0;
    };
  });

  // identify
  auto* identify = app.add_subcommand("identify", "Identify a pigtail against a database");
  std::optional<double> threshold;
  identify->add_option("--db", db_file, "Database file")->required();
  identify->add_option("--target", target_file, "Fiber under test")->required();
  identify->add_option("--label", label, "Claimed label")->required();
  identify->add_option("--snr", snr_text, "SNR in dB, or inf");
  identify->add_option("--key", key_hex, "Key bits appended to the signature, hex");
  identify->add_option("--threshold", threshold, "HD threshold (default: database calibration)");
  challenge_args.add(identify);
  identify->callback([&] {
    run = [&] {
      Db db;
      check(opufid_db_load(db_file.c_str(), db.out()));
      const auto target = load_target(target_file);
      const auto c = challenge_args.resolve(0);
      const auto key = parse_hex(key_hex);
      Transcript t;
      check(opufid_identify(target.get(), label.c_str(), &c, db.get(), parse_snr(snr_text),
                            g.seed_or_default(), key.data(), key.size(),
                            threshold ? &*threshold : nullptr, t.out()));
      return finish_session(t, g.out);
    };
  });

  // protocol N
  auto* protocol = app.add_subcommand("protocol", "Run identification protocol 1, 2, 3 or 4");
  int protocol_id = 0;
  std::vector<std::string> held_keys;
  std::string choose_key, declare_key;
  protocol->add_option("number", protocol_id, "Protocol number")
      ->required()
      ->check(CLI::Range(1, 4));
  protocol->add_option("--db", db_file, "Database file (D1 for protocol 4)")->required();
  protocol->add_option("--db2", db2_file, "Second database (protocol 4)");
  protocol->add_option("--target", target_file, "Chain, or the user's fiber for protocol 4")
      ->required();
  protocol->add_option("--label", label, "Claimed label")->required();
  protocol->add_option("--snr", snr_text, "SNR in dB, or inf");
  protocol->add_option("--threshold", threshold, "HD threshold (default: database calibration)");
  protocol->add_option("--side", side, "Path ID side (0: protocol default)");
  protocol->add_option("--adc-bits", adc_bits, "ADC depth for path scans");
  protocol->add_option("--key", key_hex, "Key bits for path IDs, hex");
  protocol->add_option("--held-key", held_keys, "Protocol 4 key held by the user, id=hex");
  protocol->add_option("--choose-key", choose_key, "Protocol 4 key the user concatenates");
  protocol->add_option("--declare-key", declare_key, "Protocol 4 key the user names");
  challenge_args.add(protocol);
  protocol->callback([&] {
    if (protocol_id == 4 && db2_file.empty()) throw CLI::RequiredError("--db2 for protocol 4");
    run = [&] {
      Db db;
      check(opufid_db_load(db_file.c_str(), db.out()));
      const auto target = load_target(target_file);
      Transcript t;
      if (protocol_id == 4) {
        Db db2;
        check(opufid_db_load(db2_file.c_str(), db2.out()));
        std::vector<std::string> ids;
        std::vector<std::vector<uint8_t>> bits;
        for (const auto& entry : held_keys) {
          const auto eq = entry.find('=');
          if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError("--held-key", "expected id=hex, got '" + entry + "'");
          }
          ids.push_back(entry.substr(0, eq));
          bits.push_back(parse_hex(entry.substr(eq + 1)));
        }
        std::vector<opufid_held_key> keys;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          keys.push_back({ids[i].c_str(), bits[i].data(), bits[i].size()});
        }
        const auto c = challenge_args.resolve(0);
        opufid_p4_options o;
        opufid_p4_options_default(&o);
        o.snr_db = parse_snr(snr_text);
        o.seed = g.seed_or_default();
        o.chosen_key_id = choose_key.empty() ? nullptr : choose_key.c_str();
        o.declared_key_id = declare_key.empty() ? nullptr : declare_key.c_str();
        o.threshold = threshold ? &*threshold : nullptr;
        check(opufid_protocol4(target.get(), label.c_str(), keys.data(), keys.size(), db.get(),
                               db2.get(), &c, &o, t.out()));
      } else {
        const auto c = challenge_args.resolve(opufid_target_span_count(target.get()));
        const auto key = parse_hex(key_hex);
        opufid_path_options o;
        opufid_path_options_default(&o);
        o.adc_bits = adc_bits;
        o.side = side;
        o.snr_db = parse_snr(snr_text);
        o.noise_seed = g.seed_or_default();
        o.key = key.data();
        o.key_len = key.size();
        check(opufid_protocol_path(path_protocol(protocol_id), target.get(), label.c_str(), &c,
                                   db.get(), &o, threshold ? &*threshold : nullptr, t.out()));
      }
      return finish_session(t, g.out);
    };
  });

  // exp
  auto* exp = app.add_subcommand("exp", "Statistical experiments")->require_subcommand(1);
  opufid_exp_config ec;
  opufid_exp_config_default(&ec);
  std::vector<std::string> snr_list{"0"};
  std::vector<double> gamma_list;
  auto add_hd_options = [&](CLI::App* sub) {
    sub->add_option("--repetitions", ec.repetitions, "Signatures per experiment");
    sub->add_option("--length-m", ec.length_m, "Pigtail length in m");
    sub->add_option("--density", ec.density_per_m, "Scatter sites per m");
    sub->add_option("--key-bits", ec.key_bits, "Random key bits per signature");
  };
  auto hd_command = [&](const char* kind) {
    return [&, kind] {
      ec.seed = g.seed_or_default();
      const auto dir = out_dir(g);
      const auto hist = (dir / (std::string(kind) + "_hist.csv")).string();
      const auto summary = (dir / (std::string(kind) + "_summary.csv")).string();
      opufid_hd_summary s;
      check(opufid_exp_hd(kind, &ec, parse_snr(snr_list.at(0)), hist.c_str(), summary.c_str(),
                          &s));
      std::printf("%s count=%zu n_bits=%zu mean=%s variance=%s min=%zu max=%zu\n", kind, s.count,
                  s.n_bits, fmt(s.mean).c_str(), fmt(s.variance).c_str(), s.min, s.max);
      return 0;
    };
  };
  for (const char* kind : {"inner", "intra", "inter"}) {
    auto* sub = exp->add_subcommand(kind, std::string(kind) + "-HD histogram");
    add_hd_options(sub);
    if (std::string(kind) == "intra") {
      sub->add_option("--snr", snr_list, "SNR in dB")->expected(1);
    }
    sub->callback([&, kind] { run = hd_command(kind); });
  }
  auto* fpfn = exp->add_subcommand("fpfn", "False positive/negative sweep over gamma");
  add_hd_options(fpfn);
  fpfn->add_option("--snr", snr_list, "SNR list in dB")->delimiter(',');
  fpfn->add_option("--gamma", gamma_list, "Gamma grid")->delimiter(',');
  fpfn->callback([&] {
    run = [&] {
      ec.seed = g.seed_or_default();
      std::vector<double> snr;
      for (const auto& s : snr_list) snr.push_back(parse_snr(s));
      if (gamma_list.empty()) {
        for (int i = 0; i <= 20; ++i) gamma_list.push_back(i / 20.0);
      }
      const auto dir = out_dir(g);
      check(opufid_exp_fpfn(&ec, snr.data(), snr.size(), gamma_list.data(), gamma_list.size(),
                            dir.c_str()));
      for (double s : snr) std::printf("wrote %s\n", (dir / ("fpfn_snr" + fmt(s) + ".csv")).c_str());
      return 0;
    };
  });
  auto* fake = exp->add_subcommand("fake-id", "Path-ID discrimination with random fakes");
  opufid_path_exp_config pc;
  opufid_path_exp_config_default(&pc);
  std::size_t genuine = 200, fakes = 25;
  int fake_protocol = 1;
  std::string fake_snr = "inf";
  fake->add_option("--genuine", genuine, "Enrolled networks");
  fake->add_option("--fake", fakes, "Random fake IDs");
  fake->add_option("--protocol", fake_protocol, "Path protocol 1, 2 or 3");
  fake->add_option("--side", pc.side, "ID side (0: protocol default)");
  fake->add_option("--snr", fake_snr, "Probe SNR in dB, or inf");
  fake->add_option("--adc-bits", pc.adc_bits, "ADC depth");
  fake->callback([&] {
    run = [&] {
      pc.seed = g.seed_or_default();
      pc.protocol = path_protocol(fake_protocol);
      pc.snr_db = parse_snr(fake_snr);
      opufid_fake_id_result r;
      check(opufid_exp_fake_id(&pc, genuine, fakes, &r));
      std::string line = "matched=" + std::to_string(r.matched) +
                         " rejected=" + std::to_string(r.rejected) +
                         " ambiguous=" + std::to_string(r.ambiguous);
      if (r.failed) line += " failed=" + std::to_string(r.failed);
      const auto dir = out_dir(g);
      const auto csv = (dir / "fake_id.csv").string();
      std::FILE* f = std::fopen(csv.c_str(), "w");
      if (!f) throw Failure{OPUFID_ERR_STORAGE};
      std::fprintf(f, "genuine,fake,matched,rejected,ambiguous,failed,m_u,m_v,threshold\n");
      std::fprintf(f, "%zu,%zu,%zu,%zu,%zu,%zu,%s,%s,%s\n", genuine, fakes, r.matched,
                   r.rejected, r.ambiguous, r.failed, fmt(r.m_u).c_str(), fmt(r.m_v).c_str(),
                   fmt(r.threshold).c_str());
      std::fclose(f);
      std::printf("%s\n", line.c_str());
      return 0;
    };
  });

  // export qr
  auto* export_cmd = app.add_subcommand("export", "Export artifacts")->require_subcommand(1);
  auto* qr = export_cmd->add_subcommand("qr", "Render an ID as a black/white PBM");
  std::string sig_file;
  qr->add_option("--sig", sig_file, "Signature file")->required();
  qr->callback([&] {
    run = [&] {
      Signature sig;
      check(opufid_signature_load(sig_file.c_str(), sig.out()));
      check(opufid_signature_export_pbm(sig.get(), g.need_out("export qr").c_str()));
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return run();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", opufid_status_name(f.status), opufid_last_error());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return kExitError;
}
