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

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   opufid_acceptance [--criterion N] [--scratch DIR]
//
// Without --criterion every criterion runs in order. The exit status is
// nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "core/decision_stats.hpp"
#include "core/experiments.hpp"
#include "core/ofdr.hpp"
#include "core/protocols.hpp"
#include "core/rng.hpp"
#include "core/signature.hpp"
#include "unit/oracles.hpp"

namespace fs = std::filesystem;
using namespace opufid;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path g_scratch;

Verdict inner_balance() {
  const auto s = hd_statistics(run_inner(ExperimentConfig{}));
  const auto n = run_inner(ExperimentConfig{}).values.size();
  return {n == 2016 && s.mean >= 30.0 && s.mean <= 34.0,
          "pairs=" + std::to_string(n) + " mean=" + fmt("%.3f", s.mean) + " in [30, 34]"};
}

Verdict separation() {
  const ExperimentConfig cfg;
  const auto intra = run_intra(cfg, 0.0);
  const auto inter = run_inter(cfg);
  const auto si = hd_statistics(intra), se = hd_statistics(inter);
  const auto intra_max = *std::max_element(intra.values.begin(), intra.values.end());
  const auto inter_min = *std::min_element(inter.values.begin(), inter.values.end());
  const double limit = 0.15 * 4096;
  const bool ok_intra = si.mean < limit;
  const bool ok_inter = se.mean >= 1900.0 && se.mean <= 2150.0;
  const bool ok_overlap = intra_max < inter_min;
  return {ok_intra && ok_inter && ok_overlap,
          "intra mean=" + fmt("%.2f", si.mean) + (ok_intra ? " < " : " NOT < ") +
              fmt("%.1f", limit) + "; inter mean=" + fmt("%.2f", se.mean) +
              (ok_inter ? " in" : " NOT in") + " [1900, 2150]; intra max=" +
              std::to_string(intra_max) + " inter min=" + std::to_string(inter_min) +
              (ok_overlap ? " (disjoint)" : " (overlap)")};
}

Verdict error_probabilities() {
  const double m_u = 144.06, m_v = 1994.08;
  const std::size_t n = 4096;
  const double t = threshold({0.5, m_u, m_v, n});
  const auto fp = p_false_positive(m_v, n, t);
  const auto fn = p_false_negative(m_u, n, t);
  const auto k = static_cast<long>(std::floor(t));
  const double fp_ref = oracle::log10_lower_tail(n, m_v / n, k);
  const double fn_ref = oracle::log10_upper_tail(n, m_u / n, k);
  const bool ok = std::abs(t - 1069.07) < 1e-9 && fp.log10 < -50 && fn.log10 < -50 &&
                  std::abs(fp.log10 - fp_ref) <= 0.1 && std::abs(fn.log10 - fn_ref) <= 0.1;
  return {ok, "t=" + fmt("%.2f", t) + " log10 FP=" + fmt("%.3f", fp.log10) + " (oracle " +
                  fmt("%.3f", fp_ref) + ") log10 FN=" + fmt("%.3f", fn.log10) + " (oracle " +
                  fmt("%.3f", fn_ref) + ")"};
}

Verdict gamma_endpoints() {
  const auto grid = uniform_gamma_grid(21);
  const auto curve = error_curve(144.06, 1994.08, 4096, grid);
  const double fn0 = curve.front().false_negative.linear;
  const double fp1 = curve.back().false_positive.linear;
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    monotone = monotone && curve[i].false_positive.log10 >= curve[i - 1].false_positive.log10 &&
               curve[i].false_negative.log10 <= curve[i - 1].false_negative.log10;
  }
  return {std::abs(fn0 - 0.5) <= 0.1 && std::abs(fp1 - 0.5) <= 0.1 && monotone,
          "FN(0)=" + fmt("%.4f", fn0) + " FP(1)=" + fmt("%.4f", fp1) +
              (monotone ? " monotone" : " NOT monotone") + " over 21 points"};
}

Verdict path_discrimination() {
  const auto r = run_fake_id(PathConfig{}, 200, 25);
  return {r.matched == 200 && r.ambiguous == 0 && r.rejected == 25 && r.failed == 0,
          r.summary()};
}

Verdict spoofing() {
  bool ok = true;
  std::string detail;
  for (auto protocol :
       {PathProtocol::kTwoSubsystems, PathProtocol::kCascadedI, PathProtocol::kCascadedII}) {
    PathConfig cfg;
    cfg.protocol = protocol;
    const auto s = run_spoof(cfg, 25, 100);
    ok = ok && s.sessions == 100 && s.rejected == 100;
    detail += "P" + std::to_string(static_cast<int>(protocol)) + " rejected " +
              std::to_string(s.rejected) + "/" + std::to_string(s.sessions) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Verdict key_gate() {
  const Challenge c;
  const Bits k1 = random_bits(96, 1, 21), k2 = random_bits(96, 2, 21);
  CrpDatabase d1("D1", k1, Calibration{144.06, 1994.08});
  CrpDatabase d2("D2", k2, Calibration{144.06, 1994.08});
  const std::size_t users = 10;
  for (std::size_t u = 0; u < users; ++u) {
    enroll_dual(d1, "K1", d2, "K2", "u" + std::to_string(u),
                Fiber::synthesize(0.5, 1000, 500 + u), c);
  }
  const Party cn{Role::kCentralNode, "cn", Fiber::synthesize(0.5, 1000, 0), {}};
  std::size_t mismatch = 0, identified = 0;
  for (std::size_t s = 0; s < 100; ++s) {
    const auto u = s % users;
    const Party user{Role::kUser, "u" + std::to_string(u), Fiber::synthesize(0.5, 1000, 500 + u),
                     {{"K1", k1}, {"K2", k2}}};
    Protocol4Options o;
    o.snr_db = 10.0;
    o.seed = mix_seed(77, s);
    o.chosen_key_id = s % 2 ? "K1" : "K2";
    o.declared_key_id = s % 2 ? "K2" : "K1";
    mismatch += protocol4_cn_assisted(cn, user, d1, d2, c, o).outcome() == "rejected:key-mismatch";
    o.declared_key_id.reset();
    o.chosen_key_id.reset();
    identified += protocol4_cn_assisted(cn, user, d1, d2, c, o).identified();
  }
  return {mismatch == 100 && identified == 100,
          "wrong key -> key-mismatch " + std::to_string(mismatch) +
              "/100; genuine -> identified " + std::to_string(identified) + "/100"};
}

Verdict oracles() {
  std::mt19937_64 rng(8);
  // Trace vs term-by-term summation.
  double trace_err = 0.0;
  {
    const auto fiber = Fiber::synthesize(0.5, 200, 8);
    const Challenge c;
    const auto got = acquire(fiber, c);
    std::vector<oracle::Site> sites;
    for (const auto& s : fiber.sites()) sites.push_back({s.position_m, s.reflectivity});
    const auto ref = oracle::direct_sum(sites, c.e0, c.sweep_rate_hz_per_s, c.sweep_time_s,
                                        c.n_samples);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      trace_err = std::max(trace_err, std::abs(got.samples[i] - ref[i]));
    }
  }
  // Crossings of real profile windows vs the pairwise segment solve.
  double cross_err = 0.0;
  bool cross_count = true;
  {
    const auto chain = experiment_chain(PathConfig{}, 5);
    const auto challenge = default_path_challenge(2);
    const auto profile = reflectivity_profile(chain, challenge);
    const auto windows = centred_windows(chain);
    const auto a = select_window(profile, windows[0].start_m, windows[0].length_m);
    const auto b = select_window(profile, windows[1].start_m, windows[1].length_m);
    const auto got = intersect(a, b);
    const auto ref =
        oracle::polyline_crossings(a.positions_m, a.amplitudes, b.positions_m, b.amplitudes);
    cross_count = got.size() == ref.size();
    for (std::size_t i = 0; cross_count && i < ref.size(); ++i) {
      cross_err = std::max(cross_err, std::abs(got.points[i].position_m - ref[i].first));
    }
  }
  // Profile vs the O(N^2) DFT.
  double dft_err = 0.0;
  {
    Challenge c;
    c.n_samples = 2048;
    const auto fiber = Fiber::synthesize(0.5, 1000, 9);
    const auto profile = reflectivity_profile(fiber, c);
    const auto ref = oracle::dft_magnitude(acquire(fiber, c).samples);
    double peak = 0.0;
    for (auto v : ref) peak = std::max(peak, v);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      dft_err = std::max(dft_err, std::abs(profile.magnitude[k] - ref[k]) / peak);
    }
  }
  // Binomial tails.
  double tail_err = 0.0;
  for (long k : {0L, 200L, 1069L, 2048L, 3500L}) {
    for (double p : {0.035, 0.25, 0.4868}) {
      const double lo = oracle::log10_lower_tail(4096, p, k);
      const double hi = oracle::log10_upper_tail(4096, p, k);
      if (lo > -300) tail_err = std::max(tail_err, std::abs(log10_binomial_lower_tail(4096, p, k) - lo));
      if (hi > -300) tail_err = std::max(tail_err, std::abs(log10_binomial_upper_tail(4096, p, k) - hi));
    }
  }
  const bool ok = trace_err <= 1e-12 && cross_count && cross_err <= 1e-9 && dft_err <= 1e-9 &&
                  tail_err <= 0.1;
  return {ok, "trace " + fmt("%.2e", trace_err) + " abs; crossings " +
                  (cross_count ? fmt("%.2e", cross_err) : std::string("count mismatch")) +
                  "; DFT " + fmt("%.2e", dft_err) + " rel; tails " + fmt("%.2e", tail_err) +
                  " log10"};
}

int run(const std::string& cmd) {
  return std::system(cmd.c_str());
}

/// All regular files under `dir`, relative path -> bytes.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = s.str();
  }
  return files;
}

Verdict determinism() {
  const std::string cli = OPUFID_CLI_PATH;
  const std::vector<std::string> steps = {
      "--seed 3 --out f1.fiber fiber gen --length-m 0.5 --density 1000 --id f1",
      "--seed 4 --out f2.fiber fiber gen --length-m 0.5 --density 1000",
      "--out chain.chain chain build --span f1.fiber --span f2.fiber",
      "--out trace.csv acquire --target f1.fiber --snr 10 --quantize-bits 6 "
      "--quantized-out trace_q.csv",
      "--out sig.txt sign --trace trace.csv --key 0123456789abcdef01234567 --pbm sig.pbm",
      "--out path.txt sign --target chain.chain --protocol 1",
      "enroll --db d.db --db-id D1 --target f1.fiber --label f1 --key 0123456789abcdef01234567",
      "enroll --db net.db --db-id net --target chain.chain --label link --protocol 1",
      "--out id.tsv identify --db d.db --target f1.fiber --label f1 --snr 5 "
      "--key 0123456789abcdef01234567",
      "--out p1.tsv protocol 1 --db net.db --target chain.chain --label link",
      "enroll --db k1.db --db-id D1 --db-key 0123456789abcdef01234567 --db2 k2.db --db2-id D2 "
      "--db2-key fedcba9876543210fedcba98 --key-id K1 --key-id2 K2 --target f1.fiber "
      "--label f1",
      "--out p4.tsv protocol 4 --db k1.db --db2 k2.db --target f1.fiber --label f1 "
      "--held-key K1=0123456789abcdef01234567 --snr 10",
      "--out inner exp inner",
      "--out intra exp intra --repetitions 5 --snr 3",
      "--out fpfn exp fpfn --repetitions 5 --snr 0,20 --gamma 0,0.5,1",
      "--out fake exp fake-id --genuine 5 --fake 3",
      "--out qr.pbm export qr --sig sig.txt",
  };
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = g_scratch / ("determinism" + std::to_string(pass));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto cmd = "cd '" + dir.string() + "' && '" + cli + "' " + steps[i] + " > stdout" +
                       std::to_string(i) + ".txt 2>&1";
      const int status = run(cmd);
      // Sessions exit 0/2/3 by outcome; anything else is a usage or I/O error.
      if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) == 1 ||
          WEXITSTATUS(status) > 3) {
        return {false, "command failed: opufid " + steps[i]};
      }
    }
    const auto files = snapshot(dir);
    if (pass == 0) {
      first = files;
      continue;
    }
    if (files.size() != first.size()) return {false, "different file sets"};
    for (const auto& [name, bytes] : files) {
      const auto it = first.find(name);
      if (it == first.end() || it->second != bytes) return {false, name + " differs"};
    }
    return {true, std::to_string(steps.size()) + " invocations, " +
                      std::to_string(files.size()) + " files byte-identical across runs"};
  }
  return {false, "unreachable"};
}

const std::vector<std::pair<const char*, std::function<Verdict()>>> kCriteria = {
    {"inner-HD balance", inner_balance},
    {"intra/inter separation", separation},
    {"error probabilities", error_probabilities},
    {"gamma endpoints", gamma_endpoints},
    {"path discrimination", path_discrimination},
    {"spoofing resistance", spoofing},
    {"protocol 4 key gate", key_gate},
    {"oracle equivalence", oracles},
    {"CLI determinism", determinism},
};

// Wall-clock budgets in seconds; 0 means unbounded.
const double kBudget[] = {5, 60, 1, 1, 300, 0, 0, 0, 0};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opufid acceptance criteria"};
  int only = 0;
  std::string scratch = "acceptance_scratch";
  app.add_option("--criterion", only, "Run only this criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--scratch", scratch, "Working directory for files");
  CLI11_PARSE(app, argc, argv);
  g_scratch = fs::absolute(scratch);
  fs::create_directories(g_scratch);

  bool all = true;
  for (int i = 1; i <= 9; ++i) {
    if (only && i != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = kCriteria[i - 1].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double budget = kBudget[i - 1];
    if (budget > 0 && secs >= budget) {
      v.pass = false;
      v.detail += "; over the " + fmt("%g", budget) + " s budget";
    }
    std::printf("criterion %d: %s %s: %s [%.2f s]\n", i, v.pass ? "PASS" : "FAIL",
                kCriteria[i - 1].first, v.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
