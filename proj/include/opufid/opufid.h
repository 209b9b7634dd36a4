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

#ifndef OPUFID_OPUFID_H_
#define OPUFID_OPUFID_H_

/* C interface to the opufid optical-PUF simulator.
 *
 * Every fallible call returns an opufid_status; on failure a message for the
 * calling thread is available from opufid_last_error() until the next call.
 * Objects are opaque handles released with the matching *_free function.
 * Pointers returned by accessors stay valid for the lifetime of the handle.
 * Pass INFINITY (math.h) as snr_db for a noiseless acquisition.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(OPUFID_BUILDING)
#define OPUFID_API __attribute__((visibility("default")))
#else
#define OPUFID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum opufid_status {
  OPUFID_OK = 0,
  OPUFID_ERR_INVALID_PARAMETER = 1,
  OPUFID_ERR_OUT_OF_RANGE = 2,
  OPUFID_ERR_DEGENERATE_SEGMENT = 3,
  OPUFID_ERR_EMPTY_OVERLAP = 4,
  OPUFID_ERR_INSUFFICIENT_ENTROPY = 5,
  OPUFID_ERR_CONFLICT = 6,
  OPUFID_ERR_STORAGE = 7,
  OPUFID_ERR_PARSE = 8,
  OPUFID_ERR_ACQUISITION = 9,
  OPUFID_ERR_INTERNAL = 100
} opufid_status;

/* "ok", "invalid-parameter", "out-of-range", ... */
OPUFID_API const char* opufid_status_name(opufid_status status);
OPUFID_API const char* opufid_last_error(void);
OPUFID_API const char* opufid_version(void);

typedef struct opufid_target opufid_target; /* a fiber or a chain of fibers */
typedef struct opufid_trace opufid_trace;
typedef struct opufid_signature opufid_signature;
typedef struct opufid_db opufid_db;
typedef struct opufid_transcript opufid_transcript;

#define OPUFID_LABEL_MAX 64

typedef struct opufid_challenge {
  char challenge_id[OPUFID_LABEL_MAX];
  double e0;
  double sweep_rate_hz_per_s;
  double sweep_time_s;
  size_t n_samples;
  int has_gate;
  double gate_start_m;
  double gate_end_m;
} opufid_challenge;

/* Pigtail challenge: 7e11 Hz/s, 0.5 s, 4000 samples. */
OPUFID_API void opufid_challenge_default(opufid_challenge* out);
/* Alias-free path challenge for `spans` spans of 0.5 m. */
OPUFID_API opufid_status opufid_challenge_path(size_t spans, opufid_challenge* out);

/* ---- targets ---- */

/* fiber_id may be NULL for "fiber-<seed>". */
OPUFID_API opufid_status opufid_fiber_synthesize(double length_m, double density_per_m,
                                                 uint64_t seed, const char* fiber_id,
                                                 opufid_target** out);
/* Joins fibers into a chain. connectors may be NULL for n_spans + 1 default
 * connectors; otherwise n_connectors must equal n_spans + 1. */
OPUFID_API opufid_status opufid_chain_build(const opufid_target* const* spans, size_t n_spans,
                                            const double* connectors, size_t n_connectors,
                                            opufid_target** out);
OPUFID_API opufid_status opufid_target_load(const char* path, opufid_target** out);
OPUFID_API opufid_status opufid_target_save(const opufid_target* target, const char* path);
/* 0 for a single fiber. */
OPUFID_API size_t opufid_target_span_count(const opufid_target* target);
OPUFID_API size_t opufid_target_site_count(const opufid_target* target);
OPUFID_API const char* opufid_target_label(const opufid_target* target);
OPUFID_API void opufid_target_free(opufid_target* target);

/* ---- traces ---- */

OPUFID_API opufid_status opufid_acquire(const opufid_target* target,
                                        const opufid_challenge* challenge, double snr_db,
                                        uint64_t noise_seed, opufid_trace** out);
OPUFID_API size_t opufid_trace_size(const opufid_trace* trace);
OPUFID_API const double* opufid_trace_samples(const opufid_trace* trace);
OPUFID_API const char* opufid_trace_challenge_id(const opufid_trace* trace);
OPUFID_API opufid_status opufid_trace_save_csv(const opufid_trace* trace, const char* path);
OPUFID_API opufid_status opufid_trace_load_csv(const char* path, opufid_trace** out);
/* Writes `index,level` rows for a uniform `bits_per_sample` quantizer. */
OPUFID_API opufid_status opufid_trace_save_quantized_csv(const opufid_trace* trace,
                                                         int bits_per_sample, const char* path);
OPUFID_API void opufid_trace_free(opufid_trace* trace);

/* ---- signatures ---- */

OPUFID_API opufid_status opufid_sign_direct(const opufid_trace* trace, const uint8_t* key,
                                            size_t key_len, opufid_signature** out);

typedef enum opufid_path_protocol {
  OPUFID_PATH_TWO_SUBSYSTEMS = 1,
  OPUFID_PATH_CASCADED_I = 2,
  OPUFID_PATH_CASCADED_II = 3
} opufid_path_protocol;

typedef struct opufid_path_options {
  int adc_bits;
  double snr_db;
  uint64_t noise_seed;
  double window_m; /* centred in each span */
  size_t side;     /* 0: protocol default, 16 or 14 for cascade I */
  const uint8_t* key;
  size_t key_len;
} opufid_path_options;

/* 6-bit ADC, noiseless, 0.26 m windows, default side, no key. */
OPUFID_API void opufid_path_options_default(opufid_path_options* out);
OPUFID_API opufid_status opufid_sign_path(const opufid_target* chain,
                                          const opufid_challenge* challenge,
                                          opufid_path_protocol protocol,
                                          const opufid_path_options* options,
                                          opufid_signature** out);
OPUFID_API size_t opufid_signature_rows(const opufid_signature* sig);
OPUFID_API size_t opufid_signature_cols(const opufid_signature* sig);
OPUFID_API size_t opufid_signature_key_len(const opufid_signature* sig);
/* Copies rows*cols bits, row-major, into out[0..capacity). */
OPUFID_API opufid_status opufid_signature_bits(const opufid_signature* sig, uint8_t* out,
                                               size_t capacity);
OPUFID_API opufid_status opufid_signature_save(const opufid_signature* sig, const char* path);
OPUFID_API opufid_status opufid_signature_load(const char* path, opufid_signature** out);
/* Plain-text PBM (P1) rendering of the bit matrix. */
OPUFID_API opufid_status opufid_signature_export_pbm(const opufid_signature* sig,
                                                     const char* path);
OPUFID_API opufid_status opufid_hamming(const opufid_signature* a, const opufid_signature* b,
                                        size_t* out);
OPUFID_API void opufid_signature_free(opufid_signature* sig);

/* ---- challenge-response database ---- */

/* key_len must be a multiple of 4; key may be NULL when key_len is 0. */
OPUFID_API opufid_status opufid_db_create(const char* db_id, const uint8_t* key, size_t key_len,
                                          opufid_db** out);
/* Loads and binds: later enrollments rewrite the file. */
OPUFID_API opufid_status opufid_db_load(const char* path, opufid_db** out);
OPUFID_API opufid_status opufid_db_save(const opufid_db* db, const char* path);
OPUFID_API opufid_status opufid_db_set_calibration(opufid_db* db, double m_u, double m_v);
OPUFID_API size_t opufid_db_size(const opufid_db* db);
/* key_id may be NULL. The new record id is copied into record_id when it is
 * not NULL. */
OPUFID_API opufid_status opufid_db_enroll(opufid_db* db, const char* label,
                                          const opufid_challenge* challenge,
                                          const opufid_signature* response, const char* key_id,
                                          char* record_id, size_t capacity);
OPUFID_API void opufid_db_free(opufid_db* db);

/* ---- sessions ----
 * A session that runs returns OPUFID_OK; its result is in the transcript.
 * threshold may be NULL to use the database calibration at gamma = 0.5. */

OPUFID_API opufid_status opufid_identify(const opufid_target* user, const char* claimed_label,
                                         const opufid_challenge* challenge, const opufid_db* db,
                                         double snr_db, uint64_t noise_seed, const uint8_t* key,
                                         size_t key_len, const double* threshold,
                                         opufid_transcript** out);
OPUFID_API opufid_status opufid_protocol_path(opufid_path_protocol protocol,
                                              const opufid_target* chain,
                                              const char* claimed_label,
                                              const opufid_challenge* challenge,
                                              const opufid_db* db,
                                              const opufid_path_options* options,
                                              const double* threshold, opufid_transcript** out);

typedef struct opufid_held_key {
  const char* key_id;
  const uint8_t* bits;
  size_t n_bits;
} opufid_held_key;

typedef struct opufid_p4_options {
  double snr_db;
  uint64_t seed;
  const char* chosen_key_id;   /* NULL: drawn from the held keys */
  const char* declared_key_id; /* NULL: the chosen key */
  const double* threshold;
} opufid_p4_options;

OPUFID_API void opufid_p4_options_default(opufid_p4_options* out);
/* Enrolls `user` in both databases with their own keys. */
OPUFID_API opufid_status opufid_enroll_dual(opufid_db* d1, const char* k1_id, opufid_db* d2,
                                            const char* k2_id, const char* label,
                                            const opufid_target* user,
                                            const opufid_challenge* challenge);
OPUFID_API opufid_status opufid_protocol4(const opufid_target* user, const char* label,
                                          const opufid_held_key* keys, size_t n_keys,
                                          const opufid_db* d1, const opufid_db* d2,
                                          const opufid_challenge* challenge,
                                          const opufid_p4_options* options,
                                          opufid_transcript** out);

/* "identified", "rejected", "rejected:key-mismatch" or "failed:<reason>". */
OPUFID_API const char* opufid_transcript_outcome(const opufid_transcript* t);
/* 0 identified, 2 rejected, 3 failed. */
OPUFID_API int opufid_transcript_exit_code(const opufid_transcript* t);
/* One `step<TAB>actor<TAB>summary` line per step, then `outcome<TAB>...`. */
OPUFID_API const char* opufid_transcript_text(const opufid_transcript* t);
OPUFID_API size_t opufid_transcript_step_count(const opufid_transcript* t);
OPUFID_API opufid_status opufid_transcript_save(const opufid_transcript* t, const char* path);
OPUFID_API void opufid_transcript_free(opufid_transcript* t);

/* ---- experiments ---- */

typedef struct opufid_exp_config {
  uint64_t seed;
  size_t repetitions;
  double length_m;
  double density_per_m;
  size_t key_bits;
  opufid_challenge challenge;
} opufid_exp_config;

/* seed 1, 100 repetitions, 0.5 m at 1000 sites/m, 96 key bits. */
OPUFID_API void opufid_exp_config_default(opufid_exp_config* out);

typedef struct opufid_hd_summary {
  size_t count;
  size_t n_bits;
  double mean;
  double variance;
  size_t min;
  size_t max;
} opufid_hd_summary;

/* kind is "inner", "intra" or "inter"; snr_db applies to "intra". Either
 * path may be NULL to skip that file. */
OPUFID_API opufid_status opufid_exp_hd(const char* kind, const opufid_exp_config* config,
                                       double snr_db, const char* histogram_csv,
                                       const char* summary_csv, opufid_hd_summary* out);
/* Writes <out_dir>/fpfn_snr<v>.csv for every SNR. */
OPUFID_API opufid_status opufid_exp_fpfn(const opufid_exp_config* config, const double* snr_db,
                                         size_t n_snr, const double* gamma, size_t n_gamma,
                                         const char* out_dir);

typedef struct opufid_path_exp_config {
  uint64_t seed;
  opufid_path_protocol protocol;
  double span_length_m;
  double density_per_m;
  double window_m;
  size_t side; /* 0: protocol default */
  int adc_bits;
  double snr_db;
  size_t calibration_trials;
} opufid_path_exp_config;

OPUFID_API void opufid_path_exp_config_default(opufid_path_exp_config* out);

typedef struct opufid_fake_id_result {
  size_t matched;
  size_t rejected;
  size_t ambiguous;
  size_t failed;
  double threshold;
  double m_u;
  double m_v;
} opufid_fake_id_result;

OPUFID_API opufid_status opufid_exp_fake_id(const opufid_path_exp_config* config, size_t genuine,
                                            size_t fake, opufid_fake_id_result* out);
/* Genuine and single-span-substitution HD means for path databases. */
OPUFID_API opufid_status opufid_calibrate_path(const opufid_path_exp_config* config,
                                               double* m_u, double* m_v);

#ifdef __cplusplus
}
#endif

#endif /* OPUFID_OPUFID_H_ */
