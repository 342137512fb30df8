/*
 * Copyright (c) 2026 The EdgeFlow Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API of the EdgeFlow shared library.
 *
 * EdgeFlow trains a latent-graph trajectory sampler (a GFlowNet with a
 * detailed-balance objective) jointly with a trajectory decoder and a toy
 * conditional denoiser, and verifies the reward-proportional sampling
 * property by exhaustive enumeration on small graphs.
 *
 * All entry points return ef_status; EF_OK is 0. On failure a thread-local
 * message is available through ef_last_error(). Sessions are opaque handles
 * created from a config file/text or an existing checkpoint and must be
 * released with ef_session_close().
 */

#ifndef EDGEFLOW_EDGEFLOW_H
#define EDGEFLOW_EDGEFLOW_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ef_status {
  EF_OK = 0,
  EF_ERROR_CONFIG = 2,     /* bad config value, file format, or usage */
  EF_ERROR_NUMERIC = 3,    /* non-finite values or numerically invalid input */
  EF_ERROR_ACCEPTANCE = 4, /* an eval suite threshold failed */
  EF_ERROR_IO = 5,         /* filesystem failure */
  EF_ERROR_INVALID = 6     /* bad handle or argument */
} ef_status;

typedef struct ef_session ef_session;

const char* ef_version(void);

/* Thread-local message describing the most recent failure. */
const char* ef_last_error(void);

/* Pure helpers. ef_edge_count returns 0 and ef_step_budget -1 on error. */
uint64_t ef_edge_count(uint32_t num_nodes);
int64_t ef_step_budget(uint32_t num_nodes, double sparsity);

/* Creates a session from a config file path or from literal config text
 * (exactly one of the two must be non-NULL). seed_override >= 0 replaces
 * the [train] seed before initialization. */
ef_status ef_session_create(const char* config_path, const char* config_text,
                            int64_t seed_override, ef_session** out_session);

/* Restores a session from a checkpoint file (config, parameters, optimizer
 * moments, RNG state and step counter). */
ef_status ef_session_open(const char* checkpoint_path, ef_session** out_session);

void ef_session_close(ef_session* session);

ef_status ef_session_step(const ef_session* session, uint64_t* out_step);

/* Trains until the config's max_steps (or steps_override when nonzero).
 * When out_dir is non-NULL, writes train_log.csv, cadence checkpoints and a
 * final checkpoint.efc there. */
ef_status ef_session_train(ef_session* session, const char* out_dir,
                           uint64_t steps_override);

ef_status ef_session_save(ef_session* session, const char* path);

/* Pure-policy sampling. m_override 0 keeps the configured trajectory count.
 * extra_edges is a comma-separated list of 1-based edge indices appended to
 * every trajectory before decoding (may be NULL or empty). Writes a CSV
 * with columns trajectory,c_hat,sample. */
ef_status ef_session_sample(ef_session* session, uint32_t m_override,
                            const char* extra_edges, uint64_t seed,
                            const char* out_csv_path);

/* Runs an eval suite: "proportionality", "residuals" or "diversity".
 * num_samples 0 selects the suite default. Writes metrics.csv/metrics.json
 * (and generated.csv for the diversity suite) into out_dir when non-NULL.
 * Returns EF_ERROR_ACCEPTANCE when a suite threshold fails. */
ef_status ef_session_eval(ef_session* session, const char* suite, uint64_t seed,
                          uint32_t num_samples, const char* out_dir);

/* Finite-difference audit of the composite loss gradient on a frozen batch;
 * eps must lie in [1e-7, 1e-3]. */
ef_status ef_session_grad_check(ef_session* session, double eps,
                                double* out_max_rel_err);

/* Enumeration preflight: terminal set count, edge-index bijection check and
 * (in analytic reward mode) target distribution statistics as JSON. The
 * JSON is written to out_json_path when non-NULL. */
ef_status ef_session_enumerate_check(ef_session* session, const char* out_json_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EDGEFLOW_EDGEFLOW_H */
