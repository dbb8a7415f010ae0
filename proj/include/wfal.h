/* C API of the workflow active-learning library.
 *
 * The library is driven by a JSON run configuration (the same document the
 * bundled CLI assembles from its flags). A session wraps one parsed
 * configuration; commands run against it and report status codes, with a
 * human-readable message retrievable from the session.
 *
 * Status codes match the CLI exit codes: 0 ok, 2 configuration error,
 * 3 runtime error, 4 data exhaustion.
 */
#ifndef WFAL_H
#define WFAL_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wfal_status {
  WFAL_OK = 0,
  WFAL_ERR_CONFIG = 2,
  WFAL_ERR_RUNTIME = 3,
  WFAL_ERR_EXHAUSTED = 4
} wfal_status;

typedef struct wfal_session wfal_session;

const char* wfal_version(void);

/* Parses and validates the JSON configuration. A session is returned even on
 * failure (unless allocation itself fails) so the error text is available;
 * it must always be destroyed. */
wfal_status wfal_session_create(const char* config_json, wfal_session** out_session);

void wfal_session_destroy(wfal_session* session);

/* Message describing the last failure on this session; empty string if none.
 * Owned by the session, valid until the next call on it. */
const char* wfal_session_error(const wfal_session* session);

/* Runs the configured experiments and writes traces.csv under the configured
 * output directory. */
wfal_status wfal_run_simulate(wfal_session* session);

/* Trains per the configured mode (active, baseline or ablation) and writes
 * metrics.csv, histograms.csv and per-seed checkpoints. */
wfal_status wfal_run_train(wfal_session* session);

/* Aggregates metrics files into report.csv / report.json and prints a
 * per-mode summary. */
wfal_status wfal_run_report(wfal_session* session);

/* Dispatches on the "command" field of the configuration. */
wfal_status wfal_run_command(wfal_session* session);

#ifdef __cplusplus
}
#endif

#endif /* WFAL_H */
