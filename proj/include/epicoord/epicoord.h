#ifndef EPICOORD_H
#define EPICOORD_H

#include <stdint.h>

#if defined(_WIN32)
#define EC_API __declspec(dllexport)
#else
#define EC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ec_status {
  EC_OK = 0,
  EC_ERR_ARGUMENT = 1, /* null handle or out-of-range argument */
  EC_ERR_PARSE = 2,    /* malformed JSON, log or CSV; see ec_last_error_line */
  EC_ERR_CONFIG = 3,   /* document parsed but failed validation */
  EC_ERR_IO = 4,
  EC_ERR_STATE = 5, /* e.g. asking a censored trial for its completion time */
  EC_ERR_INTERNAL = 6
} ec_status;

typedef struct ec_scenario ec_scenario;
typedef struct ec_trial ec_trial;
typedef struct ec_batch ec_batch;

/* Message of the last failed call on this thread ("" when none). */
EC_API const char* ec_last_error(void);
/* 1-based line/column of the last parse error on this thread, 0 when unknown. */
EC_API int ec_last_error_line(void);
EC_API int ec_last_error_column(void);
EC_API const char* ec_version(void);

/* Strings returned through char** are owned by the caller. */
EC_API void ec_string_free(char* s);

EC_API ec_status ec_scenario_default(int team_size, ec_scenario** out);
EC_API ec_status ec_scenario_from_json(const char* text, ec_scenario** out);
EC_API ec_status ec_scenario_from_file(const char* path, ec_scenario** out);
/* "dotted.key=value"; the value is read as JSON when it parses, else as a string. */
EC_API ec_status ec_scenario_override(ec_scenario* s, const char* assignment);
EC_API ec_status ec_scenario_set_seed(ec_scenario* s, uint64_t seed);
EC_API ec_status ec_scenario_to_json(const ec_scenario* s, char** out);
EC_API void ec_scenario_free(ec_scenario* s);

EC_API ec_status ec_trial_run(const ec_scenario* s, ec_trial** out);
EC_API ec_status ec_trial_load(const char* log_path, ec_trial** out);
EC_API ec_status ec_trial_completed(const ec_trial* t, int* completed);
EC_API ec_status ec_trial_completion_time(const ec_trial* t, double* seconds);
EC_API ec_status ec_trial_fetches(const ec_trial* t, int* started, int* succeeded);
/* Outcome line followed by one line per logged decision. */
EC_API ec_status ec_trial_summary(const ec_trial* t, char** out);
EC_API ec_status ec_trial_write_log(const ec_trial* t, const char* path);
EC_API void ec_trial_free(ec_trial* t);

/* Re-simulates a logged trial; *identical is 1 when the final state summaries agree. */
EC_API ec_status ec_replay(const char* log_path, int* identical, char** logged, char** replayed);

/* Paired epistemic/baseline trials for seeds seed_base .. seed_base + n - 1. */
EC_API ec_status ec_batch_run(const ec_scenario* s, int n_trials, uint64_t seed_base, int jobs, ec_batch** out);
EC_API ec_status ec_batch_csv(const ec_batch* b, char** out);
EC_API ec_status ec_batch_write_csv(const ec_batch* b, const char* path);
EC_API ec_status ec_batch_rates(const ec_batch* b, int* completed_pairs, double* improve, double* match,
                                double* regress);
EC_API ec_status ec_batch_fetch_stats(const ec_batch* b, int* pairs, double* mean_s, double* mean_pct,
                                      double* sign_test_p);
EC_API void ec_batch_free(ec_batch* b);

/* kind: "trajectories" (source is a trial log; ticks [tick_from, tick_to], tick_to < 0 means
   through the end) or "outcome_bars" / "time_scatter" (source is a metrics CSV). */
EC_API ec_status ec_plot(const char* kind, const char* source_path, int tick_from, int tick_to,
                         const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
