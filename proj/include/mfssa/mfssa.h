/* C interface to the MFSSA engine. Every function returns an mfssa_status;
 * on failure mfssa_last_error() describes it (per thread). Strings returned
 * through char** outputs are owned by the caller and released with
 * mfssa_string_free. Component and variable indices are 1-based. */
#ifndef MFSSA_MFSSA_H
#define MFSSA_MFSSA_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(MFSSA_BUILDING)
#define MFSSA_API __declspec(dllexport)
#else
#define MFSSA_API __declspec(dllimport)
#endif
#else
#define MFSSA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfssa_status {
  MFSSA_OK = 0,
  MFSSA_INVALID_ARGUMENT = 1,
  MFSSA_NUMERIC_FAILURE = 2,
  MFSSA_PROJECTION_FAILURE = 3,
  MFSSA_SCHEMA_VIOLATION = 4,
  MFSSA_MISMATCHED_LENGTH = 5,
  MFSSA_BASIS_MISMATCH = 6,
  MFSSA_OVERLAPPING_GROUPS = 7,
  MFSSA_INDEX_OUT_OF_RANGE = 8,
  MFSSA_UNDEFINED_CORRELATION = 9,
  MFSSA_COMMON_DOMAIN_REQUIRED = 10,
  MFSSA_PLAN_MISMATCH = 11,
  MFSSA_IO_ERROR = 12,
  MFSSA_INTERNAL = 13
} mfssa_status;

typedef struct mfssa_session mfssa_session;

MFSSA_API const char* mfssa_version(void);
MFSSA_API const char* mfssa_status_name(mfssa_status status);
MFSSA_API const char* mfssa_last_error(void);
MFSSA_API void mfssa_string_free(char* s);

/* Sessions. variant is "mfssa" or "hmfssa" (NULL = "mfssa"); tolerance <= 0
 * selects the default rank tolerance. */
MFSSA_API mfssa_status mfssa_session_from_json(const char* dataset_json, double tolerance, const char* variant,
                                               mfssa_session** out);
MFSSA_API mfssa_status mfssa_session_from_file(const char* path, double tolerance, const char* variant,
                                               mfssa_session** out);
/* Single-variable CSV of sites x time values (see README) with the given
 * domain and basis JSON. */
MFSSA_API mfssa_status mfssa_session_from_csv(const char* path, const char* domain_json, const char* basis_json,
                                              double tolerance, const char* variant, mfssa_session** out);
MFSSA_API mfssa_status mfssa_session_import(const char* export_json, mfssa_session** out);
MFSSA_API void mfssa_session_free(mfssa_session* session);

/* Normalizes the listed variables (count 0 = all). */
MFSSA_API mfssa_status mfssa_session_normalize(mfssa_session* session, const int* variables, size_t count);
/* lag <= 0 selects floor(N/2). json_out may be NULL. */
MFSSA_API mfssa_status mfssa_session_decompose(mfssa_session* session, int lag, char** json_out);
MFSSA_API mfssa_status mfssa_session_rank(const mfssa_session* session, int* rank);
MFSSA_API mfssa_status mfssa_session_warnings(const mfssa_session* session, char** json_out);
/* groups uses the "1;2,3;4,5" grammar; labels_json is NULL or an array of
 * strings. */
MFSSA_API mfssa_status mfssa_session_set_grouping(mfssa_session* session, const char* groups, const char* labels_json,
                                                  int residual);
/* Number of reconstructed parts, the residual included. */
MFSSA_API mfssa_status mfssa_session_group_count(const mfssa_session* session, int* count);
MFSSA_API mfssa_status mfssa_session_reconstruction(const mfssa_session* session, int group, char** json_out);
MFSSA_API mfssa_status mfssa_session_wcorrelation(const mfssa_session* session, int as_csv, char** out);
MFSSA_API mfssa_status mfssa_session_plotdata(const mfssa_session* session, char** json_out);
MFSSA_API mfssa_status mfssa_session_export(const mfssa_session* session, char** json_out);

/* Simulation study. request_json: {"preset": "desk"|"full"} or a config
 * grid document, with optional "methods" (array of names) and "seed". */
MFSSA_API mfssa_status mfssa_simulate(const char* request_json, int threads, char** csv_out);
MFSSA_API mfssa_status mfssa_far1_norm_check(double target, double* gamma0, double* norm_squared);

/* Blocks serving the REST API until the process ends. port 0 picks a free
 * port; on_bound (may be NULL) receives the bound port before serving. */
MFSSA_API mfssa_status mfssa_serve(const char* host, int port, const char* static_dir, double tolerance,
                                   void (*on_bound)(int port, void* user), void* user);

#ifdef __cplusplus
}
#endif

#endif
