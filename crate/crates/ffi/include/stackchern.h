#ifndef STACKCHERN_H
#define STACKCHERN_H

#pragma once

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_ARGUMENT = 1,
  SC_STATUS_INVALID_UTF8 = 2,
  SC_STATUS_INVALID_INPUT = 3,
  SC_STATUS_RESOURCE_LIMIT = 4,
  SC_STATUS_INTERNAL = 5,
} ScStatus;

// A finite groupoid with optional cover data.
typedef struct ScGroupoidModel ScGroupoidModel;

// A validated stratum network.
typedef struct ScNetwork ScNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Owned by the library.
const char *sc_last_error(void);

// Library version as a static string.
const char *sc_version(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void sc_string_free(char *s);

// Parses and validates a network from JSON.
//
// # Safety
// `json` must be a valid C string; `out` must be writable.
enum ScStatus sc_network_from_json(const char *json, struct ScNetwork **out);

// # Safety
// `net` must come from [`sc_network_from_json`] or be null.
void sc_network_free(struct ScNetwork *net);

// Number of saturated chains from `k` down to `j`.
//
// # Safety
// `net` must be a live handle; the index arrays must hold the given lengths.
enum ScStatus sc_network_count_chains(const struct ScNetwork *net,
                                      const uint32_t *k,
                                      size_t k_len,
                                      const uint32_t *j,
                                      size_t j_len,
                                      uint64_t *out);

// Weights, weight-degree failures, degree-ratio failures and homogeneity as JSON.
//
// # Safety
// `net` must be a live handle; `out` must be writable. Free the result
// with [`sc_string_free`].
enum ScStatus sc_network_report(const struct ScNetwork *net, char **out);

// Parses a groupoid model; cover data is validated when parts are present.
//
// # Safety
// `json` must be a valid C string; `out` must be writable.
enum ScStatus sc_groupoid_from_json(const char *json, struct ScGroupoidModel **out);

// # Safety
// `model` must come from [`sc_groupoid_from_json`] or be null.
void sc_groupoid_free(struct ScGroupoidModel *model);

// Subtracts arrows keeping part `keep` and checks the result. Writes the
// kept arrow names and the check report as JSON, and whether it passes.
//
// # Safety
// `model` must be a live handle, `keep` a valid C string, `out` and
// `passes` writable.
enum ScStatus sc_groupoid_subtract(const struct ScGroupoidModel *model,
                                   const char *keep,
                                   char **out,
                                   bool *passes);

// Total Chern class of the stable-map space for `(n, m, d)` as polynomial
// JSON. A negative `cap` selects the dimension.
//
// # Safety
// `out` must be writable.
enum ScStatus sc_stablemaps_chern(uint32_t n,
                                  uint32_t m,
                                  uint32_t d,
                                  int cap,
                                  bool include_full_set,
                                  char **out);

// Runs the command-line front-end on `argv` (without the program name),
// capturing both streams. `exit_code` receives the command's exit status.
//
// # Safety
// `argv` must hold `argc` valid C strings; the out pointers must be writable.
enum ScStatus sc_run(int argc,
                     const char *const *argv,
                     char **out_stdout,
                     char **out_stderr,
                     int *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STACKCHERN_H */
