/* knodal — radial nodal solutions of a Kirchhoff-type equation.
 *
 * C interface over the solver library: opaque handles, integer status codes,
 * UTF-8 strings. Every entry point that can fail takes an optional error
 * buffer (pass NULL/0 to ignore); on failure the buffer receives a
 * NUL-terminated message, truncated to fit.
 *
 * Result lifetime: run functions set *result on KNODAL_OK and on
 * KNODAL_ERR_VERDICT (the run completed; a verdict failed). Free handles
 * with their _free function; all other returns leave *result untouched.
 */
#ifndef KNODAL_H
#define KNODAL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum knodal_status {
  KNODAL_OK = 0,
  KNODAL_ERR_VERDICT = 1, /* run completed, a mathematical verdict failed */
  KNODAL_ERR_SOLVER = 2,  /* a solve stage failed to converge or certify */
  KNODAL_ERR_CONFIG = 3,  /* invalid configuration or arguments */
  KNODAL_ERR_IO = 4       /* archive read/write failure or refusal */
};

typedef struct knodal_config knodal_config;
typedef struct knodal_result knodal_result;

const char* knodal_version(void);
const char* knodal_status_name(int status);

/* --- configuration ---------------------------------------------------------- */
int knodal_config_from_file(const char* path, knodal_config** out, char* errbuf,
                            size_t errcap);
/* base_dir anchors relative table-potential paths; NULL means "." */
int knodal_config_from_string(const char* text, const char* base_dir, knodal_config** out,
                              char* errbuf, size_t errcap);
/* Defaults for every key; never fails. */
int knodal_config_default(knodal_config** out, char* errbuf, size_t errcap);
/* dotted_key is section.key, e.g. "problem.k" or "solver.seed"; the value is
 * revalidated against the full schema. */
int knodal_config_override(knodal_config* cfg, const char* dotted_key, const char* value,
                           char* errbuf, size_t errcap);
/* Canonical text form (every key explicit). Valid until the next override or free. */
const char* knodal_config_text(const knodal_config* cfg);
void knodal_config_free(knodal_config* cfg);

/* --- pipelines ---------------------------------------------------------------
 * out_dir: directory the run archive is written to; NULL skips persistence.
 * force: nonzero replaces an existing directory, zero refuses it. */
int knodal_solve(const knodal_config* cfg, const char* out_dir, int force,
                 knodal_result** result, char* errbuf, size_t errcap);
int knodal_verify_monotonicity(const knodal_config* cfg, int k_max, const char* out_dir,
                               int force, knodal_result** result, char* errbuf,
                               size_t errcap);
int knodal_verify_pohozaev(const knodal_config* cfg, const char* out_dir, int force,
                           knodal_result** result, char* errbuf, size_t errcap);
int knodal_verify_bounds(const knodal_config* cfg, const char* out_dir, int force,
                         knodal_result** result, char* errbuf, size_t errcap);
int knodal_sweep_b(const knodal_config* cfg, const double* b_list, size_t count,
                   const char* out_dir, int force, knodal_result** result, char* errbuf,
                   size_t errcap);
/* q <= 0 means "use the problem's p". */
int knodal_sp_estimate(const knodal_config* cfg, double q, const char* out_dir, int force,
                       knodal_result** result, char* errbuf, size_t errcap);
/* Reloads a solve archive and reprojects its components; with_oracle nonzero
 * adds the dense multistart cross-check. */
int knodal_nehari_check(const char* archive_dir, int with_oracle, const char* out_dir,
                        int force, knodal_result** result, char* errbuf, size_t errcap);

/* --- results ------------------------------------------------------------------ */
/* 1 when every verdict passed, 0 otherwise. */
int knodal_result_verdict(const knodal_result* result);
/* The run's summary document (JSON). Valid until the result is freed. */
const char* knodal_result_summary_json(const knodal_result* result);
/* Fetch one summary value by dotted path ("solve.energy", "energies.0.k").
 * Strings arrive verbatim, everything else in JSON form. Returns KNODAL_OK
 * or KNODAL_ERR_IO when the path is absent or the buffer is too small. */
int knodal_result_get(const knodal_result* result, const char* dotted_key, char* buf,
                      size_t cap);
void knodal_result_free(knodal_result* result);

#ifdef __cplusplus
}
#endif

#endif /* KNODAL_H */
