#ifndef RASDM_RASDM_H
#define RASDM_RASDM_H

#include <stddef.h>
#include <stdint.h>

#if defined(RASDM_BUILDING)
#define RASDM_API __attribute__((visibility("default")))
#else
#define RASDM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rasdm_status {
  RASDM_OK = 0,
  RASDM_INVALID = 1,            /* malformed input, unknown id, domain violation */
  RASDM_INFEASIBLE = 2,         /* some scenario cannot be served */
  RASDM_EMPTY_INTERSECTION = 3, /* agents' risk sets share no measure */
  RASDM_NUMERICAL = 4,          /* solver could not certify its answer */
  RASDM_NOT_CONVERGED = 5,
  RASDM_CHECK_FAILED = 6,       /* report produced, but some checked property failed */
  RASDM_INTERNAL = 7
} rasdm_status;

typedef struct rasdm_instance rasdm_instance;
typedef struct rasdm_report rasdm_report;

typedef struct rasdm_options {
  double tol;        /* equilibrium gap / property tolerance; 0 = command default */
  uint64_t seed;     /* randomized property suites */
  int max_iters;     /* fixed-point iterations */
  double damping;    /* fixed-point step in (0, 1] */
  int trials;        /* draws per randomized property */
} rasdm_options;

typedef enum rasdm_trading { RASDM_NO_TRADING = 0, RASDM_WITH_TRADING = 1 } rasdm_trading;

typedef struct rasdm_newsvendor_args {
  double r_u;
  double r_v;
  double kappa;
  double beta_bar;
  rasdm_trading mode;
} rasdm_newsvendor_args;

RASDM_API const char* rasdm_version(void);
RASDM_API const char* rasdm_status_name(rasdm_status s);

/* message of the last failed call on this thread; never NULL */
RASDM_API const char* rasdm_last_error(void);

RASDM_API void rasdm_options_default(rasdm_options* opt);

RASDM_API rasdm_status rasdm_instance_from_json(const char* text, rasdm_instance** out);
RASDM_API rasdm_status rasdm_instance_from_file(const char* path, rasdm_instance** out);
RASDM_API void rasdm_instance_free(rasdm_instance* inst);
RASDM_API size_t rasdm_instance_generators(const rasdm_instance* inst);
RASDM_API size_t rasdm_instance_scenarios(const rasdm_instance* inst);
/* sha256 of the parsed instance document, 64 hex characters */
RASDM_API const char* rasdm_instance_hash(const rasdm_instance* inst);

/* Every command writes a report on success and on RASDM_CHECK_FAILED; *out
   stays NULL otherwise.  opt may be NULL for the defaults. */
RASDM_API rasdm_status rasdm_solve_sdm(const rasdm_instance* inst, rasdm_report** out);

/* x_json: array, {generator id: MW} map, number (single unit) or a solve-sdm
   report; scenario NULL runs every scenario */
RASDM_API rasdm_status rasdm_recourse(const rasdm_instance* inst, const char* x_json, const char* scenario,
                                      rasdm_report** out);

RASDM_API rasdm_status rasdm_solve_raslp(const rasdm_instance* inst, rasdm_report** out);

/* distribution_json: {"support": [...], "probs": [...]} */
RASDM_API rasdm_status rasdm_newsvendor(const char* distribution_json, const rasdm_newsvendor_args* args,
                                        rasdm_report** out);

RASDM_API rasdm_status rasdm_equilibrium_iterate(const rasdm_instance* inst, const rasdm_options* opt,
                                                 rasdm_report** out);
/* candidate_json: a candidate block, an equilibrium report or a solve-sdm report */
RASDM_API rasdm_status rasdm_equilibrium_verify(const rasdm_instance* inst, const char* candidate_json,
                                                const rasdm_options* opt, rasdm_report** out);
/* iterates once per kappa, replacing every agent's kappa */
RASDM_API rasdm_status rasdm_equilibrium_sweep(const rasdm_instance* inst, const double* kappas, size_t count,
                                               const rasdm_options* opt, rasdm_report** out);

RASDM_API rasdm_status rasdm_check_properties(const rasdm_instance* inst, const char* suite,
                                              const rasdm_options* opt, rasdm_report** out);

/* canonical JSON text, owned by the report */
RASDM_API const char* rasdm_report_json(const rasdm_report* rep);
/* number at a JSON pointer such as "/result/x/G1" */
RASDM_API rasdm_status rasdm_report_number(const rasdm_report* rep, const char* pointer, double* value);
/* copies the subtree at a JSON pointer into a new report */
RASDM_API rasdm_status rasdm_report_extract(const rasdm_report* rep, const char* pointer, rasdm_report** out);
RASDM_API void rasdm_report_free(rasdm_report* rep);

#ifdef __cplusplus
}
#endif

#endif
