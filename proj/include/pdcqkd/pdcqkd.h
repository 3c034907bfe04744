/*
 * pdcqkd C interface.
 *
 * Key rates for BB84 with a heralded parametric-down-conversion source whose
 * triggered and nontriggered events are both analysed. All functions return a
 * pdcqkd_status; on failure pdcqkd_last_error() describes the problem for
 * the calling thread. Handles are opaque and owned by the caller.
 */
#ifndef PDCQKD_H
#define PDCQKD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PDCQKD_BUILDING_LIBRARY)
#    define PDCQKD_API __declspec(dllexport)
#  else
#    define PDCQKD_API __declspec(dllimport)
#  endif
#else
#  define PDCQKD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes for the first four. */
typedef enum pdcqkd_status {
  PDCQKD_OK = 0,
  PDCQKD_ERROR_VALIDATION = 1,  /* bad parameter, key or value */
  PDCQKD_ERROR_NUMERICAL = 2,   /* degenerate observables, truncation, bracket */
  PDCQKD_ERROR_STATISTICAL = 3, /* Monte Carlo |z| above threshold */
  PDCQKD_ERROR_IO = 4,
  PDCQKD_ERROR_INTERNAL = 5
} pdcqkd_status;

typedef enum pdcqkd_protocol {
  PDCQKD_EFFICIENT_PDC = 0,
  PDCQKD_CONVENTIONAL_PDC = 1,
  PDCQKD_IDEAL_SINGLE_PHOTON = 2
} pdcqkd_protocol;

typedef enum pdcqkd_strategy {
  PDCQKD_STRATEGY_NONE = 0,
  PDCQKD_STRATEGY_TRIGGERED = 1,
  PDCQKD_STRATEGY_BOTH = 2
} pdcqkd_strategy;

typedef struct pdcqkd_source_params {
  double mu;
  double eta_A;
  double d_A;
} pdcqkd_source_params;

typedef struct pdcqkd_channel_params {
  double alpha;     /* dB/km */
  double length_km;
  double eta_B;
  double p_d;
  double e_d;
} pdcqkd_channel_params;

typedef struct pdcqkd_constants {
  double q;    /* sifting efficiency */
  double f_ec; /* constant error-correction inefficiency */
} pdcqkd_constants;

typedef struct pdcqkd_rate_summary {
  double Q_t;
  double E_t;
  double Q_nt;
  double E_nt;
  double r;
} pdcqkd_rate_summary;

typedef struct pdcqkd_key_rate {
  double R_t;
  double R_both;
  double R_final;
  double x_star_t;
  double x_star_both;
  double xi_t;    /* xi at the triggered-only minimiser */
  double eps_t;   /* NaN when xi_t <= 0 */
  double xi_both;
  double eps_both;
  pdcqkd_strategy selected;
} pdcqkd_key_rate;

typedef struct pdcqkd_sim_summary {
  uint64_t pulses;
  uint64_t cells[8]; /* index = 4*triggered + 2*detected + error */
  double Q_t, Q_t_err;
  double E_t, E_t_err;
  double Q_nt, Q_nt_err;
  double E_nt, E_nt_err;
  double r, r_err;
} pdcqkd_sim_summary;

PDCQKD_API const char* pdcqkd_version(void);
PDCQKD_API const char* pdcqkd_last_error(void);
PDCQKD_API const char* pdcqkd_status_name(pdcqkd_status status);

/* ---- numerics ---------------------------------------------------------- */

PDCQKD_API pdcqkd_constants pdcqkd_default_constants(void);

/* p_n, gamma_n, r_n for one photon number. */
PDCQKD_API pdcqkd_status pdcqkd_photon_number_dist(const pdcqkd_source_params* src,
                                                   size_t n, double* out);
PDCQKD_API pdcqkd_status pdcqkd_trigger_prob(const pdcqkd_source_params* src,
                                             size_t n, double* out);
PDCQKD_API pdcqkd_status pdcqkd_trigger_odds(const pdcqkd_source_params* src,
                                             size_t n, double* out);

/* Y_n and Y_n e_n for one photon number. */
PDCQKD_API pdcqkd_status pdcqkd_yield(const pdcqkd_channel_params* ch, size_t n,
                                      double* out);
PDCQKD_API pdcqkd_status pdcqkd_error_weighted_yield(const pdcqkd_channel_params* ch,
                                                     size_t n, double* out);

/* closed_form != 0 selects the generating-function path, else the truncated sum. */
PDCQKD_API pdcqkd_status pdcqkd_observables(const pdcqkd_source_params* src,
                                            const pdcqkd_channel_params* ch,
                                            int closed_form,
                                            pdcqkd_rate_summary* out);

/* Efficient protocol: both strategies and the final rate. */
PDCQKD_API pdcqkd_status pdcqkd_key_rate_efficient(const pdcqkd_source_params* src,
                                         const pdcqkd_channel_params* ch,
                                         const pdcqkd_constants* consts,
                                         pdcqkd_key_rate* out);
PDCQKD_API pdcqkd_status pdcqkd_key_rate_conventional(const pdcqkd_source_params* src,
                                                      const pdcqkd_channel_params* ch,
                                                      const pdcqkd_constants* consts,
                                                      double* out);
PDCQKD_API pdcqkd_status pdcqkd_key_rate_ideal(const pdcqkd_channel_params* ch,
                                               const pdcqkd_constants* consts,
                                               double* out);

/* mu maximising the protocol's rate over [mu_min, mu_max] (0,0 = defaults).
 * The source's mu field is ignored. *all_zero is set when no mu gives a
 * positive rate. */
PDCQKD_API pdcqkd_status pdcqkd_optimize_mu(pdcqkd_protocol protocol,
                                            const pdcqkd_source_params* src,
                                            const pdcqkd_channel_params* ch,
                                            const pdcqkd_constants* consts,
                                            double mu_min, double mu_max,
                                            double* mu_opt, double* R_final,
                                            int* all_zero);

/* Largest distance with positive rate (mu optimised), by bisection. */
PDCQKD_API pdcqkd_status pdcqkd_find_cutoff(pdcqkd_protocol protocol,
                                            const pdcqkd_source_params* src,
                                            const pdcqkd_channel_params* ch,
                                            const pdcqkd_constants* consts,
                                            double lo_km, double hi_km,
                                            double resolution_km, double* cutoff_km);

/* ---- photon statistics handle ----------------------------------------- */

typedef struct pdcqkd_source_stats pdcqkd_source_stats;

PDCQKD_API pdcqkd_status pdcqkd_source_stats_create(const pdcqkd_source_params* src,
                                                    pdcqkd_source_stats** out);
PDCQKD_API void pdcqkd_source_stats_destroy(pdcqkd_source_stats* stats);
PDCQKD_API size_t pdcqkd_source_stats_size(const pdcqkd_source_stats* stats);
/* Copies up to `capacity` entries of p_n, gamma_n, r_n, p_n^(t), p_n^(nt);
 * any pointer may be NULL. */
PDCQKD_API pdcqkd_status pdcqkd_source_stats_copy(const pdcqkd_source_stats* stats,
                                                  size_t capacity, double* p,
                                                  double* gamma, double* odds,
                                                  double* p_t, double* p_nt);

/* ---- Monte Carlo ------------------------------------------------------- */

/* Honest run when attack_yields is NULL; otherwise both arrays hold
 * attack_len entries (e_0 must be 1/2). */
PDCQKD_API pdcqkd_status pdcqkd_simulate(const pdcqkd_source_params* src,
                                         const pdcqkd_channel_params* ch,
                                         uint64_t pulses, uint64_t seed,
                                         const double* attack_yields,
                                         const double* attack_errors,
                                         size_t attack_len,
                                         pdcqkd_sim_summary* out);

/* ---- configuration and commands (CLI surface) -------------------------- */

typedef struct pdcqkd_config pdcqkd_config;
typedef struct pdcqkd_report pdcqkd_report;

PDCQKD_API pdcqkd_status pdcqkd_config_create(pdcqkd_config** out);
PDCQKD_API void pdcqkd_config_destroy(pdcqkd_config* config);
PDCQKD_API pdcqkd_status pdcqkd_config_load_file(pdcqkd_config* config, const char* path);
PDCQKD_API pdcqkd_status pdcqkd_config_load_string(pdcqkd_config* config,
                                                   const char* text,
                                                   const char* source_name);
/* `origin` labels the value in error messages, e.g. "--mu". */
PDCQKD_API pdcqkd_status pdcqkd_config_set(pdcqkd_config* config, const char* key,
                                           const char* value, const char* origin);
/* Value of `key`, or NULL when unset. Valid until the config changes. */
PDCQKD_API const char* pdcqkd_config_get(const pdcqkd_config* config, const char* key);

PDCQKD_API size_t pdcqkd_config_key_count(void);
PDCQKD_API const char* pdcqkd_config_key_name(size_t index);
PDCQKD_API const char* pdcqkd_config_key_help(size_t index);

/* Runs rate | sweep | montecarlo | attack | cutoff. On PDCQKD_OK the report
 * holds the output; its exit code is 0 or PDCQKD_ERROR_STATISTICAL. */
PDCQKD_API pdcqkd_status pdcqkd_run(const pdcqkd_config* config, const char* command,
                                    pdcqkd_report** out);
PDCQKD_API const char* pdcqkd_report_text(const pdcqkd_report* report);
PDCQKD_API size_t pdcqkd_report_size(const pdcqkd_report* report);
PDCQKD_API int pdcqkd_report_exit_code(const pdcqkd_report* report);
PDCQKD_API void pdcqkd_report_destroy(pdcqkd_report* report);

#ifdef __cplusplus
}
#endif

#endif /* PDCQKD_H */
