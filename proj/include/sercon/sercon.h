/*
Copyright 2026 The sercon Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef SERCON_SERCON_H_
#define SERCON_SERCON_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SERCON_BUILDING_LIBRARY)
#define SERCON_API __attribute__((visibility("default")))
#else
#define SERCON_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SERCON_OK = 0,
  SERCON_ERROR_CONFIG = 2,
  SERCON_ERROR_PRECONDITION = 3,
  SERCON_ERROR_NUMERICAL = 4,
  SERCON_ERROR_INTERNAL = 5
} sercon_status;

typedef enum {
  SERCON_DESIGN_SERIAL = 0,
  SERCON_DESIGN_CONVENTIONAL = 1
} sercon_design_kind;

typedef enum {
  SERCON_REFERENCE_ZERO = 0,
  SERCON_REFERENCE_IMPULSE = 1,
  SERCON_REFERENCE_LEADER_ACCELERATION = 2
} sercon_reference_kind;

typedef struct sercon_graph sercon_graph;
typedef struct sercon_design sercon_design;
typedef struct sercon_trace sercon_trace;

/* Message for the last failing call on this thread; never NULL. */
SERCON_API const char* sercon_last_error(void);
SERCON_API const char* sercon_version(void);

/* Frees strings returned through char** out-parameters. */
SERCON_API void sercon_string_free(char* text);

/* Graphs. Families: directed_cycle, leader_chain, path, complete. */
SERCON_API sercon_status sercon_graph_family(const char* family, int nodes,
                                             sercon_graph** out);
SERCON_API sercon_status sercon_graph_from_json(const char* json,
                                                sercon_graph** out);
/* weights[i * n + j] > 0 is an edge j -> i. */
SERCON_API sercon_status sercon_graph_from_weights(int n, const double* weights,
                                                   sercon_graph** out);
SERCON_API void sercon_graph_free(sercon_graph* graph);
SERCON_API int sercon_graph_size(const sercon_graph* graph);
SERCON_API sercon_status sercon_graph_to_json(const sercon_graph* graph,
                                              char** json);
/* Writes n * n row-major entries of L = D - W. */
SERCON_API sercon_status sercon_graph_laplacian(const sercon_graph* graph,
                                                double* out);
SERCON_API sercon_status sercon_graph_has_spanning_tree(const sercon_graph* graph,
                                                        int* result);

/* Scalar design rules on a graph Laplacian L. Serial: L_k = gains[k-1] L.
   Conventional: A_k = gains[k] L. `order` gains are read. */
SERCON_API sercon_status sercon_design_create(const sercon_graph* graph,
                                              sercon_design_kind kind, int order,
                                              const double* gains,
                                              sercon_design** out);
SERCON_API sercon_status sercon_design_from_json(const char* json,
                                                 sercon_design** out);
SERCON_API void sercon_design_free(sercon_design* design);
SERCON_API int sercon_design_order(const sercon_design* design);
SERCON_API int sercon_design_agents(const sercon_design* design);
SERCON_API sercon_status sercon_design_to_json(const sercon_design* design,
                                               char** json);
/* Serial designs only. c <= 0 uses max_k ||L_k||_inf. */
SERCON_API sercon_status sercon_design_locality(const sercon_design* design,
                                                const sercon_graph* graph,
                                                double c, char** json,
                                                int* all_pass);
SERCON_API sercon_status sercon_design_spectrum(const sercon_design* design,
                                                char** json, int* stable,
                                                double* max_real_part);
/* Serial designs only: closed-loop poles against the per-L_k union. */
SERCON_API sercon_status sercon_design_pole_union(const sercon_design* design,
                                                  double tolerance, int* match,
                                                  double* max_distance);

/* Stability of one design rule over N in [n_min, n_max] for a family.
   *critical_n is -1 when every member is stable. */
SERCON_API sercon_status sercon_sweep(const char* family, sercon_design_kind kind,
                                      int order, const double* gains, int n_min,
                                      int n_max, int jobs, int full_spectra,
                                      char** csv, char** json, int* critical_n);

typedef struct {
  sercon_reference_kind reference;
  double horizon;
  double dt;
  double epsilon;      /* <= 0 selects 1e-6 */
  double window;       /* <= 0 selects 10% of the horizon */
  uint64_t seed;       /* random initial positions when x0 is NULL */
  double spread;       /* scale of the random initial positions */
  int leader;          /* leader acceleration reference */
  double acceleration;
  double impulse_scale; /* impulse reference: u = impulse_scale e_leader */
} sercon_simulation_options;

SERCON_API void sercon_simulation_options_default(sercon_simulation_options* options);

/* x0 holds the full realization state (length sercon_design_state_dim) or
   is NULL for random initial positions with zero higher derivatives. */
SERCON_API int sercon_design_state_dim(const sercon_design* design);
SERCON_API sercon_status sercon_simulate(const sercon_design* design,
                                         const sercon_simulation_options* options,
                                         const double* x0, sercon_trace** out);
SERCON_API void sercon_trace_free(sercon_trace* trace);
SERCON_API size_t sercon_trace_samples(const sercon_trace* trace);
SERCON_API sercon_status sercon_trace_csv(const sercon_trace* trace, size_t stride,
                                          char** trace_csv, char** spreads_csv);
SERCON_API sercon_status sercon_trace_verdict(const sercon_trace* trace,
                                              double epsilon, double window,
                                              char** json, int* consensus);
/* Copies x^(k) of every agent at the final sample, k-major. */
SERCON_API sercon_status sercon_trace_final_derivatives(const sercon_trace* trace,
                                                        double* out,
                                                        size_t capacity,
                                                        size_t* written);

SERCON_API sercon_status sercon_analytic_factor(int n, int k, double* out);
SERCON_API sercon_status sercon_gain_bound(int n, double c, double* out);
SERCON_API sercon_status sercon_hinf_scalar(const double* numerator, int num_len,
                                            const double* denominator, int den_len,
                                            double* out);

/* norms holds n + 1 values. */
SERCON_API sercon_status sercon_additive_margin(int n, const double* norms,
                                                char** json, int* satisfied,
                                                double* total);
SERCON_API sercon_status sercon_multiplicative_margin(int n, const double* norms,
                                                      char** json, int* satisfied,
                                                      double* total);

/* Assembles the perturbed loop on `graph` with static blocks
   Delta_k = norms[k] I (k = 0..n) and classifies its spectrum. Additive mode
   uses L_k = L; multiplicative mode uses L_k = L for every factor. */
SERCON_API sercon_status sercon_margin_assemble_static(const sercon_graph* graph,
                                                       const char* mode, int n,
                                                       const double* norms,
                                                       char** json, int* stable);

/* Second-order serial loop on an undirected graph with heterogeneous
   first-order lags k_i / (T_i s + 1) in the top additive block, max |k_i| =
   kappa; checks the margin, the spectrum and a simulation. */
SERCON_API sercon_status sercon_lag_bank_experiment(const sercon_graph* graph,
                                                    double kappa, uint64_t seed,
                                                    char** json, int* consensus);

/* Monte-Carlo sweep over random perturbation sets normalized to
   `target_total`; mode is "additive" or "multiplicative". */
SERCON_API sercon_status sercon_robustness_sweep(const sercon_graph* graph,
                                                 const char* mode, int order,
                                                 int samples, double target_total,
                                                 uint64_t seed, int jobs,
                                                 char** csv, int* stable_count,
                                                 int* consensus_count);

#ifdef __cplusplus
}
#endif

#endif  /* SERCON_SERCON_H_ */
