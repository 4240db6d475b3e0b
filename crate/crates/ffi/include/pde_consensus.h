#ifndef PDE_CONSENSUS_H
#define PDE_CONSENSUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which settling-time bound applies.
 */
typedef enum {
  PC_BOUND_CASE_NONE = 0,
  PC_BOUND_CASE_UNDIRECTED_FTC = 1,
  PC_BOUND_CASE_UNDIRECTED_FXC = 2,
  PC_BOUND_CASE_DIRECTED_FTC = 3,
  PC_BOUND_CASE_DIRECTED_FXC = 4,
} PcBoundCase;

typedef enum {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  PC_STATUS_INVALID_ARGUMENT = 2,
  PC_STATUS_PARSE = 3,
  PC_STATUS_VALIDATION = 4,
  PC_STATUS_SIMULATION = 5,
  PC_STATUS_GRAPH = 6,
  PC_STATUS_IO = 7,
  PC_STATUS_PANIC = 8,
} PcStatus;

/**
 * Communication graph.
 */
typedef struct PcGraph PcGraph;

/**
 * Trajectory and analysis of one run.
 */
typedef struct PcRunResult PcRunResult;

/**
 * Parsed and validated scenario.
 */
typedef struct PcScenario PcScenario;

typedef struct {
  PcBoundCase bound_case;
  double c1;
  double c2;
  double c3;
  double c4;
  double v0;
  double t_star_bound;
  double dbar_required;
} PcBounds;

typedef struct {
  double time;
  double energy;
  double disagreement;
} PcRecord;

typedef struct {
  double threshold;
  bool settled;
  double t_settle;
  double residual_at_bound;
} PcSettling;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failed call on this thread, or null. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *pc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pc_version(void);

/**
 * Builds a graph from an `n × n` row-major adjacency matrix.
 *
 * # Safety
 * `adjacency` must point to `n * n` doubles; `out` must be writable.
 */
PcStatus pc_graph_new(const double *adjacency, size_t n, PcGraph **out);

/**
 * # Safety
 * `graph` must be null or come from `pc_graph_new`, and not be used again.
 */
void pc_graph_free(PcGraph *graph);

/**
 * # Safety
 * `graph` must come from `pc_graph_new`.
 */
size_t pc_graph_agent_count(const PcGraph *graph);

/**
 * Algebraic connectivity of a symmetric graph.
 *
 * # Safety
 * `graph` must come from `pc_graph_new`; `out` must be writable.
 */
PcStatus pc_graph_lambda2(const PcGraph *graph, double *out);

/**
 * Minimum Rayleigh quotient of the graph's symmetric Laplacian over vectors
 * orthogonal to `omega`.
 *
 * # Safety
 * `omega` must point to `len` doubles; `out` must be writable.
 */
PcStatus pc_graph_lambda_omega(const PcGraph *graph, const double *omega, size_t len, double *out);

/**
 * Writes detail-balance weights (normalized to `ω_1 = 1`) into `out`, which
 * must hold one entry per agent.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
PcStatus pc_graph_detail_balance_weights(const PcGraph *graph, double *out, size_t len);

/**
 * Reads and validates a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
PcStatus pc_scenario_load(const char *path, PcScenario **out);

/**
 * Parses and validates a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
PcStatus pc_scenario_from_str(const char *text, PcScenario **out);

/**
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
PcStatus pc_scenario_builtin(const char *name, PcScenario **out);

/**
 * # Safety
 * `scenario` must be null or come from a `pc_scenario_*` constructor.
 */
void pc_scenario_free(PcScenario *scenario);

/**
 * Shortens or extends the horizon; the scenario is revalidated.
 *
 * # Safety
 * `scenario` must come from a `pc_scenario_*` constructor.
 */
PcStatus pc_scenario_set_t_end(PcScenario *scenario, double t_end);

/**
 * Settling-time bound without simulating; `bound_case` is `None` for baselines.
 *
 * # Safety
 * `scenario` must come from a `pc_scenario_*` constructor; `out` writable.
 */
PcStatus pc_scenario_bounds(const PcScenario *scenario, PcBounds *out);

/**
 * Simulates the scenario. On `Simulation` failure `*out` still receives the
 * partial trajectory, which the caller must free.
 *
 * # Safety
 * `scenario` must come from a `pc_scenario_*` constructor; `out` writable.
 */
PcStatus pc_run(const PcScenario *scenario, PcRunResult **out);

/**
 * # Safety
 * `result` must be null or come from `pc_run`.
 */
void pc_run_result_free(PcRunResult *result);

/**
 * # Safety
 * `result` must come from `pc_run`.
 */
size_t pc_run_result_record_count(const PcRunResult *result);

/**
 * Number of probe values per record: agents × probe locations.
 *
 * # Safety
 * `result` must come from `pc_run`.
 */
size_t pc_run_result_probe_count(const PcRunResult *result);

/**
 * # Safety
 * `result` must come from `pc_run`; `out` must be writable.
 */
PcStatus pc_run_result_record(const PcRunResult *result, size_t index, PcRecord *out);

/**
 * Copies the probe values of record `index`, agent-major, into `out`.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
PcStatus pc_run_result_probes(const PcRunResult *result, size_t index, double *out, size_t len);

/**
 * # Safety
 * `result` must come from `pc_run`; `out` must be writable.
 */
PcStatus pc_run_result_bounds(const PcRunResult *result, PcBounds *out);

/**
 * # Safety
 * `result` must come from `pc_run`; `out` must be writable.
 */
PcStatus pc_run_result_settling(const PcRunResult *result, PcSettling *out);

/**
 * Summary as a JSON string; release it with `pc_string_free`.
 *
 * # Safety
 * `result` must come from `pc_run`; `out` must be writable.
 */
PcStatus pc_run_result_summary_json(const PcRunResult *result, char **out);

/**
 * # Safety
 * `s` must be null or come from this library.
 */
void pc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDE_CONSENSUS_H */
