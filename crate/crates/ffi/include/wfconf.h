#ifndef WFCONF_H
#define WFCONF_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WfStatus {
  WF_STATUS_OK = 0,
  WF_STATUS_NULL_POINTER = 1,
  WF_STATUS_INVALID_UTF8 = 2,
  WF_STATUS_PARSE = 3,
  WF_STATUS_INVALID = 4,
  WF_STATUS_INFEASIBLE = 5,
  WF_STATUS_EXECUTION = 6,
  WF_STATUS_NOT_FOUND = 7,
  WF_STATUS_PANIC = 8,
} WfStatus;

/**
 * Per-node (vCPU, memory MB) assignment.
 */
typedef struct WfConfigMap WfConfigMap;

/**
 * A validated workflow together with its pricing coefficients.
 */
typedef struct WfWorkflow WfWorkflow;

typedef struct WfEvaluation {
  size_t runs;
  double mean_runtime;
  double std_runtime;
  double mean_cost;
  double violation_rate;
} WfEvaluation;

typedef struct WfPricing {
  double mu0;
  double mu1;
  double mu2;
} WfPricing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses and validates a JSON workflow file.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum WfStatus wf_workflow_from_json(const char *json, struct WfWorkflow **out);

/**
 * # Safety
 * `wf` must be null or a handle from `wf_workflow_from_json` not yet freed.
 */
void wf_workflow_free(struct WfWorkflow *wf);

/**
 * Number of functions in the workflow, or 0 for a null handle.
 *
 * # Safety
 * `wf` must be null or a live workflow handle.
 */
size_t wf_workflow_node_count(const struct WfWorkflow *wf);

/**
 * SLO of the workflow in seconds, or NaN for a null handle.
 *
 * # Safety
 * `wf` must be null or a live workflow handle.
 */
double wf_workflow_slo(const struct WfWorkflow *wf);

/**
 * Searches a configuration with `method` ("aarc", "bo" or "maff") using
 * default parameters and the synthetic backend.
 *
 * # Safety
 * `wf` must be a live workflow handle, `method` a NUL-terminated string and
 * `out` a writable pointer.
 */
enum WfStatus wf_optimize(const struct WfWorkflow *wf,
                          const char *method,
                          uint64_t seed,
                          struct WfConfigMap **out);

/**
 * Executes the workflow `runs` times under `cfg`.
 *
 * # Safety
 * `wf` and `cfg` must be live handles and `out` a writable pointer.
 */
enum WfStatus wf_evaluate(const struct WfWorkflow *wf,
                          const struct WfConfigMap *cfg,
                          size_t runs,
                          uint64_t seed,
                          struct WfEvaluation *out);

/**
 * Parses a JSON object of `{ "node": { "cpu": .., "mem": .. } }`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum WfStatus wf_config_from_json(const char *json, struct WfConfigMap **out);

/**
 * Serializes the map as JSON. Returns null on failure; free with
 * `wf_string_free`.
 *
 * # Safety
 * `cfg` must be null or a live configuration handle.
 */
char *wf_config_to_json(const struct WfConfigMap *cfg);

/**
 * Number of entries in the map, or 0 for a null handle.
 *
 * # Safety
 * `cfg` must be null or a live configuration handle.
 */
size_t wf_config_len(const struct WfConfigMap *cfg);

/**
 * Looks up the allocation of `node_id`.
 *
 * # Safety
 * `cfg` must be a live handle, `node_id` a NUL-terminated string, and
 * `cpu` and `mem` writable pointers.
 */
enum WfStatus wf_config_get(const struct WfConfigMap *cfg,
                            const char *node_id,
                            double *cpu,
                            uint32_t *mem);

/**
 * # Safety
 * `cfg` must be null or a configuration handle not yet freed.
 */
void wf_config_free(struct WfConfigMap *cfg);

/**
 * Cost of one invocation: `runtime * (mu0 * cpu + mu1 * mem / 1024) + mu2`.
 */
double wf_function_cost(double runtime, double cpu, uint32_t mem, struct WfPricing pricing);

/**
 * The default pricing coefficients.
 */
struct WfPricing wf_default_pricing(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *wf_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void wf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WFCONF_H */
