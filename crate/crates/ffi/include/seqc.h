#ifndef SEQC_H
#define SEQC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SeqcPipeline {
  SEQC_PIPELINE_BASELINE = 0,
  SEQC_PIPELINE_SEQC = 1,
} SeqcPipeline;

typedef enum SeqcStatus {
  SEQC_STATUS_OK = 0,
  SEQC_STATUS_NULL_POINTER = 1,
  SEQC_STATUS_INVALID_INPUT = 2,
  SEQC_STATUS_VERIFICATION_FAILED = 3,
  SEQC_STATUS_UNSUPPORTED = 4,
  SEQC_STATUS_CAPACITY = 5,
  SEQC_STATUS_IO = 6,
  SEQC_STATUS_INTERNAL = 7,
} SeqcStatus;

typedef struct SeqcBackend SeqcBackend;

typedef struct SeqcCircuit SeqcCircuit;

typedef struct SeqcCompiled SeqcCompiled;

typedef struct SeqcStratified SeqcStratified;

/**
 * Figures of merit; timing fields are negative when not applicable.
 */
typedef struct SeqcMetrics {
  double esp;
  double exec_time_ns;
  uint64_t inter_chiplet_gates;
  uint64_t depth;
  uint64_t gate_count;
  double stratify_time_s;
  double elaborate_time_s;
  double solve_time_s;
} SeqcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next `seqc_*` call on the same thread.
 */
const char *seqc_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void seqc_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum SeqcStatus seqc_backend_generate(uint32_t chiplets,
                                      uint32_t qubits_per_chiplet,
                                      double inter_penalty,
                                      struct SeqcBackend **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SeqcStatus seqc_backend_from_json(const char *json, struct SeqcBackend **out);

/**
 * # Safety
 * `b` must be a live backend handle; `out` must be writable.
 */
enum SeqcStatus seqc_backend_to_json(const struct SeqcBackend *b, char **out);

/**
 * Returns 0 for a null handle.
 *
 * # Safety
 * `b` must be null or a live backend handle.
 */
uint32_t seqc_backend_num_qubits(const struct SeqcBackend *b);

/**
 * # Safety
 * `b` must be null or a handle not yet freed.
 */
void seqc_backend_free(struct SeqcBackend *b);

/**
 * Generates a benchmark circuit. `family` is one of `ghz`, `bitcode`,
 * `phasecode`, `vqe`, `tfim`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
enum SeqcStatus seqc_circuit_bench(const char *family,
                                   uint32_t n,
                                   uint64_t seed,
                                   struct SeqcCircuit **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SeqcStatus seqc_circuit_from_json(const char *json, struct SeqcCircuit **out);

/**
 * # Safety
 * `c` must be a live circuit handle; `out` must be writable.
 */
enum SeqcStatus seqc_circuit_to_json(const struct SeqcCircuit *c, char **out);

/**
 * # Safety
 * `c` must be null or a live circuit handle.
 */
uint32_t seqc_circuit_num_qubits(const struct SeqcCircuit *c);

/**
 * # Safety
 * `c` must be null or a live circuit handle.
 */
uint64_t seqc_circuit_num_gates(const struct SeqcCircuit *c);

/**
 * # Safety
 * `c` must be null or a handle not yet freed.
 */
void seqc_circuit_free(struct SeqcCircuit *c);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SeqcStatus seqc_stratify(const struct SeqcCircuit *c,
                              const struct SeqcBackend *b,
                              uint64_t seed,
                              struct SeqcStratified **out);

/**
 * # Safety
 * `s` must be a live handle.
 */
uint64_t seqc_stratified_num_events(const struct SeqcStratified *s);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum SeqcStatus seqc_stratified_to_json(const struct SeqcStratified *s, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SeqcStatus seqc_stratified_from_json(const char *json, struct SeqcStratified **out);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void seqc_stratified_free(struct SeqcStratified *s);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SeqcStatus seqc_elaborate(const struct SeqcStratified *s,
                               const struct SeqcBackend *b,
                               uint32_t workers,
                               uint64_t seed,
                               struct SeqcCompiled **out);

/**
 * Compiles with either pipeline using default settings.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SeqcStatus seqc_compile(const struct SeqcCircuit *c,
                             const struct SeqcBackend *b,
                             enum SeqcPipeline pipeline,
                             uint32_t workers,
                             uint64_t seed,
                             struct SeqcCompiled **out);

/**
 * # Safety
 * `cc` must be a live handle; `out` must be writable.
 */
enum SeqcStatus seqc_compiled_to_json(const struct SeqcCompiled *cc, char **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SeqcStatus seqc_compiled_from_json(const char *json, struct SeqcCompiled **out);

/**
 * # Safety
 * Handles must be live; `out` must point to a `SeqcMetrics`.
 */
enum SeqcStatus seqc_compiled_metrics(const struct SeqcCompiled *cc,
                                      const struct SeqcBackend *b,
                                      bool decoherence,
                                      struct SeqcMetrics *out);

/**
 * Structural validity plus permutation equivalence against `original`.
 * Returns `VerificationFailed` with a reason when they do not hold.
 *
 * # Safety
 * Handles must be live.
 */
enum SeqcStatus seqc_verify(const struct SeqcCircuit *original,
                            const struct SeqcCompiled *cc,
                            const struct SeqcBackend *b);

/**
 * State fidelity between `original` and the compiled circuit (at most 14
 * active qubits, no measurement or reset).
 *
 * # Safety
 * Handles must be live; `fidelity` must be writable.
 */
enum SeqcStatus seqc_statevector_fidelity(const struct SeqcCircuit *original,
                                          const struct SeqcCompiled *cc,
                                          double *fidelity);

/**
 * # Safety
 * `cc` must be null or a handle not yet freed.
 */
void seqc_compiled_free(struct SeqcCompiled *cc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQC_H */
