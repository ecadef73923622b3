#ifndef QMIND_H
#define QMIND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QmStatus {
  QM_STATUS_OK = 0,
  QM_STATUS_NULL_POINTER = 1,
  QM_STATUS_INVALID_UTF8 = 2,
  QM_STATUS_EXPRESSION = 3,
  QM_STATUS_PARSE = 4,
  QM_STATUS_COMPILE = 5,
  QM_STATUS_SIMULATION = 6,
  QM_STATUS_SONIFY = 7,
  QM_STATUS_BUFFER_TOO_SMALL = 8,
  QM_STATUS_PANIC = 9,
} QmStatus;

/**
 * A circuit: gates, register sizes and terminal measurements.
 */
typedef struct QmCircuit QmCircuit;

/**
 * Measurement counts from a sampled circuit.
 */
typedef struct QmHistogram QmHistogram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *qm_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qm_version(void);

/**
 * Compiles a three-clause expression such as `(A|B)&(~B|~C)&(A|C)` into a Grover
 * circuit with `k` iterations.
 *
 * # Safety
 * `expression` must be a NUL-terminated string; `out` must be writable.
 */
enum QmStatus qm_compile_expression(const char *expression, size_t k, struct QmCircuit **out);

/**
 * Satisfying assignments of a three-clause expression, as integers with A in bit 0.
 *
 * # Safety
 * `expression` must be a NUL-terminated string; `buf` must hold `len` values.
 */
enum QmStatus qm_satisfying_assignments(const char *expression,
                                        uint64_t *buf,
                                        size_t len,
                                        size_t *written);

/**
 * # Safety
 * `program` must be a NUL-terminated string; `out` must be writable.
 */
enum QmStatus qm_parse_quil(const char *program, struct QmCircuit **out);

/**
 * # Safety
 * `program` must be a NUL-terminated string; `out` must be writable.
 */
enum QmStatus qm_parse_openqasm(const char *program, struct QmCircuit **out);

/**
 * # Safety
 * `circuit` must come from this library and not be used afterwards. NULL is ignored.
 */
void qm_circuit_free(struct QmCircuit *circuit);

/**
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_circuit_qubit_count(const struct QmCircuit *circuit, size_t *out);

/**
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_circuit_gate_count(const struct QmCircuit *circuit, size_t *out);

/**
 * Quil text; free with `qm_string_free`.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_circuit_emit_quil(const struct QmCircuit *circuit, char **out);

/**
 * OpenQASM 2.0 text; free with `qm_string_free`.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_circuit_emit_openqasm(const struct QmCircuit *circuit, char **out);

/**
 * New circuit using only RX, RZ and CZ.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_circuit_transpile(const struct QmCircuit *circuit, struct QmCircuit **out);

/**
 * Exact probability of each classical register value.
 *
 * # Safety
 * `circuit` must be a live handle; `buf` must hold `len` values.
 */
enum QmStatus qm_circuit_probabilities(const struct QmCircuit *circuit,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

/**
 * Samples `shots` measurements; the same seed gives the same histogram.
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_run(const struct QmCircuit *circuit,
                     uint64_t shots,
                     uint64_t seed,
                     struct QmHistogram **out);

/**
 * # Safety
 * `histogram` must come from this library and not be used afterwards. NULL is ignored.
 */
void qm_histogram_free(struct QmHistogram *histogram);

/**
 * # Safety
 * `histogram` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_histogram_shots(const struct QmHistogram *histogram, uint64_t *out);

/**
 * Count of every register value, zeros included.
 *
 * # Safety
 * `histogram` must be a live handle; `buf` must hold `len` values.
 */
enum QmStatus qm_histogram_counts(const struct QmHistogram *histogram,
                                  uint64_t *buf,
                                  size_t len,
                                  size_t *written);

/**
 * `{"counts": {...}, "shots": n}`; free with `qm_string_free`.
 *
 * # Safety
 * `histogram` must be a live handle; `out` must be writable.
 */
enum QmStatus qm_histogram_to_json(const struct QmHistogram *histogram, char **out);

/**
 * Renders the histogram as a 16-bit mono WAV file image. `freqs` may be NULL for
 * the default eight frequencies. Free the bytes with `qm_bytes_free`.
 *
 * # Safety
 * `histogram` must be a live handle; `freqs` must hold `n_freqs` values unless
 * NULL; `out` and `out_len` must be writable.
 */
enum QmStatus qm_histogram_wav(const struct QmHistogram *histogram,
                               const double *freqs,
                               size_t n_freqs,
                               double duration_s,
                               uint32_t sample_rate,
                               uint8_t **out,
                               size_t *out_len);

/**
 * # Safety
 * `s` must come from this library. NULL is ignored.
 */
void qm_string_free(char *s);

/**
 * # Safety
 * `bytes` and `len` must be exactly what the library returned. NULL is ignored.
 */
void qm_bytes_free(uint8_t *bytes, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMIND_H */
