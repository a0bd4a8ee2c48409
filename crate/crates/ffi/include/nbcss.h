#ifndef NBCSS_H
#define NBCSS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum NbcssStatus {
  NBCSS_STATUS_OK = 0,
  // Null pointer, bad enum value, buffer of the wrong size.
  NBCSS_STATUS_INVALID_ARGUMENT = 1,
  // Field or QC parameters rejected.
  NBCSS_STATUS_INVALID_PARAMS = 2,
  NBCSS_STATUS_PARSE_ERROR = 3,
  NBCSS_STATUS_IO_ERROR = 4,
  // The matrices are not orthogonal.
  NBCSS_STATUS_NOT_ORTHOGONAL = 5,
  // A numeric argument is outside its domain.
  NBCSS_STATUS_DOMAIN_ERROR = 6,
  NBCSS_STATUS_DIMENSION_MISMATCH = 7,
  NBCSS_STATUS_NUMERIC_ERROR = 8,
  // A panic was caught at the boundary.
  NBCSS_STATUS_INTERNAL = 9,
} NbcssStatus;

typedef enum NbcssRole {
  NBCSS_ROLE_C = 0,
  NBCSS_ROLE_D = 1,
} NbcssRole;

typedef enum NbcssChannelMode {
  NBCSS_CHANNEL_MODE_INDEPENDENT = 0,
  NBCSS_CHANNEL_MODE_JOINT = 1,
} NbcssChannelMode;

// Opaque code pair.
typedef struct NbcssCode NbcssCode;

// Opaque decoder bound to one constituent code.
typedef struct NbcssDecoder NbcssDecoder;

typedef struct NbcssDims {
  uint32_t p;
  // Checks per constituent code, M.
  size_t n_checks;
  // Symbols per block, N.
  size_t n_symbols;
  // pN.
  size_t n_qubits;
  double classical_rate;
  double quantum_rate;
} NbcssDims;

typedef struct NbcssDecodeResult {
  bool success;
  uint32_t iterations;
} NbcssDecodeResult;

typedef struct NbcssSimRecord {
  double f_m;
  uint32_t role;
  uint64_t trials;
  uint64_t block_errors;
  double bler;
  double mean_iterations;
  uint64_t fail_count;
  uint64_t mismatch_count;
  uint64_t seed;
} NbcssSimRecord;

typedef struct NbcssLimits {
  double f_m;
  double shannon;
  double s2;
  double bdd;
} NbcssLimits;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *nbcss_last_error(void);

// Library version as a static NUL-terminated string.
const char *nbcss_version(void);

// Constructs a code pair over GF(2^p) with J = 2. `poly` = 0 selects the
// built-in primitive polynomial.
//
// # Safety
// `out` must be a valid pointer; on success it receives a handle to free
// with [`nbcss_code_free`].
enum NbcssStatus nbcss_code_construct(uint32_t p,
                                      uint32_t poly,
                                      size_t l,
                                      uint64_t circulant,
                                      uint64_t sigma,
                                      uint64_t tau,
                                      uint64_t seed,
                                      bool reject_trivial,
                                      struct NbcssCode **out);

// Loads a pair from two NBQC files.
//
// # Safety
// Paths must be NUL-terminated strings; `out` must be valid.
enum NbcssStatus nbcss_code_load(const char *gamma_path,
                                 const char *delta_path,
                                 struct NbcssCode **out);

// Writes `<prefix>.gamma.nbqc` and `<prefix>.delta.nbqc`.
//
// # Safety
// `code` must be a live handle and `prefix` a NUL-terminated string.
enum NbcssStatus nbcss_code_save(const struct NbcssCode *code, const char *prefix);

// Releases a code handle. Null is ignored.
//
// # Safety
// `code` must come from this library and not be used afterwards.
void nbcss_code_free(struct NbcssCode *code);

// # Safety
// `code` and `out` must be valid.
enum NbcssStatus nbcss_code_dims(const struct NbcssCode *code, struct NbcssDims *out);

// Runs the structural checks; `all_passed` receives the verdict.
//
// # Safety
// `code` and `all_passed` must be valid.
enum NbcssStatus nbcss_code_verify(const struct NbcssCode *code, bool *all_passed);

// Syndrome of an N-symbol error for one role; `syndrome` holds M symbols.
//
// # Safety
// Buffers must hold the stated number of elements.
enum NbcssStatus nbcss_code_syndrome(const struct NbcssCode *code,
                                     enum NbcssRole role,
                                     const uint16_t *error,
                                     size_t n,
                                     uint16_t *syndrome,
                                     size_t m);

// Creates a decoder for one constituent code. The decoder copies what it
// needs; the code handle may be freed afterwards.
//
// # Safety
// `code` and `out` must be valid.
enum NbcssStatus nbcss_decoder_new(const struct NbcssCode *code,
                                   enum NbcssRole role,
                                   uint32_t max_iter,
                                   struct NbcssDecoder **out);

// # Safety
// `decoder` must come from [`nbcss_decoder_new`] and not be used afterwards.
void nbcss_decoder_free(struct NbcssDecoder *decoder);

// Decodes an M-symbol syndrome. On success `estimate` receives N symbols;
// on decoder failure it is zero-filled and `result.success` is false.
//
// # Safety
// Buffers must hold the stated number of elements; a decoder must not be
// used from two threads at once.
enum NbcssStatus nbcss_decoder_decode(struct NbcssDecoder *decoder,
                                      const uint16_t *syndrome,
                                      size_t m,
                                      double f_m,
                                      uint16_t *estimate,
                                      size_t n,
                                      struct NbcssDecodeResult *result);

// Monte Carlo estimate at one flip rate. `records` receives two entries,
// role C (0) then role D (1). `workers` = 0 uses the environment default.
//
// # Safety
// `code` must be valid and `records` must point to two elements.
enum NbcssStatus nbcss_simulate(const struct NbcssCode *code,
                                double f_m,
                                uint64_t trials,
                                uint32_t max_iter,
                                uint64_t seed,
                                enum NbcssChannelMode mode,
                                bool count_syndrome_only,
                                uint32_t workers,
                                struct NbcssSimRecord *records);

// Rate limits at `f_m` in [0, 1/3).
//
// # Safety
// `out` must be valid.
enum NbcssStatus nbcss_limits(double f_m, struct NbcssLimits *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NBCSS_H */
