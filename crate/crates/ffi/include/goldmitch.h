#ifndef GOLDMITCH_H
#define GOLDMITCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GmFsmState {
  GM_FSM_STATE_IDLE = 0,
  GM_FSM_STATE_SIGN = 1,
  GM_FSM_STATE_COEFF = 2,
  GM_FSM_STATE_MULT = 3,
  GM_FSM_STATE_OUT = 4,
} GmFsmState;

typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_POINTER = 1,
  GM_STATUS_ZERO_DIVISOR = 2,
  /**
   * Quotient too large for the output port.
   */
  GM_STATUS_OVERFLOW = 3,
  GM_STATUS_INVALID_CONFIG = 4,
  /**
   * Operand wider than its port, or a result part wider than 64 bits.
   */
  GM_STATUS_OUT_OF_RANGE = 5,
  /**
   * No quotient has been latched yet.
   */
  GM_STATUS_NOT_READY = 6,
  GM_STATUS_INTERNAL = 7,
} GmStatus;

typedef enum GmStrategy {
  GM_STRATEGY_EXACT = 0,
  GM_STRATEGY_MITCHELL_CORRECTED = 1,
  GM_STRATEGY_MITCHELL_UNCORRECTED = 2,
} GmStrategy;

/**
 * Opaque divider configuration handle.
 */
typedef struct GmDivider GmDivider;

/**
 * Opaque clocked-simulator handle.
 */
typedef struct GmSimulator GmSimulator;

typedef struct GmConfig {
  uint32_t width_dividend;
  uint32_t width_divisor;
  uint32_t extension;
  uint32_t width_quo;
  /**
   * Output fraction bits plus one.
   */
  uint32_t width_fra;
  uint32_t iterations;
  /**
   * A `GmStrategy` value.
   */
  uint32_t strategy;
} GmConfig;

/**
 * Sign-magnitude quotient: `(int_part + frac_part / 2^frac_bits)`, negated
 * when `negative`.
 */
typedef struct GmQuotient {
  bool negative;
  uint64_t int_part;
  uint64_t frac_part;
  uint32_t int_bits;
  uint32_t frac_bits;
} GmQuotient;

/**
 * One simulated clock cycle.
 */
typedef struct GmCycle {
  uint64_t cycle;
  enum GmFsmState state;
  /**
   * Iteration number for COEFF/MULT states, 0 otherwise.
   */
  uint32_t iteration;
  /**
   * `en[3:0]`
   */
  uint8_t en;
  bool start;
} GmCycle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The default configuration: 32-bit ports, 32 extension bits, four
 * iterations on corrected Mitchell multipliers.
 */
struct GmConfig gm_config_default(void);

/**
 * Validates `config` and stores a new divider handle in `*out`.
 *
 * # Safety
 * `config` must point to a valid `GmConfig` and `out` to writable storage.
 */
enum GmStatus gm_divider_new(const struct GmConfig *config, struct GmDivider **out);

/**
 * # Safety
 * `divider` must come from `gm_divider_new` and not be freed twice. Null is
 * ignored.
 */
void gm_divider_free(struct GmDivider *divider);

/**
 * Behavioral division.
 *
 * # Safety
 * `divider` must be a live handle and `out` writable.
 */
enum GmStatus gm_divide(const struct GmDivider *divider,
                        int64_t dividend,
                        int64_t divisor,
                        struct GmQuotient *out);

/**
 * Runs one division through the clocked model. `cycles` may be null;
 * otherwise it receives the cycle count from start pulse to output.
 *
 * # Safety
 * `divider` must be a live handle, `out` writable, `cycles` null or
 * writable.
 */
enum GmStatus gm_run_cycles(const struct GmDivider *divider,
                            int64_t dividend,
                            int64_t divisor,
                            struct GmQuotient *out,
                            uint32_t *cycles);

/**
 * Nearest double to the quotient.
 */
double gm_quotient_to_f64(struct GmQuotient q);

/**
 * Creates a simulator in reset, using the divider's configuration.
 *
 * # Safety
 * `divider` must be a live handle and `out` writable.
 */
enum GmStatus gm_simulator_new(const struct GmDivider *divider, struct GmSimulator **out);

/**
 * # Safety
 * `sim` must come from `gm_simulator_new` and not be freed twice. Null is
 * ignored.
 */
void gm_simulator_free(struct GmSimulator *sim);

/**
 * Drives the input ports for one cycle and takes the clock edge. `out` may
 * be null.
 *
 * # Safety
 * `sim` must be a live handle, `out` null or writable.
 */
enum GmStatus gm_simulator_clock(struct GmSimulator *sim,
                                 int64_t dividend,
                                 int64_t divisor,
                                 struct GmCycle *out);

/**
 * Copies the latched quotient, or returns `NotReady`.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum GmStatus gm_simulator_output(const struct GmSimulator *sim, struct GmQuotient *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gm_last_error(char *buf, size_t len);

/**
 * Static name of a status code, e.g. `"ZERO_DIVISOR"`.
 */
const char *gm_status_name(enum GmStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOLDMITCH_H */
