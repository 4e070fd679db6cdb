#ifndef SOP_FFI_H
#define SOP_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SopMethod {
  SOP_METHOD_SIMPLE = 0,
  SOP_METHOD_TSPTW = 1,
  SOP_METHOD_ANS = 2,
} SopMethod;

typedef enum SopSetup {
  SOP_SETUP_I = 1,
  SOP_SETUP_II = 2,
  SOP_SETUP_III = 3,
} SopSetup;

typedef enum SopStatus {
  SOP_STATUS_OK = 0,
  SOP_STATUS_NULL_ARGUMENT = 1,
  SOP_STATUS_INVALID_UTF8 = 2,
  SOP_STATUS_PARSE = 3,
  SOP_STATUS_INVALID_ORDER = 4,
  SOP_STATUS_INVALID_ARGUMENT = 5,
  SOP_STATUS_BUFFER_TOO_SMALL = 6,
  SOP_STATUS_UNAVAILABLE = 7,
  /**
   * A witness failed to replay; indicates a bug.
   */
  SOP_STATUS_INTERNAL = 8,
  SOP_STATUS_PANIC = 99,
} SopStatus;

typedef enum SopVerdict {
  SOP_VERDICT_UNAVAILABLE = 0,
  SOP_VERDICT_AVAILABLE = 1,
  /**
   * The exact search hit its node budget.
   */
  SOP_VERDICT_UNDECIDED = 2,
} SopVerdict;

/**
 * Opaque schedule handle.
 */
typedef struct SopSchedule SopSchedule;

/**
 * Parameters for [`sop_schedule_generate`]; unspecified generator settings
 * keep their defaults.
 */
typedef struct SopGenParams {
  uint64_t seed;
  uint32_t pool_size;
  uint32_t vehicles;
  enum SopSetup setup;
  /**
   * Re-optimize travel time after every booking.
   */
  bool optimized;
  /**
   * Fill level in (0, 1].
   */
  double fill;
} SopGenParams;

/**
 * A prospective order. Meters, seconds, weight units.
 */
typedef struct SopOrder {
  uint32_t id;
  int64_t x;
  int64_t y;
  uint32_t weight;
  int64_t service;
} SopOrder;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *sop_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sop_version(void);

/**
 * Parses a schedule file held in `text`.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
enum SopStatus sop_schedule_parse(const char *text, struct SopSchedule **out);

/**
 * Generates an instance, books it and returns the schedule at
 * `params.fill`.
 *
 * # Safety
 * `params` must be null or point to a `SopGenParams`; `out` must be null
 * or writable.
 */
enum SopStatus sop_schedule_generate(const struct SopGenParams *params, struct SopSchedule **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `schedule` must be null or a handle from this library not yet freed.
 */
void sop_schedule_free(struct SopSchedule *schedule);

/**
 * Number of time windows; 0 for a null handle.
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
size_t sop_schedule_window_count(const struct SopSchedule *schedule);

/**
 * Number of scheduled orders; 0 for a null handle.
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
size_t sop_schedule_order_count(const struct SopSchedule *schedule);

/**
 * Number of tours; 0 for a null handle.
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
size_t sop_schedule_tour_count(const struct SopSchedule *schedule);

/**
 * Decides every window for `order`. `verdicts[w]` receives the verdict for
 * window id `w`; `available` (optional) the number of available windows.
 *
 * # Safety
 * `verdicts` must hold `len` writable elements; other pointers null or
 * valid.
 */
enum SopStatus sop_solve(const struct SopSchedule *schedule,
                         const struct SopOrder *order,
                         enum SopMethod method,
                         enum SopVerdict *verdicts,
                         size_t len,
                         size_t *available);

/**
 * Books `order` into `window` if `method` finds room, rearranging other
 * orders as the method's witness prescribes. Returns `Unavailable` and
 * leaves the schedule untouched otherwise.
 *
 * # Safety
 * `schedule` must be a live handle not shared with another thread during
 * the call; `order` null or valid.
 */
enum SopStatus sop_schedule_commit(struct SopSchedule *schedule,
                                   const struct SopOrder *order,
                                   enum SopMethod method,
                                   uint32_t window);

/**
 * Serializes the schedule. `needed` receives the size including the
 * terminating NUL; when `buf` is null or `cap` too small nothing is written
 * and `BufferTooSmall` is returned.
 *
 * # Safety
 * `buf` must be null or hold `cap` writable bytes; `needed` null or
 * writable.
 */
enum SopStatus sop_schedule_write(const struct SopSchedule *schedule,
                                  char *buf,
                                  size_t cap,
                                  size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOP_FFI_H */
