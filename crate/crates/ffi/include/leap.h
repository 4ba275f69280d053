#ifndef LEAP_H
#define LEAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LeapStatus {
  LEAP_STATUS_OK = 0,
  LEAP_STATUS_NULL_POINTER = 1,
  LEAP_STATUS_DIMENSION = 2,
  LEAP_STATUS_FORMAT = 3,
  LEAP_STATUS_CONFIGURATION = 4,
  LEAP_STATUS_PROTOCOL = 5,
  LEAP_STATUS_RESET_VIOLATION = 6,
  LEAP_STATUS_FRAMING = 7,
  LEAP_STATUS_RANGE = 8,
  LEAP_STATUS_CONSISTENCY = 9,
  LEAP_STATUS_WORKER = 10,
  LEAP_STATUS_IO = 11,
  LEAP_STATUS_BUFFER_TOO_SMALL = 12,
  LEAP_STATUS_INVALID_STRING = 13,
  LEAP_STATUS_PANIC = 14,
} LeapStatus;

typedef enum LeapColorMode {
  LEAP_COLOR_MODE_LUMA_GAIN = 0,
  LEAP_COLOR_MODE_PER_CHANNEL = 1,
} LeapColorMode;

typedef enum LeapTimingMode {
  LEAP_TIMING_MODE_TWO_PASS = 0,
  LEAP_TIMING_MODE_FRAME_DELAYED = 1,
} LeapTimingMode;

/**
 * Opaque RGB24 frame.
 */
typedef struct LeapFrame LeapFrame;

/**
 * Opaque streaming equalizer.
 */
typedef struct LeapHistEq LeapHistEq;

typedef struct LeapGpioFields {
  uint32_t rows;
  uint32_t cols;
  bool reset;
} LeapGpioFields;

typedef struct LeapStageTimes {
  double read_ms;
  double preprocess_ms;
  double infer_ms;
  double postprocess_ms;
  double overlay_ms;
  double write_ms;
} LeapStageTimes;

/**
 * Frame-rate fields are `INFINITY` when the matching time is zero.
 */
typedef struct LeapThroughput {
  double si_ms;
  double psi_lower_bound_ms;
  double si_fps;
  double psi_max_fps;
} LeapThroughput;

typedef struct LeapBox {
  double x;
  double y;
  double w;
  double h;
} LeapBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of `status`.
 */
const char *leap_status_message(enum LeapStatus status);

/**
 * Creates a `width` x `height` frame filled with one color.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LeapStatus leap_frame_new(uint32_t width,
                               uint32_t height,
                               uint8_t r,
                               uint8_t g,
                               uint8_t b,
                               struct LeapFrame **out);

/**
 * Creates a frame from packed RGB bytes, row-major, `len == width*height*3`.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` to writable storage
 * for one handle.
 */
enum LeapStatus leap_frame_from_rgb(uint32_t width,
                                    uint32_t height,
                                    const uint8_t *data,
                                    size_t len,
                                    struct LeapFrame **out);

/**
 * Releases a frame. Null is ignored.
 *
 * # Safety
 * `frame` must be null or a handle from this library not yet freed.
 */
void leap_frame_free(struct LeapFrame *frame);

/**
 * Width in pixels, 0 for null.
 *
 * # Safety
 * `frame` must be null or a live handle.
 */
uint32_t leap_frame_width(const struct LeapFrame *frame);

/**
 * Height in pixels, 0 for null.
 *
 * # Safety
 * `frame` must be null or a live handle.
 */
uint32_t leap_frame_height(const struct LeapFrame *frame);

/**
 * Copies the frame's packed RGB bytes into `buf`.
 *
 * # Safety
 * `frame` must be a live handle and `buf` must point to `len` writable bytes.
 */
enum LeapStatus leap_frame_copy_rgb(const struct LeapFrame *frame, uint8_t *buf, size_t len);

/**
 * Loads a binary PPM (P6, maxval 255).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LeapStatus leap_ppm_read(const char *path, struct LeapFrame **out);

/**
 * Saves a frame as binary PPM.
 *
 * # Safety
 * `frame` must be a live handle and `path` a NUL-terminated string.
 */
enum LeapStatus leap_ppm_write(const struct LeapFrame *frame, const char *path);

/**
 * Equalizes a whole frame with its own histogram.
 *
 * # Safety
 * `frame` must be a live handle; `out` must be writable.
 */
enum LeapStatus leap_equalize(const struct LeapFrame *frame,
                              enum LeapColorMode color_mode,
                              struct LeapFrame **out);

/**
 * Floor-divides every channel by `divisor`.
 *
 * # Safety
 * `frame` must be a live handle; `out` must be writable.
 */
enum LeapStatus leap_darken(const struct LeapFrame *frame,
                            uint32_t divisor,
                            struct LeapFrame **out);

/**
 * Packs the enhancement core's control word.
 *
 * # Safety
 * `out` must be writable.
 */
enum LeapStatus leap_gpio_pack(uint32_t rows, uint32_t cols, bool reset, uint32_t *out);

struct LeapGpioFields leap_gpio_unpack(uint32_t word);

/**
 * Creates a streaming equalizer, released and ready for frames.
 *
 * # Safety
 * `out` must be writable.
 */
enum LeapStatus leap_histeq_new(uint32_t rows,
                                uint32_t cols,
                                enum LeapColorMode color_mode,
                                enum LeapTimingMode timing_mode,
                                struct LeapHistEq **out);

/**
 * Writes a control word, as software would over the register interface.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum LeapStatus leap_histeq_configure(struct LeapHistEq *h, uint32_t word);

/**
 * Streams one frame through the equalizer. `*out` is set to the emitted
 * frame, or to null when the core emits nothing for this input.
 *
 * # Safety
 * `h` and `frame` must be live handles; `out` must be writable.
 */
enum LeapStatus leap_histeq_push_frame(struct LeapHistEq *h,
                                       const struct LeapFrame *frame,
                                       struct LeapFrame **out);

/**
 * # Safety
 * `h` must be null or a handle from [`leap_histeq_new`] not yet freed.
 */
void leap_histeq_free(struct LeapHistEq *h);

/**
 * Synchronous and pipelined frame-time prediction.
 *
 * # Safety
 * `times` must be readable and `out` writable.
 */
enum LeapStatus leap_predict_times(const struct LeapStageTimes *times, struct LeapThroughput *out);

/**
 * Number of scores written by [`leap_classify_quadrant`].
 */
size_t leap_quadrant_class_count(void);

/**
 * Quadrant classifier scores (four quadrants then "none").
 *
 * # Safety
 * `frame` must be a live handle and `scores` must point to `len` writable doubles.
 */
enum LeapStatus leap_classify_quadrant(const struct LeapFrame *frame,
                                       double threshold,
                                       double *scores,
                                       size_t len);

double leap_iou(struct LeapBox a, struct LeapBox b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEAP_H */
