#ifndef EVSYNC_H
#define EVSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum EvsStatus {
  EVS_STATUS_OK = 0,
  EVS_STATUS_NULL_POINTER = 1,
  EVS_STATUS_INVALID_ARGUMENT = 2,
  // Malformed text input (bad field, polarity, ordering).
  EVS_STATUS_PARSE = 3,
  // Malformed binary input or image (magic, truncation, counts).
  EVS_STATUS_FORMAT = 4,
  // Mismatched frame or sensor dimensions.
  EVS_STATUS_GEOMETRY = 5,
  // No events fell in any window that had to be scored.
  EVS_STATUS_EMPTY_COVERAGE = 6,
  EVS_STATUS_IO = 7,
  // A panic was caught at the boundary. This indicates a library bug.
  EVS_STATUS_INTERNAL = 8,
} EvsStatus;

typedef enum EvsMethod {
  EVS_METHOD_SYNTHESIS = 0,
  EVS_METHOD_WARP = 1,
  EVS_METHOD_BLEND = 2,
} EvsMethod;

// Opaque event stream.
typedef struct EvsEventStream EvsEventStream;

// Opaque gray or RGB frame with a timestamp.
typedef struct EvsFrame EvsFrame;

// Opaque, growable list of frames with a nominal frame rate.
typedef struct EvsSequence EvsSequence;

// One event: pixel, timestamp in µs, polarity (-1 or 1).
typedef struct EvsEvent {
  uint16_t x;
  uint16_t y;
  uint64_t t;
  int8_t p;
} EvsEvent;

// A matched feature: event-sensor point and frame-camera point.
typedef struct EvsFeaturePair {
  double event_x;
  double event_y;
  double frame_x;
  double frame_y;
} EvsFeaturePair;

// `x_frame = r * (x_event - dx)`, likewise for y.
typedef struct EvsRegistration {
  double dx;
  double dy;
  double r;
} EvsRegistration;

typedef struct EvsAlignConfig {
  size_t n_candidates;
  uint64_t step_us;
  uint64_t window_us;
  size_t interleave;
  size_t ssim_frames;
  size_t first_frame;
  // Count events regardless of polarity.
  bool unsigned_polarity;
  // Compare in the event sensor's grid instead of the frame camera's.
  bool compare_in_event_grid;
} EvsAlignConfig;

typedef struct EvsAlignment {
  size_t subsequence_index;
  size_t k;
  // Event-clock time minus frame-clock time, µs.
  int64_t offset_us;
  double score;
} EvsAlignment;

typedef struct EvsInterpParams {
  double contrast;
  double epsilon;
  enum EvsMethod method;
  size_t block;
  size_t radius;
  double energy_floor;
  double alpha;
} EvsInterpParams;

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next library call on the same thread.
const char *evs_last_error_message(void);

// Static, nul-terminated name of a status code.
const char *evs_status_name(enum EvsStatus status);

// Releases a buffer returned by the library.
//
// # Safety
// `data` and `len` must come from one `evs_events_write_*` call, or `data`
// must be null.
void evs_buffer_free(uint8_t *data, size_t len);

// Builds a stream from an array of events, which must be sorted by time and
// inside the sensor.
//
// # Safety
// `events` must point to `n` records (or be null with `n == 0`); `out` must
// be writable.
enum EvsStatus evs_events_new(uint16_t width,
                              uint16_t height,
                              const struct EvsEvent *events,
                              size_t n,
                              struct EvsEventStream **out_stream);

// Parses EVT-CSV text (with its `width=,height=` header).
//
// # Safety
// `data` must point to `len` readable bytes; `out_stream` must be writable.
enum EvsStatus evs_events_parse_csv(const uint8_t *data,
                                    size_t len,
                                    struct EvsEventStream **out_stream);

// Parses an EVB1 binary stream.
//
// # Safety
// `data` must point to `len` readable bytes; `out_stream` must be writable.
enum EvsStatus evs_events_parse_binary(const uint8_t *data,
                                       size_t len,
                                       struct EvsEventStream **out_stream);

// Serializes to EVB1. Free the result with [`evs_buffer_free`].
//
// # Safety
// `stream` must be a live handle; the out pointers must be writable.
enum EvsStatus evs_events_write_binary(const struct EvsEventStream *stream,
                                       uint8_t **out_data,
                                       size_t *out_len);

// Serializes to EVT-CSV (not nul-terminated). Free the result with
// [`evs_buffer_free`].
//
// # Safety
// `stream` must be a live handle; the out pointers must be writable.
enum EvsStatus evs_events_write_csv(const struct EvsEventStream *stream,
                                    uint8_t **out_data,
                                    size_t *out_len);

// # Safety
// `stream` must be a live handle or null.
size_t evs_events_len(const struct EvsEventStream *stream);

// # Safety
// `stream` must be a live handle or null.
uint16_t evs_events_width(const struct EvsEventStream *stream);

// # Safety
// `stream` must be a live handle or null.
uint16_t evs_events_height(const struct EvsEventStream *stream);

// Copies event `index` into `out_event`.
//
// # Safety
// `stream` must be a live handle; `out_event` must be writable.
enum EvsStatus evs_events_get(const struct EvsEventStream *stream,
                              size_t index,
                              struct EvsEvent *out_event);

// # Safety
// `stream` must be a handle from this library, or null. It must not be used
// afterwards.
void evs_events_free(struct EvsEventStream *stream);

// Per-pixel polarity sums (or counts when `unsigned_polarity`) over
// `[t0, t0 + window)`, written row-major into `out_values`, which must hold
// exactly `width * height` values.
//
// # Safety
// `stream` must be a live handle; `out_values` must point to `len` writable
// values.
enum EvsStatus evs_accumulate(const struct EvsEventStream *stream,
                              uint64_t t0,
                              uint64_t window,
                              bool unsigned_polarity,
                              int32_t *out_values,
                              size_t len);

// Temporal voxel grid with `bins` bins over `[t0, t1)`, written bin-major
// then row-major into `out_values` (`bins * width * height` values).
//
// # Safety
// `stream` must be a live handle; `out_values` must point to `len` writable
// values.
enum EvsStatus evs_voxel_grid(const struct EvsEventStream *stream,
                              uint64_t t0,
                              uint64_t t1,
                              size_t bins,
                              double *out_values,
                              size_t len);

// Creates a frame from `width * height * channels` intensities in [0, 255],
// row-major and channel-interleaved. `channels` is 1 (gray) or 3 (RGB).
//
// # Safety
// `pixels` must point to `len` readable values; `out_frame` must be
// writable.
enum EvsStatus evs_frame_new(size_t width,
                             size_t height,
                             size_t channels,
                             const double *pixels,
                             size_t len,
                             uint64_t t,
                             struct EvsFrame **out_frame);

// # Safety
// `frame` must be a handle from this library, or null. It must not be used
// afterwards.
void evs_frame_free(struct EvsFrame *frame);

// # Safety
// `frame` must be a live handle or null.
size_t evs_frame_width(const struct EvsFrame *frame);

// # Safety
// `frame` must be a live handle or null.
size_t evs_frame_height(const struct EvsFrame *frame);

// 1 for gray, 3 for RGB, 0 for null.
//
// # Safety
// `frame` must be a live handle or null.
size_t evs_frame_channels(const struct EvsFrame *frame);

// # Safety
// `frame` must be a live handle or null.
uint64_t evs_frame_time(const struct EvsFrame *frame);

// Copies the pixels out; `len` must equal `width * height * channels`.
//
// # Safety
// `frame` must be a live handle; `out_pixels` must point to `len` writable
// values.
enum EvsStatus evs_frame_copy_pixels(const struct EvsFrame *frame, double *out_pixels, size_t len);

// SSIM of the grayscale versions of two frames.
//
// # Safety
// `a` and `b` must be live handles; `out_value` must be writable.
enum EvsStatus evs_ssim(const struct EvsFrame *a, const struct EvsFrame *b, double *out_value);

// PSNR in dB of the grayscale versions of two frames; infinite when equal.
//
// # Safety
// `a` and `b` must be live handles; `out_value` must be writable.
enum EvsStatus evs_psnr(const struct EvsFrame *a, const struct EvsFrame *b, double *out_value);

// Creates an empty sequence with nominal rate `fps_num / fps_den`.
//
// # Safety
// `out_seq` must be writable.
enum EvsStatus evs_sequence_new(uint32_t fps_num, uint32_t fps_den, struct EvsSequence **out_seq);

// Appends a copy of `frame`. Timestamps must increase and all frames must
// share kind and geometry.
//
// # Safety
// `seq` and `frame` must be live handles.
enum EvsStatus evs_sequence_push(struct EvsSequence *seq, const struct EvsFrame *frame);

// # Safety
// `seq` must be a live handle or null.
size_t evs_sequence_len(const struct EvsSequence *seq);

// Returns a new frame handle holding a copy of frame `index`.
//
// # Safety
// `seq` must be a live handle; `out_frame` must be writable.
enum EvsStatus evs_sequence_get(const struct EvsSequence *seq,
                                size_t index,
                                struct EvsFrame **out_frame);

// # Safety
// `seq` must be a handle from this library, or null. It must not be used
// afterwards.
void evs_sequence_free(struct EvsSequence *seq);

// Shift from the first pair, scale from the distance ratio of both.
//
// # Safety
// `pairs` must point to two records; `out_reg` must be writable.
enum EvsStatus evs_registration_estimate(const struct EvsFeaturePair *pairs,
                                         struct EvsRegistration *out_reg);

// Projects events into a `target_width x target_height` frame-camera grid
// with clock offset `offset_us` (event time minus frame time). Events that
// land outside, or before time zero, are dropped and counted.
//
// # Safety
// `stream` must be a live handle; the out pointers must be writable.
enum EvsStatus evs_project_events(const struct EvsEventStream *stream,
                                  struct EvsRegistration reg,
                                  int64_t offset_us,
                                  uint16_t target_width,
                                  uint16_t target_height,
                                  struct EvsEventStream **out_stream,
                                  size_t *out_dropped);

// Fills `out_cfg` with the default search: 250 candidates 100 µs apart,
// 25 ms windows, 3 subsequences, 10 frames each.
//
// # Safety
// `out_cfg` must be writable.
enum EvsStatus evs_align_config_default(struct EvsAlignConfig *out_cfg);

// Estimates the clock offset between a frame sequence and an event stream.
// The coarse stage runs unless `use_manual_coarse` is set, in which case the
// fine search is centred on `manual_coarse_us`.
//
// # Safety
// `seq` and `events` must be live handles; `reg` and `cfg` readable;
// `out_alignment` writable.
enum EvsStatus evs_synchronize(const struct EvsSequence *seq,
                               const struct EvsEventStream *events,
                               const struct EvsRegistration *reg,
                               const struct EvsAlignConfig *cfg,
                               bool use_manual_coarse,
                               int64_t manual_coarse_us,
                               struct EvsAlignment *out_alignment);

// Fills `out_params` with the defaults: blend method, contrast 0.15,
// epsilon 1, 16 px blocks, radius 8, alpha 0.5.
//
// # Safety
// `out_params` must be writable.
enum EvsStatus evs_interp_params_default(struct EvsInterpParams *out_params);

// Generates frames at `left.t + targets[i]` from two boundary frames and the
// events between them (already in frame-camera coordinates and clock).
// Targets must increase strictly and lie strictly inside the interval.
//
// # Safety
// `left`, `right` and `events` must be live handles; `targets` must point to
// `n_targets` values; `params` readable; `out_seq` writable.
enum EvsStatus evs_interpolate(const struct EvsFrame *left,
                               const struct EvsFrame *right,
                               const struct EvsEventStream *events,
                               const uint64_t *targets,
                               size_t n_targets,
                               const struct EvsInterpParams *params,
                               struct EvsSequence **out_seq);

#endif  /* EVSYNC_H */
