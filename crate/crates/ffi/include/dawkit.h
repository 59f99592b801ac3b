#ifndef DAWKIT_H
#define DAWKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum DawStatus {
  DAW_STATUS_OK = 0,
  DAW_STATUS_NULL_ARGUMENT = 1,
  DAW_STATUS_INVALID_UTF8 = 2,
  DAW_STATUS_INVALID_ARGUMENT = 3,
  DAW_STATUS_DUPLICATE_NAME = 4,
  DAW_STATUS_UNKNOWN_INPUT = 5,
  DAW_STATUS_UNKNOWN_NODE = 6,
  DAW_STATUS_ARITY_MISMATCH = 7,
  DAW_STATUS_CYCLE_DETECTED = 8,
  DAW_STATUS_UNKNOWN_PARAMETER = 9,
  DAW_STATUS_OUT_OF_RANGE = 10,
  DAW_STATUS_NOT_AUTOMATABLE = 11,
  DAW_STATUS_NOT_AN_INSTRUMENT = 12,
  DAW_STATUS_RATE_MISMATCH = 13,
  DAW_STATUS_INVALID_DURATION = 14,
  DAW_STATUS_EMPTY_GRAPH = 15,
  DAW_STATUS_UNKNOWN_KIND = 16,
  DAW_STATUS_PARSE_ERROR = 17,
  DAW_STATUS_VALIDATION_ERROR = 18,
  DAW_STATUS_IO_ERROR = 19,
  DAW_STATUS_BUFFER_TOO_SMALL = 20,
  DAW_STATUS_PANIC = 99,
} DawStatus;

// Opaque processor graph.
typedef struct DawGraph DawGraph;

// Opaque set of recorded buffers from one render.
typedef struct DawRenderResult DawRenderResult;

typedef struct DawWarpMarker {
  double seconds;
  double beats;
} DawWarpMarker;

// Clip region and placement for `daw_graph_add_playback_warp`.
typedef struct DawClip {
  double source_bpm;
  double start_marker;
  double end_marker;
  double loop_start;
  double loop_end;
  bool loop_on;
  bool warp_on;
  double at_beats;
  double transpose_semitones;
} DawClip;

typedef struct DawNote {
  uint8_t note;
  uint8_t velocity;
  // Seconds, or beats when loaded in beats mode.
  double start;
  double duration;
} DawNote;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after a
// success. Valid until the next call into this library on the thread.
const char *daw_last_error(void);

// Create an empty graph.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum DawStatus daw_graph_new(double sample_rate,
                             uintptr_t block_size,
                             double bpm,
                             struct DawGraph **out);

// Build a graph from a JSON project file; `duration_out` receives the
// project's render length in seconds.
//
// # Safety
// `path` must be a NUL-terminated string; `out` and `duration_out` must be
// valid writable pointers.
enum DawStatus daw_project_load(const char *path, struct DawGraph **out, double *duration_out);

// Release a graph. Null is ignored.
//
// # Safety
// `g` must come from this library and not have been freed.
void daw_graph_free(struct DawGraph *g);

// Add a node of a kind that needs no audio material: `oscillator`,
// `gain`, `add`, `biquad` or `compressor`.
//
// # Safety
// Strings must be NUL-terminated; `inputs` must hold `num_inputs` strings.
enum DawStatus daw_graph_add_node(struct DawGraph *g,
                                  const char *kind,
                                  const char *name,
                                  const char *const *inputs,
                                  uintptr_t num_inputs);

// Add a `playback` node playing the given audio from frame 0.
//
// # Safety
// `channels` must point to `num_channels` arrays of `frames` doubles.
enum DawStatus daw_graph_add_playback(struct DawGraph *g,
                                      const char *name,
                                      const double *const *channels,
                                      uintptr_t num_channels,
                                      uintptr_t frames,
                                      double sample_rate);

// Add a `sampler` instrument over the given sample.
//
// # Safety
// As for [`daw_graph_add_playback`].
enum DawStatus daw_graph_add_sampler(struct DawGraph *g,
                                     const char *name,
                                     const double *const *channels,
                                     uintptr_t num_channels,
                                     uintptr_t frames,
                                     double sample_rate);

// Add a `wavetable_synth` reading a single-cycle table of `len` ≥ 4.
//
// # Safety
// `table` must point to `len` doubles.
enum DawStatus daw_graph_add_wavetable(struct DawGraph *g,
                                       const char *name,
                                       const double *table,
                                       uintptr_t len);

// Add a `playback_warp` node. With `num_markers` = 0 the clip follows
// `clip.source_bpm` from the start of the audio.
//
// # Safety
// Audio as for [`daw_graph_add_playback`]; `markers` must hold
// `num_markers` entries; `clip` must be valid.
enum DawStatus daw_graph_add_playback_warp(struct DawGraph *g,
                                           const char *name,
                                           const double *const *channels,
                                           uintptr_t num_channels,
                                           uintptr_t frames,
                                           double sample_rate,
                                           const struct DawWarpMarker *markers,
                                           uintptr_t num_markers,
                                           const struct DawClip *clip);

// Set a scalar parameter.
//
// # Safety
// Strings must be NUL-terminated.
enum DawStatus daw_graph_set_param(struct DawGraph *g,
                                   const char *node,
                                   const char *param,
                                   double value);

// Automate a parameter with one value per engine frame.
//
// # Safety
// Strings must be NUL-terminated; `values` must hold `len` doubles.
enum DawStatus daw_graph_set_automation(struct DawGraph *g,
                                        const char *node,
                                        const char *param,
                                        const double *values,
                                        uintptr_t len,
                                        bool hold_last);

// Include or exclude a node from render results.
//
// # Safety
// `node` must be NUL-terminated.
enum DawStatus daw_graph_set_record(struct DawGraph *g, const char *node, bool record);

// Give an instrument its notes.
//
// # Safety
// `notes` must hold `len` entries.
enum DawStatus daw_graph_load_notes(struct DawGraph *g,
                                    const char *node,
                                    const struct DawNote *notes,
                                    uintptr_t len,
                                    bool beats_mode);

// Give an instrument the notes of a Standard MIDI File held in memory.
//
// # Safety
// `bytes` must hold `len` bytes.
enum DawStatus daw_graph_load_smf(struct DawGraph *g,
                                  const char *node,
                                  const uint8_t *bytes,
                                  uintptr_t len,
                                  bool beats_mode);

// Render `duration_seconds` and return the recorded buffers.
//
// # Safety
// `out` must be a valid writable pointer.
enum DawStatus daw_graph_render(struct DawGraph *g,
                                double duration_seconds,
                                struct DawRenderResult **out);

// Release a render result. Null is ignored.
//
// # Safety
// `r` must come from [`daw_graph_render`] and not have been freed.
void daw_result_free(struct DawRenderResult *r);

// Number of recorded buffers (0 for null).
//
// # Safety
// `r` must be null or a live result.
uintptr_t daw_result_count(const struct DawRenderResult *r);

// Name of buffer `index` (sorted by name), or null when out of range.
// The string lives as long as the result.
//
// # Safety
// `r` must be null or a live result.
const char *daw_result_name(const struct DawRenderResult *r, uintptr_t index);

// Channel and frame counts of buffer `index`.
//
// # Safety
// `r` must be null or a live result; outputs must be writable.
enum DawStatus daw_result_shape(const struct DawRenderResult *r,
                                uintptr_t index,
                                uintptr_t *channels_out,
                                uintptr_t *frames_out);

// Copy one channel of buffer `index` into `dst`, which holds `capacity`
// doubles and must fit the whole channel.
//
// # Safety
// `r` must be null or a live result; `dst` must hold `capacity` doubles.
enum DawStatus daw_result_copy_channel(const struct DawRenderResult *r,
                                       uintptr_t index,
                                       uintptr_t channel,
                                       double *dst,
                                       uintptr_t capacity);

// Circle-of-fifths distance (0-6) between two keys such as `"Gmaj"`.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum DawStatus daw_key_circle_distance(const char *a, const char *b, uint8_t *out);

// Tempo/key pairing distance between two stems.
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum DawStatus daw_pair_distance(double bpm_a,
                                 const char *key_a,
                                 double bpm_b,
                                 const char *key_b,
                                 double w_tempo,
                                 double w_key,
                                 double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DAWKIT_H */
