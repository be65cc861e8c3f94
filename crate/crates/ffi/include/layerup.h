#ifndef LAYERUP_H
#define LAYERUP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum LayerupStatus {
  LAYERUP_STATUS_OK = 0,
  LAYERUP_STATUS_NULL_POINTER = 1,
  LAYERUP_STATUS_INVALID_ARGUMENT = 2,
  LAYERUP_STATUS_IO = 3,
  LAYERUP_STATUS_UNSUPPORTED_FORMAT = 4,
  LAYERUP_STATUS_CORRUPT_IMAGE = 5,
  LAYERUP_STATUS_DIMENSION_MISMATCH = 6,
  LAYERUP_STATUS_IMAGE_TOO_SMALL = 7,
  LAYERUP_STATUS_SOLVER_DID_NOT_CONVERGE = 8,
  LAYERUP_STATUS_CONFIG = 9,
  LAYERUP_STATUS_PANIC = 10,
} LayerupStatus;

// Opaque pipeline configuration handle.
typedef struct LayerupConfig LayerupConfig;

// Opaque image handle.
typedef struct LayerupImage LayerupImage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *layerup_last_error(void);

// Library version as a static NUL-terminated string.
const char *layerup_version(void);

// Creates an image from `width * height * channels` interleaved samples.
// `channels` must be 1 or 3.
//
// # Safety
// `data` must point to `len` readable doubles; `out` must be writable.
enum LayerupStatus layerup_image_from_data(size_t width,
                                           size_t height,
                                           size_t channels,
                                           const double *data,
                                           size_t len,
                                           struct LayerupImage **out);

// Loads a PNG, PGM or PPM file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum LayerupStatus layerup_image_load(const char *path, struct LayerupImage **out);

// Writes an 8-bit file; the format follows the extension.
//
// # Safety
// `img` must be a live handle; `path` a NUL-terminated string.
enum LayerupStatus layerup_image_save(const struct LayerupImage *img, const char *path);

// Releases an image. NULL is ignored.
//
// # Safety
// `img` must be NULL or a handle not yet freed.
void layerup_image_free(struct LayerupImage *img);

// Writes width, height and channel count; any output pointer may be NULL.
//
// # Safety
// `img` must be a live handle; non-NULL outputs must be writable.
enum LayerupStatus layerup_image_dims(const struct LayerupImage *img,
                                      size_t *width,
                                      size_t *height,
                                      size_t *channels);

// Copies the samples, interleaved, into `out`, which holds `len` doubles.
//
// # Safety
// `img` must be a live handle; `out` must point to `len` writable doubles.
enum LayerupStatus layerup_image_copy_data(const struct LayerupImage *img, double *out, size_t len);

// Default configuration for magnifying by `factor`.
//
// # Safety
// `out` must be writable.
enum LayerupStatus layerup_config_new(double factor, struct LayerupConfig **out);

// Releases a configuration. NULL is ignored.
//
// # Safety
// `cfg` must be NULL or a handle not yet freed.
void layerup_config_free(struct LayerupConfig *cfg);

// Sets one option by its command-line name, e.g. `("beta", "0.7")` or
// `("exact-search", "true")`. The configuration is left unchanged if the
// result would be invalid.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum LayerupStatus layerup_config_set(struct LayerupConfig *cfg,
                                      const char *key,
                                      const char *value);

// Applies a `key = value` file on top of the current settings.
//
// # Safety
// `cfg` must be a live handle; `path` a NUL-terminated string.
enum LayerupStatus layerup_config_load(struct LayerupConfig *cfg, const char *path);

// Upscales `img` into a new image.
//
// # Safety
// `img` and `cfg` must be live handles; `out` must be writable.
enum LayerupStatus layerup_upscale(const struct LayerupImage *img,
                                   const struct LayerupConfig *cfg,
                                   struct LayerupImage **out);

// PSNR in dB over all channels; `+inf` for identical images.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum LayerupStatus layerup_psnr(const struct LayerupImage *a,
                                const struct LayerupImage *b,
                                double *out);

// Mean SSIM, computed on luma for colour images.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum LayerupStatus layerup_ssim(const struct LayerupImage *a,
                                const struct LayerupImage *b,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAYERUP_H */
