//! C interface to the layerup upsampler.
//!
//! Images and configurations are opaque handles created and freed through
//! this API. Every fallible call returns a [`LayerupStatus`]; on failure a
//! description is available from [`layerup_last_error`] on the same thread.
//! Pixel buffers crossing the boundary are interleaved, row-major `double`
//! samples in `[0, 1]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use layerup::config::{apply_setting, load_config};
use layerup::{Error, Image, PipelineConfig};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerupStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    UnsupportedFormat = 4,
    CorruptImage = 5,
    DimensionMismatch = 6,
    ImageTooSmall = 7,
    SolverDidNotConverge = 8,
    Config = 9,
    Panic = 10,
}

/// Opaque image handle.
pub struct LayerupImage(Image);

/// Opaque pipeline configuration handle.
pub struct LayerupConfig(PipelineConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> LayerupStatus {
    match e {
        Error::Io { .. } => LayerupStatus::Io,
        Error::UnsupportedFormat(_) => LayerupStatus::UnsupportedFormat,
        Error::CorruptImage { .. } => LayerupStatus::CorruptImage,
        Error::ChannelCount { .. } | Error::DimensionMismatch(_) => LayerupStatus::DimensionMismatch,
        Error::InvalidParameter(_) | Error::IncompleteCover { .. } => LayerupStatus::InvalidArgument,
        Error::ImageTooSmall { .. } => LayerupStatus::ImageTooSmall,
        Error::SolverDidNotConverge { .. } => LayerupStatus::SolverDidNotConverge,
        Error::Config { .. } => LayerupStatus::Config,
        Error::Step { source, .. } => status_of(source),
    }
}

struct Failure(LayerupStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LayerupStatus::NullPointer, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(LayerupStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any error or panic, and returns its status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LayerupStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LayerupStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LayerupStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn image_arg<'a>(img: *const LayerupImage, what: &str) -> Result<&'a Image, Failure> {
    img.as_ref().map(|i| &i.0).ok_or_else(|| null(what))
}

unsafe fn config_arg<'a>(cfg: *mut LayerupConfig) -> Result<&'a mut PipelineConfig, Failure> {
    cfg.as_mut().map(|c| &mut c.0).ok_or_else(|| null("config"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn layerup_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn layerup_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates an image from `width * height * channels` interleaved samples.
/// `channels` must be 1 or 3.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_image_from_data(
    width: usize,
    height: usize,
    channels: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut LayerupImage,
) -> LayerupStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if channels != 1 && channels != 3 {
            return Err(invalid(format!("channels must be 1 or 3, got {channels}")));
        }
        let n = width
            .checked_mul(height)
            .and_then(|p| p.checked_mul(channels))
            .ok_or_else(|| invalid("image size overflows"))?;
        if len != n {
            return Err(Failure(
                LayerupStatus::DimensionMismatch,
                format!("{width}x{height}x{channels} needs {n} samples, got {len}"),
            ));
        }
        let src = std::slice::from_raw_parts(data, len);
        let plane = width * height;
        let mut planar = vec![0.0; n];
        for (i, px) in src.chunks_exact(channels).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                planar[c * plane + i] = v;
            }
        }
        put(out, LayerupImage(Image::from_vec(width, height, channels, planar)?))
    })
}

/// Loads a PNG, PGM or PPM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_image_load(path: *const c_char, out: *mut *mut LayerupImage) -> LayerupStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put(out, LayerupImage(layerup::load_image(path)?))
    })
}

/// Writes an 8-bit file; the format follows the extension.
///
/// # Safety
/// `img` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn layerup_image_save(img: *const LayerupImage, path: *const c_char) -> LayerupStatus {
    guard(|| {
        let img = image_arg(img, "image")?;
        let path = str_arg(path, "path")?;
        Ok(layerup::save_image(img, path)?)
    })
}

/// Releases an image. NULL is ignored.
///
/// # Safety
/// `img` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn layerup_image_free(img: *mut LayerupImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Writes width, height and channel count; any output pointer may be NULL.
///
/// # Safety
/// `img` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_image_dims(
    img: *const LayerupImage,
    width: *mut usize,
    height: *mut usize,
    channels: *mut usize,
) -> LayerupStatus {
    guard(|| {
        let img = image_arg(img, "image")?;
        for (p, v) in [(width, img.width()), (height, img.height()), (channels, img.channels())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies the samples, interleaved, into `out`, which holds `len` doubles.
///
/// # Safety
/// `img` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn layerup_image_copy_data(img: *const LayerupImage, out: *mut f64, len: usize) -> LayerupStatus {
    guard(|| {
        let img = image_arg(img, "image")?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let n = img.data().len();
        if len < n {
            return Err(Failure(
                LayerupStatus::DimensionMismatch,
                format!("buffer holds {len} samples, image has {n}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, n);
        let c = img.channels();
        for ch in 0..c {
            for (i, &v) in img.plane(ch).iter().enumerate() {
                dst[i * c + ch] = v;
            }
        }
        Ok(())
    })
}

/// Default configuration for magnifying by `factor`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_config_new(factor: f64, out: *mut *mut LayerupConfig) -> LayerupStatus {
    guard(|| {
        let cfg = PipelineConfig::with_factor(factor);
        cfg.validate()?;
        put(out, LayerupConfig(cfg))
    })
}

/// Releases a configuration. NULL is ignored.
///
/// # Safety
/// `cfg` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn layerup_config_free(cfg: *mut LayerupConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets one option by its command-line name, e.g. `("beta", "0.7")` or
/// `("exact-search", "true")`. The configuration is left unchanged if the
/// result would be invalid.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn layerup_config_set(
    cfg: *mut LayerupConfig,
    key: *const c_char,
    value: *const c_char,
) -> LayerupStatus {
    guard(|| {
        let cfg = config_arg(cfg)?;
        let (key, value) = (str_arg(key, "key")?, str_arg(value, "value")?);
        let mut next = *cfg;
        apply_setting(&mut next, key, value).map_err(|m| Failure(LayerupStatus::Config, m))?;
        next.validate()?;
        *cfg = next;
        Ok(())
    })
}

/// Applies a `key = value` file on top of the current settings.
///
/// # Safety
/// `cfg` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn layerup_config_load(cfg: *mut LayerupConfig, path: *const c_char) -> LayerupStatus {
    guard(|| {
        let cfg = config_arg(cfg)?;
        let path = str_arg(path, "path")?;
        let mut next = *cfg;
        load_config(path.as_ref(), &mut next)?;
        next.validate()?;
        *cfg = next;
        Ok(())
    })
}

/// Upscales `img` into a new image.
///
/// # Safety
/// `img` and `cfg` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_upscale(
    img: *const LayerupImage,
    cfg: *const LayerupConfig,
    out: *mut *mut LayerupImage,
) -> LayerupStatus {
    guard(|| {
        let img = image_arg(img, "image")?;
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        put(out, LayerupImage(layerup::upscale(img, &cfg.0)?))
    })
}

/// PSNR in dB over all channels; `+inf` for identical images.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_psnr(a: *const LayerupImage, b: *const LayerupImage, out: *mut f64) -> LayerupStatus {
    guard(|| {
        let (a, b) = (image_arg(a, "a")?, image_arg(b, "b")?);
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = layerup::psnr(a, b)?;
        Ok(())
    })
}

/// Mean SSIM, computed on luma for colour images.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn layerup_ssim(a: *const LayerupImage, b: *const LayerupImage, out: *mut f64) -> LayerupStatus {
    guard(|| {
        let (a, b) = (image_arg(a, "a")?, image_arg(b, "b")?);
        if out.is_null() {
            return Err(null("output pointer"));
        }
        *out = layerup::QualityReport::compare(a, b)?.ssim;
        Ok(())
    })
}
