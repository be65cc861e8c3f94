//! PNG and binary PGM/PPM interchange, chosen by file extension.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageError, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Png,
    Pgm,
    Ppm,
}

fn format_of(path: &Path) -> Result<Format> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Format::Png),
        "pgm" => Ok(Format::Pgm),
        "ppm" => Ok(Format::Ppm),
        "" => Err(Error::UnsupportedFormat(format!("{} has no file extension", path.display()))),
        other => Err(Error::UnsupportedFormat(format!(".{other}"))),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn decode_err(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::CorruptImage { path: path.to_path_buf(), reason: "truncated file".into() }
        }
        ImageError::IoError(e) => io_err(path, e),
        ImageError::Unsupported(e) => Error::UnsupportedFormat(e.to_string()),
        other => Error::CorruptImage { path: path.to_path_buf(), reason: other.to_string() },
    }
}

/// Reads an 8-bit gray or RGB file, mapping samples to `[0, 1]` by `/ 255`.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let fmt = match format_of(path)? {
        Format::Png => ImageFormat::Png,
        Format::Pgm | Format::Ppm => ImageFormat::Pnm,
    };
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let decoded = ImageReader::with_format(BufReader::new(file), fmt).decode().map_err(|e| decode_err(path, e))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let data = buf.as_raw().iter().map(|&s| f64::from(s) / 255.0).collect();
            Image::from_vec(w, h, 1, data)
        }
        DynamicImage::ImageRgb8(buf) => {
            let n = w * h;
            let mut data = vec![0.0; 3 * n];
            for (i, px) in buf.as_raw().chunks_exact(3).enumerate() {
                for c in 0..3 {
                    data[c * n + i] = f64::from(px[c]) / 255.0;
                }
            }
            Image::from_vec(w, h, 3, data)
        }
        other => Err(Error::UnsupportedFormat(format!(
            "{:?} samples in {} (only 8-bit gray or RGB)",
            other.color(),
            path.display()
        ))),
    }
}

/// Clamp to `[0, 1]`, then `floor(v * 255 + 0.5)`.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Writes an 8-bit file. Values are clamped and quantized with round-half-up.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let fmt = format_of(path)?;
    let channels = img.channels();
    match (fmt, channels) {
        (Format::Pgm, 3) => {
            return Err(Error::UnsupportedFormat("PGM holds gray images; use .ppm or .png for colour".into()))
        }
        (Format::Ppm, 1) => {
            return Err(Error::UnsupportedFormat("PPM holds colour images; use .pgm or .png for gray".into()))
        }
        _ => {}
    }
    let n = img.len();
    let mut samples = vec![0u8; n * channels];
    for c in 0..channels {
        for (i, &v) in img.plane(c).iter().enumerate() {
            samples[i * channels + c] = quantize(v);
        }
    }
    let (w, h) = (img.width() as u32, img.height() as u32);
    let color = if channels == 1 { ExtendedColorType::L8 } else { ExtendedColorType::Rgb8 };
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let out = BufWriter::new(file);
    let written = match fmt {
        Format::Png => PngEncoder::new(out).write_image(&samples, w, h, color),
        Format::Pgm => PnmEncoder::new(out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&samples, w, h, color),
        Format::Ppm => PnmEncoder::new(out)
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
            .write_image(&samples, w, h, color),
    };
    written.map_err(|e| match e {
        ImageError::IoError(e) => io_err(path, e),
        other => Error::UnsupportedFormat(other.to_string()),
    })
}
