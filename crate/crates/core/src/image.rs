//! Planar floating-point rasters and YCbCr conversion.
//!
//! Every stage of the upsampler works on [`Image`]: a `width × height` raster
//! with one or three channels stored plane after plane, nominal range `[0, 1]`.
//! Intermediate results (detail layers, residuals) may leave that range; only
//! [`Image::clamp01`] and the exporters enforce it.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// A zero-filled image.
    pub fn new(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::check_shape(width, height, channels)?;
        Ok(Self { width, height, channels, data: vec![0.0; width * height * channels] })
    }

    /// Wraps planar data (all of channel 0, then channel 1, ...).
    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        Self::check_shape(width, height, channels)?;
        if data.len() != width * height * channels {
            return Err(Error::mismatch(format!("{} samples for a {width}x{height}x{channels} image", data.len())));
        }
        Ok(Self { width, height, channels, data })
    }

    /// A single-channel image holding `value` everywhere.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::check_shape(width, height, 1)?;
        Ok(Self { width, height, channels: 1, data: vec![value; width * height] })
    }

    /// A single-channel image sampled from `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::check_shape(width, height, 1)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self { width, height, channels: 1, data })
    }

    /// Stacks single-channel images into one multi-channel image.
    pub fn from_planes(planes: &[Image]) -> Result<Self> {
        let first = planes.first().ok_or_else(|| Error::invalid("no planes to stack"))?;
        let mut data = Vec::with_capacity(first.len() * planes.len());
        for p in planes {
            if p.channels != 1 {
                return Err(Error::ChannelCount { expected: 1, actual: p.channels });
            }
            if !p.same_size(first) {
                return Err(Error::mismatch(format!(
                    "plane {}x{} vs {}x{}",
                    p.width, p.height, first.width, first.height
                )));
            }
            data.extend_from_slice(&p.data);
        }
        Self::from_vec(first.width, first.height, planes.len(), data)
    }

    fn check_shape(width: usize, height: usize, channels: usize) -> Result<()> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!("{channels} channels (only 1 or 3 supported)")));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Pixels per plane.
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Copies channel `c` out as a single-channel image.
    pub fn channel(&self, c: usize) -> Image {
        Image { width: self.width, height: self.height, channels: 1, data: self.plane(c).to_vec() }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn get_c(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[c * self.len() + y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        let w = self.width;
        self.data[y * w + x] = v;
    }

    pub fn same_size(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.same_size(other) && self.channels == other.channels
    }

    pub(crate) fn expect_gray(&self) -> Result<()> {
        if self.channels != 1 {
            return Err(Error::ChannelCount { expected: 1, actual: self.channels });
        }
        Ok(())
    }

    pub(crate) fn expect_same_shape(&self, other: &Image, what: &str) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::mismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two same-shape images.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.expect_same_shape(other, "zip_map")?;
        Ok(Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn clamp01(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Clamps every value to `[0, 1]`.
pub fn clamp01(img: &Image) -> Image {
    img.clamp01()
}

/// Luma and chroma planes of a colour image.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTriple {
    pub luma: Image,
    pub cb: Image,
    pub cr: Image,
}

impl ChannelTriple {
    pub fn new(luma: Image, cb: Image, cr: Image) -> Result<Self> {
        for p in [&luma, &cb, &cr] {
            p.expect_gray()?;
        }
        if !luma.same_size(&cb) || !luma.same_size(&cr) {
            return Err(Error::mismatch("YCbCr planes differ in size"));
        }
        Ok(Self { luma, cb, cr })
    }
}

// Full-range BT.601.
const KR: f64 = 0.299;
const KB: f64 = 0.114;
const KG: f64 = 1.0 - KR - KB;

pub fn to_ycbcr(img: &Image) -> Result<ChannelTriple> {
    if img.channels() != 3 {
        return Err(Error::ChannelCount { expected: 3, actual: img.channels() });
    }
    let n = img.len();
    let (mut y, mut cb, mut cr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    for i in 0..n {
        let luma = KR * r[i] + KG * g[i] + KB * b[i];
        y[i] = luma;
        cb[i] = (b[i] - luma) / (2.0 * (1.0 - KB)) + 0.5;
        cr[i] = (r[i] - luma) / (2.0 * (1.0 - KR)) + 0.5;
    }
    let (w, h) = (img.width(), img.height());
    Ok(ChannelTriple {
        luma: Image::from_vec(w, h, 1, y)?,
        cb: Image::from_vec(w, h, 1, cb)?,
        cr: Image::from_vec(w, h, 1, cr)?,
    })
}

/// Inverse of [`to_ycbcr`], clamped to `[0, 1]`.
pub fn from_ycbcr(t: &ChannelTriple) -> Result<Image> {
    let t = ChannelTriple::new(t.luma.clone(), t.cb.clone(), t.cr.clone())?;
    let n = t.luma.len();
    let mut data = vec![0.0; 3 * n];
    let (y, cb, cr) = (t.luma.data(), t.cb.data(), t.cr.data());
    for i in 0..n {
        let r = y[i] + 2.0 * (1.0 - KR) * (cr[i] - 0.5);
        let b = y[i] + 2.0 * (1.0 - KB) * (cb[i] - 0.5);
        let g = (y[i] - KR * r - KB * b) / KG;
        data[i] = r.clamp(0.0, 1.0);
        data[n + i] = g.clamp(0.0, 1.0);
        data[2 * n + i] = b.clamp(0.0, 1.0);
    }
    Image::from_vec(t.luma.width(), t.luma.height(), 3, data)
}
