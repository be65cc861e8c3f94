//! Linear resampling operators: the bicubic upsampler, the anti-aliased
//! downsampler and Gaussian blur.
//!
//! All operators are separable. Each axis is a sparse matrix ([`AxisOperator`])
//! whose rows list `(source index, weight)` taps; boundaries use half-sample
//! symmetric reflection (`-1 -> 0`, `n -> n - 1`). Every output sample is a
//! fixed-order dot product, so results do not depend on thread count.

mod backproject;

pub use backproject::{back_project, back_project_with_report, BackProjectReport, BackProjectSpec};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;

/// Catmull-Rom.
pub const DEFAULT_CUBIC_A: f64 = -0.5;

/// Anti-alias Gaussian sigma per unit of decimation ratio, in output-resolution
/// pixels of the larger image.
pub const DEFAULT_ANTIALIAS: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResampleSpec {
    /// Output size / input size.
    pub factor: f64,
    /// Keys cubic parameter.
    pub cubic_a: f64,
    /// Downsampling blur is `antialias / factor` pixels (of the input).
    pub antialias: f64,
}

impl ResampleSpec {
    pub fn new(factor: f64) -> Self {
        Self { factor, cubic_a: DEFAULT_CUBIC_A, antialias: DEFAULT_ANTIALIAS }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.factor.is_finite() && self.factor > 0.0) {
            return Err(Error::invalid(format!("resample factor {}", self.factor)));
        }
        if !(self.antialias.is_finite() && self.antialias >= 0.0) {
            return Err(Error::invalid(format!("antialias {}", self.antialias)));
        }
        Ok(())
    }

    fn output_dims(&self, img: &Image) -> Result<(usize, usize)> {
        self.validate()?;
        let w = (img.width() as f64 * self.factor).round();
        let h = (img.height() as f64 * self.factor).round();
        if w < 1.0 || h < 1.0 {
            return Err(Error::invalid(format!("{}x{} scaled by {} is empty", img.width(), img.height(), self.factor)));
        }
        Ok((w as usize, h as usize))
    }
}

/// Keys cubic convolution kernel.
pub fn cubic_kernel(x: f64, a: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Half-sample symmetric reflection of `i` into `0..n`.
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - 1 - m }) as usize
}

/// Sparse 1-D linear map from `inputs` samples to `rows.len()` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisOperator {
    inputs: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl AxisOperator {
    pub fn identity(n: usize) -> Self {
        Self { inputs: n, rows: (0..n).map(|i| vec![(i, 1.0)]).collect() }
    }

    /// Cubic interpolation from `inputs` to `outputs` samples with pixel
    /// centers aligned: output `j` samples input coordinate
    /// `(j + 0.5) * inputs / outputs - 0.5`.
    pub fn cubic(inputs: usize, outputs: usize, a: f64) -> Self {
        let scale = inputs as f64 / outputs as f64;
        let rows = (0..outputs)
            .map(|j| {
                let src = if inputs == outputs { j as f64 } else { (j as f64 + 0.5) * scale - 0.5 };
                let base = src.floor();
                let t = src - base;
                let mut taps: Vec<(usize, f64)> = Vec::with_capacity(4);
                for k in -1..=2isize {
                    let w = cubic_kernel(t - k as f64, a);
                    if w != 0.0 {
                        push_tap(&mut taps, reflect(base as isize + k, inputs), w);
                    }
                }
                taps
            })
            .collect();
        Self { inputs, rows }
    }

    /// Normalized Gaussian smoothing with radius `ceil(3 sigma)`; identity when
    /// `sigma == 0`.
    pub fn gaussian(n: usize, sigma: f64) -> Self {
        if sigma <= 0.0 {
            return Self::identity(n);
        }
        let kernel = gaussian_kernel(sigma);
        let radius = (kernel.len() / 2) as isize;
        let rows = (0..n)
            .map(|j| {
                let mut taps = Vec::with_capacity(kernel.len());
                for (t, &w) in kernel.iter().enumerate() {
                    let i = j as isize + t as isize - radius;
                    push_tap(&mut taps, reflect(i, n), w);
                }
                taps
            })
            .collect();
        Self { inputs: n, rows }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, j: usize) -> &[(usize, f64)] {
        &self.rows[j]
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AxisOperator) -> AxisOperator {
        assert_eq!(self.inputs, inner.outputs(), "operator sizes do not chain");
        let rows = self
            .rows
            .iter()
            .map(|outer| {
                let mut taps: Vec<(usize, f64)> = Vec::new();
                for &(k, wo) in outer {
                    for &(i, wi) in &inner.rows[k] {
                        push_tap(&mut taps, i, wo * wi);
                    }
                }
                taps.sort_by_key(|&(i, _)| i);
                taps
            })
            .collect();
        AxisOperator { inputs: inner.inputs, rows }
    }

    /// Dense row-major `outputs × inputs` matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.outputs() * self.inputs];
        for (j, row) in self.rows.iter().enumerate() {
            for &(i, w) in row {
                m[j * self.inputs + i] += w;
            }
        }
        m
    }

    fn apply(&self, src: &[f64], stride: usize, offset: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for &(i, w) in &self.rows[j] {
            acc += w * src[offset + i * stride];
        }
        acc
    }
}

fn push_tap(taps: &mut Vec<(usize, f64)>, i: usize, w: f64) {
    match taps.iter_mut().find(|(k, _)| *k == i) {
        Some(t) => t.1 += w,
        None => taps.push((i, w)),
    }
}

/// Normalized, odd-length sampled Gaussian.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius).map(|t| (-((t * t) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// A separable 2-D linear operator: rows are filtered by `x`, then columns by `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Separable {
    pub x: AxisOperator,
    pub y: AxisOperator,
}

impl Separable {
    /// Bicubic interpolation between arbitrary sizes (the upsampler 𝒰).
    pub fn bicubic(in_w: usize, in_h: usize, out_w: usize, out_h: usize, a: f64) -> Self {
        Self { x: AxisOperator::cubic(in_w, out_w, a), y: AxisOperator::cubic(in_h, out_h, a) }
    }

    /// Gaussian blur with `sigma`, then bicubic decimation (the downsampler ℒ).
    pub fn decimate(in_w: usize, in_h: usize, out_w: usize, out_h: usize, sigma: f64, a: f64) -> Self {
        Self {
            x: AxisOperator::cubic(in_w, out_w, a).compose(&AxisOperator::gaussian(in_w, sigma)),
            y: AxisOperator::cubic(in_h, out_h, a).compose(&AxisOperator::gaussian(in_h, sigma)),
        }
    }

    pub fn gaussian(w: usize, h: usize, sigma: f64) -> Self {
        Self { x: AxisOperator::gaussian(w, sigma), y: AxisOperator::gaussian(h, sigma) }
    }

    pub fn output_dims(&self) -> (usize, usize) {
        (self.x.outputs(), self.y.outputs())
    }

    /// Applies the operator to every channel. No clamping.
    pub fn apply(&self, img: &Image) -> Image {
        assert_eq!(img.width(), self.x.inputs(), "operator width");
        assert_eq!(img.height(), self.y.inputs(), "operator height");
        let (w, h) = (img.width(), img.height());
        let (ow, oh) = self.output_dims();
        let mut out = Vec::with_capacity(ow * oh * img.channels());
        for c in 0..img.channels() {
            let src = img.plane(c);
            let mut tmp = vec![0.0; ow * h];
            tmp.par_chunks_mut(ow).enumerate().for_each(|(y, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = self.x.apply(src, 1, y * w, j);
                }
            });
            let mut plane = vec![0.0; ow * oh];
            plane.par_chunks_mut(ow).enumerate().for_each(|(j, row)| {
                for (x, v) in row.iter_mut().enumerate() {
                    *v = self.y.apply(&tmp, ow, x, j);
                }
            });
            out.extend_from_slice(&plane);
        }
        Image::from_vec(ow, oh, img.channels(), out).expect("operator output shape")
    }
}

/// Bicubic interpolation to explicit dimensions, unclamped (linear).
pub fn upsample_to(img: &Image, width: usize, height: usize, a: f64) -> Image {
    Separable::bicubic(img.width(), img.height(), width, height, a).apply(img)
}

/// Blur-and-decimate to explicit dimensions, unclamped (linear).
pub fn downsample_to(img: &Image, width: usize, height: usize, sigma: f64, a: f64) -> Image {
    Separable::decimate(img.width(), img.height(), width, height, sigma, a).apply(img)
}

/// Resizes by `spec.factor` with separable bicubic interpolation; clamped to `[0, 1]`.
pub fn bicubic_resize(img: &Image, spec: &ResampleSpec) -> Result<Image> {
    let (w, h) = spec.output_dims(img)?;
    Ok(upsample_to(img, w, h, spec.cubic_a).clamp01())
}

/// The downsampling operator ℒ: Gaussian blur with sigma `antialias / factor`,
/// then bicubic decimation. Linear and unclamped.
pub fn downsample(img: &Image, spec: &ResampleSpec) -> Result<Image> {
    let (w, h) = spec.output_dims(img)?;
    if spec.factor >= 1.0 {
        return Err(Error::invalid(format!("downsampling factor must be < 1, got {}", spec.factor)));
    }
    let sigma = spec.antialias / spec.factor;
    Ok(downsample_to(img, w, h, sigma, spec.cubic_a))
}

/// Gaussian blur with reflected boundaries.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    if sigma <= 0.0 {
        return img.clone();
    }
    Separable::gaussian(img.width(), img.height(), sigma).apply(img)
}
