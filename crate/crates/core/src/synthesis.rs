//! Nonparametric edge synthesis.
//!
//! Every patch `p` of the blurry estimate is explained by its `k` nearest
//! source patches `q_j`. Each explanation contributes `dc_p + ac_{q_j}` to the
//! pixels it covers, weighted by `w_j · G_σ(offset)` with
//! `w_j = 1 / (||ac_p - ac_{q_j}|| + ε)`. The output pixel is the weighted
//! mean of its contributions and the variance map records their weighted
//! spread.
//!
//! Neighbour lookups run in parallel; accumulation is sequential in patch
//! order, so the result is bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::resample::gaussian_blur;
use crate::search::{patch_transform, PatchIndex, SearchConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisConfig {
    /// Spread of the in-patch Gaussian weight, in pixels.
    pub sigma: f64,
    /// Keeps `1 / (d + ε)` finite for exact matches.
    pub epsilon_w: f64,
    pub search: SearchConfig,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self { sigma: 1.25, epsilon_w: 1e-6, search: SearchConfig::default() }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("synthesis sigma {}", self.sigma)));
        }
        if !(self.epsilon_w > 0.0 && self.epsilon_w.is_finite()) {
            return Err(Error::invalid(format!("epsilon_w {}", self.epsilon_w)));
        }
        Ok(())
    }
}

/// Per-pixel weighted variance of the synthesis contributions.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceMap(pub Image);

impl VarianceMap {
    pub fn image(&self) -> &Image {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaMask {
    pub mask: Image,
    /// Variance cutoff for the binary mask before smoothing.
    pub threshold: f64,
}

impl AlphaMask {
    pub fn image(&self) -> &Image {
        &self.mask
    }

    /// A constant mask.
    pub fn uniform(width: usize, height: usize, value: f64) -> Result<Self> {
        Ok(Self { mask: Image::filled(width, height, value.clamp(0.0, 1.0))?, threshold: f64::NAN })
    }
}

/// Row-major `r × r` Gaussian centered on the patch, unnormalized (the
/// synthesis divides by the accumulated weight anyway).
pub fn patch_gaussian(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let mut g = Vec::with_capacity(size * size);
    for v in 0..size {
        for u in 0..size {
            let d2 = (u as f64 - c).powi(2) + (v as f64 - c).powi(2);
            g.push((-d2 / (2.0 * sigma * sigma)).exp());
        }
    }
    g
}

/// The operator 𝒩: re-synthesizes `blurry` from patches of `source`.
pub fn synthesize_np(blurry: &Image, source: &Image, cfg: &SynthesisConfig) -> Result<(Image, VarianceMap)> {
    cfg.validate()?;
    blurry.expect_gray()?;
    source.expect_gray()?;
    let index = PatchIndex::build(source, cfg.search)?;
    synthesize_with_index(blurry, &index, cfg)
}

pub(crate) fn synthesize_with_index(
    blurry: &Image,
    index: &PatchIndex,
    cfg: &SynthesisConfig,
) -> Result<(Image, VarianceMap)> {
    let r = cfg.search.patch_size;
    let queries = patch_transform(blurry, r)?;
    let k = cfg.search.k;

    // (entry, weight) per query, in query order.
    let matches: Vec<Vec<(usize, f64)>> = queries
        .par_iter()
        .map(|p| {
            index.query_knn(p, k).map(|nn| {
                nn.iter()
                    .map(|n| {
                        let d1 = p.ac.iter().zip(&n.patch.ac).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        (n.entry, 1.0 / (d1 + cfg.epsilon_w))
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;

    let (w, h) = (blurry.width(), blurry.height());
    let gauss = patch_gaussian(r, cfg.sigma);
    let entries = index.entries();
    let visit = |f: &mut dyn FnMut(usize, f64, f64)| {
        for (p, found) in queries.iter().zip(&matches) {
            let (x0, y0) = p.origin;
            for &(entry, wq) in found {
                let q = &entries[entry];
                for dy in 0..r {
                    let row = (y0 + dy) * w + x0;
                    for dx in 0..r {
                        let o = dy * r + dx;
                        f(row + dx, wq * gauss[o], p.dc + q.ac[o]);
                    }
                }
            }
        }
    };

    // Mean relative to the first contribution: agreeing contributions give a
    // bit-exact mean and exactly zero variance.
    let n = w * h;
    let mut reference = vec![f64::NAN; n];
    let mut weight = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    visit(&mut |i, wt, v| {
        if reference[i].is_nan() {
            reference[i] = v;
        }
        weight[i] += wt;
        shifted[i] += wt * (v - reference[i]);
    });
    let mean: Vec<f64> = (0..n).map(|i| reference[i] + shifted[i] / weight[i]).collect();
    let mut spread = vec![0.0; n];
    visit(&mut |i, wt, v| {
        let d = v - mean[i];
        spread[i] += wt * d * d;
    });
    let variance = (0..n).map(|i| (spread[i] / weight[i]).max(0.0)).collect();

    let out = Image::from_vec(w, h, 1, mean)?.clamp01();
    Ok((out, VarianceMap(Image::from_vec(w, h, 1, variance)?)))
}

/// Variances at or below this are rounding noise and count as zero.
pub const VARIANCE_FLOOR: f64 = 1e-16;

/// Binary mask of pixels whose variance exceeds the `quantile` of the positive
/// variances, smoothed by a Gaussian of `smooth_sigma` and clamped to `[0, 1]`.
///
/// The quantile is the sorted-order element at `floor(quantile · (m - 1))` of
/// the `m` values above [`VARIANCE_FLOOR`]; it is 0 when there are none.
pub fn pixel_variance_to_alpha(var: &VarianceMap, smooth_sigma: f64, quantile: f64) -> Result<AlphaMask> {
    if !(quantile > 0.0 && quantile <= 1.0) {
        return Err(Error::invalid(format!("mask quantile {quantile} not in (0, 1]")));
    }
    if !(smooth_sigma >= 0.0 && smooth_sigma.is_finite()) {
        return Err(Error::invalid(format!("mask smoothing sigma {smooth_sigma}")));
    }
    let img = var.image();
    let mut positive: Vec<f64> = img.data().iter().copied().filter(|&v| v > VARIANCE_FLOOR).collect();
    let threshold = if positive.is_empty() {
        0.0
    } else {
        positive.sort_by(f64::total_cmp);
        positive[(quantile * (positive.len() - 1) as f64).floor() as usize]
    };
    let cut = threshold.max(VARIANCE_FLOOR);
    let binary = img.map(|v| if v > cut { 1.0 } else { 0.0 });
    let mask = gaussian_blur(&binary, smooth_sigma).clamp01();
    Ok(AlphaMask { mask, threshold })
}
