//! Full-reference quality metrics.

use std::fmt;

use crate::error::{Error, Result};
use crate::image::{to_ycbcr, Image};
use crate::resample::gaussian_kernel;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Peak signal-to-noise ratio for unit peak, over all pixels and channels.
/// Identical images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    a.expect_same_shape(b, "psnr")?;
    let n = a.data().len() as f64;
    let mse = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (1.0 / mse).log10() })
}

/// Mean SSIM over all valid 11×11 Gaussian windows (σ = 1.5) of two
/// single-channel images with dynamic range 1.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.expect_same_shape(b, "ssim")?;
    a.expect_gray()?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageTooSmall { width: w, height: h, size: SSIM_WINDOW });
    }
    let g1 = gaussian_kernel_len(SSIM_SIGMA, SSIM_WINDOW);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let (pa, pb) = (a.data(), b.data());
    let mut total = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - SSIM_WINDOW {
        for x0 in 0..=w - SSIM_WINDOW {
            let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for dy in 0..SSIM_WINDOW {
                for dx in 0..SSIM_WINDOW {
                    let g = g1[dy] * g1[dx];
                    let i = (y0 + dy) * w + x0 + dx;
                    let (u, v) = (pa[i], pb[i]);
                    ma += g * u;
                    mb += g * v;
                    saa += g * u * u;
                    sbb += g * v * v;
                    sab += g * u * v;
                }
            }
            let var_a = saa - ma * ma;
            let var_b = sbb - mb * mb;
            let cov = sab - ma * mb;
            let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
            let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Normalized Gaussian of exactly `len` taps.
fn gaussian_kernel_len(sigma: f64, len: usize) -> Vec<f64> {
    let full = gaussian_kernel(sigma);
    let mid = full.len() / 2;
    let half = len / 2;
    let mut k: Vec<f64> = if full.len() >= len {
        full[mid - half..=mid + half].to_vec()
    } else {
        (0..len)
            .map(|i| {
                let t = i as f64 - half as f64;
                (-(t * t) / (2.0 * sigma * sigma)).exp()
            })
            .collect()
    };
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub psnr_db: f64,
    pub ssim: f64,
}

impl QualityReport {
    /// PSNR over all channels; SSIM on luma.
    pub fn compare(reference: &Image, test: &Image) -> Result<Self> {
        let psnr_db = psnr(reference, test)?;
        let luma = |img: &Image| -> Result<Image> {
            if img.channels() == 3 {
                Ok(to_ycbcr(img)?.luma)
            } else {
                Ok(img.clone())
            }
        };
        let ssim = ssim(&luma(reference)?, &luma(test)?)?;
        Ok(Self { psnr_db, ssim })
    }
}

impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.psnr_db.is_infinite() {
            writeln!(f, "psnr_db=inf")?;
        } else {
            writeln!(f, "psnr_db={:.6}", self.psnr_db)?;
        }
        write!(f, "ssim={:.6}", self.ssim)
    }
}
