//! Iterative back-projection onto the set of high-resolution images whose
//! downsampling reproduces the observed low-resolution image.
//!
//! Each iteration adds the upsampled residual, `x <- clamp(x + 𝒰(P(low - ℒ x)))`.
//! `P` is the exact inverse of the low-resolution operator `ℒ𝒰`, which is
//! separable, so it is the tensor product of two small dense inverses. Without
//! `P` the iteration is plain Landweber and stalls on frequencies that the
//! anti-alias blur attenuates (the smallest eigenvalue of `ℒ𝒰` is around 1e-3).
//! The clamp makes this a projected iteration; an iterate that would raise the
//! L2 residual is rejected and ends the loop.

use nalgebra::DMatrix;

use super::{AxisOperator, Separable, DEFAULT_ANTIALIAS, DEFAULT_CUBIC_A};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackProjectSpec {
    pub max_iters: usize,
    /// Stop once `max |low - ℒ x| <= residual_tol`.
    pub residual_tol: f64,
    /// Anti-alias sigma of ℒ, in high-resolution pixels.
    pub blur_sigma: f64,
    pub cubic_a: f64,
    /// Apply the `(ℒ𝒰)^-1` preconditioner to the residual.
    pub precondition: bool,
}

impl Default for BackProjectSpec {
    fn default() -> Self {
        Self::for_factor(2f64.powf(1.0 / 3.0))
    }
}

impl BackProjectSpec {
    /// Defaults for an ℒ that decimates by `factor` (high / low size).
    pub fn for_factor(factor: f64) -> Self {
        Self {
            max_iters: 20,
            residual_tol: 1e-3,
            blur_sigma: DEFAULT_ANTIALIAS * factor,
            cubic_a: DEFAULT_CUBIC_A,
            precondition: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::invalid("back-projection needs max_iters >= 1"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::invalid(format!("residual_tol {}", self.residual_tol)));
        }
        if !(self.blur_sigma >= 0.0 && self.blur_sigma.is_finite()) {
            return Err(Error::invalid(format!("blur_sigma {}", self.blur_sigma)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackProjectReport {
    /// `||low - ℒ x||_2` for the input and each accepted iterate.
    pub residual_l2: Vec<f64>,
    /// Final `||low - ℒ x||_inf` (before the final clamp, which is a no-op).
    pub residual_linf: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn back_project(high: &Image, low: &Image, spec: &BackProjectSpec) -> Result<Image> {
    back_project_with_report(high, low, spec).map(|(img, _)| img)
}

pub fn back_project_with_report(
    high: &Image,
    low: &Image,
    spec: &BackProjectSpec,
) -> Result<(Image, BackProjectReport)> {
    spec.validate()?;
    if high.channels() != low.channels() {
        return Err(Error::mismatch(format!("back-projection channels {} vs {}", high.channels(), low.channels())));
    }
    if low.width() > high.width() || low.height() > high.height() {
        return Err(Error::mismatch(format!(
            "low-resolution image {}x{} is larger than the estimate {}x{}",
            low.width(),
            low.height(),
            high.width(),
            high.height()
        )));
    }
    let (hw, hh, lw, lh) = (high.width(), high.height(), low.width(), low.height());
    let down = Separable::decimate(hw, hh, lw, lh, spec.blur_sigma, spec.cubic_a);
    let up = Separable::bicubic(lw, lh, hw, hh, spec.cubic_a);
    let precond = spec.precondition.then(|| Preconditioner::new(&down, &up));

    let residual = |x: &Image| -> Image {
        low.zip_map(&down.apply(x), |a, b| a - b).expect("ℒ output matches low-resolution shape")
    };

    let mut x = high.clone();
    let mut r = residual(&x);
    let mut l2 = norm2(&r);
    let mut report =
        BackProjectReport { residual_l2: vec![l2], residual_linf: norm_inf(&r), iterations: 0, converged: false };
    while report.residual_linf > spec.residual_tol && report.iterations < spec.max_iters {
        let correction = match &precond {
            Some(p) => up.apply(&p.apply(&r)),
            None => up.apply(&r),
        };
        let candidate =
            x.zip_map(&correction, |a, b| (a + b).clamp(0.0, 1.0)).expect("correction matches estimate shape");
        let r_next = residual(&candidate);
        let l2_next = norm2(&r_next);
        if !(l2_next <= l2) {
            break;
        }
        x = candidate;
        r = r_next;
        l2 = l2_next;
        report.residual_l2.push(l2);
        report.residual_linf = norm_inf(&r);
        report.iterations += 1;
    }
    report.converged = report.residual_linf <= spec.residual_tol;
    Ok((x.clamp01(), report))
}

fn norm2(img: &Image) -> f64 {
    img.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn norm_inf(img: &Image) -> f64 {
    img.data().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `(ℒ𝒰)^-1 = (D_y U_y)^-1 ⊗ (D_x U_x)^-1`, stored as two dense matrices.
struct Preconditioner {
    x: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    w: usize,
    h: usize,
}

impl Preconditioner {
    fn new(down: &Separable, up: &Separable) -> Self {
        Self {
            x: axis_inverse(&down.x, &up.x),
            y: axis_inverse(&down.y, &up.y),
            w: down.x.outputs(),
            h: down.y.outputs(),
        }
    }

    fn apply(&self, r: &Image) -> Image {
        let (w, h) = (self.w, self.h);
        let mut out = Vec::with_capacity(r.data().len());
        for c in 0..r.channels() {
            let mut plane = r.plane(c).to_vec();
            if let Some(px) = &self.x {
                let mut next = vec![0.0; w * h];
                for y in 0..h {
                    let row = &plane[y * w..(y + 1) * w];
                    for j in 0..w {
                        let m = &px[j * w..(j + 1) * w];
                        next[y * w + j] = m.iter().zip(row).map(|(a, b)| a * b).sum();
                    }
                }
                plane = next;
            }
            if let Some(py) = &self.y {
                let mut next = vec![0.0; w * h];
                for j in 0..h {
                    let m = &py[j * h..(j + 1) * h];
                    for x in 0..w {
                        let mut acc = 0.0;
                        for (i, a) in m.iter().enumerate() {
                            acc += a * plane[i * w + x];
                        }
                        next[j * w + x] = acc;
                    }
                }
                plane = next;
            }
            out.extend_from_slice(&plane);
        }
        Image::from_vec(w, h, r.channels(), out).expect("preconditioned residual shape")
    }
}

/// Dense inverse of `down ∘ up` for one axis; `None` if singular.
fn axis_inverse(down: &AxisOperator, up: &AxisOperator) -> Option<Vec<f64>> {
    let n = down.outputs();
    let m = DMatrix::from_row_slice(n, n, &down.compose(up).to_dense());
    let inv = m.try_inverse()?;
    let mut dense = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            dense.push(inv[(j, i)]);
        }
    }
    Some(dense)
}
