//! Edge/detail decomposition and detail-layer enhancement.
//!
//! The edge layer is the weighted-least-squares smoothing of the input:
//!
//! ```text
//! argmin_u  Σ (u - g)² + λ Σ [ a_x (∂x u)² + a_y (∂y u)² ],
//! a = (|∂g|^α + ε)^-1
//! ```
//!
//! with forward differences. The normal equations `(I + λ L_g) u = g` form a
//! symmetric M-matrix (a weighted graph Laplacian plus identity), solved here
//! by Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::synthesis::AlphaMask;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WlsConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Relative residual `||b - A u|| / ||b||` at which CG stops.
    pub solver_tol: f64,
    pub solver_max_iters: usize,
}

impl Default for WlsConfig {
    fn default() -> Self {
        Self { lambda: 0.35, alpha: 1.2, eps: 1e-4, solver_tol: 1e-8, solver_max_iters: 1000 }
    }
}

impl WlsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("WLS lambda {}", self.lambda)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid(format!("WLS alpha {}", self.alpha)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid(format!("WLS eps {}", self.eps)));
        }
        if !(self.solver_tol > 0.0) || self.solver_max_iters == 0 {
            return Err(Error::invalid("WLS solver tolerance and iteration cap must be positive"));
        }
        Ok(())
    }
}

/// `edge + detail == input`, with `detail` defined by subtraction.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerDecomposition {
    pub edge: Image,
    pub detail: Image,
}

/// Edge-preserving smoothing weights on horizontal and vertical links.
///
/// `wx[i]` couples pixel `i` with its right neighbour, `wy[i]` with the one
/// below; both already include `λ`. Links leaving the image are zero.
pub(crate) struct WlsWeights {
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
}

pub(crate) fn wls_weights(img: &Image, cfg: &WlsConfig) -> WlsWeights {
    let (w, h) = (img.width(), img.height());
    let g = img.data();
    let smooth = |d: f64| cfg.lambda / (d.abs().powf(cfg.alpha) + cfg.eps);
    let mut wx = vec![0.0; w * h];
    let mut wy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                wx[i] = smooth(g[i + 1] - g[i]);
            }
            if y + 1 < h {
                wy[i] = smooth(g[i + w] - g[i]);
            }
        }
    }
    WlsWeights { wx, wy }
}

struct WlsSystem<'a> {
    w: usize,
    h: usize,
    weights: &'a WlsWeights,
    diag: Vec<f64>,
}

impl<'a> WlsSystem<'a> {
    fn new(w: usize, h: usize, weights: &'a WlsWeights) -> Self {
        let mut diag = vec![1.0; w * h];
        for (i, d) in diag.iter_mut().enumerate() {
            *d += weights.wx[i] + weights.wy[i];
            if i % w > 0 {
                *d += weights.wx[i - 1];
            }
            if i >= w {
                *d += weights.wy[i - w];
            }
        }
        Self { w, h, weights, diag }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (w, n) = (self.w, self.w * self.h);
        let (wx, wy) = (&self.weights.wx, &self.weights.wy);
        for i in 0..n {
            let mut v = self.diag[i] * u[i];
            if i % w + 1 < w {
                v -= wx[i] * u[i + 1];
            }
            if i % w > 0 {
                v -= wx[i - 1] * u[i - 1];
            }
            if i + w < n {
                v -= wy[i] * u[i + w];
            }
            if i >= w {
                v -= wy[i - w] * u[i - w];
            }
            out[i] = v;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG from the initial guess `u = b`.
fn solve(sys: &WlsSystem<'_>, b: &[f64], tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    let mut u = b.to_vec();
    if b_norm == 0.0 {
        return Ok(u);
    }
    let mut r = vec![0.0; n];
    sys.apply(&u, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&sys.diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut iters = 0;
    while res > tol {
        if iters == max_iters {
            return Err(Error::SolverDidNotConverge { iterations: iters, residual: res });
        }
        sys.apply(&p, &mut ap);
        let step = rz / dot(&p, &ap);
        for i in 0..n {
            u[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / sys.diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        iters += 1;
    }
    Ok(u)
}

/// Splits a single-channel image into a WLS-smoothed edge layer and the
/// residual detail layer.
pub fn wls_decompose(img: &Image, cfg: &WlsConfig) -> Result<LayerDecomposition> {
    cfg.validate()?;
    img.expect_gray()?;
    let edge = if cfg.lambda == 0.0 {
        img.clone()
    } else {
        let weights = wls_weights(img, cfg);
        let sys = WlsSystem::new(img.width(), img.height(), &weights);
        let u = solve(&sys, img.data(), cfg.solver_tol, cfg.solver_max_iters)?;
        Image::from_vec(img.width(), img.height(), 1, u)?
    };
    let detail = img.zip_map(&edge, |g, e| g - e)?;
    Ok(LayerDecomposition { edge, detail })
}

/// Detail remapping `f(Δ) = sign(Δ) |Δ|^β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetailCurve {
    pub beta: f64,
}

impl Default for DetailCurve {
    fn default() -> Self {
        Self { beta: 0.8 }
    }
}

impl DetailCurve {
    pub fn new(beta: f64) -> Result<Self> {
        let c = Self { beta };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(format!("beta {} not in (0, 1]", self.beta)));
        }
        Ok(())
    }

    pub fn eval(&self, d: f64) -> f64 {
        if self.beta == 1.0 || d == 0.0 {
            d
        } else {
            d.signum() * d.abs().powf(self.beta)
        }
    }
}

pub fn apply_s_curve(detail: &Image, curve: &DetailCurve) -> Image {
    detail.map(|d| curve.eval(d))
}

/// `Î = E + (1 - α) D + α f(D)`, computed as `base + α (f(D) - D)` and clamped.
pub fn enhance_blend(
    base: &Image,
    layers: &LayerDecomposition,
    enhanced_detail: &Image,
    mask: &AlphaMask,
) -> Result<Image> {
    base.expect_same_shape(&layers.edge, "blend base vs edge layer")?;
    base.expect_same_shape(&layers.detail, "blend base vs detail layer")?;
    base.expect_same_shape(enhanced_detail, "blend base vs enhanced detail")?;
    if !mask.mask.same_size(base) {
        return Err(Error::mismatch("alpha mask size differs from the image"));
    }
    let (b, d, f, a) = (base.data(), layers.detail.data(), enhanced_detail.data(), mask.mask.data());
    let n = base.len();
    let data = (0..base.data().len()).map(|i| (b[i] + a[i % n] * (f[i] - d[i])).clamp(0.0, 1.0)).collect();
    Image::from_vec(base.width(), base.height(), base.channels(), data)
}
