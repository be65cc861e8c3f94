//! A deliberately plain re-implementation of the whole upsampler on gray
//! `Vec<f64>` grids: dense per-axis matrices, brute-force neighbour search,
//! unpreconditioned CG. Slow, but every stage reads straight off its
//! definition. Used to produce the committed golden images.

#![allow(dead_code)]

const A: f64 = -0.5;
const ANTIALIAS: f64 = 0.8;
const PATCH: usize = 5;
const SPATIAL: f64 = 10.0;
const K: usize = 5;
const PATCH_SIGMA: f64 = 1.25;
const EPS_W: f64 = 1e-6;
const WLS_LAMBDA: f64 = 0.35;
const WLS_ALPHA: f64 = 1.2;
const WLS_EPS: f64 = 1e-4;
const BETA: f64 = 0.8;
const QUANTILE: f64 = 0.7;
const MASK_SIGMA: f64 = 1.0;
const BP_ITERS: usize = 20;
const BP_TOL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct Grid {
    pub w: usize,
    pub h: usize,
    pub v: Vec<f64>,
}

impl Grid {
    fn at(&self, x: usize, y: usize) -> f64 {
        self.v[y * self.w + x]
    }

    fn clamped(mut self) -> Grid {
        for v in &mut self.v {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug)]
struct Mat {
    rows: usize,
    cols: usize,
    m: Vec<f64>,
}

impl Mat {
    fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, m: vec![0.0; rows * cols] }
    }

    fn mul(&self, o: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.m[i * self.cols + k];
                for j in 0..o.cols {
                    out.m[i * o.cols + j] += a * o.m[k * o.cols + j];
                }
            }
        }
        out
    }

    /// Gauss-Jordan with partial pivoting.
    fn inverse(&self) -> Mat {
        let n = self.rows;
        let mut a = self.m.clone();
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            inv.m[i * n + i] = 1.0;
        }
        for col in 0..n {
            let p = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs())).unwrap();
            for k in 0..n {
                a.swap(col * n + k, p * n + k);
                inv.m.swap(col * n + k, p * n + k);
            }
            let d = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= d;
                inv.m[col * n + k] /= d;
            }
            for row in 0..n {
                if row != col {
                    let f = a[row * n + col];
                    for k in 0..n {
                        a[row * n + k] -= f * a[col * n + k];
                        inv.m[row * n + k] -= f * inv.m[col * n + k];
                    }
                }
            }
        }
        inv
    }
}

fn keys(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        (A + 2.0) * x.powi(3) - (A + 3.0) * x.powi(2) + 1.0
    } else if x < 2.0 {
        A * x.powi(3) - 5.0 * A * x.powi(2) + 8.0 * A * x - 4.0 * A
    } else {
        0.0
    }
}

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

fn cubic_matrix(n_in: usize, n_out: usize) -> Mat {
    let mut m = Mat::zeros(n_out, n_in);
    for j in 0..n_out {
        let src = if n_in == n_out { j as f64 } else { (j as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5 };
        let base = src.floor() as isize;
        for i in base - 1..=base + 2 {
            m.m[j * n_in + mirror(i, n_in)] += keys(src - i as f64);
        }
    }
    m
}

fn gauss_matrix(n: usize, sigma: f64) -> Mat {
    let mut m = Mat::zeros(n, n);
    if sigma <= 0.0 {
        for i in 0..n {
            m.m[i * n + i] = 1.0;
        }
        return m;
    }
    let r = (3.0 * sigma).ceil() as isize;
    let total: f64 = (-r..=r).map(|t| (-((t * t) as f64) / (2.0 * sigma * sigma)).exp()).sum();
    for j in 0..n {
        for t in -r..=r {
            let g = (-((t * t) as f64) / (2.0 * sigma * sigma)).exp() / total;
            m.m[j * n + mirror(j as isize + t, n)] += g;
        }
    }
    m
}

/// `out = My · img · Mxᵀ`.
fn apply(img: &Grid, mx: &Mat, my: &Mat) -> Grid {
    assert_eq!((mx.cols, my.cols), (img.w, img.h));
    let (ow, oh) = (mx.rows, my.rows);
    let mut tmp = vec![0.0; ow * img.h];
    for y in 0..img.h {
        for j in 0..ow {
            tmp[y * ow + j] = (0..img.w).map(|x| mx.m[j * img.w + x] * img.at(x, y)).sum();
        }
    }
    let mut v = vec![0.0; ow * oh];
    for j in 0..oh {
        for x in 0..ow {
            v[j * ow + x] = (0..img.h).map(|y| my.m[j * img.h + y] * tmp[y * ow + x]).sum();
        }
    }
    Grid { w: ow, h: oh, v }
}

fn upsample(img: &Grid, w: usize, h: usize) -> Grid {
    apply(img, &cubic_matrix(img.w, w), &cubic_matrix(img.h, h))
}

fn blur_decimate(n_in: usize, n_out: usize, sigma: f64) -> Mat {
    cubic_matrix(n_in, n_out).mul(&gauss_matrix(n_in, sigma))
}

fn back_project(high: &Grid, low: &Grid, ratio: f64) -> Grid {
    let sigma = ANTIALIAS * ratio;
    let (dx, dy) = (blur_decimate(high.w, low.w, sigma), blur_decimate(high.h, low.h, sigma));
    let (ux, uy) = (cubic_matrix(low.w, high.w), cubic_matrix(low.h, high.h));
    let (px, py) = (dx.mul(&ux).inverse(), dy.mul(&uy).inverse());
    let residual = |x: &Grid| -> Vec<f64> {
        let d = apply(x, &dx, &dy);
        low.v.iter().zip(&d.v).map(|(a, b)| a - b).collect()
    };
    let l2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let linf = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut x = high.clone();
    let mut r = residual(&x);
    for _ in 0..BP_ITERS {
        if linf(&r) <= BP_TOL {
            break;
        }
        let rg = Grid { w: low.w, h: low.h, v: r.clone() };
        let corr = apply(&apply(&rg, &px, &py), &ux, &uy);
        let cand = Grid { w: x.w, h: x.h, v: x.v.iter().zip(&corr.v).map(|(a, b)| (a + b).clamp(0.0, 1.0)).collect() };
        let r_next = residual(&cand);
        if l2(&r_next) > l2(&r) {
            break;
        }
        x = cand;
        r = r_next;
    }
    x.clamped()
}

struct RefPatch {
    x0: usize,
    y0: usize,
    dc: f64,
    ac: Vec<f64>,
    loc: (f64, f64),
}

fn patches(img: &Grid) -> Vec<RefPatch> {
    let mut out = Vec::new();
    for y0 in 0..=img.h - PATCH {
        for x0 in 0..=img.w - PATCH {
            let mut vals = Vec::new();
            for dy in 0..PATCH {
                for dx in 0..PATCH {
                    vals.push(img.at(x0 + dx, y0 + dy));
                }
            }
            let dc = vals.iter().sum::<f64>() / vals.len() as f64;
            let c = (PATCH / 2) as f64 + 0.5;
            out.push(RefPatch {
                x0,
                y0,
                dc,
                ac: vals.iter().map(|v| v - dc).collect(),
                loc: ((x0 as f64 + c) / img.w as f64, (y0 as f64 + c) / img.h as f64),
            });
        }
    }
    out
}

/// Returns the synthesized image and the per-pixel weighted variance.
fn synthesize(blurry: &Grid, source: &Grid) -> (Grid, Vec<f64>) {
    let queries = patches(blurry);
    let entries = patches(source);
    let s = SPATIAL.sqrt();
    let embed = |p: &RefPatch| -> Vec<f64> {
        let mut e = p.ac.clone();
        e.push(s * p.loc.0);
        e.push(s * p.loc.1);
        e
    };
    let embedded: Vec<Vec<f64>> = entries.iter().map(embed).collect();
    let n = blurry.w * blurry.h;
    let mut contributions: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    for q in &queries {
        let eq = embed(q);
        let mut ranked: Vec<(f64, usize)> = embedded
            .iter()
            .enumerate()
            .map(|(i, e)| (e.iter().zip(&eq).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, i) in ranked.iter().take(K) {
            let e = &entries[i];
            let d1 = q.ac.iter().zip(&e.ac).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let wq = 1.0 / (d1 + EPS_W);
            for dy in 0..PATCH {
                for dx in 0..PATCH {
                    let c = (PATCH / 2) as f64;
                    let d2 = (dx as f64 - c).powi(2) + (dy as f64 - c).powi(2);
                    let g = (-d2 / (2.0 * PATCH_SIGMA * PATCH_SIGMA)).exp();
                    let pix = (q.y0 + dy) * blurry.w + q.x0 + dx;
                    contributions[pix].push((wq * g, q.dc + e.ac[dy * PATCH + dx]));
                }
            }
        }
    }
    let mut out = vec![0.0; n];
    let mut var = vec![0.0; n];
    for (i, c) in contributions.iter().enumerate() {
        if c.iter().all(|&(_, v)| v == c[0].1) {
            out[i] = c[0].1;
            continue;
        }
        let wsum: f64 = c.iter().map(|p| p.0).sum();
        let mean = c.iter().map(|p| p.0 * p.1).sum::<f64>() / wsum;
        out[i] = mean;
        var[i] = c.iter().map(|p| p.0 * (p.1 - mean).powi(2)).sum::<f64>() / wsum;
    }
    (Grid { w: blurry.w, h: blurry.h, v: out }.clamped(), var)
}

fn alpha_mask(var: &[f64], w: usize, h: usize) -> Grid {
    // Variances this small are rounding noise.
    let floor = 1e-16;
    let mut pos: Vec<f64> = var.iter().copied().filter(|&v| v > floor).collect();
    pos.sort_by(f64::total_cmp);
    let t = if pos.is_empty() { 0.0 } else { pos[(QUANTILE * (pos.len() - 1) as f64).floor() as usize] };
    let binary = Grid { w, h, v: var.iter().map(|&v| if v > t.max(floor) { 1.0 } else { 0.0 }).collect() };
    apply(&binary, &gauss_matrix(w, MASK_SIGMA), &gauss_matrix(h, MASK_SIGMA)).clamped()
}

/// WLS edge layer by plain conjugate gradients on the 5-point system.
fn wls_edge(g: &Grid) -> Grid {
    let (w, h) = (g.w, g.h);
    let n = w * h;
    let coef = |d: f64| WLS_LAMBDA / (d.abs().powf(WLS_ALPHA) + WLS_EPS);
    let mut links: Vec<(usize, usize, f64)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                links.push((i, i + 1, coef(g.v[i + 1] - g.v[i])));
            }
            if y + 1 < h {
                links.push((i, i + w, coef(g.v[i + w] - g.v[i])));
            }
        }
    }
    let mul = |u: &[f64]| -> Vec<f64> {
        let mut out = u.to_vec();
        for &(i, j, c) in &links {
            out[i] += c * (u[i] - u[j]);
            out[j] += c * (u[j] - u[i]);
        }
        out
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let b = &g.v;
    let mut u = vec![0.0; n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = 1e-26 * dot(b, b);
    for _ in 0..100_000 {
        if rr <= stop {
            break;
        }
        let ap = mul(&p);
        let step = rr / dot(&p, &ap);
        for i in 0..n {
            u[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rr_next = dot(&r, &r);
        for i in 0..n {
            p[i] = r[i] + rr_next / rr * p[i];
        }
        rr = rr_next;
    }
    Grid { w, h, v: u }
}

fn s_curve(d: f64) -> f64 {
    d.signum() * d.abs().powf(BETA)
}

fn step(current: &Grid, w: usize, h: usize, ratio: f64) -> Grid {
    let up = upsample(current, w, h).clamped();
    let (synth, var) = synthesize(&up, current);
    let synth = back_project(&synth, current, ratio);
    let edge = wls_edge(&synth);
    let mask = alpha_mask(&var, w, h);
    let blended = Grid {
        w,
        h,
        v: (0..w * h)
            .map(|i| {
                let detail = synth.v[i] - edge.v[i];
                let a = mask.v[i];
                (1.0 - a) * synth.v[i] + a * (edge.v[i] + s_curve(detail))
            })
            .collect(),
    }
    .clamped();
    back_project(&blended, current, ratio)
}

/// Gray upscale by `factor` with steps of at most 2^(1/3).
pub fn upscale(input: &Grid, factor: f64) -> Grid {
    let gamma = 2f64.powf(1.0 / 3.0);
    let mut n = 1;
    while gamma.powi(n) < factor * (1.0 - 1e-12) {
        n += 1;
    }
    let ratio = factor.powf(1.0 / n as f64);
    let mut current = input.clone();
    for s in 1..=n {
        let (w, h) = if s == n {
            ((input.w as f64 * factor).round() as usize, (input.h as f64 * factor).round() as usize)
        } else {
            ((input.w as f64 * ratio.powi(s)).round() as usize, (input.h as f64 * ratio.powi(s)).round() as usize)
        };
        current = step(&current, w, h, ratio);
    }
    back_project(&current, input, factor)
}
