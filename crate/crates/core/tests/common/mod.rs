//! Scene generators and straightforward reference computations shared by the
//! integration tests. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use layerup::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DARK: f64 = 0.2;
pub const LIGHT: f64 = 0.8;

pub fn random_image(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

/// Renders `inside(u, v)` (pixel units, origin at the image centre) with 4×4
/// supersampling, mapping outside to `DARK` and inside to `LIGHT`.
pub fn render(w: usize, h: usize, inside: impl Fn(f64, f64) -> bool) -> Image {
    const S: usize = 4;
    Image::from_fn(w, h, |x, y| {
        let mut hits = 0;
        for sy in 0..S {
            for sx in 0..S {
                let u = x as f64 + (sx as f64 + 0.5) / S as f64 - w as f64 / 2.0;
                let v = y as f64 + (sy as f64 + 0.5) / S as f64 - h as f64 / 2.0;
                if inside(u, v) {
                    hits += 1;
                }
            }
        }
        DARK + (LIGHT - DARK) * hits as f64 / (S * S) as f64
    })
    .unwrap()
}

fn dir(deg: f64) -> (f64, f64) {
    let t = deg.to_radians();
    (t.cos(), t.sin())
}

pub fn step_edge(size: usize, deg: f64, offset: f64) -> Image {
    let (c, s) = dir(deg);
    render(size, size, move |u, v| u * c + v * s > offset)
}

pub fn ridge(size: usize, deg: f64, width: f64) -> Image {
    let (c, s) = dir(deg);
    render(size, size, move |u, v| (u * c + v * s).abs() < width / 2.0)
}

pub fn corner(size: usize, deg: f64, opening: f64) -> Image {
    let (c1, s1) = dir(deg);
    let (c2, s2) = dir(deg + opening);
    render(size, size, move |u, v| u * s1 - v * c1 < 0.0 && u * s2 - v * c2 > 0.0)
}

/// The five edge-dominant ground truths used by the quality checks.
pub fn edge_scenes(size: usize) -> Vec<(&'static str, Image)> {
    vec![
        ("step 30deg", step_edge(size, 30.0, 2.5)),
        ("step 98deg", step_edge(size, 98.0, -4.0)),
        ("ridge 65deg", ridge(size, 65.0, 3.0)),
        ("corner 15deg", corner(size, 15.0, 80.0)),
        ("corner 200deg", corner(size, 200.0, 110.0)),
    ]
}

pub fn max_abs_diff(a: &Image, b: &Image) -> f64 {
    assert_eq!((a.width(), a.height(), a.channels()), (b.width(), b.height(), b.channels()));
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Patches of a gray image as (ac values, location), row-major by origin.
pub fn naive_patches(img: &Image, r: usize) -> Vec<(Vec<f64>, (f64, f64))> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::new();
    for y0 in 0..=h - r {
        for x0 in 0..=w - r {
            let mut vals = Vec::with_capacity(r * r);
            for dy in 0..r {
                for dx in 0..r {
                    vals.push(img.get(x0 + dx, y0 + dy));
                }
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let ac = vals.iter().map(|v| v - mean).collect();
            let loc = ((x0 as f64 + (r / 2) as f64 + 0.5) / w as f64, (y0 as f64 + (r / 2) as f64 + 0.5) / h as f64);
            out.push((ac, loc));
        }
    }
    out
}

/// Squared search distance between two naive patches.
pub fn naive_dist2(p: &(Vec<f64>, (f64, f64)), q: &(Vec<f64>, (f64, f64)), lambda: f64) -> f64 {
    let app: f64 = p.0.iter().zip(&q.0).map(|(a, b)| (a - b) * (a - b)).sum();
    let dx = p.1 .0 - q.1 .0;
    let dy = p.1 .1 - q.1 .1;
    app + lambda * (dx * dx + dy * dy)
}

/// k nearest entries by (distance², index).
pub fn naive_knn(
    entries: &[(Vec<f64>, (f64, f64))],
    q: &(Vec<f64>, (f64, f64)),
    lambda: f64,
    k: usize,
) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = entries.iter().enumerate().map(|(i, e)| (i, naive_dist2(q, e, lambda))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all.into_iter().map(|(i, d2)| (i, d2.sqrt())).collect()
}

/// Dense matrix of the smoothing normal equations, row-major n×n.
pub fn dense_wls_matrix(img: &Image, lambda: f64, alpha: f64, eps: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    let mut link = |i: usize, j: usize, gi: f64, gj: f64| {
        let c = lambda / ((gj - gi).abs().powf(alpha) + eps);
        a[i * n + i] += c;
        a[j * n + j] += c;
        a[i * n + j] -= c;
        a[j * n + i] -= c;
    };
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                link(i, i + 1, img.get(x, y), img.get(x + 1, y));
            }
            if y + 1 < h {
                link(i, i + w, img.get(x, y), img.get(x, y + 1));
            }
        }
    }
    a
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs())).unwrap();
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    x
}

pub fn mse_psnr(a: &Image, b: &Image) -> f64 {
    let n = a.data().len() as f64;
    let mse: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n;
    -10.0 * mse.log10()
}

/// Mean SSIM from per-window weighted statistics, window 11, σ 1.5.
pub fn windowed_ssim(a: &Image, b: &Image) -> f64 {
    let (w, h) = (a.width(), a.height());
    let mut g = [0.0; 11];
    for (i, v) in g.iter_mut().enumerate() {
        let t = i as f64 - 5.0;
        *v = (-t * t / (2.0 * 1.5 * 1.5)).exp();
    }
    let total: f64 = g.iter().sum::<f64>().powi(2);
    let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
    let mut acc = 0.0;
    let mut count = 0;
    for y0 in 0..=h - 11 {
        for x0 in 0..=w - 11 {
            let weight = |dx: usize, dy: usize| g[dx] * g[dy] / total;
            let mut mu = (0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    mu.0 += weight(dx, dy) * a.get(x0 + dx, y0 + dy);
                    mu.1 += weight(dx, dy) * b.get(x0 + dx, y0 + dy);
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    let da = a.get(x0 + dx, y0 + dy) - mu.0;
                    let db = b.get(x0 + dx, y0 + dy) - mu.1;
                    va += weight(dx, dy) * da * da;
                    vb += weight(dx, dy) * db * db;
                    cov += weight(dx, dy) * da * db;
                }
            }
            acc += (2.0 * mu.0 * mu.1 + c1) * (2.0 * cov + c2) / ((mu.0 * mu.0 + mu.1 * mu.1 + c1) * (va + vb + c2));
            count += 1;
        }
    }
    acc / count as f64
}
