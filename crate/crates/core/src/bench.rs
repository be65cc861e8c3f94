//! Search-scaling benchmark over a seeded synthetic workload.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::resample::{upsample_to, DEFAULT_CUBIC_A};
use crate::search::{patch_transform, Patch, PatchIndex, SearchConfig, SearchMode};
use crate::synthesis::{synthesize_np, SynthesisConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchOptions {
    /// Queries timed per size with the k-d tree. Each is timed several
    /// times and its fastest run kept.
    pub queries: usize,
    /// Queries timed per size with the linear scan.
    pub brute_queries: usize,
    /// Also time one full synthesis pass per size.
    pub synthesis: bool,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { queries: 400, brute_queries: 40, synthesis: true, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    /// Requested pixel count.
    pub pixels: usize,
    /// Side of the square source image actually used.
    pub side: usize,
    pub entries: usize,
    pub indexed_median_us: f64,
    pub brute_median_us: f64,
    pub synthesis_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Ratio of consecutive median indexed query times.
    pub fn indexed_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].indexed_median_us / w[0].indexed_median_us).collect()
    }

    pub fn brute_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].brute_median_us / w[0].brute_median_us).collect()
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pixels\tside\tentries\tindexed_median_us\tbrute_median_us\tsynthesis_ms")?;
        for r in &self.rows {
            let synth = r.synthesis_ms.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
            writeln!(
                f,
                "{}\t{}\t{}\t{:.3}\t{:.3}\t{}",
                r.pixels, r.side, r.entries, r.indexed_median_us, r.brute_median_us, synth
            )?;
        }
        Ok(())
    }
}

/// Source image of roughly `side²` pixels: a few oriented edges and a disc
/// over mild seeded noise.
pub fn bench_image(side: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            let angle = rng.gen_range(0.0..std::f64::consts::PI);
            let offset = rng.gen_range(0.3..0.7);
            (angle.cos(), angle.sin(), offset, rng.gen_range(0.1..0.3))
        })
        .collect();
    let (cx, cy, radius) = (rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7), 0.2);
    let s = side as f64;
    Image::from_fn(side, side, |x, y| {
        let (u, v) = ((x as f64 + 0.5) / s, (y as f64 + 0.5) / s);
        let mut value = 0.2;
        for &(c, sn, off, step) in &edges {
            if u * c + v * sn > off {
                value += step;
            }
        }
        if (u - cx).powi(2) + (v - cy).powi(2) < radius * radius {
            value = 1.0 - value;
        }
        (value + rng.gen_range(-0.02..0.02)).clamp(0.0, 1.0)
    })
    .expect("side >= 1")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median over queries of each query's best time across `ROUNDS` passes.
fn time_queries(index: &PatchIndex, queries: &[&Patch], k: usize) -> Result<f64> {
    const ROUNDS: usize = 5;
    let mut best = vec![f64::INFINITY; queries.len()];
    for _ in 0..ROUNDS {
        for (q, t) in queries.iter().zip(best.iter_mut()) {
            let start = Instant::now();
            let found = index.query_knn(q, k)?;
            *t = t.min(start.elapsed().as_secs_f64() * 1e6);
            std::hint::black_box(found);
        }
    }
    Ok(median(best))
}

/// Times k-NN queries for each pixel count in `sizes` (ascending).
///
/// Queries are patches of the source's bicubic upsample by 2^(1/3), the same
/// workload one pipeline step produces.
pub fn bench_search(sizes: &[usize], cfg: &SearchConfig, opts: &BenchOptions) -> Result<BenchReport> {
    cfg.validate()?;
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("bench sizes must be ascending"));
    }
    if opts.queries == 0 || opts.brute_queries == 0 {
        return Err(Error::invalid("bench needs at least one query"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &pixels in sizes {
        let side = ((pixels as f64).sqrt().round() as usize).max(cfg.patch_size);
        let source = bench_image(side, opts.seed);
        let up_side = (side as f64 * 2f64.powf(1.0 / 3.0)).round() as usize;
        let blurry = upsample_to(&source, up_side, up_side, DEFAULT_CUBIC_A).clamp01();
        let pool = patch_transform(&blurry, cfg.patch_size)?;

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ pixels as u64);
        let picks: Vec<_> = (0..opts.queries).map(|_| &pool[rng.gen_range(0..pool.len())]).collect();

        let indexed = PatchIndex::build(&source, SearchConfig { mode: SearchMode::Indexed, ..*cfg })?;
        let brute = PatchIndex::build(&source, SearchConfig { mode: SearchMode::ExactBruteForce, ..*cfg })?;
        let indexed_median_us = time_queries(&indexed, &picks, cfg.k)?;
        let brute_median_us = time_queries(&brute, &picks[..opts.brute_queries.min(picks.len())], cfg.k)?;

        let synthesis_ms = if opts.synthesis {
            let scfg = SynthesisConfig {
                search: SearchConfig { mode: SearchMode::Indexed, ..*cfg },
                ..SynthesisConfig::default()
            };
            let start = Instant::now();
            std::hint::black_box(synthesize_np(&blurry, &source, &scfg)?);
            Some(start.elapsed().as_secs_f64() * 1e3)
        } else {
            None
        };
        rows.push(BenchRow { pixels, side, entries: indexed.len(), indexed_median_us, brute_median_us, synthesis_ms });
    }
    Ok(BenchReport { rows })
}

/// `steps` pixel counts spaced geometrically from `min` to `max`.
pub fn geometric_sizes(min: usize, max: usize, steps: usize) -> Result<Vec<usize>> {
    if min == 0 || max < min || steps == 0 {
        return Err(Error::invalid(format!(
            "bench sizes need 0 < min <= max and steps >= 1 (min {min}, max {max}, steps {steps})"
        )));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    let r = (max as f64 / min as f64).powf(1.0 / (steps - 1) as f64);
    Ok((0..steps).map(|i| (min as f64 * r.powi(i as i32)).round() as usize).collect())
}
