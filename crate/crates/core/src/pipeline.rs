//! The full upsampler: repeated small-factor steps of
//! bicubic upsampling → patch synthesis → detail enhancement, each followed by
//! back-projection against the previous estimate, and a final back-projection
//! against the original input.

use crate::detail::{apply_s_curve, enhance_blend, wls_decompose, DetailCurve, WlsConfig};
use crate::error::{Error, Result};
use crate::image::{from_ycbcr, to_ycbcr, ChannelTriple, Image};
use crate::resample::{back_project, upsample_to, BackProjectSpec, DEFAULT_ANTIALIAS, DEFAULT_CUBIC_A};
use crate::search::SearchConfig;
use crate::synthesis::{pixel_variance_to_alpha, synthesize_np, SynthesisConfig};

/// Largest per-step magnification the method is meant for.
pub const MAX_STEP_FACTOR: f64 = 1.26;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub total_factor: f64,
    pub step_factor: f64,
    /// Synthesis parameters, including the patch search.
    pub synthesis: SynthesisConfig,
    pub wls: WlsConfig,
    pub curve: DetailCurve,
    /// When false the decomposition/enhancement stage is skipped entirely.
    pub enhance_detail: bool,
    /// Iteration limits for every back-projection. `blur_sigma` is
    /// recomputed per step as `antialias × step ratio`.
    pub backproject: BackProjectSpec,
    pub antialias: f64,
    pub cubic_a: f64,
    pub mask_quantile: f64,
    pub mask_sigma: f64,
    /// Reserved for randomized tie-breaking; the default pipeline is deterministic.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            total_factor: 2.0,
            step_factor: 2f64.powf(1.0 / 3.0),
            synthesis: SynthesisConfig::default(),
            wls: WlsConfig::default(),
            curve: DetailCurve::default(),
            enhance_detail: true,
            backproject: BackProjectSpec::default(),
            antialias: DEFAULT_ANTIALIAS,
            cubic_a: DEFAULT_CUBIC_A,
            mask_quantile: 0.7,
            mask_sigma: 1.0,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn with_factor(total_factor: f64) -> Self {
        Self { total_factor, ..Self::default() }
    }

    pub fn search(&self) -> &SearchConfig {
        &self.synthesis.search
    }

    pub fn search_mut(&mut self) -> &mut SearchConfig {
        &mut self.synthesis.search
    }

    pub fn validate(&self) -> Result<()> {
        check_factors(self.total_factor, self.step_factor)?;
        self.synthesis.validate()?;
        self.wls.validate()?;
        self.curve.validate()?;
        self.backproject.validate()?;
        if !(self.antialias >= 0.0 && self.antialias.is_finite()) {
            return Err(Error::invalid(format!("antialias {}", self.antialias)));
        }
        if !(self.mask_quantile > 0.0 && self.mask_quantile <= 1.0) {
            return Err(Error::invalid(format!("mask quantile {}", self.mask_quantile)));
        }
        if !(self.mask_sigma >= 0.0 && self.mask_sigma.is_finite()) {
            return Err(Error::invalid(format!("mask sigma {}", self.mask_sigma)));
        }
        Ok(())
    }

    /// Back-projection spec for an ℒ that decimates by `ratio`.
    pub fn backproject_for(&self, ratio: f64) -> BackProjectSpec {
        BackProjectSpec { blur_sigma: self.antialias * ratio, cubic_a: self.cubic_a, ..self.backproject }
    }
}

fn check_factors(total: f64, step: f64) -> Result<()> {
    if !(total.is_finite() && total > 1.0) {
        return Err(Error::invalid(format!("total factor {total} must be > 1")));
    }
    if !(step > 1.0 && step <= MAX_STEP_FACTOR) {
        return Err(Error::invalid(format!("step factor {step} must be in (1, {MAX_STEP_FACTOR}]")));
    }
    Ok(())
}

/// Per-step magnifications; their product is the total factor.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPlan {
    pub ratios: Vec<f64>,
}

impl StepPlan {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn product(&self) -> f64 {
        self.ratios.iter().product()
    }
}

/// `n = ceil(log(total) / log(step))` equal steps of `total^(1/n)`.
pub fn plan_steps(total_factor: f64, step_factor: f64) -> Result<StepPlan> {
    check_factors(total_factor, step_factor)?;
    // The tolerance keeps exact powers (4 = (2^(1/3))^6) from rounding up a step.
    let n = ((total_factor.ln() / step_factor.ln()) - 1e-9).ceil().max(1.0) as usize;
    let ratio = total_factor.powf(1.0 / n as f64);
    Ok(StepPlan { ratios: vec![ratio; n] })
}

/// Intermediate images of one step, for inspection.
#[derive(Clone, Debug)]
pub struct StepArtifacts {
    /// 1-based step number.
    pub step: usize,
    pub upsampled: Image,
    /// Synthesized and back-projected.
    pub synthesized: Image,
    pub variance: Image,
    pub alpha: Option<Image>,
    pub edge: Option<Image>,
    pub detail: Option<Image>,
    pub enhanced_detail: Option<Image>,
    pub result: Image,
}

fn target_dims(w: usize, h: usize, factor: f64) -> (usize, usize) {
    (((w as f64 * factor).round() as usize).max(1), ((h as f64 * factor).round() as usize).max(1))
}

/// Upscales a gray or colour image. Colour images are processed on luma;
/// chroma is upscaled bicubically.
pub fn upscale(img: &Image, cfg: &PipelineConfig) -> Result<Image> {
    upscale_observed(img, cfg, &mut |_| {})
}

pub fn upscale_observed(img: &Image, cfg: &PipelineConfig, observer: &mut dyn FnMut(&StepArtifacts)) -> Result<Image> {
    cfg.validate()?;
    match img.channels() {
        1 => upscale_luma(img, cfg, observer),
        _ => {
            let t = to_ycbcr(img)?;
            let luma = upscale_luma(&t.luma, cfg, observer)?;
            let (w, h) = (luma.width(), luma.height());
            let chroma = |p: &Image| upsample_to(p, w, h, cfg.cubic_a).clamp01();
            from_ycbcr(&ChannelTriple::new(luma, chroma(&t.cb), chroma(&t.cr))?)
        }
    }
}

fn upscale_luma(input: &Image, cfg: &PipelineConfig, observer: &mut dyn FnMut(&StepArtifacts)) -> Result<Image> {
    input.expect_gray()?;
    let (w0, h0) = (input.width(), input.height());
    let (tw, th) = target_dims(w0, h0, cfg.total_factor);
    if (tw, th) == (w0, h0) {
        return Ok(input.clone());
    }
    let plan = plan_steps(cfg.total_factor, cfg.step_factor)?;
    let mut current = input.clone();
    let mut cumulative = 1.0;
    for (i, &ratio) in plan.ratios.iter().enumerate() {
        cumulative *= ratio;
        let (w, h) = if i + 1 == plan.len() { (tw, th) } else { target_dims(w0, h0, cumulative) };
        if (w, h) == (current.width(), current.height()) {
            continue;
        }
        current = run_step(&current, w, h, ratio, i + 1, cfg, observer).map_err(|e| e.at_step(i + 1))?;
    }
    back_project(&current, input, &cfg.backproject_for(cfg.total_factor))
}

fn run_step(
    current: &Image,
    w: usize,
    h: usize,
    ratio: f64,
    step: usize,
    cfg: &PipelineConfig,
    observer: &mut dyn FnMut(&StepArtifacts),
) -> Result<Image> {
    let bp = cfg.backproject_for(ratio);
    let upsampled = upsample_to(current, w, h, cfg.cubic_a).clamp01();
    let (synth, variance) = synthesize_np(&upsampled, current, &cfg.synthesis)?;
    let synthesized = back_project(&synth, current, &bp)?;

    let mut artifacts = StepArtifacts {
        step,
        upsampled,
        synthesized: synthesized.clone(),
        variance: variance.image().clone(),
        alpha: None,
        edge: None,
        detail: None,
        enhanced_detail: None,
        result: synthesized.clone(),
    };
    let enhanced = if cfg.enhance_detail {
        let layers = wls_decompose(&synthesized, &cfg.wls)?;
        let boosted = apply_s_curve(&layers.detail, &cfg.curve);
        let mask = pixel_variance_to_alpha(&variance, cfg.mask_sigma, cfg.mask_quantile)?;
        let blended = enhance_blend(&synthesized, &layers, &boosted, &mask)?;
        artifacts.alpha = Some(mask.mask);
        artifacts.edge = Some(layers.edge);
        artifacts.detail = Some(layers.detail);
        artifacts.enhanced_detail = Some(boosted);
        blended
    } else {
        synthesized
    };
    let result = back_project(&enhanced, current, &bp)?;
    artifacts.result = result.clone();
    observer(&artifacts);
    Ok(result)
}
