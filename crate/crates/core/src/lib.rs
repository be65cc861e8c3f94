//! Single-image upsampling by layer decomposition.
//!
//! Each small magnification step synthesizes the edge layer from
//! self-similar patches of the current estimate, exaggerates the detail
//! layer with an S-curve where patch statistics are confident, and
//! back-projects to stay consistent with the low-resolution input.
//!
//! ```no_run
//! use layerup::{load_image, save_image, upscale, PipelineConfig};
//!
//! let img = load_image("input.png")?;
//! let out = upscale(&img, &PipelineConfig::with_factor(3.0))?;
//! save_image(&out, "output.png")?;
//! # Ok::<(), layerup::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod detail;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod resample;
pub mod search;
pub mod synthesis;

pub use detail::{apply_s_curve, enhance_blend, wls_decompose, DetailCurve, LayerDecomposition, WlsConfig};
pub use error::{Error, Result};
pub use image::{from_ycbcr, to_ycbcr, ChannelTriple, Image};
pub use io::{load_image, save_image};
pub use metrics::{psnr, ssim, QualityReport};
pub use pipeline::{plan_steps, upscale, upscale_observed, PipelineConfig, StepArtifacts, StepPlan};
pub use resample::{back_project, bicubic_resize, downsample, BackProjectSpec, ResampleSpec};
pub use search::{build_index, patch_transform, synthesize_mean, Patch, PatchIndex, SearchConfig, SearchMode};
pub use synthesis::{pixel_variance_to_alpha, synthesize_np, AlphaMask, SynthesisConfig, VarianceMap};
