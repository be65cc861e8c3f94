//! Flat `key = value` configuration files.
//!
//! Keys are the long CLI flag names without the leading dashes. Blank lines
//! and lines starting with `#` are ignored.
//!
//! ```text
//! factor = 3
//! beta = 0.7
//! exact-search = true
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;
use crate::search::SearchMode;

/// Every key accepted by [`apply_setting`].
pub const KEYS: &[&str] = &[
    "factor",
    "step-factor",
    "beta",
    "lambda",
    "patch-size",
    "neighbors",
    "mask-quantile",
    "mask-sigma",
    "exact-search",
    "synthesis-sigma",
    "epsilon-w",
    "wls-lambda",
    "wls-alpha",
    "wls-eps",
    "enhance-detail",
    "backproject-iters",
    "backproject-tol",
    "precondition",
    "antialias",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("bad value {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("bad value {value:?} for {key}; expected true or false")),
    }
}

/// Sets one field of `cfg`. The value is not range-checked here; call
/// [`PipelineConfig::validate`] once all settings are applied.
pub fn apply_setting(cfg: &mut PipelineConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "factor" => cfg.total_factor = parse(key, value)?,
        "step-factor" => cfg.step_factor = parse(key, value)?,
        "beta" => cfg.curve.beta = parse(key, value)?,
        "lambda" => cfg.search_mut().lambda = parse(key, value)?,
        "patch-size" => cfg.search_mut().patch_size = parse(key, value)?,
        "neighbors" => cfg.search_mut().k = parse(key, value)?,
        "mask-quantile" => cfg.mask_quantile = parse(key, value)?,
        "mask-sigma" => cfg.mask_sigma = parse(key, value)?,
        "exact-search" => {
            cfg.search_mut().mode =
                if parse_bool(key, value)? { SearchMode::ExactBruteForce } else { SearchMode::Indexed }
        }
        "synthesis-sigma" => cfg.synthesis.sigma = parse(key, value)?,
        "epsilon-w" => cfg.synthesis.epsilon_w = parse(key, value)?,
        "wls-lambda" => cfg.wls.lambda = parse(key, value)?,
        "wls-alpha" => cfg.wls.alpha = parse(key, value)?,
        "wls-eps" => cfg.wls.eps = parse(key, value)?,
        "enhance-detail" => cfg.enhance_detail = parse_bool(key, value)?,
        "backproject-iters" => cfg.backproject.max_iters = parse(key, value)?,
        "backproject-tol" => cfg.backproject.residual_tol = parse(key, value)?,
        "precondition" => cfg.backproject.precondition = parse_bool(key, value)?,
        "antialias" => cfg.antialias = parse(key, value)?,
        "seed" => cfg.seed = parse(key, value)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

/// Applies every setting in `text` to `cfg`. `path` is only used in errors.
pub fn apply_config_str(cfg: &mut PipelineConfig, text: &str, path: &Path) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |reason: String| Error::Config { path: path.to_path_buf(), line: i + 1, reason };
        let (key, value) = line.split_once('=').ok_or_else(|| fail("expected key = value".into()))?;
        apply_setting(cfg, key.trim(), value.trim()).map_err(fail)?;
    }
    Ok(())
}

pub fn load_config(path: &Path, cfg: &mut PipelineConfig) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    apply_config_str(cfg, &text, path)
}
