//! Flat `key = value` run configuration.
//!
//! One assignment per line; lines whose first non-blank character is `#` are
//! comments. Serialization and parsing round-trip every field exactly, since
//! floats are written in shortest round-trip form.

use std::path::Path;
use std::str::FromStr;

use crate::augment::LambdaSampler;
use crate::io::IoError;

/// Settings shared by the CLI and the training harness. Defaults follow the
/// shipped mechanism constants: augmentation probability 0.5, vMF loss weight
/// 0.005, prototype EMA momentum 0.99.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub p_aug: f64,
    pub lambda_sampler: LambdaSampler,
    /// Weight of the vMF loss term in the total objective.
    pub lambda_vmf: f64,
    pub ema_momentum: f64,
    pub kappa_init: f64,
    pub seed: u64,
    pub feature_dim: usize,
    pub image_height: usize,
    pub image_width: usize,
    pub input_path: Option<String>,
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p_aug: 0.5,
            lambda_sampler: LambdaSampler::default(),
            lambda_vmf: 0.005,
            ema_momentum: 0.99,
            kappa_init: 10.0,
            seed: 0,
            feature_dim: 16,
            image_height: 24,
            image_width: 24,
            input_path: None,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.p_aug) {
            return Err(format!("p_aug must lie in [0, 1], got {}", self.p_aug));
        }
        self.lambda_sampler.validate().map_err(|e| e.to_string())?;
        if !self.lambda_vmf.is_finite() || self.lambda_vmf < 0.0 {
            return Err(format!("lambda_vmf must be nonnegative, got {}", self.lambda_vmf));
        }
        if !(0.0..=1.0).contains(&self.ema_momentum) {
            return Err(format!(
                "ema_momentum must lie in [0, 1], got {}",
                self.ema_momentum
            ));
        }
        if !self.kappa_init.is_finite() || self.kappa_init <= 0.0 {
            return Err(format!("kappa_init must be positive, got {}", self.kappa_init));
        }
        if self.feature_dim < 2 {
            return Err(format!("feature_dim must be at least 2, got {}", self.feature_dim));
        }
        if self.image_height == 0 || self.image_width == 0 {
            return Err("image dimensions must be positive".into());
        }
        Ok(())
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, IoError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |reason: String| IoError::Config {
                path: path.to_string(),
                line,
                reason,
            };
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| err(format!("invalid {what}: `{value}`"));
            match key {
                "p_aug" => cfg.p_aug = value.parse().map_err(|_| bad("p_aug"))?,
                "lambda_sampler" => {
                    cfg.lambda_sampler =
                        LambdaSampler::from_str(value).map_err(|e| err(e.to_string()))?
                }
                "lambda_vmf" => cfg.lambda_vmf = value.parse().map_err(|_| bad("lambda_vmf"))?,
                "ema_momentum" => {
                    cfg.ema_momentum = value.parse().map_err(|_| bad("ema_momentum"))?
                }
                "kappa_init" => cfg.kappa_init = value.parse().map_err(|_| bad("kappa_init"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "feature_dim" => cfg.feature_dim = value.parse().map_err(|_| bad("feature_dim"))?,
                "image_height" => {
                    cfg.image_height = value.parse().map_err(|_| bad("image_height"))?
                }
                "image_width" => cfg.image_width = value.parse().map_err(|_| bad("image_width"))?,
                "input_path" => cfg.input_path = Some(value.to_string()),
                "output_path" => cfg.output_path = Some(value.to_string()),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate().map_err(|reason| IoError::Config {
            path: path.to_string(),
            line: 0,
            reason,
        })?;
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("p_aug = {}\n", self.p_aug));
        out.push_str(&format!("lambda_sampler = {}\n", self.lambda_sampler));
        out.push_str(&format!("lambda_vmf = {}\n", self.lambda_vmf));
        out.push_str(&format!("ema_momentum = {}\n", self.ema_momentum));
        out.push_str(&format!("kappa_init = {}\n", self.kappa_init));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("feature_dim = {}\n", self.feature_dim));
        out.push_str(&format!("image_height = {}\n", self.image_height));
        out.push_str(&format!("image_width = {}\n", self.image_width));
        if let Some(p) = &self.input_path {
            out.push_str(&format!("input_path = {p}\n"));
        }
        if let Some(p) = &self.output_path {
            out.push_str(&format!("output_path = {p}\n"));
        }
        out
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let path = path.as_ref();
        std::fs::write(path, self.serialize()).map_err(|e| IoError::file(path, e))
    }
}
