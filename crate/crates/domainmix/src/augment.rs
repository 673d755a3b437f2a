//! Probabilistic Fourier augmentation.
//!
//! Amplitude Mix builds a new amplitude spectrum as the convex combination
//! `(1 - lambda) * A_content + lambda * A_style` per channel and reconstructs
//! with the content phase, so the blended image keeps the content's structure
//! while borrowing the style's frequency-amplitude statistics. [`apply_policy`]
//! gates the mix per sample with a Bernoulli draw and samples `lambda` from a
//! configurable distribution, all on seeded substreams so batches reproduce
//! exactly.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use thiserror::Error;

use crate::image::ImageTensor;
use crate::io::rng::{rng_stream, RandomStream};
use crate::spectral::{decompose, fft2d, ifft2d, SpectralError, Spectrum};

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("content {0}x{1}x{2} and style {3}x{4}x{5} shapes differ")]
    ShapeMismatch(usize, usize, usize, usize, usize, usize),
    #[error("lambda must lie in [0, 1], got {0}")]
    BadLambda(f64),
    #[error("augmentation probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("invalid lambda sampler: {0}")]
    BadSampler(String),
    #[error("batch is empty")]
    EmptyBatch,
    #[error("style pool is empty")]
    EmptyStylePool,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// How the interpolation weight `lambda` is drawn for an augmented sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSampler {
    /// Uniform on `[lo, hi]`, the default being the full unit interval.
    Uniform { lo: f64, hi: f64 },
    /// Symmetric `Beta(alpha, alpha)` on `[0, 1]`.
    BetaSym { alpha: f64 },
    /// Degenerate sampler that always returns `value`.
    Fixed { value: f64 },
}

impl LambdaSampler {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let ok = match *self {
            LambdaSampler::Uniform { lo, hi } => (0.0..=1.0).contains(&lo) && lo <= hi && hi <= 1.0,
            LambdaSampler::BetaSym { alpha } => alpha > 0.0 && alpha.is_finite(),
            LambdaSampler::Fixed { value } => (0.0..=1.0).contains(&value),
        };
        if ok {
            Ok(())
        } else {
            Err(AugmentError::BadSampler(self.to_string()))
        }
    }

    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match *self {
            LambdaSampler::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            LambdaSampler::BetaSym { alpha } => {
                let beta = Beta::new(alpha, alpha).expect("alpha validated positive");
                beta.sample(rng)
            }
            LambdaSampler::Fixed { value } => value,
        }
    }
}

impl Default for LambdaSampler {
    fn default() -> Self {
        LambdaSampler::Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl fmt::Display for LambdaSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LambdaSampler::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            LambdaSampler::BetaSym { alpha } => write!(f, "beta:{alpha}"),
            LambdaSampler::Fixed { value } => write!(f, "fixed:{value}"),
        }
    }
}

impl FromStr for LambdaSampler {
    type Err = AugmentError;

    /// Parses `uniform:LO,HI`, `beta:ALPHA`, or `fixed:VALUE`; the bare word
    /// `uniform` means the default `uniform:0,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AugmentError::BadSampler(s.to_string());
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let sampler = match (kind, args) {
            ("uniform", "") => LambdaSampler::default(),
            ("uniform", args) => {
                let (lo, hi) = args.split_once(',').ok_or_else(bad)?;
                LambdaSampler::Uniform {
                    lo: lo.trim().parse().map_err(|_| bad())?,
                    hi: hi.trim().parse().map_err(|_| bad())?,
                }
            }
            ("beta", args) => LambdaSampler::BetaSym {
                alpha: args.trim().parse().map_err(|_| bad())?,
            },
            ("fixed", args) => LambdaSampler::Fixed {
                value: args.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        sampler.validate()?;
        Ok(sampler)
    }
}

/// Per-sample augmentation policy: gate probability, `lambda` distribution,
/// and the seed that anchors every random draw.
#[derive(Debug, Clone, PartialEq)]
pub struct AugPolicy {
    p_aug: f64,
    lambda_sampler: LambdaSampler,
    seed: u64,
}

impl AugPolicy {
    pub fn new(p_aug: f64, lambda_sampler: LambdaSampler, seed: u64) -> Result<Self, AugmentError> {
        if !(0.0..=1.0).contains(&p_aug) {
            return Err(AugmentError::BadProbability(p_aug));
        }
        lambda_sampler.validate()?;
        Ok(Self {
            p_aug,
            lambda_sampler,
            seed,
        })
    }

    pub fn p_aug(&self) -> f64 {
        self.p_aug
    }

    pub fn lambda_sampler(&self) -> LambdaSampler {
        self.lambda_sampler
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Default for AugPolicy {
    /// Gate probability 0.5 with `lambda ~ U(0, 1)` and seed 0.
    fn default() -> Self {
        Self {
            p_aug: 0.5,
            lambda_sampler: LambdaSampler::default(),
            seed: 0,
        }
    }
}

/// One gating decision from [`apply_policy`].
#[derive(Debug, Clone, PartialEq)]
pub struct AugRecord {
    pub index: usize,
    pub applied: bool,
    pub lambda: Option<f64>,
    pub style_index: Option<usize>,
}

impl fmt::Display for AugRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "index={} applied={}", self.index, self.applied)?;
        match (self.lambda, self.style_index) {
            (Some(l), Some(s)) => write!(f, " lambda={l} style_index={s}"),
            _ => write!(f, " lambda=- style_index=-"),
        }
    }
}

/// A nonempty set of style images sampled uniformly with replacement.
#[derive(Debug, Clone)]
pub struct StylePool {
    images: Vec<ImageTensor>,
}

impl StylePool {
    pub fn new(images: Vec<ImageTensor>) -> Result<Self, AugmentError> {
        if images.is_empty() {
            return Err(AugmentError::EmptyStylePool);
        }
        Ok(Self { images })
    }

    /// Number of style images; never zero by construction.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn get(&self, i: usize) -> &ImageTensor {
        &self.images[i]
    }
}

/// Draws one interpolation weight from the policy's sampler.
pub fn sample_lambda(policy: &AugPolicy, rng: &mut RandomStream) -> f64 {
    policy.lambda_sampler.sample(rng)
}

fn check_shapes(content: &ImageTensor, style: &ImageTensor) -> Result<(), AugmentError> {
    if !content.same_shape(style) {
        return Err(AugmentError::ShapeMismatch(
            content.height(),
            content.width(),
            content.channels(),
            style.height(),
            style.width(),
            style.channels(),
        ));
    }
    Ok(())
}

/// The blended spectrum before reconstruction: amplitude
/// `(1 - lambda) * A_content + lambda * A_style` with the content phase.
///
/// Each mixed coefficient is the content coefficient rescaled to the blended
/// amplitude, which keeps the content phase exactly without a polar round
/// trip; a zero content coefficient takes phase 0, so the result there is
/// the blended amplitude on the real axis.
pub fn mixed_spectrum(
    content: &ImageTensor,
    style: &ImageTensor,
    lambda: f64,
) -> Result<Spectrum, AugmentError> {
    check_shapes(content, style)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(AugmentError::BadLambda(lambda));
    }
    let content_spec = fft2d(content);
    let style_spec = fft2d(style);
    let coeff: Vec<Complex<f64>> = content_spec
        .coeff()
        .iter()
        .zip(style_spec.coeff())
        .map(|(zc, zs)| {
            let a_c = (zc.re * zc.re + zc.im * zc.im).sqrt();
            let a_s = (zs.re * zs.re + zs.im * zs.im).sqrt();
            let mixed = (1.0 - lambda) * a_c + lambda * a_s;
            if a_c == 0.0 {
                Complex::new(mixed, 0.0)
            } else {
                // divide before multiplying so a tiny a_c cannot overflow
                Complex::new(zc.re / a_c * mixed, zc.im / a_c * mixed)
            }
        })
        .collect();
    Ok(Spectrum::new(
        content.height(),
        content.width(),
        content.channels(),
        coeff,
    )?)
}

/// Amplitude Mix without the final clamp; samples may overshoot `[0, 1]`.
pub fn amplitude_mix_unclamped(
    content: &ImageTensor,
    style: &ImageTensor,
    lambda: f64,
) -> Result<ImageTensor, AugmentError> {
    Ok(ifft2d(&mixed_spectrum(content, style, lambda)?)?)
}

/// Amplitude Mix: blend amplitude spectra, keep the content phase,
/// reconstruct, and clamp to `[0, 1]`.
pub fn amplitude_mix(
    content: &ImageTensor,
    style: &ImageTensor,
    lambda: f64,
) -> Result<ImageTensor, AugmentError> {
    let mut out = amplitude_mix_unclamped(content, style, lambda)?;
    out.clamp01();
    Ok(out)
}

/// Applies the augmentation policy to a batch.
///
/// Each element `i` draws from its own substream keyed by
/// `(policy seed, i)`, in the fixed order: gate, style index, lambda. Results
/// are therefore identical however the batch is chunked or parallelized. Style
/// images whose spatial size differs from the content are bilinearly resized
/// first. Batch order is preserved and untouched elements are returned as-is.
pub fn apply_policy(
    batch: &[ImageTensor],
    styles: &StylePool,
    policy: &AugPolicy,
) -> Result<(Vec<ImageTensor>, Vec<AugRecord>), AugmentError> {
    if batch.is_empty() {
        return Err(AugmentError::EmptyBatch);
    }
    let mut out = Vec::with_capacity(batch.len());
    let mut records = Vec::with_capacity(batch.len());
    for (index, content) in batch.iter().enumerate() {
        let mut rng = rng_stream(policy.seed, index as u64);
        let gate: f64 = rng.random();
        if gate < policy.p_aug {
            let style_index = rng.random_range(0..styles.len());
            let lambda = sample_lambda(policy, &mut rng);
            let style = styles.get(style_index);
            let mixed = if style.height() == content.height() && style.width() == content.width() {
                amplitude_mix(content, style, lambda)?
            } else {
                let resized = style.resize_bilinear(content.height(), content.width());
                amplitude_mix(content, &resized, lambda)?
            };
            out.push(mixed);
            records.push(AugRecord {
                index,
                applied: true,
                lambda: Some(lambda),
                style_index: Some(style_index),
            });
        } else {
            out.push(content.clone());
            records.push(AugRecord {
                index,
                applied: false,
                lambda: None,
                style_index: None,
            });
        }
    }
    Ok((out, records))
}

/// Checks that `augmented` kept the phase of `content`.
///
/// Coefficients participate when both spectra carry amplitude above
/// `tol` times their channel's mean amplitude; at those coefficients the
/// phase difference, wrapped to `(-pi, pi]`, must not exceed 1e-3 in
/// magnitude.
pub fn phase_preservation_check(
    content: &ImageTensor,
    augmented: &ImageTensor,
    tol: f64,
) -> Result<bool, AugmentError> {
    check_shapes(content, augmented)?;
    let (h, w, ch) = (content.height(), content.width(), content.channels());
    let plane = h * w;
    let ap_c = decompose(&fft2d(content));
    let ap_a = decompose(&fft2d(augmented));
    for c in 0..ch {
        let span = c * plane..(c + 1) * plane;
        let amp_c = &ap_c.amplitude()[span.clone()];
        let amp_a = &ap_a.amplitude()[span.clone()];
        let mean_c = amp_c.iter().sum::<f64>() / plane as f64;
        let mean_a = amp_a.iter().sum::<f64>() / plane as f64;
        for i in 0..plane {
            if amp_c[i] > tol * mean_c && amp_a[i] > tol * mean_a {
                let d = ap_a.phase()[span.start + i] - ap_c.phase()[span.start + i];
                let wrapped = d - (d / std::f64::consts::TAU).round() * std::f64::consts::TAU;
                if wrapped.abs() > 1e-3 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
