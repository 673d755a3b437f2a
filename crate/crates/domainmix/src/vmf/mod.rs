//! The von Mises-Fisher distribution on the unit hypersphere.
//!
//! Density `p(z | mu, kappa) = C_d(kappa) exp(kappa mu . z)` for unit vectors
//! `z`, with mean direction `mu` and concentration `kappa >= 0`; `kappa -> 0`
//! approaches the uniform sphere distribution and large `kappa` concentrates
//! mass near `mu`. The normalization constant
//! `C_d(kappa) = kappa^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(kappa))` is only ever
//! handled in log form (see [`bessel`]) so dimensions in the hundreds stay
//! finite.
//!
//! Class prototypes keep `mu` under an exponential moving average while
//! `kappa` is a learnable parameter stored as `log kappa`, bounded to
//! `[KAPPA_MIN, KAPPA_MAX]`. The NLL loss over a labeled batch of unit
//! features, its analytic gradients, a maximum likelihood fitter, and a
//! rejection sampler complete the toolbox.

pub mod bessel;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use thiserror::Error;

use crate::io::emb::EmbFile;
use crate::io::rng::RandomStream;
use bessel::{bessel_i_ratio, log_bessel_i};

pub const KAPPA_MIN: f64 = 1e-4;
pub const KAPPA_MAX: f64 = 1e5;
/// Default initial concentration for freshly created class parameters.
pub const KAPPA_INIT: f64 = 10.0;
/// Default EMA momentum for prototype updates.
pub const EMA_MOMENTUM: f64 = 0.99;

/// Unit-norm tolerance shared by [`UnitVector`] and [`EmbeddingBatch`].
pub const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum VmfError {
    #[error("dimension must be at least 2, got {0}")]
    BadDim(usize),
    #[error("concentration must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error("EMA momentum must lie in [0, 1], got {0}")]
    BadMomentum(f64),
    #[error("vector norm {norm} is not within {UNIT_TOL} of 1 (row {row})")]
    NotUnit { row: usize, norm: f64 },
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("label {label} has no registered class parameters ({classes} classes)")]
    UnknownLabel { label: usize, classes: usize },
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("resultant vector is numerically zero; direction is undefined")]
    DegenerateResultant,
    #[error("log normalization constant is not finite for dim={dim}, kappa={kappa}")]
    NumericalRange { dim: usize, kappa: f64 },
    #[error("feature length {len} is not a multiple of dim {dim}")]
    RaggedRows { len: usize, dim: usize },
    #[error("labels length {labels} does not match row count {rows}")]
    LabelCount { labels: usize, rows: usize },
}

/// A vector on the unit sphere in `R^d`, `d >= 2`, with norm within
/// [`UNIT_TOL`] of one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    values: Vec<f64>,
}

impl UnitVector {
    pub fn new(values: Vec<f64>) -> Result<Self, VmfError> {
        if values.len() < 2 {
            return Err(VmfError::BadDim(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VmfError::NonFinite(0));
        }
        let norm = norm2(&values);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(VmfError::NotUnit { row: 0, norm });
        }
        Ok(Self { values })
    }

    /// Scales an arbitrary vector onto the sphere; errors on dimension < 2,
    /// non-finite input, or a numerically zero norm.
    pub fn normalize(mut values: Vec<f64>) -> Result<Self, VmfError> {
        if values.len() < 2 {
            return Err(VmfError::BadDim(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(VmfError::NonFinite(0));
        }
        let norm = norm2(&values);
        if norm < 1e-12 {
            return Err(VmfError::DegenerateResultant);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self { values })
    }

    /// Unit vector along coordinate `axis`.
    pub fn axis(dim: usize, axis: usize) -> Result<Self, VmfError> {
        if dim < 2 {
            return Err(VmfError::BadDim(dim));
        }
        assert!(axis < dim, "axis {axis} out of range for dim {dim}");
        let mut values = vec![0.0; dim];
        values[axis] = 1.0;
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.values, other)
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Per-class vMF parameters: EMA-maintained mean direction and learnable
/// concentration stored as `log kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct VmfClassParams {
    class_id: usize,
    mu: UnitVector,
    log_kappa: f64,
    ema_momentum: f64,
}

impl VmfClassParams {
    pub fn new(
        class_id: usize,
        mu: UnitVector,
        kappa: f64,
        ema_momentum: f64,
    ) -> Result<Self, VmfError> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(VmfError::BadKappa(kappa));
        }
        if !(0.0..=1.0).contains(&ema_momentum) {
            return Err(VmfError::BadMomentum(ema_momentum));
        }
        Ok(Self {
            class_id,
            mu,
            log_kappa: kappa.clamp(KAPPA_MIN, KAPPA_MAX).ln(),
            ema_momentum,
        })
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn mu(&self) -> &UnitVector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.log_kappa.exp()
    }

    pub fn log_kappa(&self) -> f64 {
        self.log_kappa
    }

    pub fn ema_momentum(&self) -> f64 {
        self.ema_momentum
    }

    /// Sets `log kappa`, clamping so `kappa` stays in
    /// `[KAPPA_MIN, KAPPA_MAX]`. This is the hook for gradient steps on the
    /// unconstrained parameterization.
    pub fn set_log_kappa(&mut self, log_kappa: f64) {
        self.log_kappa = log_kappa.clamp(KAPPA_MIN.ln(), KAPPA_MAX.ln());
    }

    /// Moves the prototype toward the mean of `features` (row-major unit
    /// rows): `mu <- normalize(momentum * mu + (1 - momentum) * mean)`.
    /// Concentration is untouched. Momentum 1 leaves `mu` bit-identical, and
    /// a blended vector with norm below 1e-12 (degenerate cancellation) makes
    /// the update a no-op.
    pub fn ema_update(&mut self, features: &[f64]) {
        let d = self.mu.dim();
        assert!(
            !features.is_empty() && features.len() % d == 0,
            "features must be a nonempty multiple of dim {d}"
        );
        if self.ema_momentum == 1.0 {
            return;
        }
        let m = (features.len() / d) as f64;
        let mut v = vec![0.0; d];
        for row in features.chunks_exact(d) {
            for (vi, xi) in v.iter_mut().zip(row) {
                *vi += xi;
            }
        }
        for vi in &mut v {
            *vi /= m;
        }
        let mom = self.ema_momentum;
        let mut w = vec![0.0; d];
        for i in 0..d {
            w[i] = mom * self.mu.values[i] + (1.0 - mom) * v[i];
        }
        let norm = norm2(&w);
        if norm < 1e-12 {
            return;
        }
        for wi in &mut w {
            *wi /= norm;
        }
        self.mu = UnitVector { values: w };
    }
}

/// `n` unit-norm feature rows with class labels in `[0, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl EmbeddingBatch {
    pub fn new(dim: usize, features: Vec<f64>, labels: Vec<usize>) -> Result<Self, VmfError> {
        if dim < 2 {
            return Err(VmfError::BadDim(dim));
        }
        if features.len() % dim != 0 {
            return Err(VmfError::RaggedRows {
                len: features.len(),
                dim,
            });
        }
        let rows = features.len() / dim;
        if rows == 0 {
            return Err(VmfError::EmptyBatch);
        }
        if labels.len() != rows {
            return Err(VmfError::LabelCount {
                labels: labels.len(),
                rows,
            });
        }
        for (row, chunk) in features.chunks_exact(dim).enumerate() {
            if chunk.iter().any(|v| !v.is_finite()) {
                return Err(VmfError::NonFinite(row));
            }
            let norm = norm2(chunk);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(VmfError::NotUnit { row, norm });
            }
        }
        Ok(Self {
            dim,
            features,
            labels,
        })
    }

    /// Builds a batch without the unit-norm check. Intended for probes that
    /// deliberately perturb rows off the sphere, such as finite-difference
    /// gradient verification.
    pub fn new_unchecked(dim: usize, features: Vec<f64>, labels: Vec<usize>) -> Self {
        assert!(dim >= 2 && !labels.is_empty());
        assert_eq!(features.len(), labels.len() * dim);
        Self {
            dim,
            features,
            labels,
        }
    }

    pub fn from_emb_file(file: &EmbFile) -> Result<Self, VmfError> {
        Self::new(
            file.dim,
            file.features.clone(),
            file.labels.iter().map(|&l| l as usize).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Concatenated rows belonging to `class`.
    pub fn class_rows(&self, class: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l == class {
                out.extend_from_slice(self.row(i));
            }
        }
        out
    }
}

/// `log C_d(kappa)`, the log normalization constant:
/// `(d/2 - 1) ln kappa - (d/2) ln(2 pi) - ln I_{d/2-1}(kappa)`.
///
/// Finite for every `2 <= d <= 4096` and `0 < kappa <= 1e5`; a non-finite
/// result outside that envelope is reported as an error.
pub fn log_norm_const(dim: usize, kappa: f64) -> Result<f64, VmfError> {
    if dim < 2 {
        return Err(VmfError::BadDim(dim));
    }
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(VmfError::BadKappa(kappa));
    }
    let half = dim as f64 / 2.0;
    let value = (half - 1.0) * kappa.ln()
        - half * std::f64::consts::TAU.ln()
        - log_bessel_i(half - 1.0, kappa);
    if !value.is_finite() {
        return Err(VmfError::NumericalRange { dim, kappa });
    }
    Ok(value)
}

/// The Bessel ratio `A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa)`, which is
/// both `-d/dkappa log C_d(kappa)` and the expected cosine between a draw and
/// the mean direction. Lies strictly inside `(0, 1)` and increases in `kappa`.
pub fn mean_resultant(dim: usize, kappa: f64) -> Result<f64, VmfError> {
    if dim < 2 {
        return Err(VmfError::BadDim(dim));
    }
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(VmfError::BadKappa(kappa));
    }
    Ok(bessel_i_ratio(dim as f64 / 2.0 - 1.0, kappa))
}

/// Log-density `log C_d(kappa) + kappa (mu . z)` of a unit vector under the
/// class parameters.
pub fn log_pdf(z: &[f64], params: &VmfClassParams) -> Result<f64, VmfError> {
    if z.len() != params.mu.dim() {
        return Err(VmfError::DimMismatch {
            expected: params.mu.dim(),
            got: z.len(),
        });
    }
    let kappa = params.kappa();
    Ok(log_norm_const(params.mu.dim(), kappa)? + kappa * params.mu.dot(z))
}

fn check_batch_params(
    batch: &EmbeddingBatch,
    params: &[VmfClassParams],
) -> Result<(), VmfError> {
    for p in params {
        if p.mu.dim() != batch.dim() {
            return Err(VmfError::DimMismatch {
                expected: batch.dim(),
                got: p.mu.dim(),
            });
        }
    }
    for &l in batch.labels() {
        if l >= params.len() {
            return Err(VmfError::UnknownLabel {
                label: l,
                classes: params.len(),
            });
        }
    }
    Ok(())
}

/// Mean negative log-likelihood of the batch, with `params[k]` serving label
/// `k`.
pub fn nll_loss(batch: &EmbeddingBatch, params: &[VmfClassParams]) -> Result<f64, VmfError> {
    check_batch_params(batch, params)?;
    let log_c: Vec<f64> = params
        .iter()
        .map(|p| log_norm_const(batch.dim(), p.kappa()))
        .collect::<Result<_, _>>()?;
    let mut sum = 0.0;
    for (i, &label) in batch.labels().iter().enumerate() {
        let p = &params[label];
        sum -= log_c[label] + p.kappa() * p.mu.dot(batch.row(i));
    }
    Ok(sum / batch.n() as f64)
}

/// Gradients of [`nll_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct VmfGrad {
    /// `n x d` ambient-space gradient with respect to each feature row:
    /// `-(kappa_k / n) mu_k`. Callers that keep features exactly unit-norm
    /// should project out the radial component before stepping and
    /// renormalize afterward.
    pub features: Vec<f64>,
    /// Per-class gradient with respect to `kappa`:
    /// `(1/n) sum_{i: y_i = k} (A_d(kappa_k) - mu_k . z_i)`. Classes with no
    /// samples in the batch get zero.
    pub kappa: Vec<f64>,
}

/// Analytic gradients of the mean NLL with respect to features and per-class
/// concentrations. The prototype `mu` receives no gradient; it is maintained
/// by EMA.
pub fn nll_grad(batch: &EmbeddingBatch, params: &[VmfClassParams]) -> Result<VmfGrad, VmfError> {
    check_batch_params(batch, params)?;
    let n = batch.n() as f64;
    let d = batch.dim();
    let ratio: Vec<f64> = params
        .iter()
        .map(|p| mean_resultant(d, p.kappa()))
        .collect::<Result<_, _>>()?;
    let mut grad_features = vec![0.0; batch.n() * d];
    let mut grad_kappa = vec![0.0; params.len()];
    for (i, &label) in batch.labels().iter().enumerate() {
        let p = &params[label];
        let kappa = p.kappa();
        let out = &mut grad_features[i * d..(i + 1) * d];
        for (g, m) in out.iter_mut().zip(p.mu.values()) {
            *g = -(kappa / n) * m;
        }
        grad_kappa[label] += (ratio[label] - p.mu.dot(batch.row(i))) / n;
    }
    Ok(VmfGrad {
        features: grad_features,
        kappa: grad_kappa,
    })
}

/// Maximum likelihood estimate from unit rows of a single class:
/// `mu_hat = normalize(sum z_i)` and the standard concentration approximation
/// `kappa_hat = R (d - R^2) / (1 - R^2)` with `R` the mean resultant length,
/// capped at [`KAPPA_MAX`].
pub fn fit(features: &[f64], dim: usize) -> Result<(UnitVector, f64), VmfError> {
    if dim < 2 {
        return Err(VmfError::BadDim(dim));
    }
    if features.len() % dim != 0 {
        return Err(VmfError::RaggedRows {
            len: features.len(),
            dim,
        });
    }
    let n = features.len() / dim;
    if n < 2 {
        return Err(VmfError::TooFewSamples(n));
    }
    let mut resultant = vec![0.0; dim];
    for row in features.chunks_exact(dim) {
        for (r, x) in resultant.iter_mut().zip(row) {
            *r += x;
        }
    }
    let norm = norm2(&resultant);
    if norm < 1e-12 {
        return Err(VmfError::DegenerateResultant);
    }
    let mu = UnitVector::normalize(resultant)?;
    let r_bar = norm / n as f64;
    let kappa = if r_bar >= 1.0 - 1e-12 {
        KAPPA_MAX
    } else {
        (r_bar * (dim as f64 - r_bar * r_bar) / (1.0 - r_bar * r_bar)).min(KAPPA_MAX)
    };
    Ok((mu, kappa))
}

/// Draws one `w = mu . z` marginal value by Wood's rejection scheme.
fn sample_w(dim: usize, kappa: f64, rng: &mut RandomStream) -> f64 {
    let dm1 = (dim - 1) as f64;
    // b is algebraically (-2 kappa + sqrt(4 kappa^2 + (d-1)^2)) / (d-1),
    // rearranged to avoid cancellation at large kappa
    let b = dm1 / ((4.0 * kappa * kappa + dm1 * dm1).sqrt() + 2.0 * kappa);
    let x0 = (1.0 - b) / (1.0 + b);
    let c = kappa * x0 + dm1 * (1.0 - x0 * x0).max(f64::MIN_POSITIVE).ln();
    let beta = Beta::new(dm1 / 2.0, dm1 / 2.0).expect("shape parameters are positive");
    for _ in 0..10_000_000u64 {
        let z: f64 = beta.sample(rng);
        let u: f64 = rng.random();
        let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        let accept = kappa * w + dm1 * (1.0 - x0 * w).max(f64::MIN_POSITIVE).ln() - c;
        if accept >= u.ln() {
            return w.clamp(-1.0, 1.0);
        }
    }
    unreachable!("rejection sampler exceeded its iteration budget");
}

/// `n` i.i.d. draws from vMF(`mu`, `kappa`), returned as `n x d` row-major
/// unit vectors.
///
/// Uses the tangent-normal decomposition: the cosine `w` to the mean comes
/// from Wood's rejection sampler, the tangent direction is uniform on the
/// `(d-2)`-sphere, and a Householder reflection carries the north pole onto
/// `mu`.
pub fn sample(mu: &UnitVector, kappa: f64, n: usize, rng: &mut RandomStream) -> Vec<f64> {
    assert!(kappa > 0.0 && kappa.is_finite(), "kappa must be positive");
    let d = mu.dim();
    // Householder vector u = e1 - mu maps e1 to mu (skipped when mu == e1)
    let mut house = vec![0.0; d];
    house[0] = 1.0 - mu.values()[0];
    for i in 1..d {
        house[i] = -mu.values()[i];
    }
    let house_sq = dot(&house, &house);
    let mut out = Vec::with_capacity(n * d);
    let mut row = vec![0.0; d];
    for _ in 0..n {
        let w = sample_w(d, kappa, rng);
        // uniform tangent direction on the (d-2)-sphere
        let mut tangent = vec![0.0; d - 1];
        loop {
            for t in tangent.iter_mut() {
                *t = rng.sample(StandardNormal);
            }
            let tn = norm2(&tangent);
            if tn > 1e-12 {
                for t in tangent.iter_mut() {
                    *t /= tn;
                }
                break;
            }
        }
        let sine = (1.0 - w * w).max(0.0).sqrt();
        row[0] = w;
        for i in 1..d {
            row[i] = sine * tangent[i - 1];
        }
        if house_sq > 1e-24 {
            let proj = 2.0 * dot(&house, &row) / house_sq;
            for i in 0..d {
                row[i] -= proj * house[i];
            }
        }
        let rn = norm2(&row);
        for v in &mut row {
            *v /= rn;
        }
        out.extend_from_slice(&row);
    }
    out
}
