//! Desk-scale training harness: a synthetic two-domain classification task,
//! a tiny hand-differentiated model, the combined objective
//! `L_total = L_cls + lambda_vmf * L_vmf`, and the four-row ablation matrix
//! over augmentation probability and feature regularization.

pub mod model;
pub mod pca;
pub mod synth;

pub use model::{softmax_cross_entropy, BatchForward, Gradients, ToyModel};
pub use pca::{pca, pca_scatter_export, PcaResult};
pub use synth::{synth_dataset, DomainSplit, DomainStyle, SynthDataset, SynthSpec};

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::augment::{apply_policy, AugPolicy, AugmentError, StylePool};
use crate::image::ImageTensor;
use crate::io::rng::rng_stream;
use crate::io::{IoError, RunConfig};
use crate::vmf::{nll_grad, nll_loss, EmbeddingBatch, UnitVector, VmfClassParams, VmfError};

const STREAM_SHUFFLE: u64 = 0x53_48_46;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad dataset spec: {0}")]
    BadSpec(String),
    #[error("bad model input: {0}")]
    BadModel(String),
    #[error("training diverged at epoch {epoch}, step {step}: non-finite loss")]
    Diverged { epoch: usize, step: usize },
    #[error("hidden feature collapsed to norm {0:.3e} before normalization")]
    DegenerateFeature(f64),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Vmf(#[from] VmfError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Training-loop knobs that are not part of the run configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 64,
            learning_rate: 0.05,
        }
    }
}

/// Per-class vMF parameters plus the bookkeeping for lazy prototype
/// initialization: each prototype starts as a placeholder axis and snaps to
/// the mean of the first batch in which its class appears, before that batch
/// contributes to the loss.
#[derive(Debug, Clone)]
pub struct VmfHead {
    params: Vec<VmfClassParams>,
    seen: Vec<bool>,
}

impl VmfHead {
    pub fn new(
        dim: usize,
        n_classes: usize,
        kappa_init: f64,
        ema_momentum: f64,
    ) -> Result<Self, HarnessError> {
        let mut params = Vec::with_capacity(n_classes);
        for class in 0..n_classes {
            let placeholder = UnitVector::axis(dim, 0)?;
            params.push(VmfClassParams::new(class, placeholder, kappa_init, ema_momentum)?);
        }
        Ok(Self {
            params,
            seen: vec![false; n_classes],
        })
    }

    pub fn params(&self) -> &[VmfClassParams] {
        &self.params
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.kappa()).collect()
    }

    fn class_mean_rows(features: &[f64], labels: &[usize], dim: usize, class: usize) -> Vec<f64> {
        let mut rows = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            if label == class {
                rows.extend_from_slice(&features[i * dim..(i + 1) * dim]);
            }
        }
        rows
    }

    /// Snaps still-uninitialized prototypes of classes present in the batch
    /// to their normalized batch mean.
    pub fn init_unseen(&mut self, features: &[f64], labels: &[usize], dim: usize) {
        for class in 0..self.params.len() {
            if self.seen[class] || !labels.contains(&class) {
                continue;
            }
            let rows = Self::class_mean_rows(features, labels, dim, class);
            let m = (rows.len() / dim) as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|j| rows.chunks_exact(dim).map(|r| r[j]).sum::<f64>() / m)
                .collect();
            if let Ok(mu) = UnitVector::normalize(mean) {
                let kappa_log = self.params[class].log_kappa();
                let momentum = self.params[class].ema_momentum();
                let mut fresh = VmfClassParams::new(class, mu, 1.0, momentum)
                    .expect("unit prototype and valid momentum");
                fresh.set_log_kappa(kappa_log);
                self.params[class] = fresh;
                self.seen[class] = true;
            }
        }
    }

    /// Gradient step on every class's log-concentration.
    pub fn step_log_kappa(&mut self, grads: &[f64], learning_rate: f64) {
        for (p, g) in self.params.iter_mut().zip(grads) {
            p.set_log_kappa(p.log_kappa() - learning_rate * g);
        }
    }

    /// Moves each observed class prototype toward its batch mean.
    pub fn ema_update(&mut self, features: &[f64], labels: &[usize], dim: usize) {
        for class in 0..self.params.len() {
            if !self.seen[class] {
                continue;
            }
            let rows = Self::class_mean_rows(features, labels, dim, class);
            if !rows.is_empty() {
                self.params[class].ema_update(&rows);
            }
        }
    }
}

/// Losses and gradients of the combined objective on one forward pass.
/// `l_cls` and `l_vmf` are batch means; the gradients already include the
/// `lambda_vmf` weighting.
pub struct StepOutput {
    pub l_cls: f64,
    pub l_vmf: f64,
    pub grads: Gradients,
}

/// Both loss terms without any gradient work; used for probes and tests.
pub fn batch_losses(
    fwd: &BatchForward,
    labels: &[usize],
    model: &ToyModel,
    head: &VmfHead,
) -> Result<(f64, f64), HarnessError> {
    let (l_cls, _) = softmax_cross_entropy(&fwd.logits, labels, model.n_classes());
    let batch = EmbeddingBatch::new(model.feature_dim(), fwd.features.clone(), labels.to_vec())?;
    let l_vmf = nll_loss(&batch, head.params())?;
    Ok((l_cls, l_vmf))
}

/// Hand-derived backward pass for the combined objective.
///
/// The classifier and regularizer gradients meet at the normalized feature
/// `z = f / |f|`; the normalization backward is
/// `dL/df = (dL/dz - z (z . dL/dz)) / |f|`, followed by the tanh derivative
/// `1 - f^2` into the linear layer.
pub fn batch_step(
    fwd: &BatchForward,
    labels: &[usize],
    model: &ToyModel,
    head: &VmfHead,
    lambda_vmf: f64,
) -> Result<StepOutput, HarnessError> {
    let d = model.feature_dim();
    let k = model.n_classes();
    let input_dim = model.input_dim();
    let (l_cls, dlogits) = softmax_cross_entropy(&fwd.logits, labels, k);
    let batch = EmbeddingBatch::new(d, fwd.features.clone(), labels.to_vec())?;
    let l_vmf = nll_loss(&batch, head.params())?;
    let vmf_grad = nll_grad(&batch, head.params())?;

    let mut grads = Gradients {
        w1: vec![0.0; d * input_dim],
        b1: vec![0.0; d],
        w2: vec![0.0; k * d],
        log_kappa: vec![0.0; k],
    };
    // d(log kappa) = kappa * d(kappa), weighted like the loss term itself
    for (g, (p, vg)) in grads
        .log_kappa
        .iter_mut()
        .zip(head.params().iter().zip(&vmf_grad.kappa))
    {
        *g = lambda_vmf * p.kappa() * vg;
    }

    for i in 0..fwd.n {
        let z = &fwd.features[i * d..(i + 1) * d];
        let f = &fwd.hidden[i * d..(i + 1) * d];
        let p = &fwd.pooled[i * input_dim..(i + 1) * input_dim];
        let dl = &dlogits[i * k..(i + 1) * k];

        // classifier weights and the classifier's pull on z
        let mut dz = vec![0.0; d];
        for c in 0..k {
            let w2_row = model.w2_row(c);
            for j in 0..d {
                grads.w2[c * d + j] += dl[c] * z[j];
                dz[j] += dl[c] * w2_row[j];
            }
        }
        for (dzj, vg) in dz.iter_mut().zip(&vmf_grad.features[i * d..(i + 1) * d]) {
            *dzj += lambda_vmf * vg;
        }

        // back through the normalization, then tanh
        let radial: f64 = z.iter().zip(&dz).map(|(a, b)| a * b).sum();
        for j in 0..d {
            let df = (dz[j] - z[j] * radial) / fwd.norms[i];
            let da = df * (1.0 - f[j] * f[j]);
            grads.b1[j] += da;
            for (slot, x) in grads.w1[j * input_dim..(j + 1) * input_dim].iter_mut().zip(p) {
                *slot += da * x;
            }
        }
    }
    Ok(StepOutput { l_cls, l_vmf, grads })
}

/// One logged epoch: loss means over the epoch's steps plus the per-class
/// concentrations after the epoch. `l_total` is always computed as
/// `l_cls + lambda_vmf * l_vmf` in exactly that form.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub l_cls: f64,
    pub l_vmf: f64,
    pub l_total: f64,
    pub kappas: Vec<f64>,
}

/// Classification accuracy and feature geometry on one domain.
#[derive(Debug, Clone)]
pub struct DomainMetrics {
    pub accuracy: f64,
    pub compactness: CompactnessReport,
    pub embeddings: EmbeddingBatch,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs: Vec<EpochLog>,
    pub source: DomainMetrics,
    pub shifted: DomainMetrics,
    /// Fraction of samples the augmentation gate fired on over the full run.
    pub applied_fraction: f64,
    pub final_kappas: Vec<f64>,
}

impl TrainReport {
    /// Epoch log as CSV: one row per epoch, kappas in trailing columns.
    pub fn epochs_csv(&self) -> String {
        let k = self.final_kappas.len();
        let mut out = String::from("epoch,l_cls,l_vmf,l_total");
        for class in 0..k {
            let _ = write!(out, ",kappa_{class}");
        }
        out.push('\n');
        for row in &self.epochs {
            let _ = write!(out, "{},{},{},{}", row.epoch, row.l_cls, row.l_vmf, row.l_total);
            for kappa in &row.kappas {
                let _ = write!(out, ",{kappa}");
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable summary block.
    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let last = self.epochs.last();
        let _ = writeln!(out, "epochs: {}", self.epochs.len());
        if let Some(row) = last {
            let _ = writeln!(
                out,
                "final losses: l_cls={:.6} l_vmf={:.6} l_total={:.6}",
                row.l_cls, row.l_vmf, row.l_total
            );
        }
        let _ = writeln!(out, "augmentation applied fraction: {:.4}", self.applied_fraction);
        let _ = writeln!(out, "accuracy: source={:.4} shifted={:.4}", self.source.accuracy, self.shifted.accuracy);
        let _ = writeln!(
            out,
            "intra-class cosine: source={:.4} shifted={:.4}",
            self.source.compactness.mean_intra_cosine, self.shifted.compactness.mean_intra_cosine
        );
        let fmt_angle = |angle: Option<f64>| match angle {
            Some(a) => format!("{a:.2}"),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "min centroid angle (deg): source={} shifted={}",
            fmt_angle(self.source.compactness.min_centroid_angle_deg),
            fmt_angle(self.shifted.compactness.min_centroid_angle_deg)
        );
        let kappas: Vec<String> = self.final_kappas.iter().map(|k| format!("{k:.3}")).collect();
        let _ = writeln!(out, "final kappas: {}", kappas.join(" "));
        out
    }
}

fn mix_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut x = base
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

fn evaluate(model: &ToyModel, split: &DomainSplit) -> Result<DomainMetrics, HarnessError> {
    let fwd = model.forward_images(&split.images)?;
    let predicted = model.predict(&fwd);
    let hits = predicted
        .iter()
        .zip(&split.labels)
        .filter(|(p, l)| p == l)
        .count();
    let embeddings = EmbeddingBatch::new(model.feature_dim(), fwd.features, split.labels.clone())?;
    let compactness = compactness_metrics(&embeddings);
    Ok(DomainMetrics {
        accuracy: hits as f64 / split.labels.len() as f64,
        compactness,
        embeddings,
    })
}

/// Trains the toy model on the source domain of `spec` under `config` and
/// the default [`TrainOptions`]. Image dimensions and class count come from
/// `spec`; `config` supplies the augmentation policy, the regularizer
/// weight, the vMF constants, and the seed.
pub fn train(config: &RunConfig, spec: &SynthSpec) -> Result<TrainReport, HarnessError> {
    train_with(config, spec, &TrainOptions::default())
}

/// [`train`] with explicit loop knobs.
pub fn train_with(
    config: &RunConfig,
    spec: &SynthSpec,
    options: &TrainOptions,
) -> Result<TrainReport, HarnessError> {
    config
        .validate()
        .map_err(|e| HarnessError::BadSpec(e.to_string()))?;
    if options.batch_size == 0 {
        return Err(HarnessError::BadSpec("batch_size must be positive".into()));
    }
    if !options.learning_rate.is_finite() || options.learning_rate < 0.0 {
        return Err(HarnessError::BadSpec("learning_rate must be finite and nonnegative".into()));
    }
    let data = synth_dataset(spec, config.seed)?;
    let mut model = ToyModel::new(
        spec.height,
        spec.width,
        config.feature_dim,
        spec.n_classes,
        config.seed,
    )?;
    let mut head = VmfHead::new(
        config.feature_dim,
        spec.n_classes,
        config.kappa_init,
        config.ema_momentum,
    )?;
    let styles = StylePool::new(data.source.images.clone())?;
    let mut shuffle_rng = rng_stream(config.seed, STREAM_SHUFFLE);
    let n = data.source.images.len();
    let mut order: Vec<usize> = (0..n).collect();
    let lambda_vmf = config.lambda_vmf;

    let mut epochs = Vec::with_capacity(options.epochs);
    let mut applied = 0usize;
    let mut gated = 0usize;
    for epoch in 0..options.epochs {
        // Fisher-Yates, spelled out so the draw order is pinned
        for i in (1..n).rev() {
            let j = shuffle_rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut cls_sum = 0.0;
        let mut vmf_sum = 0.0;
        let mut steps = 0usize;
        for (batch_index, chunk) in order.chunks(options.batch_size).enumerate() {
            let images: Vec<ImageTensor> = chunk
                .iter()
                .map(|&i| data.source.images[i].clone())
                .collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| data.source.labels[i]).collect();
            let policy = AugPolicy::new(
                config.p_aug,
                config.lambda_sampler,
                mix_seed(config.seed, epoch as u64, batch_index as u64),
            )?;
            let (augmented, records) = apply_policy(&images, &styles, &policy)?;
            applied += records.iter().filter(|r| r.applied).count();
            gated += records.len();

            let fwd = model.forward_images(&augmented)?;
            head.init_unseen(&fwd.features, &labels, config.feature_dim);
            let step = batch_step(&fwd, &labels, &model, &head, lambda_vmf)?;
            let step_total = step.l_cls + lambda_vmf * step.l_vmf;
            if !step_total.is_finite() {
                return Err(HarnessError::Diverged { epoch, step: batch_index });
            }
            cls_sum += step.l_cls;
            vmf_sum += step.l_vmf;
            steps += 1;

            model.apply_gradients(&step.grads, options.learning_rate);
            head.step_log_kappa(&step.grads.log_kappa, options.learning_rate);
            head.ema_update(&fwd.features, &labels, config.feature_dim);
        }
        let l_cls = cls_sum / steps as f64;
        let l_vmf = vmf_sum / steps as f64;
        epochs.push(EpochLog {
            epoch,
            l_cls,
            l_vmf,
            l_total: l_cls + lambda_vmf * l_vmf,
            kappas: head.kappas(),
        });
    }

    let source = evaluate(&model, &data.source)?;
    let shifted = evaluate(&model, &data.shifted)?;
    Ok(TrainReport {
        epochs,
        source,
        shifted,
        applied_fraction: if gated == 0 { 0.0 } else { applied as f64 / gated as f64 },
        final_kappas: head.kappas(),
    })
}

/// Feature-space geometry of a labeled batch of unit vectors.
#[derive(Debug, Clone)]
pub struct CompactnessReport {
    /// Mean pairwise cosine within each class; `None` for classes with fewer
    /// than two samples, which are excluded from the summary mean.
    pub per_class_cosine: Vec<Option<f64>>,
    /// Mean of the per-class cosines over included classes.
    pub mean_intra_cosine: f64,
    /// Smallest angle between any two class centroids, in degrees; `None`
    /// when fewer than two classes have a usable centroid.
    pub min_centroid_angle_deg: Option<f64>,
    /// Classes excluded for having fewer than two samples.
    pub excluded_classes: Vec<usize>,
}

/// Intra-class mean pairwise cosine and inter-class centroid angles.
///
/// The pairwise cosine over a class with rows `z_i` uses the resultant
/// identity `sum_{i != j} z_i . z_j = |sum z_i|^2 - n`, so no quadratic pair
/// loop is needed.
pub fn compactness_metrics(batch: &EmbeddingBatch) -> CompactnessReport {
    let d = batch.dim();
    let n_classes = batch.labels().iter().copied().max().map_or(0, |m| m + 1);
    let mut per_class_cosine = Vec::with_capacity(n_classes);
    let mut excluded = Vec::new();
    let mut centroids: Vec<Option<Vec<f64>>> = Vec::with_capacity(n_classes);
    for class in 0..n_classes {
        let rows = batch.class_rows(class);
        let m = rows.len() / d;
        if m == 0 {
            per_class_cosine.push(None);
            excluded.push(class);
            centroids.push(None);
            continue;
        }
        let mut resultant = vec![0.0; d];
        for row in rows.chunks_exact(d) {
            for (r, x) in resultant.iter_mut().zip(row) {
                *r += x;
            }
        }
        let norm_sq: f64 = resultant.iter().map(|v| v * v).sum();
        let norm = norm_sq.sqrt();
        centroids.push(if norm < 1e-12 {
            None
        } else {
            Some(resultant.iter().map(|v| v / norm).collect())
        });
        if m < 2 {
            per_class_cosine.push(None);
            excluded.push(class);
        } else {
            let m = m as f64;
            per_class_cosine.push(Some((norm_sq - m) / (m * (m - 1.0))));
        }
    }
    let included: Vec<f64> = per_class_cosine.iter().flatten().copied().collect();
    let mean_intra_cosine = if included.is_empty() {
        f64::NAN
    } else {
        included.iter().sum::<f64>() / included.len() as f64
    };
    let mut min_angle: Option<f64> = None;
    for i in 0..n_classes {
        for j in i + 1..n_classes {
            if let (Some(a), Some(b)) = (&centroids[i], &centroids[j]) {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let angle = dot.clamp(-1.0, 1.0).acos().to_degrees();
                min_angle = Some(min_angle.map_or(angle, |m: f64| m.min(angle)));
            }
        }
    }
    CompactnessReport {
        per_class_cosine,
        mean_intra_cosine,
        min_centroid_angle_deg: min_angle,
        excluded_classes: excluded,
    }
}

/// One configuration row of the ablation matrix.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub name: &'static str,
    pub p_aug: f64,
    pub vmf_enabled: bool,
    pub reports: Vec<TrainReport>,
    pub mean_shifted_accuracy: f64,
    pub sd_shifted_accuracy: f64,
    pub mean_intra_cosine: f64,
    pub sd_intra_cosine: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// The four-row configuration sweep: no augmentation, always-on
/// augmentation, always-on plus the vMF term, and gated augmentation plus
/// the vMF term. Each row trains once per seed `base.seed .. base.seed + n`.
/// Intra-class cosine is reported on the source domain.
pub fn ablation_matrix(
    base: &RunConfig,
    spec: &SynthSpec,
    n_seeds: usize,
    options: &TrainOptions,
) -> Result<Vec<AblationRow>, HarnessError> {
    if n_seeds == 0 {
        return Err(HarnessError::BadSpec("need at least one seed".into()));
    }
    let rows: [(&'static str, f64, bool); 4] = [
        ("baseline", 0.0, false),
        ("p1.0", 1.0, false),
        ("p1.0+vmf", 1.0, true),
        ("p0.5+vmf", 0.5, true),
    ];
    let mut out = Vec::with_capacity(rows.len());
    for (name, p_aug, vmf_enabled) in rows {
        let mut reports = Vec::with_capacity(n_seeds);
        for s in 0..n_seeds {
            let mut config = base.clone();
            config.p_aug = p_aug;
            config.lambda_vmf = if vmf_enabled { base.lambda_vmf } else { 0.0 };
            config.seed = base.seed.wrapping_add(s as u64);
            reports.push(train_with(&config, spec, options)?);
        }
        let accuracies: Vec<f64> = reports.iter().map(|r| r.shifted.accuracy).collect();
        let cosines: Vec<f64> = reports
            .iter()
            .map(|r| r.source.compactness.mean_intra_cosine)
            .collect();
        let (mean_shifted_accuracy, sd_shifted_accuracy) = mean_sd(&accuracies);
        let (mean_intra_cosine, sd_intra_cosine) = mean_sd(&cosines);
        out.push(AblationRow {
            name,
            p_aug,
            vmf_enabled,
            reports,
            mean_shifted_accuracy,
            sd_shifted_accuracy,
            mean_intra_cosine,
            sd_intra_cosine,
        });
    }
    Ok(out)
}

/// Ablation summary as CSV: one row per configuration.
pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(
        "name,p_aug,vmf,seeds,shifted_accuracy_mean,shifted_accuracy_sd,intra_cosine_mean,intra_cosine_sd\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.name,
            row.p_aug,
            row.vmf_enabled,
            row.reports.len(),
            row.mean_shifted_accuracy,
            row.sd_shifted_accuracy,
            row.mean_intra_cosine,
            row.sd_intra_cosine
        );
    }
    out
}
