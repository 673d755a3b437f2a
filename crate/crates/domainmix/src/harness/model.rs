//! Tiny fixed-architecture classifier: adaptive 6x6 average pooling, one
//! tanh layer, L2 normalization onto the unit sphere, and a bias-free linear
//! classifier over the normalized feature. Gradients are hand-derived (the
//! normalization layer included) and finite-difference checked in the tests.

use rand::Rng;
use rand_distr::StandardNormal;

use super::HarnessError;
use crate::image::ImageTensor;
use crate::io::rng::rng_stream;

/// Pooling grid side; input images collapse to `GRID x GRID x 3` values.
pub const POOL_GRID: usize = 6;

const STREAM_MODEL_INIT: u64 = 0x4d_4f_44;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    height: usize,
    width: usize,
    input_dim: usize,
    feature_dim: usize,
    n_classes: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
}

/// Cached intermediate values for a batch of `n` inputs; everything is
/// row-major with one row per sample.
#[derive(Debug, Clone)]
pub struct BatchForward {
    pub pooled: Vec<f64>,
    /// tanh activations, before normalization
    pub hidden: Vec<f64>,
    /// Euclidean norm of each hidden row
    pub norms: Vec<f64>,
    /// unit-norm features
    pub features: Vec<f64>,
    pub logits: Vec<f64>,
    pub n: usize,
}

/// Gradient of the total objective with respect to every trainable value.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    /// per-class gradient with respect to log kappa
    pub log_kappa: Vec<f64>,
}

impl ToyModel {
    pub fn new(
        height: usize,
        width: usize,
        feature_dim: usize,
        n_classes: usize,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        if height < POOL_GRID || width < POOL_GRID {
            return Err(HarnessError::BadModel(format!(
                "images must be at least {POOL_GRID}x{POOL_GRID}"
            )));
        }
        if feature_dim < 2 {
            return Err(HarnessError::BadModel("feature_dim must be at least 2".into()));
        }
        if n_classes < 2 {
            return Err(HarnessError::BadModel("need at least 2 classes".into()));
        }
        let input_dim = POOL_GRID * POOL_GRID * 3;
        let mut rng = rng_stream(seed, STREAM_MODEL_INIT);
        let s1 = (input_dim as f64).sqrt().recip();
        let w1 = (0..feature_dim * input_dim)
            .map(|_| s1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let s2 = (feature_dim as f64).sqrt().recip();
        let w2 = (0..n_classes * feature_dim)
            .map(|_| s2 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Self {
            height,
            width,
            input_dim,
            feature_dim,
            n_classes,
            w1,
            b1: vec![0.0; feature_dim],
            w2,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Trainable values, exposed for probing and finite-difference checks.
    pub fn weights_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64]) {
        (&mut self.w1, &mut self.b1, &mut self.w2)
    }

    /// Classifier weights for one class.
    pub fn w2_row(&self, class: usize) -> &[f64] {
        &self.w2[class * self.feature_dim..(class + 1) * self.feature_dim]
    }

    /// Average-pools an image onto the fixed grid, all channels interleaved
    /// per cell. Cell boundaries split the image as evenly as possible.
    pub fn pool(&self, image: &ImageTensor) -> Result<Vec<f64>, HarnessError> {
        if image.height() != self.height || image.width() != self.width || image.channels() != 3 {
            return Err(HarnessError::BadModel(format!(
                "expected a {}x{}x3 image, got {}x{}x{}",
                self.height,
                self.width,
                image.height(),
                image.width(),
                image.channels()
            )));
        }
        let mut out = vec![0.0; self.input_dim];
        for gy in 0..POOL_GRID {
            let y0 = gy * self.height / POOL_GRID;
            let y1 = (gy + 1) * self.height / POOL_GRID;
            for gx in 0..POOL_GRID {
                let x0 = gx * self.width / POOL_GRID;
                let x1 = (gx + 1) * self.width / POOL_GRID;
                let area = ((y1 - y0) * (x1 - x0)) as f64;
                for c in 0..3 {
                    let mut sum = 0.0;
                    for y in y0..y1 {
                        for x in x0..x1 {
                            sum += image.get(y, x, c);
                        }
                    }
                    out[(gy * POOL_GRID + gx) * 3 + c] = sum / area;
                }
            }
        }
        Ok(out)
    }

    /// Pools every image and runs the batch forward pass.
    pub fn forward_images(&self, images: &[ImageTensor]) -> Result<BatchForward, HarnessError> {
        let mut pooled = Vec::with_capacity(images.len() * self.input_dim);
        for image in images {
            pooled.extend(self.pool(image)?);
        }
        self.forward_pooled(pooled)
    }

    /// Forward pass over already-pooled rows.
    pub fn forward_pooled(&self, pooled: Vec<f64>) -> Result<BatchForward, HarnessError> {
        assert!(
            !pooled.is_empty() && pooled.len() % self.input_dim == 0,
            "pooled batch must be a nonempty multiple of the input dim"
        );
        let n = pooled.len() / self.input_dim;
        let d = self.feature_dim;
        let k = self.n_classes;
        let mut hidden = vec![0.0; n * d];
        let mut norms = vec![0.0; n];
        let mut features = vec![0.0; n * d];
        let mut logits = vec![0.0; n * k];
        for i in 0..n {
            let p = &pooled[i * self.input_dim..(i + 1) * self.input_dim];
            for j in 0..d {
                let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
                let a: f64 = row.iter().zip(p).map(|(w, x)| w * x).sum::<f64>() + self.b1[j];
                hidden[i * d + j] = a.tanh();
            }
            let f = &hidden[i * d..(i + 1) * d];
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(HarnessError::DegenerateFeature(norm));
            }
            norms[i] = norm;
            for j in 0..d {
                features[i * d + j] = f[j] / norm;
            }
            let z = &features[i * d..(i + 1) * d];
            for c in 0..k {
                let row = &self.w2[c * d..(c + 1) * d];
                logits[i * k + c] = row.iter().zip(z).map(|(w, x)| w * x).sum();
            }
        }
        Ok(BatchForward {
            pooled,
            hidden,
            norms,
            features,
            logits,
            n,
        })
    }

    /// Predicted class per sample: argmax over logits, first index on ties.
    pub fn predict(&self, fwd: &BatchForward) -> Vec<usize> {
        let k = self.n_classes;
        (0..fwd.n)
            .map(|i| {
                let row = &fwd.logits[i * k..(i + 1) * k];
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    /// One SGD step: `w -= lr * g` for every weight. Log-kappa gradients are
    /// applied by the training loop, which owns the class parameters.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        for (w, g) in self.w1.iter_mut().zip(&grads.w1) {
            *w -= learning_rate * g;
        }
        for (w, g) in self.b1.iter_mut().zip(&grads.b1) {
            *w -= learning_rate * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grads.w2) {
            *w -= learning_rate * g;
        }
    }
}

/// Mean softmax cross-entropy and its gradient with respect to the logits
/// (already divided by the batch size).
pub fn softmax_cross_entropy(
    logits: &[f64],
    labels: &[usize],
    n_classes: usize,
) -> (f64, Vec<f64>) {
    let n = labels.len();
    assert_eq!(logits.len(), n * n_classes, "logit rows must match labels");
    let mut loss = 0.0;
    let mut dlogits = vec![0.0; logits.len()];
    for (i, &label) in labels.iter().enumerate() {
        let row = &logits[i * n_classes..(i + 1) * n_classes];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_sum = max + sum_exp.ln();
        loss += log_sum - row[label];
        let out = &mut dlogits[i * n_classes..(i + 1) * n_classes];
        for (c, &v) in row.iter().enumerate() {
            out[c] = (v - log_sum).exp() / n as f64;
        }
        out[label] -= 1.0 / n as f64;
    }
    (loss / n as f64, dlogits)
}
