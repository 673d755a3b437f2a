//! Principal-component scatter plots via power iteration with deflation,
//! exported as an SVG (one circle per sample, colored by class) plus a CSV
//! of the projected coordinates.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::HarnessError;
use crate::io::rng::rng_stream;
use crate::io::IoError;
use crate::vmf::EmbeddingBatch;

const POWER_ITERATIONS: usize = 10_000;
const STREAM_PCA_START: u64 = 0x50_43_41;

/// Top-`k` principal directions of a centered sample.
#[derive(Debug, Clone)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// Descending covariance eigenvalues, one per component.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm component rows, each of length `d`.
    pub components: Vec<Vec<f64>>,
    /// True when the data had (numerically) no variance to decompose; the
    /// components then fall back to coordinate axes.
    pub degenerate: bool,
}

fn covariance(features: &[f64], n: usize, d: usize, mean: &[f64]) -> Vec<f64> {
    let mut cov = vec![0.0; d * d];
    for row in features.chunks_exact(d) {
        for i in 0..d {
            let ci = row[i] - mean[i];
            for j in 0..d {
                cov[i * d + j] += ci * (row[j] - mean[j]);
            }
        }
    }
    for v in &mut cov {
        *v /= n as f64;
    }
    cov
}

fn mat_vec(m: &[f64], v: &[f64], d: usize) -> Vec<f64> {
    (0..d)
        .map(|i| m[i * d..(i + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Dominant eigenpair of a symmetric matrix, or `None` when the matrix is
/// numerically zero.
fn power_iteration(cov: &[f64], d: usize, start_stream: u64) -> Option<(f64, Vec<f64>)> {
    let mut rng = rng_stream(0, STREAM_PCA_START + start_stream);
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    let mut eigenvalue = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = mat_vec(cov, &v, d);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return None;
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let overlap: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = next;
        eigenvalue = {
            let cv = mat_vec(cov, &v, d);
            v.iter().zip(&cv).map(|(a, b)| a * b).sum()
        };
        if 1.0 - overlap.abs() < 1e-15 {
            break;
        }
    }
    Some((eigenvalue, v))
}

/// Top-`k` principal components of `n` rows of dimension `d`.
pub fn pca(features: &[f64], n: usize, d: usize, k: usize) -> Result<PcaResult, HarnessError> {
    if n == 0 || d == 0 || features.len() != n * d {
        return Err(HarnessError::BadModel(format!(
            "pca expects n*d feature values, got {} for {n}x{d}",
            features.len()
        )));
    }
    let k = k.min(d);
    let mut mean = vec![0.0; d];
    for row in features.chunks_exact(d) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = covariance(features, n, d, &mean);
    let scale = cov.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let mut eigenvalues = Vec::with_capacity(k);
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut degenerate = false;
    for c in 0..k {
        let pair = if scale > 0.0 {
            power_iteration(&cov, d, c as u64)
        } else {
            None
        };
        match pair {
            Some((value, vector)) => {
                for i in 0..d {
                    for j in 0..d {
                        cov[i * d + j] -= value * vector[i] * vector[j];
                    }
                }
                eigenvalues.push(value.max(0.0));
                components.push(vector);
            }
            None => {
                // no variance left; fall back to a coordinate axis
                degenerate = true;
                let mut axis = vec![0.0; d];
                axis[c] = 1.0;
                eigenvalues.push(0.0);
                components.push(axis);
            }
        }
    }
    Ok(PcaResult {
        mean,
        eigenvalues,
        components,
        degenerate,
    })
}

impl PcaResult {
    /// Projects rows onto the components; output is `n x k` row-major.
    pub fn project(&self, features: &[f64], d: usize) -> Vec<f64> {
        let k = self.components.len();
        let mut out = Vec::with_capacity(features.len() / d * k);
        for row in features.chunks_exact(d) {
            for component in &self.components {
                let coord: f64 = row
                    .iter()
                    .zip(component)
                    .zip(&self.mean)
                    .map(|((x, c), m)| (x - m) * c)
                    .sum();
                out.push(coord);
            }
        }
        out
    }
}

const PALETTE: [&str; 8] = [
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#eeca3b", "#b279a2", "#9d755d",
];

const PLOT_SIZE: f64 = 640.0;
const PLOT_MARGIN: f64 = 40.0;

fn svg_scatter(coords: &[f64], labels: &[usize]) -> String {
    let n = labels.len();
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for pair in coords.chunks_exact(2) {
        min_x = min_x.min(pair[0]);
        max_x = max_x.max(pair[0]);
        min_y = min_y.min(pair[1]);
        max_y = max_y.max(pair[1]);
    }
    let span_x = (max_x - min_x).max(1e-12);
    let span_y = (max_y - min_y).max(1e-12);
    let inner = PLOT_SIZE - 2.0 * PLOT_MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_SIZE}\" height=\"{PLOT_SIZE}\" viewBox=\"0 0 {PLOT_SIZE} {PLOT_SIZE}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{PLOT_SIZE}\" height=\"{PLOT_SIZE}\" fill=\"white\"/>");
    for i in 0..n {
        let x = PLOT_MARGIN + (coords[2 * i] - min_x) / span_x * inner;
        // SVG y grows downward; flip so larger coordinates plot higher
        let y = PLOT_SIZE - PLOT_MARGIN - (coords[2 * i + 1] - min_y) / span_y * inner;
        let color = PALETTE[labels[i] % PALETTE.len()];
        let _ = writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn coords_csv(coords: &[f64], labels: &[usize]) -> String {
    let mut csv = String::from("x,y,label\n");
    for (pair, label) in coords.chunks_exact(2).zip(labels) {
        let _ = writeln!(csv, "{},{},{label}", pair[0], pair[1]);
    }
    csv
}

/// Projects a batch onto its top-2 principal directions and writes
/// `<prefix>.svg` and `<prefix>.csv`. Returns the decomposition so callers
/// can inspect eigenvalues or the degeneracy flag.
pub fn pca_scatter_export(
    batch: &EmbeddingBatch,
    prefix: &Path,
) -> Result<PcaResult, HarnessError> {
    if batch.n() < 3 {
        return Err(HarnessError::BadModel(format!(
            "scatter export needs at least 3 samples, got {}",
            batch.n()
        )));
    }
    let result = pca(batch.features(), batch.n(), batch.dim(), 2)?;
    let coords = result.project(batch.features(), batch.dim());
    let svg_path = prefix.with_extension("svg");
    let csv_path = prefix.with_extension("csv");
    std::fs::write(&svg_path, svg_scatter(&coords, batch.labels()))
        .map_err(|e| HarnessError::Io(IoError::file(&svg_path, e)))?;
    std::fs::write(&csv_path, coords_csv(&coords, batch.labels()))
        .map_err(|e| HarnessError::Io(IoError::file(&csv_path, e)))?;
    Ok(result)
}
