//! Independent oracles shared by the integration tests: a naive DFT written
//! straight from the transform definition, finite differences, quadrature
//! rules, a closed-form symmetric 3x3 eigensolver, and seeded input
//! generators.

#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use domainmix::image::ImageTensor;
use domainmix::io::rng::{rng_stream, RandomStream};

/// Quadruple-loop forward DFT of one `h x w` plane, unnormalized:
/// `F(u,v) = sum_y sum_x p(y,x) exp(-j 2 pi (y u / h + x v / w))`.
pub fn naive_dft2d(plane: &[f64], h: usize, w: usize) -> Vec<Complex<f64>> {
    assert_eq!(plane.len(), h * w);
    let mut out = Vec::with_capacity(h * w);
    for u in 0..h {
        for v in 0..w {
            let mut acc = Complex::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let angle = -std::f64::consts::TAU
                        * ((y * u) as f64 / h as f64 + (x * v) as f64 / w as f64);
                    acc += plane[y * w + x] * Complex::new(angle.cos(), angle.sin());
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Quadruple-loop inverse DFT of one plane with the `1/(h w)` factor.
pub fn naive_idft2d(coeff: &[Complex<f64>], h: usize, w: usize) -> Vec<Complex<f64>> {
    assert_eq!(coeff.len(), h * w);
    let scale = 1.0 / (h * w) as f64;
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let mut acc = Complex::new(0.0, 0.0);
            for u in 0..h {
                for v in 0..w {
                    let angle = std::f64::consts::TAU
                        * ((y * u) as f64 / h as f64 + (x * v) as f64 / w as f64);
                    acc += coeff[u * w + v] * Complex::new(angle.cos(), angle.sin());
                }
            }
            out.push(acc * scale);
        }
    }
    out
}

/// Naive forward DFT of every channel, in the same channel-planar coefficient
/// order used by the library spectrum type.
pub fn naive_fft_image(image: &ImageTensor) -> Vec<Complex<f64>> {
    let mut coeff = Vec::new();
    for c in 0..image.channels() {
        coeff.extend(naive_dft2d(
            &image.channel_plane(c),
            image.height(),
            image.width(),
        ));
    }
    coeff
}

pub fn random_image(h: usize, w: usize, c: usize, seed: u64) -> ImageTensor {
    let mut rng = rng_stream(seed, 0);
    let data = (0..h * w * c).map(|_| rng.random::<f64>()).collect();
    ImageTensor::new(h, w, c, data).unwrap()
}

/// Central finite difference `(f(x+h) - f(x-h)) / (2h)`.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = (((2 * j + 1) as f64) * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                nodes[i] = -z;
                nodes[n - 1 - i] = z;
                let w = 2.0 / ((1.0 - z * z) * dp * dp);
                weights[i] = w;
                weights[n - 1 - i] = w;
                break;
            }
        }
    }
    (nodes, weights)
}

/// Eigenvalues of a symmetric 3x3 matrix in descending order, by the
/// trigonometric closed form of the characteristic cubic.
pub fn sym3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        let mut eig = [m[0][0], m[1][1], m[2][2]];
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return eig;
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// `n` rows drawn uniformly from the unit sphere in `R^d`.
pub fn uniform_sphere(d: usize, n: usize, rng: &mut RandomStream) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * d);
    for _ in 0..n {
        loop {
            let row: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                out.extend(row.into_iter().map(|v| v / norm));
                break;
            }
        }
    }
    out
}

pub fn max_abs_complex_diff(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
