//! Log-domain modified Bessel functions of the first kind.
//!
//! Everything here exists to keep the vMF normalization constant finite at
//! high dimension and concentration, where `I_nu(x)` itself overflows long
//! before the log-density does. Three regimes cover nonnegative order and
//! positive argument:
//!
//! * power series, summed with an explicit scaling offset, for moderate
//!   arguments and small orders;
//! * the uniform large-order asymptotic expansion, whose polynomial
//!   coefficients are generated once from their recurrence;
//! * the large-argument expansion for small orders past the series range.
//!
//! The ratio `I_{nu+1}/I_nu` gets its own continued-fraction evaluation since
//! differencing two large logarithms would waste most of the precision.

use std::sync::OnceLock;

/// Orders at or above this use the uniform large-order expansion.
const UNIFORM_ORDER_MIN: f64 = 40.0;
/// Arguments up to this are handled by the scaled power series.
const SERIES_X_MAX: f64 = 1200.0;
/// Number of `u_k` polynomials generated for the uniform expansion.
const UNIFORM_TERMS: usize = 17;

/// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, 9 coefficients).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    const LN_SQRT_TAU: f64 = 0.9189385332046727;
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    (z + 0.5) * t.ln() - t + LN_SQRT_TAU + acc.ln()
}

/// Power series with the `(x/2)^nu / Gamma(nu+1)` prefactor kept in log form
/// and the term sum carried with a scaling offset so it never overflows.
fn log_bessel_i_series(nu: f64, x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut offset = 0.0f64;
    let mut m = 0.0f64;
    loop {
        let ratio = q / ((m + 1.0) * (nu + m + 1.0));
        term *= ratio;
        sum += term;
        m += 1.0;
        if sum > 1e280 {
            sum *= 1e-280;
            term *= 1e-280;
            offset += 1e280f64.ln();
        }
        if ratio < 1.0 && term < sum * 1e-18 {
            break;
        }
        assert!(m < 1e6, "series failed to converge for nu={nu}, x={x}");
    }
    nu * (x / 2.0).ln() - ln_gamma(nu + 1.0) + offset + sum.ln()
}

/// Coefficient vectors (monomial basis) of the polynomials `u_k(t)` from the
/// large-order expansion, built by the recurrence
/// `u_{k+1} = t^2 (1 - t^2) u_k' / 2 + (1/8) integral_0^t (1 - 5 s^2) u_k ds`.
fn uniform_polynomials() -> &'static Vec<Vec<f64>> {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
        for _ in 1..UNIFORM_TERMS {
            let prev = polys.last().unwrap();
            let deg = prev.len() - 1;
            let mut next = vec![0.0; deg + 4];
            for (j, &c) in prev.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                if j >= 1 {
                    // t^2 (1 - t^2) / 2 * d/dt [c t^j]
                    let dc = c * j as f64 / 2.0;
                    next[j + 1] += dc;
                    next[j + 3] -= dc;
                }
                // (1/8) * integral of (1 - 5 s^2) c s^j
                next[j + 1] += c / (8.0 * (j + 1) as f64);
                next[j + 3] -= 5.0 * c / (8.0 * (j + 3) as f64);
            }
            polys.push(next);
        }
        polys
    })
}

fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Uniform large-order expansion: with `z = x / nu`, `s = sqrt(1 + z^2)`,
/// `eta = s + ln(z / (1 + s))`,
/// `log I_nu(x) = nu eta - ln(2 pi nu)/2 - ln(s)/2 + ln(sum_k u_k(1/s)/nu^k)`.
fn log_bessel_i_uniform(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let s = z.hypot(1.0);
    let t = 1.0 / s;
    let eta = s + z.ln() - (1.0 + s).ln();
    let polys = uniform_polynomials();
    let mut sum = 0.0f64;
    let mut scale = 1.0f64;
    let mut last = f64::INFINITY;
    for coeffs in polys {
        let term = poly_eval(coeffs, t) * scale;
        if term.abs() >= last {
            break; // asymptotic tail started growing; stop at the best point
        }
        sum += term;
        last = term.abs();
        scale /= nu;
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    nu * eta - 0.5 * (std::f64::consts::TAU * nu).ln() - 0.5 * s.ln() + sum.ln()
}

/// Large-argument expansion for small orders:
/// `I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k` with
/// `a_k = a_{k-1} (4 nu^2 - (2k-1)^2) / (8 k)`.
fn log_bessel_i_large_x(nu: f64, x: f64) -> f64 {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut last = 1.0f64;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(four_nu2 - odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    x - 0.5 * (std::f64::consts::TAU * x).ln() + sum.ln()
}

/// `ln I_nu(x)` for order `nu >= 0` and argument `x > 0`.
pub fn log_bessel_i(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0, "order must be nonnegative, got {nu}");
    assert!(x > 0.0, "argument must be positive, got {x}");
    if nu >= UNIFORM_ORDER_MIN {
        log_bessel_i_uniform(nu, x)
    } else if x <= SERIES_X_MAX {
        log_bessel_i_series(nu, x)
    } else {
        log_bessel_i_large_x(nu, x)
    }
}

/// `I_{nu+1}(x) / I_nu(x)` by the modified Lentz continued fraction
/// `x / (2(nu+1) + x^2 / (2(nu+2) + x^2 / ...))`.
pub fn bessel_i_ratio(nu: f64, x: f64) -> f64 {
    assert!(nu >= 0.0, "order must be nonnegative, got {nu}");
    assert!(x > 0.0, "argument must be positive, got {x}");
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0f64;
    let mut k = 1u64;
    loop {
        let a = if k == 1 { x } else { x * x };
        let b = 2.0 * (nu + k as f64);
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            return f;
        }
        k += 1;
        assert!(
            k < 100_000_000,
            "continued fraction failed to converge for nu={nu}, x={x}"
        );
    }
}
