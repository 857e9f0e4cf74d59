//! Complex dilogarithm and the quantum dilogarithm `S_γ`.
//!
//! [`li2`] is the principal branch of `Li₂(z) = −∫₀^z log(1−u)/u du` with the
//! cut `[1, ∞)` approached from below. It is evaluated by the power series
//! near the origin, the Bernoulli series in `−log(1−z)` on the rest of the
//! unit disk, and the reflection and inversion identities elsewhere.
//!
//! [`quantum_dilog_s`] evaluates
//! `S_γ(p) = exp(¼ ∫ e^{px} / (sinh(πx) sinh(γx) x) dx)`
//! over a contour that runs along the real line and passes above the pole at
//! the origin. Since the integrand is analytic in the strip `0 < Im x < 1`,
//! the contour is moved to the horizontal line `Im x = ½`, where the
//! integrand is smooth and decays exponentially in both directions; this is
//! the same value as subtracting the Laurent part at the origin and adding
//! its half-residue back in closed form, but needs no cancellation.
//! [`f_gamma`] and [`f_bar_gamma`] are the ratios that reproduce the
//! q-Pochhammer symbols at `γ = π/N`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// A dilogarithm value with a flag for arguments on the branch cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchedValue {
    /// The principal value (continuous from below on the cut).
    pub value: Complex64,
    /// Whether the argument lies on the cut `(1, ∞)`.
    pub on_cut: bool,
}

/// `B_{2k} / (2k+1)!` for `k = 1..`.
const BERNOULLI: [f64; 22] = [
    0.027777777777777776,
    -0.0002777777777777778,
    4.72411186696901e-06,
    -9.185773074661964e-08,
    1.8978869988971e-09,
    -4.0647616451442256e-11,
    8.921691020456452e-13,
    -1.9939295860721074e-14,
    4.518980029619918e-16,
    -1.0356517612181247e-17,
    2.395218621026187e-19,
    -5.581785874325009e-21,
    1.3091507554183213e-22,
    -3.0874198024267403e-24,
    7.315975652702203e-26,
    -1.740845657234001e-27,
    4.1576356446139e-29,
    -9.962148488284622e-31,
    2.3940344248961652e-32,
    -5.76834735536739e-34,
    1.393179479647008e-35,
    -3.3721219654850894e-37,
];

const ZETA2: f64 = PI * PI / 6.0;

/// Principal-branch dilogarithm.
///
/// On the cut `z = x > 1` the value is the limit from below,
/// `Im Li₂(x) = −π ln x`, and `on_cut` is set.
pub fn li2(z: Complex64) -> BranchedValue {
    // A negative zero imaginary part is treated as zero so that the side of
    // the cut is fixed by convention, not by the sign bit.
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });
    if z.im == 0.0 && z.re > 1.0 {
        let x = z.re;
        let lx = x.ln();
        let re = 2.0 * ZETA2 - 0.5 * lx * lx - li2_real_unit(1.0 / x);
        return BranchedValue { value: Complex64::new(re, -PI * lx), on_cut: true };
    }
    BranchedValue { value: li2_off_cut(z), on_cut: false }
}

/// `Li₂(x)` for real `x ∈ [0, 1]`.
fn li2_real_unit(x: f64) -> f64 {
    li2_off_cut(Complex64::new(x, 0.0)).re
}

fn li2_off_cut(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    if z == Complex64::new(1.0, 0.0) {
        return Complex64::new(ZETA2, 0.0);
    }
    if z.norm_sqr() > 1.0 {
        // Li₂(z) = −π²/6 − log²(−z)/2 − Li₂(1/z); 1/z is off the cut.
        let l = (-z).ln();
        return -ZETA2 - 0.5 * l * l - li2_disk(z.inv());
    }
    li2_disk(z)
}

/// `Li₂` on the closed unit disk.
fn li2_disk(z: Complex64) -> Complex64 {
    if z.re > 0.5 {
        let w = Complex64::new(1.0, 0.0) - z;
        if w == Complex64::new(0.0, 0.0) {
            return Complex64::new(ZETA2, 0.0);
        }
        return ZETA2 - z.ln() * w.ln() - li2_core(w);
    }
    li2_core(z)
}

/// `Li₂` for `|z| ≤ 1`, `Re z ≤ ½`.
fn li2_core(z: Complex64) -> Complex64 {
    if z.norm_sqr() < 0.0625 {
        let mut term = z;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..60 {
            let add = term / (k * k) as f64;
            sum += add;
            if add.norm() <= 1e-18 * sum.norm() {
                break;
            }
            term *= z;
        }
        return sum;
    }
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut sum = u - 0.25 * u2;
    let mut pow = u * u2;
    for &b in BERNOULLI.iter() {
        let add = pow * b;
        sum += add;
        if add.norm() <= 1e-18 * sum.norm() {
            break;
        }
        pow *= u2;
    }
    sum
}

/// Quadrature settings for [`quantum_dilog_s`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Target absolute error on `log S_γ(p)`.
    pub abs_tol: f64,
    /// Tail cut-off: the integrand is truncated where its bound drops below this.
    pub tail: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { abs_tol: 1e-10, tail: 1e-20 }
    }
}

/// `log S_γ(p)` with default quadrature settings.
pub fn log_quantum_dilog_s(gamma: f64, p: Complex64) -> Result<Complex64> {
    log_quantum_dilog_s_with(gamma, p, QuadratureOptions::default())
}

/// `S_γ(p)` with default quadrature settings.
pub fn quantum_dilog_s(gamma: f64, p: Complex64) -> Result<Complex64> {
    Ok(log_quantum_dilog_s(gamma, p)?.exp())
}

/// Integrand on the line `x = t + i/2`, already divided into the decaying
/// exponential and bounded factors so nothing overflows.
fn integrand(gamma: f64, p: Complex64, t: f64) -> Complex64 {
    let i = Complex64::i();
    let x = Complex64::new(t, 0.5);
    let one = Complex64::new(1.0, 0.0);
    if t >= 0.0 {
        let a = p - gamma;
        let expo = (a * t - PI * t + a * i * 0.5).exp();
        let b = 2.0 / (1.0 + (-2.0 * PI * t).exp());
        let c = 2.0 / (one - (-2.0 * gamma * x).exp());
        expo * b * c / (i * x)
    } else {
        let a = p + gamma;
        let expo = (a * t + PI * t + a * i * 0.5).exp();
        let b = 2.0 / (1.0 + (2.0 * PI * t).exp());
        let c = -2.0 / (one - (2.0 * gamma * x).exp());
        expo * b * c / (i * x)
    }
}

/// Panel break points on `[0, end]`: fine near the origin, width at most 8.
fn breakpoints(end: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = 0.5;
    while x < end {
        pts.push(x);
        x = if x < 8.0 { x * 2.0 } else { x + 8.0 };
    }
    pts.push(end);
    pts
}

/// `log S_γ(p)` with explicit quadrature settings.
pub fn log_quantum_dilog_s_with(gamma: f64, p: Complex64, opts: QuadratureOptions) -> Result<Complex64> {
    if !(gamma > 0.0 && gamma < PI) {
        return Err(Error::Domain(format!("gamma = {gamma} is outside (0, π)")));
    }
    if !(p.re.is_finite() && p.im.is_finite()) {
        return Err(Error::Domain(format!("p = {p} is not finite")));
    }
    let alpha = PI + gamma - p.re.abs();
    if alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "|Re p| = {} must be below π + γ = {}",
            p.re.abs(),
            PI + gamma
        )));
    }
    // |integrand| ≤ e^{|Im p|/2}·8/(|1−e^{−iγ}|·|x|)·e^{−α|t|}, roughly.
    let prefactor = (0.5 * p.im.abs()).exp() * 8.0 / (2.0 * (gamma / 2.0).sin()).min(1.0);
    let end = ((prefactor / opts.tail).ln() / alpha).max(1.0);
    let pts = breakpoints(end);
    let panels = 2 * (pts.len() - 1);
    let tol = opts.abs_tol / (4.0 * panels as f64);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in pts.windows(2) {
        for (a, b) in [(w[0], w[1]), (-w[1], -w[0])] {
            let re = quadrature::integrate(|t| integrand(gamma, p, t).re, a, b, tol);
            let im = quadrature::integrate(|t| integrand(gamma, p, t).im, a, b, tol);
            total += Complex64::new(re.integral, im.integral);
            err += re.error_estimate + im.error_estimate;
        }
    }
    let value = total * 0.25;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Convergence(format!("S_γ quadrature produced {value} at γ={gamma}, p={p}")));
    }
    if 0.25 * err > 100.0 * opts.abs_tol {
        return Err(Error::Convergence(format!(
            "S_γ quadrature error estimate {:.2e} exceeds tolerance {:.2e} at γ={gamma}, p={p} \
             ({panels} panels on [−{end:.1}, {end:.1}])",
            0.25 * err,
            opts.abs_tol
        )));
    }
    Ok(value)
}

/// `f_γ(p) = S_γ(γ − π) / S_γ(p)`.
pub fn f_gamma(gamma: f64, p: Complex64) -> Result<Complex64> {
    let num = log_quantum_dilog_s(gamma, Complex64::new(gamma - PI, 0.0))?;
    let den = log_quantum_dilog_s(gamma, p)?;
    Ok((num - den).exp())
}

/// `f̄_γ(p) = S_γ(−p) / S_γ(π − γ)`.
pub fn f_bar_gamma(gamma: f64, p: Complex64) -> Result<Complex64> {
    let num = log_quantum_dilog_s(gamma, -p)?;
    let den = log_quantum_dilog_s(gamma, Complex64::new(PI - gamma, 0.0))?;
    Ok((num - den).exp())
}
