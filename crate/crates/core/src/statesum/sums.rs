//! Closed-form state sums.
//!
//! Each multi-index sum is rearranged into nested one-dimensional sums by
//! exploiting how the q-exponent separates, which brings the cost down to
//! `O(N²)` (Whitehead, 5₂), `O(N³)` (6₃, 8₉) and `O(N⁴)` (8₂₀) without
//! changing the value. The straightforward summations are kept in the test
//! suite as independent oracles.
//!
//! Every evaluator returns the value together with its condition number
//! `Σ|terms| / |sum|`, taken over the terms of the original multi-index sum
//! (all factors are products of `|(q)_k|`, so the moduli are tracked exactly
//! alongside the factorized evaluation). The relative rounding error of the
//! result is at most a small multiple of condition × unit roundoff.

use crate::backend::{cabs, cfinite, CompensatedSum, Cx, Real};
use crate::error::{Error, Result};
use crate::qarith::RootOfUnityContext;
use num_complex::Complex;
use rayon::prelude::*;

/// Value of a state sum with its cancellation estimate.
#[derive(Clone, Debug)]
pub struct SumValue<R: Real> {
    /// The sum.
    pub value: Cx<R>,
    /// `Σ|terms| / |sum|` over all terms of the multi-index sum (1 when
    /// there is no cancellation, `∞` when the sum vanishes or the magnitude
    /// overflows a double).
    pub condition: f64,
}

/// Per-context tables shared by the sums.
pub(crate) struct Tables<R: Real> {
    pub n: usize,
    /// `(q)_k`.
    pub p: Vec<Cx<R>>,
    /// `(q̄)_k`.
    pub pb: Vec<Cx<R>>,
    /// `1/(q)_k`.
    pub inv_p: Vec<Cx<R>>,
    /// `1/(q̄)_k`.
    pub inv_pb: Vec<Cx<R>>,
    /// `|(q)_k|²`.
    pub m2: Vec<R>,
    /// `1/|(q)_k|²`.
    pub inv_m2: Vec<R>,
    /// `|(q)_k|` rounded to a double, for magnitude bookkeeping.
    pub mf: Vec<f64>,
}

impl<R: Real> Tables<R> {
    pub fn new(ctx: &RootOfUnityContext<R>) -> Self {
        let n = ctx.n();
        let m2: Vec<R> = (0..n).map(|k| ctx.modulus(k).clone() * ctx.modulus(k).clone()).collect();
        let inv_m2: Vec<R> = m2.iter().map(|m| R::one() / m.clone()).collect();
        let p = ctx.pochhammer_table().to_vec();
        let pb = ctx.pochhammer_bar_table().to_vec();
        // 1/(q)_k = conj((q)_k)/|(q)_k|² = (q̄)_k/|(q)_k|².
        let inv_p = (0..n).map(|k| pb[k].clone() * inv_m2[k].clone()).collect();
        let inv_pb = (0..n).map(|k| p[k].clone() * inv_m2[k].clone()).collect();
        let mf = (0..n).map(|k| ctx.modulus(k).to_f64()).collect();
        Tables {
            mf,
            n,
            p,
            pb,
            inv_p,
            inv_pb,
            m2,
            inv_m2,
        }
    }
}

/// Reduces the outer terms in index order (deterministic), checks for
/// overflow and forms the condition number from the tracked magnitudes.
fn finish<R: Real>(what: &str, terms: Vec<(Cx<R>, f64)>) -> Result<SumValue<R>> {
    let mut acc = CompensatedSum::new();
    let mut magnitude = 0.0;
    for (t, m) in terms {
        if !cfinite(&t) {
            return Err(Error::Range(format!(
                "{what}: a summand left the dynamic range of the {} backend",
                R::BACKEND
            )));
        }
        acc.add(t);
        magnitude += m;
    }
    let value = acc.total();
    if !cfinite(&value) {
        return Err(Error::Range(format!("{what}: sum overflowed")));
    }
    let size = cabs(&value).to_f64();
    let condition = if size > 0.0 && magnitude.is_finite() {
        (magnitude / size).max(1.0)
    } else {
        f64::INFINITY
    };
    Ok(SumValue { value, condition })
}

/// Whitehead link, triple sum over `k ≤ i, j`:
/// `Σ (q)_i (q)_j (q)_{N−1−k}² q^{−k(i+j+1)} / ((q)_k² (q)_{N−1−i} (q)_{N−1−j} (q)_{i−k} (q)_{j−k})`.
///
/// The summand factorizes as `g(k) F_k(i) F_k(j)`, so the sum equals
/// `Σ_k g(k) (Σ_{i≥k} F_k(i))²`.
pub fn whitehead_primary<R: Real>(ctx: &RootOfUnityContext<R>) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let n = t.n;
    let terms: Vec<(Cx<R>, f64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut f = CompensatedSum::new();
            let mut fm = 0.0;
            for i in k..n {
                let e = -((k * i) as i64);
                f.add(&(&t.p[i] * &t.inv_p[n - 1 - i]) * &(&t.inv_p[i - k] * ctx.q_pow(e)));
                fm += t.mf[i] / (t.mf[n - 1 - i] * t.mf[i - k]);
            }
            let f = f.total();
            let g = (&t.p[n - 1 - k] * &t.p[n - 1 - k])
                * (&t.inv_p[k] * &t.inv_p[k])
                * ctx.q_pow(-(k as i64)).clone();
            let gm = (t.mf[n - 1 - k] / t.mf[k]).powi(2);
            (g * (&f * &f), gm * fm * fm)
        })
        .collect();
    finish("whitehead sum", terms)
}

/// Whitehead link in the rewritten form
/// `Σ_{k ≤ i,j} ((q̄)_i (q̄)_j)² / ((q)_k⁴ (q̄)_{i−k} (q̄)_{j−k})`, i.e.
/// `Σ_k A_k² / (q)_k⁴` with `A_k = Σ_{i≥k} (q̄)_i² / (q̄)_{i−k}`, optionally
/// multiplied by the global factor `q^{−N(N−1)/2} = (−1)^{N−1}`.
pub fn whitehead_rewritten<R: Real>(
    ctx: &RootOfUnityContext<R>,
    with_global_factor: bool,
) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let n = t.n;
    let terms: Vec<(Cx<R>, f64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut a = CompensatedSum::new();
            let mut am = 0.0;
            for i in k..n {
                a.add(&(&t.pb[i] * &t.pb[i]) * &t.inv_pb[i - k]);
                am += t.mf[i] * t.mf[i] / t.mf[i - k];
            }
            let a = a.total();
            let inv2 = &t.inv_p[k] * &t.inv_p[k];
            ((&a * &a) * (&inv2 * &inv2), am * am / t.mf[k].powi(4))
        })
        .collect();
    let mut out = finish("rewritten whitehead sum", terms)?;
    if with_global_factor && n % 2 == 0 {
        out.value = -out.value;
    }
    Ok(out)
}

/// Knot 6₃: `Σ_{k+l+m ≤ N−1} |(q)_{k+l+m} / ((q)_l (q)_m)|² (q)_{k+l} (q̄)_{m+k} q^{(m−l)(k+1)}`.
pub fn sum_6_3<R: Real>(ctx: &RootOfUnityContext<R>) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let n = t.n;
    let terms: Vec<(Cx<R>, f64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut acc = CompensatedSum::new();
            let mut mag = 0.0;
            for l in 0..n - k {
                let left = &t.p[k + l] * t.inv_m2[l].clone();
                let left_m = t.mf[k + l] / (t.mf[l] * t.mf[l]);
                for m in 0..n - k - l {
                    let e = (m as i64 - l as i64) * (k as i64 + 1);
                    let scal = t.m2[k + l + m].clone() * t.inv_m2[m].clone();
                    acc.add((&left * &t.pb[m + k]) * ctx.q_pow(e).clone() * scal);
                    mag += left_m * t.mf[m + k] * (t.mf[k + l + m] / t.mf[m]).powi(2);
                }
            }
            (acc.total(), mag)
        })
        .collect();
    finish("6_3 sum", terms)
}

/// Knot 8₉: the five-index sum over `l, m₁, m₂, n₁, n₂` with
/// `m₁+n₁ ≤ l`, `m₂+n₂ ≤ l`, `m₁+m₂ ≤ l` of
/// `|(q)_{l−m₁}(q)_l(q)_{l−m₂} / ((q)_{m₁}(q)_{m₂}(q)_{n₁}(q)_{n₂})|²
///  (q̄)_{l−n₁}(q)_{l−n₂} / ((q)_{l−m₁−n₁}(q̄)_{l−m₂−n₂})
///  q^{(m₂−m₁)(l−m₁−m₂)+(n₂−n₁)(l−n₁−n₂)+m₂−m₁+n₂−n₁}`.
///
/// The exponent splits into `[m₁²−m₁−lm₁] + [lm₂−m₂²+m₂]` plus the same in
/// `n`, so for each `l` the sum is `M_l² Σ_{m₁+m₂≤l} a(l,m₁) b(l,m₂)` with
/// the `n`-sums folded into `a` and `b`.
pub fn sum_8_9<R: Real>(ctx: &RootOfUnityContext<R>) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let n = t.n;
    let terms: Vec<(Cx<R>, f64)> = (0..n)
        .into_par_iter()
        .map(|l| {
            let li = l as i64;
            // Both factors share the same magnitudes; only phases differ.
            let side_mag: Vec<f64> = (0..=l)
                .map(|m| {
                    let inner: f64 = (0..=l - m)
                        .map(|nn| t.mf[l - nn] / (t.mf[nn] * t.mf[nn] * t.mf[l - m - nn]))
                        .sum();
                    inner * (t.mf[l - m] / t.mf[m]).powi(2)
                })
                .collect();
            let a: Vec<Cx<R>> = (0..=l)
                .map(|m1| {
                    let mut inner = CompensatedSum::new();
                    for n1 in 0..=l - m1 {
                        let e = (n1 * n1) as i64 - n1 as i64 - li * n1 as i64;
                        inner.add(
                            (&t.pb[l - n1] * &t.inv_p[l - m1 - n1])
                                * ctx.q_pow(e).clone()
                                * t.inv_m2[n1].clone(),
                        );
                    }
                    let e = (m1 * m1) as i64 - m1 as i64 - li * m1 as i64;
                    inner.total() * ctx.q_pow(e).clone() * (t.m2[l - m1].clone() * t.inv_m2[m1].clone())
                })
                .collect();
            let b: Vec<Cx<R>> = (0..=l)
                .map(|m2| {
                    let mut inner = CompensatedSum::new();
                    for n2 in 0..=l - m2 {
                        let e = li * n2 as i64 - (n2 * n2) as i64 + n2 as i64;
                        inner.add(
                            (&t.p[l - n2] * &t.inv_pb[l - m2 - n2])
                                * ctx.q_pow(e).clone()
                                * t.inv_m2[n2].clone(),
                        );
                    }
                    let e = li * m2 as i64 - (m2 * m2) as i64 + m2 as i64;
                    inner.total() * ctx.q_pow(e).clone() * (t.m2[l - m2].clone() * t.inv_m2[m2].clone())
                })
                .collect();
            // Prefix sums of b so that Σ_{m₂ ≤ l−m₁} b is a lookup.
            let mut prefix = Vec::with_capacity(l + 1);
            let mut prefix_mag = Vec::with_capacity(l + 1);
            let mut run = CompensatedSum::new();
            let mut run_mag = 0.0;
            for (bm, mm) in b.into_iter().zip(&side_mag) {
                run.add(bm);
                run_mag += mm;
                prefix.push(run.total());
                prefix_mag.push(run_mag);
            }
            let mut acc = CompensatedSum::new();
            let mut mag = 0.0;
            for (m1, am) in a.iter().enumerate() {
                acc.add(am * &prefix[l - m1]);
                mag += side_mag[m1] * prefix_mag[l - m1];
            }
            (acc.total() * t.m2[l].clone(), mag * t.mf[l] * t.mf[l])
        })
        .collect();
    finish("8_9 sum", terms)
}

/// Knot 8₂₀: the five-index sum over `j ≤ i`, `j, l ≤ k ≤ i+l ≤ j+m` of
/// `((q̄)_i (q)_k (q̄)_m)² / (((q̄)_j (q)_l)² (q)_{k−l} (q̄)_{i−k+l} (q̄)_{j+m−i−l} (q)_{i−j} (q)_{k−j})
///  q^{k+m+im+km−il}`.
///
/// The `m`-dependence is `(q̄)_m² q^{m(1+i+k)} / (q̄)_{m−d}` with
/// `d = i+l−j`, tabulated once as `C[t][d]` for `t = (1+i+k) mod N`.
pub fn sum_8_20<R: Real>(ctx: &RootOfUnityContext<R>) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let n = t.n;
    // C[tt][d] = Σ_{m=d}^{N−1} (q̄)_m² q^{m tt} / (q̄)_{m−d}
    let c: Vec<Vec<Cx<R>>> = (0..n)
        .into_par_iter()
        .map(|tt| {
            (0..n)
                .map(|d| {
                    let mut acc = CompensatedSum::new();
                    for m in d..n {
                        acc.add(
                            (&t.pb[m] * &t.pb[m]) * &t.inv_pb[m - d] * ctx.q_pow((m * tt) as i64).clone(),
                        );
                    }
                    acc.total()
                })
                .collect()
        })
        .collect();
    let c_mag: Vec<f64> = (0..n)
        .map(|d| (d..n).map(|m| t.mf[m] * t.mf[m] / t.mf[m - d]).sum())
        .collect();
    let terms: Vec<(Cx<R>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = CompensatedSum::new();
            let mut mag = 0.0;
            let pbi2 = &t.pb[i] * &t.pb[i];
            for j in 0..=i {
                let left = &pbi2 * &(&t.inv_pb[j] * &t.inv_pb[j]) * &t.inv_p[i - j];
                let left_m = (t.mf[i] / t.mf[j]).powi(2) / t.mf[i - j];
                for l in 0..n {
                    let d = i + l - j;
                    if d > n - 1 {
                        break;
                    }
                    let mid = &left * &(&t.inv_p[l] * &t.inv_p[l]);
                    let mid_m = left_m / (t.mf[l] * t.mf[l]);
                    let kmax = (i + l).min(n - 1);
                    for k in j.max(l)..=kmax {
                        let e = k as i64 - (i * l) as i64;
                        let w = &(&t.p[k] * &t.p[k]) * &(&t.inv_p[k - l] * &t.inv_pb[i + l - k]);
                        let w = &w * &t.inv_p[k - j];
                        acc.add(&(&mid * &w) * &(&c[(1 + i + k) % n][d] * ctx.q_pow(e)));
                        let w_m = t.mf[k] * t.mf[k] / (t.mf[k - l] * t.mf[i + l - k] * t.mf[k - j]);
                        mag += mid_m * w_m * c_mag[d];
                    }
                }
            }
            (acc.total(), mag)
        })
        .collect();
    finish("8_20 sum", terms)
}

/// Knot 5₂: `Σ_{0 ≤ k ≤ l ≤ N−1} (q)_l² q^{−k(l+1)} / (q̄)_k`.
pub fn sum_5_2<R: Real>(ctx: &RootOfUnityContext<R>) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let n = t.n;
    let terms: Vec<(Cx<R>, f64)> = (0..n)
        .into_par_iter()
        .map(|l| {
            let mut acc = CompensatedSum::new();
            let mut mag = 0.0;
            for k in 0..=l {
                acc.add(t.inv_pb[k].clone() * ctx.q_pow(-((k * (l + 1)) as i64)).clone());
                mag += 1.0 / t.mf[k];
            }
            ((&t.p[l] * &t.p[l]) * acc.total(), mag * t.mf[l] * t.mf[l])
        })
        .collect();
    finish("5_2 sum", terms)
}

/// Figure-eight knot: `Σ_k |(q)_k|²`.
pub fn sum_4_1<R: Real>(ctx: &RootOfUnityContext<R>) -> Result<SumValue<R>> {
    let t = Tables::new(ctx);
    let terms = t
        .m2
        .iter()
        .zip(&t.mf)
        .map(|(m, mf)| (Complex::new(m.clone(), R::zero()), mf * mf))
        .collect();
    finish("4_1 sum", terms)
}
