//! Root-of-unity arithmetic.
//!
//! A [`RootOfUnityContext`] fixes `N`, `s = exp(πi/N)` and `q = s²` and
//! precomputes everything the state sums read in their inner loops: powers of
//! `s^{1/2}`, the q-Pochhammer symbols `(q)_k` and `(q̄)_k`, and the
//! symmetric factorials `(n)! = (s - s^{-1}) ⋯ (s^n - s^{-n})`.
//!
//! All three products share the same modulus
//! `M_k = ∏_{j=1}^{k} 2 sin(πj/N)` and differ only by a phase that is itself
//! a power of `s^{1/2}`:
//!
//! * `1 - q^j = -s^j (s^j - s^{-j})`, hence `(q)_k = (-i)^k s^{k(k+1)/2} M_k`;
//! * `(q̄)_k` is the exact complex conjugate;
//! * `(n)! = i^n M_n`.
//!
//! Building the tables this way keeps every entry within a few ulps and makes
//! conjugation symmetry exact rather than approximate.

use crate::backend::{Cx, Real};
use crate::error::{Error, Result};
use num_complex::Complex;

/// Largest `N` accepted by [`make_context`].
///
/// Table construction is O(N); the cap only guards against accidental huge
/// allocations. On the double backend the largest Pochhammer modulus is about
/// `exp(0.17 N)`, so every table entry stays finite up to the cap.
pub const MAX_N: usize = 4096;

/// Immutable precomputed data for one root of unity.
#[derive(Clone, Debug)]
pub struct RootOfUnityContext<R: Real> {
    n: usize,
    /// `exp(πi j / (2N))` for `j = 0 .. 4N`.
    half_powers: Vec<Cx<R>>,
    /// `M_k = ∏_{j ≤ k} 2 sin(πj/N)` for `k = 0 .. N`.
    moduli: Vec<R>,
    pochhammer: Vec<Cx<R>>,
    pochhammer_bar: Vec<Cx<R>>,
    factorial: Vec<Cx<R>>,
}

/// Builds the context for `N`.
///
/// # Errors
/// `InvalidArgument` when `N = 0` or `N > MAX_N`.
pub fn make_context<R: Real>(n: usize) -> Result<RootOfUnityContext<R>> {
    RootOfUnityContext::new(n)
}

impl<R: Real> RootOfUnityContext<R> {
    /// See [`make_context`].
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidArgument(format!(
                "N must satisfy 1 <= N <= {MAX_N}, got {n}"
            )));
        }
        let ni = n as i64;
        let half_powers: Vec<Cx<R>> = (0..4 * ni)
            .map(|j| Complex::new(R::cos_pi_frac(j, 2 * ni), R::sin_pi_frac(j, 2 * ni)))
            .collect();
        let mut moduli = Vec::with_capacity(n + 1);
        moduli.push(R::one());
        for j in 1..=ni {
            let m = moduli[(j - 1) as usize].clone() * R::from_i64(2) * R::sin_pi_frac(j, ni);
            moduli.push(m);
        }
        let mut ctx = RootOfUnityContext {
            n,
            half_powers,
            moduli,
            pochhammer: Vec::with_capacity(n),
            pochhammer_bar: Vec::with_capacity(n),
            factorial: Vec::with_capacity(n),
        };
        for k in 0..ni {
            let m = ctx.moduli[k as usize].clone();
            let phase = k * (k + 1) - k * ni;
            ctx.pochhammer.push(ctx.half_pow(phase).clone() * m.clone());
            ctx.pochhammer_bar.push(ctx.half_pow(-phase).clone() * m.clone());
            ctx.factorial.push(ctx.half_pow(k * ni).clone() * m);
        }
        Ok(ctx)
    }

    /// The order `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `s = exp(πi/N)`.
    pub fn s(&self) -> &Cx<R> {
        self.half_pow(2)
    }

    /// `q = s² = exp(2πi/N)`.
    pub fn q(&self) -> &Cx<R> {
        self.half_pow(4)
    }

    /// `s^{e/2} = exp(πi e / (2N))` for any integer `e` (exact table lookup).
    pub fn half_pow(&self, e: i64) -> &Cx<R> {
        let period = 4 * self.n as i64;
        &self.half_powers[e.rem_euclid(period) as usize]
    }

    /// `s^e`.
    pub fn s_pow(&self, e: i64) -> &Cx<R> {
        self.half_pow(2 * e)
    }

    /// `q^e`.
    pub fn q_pow(&self, e: i64) -> &Cx<R> {
        self.half_pow(4 * e)
    }

    /// `|(q)_k| = ∏_{j ≤ k} 2 sin(πj/N)` for `0 ≤ k ≤ N`.
    pub fn modulus(&self, k: usize) -> &R {
        &self.moduli[k]
    }

    /// `(q)_k` without bounds checking beyond the slice index.
    #[inline]
    pub fn poch(&self, k: usize) -> &Cx<R> {
        &self.pochhammer[k]
    }

    /// `(q̄)_k` without bounds checking beyond the slice index.
    #[inline]
    pub fn poch_bar(&self, k: usize) -> &Cx<R> {
        &self.pochhammer_bar[k]
    }

    /// `(n)!` without bounds checking beyond the slice index.
    #[inline]
    pub fn fact(&self, n: usize) -> &Cx<R> {
        &self.factorial[n]
    }

    /// Full `(q)_k` table, `k = 0 .. N-1`.
    pub fn pochhammer_table(&self) -> &[Cx<R>] {
        &self.pochhammer
    }

    /// Full `(q̄)_k` table, `k = 0 .. N-1`.
    pub fn pochhammer_bar_table(&self) -> &[Cx<R>] {
        &self.pochhammer_bar
    }

    fn check_index(&self, what: &str, k: i64) -> Result<usize> {
        if k < 0 || k >= self.n as i64 {
            return Err(Error::InvalidArgument(format!(
                "{what} index {k} outside 0..={}",
                self.n - 1
            )));
        }
        Ok(k as usize)
    }

    /// Gaussian binomial `[α over i]` in the symmetric normalization,
    /// zero when `i > α`.
    pub fn qbinomial(&self, alpha: usize, i: usize) -> Cx<R> {
        if i > alpha {
            return Complex::new(R::zero(), R::zero());
        }
        self.fact(alpha).clone() / (self.fact(i).clone() * self.fact(alpha - i).clone())
    }
}

/// `(q)_k` for `0 ≤ k ≤ N-1`.
pub fn pochhammer<R: Real>(ctx: &RootOfUnityContext<R>, k: i64) -> Result<Cx<R>> {
    let k = ctx.check_index("pochhammer", k)?;
    Ok(ctx.poch(k).clone())
}

/// `(q̄)_k` for `0 ≤ k ≤ N-1`.
pub fn pochhammer_bar<R: Real>(ctx: &RootOfUnityContext<R>, k: i64) -> Result<Cx<R>> {
    let k = ctx.check_index("pochhammer_bar", k)?;
    Ok(ctx.poch_bar(k).clone())
}

/// `(n)! = ∏_{j=1}^{n} (s^j - s^{-j})` for `0 ≤ n ≤ N-1`.
pub fn qfactorial_s<R: Real>(ctx: &RootOfUnityContext<R>, n: i64) -> Result<Cx<R>> {
    let n = ctx.check_index("qfactorial", n)?;
    Ok(ctx.fact(n).clone())
}

/// Residual `|LHS - RHS|` of the q-binomial identity
/// `Σ_{i=0}^{N-1} (-1)^i s^{βi} [α over i] = ∏_{j=1}^{α} (1 - s^{β+α+1-2j})`.
///
/// Returns the residual together with `|RHS|`.
pub fn verify_qbinomial_identity<R: Real>(
    ctx: &RootOfUnityContext<R>,
    alpha: i64,
    beta: i64,
) -> Result<(R, R)> {
    let alpha = ctx.check_index("alpha", alpha)?;
    let mut lhs = crate::backend::CompensatedSum::<R>::new();
    for i in 0..=alpha {
        let mut term = ctx.qbinomial(alpha, i) * ctx.s_pow(beta * i as i64).clone();
        if i % 2 == 1 {
            term = -term;
        }
        lhs.add(term);
    }
    let mut rhs = Complex::new(R::one(), R::zero());
    for j in 1..=alpha as i64 {
        let e = beta + alpha as i64 + 1 - 2 * j;
        rhs = rhs * (Complex::new(R::one(), R::zero()) - ctx.s_pow(e).clone());
    }
    let residual = crate::backend::cabs(&(lhs.total() - rhs.clone()));
    Ok((residual, crate::backend::cabs(&rhs)))
}
