//! State-vector contraction of a tangle diagram.
//!
//! The evaluator sweeps a dense vector over the labelings of the strands at
//! the current level. The index is mixed-radix with base `N`, position 0 the
//! most significant digit. Crossings apply the `R`-matrix in gather form;
//! cups and caps insert or contract a pair of equal labels with the
//! orientation weights `−s^{2a+1}` (leftward cup), `−s^{−2a−1}` (leftward
//! cap), or `1` (rightward). The cut strand carries label 0 at both ends, so
//! the value is the single surviving entry of the top vector.

use super::diagram::{CrossingSign, DiagramProfile, Event, Orientation, TangleDiagram};
use crate::backend::{Cx, Real};
use crate::error::{Error, Result};
use crate::qarith::RootOfUnityContext;
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

/// Default bound on `#slices · N^{w_max+1}` for a single evaluation.
pub const DEFAULT_COST_BUDGET: f64 = 1e9;

/// Matrix element `R^{ij}_{kl}` (sign `+`) or `R̄^{ij}_{kl}` (sign `−`) with
/// bottom labels `(i, j)` and top labels `(k, l)` on strands `(p, p+1)`.
///
/// Entries outside the label range or violating `k + l = i + j` are zero.
pub fn r_matrix_entry<R: Real>(
    ctx: &RootOfUnityContext<R>,
    sign: CrossingSign,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Cx<R> {
    let n = ctx.n();
    if i >= n || j >= n || k >= n || l >= n || i + j != k + l {
        return Cx::<R>::zero();
    }
    match sign {
        CrossingSign::Positive if l >= i => plus_weight(ctx, i, j, l - i),
        CrossingSign::Negative if i >= l => minus_weight(ctx, i, j, i - l),
        _ => Cx::<R>::zero(),
    }
}

/// `R` weight for `l = i + m`, `k = j − m` (zero outside the support).
fn plus_weight<R: Real>(ctx: &RootOfUnityContext<R>, i: usize, j: usize, m: usize) -> Cx<R> {
    let n = ctx.n();
    if i + m > n - 1 || m > j {
        return Cx::<R>::zero();
    }
    let (ni, ii, ji, mi) = (n as i64, i as i64, j as i64, m as i64);
    let e2 = (2 * ii - ni + 1) * (2 * ji - ni + 1) - 2 * mi * (ii - ji) - mi * (mi + 1);
    ctx.fact(i + m).clone() * ctx.fact(n - 1 + m - j).clone()
        / (ctx.fact(i).clone() * ctx.fact(n - 1 - j).clone() * ctx.fact(m).clone())
        * ctx.half_pow(e2).clone()
}

/// `R̄` weight for `l = i − m`, `k = j + m` (zero outside the support).
fn minus_weight<R: Real>(ctx: &RootOfUnityContext<R>, i: usize, j: usize, m: usize) -> Cx<R> {
    let n = ctx.n();
    if j + m > n - 1 || m > i {
        return Cx::<R>::zero();
    }
    let (ni, ii, ji, mi) = (n as i64, i as i64, j as i64, m as i64);
    let e2 = -(2 * ii - ni + 1) * (2 * ji - ni + 1) - 2 * mi * (ii - ji) + mi * (mi + 1);
    let w = ctx.fact(j + m).clone() * ctx.fact(n - 1 + m - i).clone()
        / (ctx.fact(j).clone() * ctx.fact(n - 1 - i).clone() * ctx.fact(m).clone())
        * ctx.half_pow(e2).clone();
    if m % 2 == 1 {
        -w
    } else {
        w
    }
}

/// Sparse rows of a crossing matrix: for each output pair index `a·N + b`,
/// the list of `(input pair index, weight)`.
type PairMatrix<R> = Vec<Vec<(usize, Cx<R>)>>;

/// Gather rows of the crossing acting bottom-up: output `(k, l)` from input
/// `(i, j)`.
fn forward_rows<R: Real>(ctx: &RootOfUnityContext<R>, sign: CrossingSign) -> PairMatrix<R> {
    let n = ctx.n();
    let mut rows = vec![Vec::new(); n * n];
    for (k, l) in (0..n).flat_map(|k| (0..n).map(move |l| (k, l))) {
        let row = &mut rows[k * n + l];
        match sign {
            CrossingSign::Positive => {
                for m in 0..=l.min(n - 1 - k) {
                    let (i, j) = (l - m, k + m);
                    row.push((i * n + j, plus_weight(ctx, i, j, m)));
                }
            }
            CrossingSign::Negative => {
                for m in 0..=k.min(n - 1 - l) {
                    let (i, j) = (l + m, k - m);
                    row.push((i * n + j, minus_weight(ctx, i, j, m)));
                }
            }
        }
    }
    rows
}

/// Rows of the transposed crossing acting top-down: output `(i, j)` from
/// input `(k, l)`.
fn transposed_rows<R: Real>(ctx: &RootOfUnityContext<R>, sign: CrossingSign) -> PairMatrix<R> {
    let n = ctx.n();
    let mut rows = vec![Vec::new(); n * n];
    for (i, j) in (0..n).flat_map(|i| (0..n).map(move |j| (i, j))) {
        let row = &mut rows[i * n + j];
        match sign {
            CrossingSign::Positive => {
                for m in 0..=j.min(n - 1 - i) {
                    let (k, l) = (j - m, i + m);
                    row.push((k * n + l, plus_weight(ctx, i, j, m)));
                }
            }
            CrossingSign::Negative => {
                for m in 0..=i.min(n - 1 - j) {
                    let (k, l) = (j + m, i - m);
                    row.push((k * n + l, minus_weight(ctx, i, j, m)));
                }
            }
        }
    }
    rows
}

/// Cup weights indexed by label: the left leg orientation decides whether
/// the minimum turns left (`−s^{2a+1}`) or right (`1`).
fn cup_weights<R: Real>(ctx: &RootOfUnityContext<R>, left: Orientation) -> Vec<Cx<R>> {
    (0..ctx.n() as i64)
        .map(|a| match left {
            Orientation::Up => -ctx.half_pow(4 * a + 2).clone(),
            Orientation::Down => Complex::new(R::one(), R::zero()),
        })
        .collect()
}

/// Cap weights indexed by label: `1` over (up, down), `−s^{−2a−1}` over
/// (down, up).
fn cap_weights<R: Real>(ctx: &RootOfUnityContext<R>, left: Orientation) -> Vec<Cx<R>> {
    (0..ctx.n() as i64)
        .map(|a| match left {
            Orientation::Up => Complex::new(R::one(), R::zero()),
            Orientation::Down => -ctx.half_pow(-4 * a - 2).clone(),
        })
        .collect()
}

fn pow_usize(n: usize, e: usize) -> usize {
    n.pow(e as u32)
}

/// Applies a two-strand matrix to positions `(p, p+1)` of a width-`w` state.
fn apply_pair<R: Real>(state: &[Cx<R>], n: usize, w: usize, p: usize, rows: &PairMatrix<R>) -> Vec<Cx<R>> {
    let lo = pow_usize(n, w - p - 2);
    let nn = n * n;
    let mut out = vec![Cx::<R>::zero(); state.len()];
    out.par_chunks_mut(lo).enumerate().for_each(|(c, chunk)| {
        let pre = c / nn;
        let pair = c % nn;
        for (src, weight) in &rows[pair] {
            let base = (pre * nn + src) * lo;
            for (o, x) in chunk.iter_mut().zip(&state[base..base + lo]) {
                if !x.is_zero() {
                    *o += weight.clone() * x.clone();
                }
            }
        }
    });
    out
}

/// Inserts a pair of equal labels at positions `(p, p+1)` of a width-`w`
/// state, weighting label `a` by `weights[a]`.
fn insert_pair<R: Real>(state: &[Cx<R>], n: usize, w: usize, p: usize, weights: &[Cx<R>]) -> Vec<Cx<R>> {
    let lo = pow_usize(n, w - p);
    let nn = n * n;
    let mut out = vec![Cx::<R>::zero(); state.len() * nn];
    out.par_chunks_mut(lo).enumerate().for_each(|(c, chunk)| {
        let pre = c / nn;
        let (a, b) = ((c % nn) / n, c % n);
        if a != b {
            return;
        }
        let src = &state[pre * lo..(pre + 1) * lo];
        for (o, x) in chunk.iter_mut().zip(src) {
            *o = weights[a].clone() * x.clone();
        }
    });
    out
}

/// Contracts the equal-label pair at positions `(p, p+1)` of a width-`w`
/// state with weights `weights[a]`.
fn contract_pair<R: Real>(state: &[Cx<R>], n: usize, w: usize, p: usize, weights: &[Cx<R>]) -> Vec<Cx<R>> {
    let lo = pow_usize(n, w - p - 2);
    let nn = n * n;
    let mut out = vec![Cx::<R>::zero(); state.len() / nn];
    out.par_chunks_mut(lo).enumerate().for_each(|(pre, chunk)| {
        for (a, weight) in weights.iter().enumerate() {
            let base = (pre * nn + a * n + a) * lo;
            for (o, x) in chunk.iter_mut().zip(&state[base..base + lo]) {
                if !x.is_zero() {
                    *o += weight.clone() * x.clone();
                }
            }
        }
    });
    out
}

fn check_budget(d: &TangleDiagram, profile: &DiagramProfile, n: usize, budget: f64) -> Result<()> {
    let estimated = d.events.len().max(1) as f64 * (n as f64).powi(profile.max_width as i32 + 1);
    if estimated > budget {
        return Err(Error::Budget {
            what: format!(
                "tangle contraction with {} slices, width {}, N = {n}",
                d.events.len(),
                profile.max_width
            ),
            estimated,
            budget,
        });
    }
    Ok(())
}

/// Writhe normalization `θ^{−writhe}` with `θ = s^{(N²−1)/2}`.
fn framing_factor<R: Real>(ctx: &RootOfUnityContext<R>, writhe: i64) -> Cx<R> {
    let n = ctx.n() as i64;
    ctx.half_pow(-writhe * (n * n - 1)).clone()
}

/// Runs the bottom-up sweep over `events[..upto]`.
fn sweep_up<R: Real>(
    ctx: &RootOfUnityContext<R>,
    d: &TangleDiagram,
    profile: &DiagramProfile,
    upto: usize,
) -> Vec<Cx<R>> {
    let n = ctx.n();
    let mut state = vec![Cx::<R>::zero(); n];
    state[0] = Complex::new(R::one(), R::zero());
    for (idx, e) in d.events[..upto].iter().enumerate() {
        let w = profile.levels[idx].len();
        state = match *e {
            Event::Crossing { sign, pos } => apply_pair(&state, n, w, pos, &forward_rows(ctx, sign)),
            Event::Cup { pos, left } => insert_pair(&state, n, w, pos, &cup_weights(ctx, left)),
            Event::Cap { pos, .. } => {
                let left = profile.levels[idx][pos];
                contract_pair(&state, n, w, pos, &cap_weights(ctx, left))
            }
        };
    }
    state
}

/// Runs the top-down sweep with transposed slices over `events[from..]`.
fn sweep_down<R: Real>(
    ctx: &RootOfUnityContext<R>,
    d: &TangleDiagram,
    profile: &DiagramProfile,
    from: usize,
) -> Vec<Cx<R>> {
    let n = ctx.n();
    let mut state = vec![Cx::<R>::zero(); n];
    state[0] = Complex::new(R::one(), R::zero());
    for idx in (from..d.events.len()).rev() {
        // Width above the event.
        let w = profile.levels[idx + 1].len();
        state = match d.events[idx] {
            Event::Crossing { sign, pos } => apply_pair(&state, n, w, pos, &transposed_rows(ctx, sign)),
            Event::Cup { pos, left } => contract_pair(&state, n, w, pos, &cup_weights(ctx, left)),
            Event::Cap { pos, .. } => {
                let left = profile.levels[idx][pos];
                insert_pair(&state, n, w, pos, &cap_weights(ctx, left))
            }
        };
    }
    state
}

/// Unnormalized (blackboard-framed) value of the diagram.
pub fn evaluate_tangle_raw<R: Real>(
    d: &TangleDiagram,
    ctx: &RootOfUnityContext<R>,
    budget: f64,
) -> Result<Cx<R>> {
    let profile = d.validate()?;
    check_budget(d, &profile, ctx.n(), budget)?;
    let state = sweep_up(ctx, d, &profile, d.events.len());
    Ok(state[0].clone())
}

/// Framing-independent value `raw · θ^{−writhe}`; for a link diagram this is
/// the Kashaev invariant, equal to the colored Jones polynomial at `q`.
pub fn evaluate_tangle<R: Real>(
    d: &TangleDiagram,
    ctx: &RootOfUnityContext<R>,
    budget: f64,
) -> Result<Cx<R>> {
    let profile = d.validate()?;
    let raw = evaluate_tangle_raw(d, ctx, budget)?;
    Ok(raw * framing_factor(ctx, profile.writhe))
}

/// Same value as [`evaluate_tangle`], contracted in a different order: the
/// slices below `level` are swept upwards, the ones above are swept
/// downwards with transposed matrices, and the two vectors are paired.
pub fn evaluate_tangle_split<R: Real>(
    d: &TangleDiagram,
    ctx: &RootOfUnityContext<R>,
    level: usize,
    budget: f64,
) -> Result<Cx<R>> {
    let profile = d.validate()?;
    if level > d.events.len() {
        return Err(Error::InvalidArgument(format!(
            "split level {level} beyond {} slices",
            d.events.len()
        )));
    }
    check_budget(d, &profile, ctx.n(), budget)?;
    let below = sweep_up(ctx, d, &profile, level);
    let above = sweep_down(ctx, d, &profile, level);
    let mut acc = crate::backend::CompensatedSum::new();
    for (a, b) in below.into_iter().zip(above) {
        if !a.is_zero() && !b.is_zero() {
            acc.add(a * b);
        }
    }
    Ok(acc.total() * framing_factor(ctx, profile.writhe))
}
