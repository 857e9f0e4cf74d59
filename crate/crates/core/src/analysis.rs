//! Log-ratio sequences `2π·Log(J_{N+1}/J_N)`, their fits in `1/N`, and
//! comparison of the fitted limits with the reference constants.
//!
//! Sequences are formed in the requested arithmetic backend and reported at
//! full precision; fits convert the values to `f64`. The default model is
//! `a + b/N + c/N²` fitted by unweighted least squares, with the real and
//! imaginary parts sharing one design matrix. Higher degrees are available
//! as a refinement.

use crate::backend::{cabs, cln, to_c64, Backend, Cx, Real};
use crate::error::{Error, Result};
use crate::links::LinkId;
use crate::potentials::reduce_mod_pi2;
use crate::qarith::make_context;
use crate::reference::ReferenceEntry;
use crate::saddle::Agreement;
use crate::statesum::{evaluate_cached, Budgets, Cache, Formula};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// One sequence value in a concrete backend.
#[derive(Debug, Clone)]
pub struct SequencePoint<R: Real> {
    /// Color `N`.
    pub n: usize,
    /// `2π·Log(J_{N+1}/J_N)`, principal logarithm.
    pub ell: Cx<R>,
    /// Estimated relative error of the two invariants combined.
    pub error_estimate: f64,
}

/// A backend-independent sequence value with full-precision text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    /// Color `N`.
    #[serde(rename = "N")]
    pub n: usize,
    /// Real part at full backend precision.
    pub re: String,
    /// Imaginary part at full backend precision.
    pub im: String,
    /// The value rounded to double precision.
    #[serde(skip)]
    pub value: Complex64,
    /// Backend tag.
    #[serde(skip)]
    pub backend: String,
    /// Estimated relative error.
    #[serde(skip)]
    pub error_estimate: f64,
}

impl<R: Real> SequencePoint<R> {
    /// Converts to a record.
    pub fn record(&self) -> SequenceRecord {
        SequenceRecord {
            n: self.n,
            re: self.ell.re.to_repr(),
            im: self.ell.im.to_repr(),
            value: to_c64(&self.ell),
            backend: crate::backend::backend_tag::<R>(),
            error_estimate: self.error_estimate,
        }
    }
}

/// Computes `2π·Log(J_{N+1}/J_N)` for each `N` in `ns`, evaluating every
/// distinct invariant once (in parallel) and through `cache` when given.
///
/// # Errors
/// Evaluator errors are propagated; a vanishing invariant is a range error.
pub fn build_sequence<R: Real>(
    link: LinkId,
    ns: &[usize],
    budgets: &Budgets,
    cache: Option<&Cache>,
) -> Result<Vec<SequencePoint<R>>> {
    if let Some(&bad) = ns.iter().find(|&&n| n == 0) {
        return Err(Error::InvalidArgument(format!("N must be positive, got {bad}")));
    }
    let formula = Formula::sequence_source(link);
    let mut needed: Vec<usize> = ns.iter().flat_map(|&n| [n, n + 1]).collect();
    needed.sort_unstable();
    needed.dedup();
    let values: Vec<(usize, Cx<R>, f64)> = needed
        .par_iter()
        .map(|&n| {
            let ctx = make_context::<R>(n)?;
            let v = evaluate_cached(&ctx, link, formula, budgets, cache)?;
            let err = v.error_estimate();
            Ok((n, v.value, err))
        })
        .collect::<Result<_>>()?;
    let table: BTreeMap<usize, (Cx<R>, f64)> = values.into_iter().map(|(n, v, e)| (n, (v, e))).collect();
    let two_pi = R::pi() * R::from_i64(2);
    ns.iter()
        .map(|&n| {
            let (a, ea) = &table[&n];
            let (b, eb) = &table[&(n + 1)];
            if cabs(a) == R::zero() || cabs(b) == R::zero() {
                return Err(Error::Range(format!("{link}: vanishing invariant at N = {n} or {}", n + 1)));
            }
            let log = cln(&(b.clone() / a.clone()));
            Ok(SequencePoint { n, ell: log * two_pi.clone(), error_estimate: ea + eb })
        })
        .collect()
}

/// Backend selection for sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    /// Double precision unless its error estimate exceeds the target, in
    /// which case the whole sequence is recomputed in extended precision.
    Auto,
    /// Always double precision.
    Double,
    /// Always extended precision.
    Extended,
}

impl std::str::FromStr for BackendChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(BackendChoice::Auto),
            "double" => Ok(BackendChoice::Double),
            "extended" => Ok(BackendChoice::Extended),
            other => Err(Error::InvalidArgument(format!("unknown backend {other:?} (auto, double, extended)"))),
        }
    }
}

/// Error target used by [`BackendChoice::Auto`].
pub const AUTO_ERROR_TARGET: f64 = 1e-12;

/// Builds a sequence in the chosen backend and returns records.
pub fn build_sequence_records(
    link: LinkId,
    ns: &[usize],
    choice: BackendChoice,
    budgets: &Budgets,
    cache: Option<&Cache>,
) -> Result<Vec<SequenceRecord>> {
    let records = |pts: Vec<SequencePoint<f64>>| pts.iter().map(SequencePoint::record).collect::<Vec<_>>();
    match choice {
        BackendChoice::Double => Ok(records(build_sequence::<f64>(link, ns, budgets, cache)?)),
        BackendChoice::Extended => extended_records(link, ns, budgets, cache),
        BackendChoice::Auto => {
            let pts = build_sequence::<f64>(link, ns, budgets, cache)?;
            let worst = pts.iter().map(|p| p.error_estimate).fold(0.0, f64::max);
            if worst <= AUTO_ERROR_TARGET || !cfg!(feature = "extended") {
                if worst > AUTO_ERROR_TARGET {
                    log::warn!("{link}: double-precision error estimate {worst:.1e} exceeds {AUTO_ERROR_TARGET:.0e}");
                }
                Ok(records(pts))
            } else {
                log::info!("{link}: double-precision error estimate {worst:.1e}; switching to extended precision");
                extended_records(link, ns, budgets, cache)
            }
        }
    }
}

#[cfg(feature = "extended")]
fn extended_records(link: LinkId, ns: &[usize], budgets: &Budgets, cache: Option<&Cache>) -> Result<Vec<SequenceRecord>> {
    use crate::backend::Mp;
    Ok(build_sequence::<Mp>(link, ns, budgets, cache)?.iter().map(SequencePoint::record).collect())
}

#[cfg(not(feature = "extended"))]
fn extended_records(_: LinkId, _: &[usize], _: &Budgets, _: Option<&Cache>) -> Result<Vec<SequenceRecord>> {
    Err(Error::InvalidArgument("built without the extended backend".into()))
}

/// Significant decimal digits to which `computed` agrees with `reference`
/// (both decimal strings), measured in backend `R`; 0 when they disagree in
/// the leading digit and `R::decimal_digits()` when they are equal.
pub fn digits_of_agreement<R: Real>(computed: &str, reference: &str) -> Result<f64> {
    let parse = |s: &str| R::from_repr(s.trim()).ok_or_else(|| Error::Parse(format!("bad number {s:?}")));
    let a = parse(computed)?;
    let b = parse(reference)?;
    let diff = (a - b.clone()).abs();
    if diff == R::zero() {
        return Ok(R::decimal_digits() as f64);
    }
    let scale = if b.abs() == R::zero() { R::one() } else { b.abs() };
    Ok((-(diff / scale).ln().to_f64() / std::f64::consts::LN_10).max(0.0))
}

/// A fitted polynomial in `1/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Coefficients of `1, 1/N, 1/N², …`.
    pub coefficients: Vec<Complex64>,
    /// The constant coefficient (the `N → ∞` limit).
    pub limit: Complex64,
    /// `Im(limit)` reduced modulo `π²`.
    pub cs_top: f64,
    /// Root-mean-square of the complex residuals.
    pub residual_rms: f64,
    /// Number of points fitted.
    pub points_used: usize,
}

impl FitResult {
    /// Polynomial degree.
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Human-readable model, e.g. `a+b/N+c/N^2`.
    pub fn model(&self) -> String {
        let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
        (0..self.coefficients.len())
            .map(|k| match k {
                0 => names[0].to_string(),
                1 => format!("{}/N", names[1]),
                _ => format!("{}/N^{k}", names.get(k).copied().unwrap_or("x")),
            })
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Value of the fitted model at `N`.
    pub fn eval(&self, n: f64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc / n + c)
    }
}

/// Least-squares fit of `Σ_k c_k / N^k`, `k = 0..=degree`.
///
/// # Errors
/// Fewer than four points, non-positive `N`, or fewer distinct `N` than
/// coefficients (rank-deficient design).
pub fn fit_sequence(points: &[(usize, Complex64)], degree: usize) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!("a fit needs at least 4 points, got {}", points.len())));
    }
    if points.iter().any(|&(n, v)| n == 0 || !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidArgument("fit points need N > 0 and finite values".into()));
    }
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let ncoef = degree + 1;
    if distinct.len() < ncoef {
        return Err(Error::InvalidArgument(format!(
            "rank-deficient fit: {} distinct N for {ncoef} coefficients",
            distinct.len()
        )));
    }
    // Work in x = N_min/N ∈ (0, 1] so the columns are comparably scaled.
    let scale = distinct[0] as f64;
    let m = points.len();
    let design = DMatrix::from_fn(m, ncoef, |r, c| (scale / points[r].0 as f64).powi(c as i32));
    let rhs = DMatrix::from_fn(m, 2, |r, c| if c == 0 { points[r].1.re } else { points[r].1.im });
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Convergence(format!("least-squares solve failed: {e}")))?;
    let coefficients: Vec<Complex64> = (0..ncoef)
        .map(|k| Complex64::new(sol[(k, 0)], sol[(k, 1)]) * scale.powi(k as i32))
        .collect();
    let fitted = &design * &sol;
    let ss: f64 = (0..m)
        .map(|r| (fitted[(r, 0)] - rhs[(r, 0)]).powi(2) + (fitted[(r, 1)] - rhs[(r, 1)]).powi(2))
        .sum();
    let limit = coefficients[0];
    Ok(FitResult { coefficients, limit, cs_top: cs_top(limit), residual_rms: (ss / m as f64).sqrt(), points_used: m })
}

/// `Im(limit)` reduced to `(−π²/2, π²/2]`.
pub fn cs_top(limit: Complex64) -> f64 {
    reduce_mod_pi2(limit.im)
}

/// Comparison of a fitted limit with reference constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitComparison {
    /// Link.
    pub link: LinkId,
    /// `Re(limit)` against the volume.
    pub vol: Agreement,
    /// `cs_top` against the Chern–Simons invariant, modulo `π²`.
    pub cs: Agreement,
}

impl FitComparison {
    /// Whether both differences are within `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.vol.diff <= tol && self.cs.diff <= tol
    }

    /// One-line verdict.
    pub fn verdict(&self, tol: f64) -> String {
        format!(
            "{}: |dRe| = {:.2e}, |dCS| = {:.2e} (tolerance {tol:.0e}) -> {}",
            self.link,
            self.vol.diff,
            self.cs.diff,
            if self.within(tol) { "agrees" } else { "disagrees" }
        )
    }
}

/// Compares a fit with the reference entry of the same link.
pub fn compare(fit: &FitResult, reference: &ReferenceEntry) -> FitComparison {
    FitComparison {
        link: reference.link,
        vol: Agreement::new(fit.limit.re, reference.vol),
        cs: Agreement::new_mod_pi2(fit.cs_top, reference.cs()),
    }
}

/// A complex number serialized as `{"re": …, "im": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexParts {
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
}

impl From<Complex64> for ComplexParts {
    fn from(z: Complex64) -> Self {
        ComplexParts { re: z.re, im: z.im }
    }
}

/// Machine-readable fit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Link, when known.
    pub link: Option<LinkId>,
    /// Model string.
    pub model: String,
    /// Constant coefficient.
    pub a: ComplexParts,
    /// `1/N` coefficient.
    pub b: ComplexParts,
    /// `1/N²` coefficient.
    pub c: ComplexParts,
    /// All coefficients (longer than three for refinements).
    pub coefficients: Vec<ComplexParts>,
    /// Topological Chern–Simons estimate.
    pub cs_top: f64,
    /// Fit residual.
    pub residual_rms: f64,
    /// Number of points.
    pub points_used: usize,
    /// Comparison with the reference constants, when available.
    pub comparison: Option<FitComparison>,
}

impl FitReport {
    /// Assembles a report.
    pub fn new(link: Option<LinkId>, fit: &FitResult, reference: Option<&ReferenceEntry>) -> Self {
        let coef = |k: usize| fit.coefficients.get(k).copied().unwrap_or_default().into();
        FitReport {
            link,
            model: fit.model(),
            a: coef(0),
            b: coef(1),
            c: coef(2),
            coefficients: fit.coefficients.iter().map(|&z| z.into()).collect(),
            cs_top: fit.cs_top,
            residual_rms: fit.residual_rms,
            points_used: fit.points_used,
            comparison: reference.map(|r| compare(fit, r)),
        }
    }
}

/// Writes records as CSV with header `N,re,im`.
pub fn write_sequence_csv<W: Write>(out: W, records: &[SequenceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "re", "im"])?;
    for r in records {
        w.write_record([r.n.to_string(), r.re.clone(), r.im.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `N,re,im` CSV into fit points.
pub fn read_sequence_csv<Rd: Read>(input: Rd) -> Result<Vec<(usize, Complex64)>> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(rename = "N")]
        n: usize,
        re: f64,
        im: f64,
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    reader
        .deserialize()
        .map(|row| {
            let row: Row = row?;
            Ok((row.n, Complex64::new(row.re, row.im)))
        })
        .collect()
}

/// Which backend a record set was computed in.
pub fn records_backend(records: &[SequenceRecord]) -> Option<Backend> {
    records.first().map(|r| if r.backend == "double" { Backend::Double } else { Backend::Extended })
}
