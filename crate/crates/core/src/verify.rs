//! End-to-end verification against a reference table: stationary values and
//! points of the four potentials, and fitted limits of the two computed
//! log-ratio sequences.
//!
//! A saddle check passes when volume and Chern–Simons predictions agree with
//! the reference to at least [`SADDLE_DIGITS`] digits and the stationary
//! point matches the reference coordinates to within
//! [`COORD_UNITS`] units in their last printed place.
//!
//! A fit check computes the sequence at the tabulated `N`, fits it, and
//! passes when the quadratic model's limit is within [`FIT_TOL`] of the
//! reference constants *and* a quartic refinement is within
//! [`REFINED_FIT_TOL`]. The second condition makes the check sensitive to
//! perturbations of the reference constants well below the quadratic
//! model's own accuracy.

use crate::analysis::{build_sequence_records, compare, fit_sequence, BackendChoice, FitComparison};
use crate::error::{Error, Result};
use crate::links::LinkId;
use crate::potentials::{Coord, PotentialPoint, POTENTIAL_LINKS};
use crate::reference::{published_sequence, ReferenceTable};
use crate::saddle::{default_seeds, solve_saddle, Agreement, SaddleOptions};
use crate::statesum::{Budgets, Cache};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Minimum digits of agreement for a saddle check.
pub const SADDLE_DIGITS: u32 = 6;
/// Allowed coordinate deviation, in units of the last printed place.
pub const COORD_UNITS: f64 = 3.0;
/// Per-component tolerance of the quadratic fit.
pub const FIT_TOL: f64 = 2e-3;
/// Per-component tolerance of the quartic refinement.
pub const REFINED_FIT_TOL: f64 = 1e-5;
/// Links whose sequences are fitted.
pub const FIT_LINKS: [LinkId; 2] = [LinkId::K5_2, LinkId::Whitehead];

/// Outcome of one saddle check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleVerdict {
    /// Link.
    pub link: LinkId,
    /// Volume agreement, when a stationary point was found.
    pub vol: Option<Agreement>,
    /// Chern–Simons agreement (modulo π²).
    pub cs: Option<Agreement>,
    /// Largest coordinate deviation in units of the last printed place.
    pub coord_units: Option<f64>,
    /// Whether the check passed.
    pub passed: bool,
    /// Explanation when it did not.
    pub error: Option<String>,
}

/// Outcome of one fit check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitVerdict {
    /// Link.
    pub link: LinkId,
    /// Colors used.
    pub ns: Vec<usize>,
    /// Quadratic limit.
    pub limit: Option<Complex64>,
    /// Quadratic model against the reference.
    pub quadratic: Option<FitComparison>,
    /// Quartic refinement against the reference.
    pub quartic: Option<FitComparison>,
    /// Whether the check passed.
    pub passed: bool,
    /// Explanation when it did not.
    pub error: Option<String>,
}

/// One verification verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Verdict {
    /// Stationary-point check.
    Saddle(SaddleVerdict),
    /// Sequence-fit check.
    Fit(FitVerdict),
}

impl Verdict {
    /// Whether the check passed.
    pub fn passed(&self) -> bool {
        match self {
            Verdict::Saddle(v) => v.passed,
            Verdict::Fit(v) => v.passed,
        }
    }

    /// Link checked.
    pub fn link(&self) -> LinkId {
        match self {
            Verdict::Saddle(v) => v.link,
            Verdict::Fit(v) => v.link,
        }
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let body = match self {
            Verdict::Saddle(v) => match (&v.vol, &v.cs, v.coord_units, &v.error) {
                (Some(vol), Some(cs), Some(units), _) => format!(
                    "vol {:.7} ({} digits), cs {:.7} ({} digits), coordinates within {units:.2} units",
                    vol.predicted, vol.digits, cs.predicted, cs.digits
                ),
                (_, _, _, Some(e)) => e.clone(),
                _ => "incomplete".into(),
            },
            Verdict::Fit(v) => match (&v.limit, &v.quadratic, &v.quartic, &v.error) {
                (Some(l), Some(q), Some(r), _) => format!(
                    "limit {:.5}{:+.5}i, quadratic |dRe| {:.1e} |dCS| {:.1e}, quartic |dRe| {:.1e} |dCS| {:.1e}",
                    l.re, l.im, q.vol.diff, q.cs.diff, r.vol.diff, r.cs.diff
                ),
                (_, _, _, Some(e)) => e.clone(),
                _ => "incomplete".into(),
            },
        };
        let kind = match self {
            Verdict::Saddle(_) => "saddle",
            Verdict::Fit(_) => "fit",
        };
        format!("{status} {kind:<6} {:<9} {body}", self.link().to_string())
    }
}

/// Settings of a verification run.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Backend for the sequences.
    pub backend: BackendChoice,
    /// Evaluation budgets.
    pub budgets: Budgets,
    /// Newton settings.
    pub saddle: SaddleOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { backend: BackendChoice::Auto, budgets: Budgets::default(), saddle: SaddleOptions::default() }
    }
}

/// Largest per-component deviation of `found` from `printed`, measured in
/// units of the printed precision. Infinite coordinates must coincide.
pub fn coordinate_deviation(found: &[Coord], printed: &[Coord], units: &[Option<f64>]) -> Result<f64> {
    if found.len() != printed.len() || printed.len() != units.len() {
        return Err(Error::InvalidArgument("coordinate vectors of different lengths".into()));
    }
    let mut worst = 0.0f64;
    for ((f, p), u) in found.iter().zip(printed).zip(units) {
        match (f, p, u) {
            (Coord::Infinity, Coord::Infinity, _) => {}
            (Coord::Finite(a), Coord::Finite(b), Some(u)) => {
                worst = worst.max((a.re - b.re).abs() / u).max((a.im - b.im).abs() / u);
            }
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(worst)
}

/// Seeds for `link`: the table's stationary point followed by [`default_seeds`].
pub fn reference_seeds(table: &ReferenceTable, link: LinkId) -> Vec<PotentialPoint> {
    let mut seeds = Vec::new();
    if let Ok(p) = table.point(link) {
        seeds.push(p);
    }
    seeds.extend(default_seeds(link));
    seeds
}

/// Verifies the stationary point of `link` against `table`.
pub fn verify_saddle(table: &ReferenceTable, link: LinkId, opts: &SaddleOptions) -> SaddleVerdict {
    let run = || -> Result<SaddleVerdict> {
        let reference = table.lookup(link)?;
        let printed = table.point(link)?;
        let units = table.point_precision(link)?;
        let result = solve_saddle(link, Some(&reference_seeds(table, link)), opts)?;
        let vol = Agreement::new(result.vol_pred, reference.vol);
        let cs = Agreement::new_mod_pi2(result.cs_pred, reference.cs());
        let dev = coordinate_deviation(&result.point, &printed, &units)?;
        let passed = vol.digits >= SADDLE_DIGITS && cs.digits >= SADDLE_DIGITS && dev <= COORD_UNITS;
        Ok(SaddleVerdict { link, vol: Some(vol), cs: Some(cs), coord_units: Some(dev), passed, error: None })
    };
    run().unwrap_or_else(|e| SaddleVerdict {
        link,
        vol: None,
        cs: None,
        coord_units: None,
        passed: false,
        error: Some(e.to_string()),
    })
}

/// Verifies the fitted limit of `link`'s sequence, computed at the
/// tabulated colors, against `table`.
pub fn verify_fit(table: &ReferenceTable, link: LinkId, config: &VerifyConfig, cache: Option<&Cache>) -> FitVerdict {
    let ns: Vec<usize> = published_sequence(link).map(|rows| rows.iter().map(|r| r.n).collect()).unwrap_or_default();
    let run = || -> Result<FitVerdict> {
        let reference = table.lookup(link)?;
        if ns.is_empty() {
            return Err(Error::MissingReference(format!("no tabulated colors for {link}")));
        }
        let records = build_sequence_records(link, &ns, config.backend, &config.budgets, cache)?;
        let points: Vec<_> = records.iter().map(|r| (r.n, r.value)).collect();
        let quad = fit_sequence(&points, 2)?;
        let quart = fit_sequence(&points, 4)?;
        let q = compare(&quad, reference);
        let r = compare(&quart, reference);
        Ok(FitVerdict {
            link,
            ns: ns.clone(),
            limit: Some(quad.limit),
            quadratic: Some(q),
            quartic: Some(r),
            passed: q.within(FIT_TOL) && r.within(REFINED_FIT_TOL),
            error: None,
        })
    };
    run().unwrap_or_else(|e| FitVerdict {
        link,
        ns: ns.clone(),
        limit: None,
        quadratic: None,
        quartic: None,
        passed: false,
        error: Some(e.to_string()),
    })
}

/// Runs the four saddle checks and the two fit checks.
pub fn verify_all(table: &ReferenceTable, config: &VerifyConfig, cache: Option<&Cache>) -> Vec<Verdict> {
    let mut out: Vec<Verdict> =
        POTENTIAL_LINKS.iter().map(|&l| Verdict::Saddle(verify_saddle(table, l, &config.saddle))).collect();
    out.extend(FIT_LINKS.iter().map(|&l| Verdict::Fit(verify_fit(table, l, config, cache))));
    out
}
