//! Dilogarithm potentials of the supported hyperbolic links.
//!
//! Each potential is a finite sum of terms `c·Li₂(M)` and `c·log(M₁)·log(M₂)`
//! in Laurent monomials `M` of the variables, plus a constant. This shape
//! makes three things mechanical:
//!
//! * the gradient, via `w ∂_w Li₂(M) = −e_w log(1 − M)` and
//!   `w ∂_w log M = e_w` (with `e_w` the exponent of `w` in `M`);
//! * the exponentiated stationary equations `exp(w ∂_w V) = 1`, which clear
//!   to polynomial identities `Π(1−M)^a Π M^b = Π(1−M)^c Π M^d` that do not
//!   depend on any branch choice;
//! * substitution of a variable at infinity: every `Li₂(M)` whose monomial
//!   has only negative powers of the infinite variables tends to `Li₂(0) = 0`,
//!   and any other occurrence of an infinite variable is a domain error.
//!
//! Values are computed with principal branches. At a stationary point each
//! `w ∂_w V` is then a multiple of `2πi` rather than zero, so the value on
//! the branch where the gradient vanishes is
//! `V₀ = V − Σ_w (w ∂_w V) log w`, which is what the predicted volume and
//! Chern–Simons invariant are read from.

use crate::dilog::li2;
use crate::error::{Error, Result};
use crate::links::LinkId;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// One coordinate of a potential point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coord {
    /// A finite, nonzero complex value.
    Finite(Complex64),
    /// The point at infinity (only where the potential has a finite limit).
    Infinity,
}

impl Coord {
    /// The finite value, if any.
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Coord::Finite(z) => Some(*z),
            Coord::Infinity => None,
        }
    }

    /// Whether this coordinate is at infinity.
    pub fn is_infinite(&self) -> bool {
        matches!(self, Coord::Infinity)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Finite(z) => write!(f, "{:.10}{:+.10}i", z.re, z.im),
            Coord::Infinity => write!(f, "inf"),
        }
    }
}

/// A point in the domain of a potential.
pub type PotentialPoint = Vec<Coord>;

/// A Laurent monomial given by its exponent vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(pub Vec<i32>);

impl Monomial {
    /// Parses `"xzv"`, `"1/xy"`, `"z/y"`: each letter is one variable factor,
    /// letters after `/` are in the denominator.
    fn parse(text: &str, vars: &str) -> Monomial {
        let mut exps = vec![0; vars.len()];
        let mut sign = 1;
        for ch in text.chars() {
            match ch {
                '1' => {}
                '/' => sign = -1,
                c => {
                    let idx = vars.find(c).unwrap_or_else(|| panic!("unknown variable {c} in {text}"));
                    exps[idx] += sign;
                }
            }
        }
        Monomial(exps)
    }

    fn eval(&self, w: &[Complex64]) -> Complex64 {
        let mut m = Complex64::new(1.0, 0.0);
        for (e, &z) in self.0.iter().zip(w) {
            m *= z.powi(*e);
        }
        m
    }
}

/// A term of a potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// `coeff · Li₂(M)`.
    Li2 {
        /// Integer coefficient.
        coeff: i32,
        /// Argument.
        mono: Monomial,
    },
    /// `coeff · log(A) · log(B)`, principal logarithms.
    LogLog {
        /// Integer coefficient.
        coeff: i32,
        /// First logarithm's argument.
        a: Monomial,
        /// Second logarithm's argument.
        b: Monomial,
    },
}

/// A potential function.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    /// Link this potential belongs to.
    pub link: LinkId,
    /// Variable names, one letter each.
    pub vars: &'static str,
    /// Terms of the sum.
    pub terms: Vec<Term>,
    /// Additive constant.
    pub constant: f64,
    /// Which variables may be placed at infinity, as sets that may be used
    /// together (each set is one registered reduction).
    pub infinite_sets: Vec<Vec<usize>>,
}

/// Evaluated potential value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialValue {
    /// Value with principal branches.
    pub principal: Complex64,
    /// Value on the branch where the gradient vanishes: `V − Σ (w∂_wV) log w`.
    pub v: Complex64,
    /// Predicted volume `−Im V₀`.
    pub vol_pred: f64,
    /// `Re V₀` reduced to `(−π²/2, π²/2]`.
    pub cs_pred: f64,
}

impl PotentialValue {
    fn new(principal: Complex64, v: Complex64) -> Self {
        PotentialValue { principal, v, vol_pred: -v.im, cs_pred: reduce_mod_pi2(v.re) }
    }
}

/// Reduces `x` modulo `π²` into `(−π²/2, π²/2]`; idempotent.
pub fn reduce_mod_pi2(x: f64) -> f64 {
    let p2 = PI * PI;
    let mut r = x - p2 * (x / p2).round();
    if r <= -p2 / 2.0 {
        r += p2;
    } else if r > p2 / 2.0 {
        r -= p2;
    }
    r
}

/// Representative of `x + kπ²` closest to `target`.
pub fn nearest_mod_pi2(x: f64, target: f64) -> f64 {
    let p2 = PI * PI;
    x + p2 * ((target - x) / p2).round()
}

fn li2_terms(vars: &str, items: &[(i32, &str)]) -> Vec<Term> {
    items
        .iter()
        .map(|&(coeff, m)| Term::Li2 { coeff, mono: Monomial::parse(m, vars) })
        .collect()
}

fn log_terms(vars: &str, items: &[(i32, &str, &str)]) -> Vec<Term> {
    items
        .iter()
        .map(|&(coeff, a, b)| Term::LogLog { coeff, a: Monomial::parse(a, vars), b: Monomial::parse(b, vars) })
        .collect()
}

/// Potential of the 6₃ knot in variables `(z, u, v)`.
pub fn v_6_3() -> Potential {
    let vars = "zuv";
    let mut terms = li2_terms(
        vars,
        &[
            (1, "zuv"),
            (-1, "1/zuv"),
            (1, "zv"),
            (-1, "1/zu"),
            (-1, "u"),
            (1, "1/u"),
            (-1, "v"),
            (1, "1/v"),
        ],
    );
    terms.extend(log_terms(vars, &[(-1, "z", "u/v")]));
    Potential { link: LinkId::K6_3, vars, terms, constant: 0.0, infinite_sets: vec![] }
}

/// Potential of the 8₉ knot in variables `(x, y, z, u, v)`.
///
/// The dilogarithm part enters with an overall minus sign and the
/// log-products are `log(y/z)log(xyz) + log(u/v)log(xuv)`; this is the form
/// whose gradient vanishes (mod `2πi`) at the known stationary point and
/// whose imaginary part is negative there.
pub fn v_8_9() -> Potential {
    let vars = "xyzuv";
    let printed = [
        (-1, "xy"),
        (1, "1/xy"),
        (-1, "xz"),
        (1, "1/xz"),
        (-1, "xu"),
        (1, "1/xv"),
        (-1, "x"),
        (1, "1/x"),
        (-1, "y"),
        (1, "1/y"),
        (-1, "z"),
        (1, "1/z"),
        (-1, "u"),
        (1, "1/u"),
        (-1, "v"),
        (1, "1/v"),
        (1, "xzv"),
        (-1, "1/xyu"),
    ];
    let negated: Vec<(i32, &str)> = printed.iter().map(|&(c, m)| (-c, m)).collect();
    let mut terms = li2_terms(vars, &negated);
    terms.extend(log_terms(vars, &[(1, "y/z", "xyz"), (1, "u/v", "xuv")]));
    Potential { link: LinkId::K8_9, vars, terms, constant: 0.0, infinite_sets: vec![] }
}

/// Potential of the 8₂₀ knot in variables `(x, y, z, u, v)`; `y` may be at
/// infinity.
///
/// The fifth dilogarithm is `−2Li₂(1/v)`: this is the term whose
/// `v`-derivative gives the stationary equation `(1−1/v)²z = (1−1/(xyuv))x`.
pub fn v_8_20() -> Potential {
    let vars = "xyzuv";
    let mut terms = li2_terms(
        vars,
        &[
            (-2, "x"),
            (2, "1/y"),
            (2, "z"),
            (-2, "1/u"),
            (-2, "1/v"),
            (-1, "1/xy"),
            (-1, "z/y"),
            (-1, "zu"),
            (1, "xzu"),
            (1, "1/xyuv"),
        ],
    );
    terms.extend(log_terms(vars, &[(1, "x", "u"), (1, "x", "v"), (-1, "z", "v")]));
    Potential { link: LinkId::K8_20, vars, terms, constant: PI * PI / 2.0, infinite_sets: vec![vec![1]] }
}

/// Potential of the Whitehead link in variables `(x, y, z)`; `x` and `y`
/// may be at infinity together, leaving `−4Li₂(z) + π²`.
pub fn v_whitehead() -> Potential {
    let vars = "xyz";
    let terms = li2_terms(vars, &[(-2, "1/x"), (-2, "1/y"), (-4, "z"), (1, "z/x"), (1, "z/y")]);
    Potential { link: LinkId::Whitehead, vars, terms, constant: PI * PI, infinite_sets: vec![vec![0, 1]] }
}

/// The potential registered for `link`, if any.
pub fn potential_for(link: LinkId) -> Option<Potential> {
    match link {
        LinkId::K6_3 => Some(v_6_3()),
        LinkId::K8_9 => Some(v_8_9()),
        LinkId::K8_20 => Some(v_8_20()),
        LinkId::Whitehead => Some(v_whitehead()),
        _ => None,
    }
}

/// Links with a registered potential.
pub const POTENTIAL_LINKS: [LinkId; 4] = [LinkId::K6_3, LinkId::K8_9, LinkId::K8_20, LinkId::Whitehead];

/// The known stationary point of `link`'s potential from the embedded
/// reference data, to its printed digits.
pub fn reference_point(link: LinkId) -> Option<PotentialPoint> {
    crate::reference::reference_table().point(link).ok()
}

/// One factor of a cleared stationary equation: `base^power`, where the base
/// is either `M` or `1 − M`.
#[derive(Debug, Clone, PartialEq)]
struct Factor {
    mono: Monomial,
    one_minus: bool,
    power: i32,
}

/// The potential restricted to a pattern of infinite coordinates.
#[derive(Debug, Clone)]
pub struct Reduced<'a> {
    pot: &'a Potential,
    /// Indices of the finite (active) variables.
    pub active: Vec<usize>,
    terms: Vec<&'a Term>,
}

impl Potential {
    /// Number of variables.
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Variable names.
    pub fn var_names(&self) -> Vec<String> {
        self.vars.chars().map(|c| c.to_string()).collect()
    }

    /// Restriction to the given infinity pattern.
    pub fn reduce(&self, infinite: &[bool]) -> Result<Reduced<'_>> {
        if infinite.len() != self.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} coordinates, got {}",
                self.link,
                self.arity(),
                infinite.len()
            )));
        }
        let inf: Vec<usize> = (0..infinite.len()).filter(|&i| infinite[i]).collect();
        if !inf.is_empty() && !self.infinite_sets.iter().any(|s| *s == inf) {
            return Err(Error::Domain(format!(
                "{}: coordinates {:?} cannot be placed at infinity",
                self.link,
                inf.iter().map(|&i| &self.vars[i..=i]).collect::<Vec<_>>()
            )));
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            match t {
                Term::Li2 { mono, .. } => {
                    let exps: Vec<i32> = inf.iter().map(|&i| mono.0[i]).collect();
                    if exps.iter().all(|&e| e == 0) {
                        terms.push(t);
                    } else if exps.iter().any(|&e| e > 0) {
                        return Err(Error::Domain(format!("{}: a dilogarithm diverges at infinity", self.link)));
                    }
                    // Otherwise the argument tends to 0 and the term vanishes.
                }
                Term::LogLog { a, b, .. } => {
                    if inf.iter().any(|&i| a.0[i] != 0 || b.0[i] != 0) {
                        return Err(Error::Domain(format!("{}: a logarithm diverges at infinity", self.link)));
                    }
                    terms.push(t);
                }
            }
        }
        let active = (0..infinite.len()).filter(|&i| !infinite[i]).collect();
        Ok(Reduced { pot: self, active, terms })
    }

    fn split(&self, point: &[Coord]) -> Result<(Reduced<'_>, Vec<Complex64>)> {
        let infinite: Vec<bool> = point.iter().map(Coord::is_infinite).collect();
        let red = self.reduce(&infinite)?;
        let mut w = vec![Complex64::new(1.0, 0.0); point.len()];
        for (i, c) in point.iter().enumerate() {
            if let Coord::Finite(z) = c {
                if !(z.re.is_finite() && z.im.is_finite()) || *z == Complex64::new(0.0, 0.0) {
                    return Err(Error::Domain(format!("{}: coordinate {} = {z}", self.link, &self.vars[i..=i])));
                }
                w[i] = *z;
            }
        }
        Ok((red, w))
    }

    /// Evaluates the potential. Where the gradient is singular (a dilogarithm
    /// argument equal to 1) the branch correction is undefined and `v`
    /// equals the principal value.
    pub fn value(&self, point: &[Coord]) -> Result<PotentialValue> {
        let (red, w) = self.split(point)?;
        let v = red.principal(&w);
        let Ok(wg) = red.log_gradient(&w) else {
            return Ok(PotentialValue::new(v, v));
        };
        let mut v0 = v;
        for (k, &i) in red.active.iter().enumerate() {
            v0 -= wg[k] * w[i].ln();
        }
        Ok(PotentialValue::new(v, v0))
    }

    /// Gradient `∂V/∂w` over the finite coordinates (in order).
    pub fn gradient(&self, point: &[Coord]) -> Result<Vec<Complex64>> {
        let (red, w) = self.split(point)?;
        let wg = red.log_gradient(&w)?;
        Ok(red.active.iter().zip(wg).map(|(&i, g)| g / w[i]).collect())
    }

    /// Largest `|exp(w ∂_w V) − 1|` over the finite coordinates, evaluated in
    /// cleared (branch-free) form.
    pub fn stationary_residual(&self, point: &[Coord]) -> Result<f64> {
        let (red, w) = self.split(point)?;
        Ok(red.ratios(&w).iter().map(|r| (r - 1.0).norm()).fold(0.0, f64::max))
    }

    /// Cleared stationary equations at `point`: one `(lhs, rhs)` pair per
    /// finite coordinate with `exp(w ∂_w V) = lhs/rhs`, each side a product
    /// of non-negative powers.
    pub fn cleared_equations(&self, point: &[Coord]) -> Result<Vec<(Complex64, Complex64)>> {
        let (red, w) = self.split(point)?;
        Ok(red
            .factors()
            .iter()
            .map(|fs| {
                let mut lhs = Complex64::new(1.0, 0.0);
                let mut rhs = Complex64::new(1.0, 0.0);
                for f in fs {
                    let b = f.base(&w);
                    if f.power > 0 {
                        lhs *= b.powi(f.power);
                    } else {
                        rhs *= b.powi(-f.power);
                    }
                }
                (lhs, rhs)
            })
            .collect())
    }
}

impl Factor {
    fn base(&self, w: &[Complex64]) -> Complex64 {
        let m = self.mono.eval(w);
        if self.one_minus {
            1.0 - m
        } else {
            m
        }
    }

    /// `∂(log base)/∂w_j`.
    fn dlog(&self, w: &[Complex64], j: usize) -> Complex64 {
        let e = self.mono.0[j];
        if e == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.mono.eval(w);
        if self.one_minus {
            -(e as f64) * m / (w[j] * (1.0 - m))
        } else {
            (e as f64) / w[j]
        }
    }
}

impl Reduced<'_> {
    /// Principal value of the (reduced) potential.
    fn principal(&self, w: &[Complex64]) -> Complex64 {
        let mut v = Complex64::new(self.pot.constant, 0.0);
        for t in &self.terms {
            match t {
                Term::Li2 { coeff, mono } => v += *coeff as f64 * li2(mono.eval(w)).value,
                Term::LogLog { coeff, a, b } => v += *coeff as f64 * a.eval(w).ln() * b.eval(w).ln(),
            }
        }
        v
    }

    /// `w ∂_w V` for each active coordinate.
    fn log_gradient(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.active.len()];
        for t in &self.terms {
            match t {
                Term::Li2 { coeff, mono } => {
                    let m = mono.eval(w);
                    let one_minus = 1.0 - m;
                    let touches = self.active.iter().any(|&i| mono.0[i] != 0);
                    if touches && one_minus.norm() == 0.0 {
                        return Err(Error::Domain(format!(
                            "{}: gradient is singular where a dilogarithm argument equals 1",
                            self.pot.link
                        )));
                    }
                    let l = one_minus.ln();
                    for (k, &i) in self.active.iter().enumerate() {
                        let e = mono.0[i];
                        if e != 0 {
                            out[k] -= (*coeff * e) as f64 * l;
                        }
                    }
                }
                Term::LogLog { coeff, a, b } => {
                    let la = a.eval(w).ln();
                    let lb = b.eval(w).ln();
                    for (k, &i) in self.active.iter().enumerate() {
                        out[k] += *coeff as f64 * (a.0[i] as f64 * lb + b.0[i] as f64 * la);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Factors of `exp(w ∂_w V)` for each active coordinate.
    fn factors(&self) -> Vec<Vec<Factor>> {
        self.active
            .iter()
            .map(|&i| {
                let mut fs: Vec<Factor> = Vec::new();
                let mut push = |mono: &Monomial, one_minus: bool, power: i32| {
                    if power == 0 {
                        return;
                    }
                    if let Some(f) = fs.iter_mut().find(|f| f.mono == *mono && f.one_minus == one_minus) {
                        f.power += power;
                    } else {
                        fs.push(Factor { mono: mono.clone(), one_minus, power });
                    }
                };
                for t in &self.terms {
                    match t {
                        Term::Li2 { coeff, mono } => push(mono, true, -coeff * mono.0[i]),
                        Term::LogLog { coeff, a, b } => {
                            push(b, false, coeff * a.0[i]);
                            push(a, false, coeff * b.0[i]);
                        }
                    }
                }
                fs.retain(|f| f.power != 0);
                fs
            })
            .collect()
    }

    /// `exp(w ∂_w V)` for each active coordinate, as products of powers.
    fn ratios(&self, w: &[Complex64]) -> Vec<Complex64> {
        self.factors()
            .iter()
            .map(|fs| fs.iter().map(|f| f.base(w).powi(f.power)).product())
            .collect()
    }

    /// `exp(w ∂_w V) − 1` and its Jacobian over the active coordinates.
    pub(crate) fn system(&self, w: &[Complex64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let factors = self.factors();
        let mut f = Vec::with_capacity(factors.len());
        let mut jac = Vec::with_capacity(factors.len());
        for fs in &factors {
            let r: Complex64 = fs.iter().map(|fa| fa.base(w).powi(fa.power)).product();
            f.push(r - 1.0);
            jac.push(
                self.active
                    .iter()
                    .map(|&j| r * fs.iter().map(|fa| fa.power as f64 * fa.dlog(w, j)).sum::<Complex64>())
                    .collect(),
            );
        }
        (f, jac)
    }
}
