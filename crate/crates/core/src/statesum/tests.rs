//! Oracle tests: naive summations, the tangle contraction, and basic
//! invariants of the closed forms.

use super::*;
use crate::qarith::make_context;
use crate::tangle::DEFAULT_COST_BUDGET;
use num_complex::Complex64;

/// Independent tables built from the defining products.
struct Naive {
    n: usize,
    q: Complex64,
    p: Vec<Complex64>,
    pb: Vec<Complex64>,
}

impl Naive {
    fn new(n: usize) -> Self {
        let q = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / n as f64);
        let mut p = vec![Complex64::new(1.0, 0.0)];
        for k in 1..n {
            let last = p[k - 1];
            p.push(last * (1.0 - q.powi(k as i32)));
        }
        let pb = p.iter().map(|z| z.conj()).collect();
        Naive { n, q, p, pb }
    }

    fn qp(&self, e: i64) -> Complex64 {
        self.q.powi(e.rem_euclid(self.n as i64) as i32)
    }

    fn whitehead(&self) -> Complex64 {
        let (n, p) = (self.n, &self.p);
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..=i.min(j) {
                    t += p[i] * p[j] * p[n - 1 - k] * p[n - 1 - k]
                        / (p[k] * p[k] * p[n - 1 - i] * p[n - 1 - j] * p[i - k] * p[j - k])
                        * self.qp(-((k * (i + j + 1)) as i64));
                }
            }
        }
        t
    }

    fn whitehead_rewritten(&self) -> Complex64 {
        let (n, p, pb) = (self.n, &self.p, &self.pb);
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..=i.min(j) {
                    t += (pb[i] * pb[j]).powi(2) / (p[k].powi(4) * pb[i - k] * pb[j - k]);
                }
            }
        }
        t * self.qp(-((n * (n - 1) / 2) as i64))
    }

    fn k6_3(&self) -> Complex64 {
        let (n, p, pb) = (self.n, &self.p, &self.pb);
        let mut t = Complex64::new(0.0, 0.0);
        for k in 0..n {
            for l in 0..n - k {
                for m in 0..n - k - l {
                    t += (p[k + l + m] / (p[l] * p[m])).norm_sqr()
                        * p[k + l]
                        * pb[m + k]
                        * self.qp((m as i64 - l as i64) * (k as i64 + 1));
                }
            }
        }
        t
    }

    fn k8_9(&self) -> Complex64 {
        let (n, p, pb) = (self.n, &self.p, &self.pb);
        let mut t = Complex64::new(0.0, 0.0);
        for l in 0..n {
            for m1 in 0..=l {
                for m2 in 0..=l - m1 {
                    for n1 in 0..=l - m1 {
                        for n2 in 0..=l - m2 {
                            let (li, m1i, m2i, n1i, n2i) =
                                (l as i64, m1 as i64, m2 as i64, n1 as i64, n2 as i64);
                            let e = (m2i - m1i) * (li - m1i - m2i)
                                + (n2i - n1i) * (li - n1i - n2i)
                                + m2i - m1i + n2i - n1i;
                            t += (p[l - m1] * p[l] * p[l - m2] / (p[m1] * p[m2] * p[n1] * p[n2])).norm_sqr()
                                * pb[l - n1]
                                * p[l - n2]
                                / (p[l - m1 - n1] * pb[l - m2 - n2])
                                * self.qp(e);
                        }
                    }
                }
            }
        }
        t
    }

    fn k8_20(&self) -> Complex64 {
        let (n, p, pb) = (self.n, &self.p, &self.pb);
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..=i {
                for l in 0..n {
                    for k in j.max(l)..=(i + l).min(n - 1) {
                        for m in 0..n {
                            if i + l > j + m {
                                continue;
                            }
                            // Every subscript below is nonnegative by the
                            // range constraints.
                            assert!(k >= l && i + l >= k);
                            assert!(j + m >= i + l && i >= j && k >= j);
                            let (ii, ki, li, mi) = (i as i64, k as i64, l as i64, m as i64);
                            t += (pb[i] * p[k] * pb[m]).powi(2)
                                / ((pb[j] * p[l]).powi(2)
                                    * p[k - l]
                                    * pb[i + l - k]
                                    * pb[j + m - i - l]
                                    * p[i - j]
                                    * p[k - j])
                                * self.qp(ki + mi + ii * mi + ki * mi - ii * li);
                        }
                    }
                }
            }
        }
        t
    }

    fn k5_2(&self) -> Complex64 {
        let (n, p, pb) = (self.n, &self.p, &self.pb);
        let mut t = Complex64::new(0.0, 0.0);
        for l in 0..n {
            for k in 0..=l {
                t += p[l] * p[l] / pb[k] * self.qp(-((k * (l + 1)) as i64));
            }
        }
        t
    }
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + b.norm())
}

#[test]
fn closed_forms_match_naive_sums() {
    for n in 1..=9 {
        let ctx = make_context::<f64>(n).unwrap();
        let nv = Naive::new(n);
        let pairs = [
            ("whitehead", whitehead_primary(&ctx).unwrap().value, nv.whitehead()),
            ("rewritten", whitehead_rewritten(&ctx, true).unwrap().value, nv.whitehead_rewritten()),
            ("6_3", sum_6_3(&ctx).unwrap().value, nv.k6_3()),
            ("8_9", sum_8_9(&ctx).unwrap().value, nv.k8_9()),
            ("8_20", sum_8_20(&ctx).unwrap().value, nv.k8_20()),
            ("5_2", sum_5_2(&ctx).unwrap().value, nv.k5_2()),
        ];
        for (name, fast, slow) in pairs {
            assert!(close(fast, slow, 1e-11), "{name} N={n}: {fast} vs {slow}");
        }
    }
}

#[test]
fn oracle_equivalence_up_to_documented_unit() {
    let budgets = Budgets::default();
    for n in 2..=6 {
        let ctx = make_context::<f64>(n).unwrap();
        for formula in [
            Formula::WhiteheadPrimary,
            Formula::Sum6_3,
            Formula::Sum8_9,
            Formula::Sum8_20,
            Formula::Sum5_2,
            Formula::Sum4_1,
        ] {
            let link = formula.link().unwrap();
            let closed = evaluate_formula(&ctx, link, formula, &budgets).unwrap().value;
            let oracle = evaluate_formula(&ctx, link, Formula::TangleOracle, &budgets).unwrap().value;
            let unit = oracle_unit(formula, &ctx).unwrap();
            assert!(close(closed, unit * oracle, 1e-10), "{formula} N={n}: {closed} vs {}", unit * oracle);
        }
    }
}

#[test]
fn implementer_sums_validated_to_n_eight() {
    let budgets = Budgets::default();
    for n in 7..=8 {
        let ctx = make_context::<f64>(n).unwrap();
        for formula in [Formula::Sum5_2, Formula::Sum4_1] {
            let link = formula.link().unwrap();
            let closed = evaluate_formula(&ctx, link, formula, &budgets).unwrap().value;
            let oracle = evaluate_tangle(&builtin_diagram(link), &ctx, DEFAULT_COST_BUDGET).unwrap();
            let unit = oracle_unit(formula, &ctx).unwrap();
            assert!(close(closed, unit * oracle, 1e-10), "{formula} N={n}");
        }
    }
}

#[test]
fn every_link_is_one_at_n_one() {
    let ctx = make_context::<f64>(1).unwrap();
    for link in LinkId::ALL {
        let v = jones_generic(&ctx, link, &Budgets::default()).unwrap();
        assert!((v.value - 1.0).norm() < 1e-14, "{link}");
    }
    for formula in Formula::ALL {
        if let Some(link) = formula.link() {
            let v = evaluate_formula(&ctx, link, formula, &Budgets::default()).unwrap();
            assert!((v.value - 1.0).norm() < 1e-14, "{formula}");
        }
    }
}

#[test]
fn rewritten_and_primary_whitehead_sums_differ_in_size() {
    // The two printed Whitehead sums are not equal: already at N = 2 their
    // moduli are 8 and 10. The primary sum agrees with the oracle.
    let ctx = make_context::<f64>(2).unwrap();
    assert!((jones_whitehead(&ctx).unwrap().norm() - 8.0).abs() < 1e-12);
    assert!((jones_whitehead_alt(&ctx).unwrap().norm() - 10.0).abs() < 1e-12);
}

#[test]
fn dispatch_metadata() {
    let ctx = make_context::<f64>(4).unwrap();
    let b = Budgets::default();
    let v = jones_generic(&ctx, LinkId::K6_1, &b).unwrap();
    assert_eq!(v.method, Method::TangleOracle);
    let v = jones_generic(&ctx, LinkId::K5_2, &b).unwrap();
    assert!(v.implementer_derived);
    assert_eq!(v.method, Method::ClosedForm);
    let v = jones_generic(&ctx, LinkId::K8_9, &b).unwrap();
    assert!(!v.implementer_derived);
    assert!(evaluate_formula(&ctx, LinkId::K6_3, Formula::Sum8_9, &b).is_err());
    for f in Formula::ALL {
        assert_eq!(f.name().parse::<Formula>().unwrap(), f);
    }
}

#[test]
fn budgets_are_enforced() {
    let ctx = make_context::<f64>(61).unwrap();
    let err = jones_generic(&ctx, LinkId::K8_20, &Budgets::default()).unwrap_err();
    assert!(matches!(err, Error::Budget { .. }));
    let relaxed = Budgets {
        max_n_eight_crossing: 61,
        ..Budgets::default()
    };
    assert!(jones_generic(&make_context::<f64>(7).unwrap(), LinkId::K8_20, &relaxed).is_ok());
    let ctx = make_context::<f64>(40).unwrap();
    assert!(matches!(
        jones_generic(&ctx, LinkId::K6_1, &Budgets::default()),
        Err(Error::Budget { .. })
    ));
}

/// `2π (log|J_{N+1}| − log|J_N|)` on a backend with enough precision for
/// the sum's condition number.
fn growth(link: LinkId, n: usize) -> f64 {
    let b = Budgets::default();
    let eval = |n: usize| -> f64 {
        let v = jones_generic(&make_context::<f64>(n).unwrap(), link, &b).unwrap();
        if v.error_estimate() < 1e-8 {
            return v.value.norm().ln();
        }
        #[cfg(feature = "extended")]
        {
            use crate::backend::{cabs, Mp};
            let v = jones_generic(&make_context::<Mp>(n).unwrap(), link, &b).unwrap();
            cabs(&v.value).ln().to_f64()
        }
        #[cfg(not(feature = "extended"))]
        panic!("{link} at N={n} needs the extended backend");
    };
    2.0 * std::f64::consts::PI * (eval(n + 1) - eval(n))
}

#[test]
fn growth_rate_is_near_the_volume() {
    let cases = [
        (LinkId::K4_1, 2.0298832),
        (LinkId::K5_2, 2.8281220),
        (LinkId::K6_3, 5.693021),
        (LinkId::K8_9, 7.5881802),
        (LinkId::K8_20, 4.1249032),
        (LinkId::Whitehead, 3.663862),
    ];
    for (link, vol) in cases {
        let g = growth(link, 40);
        assert!((g - vol).abs() <= 0.25 * vol, "{link}: {g} vs {vol}");
    }
}

#[cfg(feature = "extended")]
#[test]
fn extended_backend_agrees_with_double() {
    use crate::backend::{to_c64, Mp};
    let b = Budgets::default();
    for link in [LinkId::Whitehead, LinkId::K6_3, LinkId::K5_2, LinkId::K8_9, LinkId::K8_20] {
        let d = jones_generic(&make_context::<f64>(9).unwrap(), link, &b).unwrap().value;
        let e = jones_generic(&make_context::<Mp>(9).unwrap(), link, &b).unwrap().value;
        assert!(close(to_c64(&e), d, 1e-12), "{link}");
    }
}

#[test]
fn cached_evaluation_returns_identical_bits() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let ctx = make_context::<f64>(12).unwrap();
    let b = Budgets::default();
    let cold = evaluate_cached(&ctx, LinkId::K6_3, Formula::Sum6_3, &b, Some(&cache)).unwrap();
    let warm = evaluate_cached(&ctx, LinkId::K6_3, Formula::Sum6_3, &b, Some(&cache)).unwrap();
    assert_eq!(cold.value.re.to_bits(), warm.value.re.to_bits());
    assert_eq!(cold.value.im.to_bits(), warm.value.im.to_bits());
}
