// SPDX-License-Identifier: Apache-2.0

//! Finite probing of the standing hypotheses:
//!
//! * (A) `|a| + |b| + |a_x| + |b_x| ≤ K`
//! * (B) `|a(t,x) - a(s,x)| + |b(t,x) - b(s,x)| ≤ K |t-s|^{2H-1}`
//! * (C) `c ≥ 1/K` and `c + 1/c + |c'| + |c''| ≤ K`
//!
//! The hypotheses are stated for all `(t, x)`; this can only falsify them on a
//! sample grid. A pass means no violation was found on the probed points.

use super::ModelSpec;
use crate::{Error, HurstIndex, Result};

/// Finite-difference step used to cross-check declared derivatives.
pub const FD_STEP: f64 = 1e-6;
/// Tolerance for the derivative cross-check, relative to `max(|d|, 1)`.
pub const FD_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeDomain {
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    pub t_samples: usize,
    pub x_samples: usize,
}

impl ProbeDomain {
    pub fn new(
        t_range: (f64, f64),
        x_range: (f64, f64),
        t_samples: usize,
        x_samples: usize,
    ) -> Result<Self> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ordered(t_range) || t_range.0 < 0.0 || !ordered(x_range) {
            return Err(Error::Domain(format!(
                "probe ranges must be nonempty with t ≥ 0: t {t_range:?}, x {x_range:?}"
            )));
        }
        if t_samples < 2 || x_samples < 2 {
            return Err(Error::Domain("probe needs at least 2 samples per axis".into()));
        }
        Ok(Self {
            t_range,
            x_range,
            t_samples,
            x_samples,
        })
    }

    fn times(&self) -> Vec<f64> {
        linspace(self.t_range, self.t_samples)
    }

    fn states(&self) -> Vec<f64> {
        linspace(self.x_range, self.x_samples)
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * step })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Witness {
    Point { t: f64, x: f64 },
    Pair { t: f64, s: f64, x: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisOutcome {
    pub passed: bool,
    /// Smallest `K` that would have passed on the probe (may be infinite).
    pub required: f64,
    /// `required / K`.
    pub ratio: f64,
    pub witness: Witness,
}

impl HypothesisOutcome {
    fn new(required: f64, bound: f64, witness: Witness) -> Self {
        Self {
            passed: required <= bound,
            required,
            ratio: required / bound,
            witness,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeCheck {
    pub passed: bool,
    pub worst_error: f64,
    pub derivative: &'static str,
    pub witness: Witness,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisReport {
    pub bounded: HypothesisOutcome,
    pub time_hoelder: HypothesisOutcome,
    pub fbm_coefficient: HypothesisOutcome,
    pub derivatives: DerivativeCheck,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.bounded.passed
            && self.time_hoelder.passed
            && self.fbm_coefficient.passed
            && self.derivatives.passed
    }
}

fn finite(value: f64, what: &'static str, t: f64, x: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation { what, t, x })
    }
}

/// Probes hypotheses (A)–(C) for `model` on `domain` and cross-checks the
/// declared derivatives against central differences.
pub fn check_hypotheses(
    model: &ModelSpec,
    h: HurstIndex,
    domain: &ProbeDomain,
) -> Result<HypothesisReport> {
    let times = domain.times();
    let states = domain.states();
    let k = model.bound;
    let exponent = 2.0 * h.value() - 1.0;

    let mut bounded = (f64::NEG_INFINITY, Witness::Point { t: times[0], x: states[0] });
    let mut hoelder = (0.0f64, Witness::Pair { t: times[1], s: times[0], x: states[0] });
    let mut derivative = (0.0f64, "none", Witness::Point { t: times[0], x: states[0] });

    let mut a_col = vec![0.0; times.len()];
    let mut b_col = vec![0.0; times.len()];
    for &x in &states {
        for (i, &t) in times.iter().enumerate() {
            let a = finite(model.a(t, x), "a", t, x)?;
            let b = finite(model.b(t, x), "b", t, x)?;
            let a_x = finite(model.a_x(t, x), "a_x", t, x)?;
            let b_x = finite(model.b_x(t, x), "b_x", t, x)?;
            a_col[i] = a;
            b_col[i] = b;

            let sum = a.abs() + b.abs() + a_x.abs() + b_x.abs();
            if sum > bounded.0 {
                bounded = (sum, Witness::Point { t, x });
            }

            let fd_a = (model.a(t, x + FD_STEP) - model.a(t, x - FD_STEP)) / (2.0 * FD_STEP);
            let fd_b = (model.b(t, x + FD_STEP) - model.b(t, x - FD_STEP)) / (2.0 * FD_STEP);
            for (name, fd, declared) in [("a_x", fd_a, a_x), ("b_x", fd_b, b_x)] {
                let err = (fd - declared).abs() / declared.abs().max(1.0);
                if !(err <= derivative.0) {
                    derivative = (err, name, Witness::Point { t, x });
                }
            }
        }
        for j in 1..times.len() {
            for i in 0..j {
                let gap = (times[j] - times[i]).powf(exponent);
                let ratio = ((a_col[j] - a_col[i]).abs() + (b_col[j] - b_col[i]).abs()) / gap;
                if ratio > hoelder.0 {
                    hoelder = (
                        ratio,
                        Witness::Pair {
                            t: times[j],
                            s: times[i],
                            x,
                        },
                    );
                }
            }
        }
    }

    // (C) depends on x only. Non-positive c needs an infinite K; among those
    // points the witness is the one where c is closest to zero.
    let mut fbm = (f64::NEG_INFINITY, f64::INFINITY, Witness::Point { t: 0.0, x: states[0] });
    for &x in &states {
        let c = finite(model.c(x), "c", 0.0, x)?;
        let c_x = finite(model.c_x(x), "c_x", 0.0, x)?;
        let c_xx = finite(model.c_xx(x), "c_xx", 0.0, x)?;
        let required = if c > 0.0 {
            // c ≥ 1/K is implied by 1/c ≤ c + 1/c + … ≤ K
            c + 1.0 / c + c_x.abs() + c_xx.abs()
        } else {
            f64::INFINITY
        };
        let closer = required == f64::INFINITY && c.abs() < fbm.1;
        if required > fbm.0 || closer {
            fbm = (required, c.abs(), Witness::Point { t: 0.0, x });
        }

        let fd_c = (model.c(x + FD_STEP) - model.c(x - FD_STEP)) / (2.0 * FD_STEP);
        let fd_cx = (model.c_x(x + FD_STEP) - model.c_x(x - FD_STEP)) / (2.0 * FD_STEP);
        for (name, fd, declared) in [("c_x", fd_c, c_x), ("c_xx", fd_cx, c_xx)] {
            let err = (fd - declared).abs() / declared.abs().max(1.0);
            if !(err <= derivative.0) {
                derivative = (err, name, Witness::Point { t: 0.0, x });
            }
        }
    }

    Ok(HypothesisReport {
        bounded: HypothesisOutcome::new(bounded.0, k, bounded.1),
        time_hoelder: HypothesisOutcome::new(hoelder.0, k, hoelder.1),
        fbm_coefficient: HypothesisOutcome::new(fbm.0, k, fbm.2),
        derivatives: DerivativeCheck {
            passed: derivative.0 <= FD_TOLERANCE,
            worst_error: derivative.0,
            derivative: derivative.1,
            witness: derivative.2,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_models, FnCoefficients, Trig};

    fn h(v: f64) -> HurstIndex {
        HurstIndex::new(v).unwrap()
    }

    fn domain(x: (f64, f64)) -> ProbeDomain {
        ProbeDomain::new((0.0, 1.0), x, 21, 401).unwrap()
    }

    #[test]
    fn trig_passes_with_its_declared_constant() {
        let model = ModelSpec::new("trig", 0.0, 5.0, Trig);
        let report = check_hypotheses(&model, h(0.7), &domain((-10.0, 10.0))).unwrap();
        assert!(report.all_passed(), "{report:?}");
        // analytic sup of (A) is 1 + 1.5·√2
        assert!((report.bounded.required - (1.0 + 1.5 * 2f64.sqrt())).abs() < 1e-3);
    }

    #[test]
    fn trig_fails_c_with_k_four_and_four_and_a_half() {
        // dense-grid oracle for sup of 2 + sin x + 1/(2 + sin x) + |cos x| + |sin x|
        let (sup, arg) = (0..=2_000_000)
            .map(|i| -std::f64::consts::PI + i as f64 * std::f64::consts::TAU / 2e6)
            .map(|x| {
                let s = x.sin();
                (2.0 + s + 1.0 / (2.0 + s) + x.cos().abs() + s.abs(), x)
            })
            .fold((0.0, 0.0), |m, v| if v.0 > m.0 { v } else { m });
        assert!(sup > 4.5 && sup < 4.6, "{sup} at {arg}");
        for k in [4.0, 4.5] {
            let model = ModelSpec::new("trig", 0.0, k, Trig);
            let report = check_hypotheses(&model, h(0.7), &domain((-7.0, 7.0))).unwrap();
            assert!(report.bounded.passed && report.time_hoelder.passed);
            assert!(!report.fbm_coefficient.passed);
            let Witness::Point { x, .. } = report.fbm_coefficient.witness else {
                panic!("expected a point witness")
            };
            assert!((x.sin() - arg.sin()).abs() < 0.02, "{x}");
            assert!((report.fbm_coefficient.required - sup).abs() < 1e-3);
        }
    }

    #[test]
    fn non_positive_c_fails_near_zero() {
        let model = ModelSpec::new(
            "linear-c",
            0.0,
            4.0,
            FnCoefficients::default().fbm_diffusion(|x| x, |_| 1.0, |_| 0.0),
        );
        let report = check_hypotheses(&model, h(0.7), &ProbeDomain::new((0.0, 1.0), (-1.0, 1.0), 5, 200).unwrap())
            .unwrap();
        assert!(!report.fbm_coefficient.passed);
        assert!(report.fbm_coefficient.required.is_infinite());
        let Witness::Point { x, .. } = report.fbm_coefficient.witness else {
            panic!()
        };
        assert!(x.abs() < 0.02, "{x}");
    }

    #[test]
    fn rough_drift_fails_time_hoelder_near_zero() {
        // t^0.3 is not 0.5-Hölder at the origin: the ratio against s = 0 is t^{-0.2}
        let model = ModelSpec::new(
            "rough",
            0.0,
            2.0,
            FnCoefficients::default().drift(|t, _| t.powf(0.3), |_, _| 0.0),
        );
        let d = ProbeDomain::new((0.0, 1.0), (-1.0, 1.0), 1001, 3).unwrap();
        let report = check_hypotheses(&model, h(0.75), &d).unwrap();
        assert!(report.bounded.passed);
        assert!(!report.time_hoelder.passed);
        let Witness::Pair { t, s, .. } = report.time_hoelder.witness else {
            panic!()
        };
        assert!(t.max(s) <= 0.01, "witness pair ({t}, {s})");
    }

    #[test]
    fn sqrt_drift_is_exactly_half_hoelder() {
        let model = ModelSpec::new(
            "sqrt",
            0.0,
            1.0 + 1e-12,
            FnCoefficients::default().drift(|t, _| t.sqrt(), |_, _| 0.0),
        );
        let d = ProbeDomain::new((0.0, 1.0), (-1.0, 1.0), 201, 2).unwrap();
        let report = check_hypotheses(&model, h(0.75), &d).unwrap();
        assert!(report.time_hoelder.passed, "{:?}", report.time_hoelder);
        assert!((report.time_hoelder.required - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_derivative_is_caught() {
        let model = ModelSpec::new(
            "typo",
            0.0,
            10.0,
            FnCoefficients::default().fbm_diffusion(|x| 2.0 + x.sin(), |x| x.cos(), |x| x.sin()),
        );
        let report = check_hypotheses(&model, h(0.7), &domain((-3.0, 3.0))).unwrap();
        assert!(!report.derivatives.passed);
        assert_eq!(report.derivatives.derivative, "c_xx");
    }

    #[test]
    fn non_finite_coefficient_reports_point() {
        let model = ModelSpec::new(
            "blowup",
            0.0,
            10.0,
            FnCoefficients::default().diffusion(|_, x| 1.0 / x, |_, x| -1.0 / (x * x)),
        );
        let d = ProbeDomain::new((0.0, 1.0), (-1.0, 1.0), 3, 3).unwrap();
        match check_hypotheses(&model, h(0.7), &d) {
            Err(Error::Evaluation { what, x, .. }) => {
                assert_eq!(what, "b");
                assert_eq!(x, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn every_catalog_entry_passes_on_its_domain() {
        for &hv in &[0.55, 0.6, 0.75, 0.9] {
            for entry in builtin_models() {
                let model = entry.build(h(hv));
                let report = check_hypotheses(&model, h(hv), &entry.probe_domain(1.0)).unwrap();
                assert!(report.all_passed(), "{} at H={hv}: {report:?}", entry.name);
            }
        }
    }

    #[test]
    fn passing_is_monotone_in_k() {
        let d = domain((-5.0, 5.0));
        for k in [3.0, 4.0, 4.3, 4.34, 5.0, 100.0] {
            let lower = check_hypotheses(&ModelSpec::new("t", 0.0, k, Trig), h(0.7), &d).unwrap();
            let upper =
                check_hypotheses(&ModelSpec::new("t", 0.0, k * 1.5, Trig), h(0.7), &d).unwrap();
            if lower.all_passed() {
                assert!(upper.all_passed());
            }
        }
    }

    #[test]
    fn probe_domain_validation() {
        assert!(ProbeDomain::new((0.0, 1.0), (1.0, 1.0), 2, 2).is_err());
        assert!(ProbeDomain::new((-1.0, 1.0), (0.0, 1.0), 2, 2).is_err());
        assert!(ProbeDomain::new((0.0, 1.0), (0.0, 1.0), 1, 2).is_err());
    }
}
