//! Deterministic adaptive Simpson quadrature.
//!
//! The interval is first cut into `min_panels` uniform panels, each of which
//! is then refined by recursive bisection until its Richardson error estimate
//! `|S2 - S1| / 15` drops below its share of the global tolerance. Large slit
//! arrays produce integrands with thousands of lobes, so the caller sizes
//! `min_panels` from the lobe width (see [`oscillatory_panels`]) and the
//! adaptive stage only has to polish each lobe.

use crate::error::{Error, Result};

/// Evaluation budget that bounds the cost of hopeless tolerances.
pub const DEFAULT_MAX_EVALS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub min_panels: usize,
    /// Integrand evaluations allowed for the adaptive stage.
    pub max_evals: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_depth: 30,
            min_panels: 1,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

impl QuadSpec {
    pub fn with_panels(self, min_panels: usize) -> Self {
        QuadSpec { min_panels, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_depth < 1 || self.min_panels < 1 || self.max_evals < 1 {
            return Err(Error::InvalidParameter(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }
}

/// Tolerances plus lobe sampling density; turned into a [`QuadSpec`] per integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Initial panels per oscillation lobe.
    pub density: u32,
    pub max_evals: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_depth: 30,
            density: 8,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

impl Settings {
    /// Spec for an integral over an angular range `[lo, hi]` whose integrand
    /// oscillates with the given lobe width (`None` for smooth integrands).
    pub fn spec_for(&self, lobe_width: Option<f64>, lo: f64, hi: f64) -> QuadSpec {
        let min_panels = match lobe_width {
            Some(w) if w > 0.0 && hi > lo => oscillatory_panels(w, lo, hi, self.density),
            _ => 4,
        };
        QuadSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_depth: self.max_depth,
            min_panels,
            max_evals: self.max_evals,
        }
    }
}

/// Integral value and the summed Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Number of initial panels so that each lobe of width `lobe_width` gets at
/// least `density` of them.
pub fn oscillatory_panels(lobe_width: f64, lo: f64, hi: f64, density: u32) -> usize {
    assert!(lobe_width > 0.0 && density >= 1, "lobe_width > 0 and density >= 1 required");
    let raw = f64::from(density) * (hi - lo).abs() / lobe_width;
    // slack absorbs representation error in exact ratios like 0.02 / 1e-4
    let panels = (raw * (1.0 - 1e-12)).ceil();
    if panels.is_finite() {
        (panels as usize).max(1)
    } else {
        usize::MAX
    }
}

/// Integrates `f` over `[lo, hi]`.
///
/// Fails with [`Error::Convergence`] (carrying the best estimate) if the
/// summed error estimate exceeds `max(abs_tol, rel_tol * |value|)` once every
/// panel has hit `max_depth`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadSpec) -> Result<Estimate> {
    spec.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("integration bounds [{lo}, {hi}]")));
    }
    let n = spec.min_panels;
    let nodes = 2 * n;
    let width = hi - lo;
    let x_at = |i: usize| {
        if i == nodes {
            hi
        } else {
            lo + width * (i as f64 / nodes as f64)
        }
    };
    let fx: Vec<f64> = (0..=nodes).map(|i| f(x_at(i))).collect();

    let mut coarse = Sum::default();
    for j in 0..n {
        let (a, b) = (x_at(2 * j), x_at(2 * j + 2));
        coarse.add(simpson(b - a, fx[2 * j], fx[2 * j + 1], fx[2 * j + 2]));
    }
    let target = spec.abs_tol.max(spec.rel_tol * coarse.total().abs());

    let mut tally = Tally { value: Sum::default(), error: Sum::default(), budget: spec.max_evals };
    for j in 0..n {
        let panel = Panel {
            a: x_at(2 * j),
            m: x_at(2 * j + 1),
            b: x_at(2 * j + 2),
            fa: fx[2 * j],
            fm: fx[2 * j + 1],
            fb: fx[2 * j + 2],
        };
        let whole = simpson(panel.b - panel.a, panel.fa, panel.fm, panel.fb);
        let tol = target * (panel.b - panel.a) / width;
        refine(&f, panel, whole, tol, spec.max_depth, &mut tally);
    }

    let estimate = Estimate {
        value: tally.value.total(),
        error: tally.error.total(),
    };
    if estimate.error <= target.max(spec.rel_tol * estimate.value.abs()) {
        Ok(estimate)
    } else {
        Err(Error::Convergence {
            estimate: estimate.value,
            error_bound: estimate.error,
        })
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
}

fn simpson(h: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    h * (fa + 4.0 * fm + fb) / 6.0
}

struct Tally {
    value: Sum,
    error: Sum,
    budget: usize,
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    p: Panel,
    whole: f64,
    tol: f64,
    depth: u32,
    tally: &mut Tally,
) {
    tally.budget = tally.budget.saturating_sub(2);
    let (lm, rm) = (0.5 * (p.a + p.m), 0.5 * (p.m + p.b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.m - p.a, p.fa, flm, p.fm);
    let right = simpson(p.b - p.m, p.fm, frm, p.fb);
    let diff = left + right - whole;
    let err = diff.abs() / 15.0;
    if err <= tol || depth <= 1 || tally.budget == 0 {
        tally.value.add(left + right + diff / 15.0);
        tally.error.add(err);
        return;
    }
    let lp = Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm };
    let rp = Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb };
    refine(f, lp, left, 0.5 * tol, depth - 1, tally);
    refine(f, rp, right, 0.5 * tol, depth - 1, tally);
}

/// Neumaier compensated sum.
#[derive(Default)]
struct Sum {
    sum: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_integrand() {
        let spec = QuadSpec::default();
        let est = integrate(|_| 1.0, 0.0, PI, &spec).unwrap();
        assert!((est.value - PI).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        let est = integrate(|x| x * x, 0.0, 1.0, &QuadSpec::default()).unwrap();
        assert!((est.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn highly_oscillatory_sine_squared() {
        let spec = QuadSpec {
            rel_tol: 1e-10,
            min_panels: 4000,
            ..QuadSpec::default()
        };
        let est = integrate(|x| (1000.0 * x).sin().powi(2), 0.0, PI, &spec).unwrap();
        // closed form: x/2 - sin(2000 x)/4000
        let exact = PI / 2.0 - (2000.0 * PI).sin() / 4000.0;
        assert!((est.value - exact).abs() < 1e-8);
    }

    #[test]
    fn deterministic() {
        let spec = QuadSpec::default().with_panels(37);
        let f = |x: f64| (x * 13.0).sin() * (-x).exp();
        let a = integrate(f, 0.0, 3.0, &spec).unwrap();
        let b = integrate(f, 0.0, 3.0, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error.to_bits(), b.error.to_bits());
    }

    #[test]
    fn evaluation_budget_bounds_hopeless_tolerances() {
        let calls = std::cell::Cell::new(0usize);
        let spec = QuadSpec { rel_tol: 1e-300, max_evals: 10_000, ..QuadSpec::default() }.with_panels(4);
        let f = |x: f64| {
            calls.set(calls.get() + 1);
            (50.0 * x).sin()
        };
        assert!(matches!(integrate(f, 0.0, 1.0, &spec), Err(Error::Convergence { .. })));
        assert!(calls.get() <= 10_000 + 9 + 2 * 30);
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let spec = QuadSpec {
            rel_tol: 1e-14,
            max_depth: 2,
            ..QuadSpec::default()
        };
        match integrate(|x: f64| x.sqrt(), 0.0, 1.0, &spec) {
            Err(Error::Convergence { estimate, error_bound }) => {
                assert!((estimate - 2.0 / 3.0).abs() < 1e-2);
                assert!(error_bound > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate(|x| x, 1.0, 0.0, &QuadSpec::default()).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, &QuadSpec::default()).is_err());
        let bad = QuadSpec { rel_tol: 0.0, ..QuadSpec::default() };
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn panel_counts() {
        assert_eq!(oscillatory_panels(0.1, 0.0, 1.0, 8), 80);
        assert_eq!(oscillatory_panels(2.0, 0.0, 1.0, 1), 1);
        assert_eq!(oscillatory_panels(1.0, 0.0, 1.0, 1), 1);
        assert_eq!(oscillatory_panels(1e-4, 0.0, 2.5e-3, 8), 200);
    }

    #[test]
    fn settings_size_panels_from_lobes() {
        let s = Settings::default();
        assert_eq!(s.spec_for(Some(0.1), 0.0, 1.0).min_panels, 80);
        assert_eq!(s.spec_for(None, 0.0, 1.0).min_panels, 4);
    }

    #[test]
    fn error_bound_shrinks_with_more_panels() {
        let fs: [fn(f64) -> f64; 3] = [|x| (3.0 * x).exp(), |x| (7.0 * x).sin(), |x| 1.0 / (1.0 + x * x)];
        for f in fs {
            let mut prev = f64::INFINITY;
            for panels in [4, 8, 16, 32, 64, 128] {
                let spec = QuadSpec { rel_tol: 1e-3, ..QuadSpec::default() }.with_panels(panels);
                let est = integrate(f, 0.0, 2.0, &spec).unwrap();
                assert!(est.error <= prev, "{panels}: {} > {prev}", est.error);
                prev = est.error;
            }
        }
    }

    fn poly(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
    }

    proptest! {
        #[test]
        fn linearity(
            p in prop::collection::vec(-5.0f64..5.0, 1..7),
            q in prop::collection::vec(-5.0f64..5.0, 1..7),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let spec = QuadSpec::default().with_panels(3);
            let fp = integrate(|x| poly(&p, x), -1.0, 2.0, &spec).unwrap().value;
            let fq = integrate(|x| poly(&q, x), -1.0, 2.0, &spec).unwrap().value;
            let both = integrate(|x| alpha * poly(&p, x) + beta * poly(&q, x), -1.0, 2.0, &spec)
                .unwrap()
                .value;
            let combined = alpha * fp + beta * fq;
            let scale = (alpha * fp).abs() + (beta * fq).abs() + 1.0;
            prop_assert!((both - combined).abs() <= 10.0 * spec.rel_tol * scale);
        }

        #[test]
        fn interval_additivity(mid in 0.1f64..2.9, k in 0.5f64..20.0) {
            let spec = QuadSpec { rel_tol: 1e-10, ..QuadSpec::default() }.with_panels(16);
            let f = |x: f64| (k * x).cos() + x;
            let whole = integrate(f, 0.0, 3.0, &spec).unwrap().value;
            let left = integrate(f, 0.0, mid, &spec).unwrap().value;
            let right = integrate(f, mid, 3.0, &spec).unwrap().value;
            prop_assert!((whole - (left + right)).abs() <= 1e-8 * whole.abs().max(1.0));
        }
    }
}
