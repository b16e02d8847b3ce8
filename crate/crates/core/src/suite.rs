//! Named verification checks, grouped into suites.
//!
//! Every check yields one or more [`BoundReport`]s. Randomized checks draw
//! from a ChaCha8 stream keyed by the suite seed and the check name, so a
//! report depends only on `(seed, check)` and not on scheduling.

use std::f64::consts::{E, TAU};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_counterexample_winding, check_envelope, check_theta_tail, identity_eq20, monitor_h,
    BoundParams, BoundReport, MarginTracker,
};
use crate::classifier::{
    empirical_run, spectral_classify, EmpiricalThresholds, RegularityClass, Shape,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig, Sampling};
use crate::linalg2::{eigen, Mat2};
use crate::system::{HolderGrid, PlanarSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    All,
    Example,
    Case1,
    Case2,
    Eq20,
    Holder,
    Theorem1,
    Integrator,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::All,
        Suite::Example,
        Suite::Case1,
        Suite::Case2,
        Suite::Eq20,
        Suite::Holder,
        Suite::Theorem1,
        Suite::Integrator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Example => "example",
            Suite::Case1 => "case1",
            Suite::Case2 => "case2",
            Suite::Eq20 => "eq20",
            Suite::Holder => "holder",
            Suite::Theorem1 => "theorem1",
            Suite::Integrator => "integrator",
        }
    }

    fn contains(self, check: &Check) -> bool {
        self == Suite::All || self == check.suite
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

struct Check {
    name: &'static str,
    suite: Suite,
    run: fn(&mut ChaCha8Rng) -> Result<Vec<BoundReport>>,
}

const CHECKS: &[Check] = &[
    Check {
        name: "example.closed_form",
        suite: Suite::Example,
        run: example_closed_form,
    },
    Check {
        name: "example.envelope",
        suite: Suite::Example,
        run: example_envelope,
    },
    Check {
        name: "example.focus",
        suite: Suite::Example,
        run: example_focus,
    },
    Check {
        name: "example.winding",
        suite: Suite::Example,
        run: example_winding,
    },
    Check {
        name: "case1",
        suite: Suite::Case1,
        run: case1,
    },
    Check {
        name: "case2",
        suite: Suite::Case2,
        run: case2,
    },
    Check {
        name: "eq20",
        suite: Suite::Eq20,
        run: eq20,
    },
    Check {
        name: "holder.counterexample",
        suite: Suite::Holder,
        run: holder_counterexample,
    },
    Check {
        name: "holder.family",
        suite: Suite::Holder,
        run: holder_family,
    },
    Check {
        name: "theorem1",
        suite: Suite::Theorem1,
        run: theorem1,
    },
    Check {
        name: "integrator",
        suite: Suite::Integrator,
        run: integrator_quality,
    },
];

/// Run every check in `suite`. Reports are sorted by name.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<BoundReport> {
    let mut reports: Vec<BoundReport> = CHECKS
        .par_iter()
        .filter(|c| suite.contains(c))
        .flat_map_iter(|c| {
            let mut rng = check_rng(seed, c.name);
            (c.run)(&mut rng).unwrap_or_else(|e| vec![failed(c.name, &e)])
        })
        .collect();
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    reports
}

fn check_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // FNV-1a of the name selects the stream
    let stream = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    });
    rng.set_stream(stream);
    rng
}

fn failed(name: &str, err: &Error) -> BoundReport {
    BoundReport {
        name: format!("{name} ({err})"),
        holds: false,
        worst_margin: f64::NEG_INFINITY,
        worst_t: f64::NAN,
        samples_checked: 0,
        slack_used: 0.0,
    }
}

/// JSON array of `{name, holds, worst_margin, worst_t, samples_checked}`.
/// Numbers carry 17 significant digits; non-finite values become `null`.
pub fn report_json(reports: &[BoundReport]) -> String {
    let num = |x: f64| {
        if x.is_finite() {
            format!("{x:.16e}")
        } else {
            "null".to_string()
        }
    };
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        let name = serde_json::to_string(&r.name).expect("strings serialize");
        let _ = write!(
            out,
            "  {{\"name\": {name}, \"holds\": {}, \"worst_margin\": {}, \"worst_t\": {}, \"samples_checked\": {}}}",
            r.holds,
            num(r.worst_margin),
            num(r.worst_t),
            r.samples_checked
        );
        out.push_str(if i + 1 < reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

const EXAMPLE_EPSILONS: [f64; 4] = [0.0, 0.5, 1.0, 1.5];
const ANALYTIC_SLACK: f64 = 1e-6;

fn eps_name(prefix: &str, eps: f64) -> String {
    format!("{prefix}.eps={eps:.1}")
}

/// Counterexample run from `r₀ = e⁻¹`, `θ₀ = 0`.
fn counterexample_run(eps: f64, t_max: f64) -> Result<crate::Trajectory> {
    integrate(
        &PlanarSystem::counterexample(eps)?,
        -1.0,
        0.0,
        &IntegratorConfig::with_t_max(t_max),
    )
}

fn example_closed_form(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let traj = counterexample_run(0.0, 1e3)?;
    let mut tracker = MarginTracker::default();
    for s in &traj.samples {
        tracker.observe(s.t, ANALYTIC_SLACK - (s.theta - s.t.ln_1p()).abs());
    }
    Ok(vec![tracker.report("example.closed_form", 0.0)])
}

fn example_envelope(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    EXAMPLE_EPSILONS
        .iter()
        .map(|&eps| {
            let traj = counterexample_run(eps, 1e3)?;
            let p = BoundParams::counterexample(eps, 1.0 / E)?;
            Ok(check_envelope(&traj, p.k1, p.k2, ANALYTIC_SLACK)
                .named(eps_name("example.envelope", eps)))
        })
        .collect()
}

fn example_winding(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    EXAMPLE_EPSILONS
        .iter()
        .map(|&eps| {
            let traj = counterexample_run(eps, 1e3)?;
            Ok(
                check_counterexample_winding(&traj, 1.0 / E, eps, ANALYTIC_SLACK)?
                    .named(eps_name("example.winding", eps)),
            )
        })
        .collect()
}

/// Focus by `t = 2.9·10⁵` for every ε; margin is turns beyond the threshold.
fn example_focus(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let thresholds = EmpiricalThresholds::default();
    EXAMPLE_EPSILONS
        .iter()
        .map(|&eps| {
            let run = empirical_run(
                &PlanarSystem::counterexample(eps)?,
                -1.0,
                0.0,
                &IntegratorConfig::with_t_max(2.9e5),
                &thresholds,
            )?;
            let mut tracker = MarginTracker::default();
            let turns = run.trajectory.winding(0.0).abs();
            let margin = if run.classification.shape == Shape::Focus {
                turns - thresholds.turns
            } else {
                f64::NEG_INFINITY
            };
            tracker.observe(run.trajectory.t_end(), margin);
            Ok(tracker.report(eps_name("example.focus", eps), 0.0))
        })
        .collect()
}

fn case1(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let (lambda, alpha, m, r0) = (-1.0, 0.5, 0.1, 0.01);
    let sys = PlanarSystem::holder_family(lambda, alpha, m, 3, false)?;
    let p = BoundParams::diagonal_case(lambda, alpha, m, r0, 0.5)?;
    let thresholds = EmpiricalThresholds::default();
    let run = empirical_run(
        &sys,
        r0.ln(),
        0.7,
        &IntegratorConfig::with_t_max(100.0),
        &thresholds,
    )?;

    let mut node = MarginTracker::default();
    node.observe(
        run.trajectory.t_end(),
        if run.classification.shape == Shape::Node {
            thresholds.tail - run.tail_variation
        } else {
            f64::NEG_INFINITY
        },
    );
    Ok(vec![
        check_envelope(&run.trajectory, f64::INFINITY, p.k, ANALYTIC_SLACK).named("case1.envelope"),
        check_theta_tail(&run.trajectory, &p, 0.0, 1e-4).named("case1.theta_tail"),
        node.report("case1.node", 0.0),
    ])
}

/// One randomized defective-case configuration.
#[derive(Debug, Clone)]
pub struct JordanDraw {
    pub system: PlanarSystem,
    pub params: BoundParams,
    pub theta0: f64,
    pub t_max: f64,
}

/// `λ ∈ [−2, −½]`, `α ∈ {0.3, 0.5, 0.7}`, `m ∈ [0.01, 1]` log-uniform,
/// wavenumber in `1..=5`, and `r₀` at most `0.9` of the contraction radius.
pub fn jordan_draw<R: Rng>(rng: &mut R) -> Result<JordanDraw> {
    let lambda: f64 = -rng.gen_range(0.5..=2.0);
    let alpha = [0.3, 0.5, 0.7][rng.gen_range(0..3)];
    let m = 10f64.powf(rng.gen_range(-2.0..=0.0));
    let wavenumber = rng.gen_range(1..=5);
    let c: f64 = 0.5;
    let r_cap = c.min(0.9 * (lambda.abs() / (4.0 * m)).powf(1.0 / alpha));
    let r0 = r_cap * 10f64.powf(-2.0 * rng.gen::<f64>());
    let theta0 = rng.gen_range(0.0..TAU);
    let params = BoundParams::jordan_case(lambda, alpha, m, r0, c)?;
    Ok(JordanDraw {
        system: PlanarSystem::holder_family(lambda, alpha, m, wavenumber, true)?,
        t_max: (4.0 * params.t0).max(2e4),
        params,
        theta0,
    })
}

pub const JORDAN_DRAWS: usize = 50;

fn case2(rng: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let draws: Vec<JordanDraw> = (0..JORDAN_DRAWS)
        .map(|_| jordan_draw(rng))
        .collect::<Result<_>>()?;
    let thresholds = EmpiricalThresholds::default();
    let outcomes: Vec<(BoundReport, f64, f64)> = draws
        .par_iter()
        .map(|d| {
            let cfg = IntegratorConfig {
                t_max: d.t_max,
                sampling: Sampling::Uniform { stride: 1.0 },
                ..IntegratorConfig::default()
            };
            let run = empirical_run(&d.system, d.params.r0.ln(), d.theta0, &cfg, &thresholds)?;
            let h = monitor_h(&run.trajectory, &d.params, ANALYTIC_SLACK)?;
            let node_margin = if run.classification.shape == Shape::Node {
                thresholds.tail - run.tail_variation
            } else {
                f64::NEG_INFINITY
            };
            Ok((
                h.to_bound_report("case2.monitor_h"),
                node_margin,
                run.trajectory.t_end(),
            ))
        })
        .collect::<Result<_>>()?;

    let mut monitor = BoundReport {
        name: "case2.monitor_h".into(),
        holds: true,
        worst_margin: f64::INFINITY,
        worst_t: f64::NAN,
        samples_checked: 0,
        slack_used: ANALYTIC_SLACK,
    };
    let mut node = MarginTracker::default();
    for (rep, node_margin, t_end) in &outcomes {
        let margin = if rep.holds {
            rep.worst_margin
        } else {
            f64::NEG_INFINITY
        };
        if margin < monitor.worst_margin || monitor.worst_t.is_nan() {
            monitor.worst_margin = margin;
            monitor.worst_t = rep.worst_t;
        }
        monitor.holds &= rep.holds;
        monitor.samples_checked += rep.samples_checked;
        node.observe(*t_end, *node_margin);
    }
    Ok(vec![monitor, node.report("case2.node", 0.0)])
}

pub const EQ20_CASES: usize = 10_000;

/// Random `(a, b, l, s)` with `b e^{−ls} ≤ a`.
pub fn eq20_draw<R: Rng>(rng: &mut R) -> (f64, f64, f64, f64) {
    let a = 10f64.powf(rng.gen_range(-1.0..=1.0));
    let b = 10f64.powf(rng.gen_range(-3.0..=1.0));
    let l = 10f64.powf(rng.gen_range(-2.0..=0.7));
    let s_min = ((b / a).ln() / l).max(0.0);
    let s = s_min + (1e-9 + rng.gen::<f64>() * 40.0) / l;
    (a, b, l, s)
}

fn eq20(rng: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let mut identity = MarginTracker::default();
    let mut positivity = MarginTracker::default();
    for _ in 0..EQ20_CASES {
        let (a, b, l, s) = eq20_draw(rng);
        let e = identity_eq20(a, b, l, s)?;
        let scale = e.rhs.abs().max(1.0);
        identity.observe(s, 1e-10 - (e.lhs - e.rhs).abs() / scale);
        if (l * s).exp() > 16.0 * a * b / (l * l) {
            positivity.observe(
                s,
                if e.positive {
                    e.lhs / scale
                } else {
                    f64::NEG_INFINITY
                },
            );
        }
    }
    Ok(vec![
        identity.report("eq20.identity", 0.0),
        positivity.report("eq20.positivity", 0.0),
    ])
}

fn holder_counterexample(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let sys = PlanarSystem::counterexample(0.0)?;
    let grid = HolderGrid::new(1e-8, 0.5);
    let est = sys.estimate_holder_constant(0.5, &grid)?;
    let mut size = MarginTracker::default();
    size.observe(
        est.r_min,
        if est.diverging {
            est.m_hat - 500.0
        } else {
            f64::NEG_INFINITY
        },
    );

    let seq = sys.holder_refinement(0.5, &grid)?;
    let mut monotone = MarginTracker::default();
    for w in seq.windows(2) {
        monotone.observe(w[1].0, w[1].1 - w[0].1);
    }
    Ok(vec![
        size.report("holder.counterexample.m_hat", 0.0),
        monotone.report("holder.counterexample.monotone", 0.0),
    ])
}

fn holder_family(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let mut tracker = MarginTracker::default();
    for (alpha, amplitude, k) in [(0.3, 0.05, 1), (0.5, 0.1, 3), (0.7, 1.0, 5), (0.5, 2.0, 2)] {
        let sys = PlanarSystem::holder_family(-1.0, alpha, amplitude, k, false)?;
        let est = sys.estimate_holder_constant(alpha, &HolderGrid::new(1e-8, 0.5))?;
        let margin = if est.diverging {
            f64::NEG_INFINITY
        } else {
            0.02 - (est.m_hat - amplitude).abs() / amplitude
        };
        tracker.observe(alpha, margin);
    }
    Ok(vec![tracker.report("holder.family", 0.0)])
}

/// A random system with distinct eigenvalues, a Hölder remainder and the
/// shape its spectrum predicts.
#[derive(Debug, Clone)]
pub struct Theorem1Draw {
    pub system: PlanarSystem,
    pub rho0: f64,
    pub theta0: f64,
    pub expected: Shape,
}

/// Basis with `|det| ≥ 0.2` and condition number below 10.
pub fn random_basis<R: Rng>(rng: &mut R) -> Mat2 {
    loop {
        let p = Mat2::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        );
        if p.det().abs() >= 0.2 && p.condition() < 10.0 {
            return p;
        }
    }
}

fn conjugate(p: Mat2, d: Mat2) -> Mat2 {
    p * d * p.inverse().expect("basis is invertible")
}

fn sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen() {
        1.0
    } else {
        -1.0
    }
}

/// Half nodes (same-sign real eigenvalues at least 0.3 apart), half foci
/// (real part and frequency in `[0.3, 3]`), each with a HolderPolar
/// remainder of exponent in `[0.3, 0.8]` and amplitude up to 1.
pub fn theorem1_draw<R: Rng>(rng: &mut R) -> Result<Theorem1Draw> {
    let s = sign(rng);
    let (d, expected) = if rng.gen() {
        let l1 = rng.gen_range(0.3..=3.0);
        let l2 = l1 + rng.gen_range(0.3..=3.0);
        (Mat2::diag(s * l1, s * l2), Shape::Node)
    } else {
        let re = s * rng.gen_range(0.3..=3.0);
        let im = rng.gen_range(0.3..=3.0);
        (Mat2::new(re, -im, im, re), Shape::Focus)
    };
    let j = conjugate(random_basis(rng), d);
    let remainder = crate::Remainder::HolderPolar {
        alpha: rng.gen_range(0.3..=0.8),
        amplitude: rng.gen_range(0.0..=1.0),
        wavenumber: rng.gen_range(1..=4),
    };
    Ok(Theorem1Draw {
        system: PlanarSystem::new(j, remainder)?,
        rho0: rng.gen_range(-4.0..=-2.0) * std::f64::consts::LN_10,
        theta0: rng.gen_range(0.0..TAU),
        expected,
    })
}

/// `diag(λ₁, λ₂)` with `λ₁ < 0 < λ₂`, conjugated by a random basis.
pub fn saddle_draw<R: Rng>(rng: &mut R) -> Mat2 {
    let d = Mat2::diag(-rng.gen_range(0.1..=3.0), rng.gen_range(0.1..=3.0));
    conjugate(random_basis(rng), d)
}

pub const THEOREM1_DRAWS: usize = 100;
pub const SADDLE_DRAWS: usize = 20;
pub const THEOREM1_T_MAX: f64 = 200.0;

fn theorem1(rng: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let draws: Vec<Theorem1Draw> = (0..THEOREM1_DRAWS)
        .map(|_| theorem1_draw(rng))
        .collect::<Result<_>>()?;
    let saddles: Vec<Mat2> = (0..SADDLE_DRAWS).map(|_| saddle_draw(rng)).collect();

    let cfg = IntegratorConfig::with_t_max(THEOREM1_T_MAX);
    let thresholds = EmpiricalThresholds::default();
    let agreement: Vec<f64> = draws
        .par_iter()
        .map(|d| {
            let reg = RegularityClass::of_system(&d.system).unwrap_or(RegularityClass::C1);
            let spectral = spectral_classify(&eigen(d.system.jacobian()), reg);
            let empirical =
                empirical_run(&d.system, d.rho0, d.theta0, &cfg, &thresholds)?.classification;
            let agree = spectral.shape == d.expected
                && empirical.shape == spectral.shape
                && empirical.stability == spectral.stability;
            Ok(if agree { 0.0 } else { -1.0 })
        })
        .collect::<Result<_>>()?;

    let mut agree = MarginTracker::default();
    for (i, m) in agreement.iter().enumerate() {
        agree.observe(i as f64, *m);
    }
    let mut saddle = MarginTracker::default();
    for (i, j) in saddles.iter().enumerate() {
        let c = spectral_classify(&eigen(*j), RegularityClass::C1);
        saddle.observe(i as f64, if c.shape == Shape::Saddle { 0.0 } else { -1.0 });
    }
    Ok(vec![
        agree.report("theorem1.agreement", 0.0),
        saddle.report("theorem1.saddles", 0.0),
    ])
}

/// `rel_tol = 10⁻⁵·2^{−i}` for `i = 0..=HALVINGS`. Above 10⁻⁵ the step cap,
/// not the tolerance, sets the step size.
pub const HALVING_START: f64 = 1e-5;
pub const HALVINGS: usize = 21;

/// Max over samples of `|θ − ln(1+t)|` on the ε = 0 counterexample.
pub fn oracle_error(rel_tol: f64) -> Result<f64> {
    let cfg = IntegratorConfig {
        rel_tol,
        abs_tol: 1e-15,
        t_max: 1e3,
        ..IntegratorConfig::default()
    };
    let traj = integrate(&PlanarSystem::counterexample(0.0)?, -1.0, 0.0, &cfg)?;
    Ok(traj
        .samples
        .iter()
        .map(|s| (s.theta - s.t.ln_1p()).abs())
        .fold(0.0, f64::max))
}

fn integrator_quality(_: &mut ChaCha8Rng) -> Result<Vec<BoundReport>> {
    let (r0, theta0) = (0.01f64, 0.3);
    let sys = PlanarSystem::linear(Mat2::scalar(-1.0))?;
    let traj = integrate(&sys, r0.ln(), theta0, &IntegratorConfig::with_t_max(5.0))?;
    let end = traj.last();
    // Cartesian end point against r₀e^{−t}(cos θ₀, sin θ₀)
    let exact = crate::Vec2::from_polar(r0 * (-5.0f64).exp(), theta0);
    let got = crate::Vec2::from_polar(end.r(), end.theta);
    let mut endpoint = MarginTracker::default();
    endpoint.observe(end.t, 1e-9 - (got - exact).norm());

    let errors: Vec<f64> = (0..=HALVINGS)
        .into_par_iter()
        .map(|i| oracle_error(HALVING_START * 0.5f64.powi(i as i32)))
        .collect::<Result<_>>()?;
    let mut halving = MarginTracker::default();
    for (i, w) in errors.windows(2).enumerate() {
        halving.observe(HALVING_START * 0.5f64.powi(i as i32 + 1), w[0] - w[1]);
    }
    Ok(vec![
        endpoint.report("integrator.endpoint", 0.0),
        halving.report("integrator.tolerance_halving", 0.0),
    ])
}
