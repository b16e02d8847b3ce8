//! Numerical certificates for the decay and angle bounds behind the
//! node/focus results.
//!
//! Each check walks a [`Trajectory`] and records the most negative slack it
//! sees. All radial bounds are compared in `ρ = ln r`, where the envelopes are
//! straight lines and an absolute slack means the same thing at every scale.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{half_pi_index, Trajectory};
use crate::linalg2::{eigen, SpectralStructure};
use crate::system::{HolderGrid, PlanarSystem, Remainder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundCase {
    /// `J = [[−1, 0], [ε, −1]]` with the log-rotation remainder.
    Counterexample { epsilon: f64 },
    /// `J = λI`, `|φ|, |ψ| < m r^α`.
    Diagonal,
    /// `J = [[λ, 0], [−λ, λ]]`, `|φ|, |ψ| < m r^α`.
    Jordan,
}

/// Constants of the decay and angle estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub case: BoundCase,
    /// Envelope rates `r₀e^{−k₁t} ≤ r ≤ r₀e^{−k₂t}` (counterexample).
    pub k1: f64,
    pub k2: f64,
    /// Contraction rate, `r ≤ r₀e^{−kt}`.
    pub k: f64,
    pub alpha: f64,
    /// `l = αk`.
    pub l: f64,
    pub m: f64,
    /// `a = |λ|`.
    pub a: f64,
    /// `b = m r₀^α`.
    pub b: f64,
    pub t0: f64,
    pub c: f64,
    pub d: f64,
    pub r0: f64,
}

impl BoundParams {
    pub fn counterexample(epsilon: f64, r0: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&epsilon) {
            return Err(Error::ParameterOutOfRange(format!(
                "epsilon must lie in [0, 2), got {epsilon}"
            )));
        }
        check_r0(r0)?;
        let k2 = 1.0 - 0.5 * epsilon;
        Ok(Self {
            case: BoundCase::Counterexample { epsilon },
            k1: 1.0 + 0.5 * epsilon,
            k2,
            k: k2,
            alpha: 0.0,
            l: 0.0,
            m: 0.0,
            a: 1.0,
            b: 0.0,
            t0: 0.0,
            c: 1.0,
            d: 1.0,
            r0,
        })
    }

    /// Diagonalizable repeated eigenvalue: `k = |λ|/2`, `m d^α < |λ|/2`.
    pub fn diagonal_case(lambda: f64, alpha: f64, m: f64, r0: f64, c: f64) -> Result<Self> {
        Self::holder_case(BoundCase::Diagonal, lambda, alpha, m, r0, c)
    }

    /// Defective repeated eigenvalue: `k = |λ|/4`, `m d^α < |λ|/4`, and
    /// `t₀` the first time with `e^{l t₀} > 16ab/l²`.
    pub fn jordan_case(lambda: f64, alpha: f64, m: f64, r0: f64, c: f64) -> Result<Self> {
        Self::holder_case(BoundCase::Jordan, lambda, alpha, m, r0, c)
    }

    fn holder_case(
        case: BoundCase,
        lambda: f64,
        alpha: f64,
        m: f64,
        r0: f64,
        c: f64,
    ) -> Result<Self> {
        if !(lambda < 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "lambda must be negative, got {lambda}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!(
                "m must be non-negative, got {m}"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "c must be positive, got {c}"
            )));
        }
        check_r0(r0)?;

        let a = lambda.abs();
        let fraction = match case {
            BoundCase::Jordan => 0.25,
            _ => 0.5,
        };
        let k = fraction * a;
        let l = alpha * k;
        let b = m * r0.powf(alpha);
        // largest d with m d^α < fraction·|λ|, nudged inside
        let d = if m == 0.0 {
            c
        } else {
            c.min((fraction * a / m).powf(1.0 / alpha) * (1.0 - 1e-9))
        };
        let t0 = match case {
            BoundCase::Jordan if b > 0.0 => {
                let threshold = 16.0 * a * b / (l * l);
                if threshold < 1.0 {
                    0.0
                } else {
                    threshold.ln() / l * (1.0 + 1e-12) + 1e-12
                }
            }
            _ => 0.0,
        };
        let p = Self {
            case,
            k1: f64::INFINITY,
            k2: k,
            k,
            alpha,
            l,
            m,
            a,
            b,
            t0,
            c,
            d,
            r0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for a system with a repeated negative eigenvalue.
    ///
    /// Builtin Hölder families use their exact amplitude as `m`; anything else
    /// uses twice the estimated constant on `[10⁻⁶·c, c]`.
    pub fn for_system(sys: &PlanarSystem, alpha: f64, r0: f64, c: f64) -> Result<Self> {
        let s = eigen(sys.jacobian());
        let lambda = s.repeated_value().ok_or_else(|| {
            Error::SpectrumMismatch(format!("need a repeated eigenvalue, got {:?}", s.structure))
        })?;
        let m = match sys.remainder() {
            Remainder::HolderPolar { amplitude, .. } => *amplitude,
            Remainder::None => 0.0,
            _ => {
                2.0 * sys
                    .estimate_holder_constant(alpha, &HolderGrid::new(c * 1e-6, c))?
                    .m_hat
            }
        };
        match s.structure {
            SpectralStructure::RepeatedDefective => Self::jordan_case(lambda, alpha, m, r0, c),
            _ => Self::diagonal_case(lambda, alpha, m, r0, c),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InconsistentParams(msg));
        match self.case {
            BoundCase::Counterexample { epsilon } => {
                if self.k1 != 1.0 + 0.5 * epsilon || self.k2 != 1.0 - 0.5 * epsilon {
                    return fail(format!("k1, k2 must be 1 ± eps/2 for eps = {epsilon}"));
                }
                Ok(())
            }
            BoundCase::Diagonal | BoundCase::Jordan => {
                let fraction = if self.case == BoundCase::Jordan {
                    0.25
                } else {
                    0.5
                };
                if !(self.a > 0.0 && self.b >= 0.0) {
                    return fail(format!(
                        "need a > 0 and b >= 0, got a={} b={}",
                        self.a, self.b
                    ));
                }
                if (self.l - self.alpha * self.k).abs() > 1e-15 * self.l.abs() {
                    return fail(format!(
                        "l must equal alpha*k, got {} vs {}",
                        self.l,
                        self.alpha * self.k
                    ));
                }
                if self.m > 0.0 && !(self.m * self.d.powf(self.alpha) < fraction * self.a) {
                    return fail(format!("m d^alpha must be below {fraction}|lambda|"));
                }
                if self.d > self.c {
                    return fail(format!("d = {} exceeds c = {}", self.d, self.c));
                }
                if self.r0 > self.d {
                    return fail(format!(
                        "r0 = {} exceeds the contraction radius d = {}",
                        self.r0, self.d
                    ));
                }
                if self.case == BoundCase::Jordan && self.b > 0.0 {
                    let threshold = 16.0 * self.a * self.b / (self.l * self.l);
                    if !((self.l * self.t0).exp() > threshold) {
                        return fail(format!(
                            "e^(l t0) = {} must exceed 16ab/l^2 = {threshold}",
                            (self.l * self.t0).exp()
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// `(m/l) r₀^α e^{−lt} = (b/l) e^{−lt}`.
    pub fn theta_tail_bound(&self, t: f64) -> f64 {
        if self.b == 0.0 {
            0.0
        } else {
            self.b / self.l * (-self.l * t).exp()
        }
    }
}

fn check_r0(r0: f64) -> Result<()> {
    if r0 > 0.0 && r0 < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "r0 must lie in (0, 1), got {r0}"
        )))
    }
}

/// Outcome of one inequality check over a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub holds: bool,
    /// Smallest slack `bound − observed` seen; negative means violated.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub samples_checked: usize,
    pub slack_used: f64,
}

impl BoundReport {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Running minimum of margins.
#[derive(Debug, Clone)]
pub struct MarginTracker {
    worst_margin: f64,
    worst_t: f64,
    samples: usize,
}

impl Default for MarginTracker {
    fn default() -> Self {
        Self {
            worst_margin: f64::INFINITY,
            worst_t: f64::NAN,
            samples: 0,
        }
    }
}

impl MarginTracker {
    pub fn observe(&mut self, t: f64, margin: f64) {
        self.samples += 1;
        // NaN margins count as violations
        let margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        if margin < self.worst_margin || self.worst_t.is_nan() {
            self.worst_margin = margin;
            self.worst_t = t;
        }
    }

    pub fn report(&self, name: impl Into<String>, slack: f64) -> BoundReport {
        BoundReport {
            name: name.into(),
            holds: self.samples > 0 && self.worst_margin >= -slack,
            worst_margin: self.worst_margin,
            worst_t: self.worst_t,
            samples_checked: self.samples,
            slack_used: slack,
        }
    }
}

/// `ρ₀ − rate_lower·t ≤ ρ(t) ≤ ρ₀ − rate_upper·t` within `slack`.
///
/// Pass `rate_lower = f64::INFINITY` for an upper-only envelope.
pub fn check_envelope(
    traj: &Trajectory,
    rate_lower: f64,
    rate_upper: f64,
    slack: f64,
) -> BoundReport {
    let rho0 = traj.first().rho;
    let mut tracker = MarginTracker::default();
    for s in &traj.samples {
        let upper = rho0 - rate_upper * s.t - s.rho;
        let lower = if rate_lower.is_infinite() {
            f64::INFINITY
        } else {
            s.rho - (rho0 - rate_lower * s.t)
        };
        tracker.observe(s.t, upper.min(lower));
    }
    tracker.report("envelope", slack)
}

/// Lower bound on `θ(t) − θ(0)` for the counterexample:
/// `(1/k₁)·ln((k₁t − ln r₀)/(−ln r₀))` with `k₁ = 1 + ε/2`.
pub fn counterexample_theta_lower(r0: f64, epsilon: f64, t: f64) -> Result<f64> {
    check_r0(r0)?;
    if !(t >= 0.0) {
        return Err(Error::DomainError(format!(
            "t must be non-negative, got {t}"
        )));
    }
    let k1 = 1.0 + 0.5 * epsilon;
    Ok((k1 * t / -r0.ln()).ln_1p() / k1)
}

pub fn check_counterexample_winding(
    traj: &Trajectory,
    r0: f64,
    epsilon: f64,
    slack: f64,
) -> Result<BoundReport> {
    let theta0 = traj.first().theta;
    let mut tracker = MarginTracker::default();
    for s in &traj.samples {
        let lower = counterexample_theta_lower(r0, epsilon, s.t)?;
        tracker.observe(s.t, (s.theta - theta0) - lower);
    }
    Ok(tracker.report("counterexample_winding", slack))
}

/// `|θ* − θ(t)| ≤ (m/l) r₀^α e^{−lt}` for `t ≥ t_from`, with `θ*` the final
/// sample. The error in that proxy is itself below the bound at `t_end`,
/// which `slack` absorbs.
pub fn check_theta_tail(
    traj: &Trajectory,
    p: &BoundParams,
    t_from: f64,
    slack: f64,
) -> BoundReport {
    let theta_star = traj.last().theta;
    let mut tracker = MarginTracker::default();
    for s in traj.samples.iter().filter(|s| s.t >= t_from) {
        tracker.observe(s.t, p.theta_tail_bound(s.t) - (theta_star - s.theta).abs());
    }
    tracker.report("theta_tail", slack)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HBranch {
    /// `h(t) < 0` at every sample from `t₀` on.
    AlwaysNegative,
    /// First sample at or after `t₀` with `h ≥ 0`.
    EventuallyNonnegative { t1: f64 },
}

/// Outcome of [`monitor_h`] on `h(t) = a cos²θ(t) − b e^{−lt}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HReport {
    pub branch: HBranch,
    /// Minimum of `h` over samples from `t₁` on (`+∞` on the negative branch).
    pub h_min_after_t1: f64,
    pub theta_monotone_after_t1: bool,
    /// Whether `θ` passed the next `(n+½)π` line after `t₁`. Always false on
    /// the negative branch, where `θ` may oscillate about its line.
    pub crossed_half_pi: bool,
    /// `n` of the line `(n+½)π` that `θ` tends to.
    pub limit_n: Option<i64>,
    /// Negative branch: every sample from `t₀` on lies within π/2 of the
    /// limiting line.
    pub stays_near_limit: bool,
    pub samples_checked: usize,
    pub slack: f64,
    worst: MarginSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct MarginSummary {
    margin: f64,
    t: f64,
}

impl HReport {
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        match self.branch {
            HBranch::AlwaysNegative => {
                if !self.stays_near_limit {
                    v.push("theta left the band of its limiting line");
                }
            }
            HBranch::EventuallyNonnegative { .. } => {
                if self.h_min_after_t1 < -self.slack {
                    v.push("h became negative after t1");
                }
                if !self.theta_monotone_after_t1 {
                    v.push("theta decreased after t1");
                }
                if self.crossed_half_pi {
                    v.push("theta crossed a (n+1/2)pi line");
                }
            }
        }
        v
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn to_bound_report(&self, name: impl Into<String>) -> BoundReport {
        BoundReport {
            name: name.into(),
            holds: self.holds(),
            worst_margin: self.worst.margin,
            worst_t: self.worst.t,
            samples_checked: self.samples_checked,
            slack_used: self.slack,
        }
    }
}

/// Follow the sign of `h(t) = a cos²θ(t) − b e^{−lt}` from `t₀` on.
///
/// Once `h ≥ 0` at some `t₁ ≥ t₀` it must stay non-negative, `θ` must be
/// non-decreasing, and `θ` cannot pass the next line `(n+½)π` (where `h`
/// would equal `−b e^{−lt} < 0`).
pub fn monitor_h(traj: &Trajectory, p: &BoundParams, slack: f64) -> Result<HReport> {
    p.validate()?;
    if p.b > 0.0 {
        let threshold = 16.0 * p.a * p.b / (p.l * p.l);
        if !((p.l * p.t0).exp() > threshold) {
            return Err(Error::InconsistentParams(format!(
                "e^(l t0) must exceed 16ab/l^2 = {threshold}"
            )));
        }
    }
    let tail: Vec<_> = traj.samples.iter().filter(|s| s.t >= p.t0).collect();
    if tail.is_empty() {
        return Err(Error::DomainError(format!(
            "trajectory ends at t = {} before t0 = {}",
            traj.t_end(),
            p.t0
        )));
    }
    let h = |t: f64, theta: f64| {
        let c = theta.cos();
        let decay = if p.b == 0.0 {
            0.0
        } else {
            p.b * (-p.l * t).exp()
        };
        p.a * c * c - decay
    };

    let Some(i1) = tail.iter().position(|s| h(s.t, s.theta) >= 0.0) else {
        let end = traj.last();
        let n = half_pi_index(end.theta);
        let line = (n as f64 + 0.5) * PI;
        let mut tracker = MarginTracker::default();
        for s in &tail {
            tracker.observe(s.t, 0.5 * PI - (s.theta - line).abs());
        }
        return Ok(HReport {
            branch: HBranch::AlwaysNegative,
            h_min_after_t1: f64::INFINITY,
            theta_monotone_after_t1: true,
            crossed_half_pi: false,
            limit_n: Some(n),
            stays_near_limit: tracker.worst_margin > 0.0,
            samples_checked: tail.len(),
            slack,
            worst: MarginSummary {
                margin: tracker.worst_margin,
                t: tracker.worst_t,
            },
        });
    };

    let after = &tail[i1..];
    let t1 = after[0].t;
    // next line at or above θ(t₁)
    let n = ((after[0].theta - slack) / PI - 0.5).ceil() as i64;
    let line = (n as f64 + 0.5) * PI;

    let mut h_min = f64::INFINITY;
    let mut tracker = MarginTracker::default();
    let mut monotone = true;
    let mut crossed = false;
    for (i, s) in after.iter().enumerate() {
        let hv = h(s.t, s.theta);
        h_min = h_min.min(hv);
        tracker.observe(s.t, hv);
        tracker.observe(s.t, line - s.theta);
        if s.theta > line + slack {
            crossed = true;
        }
        if i > 0 {
            let step = s.theta - after[i - 1].theta;
            tracker.observe(s.t, step);
            if step < -slack {
                monotone = false;
            }
        }
    }

    Ok(HReport {
        branch: HBranch::EventuallyNonnegative { t1 },
        h_min_after_t1: h_min,
        theta_monotone_after_t1: monotone,
        crossed_half_pi: crossed,
        limit_n: Some(n),
        stays_near_limit: true,
        samples_checked: after.len(),
        slack,
        worst: MarginSummary {
            margin: tracker.worst_margin,
            t: tracker.worst_t,
        },
    })
}

/// Both sides of the identity used to show `h′(s) > 0` at a zero of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq20 {
    pub lhs: f64,
    pub rhs: f64,
    pub positive: bool,
}

/// With `B = b e^{−ls}`, `cos²θ = B/a` and `sinθ cosθ > 0`:
///
/// ```text
/// lhs = (lB)² − (2a cosθ sinθ (a cos²θ + B))²
/// rhs = l²b²e^{−3ls}(e^{ls} − 16ab/l²) + 16b⁴e^{−4ls}
/// ```
pub fn identity_eq20(a: f64, b: f64, l: f64, s: f64) -> Result<Eq20> {
    if !(a > 0.0 && b >= 0.0 && l > 0.0 && s.is_finite()) {
        return Err(Error::DomainError(format!(
            "need a > 0, b >= 0, l > 0, finite s; got a={a} b={b} l={l} s={s}"
        )));
    }
    let decay = (-l * s).exp();
    let big_b = b * decay;
    if big_b > a {
        return Err(Error::DomainError(format!(
            "b e^(-ls) = {big_b} exceeds a = {a}; cos^2 would exceed 1"
        )));
    }
    let cos2 = big_b / a;
    let sin_cos = (cos2 * (1.0 - cos2)).sqrt();
    let lhs = (l * big_b).powi(2) - (2.0 * a * sin_cos * (a * cos2 + big_b)).powi(2);
    let rhs = l * l * b * b * decay.powi(3) * ((l * s).exp() - 16.0 * a * b / (l * l))
        + 16.0 * b.powi(4) * decay.powi(4);
    Ok(Eq20 {
        lhs,
        rhs,
        positive: lhs > 0.0,
    })
}
