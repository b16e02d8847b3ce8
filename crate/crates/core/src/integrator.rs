//! Adaptive Dormand–Prince 5(4) integration in log-polar coordinates.
//!
//! The state is `(ρ, θ)` with `ρ = ln r` and `θ` unwrapped. Trajectories that
//! decay like `e^{−t}` stay representable for any horizon: at `t = 3·10⁵` the
//! radius is far below the smallest `f64`, but `ρ` is just `−3·10⁵`.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg2::Vec2;
use crate::system::PlanarSystem;

type State = [f64; 2];

// Dormand & Prince (1980) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.17;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[inline]
fn lin(y: State, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for (c, k) in terms {
        out[0] += c * k[0];
        out[1] += c * k[1];
    }
    out
}

/// Adaptive step-size state shared by the polar and Cartesian drivers.
struct Stepper {
    rel_tol: f64,
    abs_tol: f64,
    h: f64,
    err_prev: f64,
    rejected: bool,
}

struct Accepted {
    h: f64,
    y: State,
    /// Derivative at the new point (first-same-as-last).
    k: State,
}

impl Stepper {
    fn new(rel_tol: f64, abs_tol: f64, h0: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            h: h0,
            err_prev: 1e-4,
            rejected: false,
        }
    }

    /// One accepted step of size at most `h_cap`, retrying after rejections.
    /// `None` once the step size underflows.
    fn advance<F>(&mut self, f: &mut F, t: f64, y: State, k1: State, h_cap: f64) -> Option<Accepted>
    where
        F: FnMut(State) -> Option<State>,
    {
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        loop {
            let capped = self.h > h_cap;
            let h = if capped { h_cap } else { self.h };
            if !(h >= h_min) {
                return None;
            }
            match self.try_step(f, y, k1, h) {
                None => {
                    self.h = h * 0.25;
                    self.rejected = true;
                }
                Some((y_new, k7, err)) if err <= 1.0 => {
                    let err = err.max(1e-10);
                    let mut fac = SAFETY * err.powf(-PI_ALPHA) * self.err_prev.powf(PI_BETA);
                    fac = fac.clamp(FAC_MIN, FAC_MAX);
                    if self.rejected {
                        fac = fac.min(1.0);
                    }
                    let proposal = h * fac;
                    // a step shortened by the cap says nothing against the
                    // previous proposal
                    self.h = if capped {
                        proposal.max(self.h)
                    } else {
                        proposal
                    };
                    self.err_prev = err;
                    self.rejected = false;
                    return Some(Accepted { h, y: y_new, k: k7 });
                }
                Some((_, _, err)) => {
                    let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
                    self.h = h * if err.is_finite() { fac } else { FAC_MIN };
                    self.rejected = true;
                }
            }
        }
    }

    fn try_step<F>(&self, f: &mut F, y: State, k1: State, h: f64) -> Option<(State, State, f64)>
    where
        F: FnMut(State) -> Option<State>,
    {
        let k2 = f(lin(y, &[(h * A21, k1)]))?;
        let k3 = f(lin(y, &[(h * A31, k1), (h * A32, k2)]))?;
        let k4 = f(lin(y, &[(h * A41, k1), (h * A42, k2), (h * A43, k3)]))?;
        let k5 = f(lin(
            y,
            &[(h * A51, k1), (h * A52, k2), (h * A53, k3), (h * A54, k4)],
        ))?;
        let k6 = f(lin(
            y,
            &[
                (h * A61, k1),
                (h * A62, k2),
                (h * A63, k3),
                (h * A64, k4),
                (h * A65, k5),
            ],
        ))?;
        let y_new = lin(
            y,
            &[
                (h * B1, k1),
                (h * B3, k3),
                (h * B4, k4),
                (h * B5, k5),
                (h * B6, k6),
            ],
        );
        let k7 = f(y_new)?;
        let mut sq = 0.0;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
            sq += (e / sc) * (e / sc);
        }
        let err = (0.5 * sq).sqrt();
        Some((y_new, k7, if err.is_nan() { f64::INFINITY } else { err }))
    }
}

/// Output sampling policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    /// Every `stride` time units.
    Uniform { stride: f64 },
    /// `per_decade` samples per decade of `t`, starting at `t = 0.01`.
    LogSpaced { per_decade: u32 },
    /// Uniform with 1000 intervals up to `t_max = 10³`, log-spaced at 64 per
    /// decade beyond.
    Auto,
}

impl Sampling {
    const LOG_START: f64 = 1e-2;

    fn resolve(self, t_max: f64) -> Sampling {
        match self {
            Sampling::Auto if t_max <= 1e3 => Sampling::Uniform {
                stride: t_max / 1000.0,
            },
            Sampling::Auto => Sampling::LogSpaced { per_decade: 64 },
            other => other,
        }
    }
}

/// Iterator over output times in `(0, t_max]`, ending exactly at `t_max`.
struct SampleClock {
    sampling: Sampling,
    t_max: f64,
    index: u64,
    done: bool,
}

impl SampleClock {
    fn new(sampling: Sampling, t_max: f64) -> Self {
        Self {
            sampling: sampling.resolve(t_max),
            t_max,
            index: 0,
            done: false,
        }
    }
}

impl Iterator for SampleClock {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.done {
            return None;
        }
        self.index += 1;
        let t = match self.sampling {
            Sampling::Uniform { stride } => self.index as f64 * stride,
            Sampling::LogSpaced { per_decade } => {
                Sampling::LOG_START * 10f64.powf((self.index - 1) as f64 / f64::from(per_decade))
            }
            Sampling::Auto => unreachable!("resolved at construction"),
        };
        if t >= self.t_max * (1.0 - 1e-12) {
            self.done = true;
            Some(self.t_max)
        } else {
            Some(t)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    /// Stop once `ρ` drops below this.
    pub rho_floor: f64,
    /// Accepted-step budget; exhausting it ends the run as a step failure.
    pub max_steps: u64,
    pub sampling: Sampling,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            t_max: 100.0,
            rho_floor: -1e9,
            max_steps: 50_000_000,
            sampling: Sampling::Auto,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_max(t_max: f64) -> Self {
        Self {
            t_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ParameterOutOfRange(msg));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad(format!(
                "tolerances must be positive, got rel={} abs={}",
                self.rel_tol, self.abs_tol
            ));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!(
                "t_max must be positive and finite, got {}",
                self.t_max
            ));
        }
        if !(self.rho_floor < 0.0) {
            return bad(format!(
                "rho_floor must be negative, got {}",
                self.rho_floor
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        match self.sampling {
            Sampling::Uniform { stride } if !(stride > 0.0) => {
                bad(format!("sample stride must be positive, got {stride}"))
            }
            Sampling::LogSpaced { per_decade: 0 } => bad("per_decade must be positive".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalEvent {
    TimeLimit,
    RadiusFloor,
    /// Step size underflow, right-hand-side failure, or step budget exhausted.
    StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub rho: f64,
    pub theta: f64,
}

impl Sample {
    pub fn r(&self) -> f64 {
        self.rho.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal_event: TerminalEvent,
    pub r0: f64,
    pub theta0: f64,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has the initial sample")
    }

    pub fn t_end(&self) -> f64 {
        self.last().t
    }

    /// `θ(t)` by linear interpolation, clamped to the trajectory span.
    pub fn theta_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0].theta;
        }
        let i = s.partition_point(|p| p.t < t);
        if i >= s.len() {
            return self.last().theta;
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let w = (t - a.t) / (b.t - a.t);
        a.theta + w * (b.theta - a.theta)
    }

    /// Turns completed between `t_from` and the end: `(θ(t_end) − θ(t_from))/2π`.
    pub fn winding(&self, t_from: f64) -> f64 {
        (self.last().theta - self.theta_at(t_from)) / TAU
    }

    /// `sup_{t ≥ t_from} |θ(t_end) − θ(t)|` over the samples.
    pub fn theta_tail_variation(&self, t_from: f64) -> f64 {
        let end = self.last().theta;
        let from_sample = self
            .samples
            .iter()
            .filter(|s| s.t >= t_from)
            .map(|s| (end - s.theta).abs())
            .fold(0.0, f64::max);
        from_sample.max((end - self.theta_at(t_from)).abs())
    }

    /// Largest `|θᵢ₊₁ − θᵢ|` between adjacent samples.
    pub fn max_angle_jump(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].theta - w[0].theta).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,rho,theta,r`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,rho,theta,r")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                s.rho,
                s.theta,
                s.r()
            )?;
        }
        w.flush()
    }
}

/// Integrate `sys` in `(ρ, θ)` from `(rho0, theta0)` at `t = 0`.
///
/// Samples are emitted on the configured clock, at both endpoints, and
/// additionally whenever `θ` has moved by more than π/4 since the last sample,
/// so adjacent samples never differ by π or more.
pub fn integrate(
    sys: &PlanarSystem,
    rho0: f64,
    theta0: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(rho0 <= 0.5f64.ln()) {
        return Err(Error::DomainError(format!(
            "initial radius must satisfy r0 <= 0.5, got ln r0 = {rho0}"
        )));
    }
    if !theta0.is_finite() {
        return Err(Error::DomainError(format!(
            "theta0 must be finite, got {theta0}"
        )));
    }

    let mut rhs = |y: State| -> Option<State> {
        let (a, b) = sys.polar_rhs(y[0], y[1]).ok()?;
        (a.is_finite() && b.is_finite()).then_some([a, b])
    };

    let mut samples = vec![Sample {
        t: 0.0,
        rho: rho0,
        theta: theta0,
    }];
    let traj = |samples: Vec<Sample>, terminal_event| Trajectory {
        samples,
        terminal_event,
        r0: rho0.exp(),
        theta0,
    };

    let mut y = [rho0, theta0];
    let Some(mut k) = rhs(y) else {
        return Ok(traj(samples, TerminalEvent::StepFailure));
    };

    let mut clock = SampleClock::new(cfg.sampling, cfg.t_max);
    let mut next_out = clock.next().expect("clock yields t_max at least");
    let mut stepper = Stepper::new(cfg.rel_tol, cfg.abs_tol, 1e-4f64.min(cfg.t_max));
    let mut t = 0.0;
    let mut steps = 0u64;

    let event = loop {
        if steps >= cfg.max_steps {
            break TerminalEvent::StepFailure;
        }
        let speed = k[0].abs().max(k[1].abs()).max(1.0);
        let gap = next_out - t;
        let cap = (0.25 / speed).min(gap);
        let Some(acc) = stepper.advance(&mut rhs, t, y, k, cap) else {
            break TerminalEvent::StepFailure;
        };
        steps += 1;
        y = acc.y;
        k = acc.k;
        // t + h may round onto the sample time even when h < gap
        let landed = acc.h >= gap || t + acc.h >= next_out;
        t = if landed { next_out } else { t + acc.h };

        let last_theta = samples.last().map_or(theta0, |s| s.theta);
        if landed || (y[1] - last_theta).abs() > FRAC_PI_4 || y[0] < cfg.rho_floor {
            samples.push(Sample {
                t,
                rho: y[0],
                theta: y[1],
            });
        }
        if y[0] < cfg.rho_floor {
            break TerminalEvent::RadiusFloor;
        }
        if landed {
            match clock.next() {
                Some(tn) => next_out = tn,
                None => break TerminalEvent::TimeLimit,
            }
        }
    };

    if samples.last().map(|s| s.t) != Some(t) {
        samples.push(Sample {
            t,
            rho: y[0],
            theta: y[1],
        });
    }
    Ok(traj(samples, event))
}

/// Limits for [`streamline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamlineLimits {
    pub t_max: f64,
    /// Stop once `|x|` exceeds this.
    pub outer_radius: f64,
    /// Stop once `|x|` drops below this.
    pub inner_radius: f64,
    /// Largest arc length covered by a single step.
    pub max_arc: f64,
}

impl Default for StreamlineLimits {
    fn default() -> Self {
        Self {
            t_max: 20.0,
            outer_radius: 2.0,
            inner_radius: 1e-3,
            max_arc: 0.02,
        }
    }
}

/// Short Cartesian integration for phase portraits; one point per step.
pub fn streamline(
    sys: &PlanarSystem,
    start: Vec2,
    backward: bool,
    limits: &StreamlineLimits,
) -> Vec<Vec2> {
    let sign = if backward { -1.0 } else { 1.0 };
    let mut rhs = |y: State| -> Option<State> {
        let v = sys.cartesian_rhs(Vec2::new(y[0], y[1])) * sign;
        v.is_finite().then_some([v.x, v.y])
    };
    let mut points = vec![start];
    let mut y = [start.x, start.y];
    let Some(mut k) = rhs(y) else {
        return points;
    };
    let mut stepper = Stepper::new(1e-7, 1e-10, 1e-3);
    let mut t = 0.0;
    while t < limits.t_max {
        let speed = k[0].hypot(k[1]);
        if speed == 0.0 {
            break;
        }
        let cap = (limits.max_arc / speed).min(limits.t_max - t);
        let Some(acc) = stepper.advance(&mut rhs, t, y, k, cap) else {
            break;
        };
        t += acc.h;
        y = acc.y;
        k = acc.k;
        let p = Vec2::new(y[0], y[1]);
        points.push(p);
        let r = p.norm();
        if r > limits.outer_radius || r < limits.inner_radius {
            break;
        }
    }
    points
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Nearest `n` with `θ ≈ (n + ½)π`.
pub fn half_pi_index(theta: f64) -> i64 {
    (theta / PI - 0.5).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg2::Mat2;
    use std::f64::consts::{E, FRAC_PI_2};

    fn linear(j: Mat2) -> PlanarSystem {
        PlanarSystem::linear(j).unwrap()
    }

    #[test]
    fn radial_flow_exact() {
        let sys = linear(Mat2::scalar(-1.0));
        let traj = integrate(&sys, -1.0, 0.3, &IntegratorConfig::with_t_max(5.0)).unwrap();
        assert_eq!(traj.terminal_event, TerminalEvent::TimeLimit);
        assert_eq!(traj.t_end(), 5.0);
        for s in &traj.samples {
            assert!((s.rho - (-1.0 - s.t)).abs() < 1e-9);
            assert!((s.theta - 0.3).abs() < 1e-9);
        }
        assert_eq!(traj.winding(0.0), 0.0);
        assert_eq!(traj.theta_tail_variation(0.0), 0.0);
    }

    #[test]
    fn counterexample_closed_form() {
        // θ′ = −1/ρ with ρ = −1 − t gives θ = ln(1 + t)
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let traj = integrate(&sys, -1.0, 0.0, &IntegratorConfig::with_t_max(1e3)).unwrap();
        assert_eq!(traj.terminal_event, TerminalEvent::TimeLimit);
        assert_eq!(traj.t_end(), 1e3);
        assert!(traj.samples.len() >= 1001);
        for t in [1.0, 10.0, E * E - 1.0] {
            let th = traj.theta_at(t);
            // linear interpolation over a unit stride: |f''|/8 with f = ln(1+t)
            let interp = 1.0 / (8.0 * (1.0 + t.floor()).powi(2));
            assert!((th - (1.0 + t).ln()).abs() < interp + 1e-8, "t={t}");
        }
        for s in &traj.samples {
            assert!(
                (s.theta - s.t.ln_1p()).abs() < 1e-8,
                "t={} err={}",
                s.t,
                s.theta - s.t.ln_1p()
            );
            assert!((s.rho + 1.0 + s.t).abs() < 1e-9);
        }
    }

    #[test]
    fn counterexample_sampled_at_requested_times() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let cfg = IntegratorConfig {
            t_max: 12.0,
            sampling: Sampling::Uniform { stride: 0.5 },
            ..IntegratorConfig::default()
        };
        let traj = integrate(&sys, -1.0, 0.0, &cfg).unwrap();
        let ts: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
        let expected: Vec<f64> = (0..=24).map(|i| i as f64 * 0.5).collect();
        assert_eq!(ts, expected);
        let t = E * E - 1.0;
        assert!(!ts.contains(&t));
        let uniform = IntegratorConfig {
            t_max: t,
            sampling: Sampling::Uniform { stride: t },
            ..IntegratorConfig::default()
        };
        let traj = integrate(&sys, -1.0, 0.0, &uniform).unwrap();
        assert!((traj.last().theta - 2.0).abs() < 1e-8);
    }

    #[test]
    fn jordan_linear_approaches_half_pi() {
        // θ′ = cos²θ, θ = arctan(t + tan θ₀)
        let sys = linear(Mat2::new(-1.0, 0.0, 1.0, -1.0));
        let traj = integrate(&sys, -1.0, 0.0, &IntegratorConfig::with_t_max(200.0)).unwrap();
        for w in traj.samples.windows(2) {
            assert!(w[1].theta >= w[0].theta);
        }
        for s in &traj.samples {
            assert!(s.theta < FRAC_PI_2);
            assert!((s.theta - s.t.atan()).abs() < 1e-8);
        }
    }

    #[test]
    fn fast_rotation_keeps_angle_continuous() {
        let sys = linear(Mat2::new(-0.1, -40.0, 40.0, -0.1));
        let cfg = IntegratorConfig {
            t_max: 10.0,
            sampling: Sampling::Uniform { stride: 1.0 },
            ..IntegratorConfig::default()
        };
        let traj = integrate(&sys, -1.0, 0.0, &cfg).unwrap();
        assert!(traj.max_angle_jump() < PI);
        assert!((traj.last().theta - 400.0).abs() < 1e-6);
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn radius_floor_event() {
        let sys = linear(Mat2::scalar(-1.0));
        let cfg = IntegratorConfig {
            t_max: 100.0,
            rho_floor: -20.0,
            ..IntegratorConfig::default()
        };
        let traj = integrate(&sys, -1.0, 0.0, &cfg).unwrap();
        assert_eq!(traj.terminal_event, TerminalEvent::RadiusFloor);
        assert!(traj.last().rho < -20.0);
        assert!(traj.t_end() < 20.0);
    }

    #[test]
    fn step_budget_exhaustion_is_step_failure() {
        let sys = linear(Mat2::scalar(-1.0));
        let cfg = IntegratorConfig {
            t_max: 100.0,
            max_steps: 10,
            ..IntegratorConfig::default()
        };
        let traj = integrate(&sys, -1.0, 0.0, &cfg).unwrap();
        assert_eq!(traj.terminal_event, TerminalEvent::StepFailure);
        assert!(traj.t_end() < 100.0);
    }

    #[test]
    fn rhs_failure_is_step_failure() {
        // repelling counterexample flow reaches r = 1, where ln r = 0
        let sys = PlanarSystem::counterexample(0.0).unwrap().time_reversed();
        let traj = integrate(&sys, -1.0, 0.0, &IntegratorConfig::with_t_max(5.0)).unwrap();
        assert_eq!(traj.terminal_event, TerminalEvent::StepFailure);
        assert!(traj.last().rho < 0.0);
        assert!(traj.t_end() > 0.9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = linear(Mat2::scalar(-1.0));
        let cfg = IntegratorConfig::default();
        assert!(integrate(&sys, -0.5, 0.0, &cfg).is_err());
        assert!(integrate(&sys, -1.0, f64::NAN, &cfg).is_err());
        for bad in [
            IntegratorConfig {
                rel_tol: 0.0,
                ..cfg
            },
            IntegratorConfig { t_max: -1.0, ..cfg },
            IntegratorConfig {
                rho_floor: 1.0,
                ..cfg
            },
            IntegratorConfig {
                sampling: Sampling::Uniform { stride: 0.0 },
                ..cfg
            },
        ] {
            assert!(matches!(
                integrate(&sys, -1.0, 0.0, &bad),
                Err(Error::ParameterOutOfRange(_))
            ));
        }
    }

    #[test]
    fn log_sampling_density() {
        let mut clock = SampleClock::new(Sampling::Auto, 1e5);
        let ts: Vec<f64> = clock.by_ref().collect();
        assert_eq!(*ts.last().unwrap(), 1e5);
        // 7 decades from 1e-2 at 64 per decade
        assert_eq!(ts.len(), 7 * 64 + 1);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn deterministic() {
        let sys = PlanarSystem::holder_family(-1.0, 0.5, 0.3, 3, true).unwrap();
        let cfg = IntegratorConfig::with_t_max(50.0);
        let a = integrate(&sys, -3.0, 0.4, &cfg).unwrap();
        let b = integrate(&sys, -3.0, 0.4, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_format() {
        let sys = linear(Mat2::scalar(-1.0));
        let cfg = IntegratorConfig {
            t_max: 1.0,
            sampling: Sampling::Uniform { stride: 0.5 },
            ..IntegratorConfig::default()
        };
        let traj = integrate(&sys, -1.0, 0.0, &cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,rho,theta,r");
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[1],
            "0.0000000000000000e0,-1.0000000000000000e0,0.0000000000000000e0,3.6787944117144233e-1"
        );
        let r: f64 = lines[3].split(',').nth(3).unwrap().parse().unwrap();
        assert!((r - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn streamline_radial_node() {
        let sys = linear(Mat2::scalar(-1.0));
        let pts = streamline(
            &sys,
            Vec2::new(1.0, 0.0),
            false,
            &StreamlineLimits::default(),
        );
        assert!(pts.last().unwrap().norm() < 1e-3 * 1.01);
        assert!(pts.iter().all(|p| p.y.abs() < 1e-12));
        let back = streamline(
            &sys,
            Vec2::new(1.0, 0.0),
            true,
            &StreamlineLimits::default(),
        );
        assert!(back.last().unwrap().norm() > 2.0);
    }

    #[test]
    fn angle_helpers() {
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(wrap_angle(TAU), 0.0);
        assert_eq!(half_pi_index(FRAC_PI_2 - 1e-3), 0);
        assert_eq!(half_pi_index(-FRAC_PI_2), -1);
        assert_eq!(half_pi_index(5.0 * FRAC_PI_2), 2);
    }
}
