//! Planar systems `ẋ = Jx + (u, v)(x)` and their log-polar reduction.
//!
//! Every system is evaluated in two ways: the Cartesian right-hand side and
//! the polar pair `(r′/r, θ′)` written in terms of `ρ = ln r`. The polar form
//! of the linear part is
//!
//! ```text
//! r′/r = a11 c² + (a12 + a21) c s + a22 s²
//! θ′   = a21 c² + (a22 − a11) c s − a12 s²        (c = cos θ, s = sin θ)
//! ```
//!
//! and the remainder contributes `(φ, ψ)` with `r²φ = x u + y v` and
//! `r²ψ = x v − y u`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg2::{Mat2, Vec2};

/// A user-supplied remainder with both evaluation hooks.
///
/// Implementations must keep the two forms consistent: `polar(ln r, θ)`
/// returns `(φ, ψ)` such that `r²φ = x u + y v` and `r²ψ = x v − y u` for
/// `(u, v) = cartesian(x, y)`.
pub trait CustomRemainder: Send + Sync + fmt::Debug {
    fn cartesian(&self, p: Vec2) -> Vec2;
    fn polar(&self, rho: f64, theta: f64) -> Result<(f64, f64)>;
}

#[derive(Debug, Clone)]
pub enum Remainder {
    None,
    /// `−2/ln(x²+y²)·(−y, x)`, i.e. `φ = 0`, `ψ = −1/ln r`.
    LogRotation {
        epsilon: f64,
    },
    /// `φ = A r^α cos(kθ)`, `ψ = A r^α sin(kθ)`.
    HolderPolar {
        alpha: f64,
        amplitude: f64,
        wavenumber: i32,
    },
    Custom(Arc<dyn CustomRemainder>),
}

impl Remainder {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Remainder::None => "none",
            Remainder::LogRotation { .. } => "log_rotation",
            Remainder::HolderPolar { .. } => "holder_polar",
            Remainder::Custom(_) => "custom",
        }
    }

    /// `(u, v)` at `p`; zero at the origin.
    pub fn cartesian(&self, p: Vec2) -> Vec2 {
        match self {
            Remainder::None => Vec2::ZERO,
            Remainder::LogRotation { .. } => {
                let r2 = p.norm_squared();
                if r2 == 0.0 {
                    return Vec2::ZERO;
                }
                let f = -2.0 / r2.ln();
                Vec2::new(-p.y, p.x) * f
            }
            Remainder::HolderPolar {
                alpha,
                amplitude,
                wavenumber,
            } => {
                let r = p.norm();
                if r == 0.0 {
                    return Vec2::ZERO;
                }
                let (sk, ck) = (f64::from(*wavenumber) * p.angle()).sin_cos();
                let scale = amplitude * r.powf(*alpha);
                let (phi, psi) = (scale * ck, scale * sk);
                p * phi + Vec2::new(-p.y, p.x) * psi
            }
            Remainder::Custom(c) => {
                if p == Vec2::ZERO {
                    Vec2::ZERO
                } else {
                    c.cartesian(p)
                }
            }
        }
    }

    /// `(φ, ψ)` at `r = e^ρ`.
    pub fn polar(&self, rho: f64, theta: f64) -> Result<(f64, f64)> {
        match self {
            Remainder::None => Ok((0.0, 0.0)),
            Remainder::LogRotation { .. } => {
                if !(rho < 0.0) {
                    return Err(Error::DomainError(format!(
                        "log_rotation remainder needs ln r < 0, got {rho}"
                    )));
                }
                Ok((0.0, -1.0 / rho))
            }
            Remainder::HolderPolar {
                alpha,
                amplitude,
                wavenumber,
            } => {
                let scale = amplitude * (alpha * rho).exp();
                let (sk, ck) = (f64::from(*wavenumber) * theta).sin_cos();
                Ok((scale * ck, scale * sk))
            }
            Remainder::Custom(c) => c.polar(rho, theta),
        }
    }
}

/// `ẋ = Jx + remainder(x)`, optionally with time reversed.
#[derive(Debug, Clone)]
pub struct PlanarSystem {
    linear: Mat2,
    remainder: Remainder,
    reversed: bool,
}

impl PlanarSystem {
    pub fn new(linear: Mat2, remainder: Remainder) -> Result<Self> {
        if !linear.is_finite() {
            return Err(Error::ParameterOutOfRange(
                "linear part must have finite entries".into(),
            ));
        }
        match &remainder {
            Remainder::LogRotation { epsilon } => check_epsilon(*epsilon)?,
            Remainder::HolderPolar {
                alpha, amplitude, ..
            } => check_holder(*alpha, *amplitude)?,
            Remainder::None | Remainder::Custom(_) => {}
        }
        Ok(Self {
            linear,
            remainder,
            reversed: false,
        })
    }

    pub fn linear(j: Mat2) -> Result<Self> {
        Self::new(j, Remainder::None)
    }

    /// `J = [[−1, 0], [ε, −1]]` with the logarithmic rotation remainder.
    pub fn counterexample(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Self::new(
            Mat2::new(-1.0, 0.0, epsilon, -1.0),
            Remainder::LogRotation { epsilon },
        )
    }

    /// `λI` (or the scaled Jordan block when `jordan`) plus a polar remainder
    /// bounded by exactly `amplitude·r^α`.
    pub fn holder_family(
        lambda: f64,
        alpha: f64,
        amplitude: f64,
        wavenumber: i32,
        jordan: bool,
    ) -> Result<Self> {
        if !(lambda < 0.0) || !lambda.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "lambda must be negative, got {lambda}"
            )));
        }
        check_holder(alpha, amplitude)?;
        let j = if jordan {
            Mat2::scaled_jordan(lambda)
        } else {
            Mat2::scalar(lambda)
        };
        Self::new(
            j,
            Remainder::HolderPolar {
                alpha,
                amplitude,
                wavenumber,
            },
        )
    }

    pub fn jacobian(&self) -> Mat2 {
        self.linear
    }

    pub fn remainder(&self) -> &Remainder {
        &self.remainder
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// The same vector field with the direction of time flipped.
    pub fn time_reversed(&self) -> Self {
        Self {
            reversed: !self.reversed,
            ..self.clone()
        }
    }

    fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }

    pub fn cartesian_rhs(&self, p: Vec2) -> Vec2 {
        (self.linear * p + self.remainder.cartesian(p)) * self.sign()
    }

    /// `(r′/r, θ′)` at `ρ = ln r` and unwrapped angle `θ`.
    pub fn polar_rhs(&self, rho: f64, theta: f64) -> Result<(f64, f64)> {
        if !rho.is_finite() || !theta.is_finite() {
            return Err(Error::DomainError(format!(
                "polar state must be finite, got rho={rho}, theta={theta}"
            )));
        }
        let (s, c) = theta.sin_cos();
        let j = &self.linear;
        let cc = c * c;
        let cs = c * s;
        let ss = s * s;
        let radial = j.a11 * cc + (j.a12 + j.a21) * cs + j.a22 * ss;
        let angular = j.a21 * cc + (j.a22 - j.a11) * cs - j.a12 * ss;
        let (phi, psi) = self.remainder.polar(rho, theta)?;
        let sign = self.sign();
        Ok((sign * (radial + phi), sign * (angular + psi)))
    }

    /// Angle of the vector field `f` at polar state `(ρ, θ)`; independent of `r`.
    pub fn direction_angle(&self, rho: f64, theta: f64) -> Result<f64> {
        let (rho_dot, theta_dot) = self.polar_rhs(rho, theta)?;
        Ok(theta + theta_dot.atan2(rho_dot))
    }

    /// Exponent `α` of the polar remainder, when the system carries one.
    pub fn holder_exponent(&self) -> Option<f64> {
        match self.remainder {
            Remainder::HolderPolar { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Sup of `max(|φ|, |ψ|)/r^α` on a log-spaced radius grid times a uniform
    /// angle grid.
    pub fn estimate_holder_constant(
        &self,
        alpha: f64,
        grid: &HolderGrid,
    ) -> Result<HolderEstimate> {
        grid.validate()?;
        if !(alpha > 0.0) {
            return Err(Error::DomainError(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let m_hat = self.sup_ratio(alpha, grid.r_min, grid.r_max, grid.n_r, grid.n_theta)?;

        // reference: the outermost decade of the window at the same density
        let r_coarse = grid.r_min.max(grid.r_max / 10.0);
        let n_coarse = points_for(grid.density(), r_coarse, grid.r_max);
        let m_coarse = self.sup_ratio(alpha, r_coarse, grid.r_max, n_coarse, grid.n_theta)?;

        Ok(HolderEstimate {
            alpha,
            m_hat,
            r_min: grid.r_min,
            r_max: grid.r_max,
            diverging: m_hat > grid.divergence_factor * m_coarse,
        })
    }

    /// `m_hat` for `r_min = r_max·10⁻¹, r_max·10⁻², …` down to `grid.r_min`,
    /// coarsest first.
    pub fn holder_refinement(&self, alpha: f64, grid: &HolderGrid) -> Result<Vec<(f64, f64)>> {
        grid.validate()?;
        let density = grid.density();
        let mut out = Vec::new();
        let mut r_lo = grid.r_max / 10.0;
        loop {
            let r_lo_clamped = r_lo.max(grid.r_min);
            let n = points_for(density, r_lo_clamped, grid.r_max);
            let m = self.sup_ratio(alpha, r_lo_clamped, grid.r_max, n, grid.n_theta)?;
            out.push((r_lo_clamped, m));
            if r_lo_clamped <= grid.r_min {
                break;
            }
            r_lo /= 10.0;
        }
        Ok(out)
    }

    fn sup_ratio(
        &self,
        alpha: f64,
        r_min: f64,
        r_max: f64,
        n_r: usize,
        n_theta: usize,
    ) -> Result<f64> {
        let (lo, hi) = (r_min.ln(), r_max.ln());
        let mut best = 0.0f64;
        for i in 0..n_r {
            let rho = if n_r == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n_r - 1) as f64
            };
            let weight = (-alpha * rho).exp();
            for j in 0..n_theta {
                let theta = TAU * j as f64 / n_theta as f64;
                let (phi, psi) = self.remainder.polar(rho, theta)?;
                best = best.max(phi.abs().max(psi.abs()) * weight);
            }
        }
        Ok(best)
    }

    pub fn to_config(&self) -> Result<SystemConfig> {
        let remainder = match &self.remainder {
            Remainder::None => RemainderConfig::None,
            Remainder::LogRotation { epsilon } => {
                RemainderConfig::LogRotation { epsilon: *epsilon }
            }
            Remainder::HolderPolar {
                alpha,
                amplitude,
                wavenumber,
            } => RemainderConfig::HolderPolar {
                alpha: *alpha,
                amplitude: *amplitude,
                wavenumber: *wavenumber,
                jordan: self.linear == Mat2::scaled_jordan(self.linear.a11),
            },
            Remainder::Custom(_) => {
                return Err(Error::Config(
                    "custom remainders cannot be serialized".into(),
                ))
            }
        };
        Ok(SystemConfig {
            linear: self.linear.to_rows(),
            remainder,
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..2.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!(
            "epsilon must lie in [0, 2), got {epsilon}"
        )))
    }
}

fn check_holder(alpha: f64, amplitude: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterOutOfRange(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::ParameterOutOfRange(format!(
            "amplitude must be finite and non-negative, got {amplitude}"
        )));
    }
    Ok(())
}

fn points_for(per_decade: f64, r_min: f64, r_max: f64) -> usize {
    ((per_decade * (r_max / r_min).log10()).ceil() as usize + 1).max(2)
}

/// Sampling window for [`PlanarSystem::estimate_holder_constant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    /// `m_hat` above `divergence_factor` times the outer-decade value is
    /// reported as diverging.
    pub divergence_factor: f64,
}

impl HolderGrid {
    pub const POINTS_PER_DECADE: f64 = 200.0;
    pub const N_THETA: usize = 256;
    pub const DIVERGENCE_FACTOR: f64 = 10.0;

    /// Default densities: 200 radii per decade, 256 angles.
    pub fn new(r_min: f64, r_max: f64) -> Self {
        let n_r = if r_min > 0.0 && r_max > r_min {
            points_for(Self::POINTS_PER_DECADE, r_min, r_max)
        } else {
            2
        };
        Self {
            r_min,
            r_max,
            n_r,
            n_theta: Self::N_THETA,
            divergence_factor: Self::DIVERGENCE_FACTOR,
        }
    }

    pub fn with_sizes(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Self {
        Self {
            n_r,
            n_theta,
            ..Self::new(r_min, r_max)
        }
    }

    fn density(&self) -> f64 {
        (self.n_r - 1) as f64 / (self.r_max / self.r_min).log10()
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max < 1.0) {
            return Err(Error::DomainError(format!(
                "need 0 < r_min < r_max < 1, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.n_r < 2 || self.n_theta < 2 {
            return Err(Error::DomainError("grid sizes must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub m_hat: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub diverging: bool,
}

/// On-disk system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub linear: [[f64; 2]; 2],
    #[serde(default)]
    pub remainder: RemainderConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RemainderConfig {
    #[default]
    None,
    LogRotation {
        #[serde(default)]
        epsilon: f64,
    },
    HolderPolar {
        alpha: f64,
        amplitude: f64,
        wavenumber: i32,
        #[serde(default)]
        jordan: bool,
    },
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build(&self) -> Result<PlanarSystem> {
        let j = Mat2::from_rows(self.linear);
        let remainder = match self.remainder {
            RemainderConfig::None => Remainder::None,
            RemainderConfig::LogRotation { epsilon } => Remainder::LogRotation { epsilon },
            RemainderConfig::HolderPolar {
                alpha,
                amplitude,
                wavenumber,
                jordan,
            } => {
                if jordan && j != Mat2::scaled_jordan(j.a11) {
                    return Err(Error::Config(format!(
                        "jordan=true requires linear = [[l, 0], [-l, l]], got {:?}",
                        self.linear
                    )));
                }
                Remainder::HolderPolar {
                    alpha,
                    amplitude,
                    wavenumber,
                }
            }
        };
        PlanarSystem::new(j, remainder)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, FRAC_PI_2};

    #[test]
    fn counterexample_polar_examples() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let (rd, td) = sys.polar_rhs(-1.0, 0.0).unwrap();
        assert_eq!(rd, -1.0);
        assert_eq!(td, 1.0);

        let sys = PlanarSystem::counterexample(1.0).unwrap();
        let rho = (0.2f64).ln();
        let (_, td) = sys.polar_rhs(rho, FRAC_PI_2).unwrap();
        assert!((td - (-1.0 / rho)).abs() < 1e-15);
    }

    #[test]
    fn counterexample_cartesian_by_hand() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let v = sys.cartesian_rhs(Vec2::new(1.0 / E, 0.0));
        assert!((v.x + 1.0 / E).abs() < 1e-15);
        assert!((v.y - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn counterexample_epsilon_range() {
        assert!(PlanarSystem::counterexample(1.999).is_ok());
        for bad in [-0.1, 2.0, 3.0, f64::NAN] {
            assert!(matches!(
                PlanarSystem::counterexample(bad),
                Err(Error::ParameterOutOfRange(_))
            ));
        }
    }

    #[test]
    fn log_rotation_needs_negative_rho() {
        let sys = PlanarSystem::counterexample(0.5).unwrap();
        assert!(matches!(
            sys.polar_rhs(0.0, 0.0),
            Err(Error::DomainError(_))
        ));
        assert!(matches!(
            sys.polar_rhs(0.3, 1.0),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn holder_family_examples() {
        let sys = PlanarSystem::holder_family(-1.0, 0.5, 0.0, 3, false).unwrap();
        assert_eq!(sys.remainder().polar(-3.0, 0.7).unwrap(), (0.0, 0.0));
        assert_eq!(
            sys.cartesian_rhs(Vec2::new(1.0, 1.0)),
            Vec2::new(-1.0, -1.0)
        );

        let sys = PlanarSystem::holder_family(-1.0, 0.5, 1.0, 3, false).unwrap();
        let (phi, psi) = sys.remainder().polar(0.01f64.ln(), 0.0).unwrap();
        assert!((phi - 0.1).abs() < 1e-15);
        assert_eq!(psi, 0.0);

        let sys = PlanarSystem::holder_family(-1.0, 0.5, 0.0, 3, true).unwrap();
        let (_, td) = sys.polar_rhs(-2.0, 0.0).unwrap();
        assert_eq!(td, 1.0);
    }

    #[test]
    fn holder_family_parameter_checks() {
        for (l, a, m) in [
            (0.0, 0.5, 1.0),
            (1.0, 0.5, 1.0),
            (-1.0, 0.0, 1.0),
            (-1.0, 1.0, 1.0),
            (-1.0, 0.5, -1.0),
        ] {
            assert!(PlanarSystem::holder_family(l, a, m, 1, false).is_err());
        }
    }

    #[test]
    fn polar_linear_examples() {
        let sys = PlanarSystem::linear(Mat2::scalar(-1.0)).unwrap();
        for (rho, th) in [(-1.0, 0.0), (-40.0, 2.3), (-0.8, -7.0)] {
            let (rd, td) = sys.polar_rhs(rho, th).unwrap();
            assert!((rd + 1.0).abs() < 1e-15);
            assert!(td.abs() < 1e-15);
        }
        let sys = PlanarSystem::linear(Mat2::new(-1.0, 0.0, 1.0, -1.0)).unwrap();
        assert_eq!(sys.polar_rhs(-1.0, 0.0).unwrap(), (-1.0, 1.0));
    }

    #[test]
    fn origin_is_equilibrium() {
        let systems = [
            PlanarSystem::counterexample(0.7).unwrap(),
            PlanarSystem::holder_family(-2.0, 0.3, 4.0, 2, true).unwrap(),
            PlanarSystem::linear(Mat2::new(1.0, 2.0, 3.0, 4.0)).unwrap(),
        ];
        for sys in systems {
            assert_eq!(sys.cartesian_rhs(Vec2::ZERO), Vec2::ZERO);
        }
    }

    #[test]
    fn time_reversal_negates_field() {
        let sys = PlanarSystem::holder_family(-1.0, 0.5, 0.3, 2, false).unwrap();
        let rev = sys.time_reversed();
        let p = Vec2::new(0.1, -0.2);
        assert_eq!(rev.cartesian_rhs(p), -sys.cartesian_rhs(p));
        let (a, b) = sys.polar_rhs(-2.0, 0.4).unwrap();
        assert_eq!(rev.polar_rhs(-2.0, 0.4).unwrap(), (-a, -b));
        assert!(!rev.time_reversed().is_reversed());
    }

    #[test]
    fn counterexample_remainder_vanishes_at_origin() {
        let rem = Remainder::LogRotation { epsilon: 0.0 };
        let mut prev = f64::INFINITY;
        for k in 1..=12 {
            let r = 10f64.powi(-k);
            let p = Vec2::from_polar(r, 0.3 * k as f64);
            let size = rem.cartesian(p).norm();
            // |remainder| = 2r/|ln r²|
            assert!(size <= 2.0 * r / (r * r).ln().abs() * (1.0 + 1e-12));
            assert!(size < prev);
            if r < 1e-2 {
                assert!(size < 1e-1);
            }
            prev = size;
        }
    }

    #[test]
    fn holder_estimate_family_is_amplitude() {
        let sys = PlanarSystem::holder_family(-1.0, 0.5, 1.0, 3, false).unwrap();
        let est = sys
            .estimate_holder_constant(0.5, &HolderGrid::new(1e-6, 0.5))
            .unwrap();
        assert!((est.m_hat - 1.0).abs() <= 1e-12, "{}", est.m_hat);
        assert!(!est.diverging);
    }

    #[test]
    fn holder_estimate_counterexample_diverges() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let est = sys
            .estimate_holder_constant(0.5, &HolderGrid::new(1e-8, 0.5))
            .unwrap();
        // 1/(|ln 1e-8| · 1e-4)
        let analytic = 1.0 / (1e-8f64.ln().abs() * 1e-4);
        assert!(est.m_hat >= analytic * (1.0 - 1e-12));
        assert!((est.m_hat - 542.868).abs() < 0.01, "{}", est.m_hat);
        assert!(est.diverging);
    }

    #[test]
    fn holder_estimate_zero_remainder() {
        let sys = PlanarSystem::linear(Mat2::diag(-1.0, -2.0)).unwrap();
        for alpha in [0.1, 0.5, 0.9] {
            let est = sys
                .estimate_holder_constant(alpha, &HolderGrid::with_sizes(1e-4, 0.5, 50, 16))
                .unwrap();
            assert_eq!(est.m_hat, 0.0);
            assert!(!est.diverging);
        }
    }

    #[test]
    fn holder_estimate_rejects_bad_window() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        for g in [
            HolderGrid::new(0.0, 0.5),
            HolderGrid::new(0.5, 0.1),
            HolderGrid::new(0.1, 1.0),
            HolderGrid::with_sizes(0.01, 0.5, 1, 10),
        ] {
            assert!(matches!(
                sys.estimate_holder_constant(0.5, &g),
                Err(Error::DomainError(_))
            ));
        }
    }

    #[test]
    fn counterexample_refinement_is_monotone() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        for alpha in [0.1, 0.25, 0.5, 0.9] {
            // the ratio 1/(|ln r| r^α) increases once α|ln r| > 1
            let r_max = (-1.0 / alpha - 0.5f64).exp().min(0.5);
            let grid = HolderGrid::with_sizes(1e-12, r_max, 400, 32);
            let seq = sys.holder_refinement(alpha, &grid).unwrap();
            assert!(seq.len() >= 4);
            for w in seq.windows(2) {
                assert!(w[1].1 > w[0].1, "alpha={alpha}: {seq:?}");
            }
        }
    }

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"{"linear": [[-1, 0], [0.5, -1]], "remainder": {"kind": "log_rotation", "epsilon": 0.5}}"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        let sys = cfg.build().unwrap();
        assert_eq!(sys.jacobian(), Mat2::new(-1.0, 0.0, 0.5, -1.0));
        assert_eq!(sys.to_config().unwrap(), cfg);

        let text = r#"{"linear": [[-2, 0], [2, -2]], "remainder": {"kind": "holder_polar", "alpha": 0.5, "amplitude": 0.1, "wavenumber": 3, "jordan": true}}"#;
        let sys = SystemConfig::from_json(text).unwrap().build().unwrap();
        assert_eq!(sys.holder_exponent(), Some(0.5));

        let text = r#"{"linear": [[-2, 0], [1, -2]], "remainder": {"kind": "holder_polar", "alpha": 0.5, "amplitude": 0.1, "wavenumber": 3, "jordan": true}}"#;
        assert!(matches!(
            SystemConfig::from_json(text).unwrap().build(),
            Err(Error::Config(_))
        ));

        let text = r#"{"linear": [[1, 2], [3, 4]]}"#;
        let sys = SystemConfig::from_json(text).unwrap().build().unwrap();
        assert_eq!(sys.remainder().kind_name(), "none");

        assert!(SystemConfig::from_json(r#"{"remainder": {"kind": "none"}}"#).is_err());
        assert!(SystemConfig::from_json(
            r#"{"linear": [[1,2],[3,4]], "remainder": {"kind": "bogus"}}"#
        )
        .is_err());
    }

    fn any_system() -> impl Strategy<Value = PlanarSystem> {
        prop_oneof![
            (0.0f64..1.99).prop_map(|e| PlanarSystem::counterexample(e).unwrap()),
            (
                -3.0f64..-0.1,
                0.05f64..0.95,
                0.0f64..5.0,
                -6i32..7,
                any::<bool>()
            )
                .prop_map(|(l, a, m, k, j)| PlanarSystem::holder_family(l, a, m, k, j).unwrap()),
            prop::array::uniform4(-3.0f64..3.0).prop_map(|a| {
                PlanarSystem::new(
                    Mat2::new(a[0], a[1], a[2], a[3]),
                    Remainder::HolderPolar {
                        alpha: 0.4,
                        amplitude: 1.5,
                        wavenumber: 2,
                    },
                )
                .unwrap()
            }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn polar_matches_cartesian(
            sys in any_system(),
            log10_r in -6.0f64..(0.5f64).log10(),
            theta in -20.0f64..20.0,
        ) {
            let r = 10f64.powf(log10_r);
            let rho = r.ln();
            let p = Vec2::from_polar(r, theta);
            let f = sys.cartesian_rhs(p);
            let (rho_dot, theta_dot) = sys.polar_rhs(rho, theta).unwrap();
            let r2 = p.norm_squared();
            let radial = (r2 * rho_dot - p.dot(f)).abs() / r2;
            let angular = (r2 * theta_dot - p.cross(f)).abs() / r2;
            prop_assert!(radial < 1e-10, "radial mismatch {radial}");
            prop_assert!(angular < 1e-10, "angular mismatch {angular}");
        }
    }

    proptest! {
        #[test]
        fn holder_family_bound_is_exact(
            alpha in 0.05f64..0.95,
            amplitude in 0.0f64..10.0,
            k in -8i32..9,
        ) {
            let sys = PlanarSystem::holder_family(-1.0, alpha, amplitude, k, false).unwrap();
            let est = sys
                .estimate_holder_constant(alpha, &HolderGrid::with_sizes(1e-6, 0.5, 40, 64))
                .unwrap();
            prop_assert!(est.m_hat <= amplitude + 1e-12);
        }
    }
}
