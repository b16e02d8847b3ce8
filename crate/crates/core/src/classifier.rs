//! Node / saddle / focus classification.
//!
//! [`spectral_classify`] decides from the eigenvalues of the Jacobian and
//! the regularity of the vector field; [`empirical_classify`] integrates a
//! trajectory and looks at whether the unwrapped angle keeps turning or
//! settles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, wrap_angle, IntegratorConfig, Trajectory};
use crate::linalg2::{eigen, SpectralStructure, Spectrum};
use crate::system::{PlanarSystem, Remainder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Node,
    Focus,
    Saddle,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Repelling,
    Attracting,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    SpectralDistinct,
    SpectralRepeatedHolder,
    Empirical,
}

/// Why a spectral classification came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralReason {
    RealSameSign,
    RealOppositeSigns,
    ComplexNonzeroRealPart,
    RepeatedHolder,
    RepeatedC1Only,
    ZeroRealPart,
}

impl fmt::Display for SpectralReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectralReason::RealSameSign => "real with the same sign",
            SpectralReason::RealOppositeSigns => "real with opposite signs",
            SpectralReason::ComplexNonzeroRealPart => "imaginary with nonzero real part",
            SpectralReason::RepeatedHolder => "repeated eigenvalue with C^{1,alpha} regularity",
            SpectralReason::RepeatedC1Only => {
                "repeated eigenvalue with only C^1 regularity (node or focus possible)"
            }
            SpectralReason::ZeroRealPart => "eigenvalue with zero real part",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub shape: Shape,
    pub stability: Stability,
    pub evidence: Evidence,
    /// Final angle mod 2π, for empirical nodes.
    pub theta_limit: Option<f64>,
    /// Turns completed, for empirical foci.
    pub turns: Option<f64>,
    /// Angle of the vector field at the final sample (empirical runs only).
    pub final_direction: Option<f64>,
    /// Set by the spectral classifier.
    pub reason: Option<SpectralReason>,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Repelling => "repelling",
            Stability::Attracting => "attracting",
            Stability::NotApplicable => "n/a",
        })
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape)?;
        if self.stability != Stability::NotApplicable {
            write!(f, " ({})", self.stability)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegularityClass {
    C1,
    C1Alpha(f64),
}

impl RegularityClass {
    pub fn c1_alpha(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(RegularityClass::C1Alpha(alpha))
        } else {
            Err(Error::ParameterOutOfRange(format!(
                "Hölder exponent must lie in (0, 1), got {alpha}"
            )))
        }
    }

    /// Regularity known for a system by construction. Linear systems are
    /// smooth, so any exponent works; 0.5 is reported.
    pub fn of_system(sys: &PlanarSystem) -> Option<Self> {
        match sys.remainder() {
            Remainder::None => Some(RegularityClass::C1Alpha(0.5)),
            Remainder::LogRotation { .. } => Some(RegularityClass::C1),
            Remainder::HolderPolar { alpha, .. } => Some(RegularityClass::C1Alpha(*alpha)),
            Remainder::Custom(_) => None,
        }
    }
}

fn stability_of(re: [f64; 2]) -> Stability {
    if re.iter().all(|&x| x < 0.0) {
        Stability::Attracting
    } else if re.iter().all(|&x| x > 0.0) {
        Stability::Repelling
    } else {
        Stability::NotApplicable
    }
}

/// Real parts this small relative to the spectrum count as zero.
const ZERO_REAL_PART: f64 = 1e-12;

pub fn spectral_classify(s: &Spectrum, reg: RegularityClass) -> Classification {
    let scale = s.max_modulus();
    let mut re = s.real_parts();
    for x in &mut re {
        if x.abs() <= ZERO_REAL_PART * scale {
            *x = 0.0;
        }
    }
    let evidence = if s.structure.is_repeated() {
        Evidence::SpectralRepeatedHolder
    } else {
        Evidence::SpectralDistinct
    };
    let stability = stability_of(re);

    let (shape, reason) = if re.contains(&0.0) {
        (Shape::Undetermined, SpectralReason::ZeroRealPart)
    } else {
        match (s.structure, reg) {
            (SpectralStructure::DistinctReal, _) if re[0].signum() == re[1].signum() => {
                (Shape::Node, SpectralReason::RealSameSign)
            }
            (SpectralStructure::DistinctReal, _) => {
                (Shape::Saddle, SpectralReason::RealOppositeSigns)
            }
            (SpectralStructure::ComplexPair, _) => {
                (Shape::Focus, SpectralReason::ComplexNonzeroRealPart)
            }
            (_, RegularityClass::C1Alpha(_)) => (Shape::Node, SpectralReason::RepeatedHolder),
            (_, RegularityClass::C1) => (Shape::Undetermined, SpectralReason::RepeatedC1Only),
        }
    };

    Classification {
        shape,
        stability: if shape == Shape::Saddle {
            Stability::NotApplicable
        } else {
            stability
        },
        evidence,
        theta_limit: None,
        turns: None,
        final_direction: None,
        reason: Some(reason),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalThresholds {
    /// Winding over the run at or above this many turns means focus.
    pub turns: f64,
    /// Tail variation of θ below this (radians) means node.
    pub tail: f64,
    /// Fraction of the time span, counted from the end, used for the tail.
    pub tail_window_fraction: f64,
}

impl Default for EmpiricalThresholds {
    fn default() -> Self {
        Self {
            turns: 2.0,
            tail: 1e-3,
            tail_window_fraction: 0.5,
        }
    }
}

/// Result of [`empirical_classify`] together with the trajectory it used.
#[derive(Debug, Clone)]
pub struct EmpiricalRun {
    pub classification: Classification,
    pub trajectory: Trajectory,
    pub tail_variation: f64,
}

pub fn empirical_classify(
    sys: &PlanarSystem,
    rho0: f64,
    theta0: f64,
    cfg: &IntegratorConfig,
    thresholds: &EmpiricalThresholds,
) -> Result<Classification> {
    empirical_run(sys, rho0, theta0, cfg, thresholds).map(|run| run.classification)
}

/// Repelling equilibria are handled by integrating the time-reversed field.
pub fn empirical_run(
    sys: &PlanarSystem,
    rho0: f64,
    theta0: f64,
    cfg: &IntegratorConfig,
    thresholds: &EmpiricalThresholds,
) -> Result<EmpiricalRun> {
    let s = eigen(sys.jacobian());
    let stability = stability_of(s.real_parts());
    let flow = match stability {
        Stability::Attracting => sys.clone(),
        Stability::Repelling => sys.time_reversed(),
        Stability::NotApplicable => {
            return Err(Error::SpectrumMismatch(format!(
                "empirical classification needs real parts of one strict sign, got {} and {}",
                s.lambda1, s.lambda2
            )))
        }
    };

    let trajectory = integrate(&flow, rho0, theta0, cfg)?;
    let end = *trajectory.last();
    let turns = trajectory.winding(0.0).abs();
    let t_from = end.t * (1.0 - thresholds.tail_window_fraction);
    let tail_variation = trajectory.theta_tail_variation(t_from);
    let final_direction = flow
        .direction_angle(end.rho, end.theta)
        .ok()
        .map(wrap_angle);

    let mut classification = Classification {
        shape: Shape::Undetermined,
        stability,
        evidence: Evidence::Empirical,
        theta_limit: None,
        turns: None,
        final_direction,
        reason: None,
    };
    if turns >= thresholds.turns {
        classification.shape = Shape::Focus;
        classification.turns = Some(turns);
    } else if tail_variation < thresholds.tail {
        classification.shape = Shape::Node;
        classification.theta_limit = Some(wrap_angle(end.theta));
    }
    Ok(EmpiricalRun {
        classification,
        trajectory,
        tail_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Sampling;
    use crate::linalg2::{Eigenvalue, Mat2};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn spectrum(l1: Eigenvalue, l2: Eigenvalue, structure: SpectralStructure) -> Spectrum {
        Spectrum {
            lambda1: l1,
            lambda2: l2,
            structure,
        }
    }

    #[test]
    fn spectral_examples() {
        use SpectralStructure::*;
        let r = Eigenvalue::real;

        let c = spectral_classify(&spectrum(r(1.0), r(2.0), DistinctReal), RegularityClass::C1);
        assert_eq!((c.shape, c.stability), (Shape::Node, Stability::Repelling));
        assert_eq!(c.reason, Some(SpectralReason::RealSameSign));

        let c = spectral_classify(
            &spectrum(r(-1.0), r(1.0), DistinctReal),
            RegularityClass::C1,
        );
        assert_eq!(
            (c.shape, c.stability),
            (Shape::Saddle, Stability::NotApplicable)
        );

        let c = spectral_classify(
            &spectrum(
                Eigenvalue { re: -1.0, im: 2.0 },
                Eigenvalue { re: -1.0, im: -2.0 },
                ComplexPair,
            ),
            RegularityClass::C1,
        );
        assert_eq!(
            (c.shape, c.stability),
            (Shape::Focus, Stability::Attracting)
        );

        let rep = spectrum(r(-1.0), r(-1.0), RepeatedDefective);
        let c = spectral_classify(&rep, RegularityClass::C1);
        assert_eq!(c.shape, Shape::Undetermined);
        assert_eq!(c.evidence, Evidence::SpectralRepeatedHolder);
        let c = spectral_classify(&rep, RegularityClass::C1Alpha(0.5));
        assert_eq!((c.shape, c.stability), (Shape::Node, Stability::Attracting));
    }

    #[test]
    fn zero_real_part_is_undetermined() {
        let c = spectral_classify(
            &eigen(Mat2::new(0.0, 1.0, -1.0, 0.0)),
            RegularityClass::C1Alpha(0.5),
        );
        assert_eq!(
            (c.shape, c.stability),
            (Shape::Undetermined, Stability::NotApplicable)
        );
        let c = spectral_classify(&eigen(Mat2::diag(0.0, -1.0)), RegularityClass::C1);
        assert_eq!(c.reason, Some(SpectralReason::ZeroRealPart));
    }

    #[test]
    fn regularity_validation() {
        assert!(RegularityClass::c1_alpha(0.3).is_ok());
        assert!(RegularityClass::c1_alpha(0.0).is_err());
        assert!(RegularityClass::c1_alpha(1.0).is_err());
    }

    #[test]
    fn display_matches_cli_wording() {
        let c = spectral_classify(&eigen(Mat2::diag(1.0, 2.0)), RegularityClass::C1);
        assert_eq!(
            format!("{c}, spectral: {}", c.reason.unwrap()),
            "Node (repelling), spectral: real with the same sign"
        );
    }

    #[test]
    fn empirical_counterexample_focus() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let cfg = IntegratorConfig::with_t_max(3e5);
        let c = empirical_classify(&sys, -1.0, 0.0, &cfg, &EmpiricalThresholds::default()).unwrap();
        assert_eq!(
            (c.shape, c.stability),
            (Shape::Focus, Stability::Attracting)
        );
        assert!(c.turns.unwrap() >= 2.0);
        assert!(c.theta_limit.is_none());
    }

    #[test]
    fn empirical_holder_node() {
        let sys = PlanarSystem::holder_family(-1.0, 0.5, 0.1, 3, false).unwrap();
        let cfg = IntegratorConfig::with_t_max(100.0);
        let c = empirical_classify(
            &sys,
            0.01f64.ln(),
            0.7,
            &cfg,
            &EmpiricalThresholds::default(),
        )
        .unwrap();
        assert_eq!((c.shape, c.stability), (Shape::Node, Stability::Attracting));
        assert!(c.theta_limit.is_some());
    }

    #[test]
    fn empirical_jordan_node_at_half_pi() {
        let sys = PlanarSystem::holder_family(-1.0, 0.5, 0.1, 3, true).unwrap();
        let cfg = IntegratorConfig {
            t_max: 1e4,
            sampling: Sampling::LogSpaced { per_decade: 64 },
            ..IntegratorConfig::default()
        };
        let c = empirical_classify(
            &sys,
            0.01f64.ln(),
            0.1,
            &cfg,
            &EmpiricalThresholds::default(),
        )
        .unwrap();
        assert_eq!(c.shape, Shape::Node);
        let limit = c.theta_limit.unwrap();
        assert!((limit - FRAC_PI_2).abs() < 1e-3, "{limit}");
        // the field direction tends to the same line, possibly reversed
        let dir = c.final_direction.unwrap();
        assert!(
            (dir - FRAC_PI_2).abs() < 1e-2 || (dir - 3.0 * FRAC_PI_2).abs() < 1e-2,
            "{dir}"
        );
    }

    #[test]
    fn empirical_repelling_uses_time_reversal() {
        let sys = PlanarSystem::linear(Mat2::new(1.0, -3.0, 3.0, 1.0)).unwrap();
        let c = empirical_classify(
            &sys,
            -1.0,
            0.0,
            &IntegratorConfig::with_t_max(20.0),
            &EmpiricalThresholds::default(),
        )
        .unwrap();
        assert_eq!((c.shape, c.stability), (Shape::Focus, Stability::Repelling));
        assert!((c.turns.unwrap() - 60.0 / std::f64::consts::TAU).abs() < 1e-6);
    }

    #[test]
    fn empirical_short_horizon_undetermined() {
        let sys = PlanarSystem::counterexample(0.0).unwrap();
        let c = empirical_classify(
            &sys,
            -1.0,
            0.0,
            &IntegratorConfig::with_t_max(10.0),
            &EmpiricalThresholds::default(),
        )
        .unwrap();
        assert_eq!(c.shape, Shape::Undetermined);
    }

    #[test]
    fn empirical_rejects_saddle() {
        let sys = PlanarSystem::linear(Mat2::diag(-1.0, 1.0)).unwrap();
        assert!(matches!(
            empirical_classify(
                &sys,
                -1.0,
                0.0,
                &IntegratorConfig::default(),
                &EmpiricalThresholds::default()
            ),
            Err(Error::SpectrumMismatch(_))
        ));
    }

    #[test]
    fn counterexample_focus_for_all_epsilon() {
        let cfg = IntegratorConfig::with_t_max(3e5);
        for eps in [0.0, 0.5, 1.0, 1.5] {
            let sys = PlanarSystem::counterexample(eps).unwrap();
            let c =
                empirical_classify(&sys, -1.0, 0.0, &cfg, &EmpiricalThresholds::default()).unwrap();
            assert_eq!(c.shape, Shape::Focus, "eps={eps}");
        }
    }

    fn invertible() -> impl Strategy<Value = Mat2> {
        prop::array::uniform4(-3.0f64..3.0)
            .prop_map(|a| Mat2::new(a[0], a[1], a[2], a[3]))
            .prop_filter("condition < 1e3", |p| p.condition() < 1e3)
    }

    fn clear_spectrum() -> impl Strategy<Value = Mat2> {
        // eigenvalue magnitudes well separated from zero and from each other
        prop_oneof![
            (0.2f64..3.0, 0.2f64..3.0, any::<bool>(), any::<bool>()).prop_map(
                |(a, gap, s1, s2)| {
                    let l1 = if s1 { a } else { -a };
                    let l2 = if s2 {
                        l1 + gap * l1.signum()
                    } else {
                        -l1.signum() * gap
                    };
                    Mat2::diag(l1, l2)
                }
            ),
            (0.2f64..3.0, 0.2f64..3.0, any::<bool>()).prop_map(|(re, im, neg)| Mat2::new(
                if neg { -re } else { re },
                -im,
                im,
                if neg { -re } else { re }
            )),
            (0.2f64..3.0, any::<bool>(), any::<bool>()).prop_map(|(l, neg, defective)| {
                let l = if neg { -l } else { l };
                Mat2::new(l, 0.0, if defective { 1.0 } else { 0.0 }, l)
            }),
        ]
    }

    proptest! {
        #[test]
        fn scale_invariant(j in clear_spectrum(), c in 0.01f64..100.0) {
            for reg in [RegularityClass::C1, RegularityClass::C1Alpha(0.5)] {
                let a = spectral_classify(&eigen(j), reg);
                let b = spectral_classify(&eigen(j.scale(c)), reg);
                prop_assert_eq!((a.shape, a.stability), (b.shape, b.stability));
            }
        }

        #[test]
        fn similarity_invariant(j in clear_spectrum(), p in invertible()) {
            let pinv = p.inverse().unwrap();
            for reg in [RegularityClass::C1, RegularityClass::C1Alpha(0.5)] {
                let a = spectral_classify(&eigen(j), reg);
                let b = spectral_classify(&eigen(pinv * j * p), reg);
                prop_assert_eq!((a.shape, a.stability), (b.shape, b.stability));
            }
        }
    }
}
