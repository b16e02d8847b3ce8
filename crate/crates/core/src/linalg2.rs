//! Closed-form spectral analysis of real 2×2 matrices.
//!
//! Eigenvalues come from the characteristic quadratic `λ² − tr·λ + det = 0`.
//! Repeated roots are detected with a scaled discriminant tolerance, and the
//! repeated case is split into diagonalizable / defective by the rank of
//! `J − λI`. The defective normal form uses the lower-triangular block
//! `[[λ, 0], [−λ, λ]]`, i.e. the Jordan off-diagonal is rescaled to `−λ`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Real 2×2 matrix, row-major entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn to_rows(self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn from_columns(c1: Vec2, c2: Vec2) -> Self {
        Self::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn scalar(s: f64) -> Self {
        Self::diag(s, s)
    }

    /// The scaled Jordan block `[[λ, 0], [−λ, λ]]`.
    pub fn scaled_jordan(lambda: f64) -> Self {
        Self::new(lambda, 0.0, -lambda, lambda)
    }

    pub fn trace(self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a21 * v.x + self.a22 * v.y,
        )
    }

    pub fn col1(self) -> Vec2 {
        Vec2::new(self.a11, self.a21)
    }

    pub fn col2(self) -> Vec2 {
        Vec2::new(self.a12, self.a22)
    }

    pub fn inverse(self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = 1.0 / det;
        Some(Self::new(
            self.a22 * inv,
            -self.a12 * inv,
            -self.a21 * inv,
            self.a11 * inv,
        ))
    }

    /// Largest absolute entry.
    pub fn max_abs(self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    /// Frobenius norm.
    pub fn norm_fro(self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22)
            .sqrt()
    }

    /// Condition number in the Frobenius norm; infinite for singular matrices.
    pub fn condition(self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_fro() * inv.norm_fro(),
            None => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        self.mul_vec(rhs)
    }
}

/// An eigenvalue as a real pair `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn is_real(self) -> bool {
        self.im == 0.0
    }

    pub fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl fmt::Display for Eigenvalue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.im > 0.0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}-{}i", self.re, -self.im)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectralStructure {
    DistinctReal,
    ComplexPair,
    RepeatedDiagonalizable,
    RepeatedDefective,
}

impl SpectralStructure {
    pub fn is_repeated(self) -> bool {
        matches!(
            self,
            SpectralStructure::RepeatedDiagonalizable | SpectralStructure::RepeatedDefective
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SpectralStructure::DistinctReal => "DistinctReal",
            SpectralStructure::ComplexPair => "ComplexPair",
            SpectralStructure::RepeatedDiagonalizable => "RepeatedDiagonalizable",
            SpectralStructure::RepeatedDefective => "RepeatedDefective",
        }
    }
}

/// Eigenvalues of a 2×2 matrix with their structure tag.
///
/// For `DistinctReal` the eigenvalues are ordered `lambda1 < lambda2`; for
/// `ComplexPair`, `lambda1` carries the positive imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda1: Eigenvalue,
    pub lambda2: Eigenvalue,
    pub structure: SpectralStructure,
}

impl Spectrum {
    pub fn trace(&self) -> f64 {
        self.lambda1.re + self.lambda2.re
    }

    /// Product λ₁λ₂ (real for every structure).
    pub fn det(&self) -> f64 {
        self.lambda1.re * self.lambda2.re - self.lambda1.im * self.lambda2.im
    }

    /// The repeated eigenvalue, if the structure is repeated.
    pub fn repeated_value(&self) -> Option<f64> {
        self.structure.is_repeated().then_some(self.lambda1.re)
    }

    pub fn real_parts(&self) -> [f64; 2] {
        [self.lambda1.re, self.lambda2.re]
    }

    pub fn max_modulus(&self) -> f64 {
        self.lambda1.modulus().max(self.lambda2.modulus())
    }
}

/// Tolerances for repeated-root detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerance {
    /// `|tr² − 4det| ≤ discriminant · max(1, tr², |det|)` counts as a repeated root.
    pub discriminant: f64,
}

impl Default for SpectralTolerance {
    fn default() -> Self {
        Self {
            discriminant: 1e-10,
        }
    }
}

impl SpectralTolerance {
    fn discriminant_scale(self, tr: f64, det: f64) -> f64 {
        self.discriminant * 1f64.max(tr * tr).max(det.abs())
    }

    /// Threshold on `max|J − λI|` below which `J − λI` has rank 0. An eigenvalue
    /// gap allowed by the discriminant test is of order `sqrt(tol)·|J|`, so the
    /// rank test uses the same scale.
    fn rank_threshold(self, j: Mat2) -> f64 {
        self.discriminant.sqrt() * 1f64.max(j.max_abs())
    }
}

pub fn eigen(j: Mat2) -> Spectrum {
    eigen_with(j, SpectralTolerance::default())
}

pub fn eigen_with(j: Mat2, tol: SpectralTolerance) -> Spectrum {
    let tr = j.trace();
    let det = j.det();
    let disc = tr * tr - 4.0 * det;

    if disc.abs() <= tol.discriminant_scale(tr, det) {
        let lambda = 0.5 * tr;
        let m = j - Mat2::scalar(lambda);
        let structure = if m.max_abs() <= tol.rank_threshold(j) {
            SpectralStructure::RepeatedDiagonalizable
        } else {
            SpectralStructure::RepeatedDefective
        };
        return Spectrum {
            lambda1: Eigenvalue::real(lambda),
            lambda2: Eigenvalue::real(lambda),
            structure,
        };
    }

    if disc < 0.0 {
        let re = 0.5 * tr;
        let im = 0.5 * (-disc).sqrt();
        return Spectrum {
            lambda1: Eigenvalue { re, im },
            lambda2: Eigenvalue { re, im: -im },
            structure: SpectralStructure::ComplexPair,
        };
    }

    // q carries the sign of tr so the sum never cancels; the second root
    // follows from Vieta.
    let sq = disc.sqrt();
    let q = 0.5 * (tr + sq.copysign(tr));
    let (mut l1, mut l2) = if q != 0.0 {
        (q, det / q)
    } else {
        (0.5 * sq, -0.5 * sq)
    };
    if l1 > l2 {
        std::mem::swap(&mut l1, &mut l2);
    }
    Spectrum {
        lambda1: Eigenvalue::real(l1),
        lambda2: Eigenvalue::real(l2),
        structure: SpectralStructure::DistinctReal,
    }
}

/// Unit eigenvector of `j` for the real eigenvalue `lambda`.
///
/// Takes the null direction of the dominant row of `J − λI`; when both rows
/// vanish every vector is an eigenvector and `(1, 0)` is returned.
pub fn eigenvector(j: Mat2, lambda: f64) -> Vec2 {
    let m = j - Mat2::scalar(lambda);
    let r1 = Vec2::new(m.a11, m.a12);
    let r2 = Vec2::new(m.a21, m.a22);
    let row = if r1.norm_squared() >= r2.norm_squared() {
        r1
    } else {
        r2
    };
    let n = row.norm();
    if n == 0.0 {
        return Vec2::new(1.0, 0.0);
    }
    Vec2::new(-row.y / n, row.x / n)
}

/// Eigenpairs for the real, diagonalizable structures.
pub fn eigenpairs(j: Mat2, s: &Spectrum) -> Option<[(f64, Vec2); 2]> {
    match s.structure {
        SpectralStructure::DistinctReal => Some([
            (s.lambda1.re, eigenvector(j, s.lambda1.re)),
            (s.lambda2.re, eigenvector(j, s.lambda2.re)),
        ]),
        SpectralStructure::RepeatedDiagonalizable => Some([
            (s.lambda1.re, Vec2::new(1.0, 0.0)),
            (s.lambda1.re, Vec2::new(0.0, 1.0)),
        ]),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalFormKind {
    Diagonal,
    ScaledJordan,
}

/// `P⁻¹ J P ≈ N` for a repeated eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub p: Mat2,
    pub n: Mat2,
    pub kind: NormalFormKind,
}

impl NormalForm {
    /// `max|P⁻¹JP − N|`.
    pub fn residual(&self, j: Mat2) -> f64 {
        match self.p.inverse() {
            Some(pinv) => (pinv * j * self.p - self.n).max_abs(),
            None => f64::INFINITY,
        }
    }

    /// `max|P N P⁻¹ − J|`.
    pub fn reconstruction_error(&self, j: Mat2) -> f64 {
        match self.p.inverse() {
            Some(pinv) => (self.p * self.n * pinv - j).max_abs(),
            None => f64::INFINITY,
        }
    }
}

/// Similarity transform bringing `j` to `λI` or to the scaled Jordan block.
///
/// In the defective case `M = J − λI` is nilpotent, so for any `p₁` outside
/// its kernel `w = M p₁` is an eigenvector. With `p₂ = −w/λ` the columns of
/// `P = [p₁ p₂]` satisfy `J p₁ = λp₁ − λp₂` and `J p₂ = λp₂`.
pub fn normal_form(j: Mat2, s: &Spectrum) -> Result<NormalForm> {
    let lambda = s.repeated_value().ok_or(Error::WrongStructure {
        expected: "RepeatedDiagonalizable or RepeatedDefective",
        found: s.structure.name(),
    })?;
    if lambda.abs() <= 1e-12 * 1f64.max(j.max_abs()) {
        return Err(Error::DegenerateSpectrum(lambda));
    }

    if s.structure == SpectralStructure::RepeatedDiagonalizable {
        return Ok(NormalForm {
            p: Mat2::IDENTITY,
            n: Mat2::scalar(lambda),
            kind: NormalFormKind::Diagonal,
        });
    }

    let m = j - Mat2::scalar(lambda);
    let (c1, c2) = (m.col1(), m.col2());
    let (e, me) = if c1.norm_squared() >= c2.norm_squared() {
        (Vec2::new(1.0, 0.0), c1)
    } else {
        (Vec2::new(0.0, 1.0), c2)
    };
    let scale = me.norm();
    let p1 = e * (1.0 / scale);
    let w = me * (1.0 / scale);
    let p2 = w * (-1.0 / lambda);

    Ok(NormalForm {
        p: Mat2::from_columns(p1, p2),
        n: Mat2::scaled_jordan(lambda),
        kind: NormalFormKind::ScaledJordan,
    })
}
