//! Topological integrals of 2x2 matrix fields: 1D winding numbers, Chern
//! numbers of projection fields on surfaces and the degree of unitary fields
//! on 3D domains. The witnesses are the Bott-type projection `p̂`, its lift
//! `p̃`, the phases `u±`, and the `SU(2)`-valued field `u` with `p = u q u*`.
//!
//! Fields are evaluated in chart coordinates. [`PolarChart`] and
//! [`HalfLineChart`] wrap a field given in Cartesian coordinates and apply the
//! chain rule to its partial derivatives.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abk::{self, SixTermProblem, ZMap};
use crate::coadjoint::indexed_rng;

pub type M2 = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

fn ident() -> M2 {
    M2::identity()
}

/// Pauli combination `v . sigma`.
fn pauli(v: [f64; 3]) -> M2 {
    M2::new(
        c(v[2]),
        Complex64::new(v[0], -v[1]),
        Complex64::new(v[0], v[1]),
        c(-v[2]),
    )
}

/// Largest entry modulus.
pub fn max_abs(m: &M2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn inverse(m: &M2) -> Option<M2> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.norm() == 0.0 {
        return None;
    }
    Some(M2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

fn det(m: &M2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Smallest singular value of a 2x2 matrix.
pub fn min_singular_value(m: &M2) -> f64 {
    let fro2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let d = det(m).norm();
    let disc = (fro2 * fro2 - 4.0 * d * d).max(0.0).sqrt();
    ((fro2 - disc) / 2.0).max(0.0).sqrt()
}

/// `exp(i theta H)` for Hermitian `H`, from `H = a I + b . sigma`.
pub fn expi_hermitian(theta: f64, h: &M2) -> M2 {
    let a = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
    let b = [
        h[(1, 0)].re,
        h[(1, 0)].im,
        (h[(0, 0)].re - h[(1, 1)].re) / 2.0,
    ];
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    let phase = cis(theta * a);
    if nb == 0.0 {
        return ident() * phase;
    }
    let unit = [b[0] / nb, b[1] / nb, b[2] / nb];
    let (s, co) = (theta * nb).sin_cos();
    (ident() * c(co) + pauli(unit) * (I * s)) * phase
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Projection,
    Invertible,
    SelfAdjointLift,
}

/// A 2x2 matrix-valued function of `arity` real coordinates. Scalar fields
/// are embedded as `diag(f, 1)`.
pub trait MatrixField: Send + Sync {
    fn arity(&self) -> usize;
    fn kind(&self) -> FieldKind;
    fn eval(&self, x: &[f64]) -> M2;

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        fd_partial(self, x, axis)
    }
}

/// Central difference with `h = 1e-5 (1 + |x_axis|)`.
pub fn fd_partial<F: MatrixField + ?Sized>(f: &F, x: &[f64], axis: usize) -> M2 {
    let h = 1e-5 * (1.0 + x[axis].abs());
    let mut xp = x.to_vec();
    xp[axis] = x[axis] + h;
    let fp = f.eval(&xp);
    xp[axis] = x[axis] - h;
    let fm = f.eval(&xp);
    (fp - fm) / c(2.0 * h)
}

/// Bloch vector of `p̂` and its `x`, `y` derivatives:
/// `p̂ = (I + n . sigma) / 2`, `n = (S x, -S y, -cos(pi r))`, `S = sin(pi r) / r`.
fn bloch(x: f64, y: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let r2 = x * x + y * y;
    let r = r2.sqrt();
    // S(r) and T(r) = S'(r) / r
    let (s, t) = if r < 1e-2 {
        let p2 = PI * PI;
        (
            PI * (1.0 - p2 * r2 / 6.0 + p2 * p2 * r2 * r2 / 120.0),
            PI * p2 * (-1.0 / 3.0 + p2 * r2 / 30.0 - p2 * p2 * r2 * r2 / 840.0),
        )
    } else {
        let (sn, cs) = (PI * r).sin_cos();
        (sn / r, (PI * r * cs - sn) / (r2 * r))
    };
    let n = [s * x, -s * y, -(PI * r).cos()];
    let dx = [s + x * x * t, -x * y * t, PI * s * x];
    let dy = [x * y * t, -(s + y * y * t), PI * s * y];
    (n, dx, dy)
}

/// The projection `p̂(x, y)`, rank one, equal to `diag(1, 0)` on the unit
/// circle and `diag(0, 1)` at the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Phat;

impl Phat {
    /// The matrix as displayed, entry by entry.
    pub fn literal(x: f64, y: f64) -> M2 {
        let r = (x * x + y * y).sqrt();
        let (sn, cs) = (PI * r).sin_cos();
        if r == 0.0 {
            return M2::new(c(0.0), c(0.0), c(0.0), c(1.0));
        }
        let w = Complex64::new(x, y) / r;
        M2::new(c(1.0 - cs), w * sn, w.conj() * sn, c(1.0 + cs)) / c(2.0)
    }
}

impl MatrixField for Phat {
    fn arity(&self) -> usize {
        2
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Projection
    }

    fn eval(&self, x: &[f64]) -> M2 {
        let (n, _, _) = bloch(x[0], x[1]);
        (ident() + pauli(n)) / c(2.0)
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let (_, dx, dy) = bloch(x[0], x[1]);
        pauli(if axis == 0 { dx } else { dy }) / c(2.0)
    }
}

fn lift_t(z: f64) -> (f64, f64) {
    let q = 1.0 + z * z;
    (1.0 / q.sqrt(), -z / (q * q.sqrt()))
}

/// `p̃(x, y, z) = p̂(x, y) / sqrt(1 + z^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ptilde;

impl MatrixField for Ptilde {
    fn arity(&self) -> usize {
        3
    }

    fn kind(&self) -> FieldKind {
        FieldKind::SelfAdjointLift
    }

    fn eval(&self, x: &[f64]) -> M2 {
        Phat.eval(&x[..2]) * c(lift_t(x[2]).0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    /// `+1` on the positive half-line.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    fn contains(self, z: f64) -> bool {
        match self {
            Side::Plus => z >= 0.0,
            Side::Minus => z <= 0.0,
        }
    }
}

/// `e^{2 pi i p̃}` on the closed half-space `z >= 0` or `z <= 0`.
#[derive(Debug, Clone, Copy)]
pub struct ExpPtilde {
    pub side: Side,
}

fn exp_lift(x: f64, y: f64, t: f64) -> M2 {
    // exp(2 pi i t (I + N) / 2) = e^{i pi t} (cos(pi t) I + i sin(pi t) N)
    let (n, _, _) = bloch(x, y);
    let (s, co) = (PI * t).sin_cos();
    (ident() * c(co) + pauli(n) * (I * s)) * cis(PI * t)
}

impl MatrixField for ExpPtilde {
    fn arity(&self) -> usize {
        3
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Invertible
    }

    fn eval(&self, x: &[f64]) -> M2 {
        debug_assert!(self.side.contains(x[2]) || x[2].abs() < 1e-9);
        exp_lift(x[0], x[1], lift_t(x[2]).0)
    }
}

/// `e^{2 pi i p̃} e^{-2 pi i t ε1}` with `t = 1 / sqrt(1 + z^2)`: determinant
/// one, and equal to the identity on the unit circle, at `z = 0` and as
/// `z -> ±inf`.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedExpPtilde {
    pub side: Side,
}

impl MatrixField for NormalizedExpPtilde {
    fn arity(&self) -> usize {
        3
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Invertible
    }

    fn eval(&self, x: &[f64]) -> M2 {
        let t = lift_t(x[2]).0;
        let f = M2::new(cis(-2.0 * PI * t), c(0.0), c(0.0), c(1.0));
        exp_lift(x[0], x[1], t) * f
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let (t, dt) = lift_t(x[2]);
        let (n, ndx, ndy) = bloch(x[0], x[1]);
        let (s, co) = (PI * t).sin_cos();
        let ph = cis(PI * t);
        let e = (ident() * c(co) + pauli(n) * (I * s)) * ph;
        let f = M2::new(cis(-2.0 * PI * t), c(0.0), c(0.0), c(1.0));
        match axis {
            0 | 1 => {
                let dn = if axis == 0 { ndx } else { ndy };
                pauli(dn) * (I * s * ph) * f
            }
            _ => {
                let de_dt = e * (I * PI) + (ident() * c(-PI * s) + pauli(n) * (I * PI * co)) * ph;
                let df_dt = M2::new(-2.0 * PI * I * cis(-2.0 * PI * t), c(0.0), c(0.0), c(0.0));
                (de_dt * f + e * df_dt) * c(dt)
            }
        }
    }
}

/// `u±(z) = e^{2 pi i (∓ z / sqrt(1 + z^2))}` and its derivative.
pub fn u_pm(side: Side, z: f64) -> (Complex64, Complex64) {
    let q = 1.0 + z * z;
    let phase = -side.sign() * z / q.sqrt();
    let u = cis(2.0 * PI * phase);
    let dphase = -side.sign() / (q * q.sqrt());
    (u, u * (2.0 * PI * dphase) * I)
}

/// The scalar phase `u±` on its half-line, raised to an integer power.
#[derive(Debug, Clone, Copy)]
pub struct HalfLinePhase {
    pub side: Side,
    pub power: i32,
}

impl MatrixField for HalfLinePhase {
    fn arity(&self) -> usize {
        1
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Invertible
    }

    fn eval(&self, x: &[f64]) -> M2 {
        let (u, _) = u_pm(self.side, x[0]);
        M2::new(u.powi(self.power), c(0.0), c(0.0), c(1.0))
    }

    fn partial(&self, x: &[f64], _axis: usize) -> M2 {
        let (u, du) = u_pm(self.side, x[0]);
        let k = self.power;
        let d = if k == 0 {
            c(0.0)
        } else {
            u.powi(k - 1) * du * c(k as f64)
        };
        M2::new(d, c(0.0), c(0.0), c(0.0))
    }
}

/// `[p̂ u± + (1 - p̂)] [ε1 u± + (1 - ε1)]^{-1}`, the reference representative
/// of the Bott element times `u±`.
#[derive(Debug, Clone, Copy)]
pub struct BottTimesPhase {
    pub side: Side,
}

impl MatrixField for BottTimesPhase {
    fn arity(&self) -> usize {
        3
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Invertible
    }

    fn eval(&self, x: &[f64]) -> M2 {
        let (u, _) = u_pm(self.side, x[2]);
        let p = Phat.eval(&x[..2]);
        (ident() + p * (u - 1.0)) * M2::new(u.inv(), c(0.0), c(0.0), c(1.0))
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let (u, du) = u_pm(self.side, x[2]);
        let p = Phat.eval(&x[..2]);
        let dinv = M2::new(u.inv(), c(0.0), c(0.0), c(1.0));
        match axis {
            0 | 1 => Phat.partial(&x[..2], axis) * (u - 1.0) * dinv,
            _ => {
                let a = ident() + p * (u - 1.0);
                let ddinv = M2::new(-du / (u * u), c(0.0), c(0.0), c(0.0));
                p * du * dinv + a * ddinv
            }
        }
    }
}

/// `u(θ1, θ2, φ)`, an `SU(2)`-valued function with `u = a ⊕ a^{-1}` at
/// `θ1 = θ2 = 0`, `a = e^{iφ}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UGamma3;

impl MatrixField for UGamma3 {
    fn arity(&self) -> usize {
        3
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Invertible
    }

    fn eval(&self, x: &[f64]) -> M2 {
        let (t1, t2, phi) = (x[0], x[1], x[2]);
        let e = cis(phi) * cis(t1);
        let (s2, c2) = t2.sin_cos();
        M2::new(e * c2, c(-s2), c(s2), e.conj() * c2)
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let (t1, t2, phi) = (x[0], x[1], x[2]);
        let e = cis(phi) * cis(t1);
        let (s2, c2) = t2.sin_cos();
        match axis {
            1 => M2::new(e * (-s2), c(-c2), c(c2), e.conj() * (-s2)),
            _ => M2::new(I * e * c2, c(0.0), c(0.0), -I * e.conj() * c2),
        }
    }
}

/// `q = diag(1, 0)`, also the constant `ε1`.
pub fn q_matrix() -> M2 {
    M2::new(c(1.0), c(0.0), c(0.0), c(0.0))
}

/// `p = u q u*`, the projection onto `(e^{i(φ + θ1)} cos θ2, sin θ2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PGamma3;

impl PGamma3 {
    /// `u q u*` computed from the matrices themselves.
    pub fn conjugated(x: &[f64]) -> M2 {
        let u = UGamma3.eval(x);
        u * q_matrix() * u.adjoint()
    }
}

impl MatrixField for PGamma3 {
    fn arity(&self) -> usize {
        3
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Projection
    }

    fn eval(&self, x: &[f64]) -> M2 {
        let e = cis(x[2] + x[0]);
        let (s2, c2) = x[1].sin_cos();
        M2::new(c(c2 * c2), e * (c2 * s2), e.conj() * (c2 * s2), c(s2 * s2))
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let e = cis(x[2] + x[0]);
        let (s2, c2) = x[1].sin_cos();
        match axis {
            1 => M2::new(
                c(-2.0 * c2 * s2),
                e * (c2 * c2 - s2 * s2),
                e.conj() * (c2 * c2 - s2 * s2),
                c(2.0 * c2 * s2),
            ),
            _ => M2::new(c(0.0), I * e * (c2 * s2), -I * e.conj() * (c2 * s2), c(0.0)),
        }
    }
}

/// A constant field of any arity.
#[derive(Debug, Clone, Copy)]
pub struct ConstantField {
    pub value: M2,
    pub arity: usize,
    pub kind: FieldKind,
}

impl ConstantField {
    pub fn identity(arity: usize) -> Self {
        ConstantField {
            value: ident(),
            arity,
            kind: FieldKind::Invertible,
        }
    }
}

impl MatrixField for ConstantField {
    fn arity(&self) -> usize {
        self.arity
    }

    fn kind(&self) -> FieldKind {
        self.kind
    }

    fn eval(&self, _x: &[f64]) -> M2 {
        self.value
    }

    fn partial(&self, _x: &[f64], _axis: usize) -> M2 {
        M2::zeros()
    }
}

/// Restricts a field to a slice by fixing some coordinates: chart coordinate
/// `i` feeds inner coordinate `map[i]`, the rest come from `fixed`.
pub struct Slice<F> {
    pub inner: F,
    pub fixed: Vec<f64>,
    pub map: Vec<usize>,
}

impl<F: MatrixField> Slice<F> {
    fn lift(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.fixed.clone();
        for (i, &k) in self.map.iter().enumerate() {
            full[k] = x[i];
        }
        full
    }
}

impl<F: MatrixField> MatrixField for Slice<F> {
    fn arity(&self) -> usize {
        self.map.len()
    }

    fn kind(&self) -> FieldKind {
        self.inner.kind()
    }

    fn eval(&self, x: &[f64]) -> M2 {
        self.inner.eval(&self.lift(x))
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        self.inner.partial(&self.lift(x), self.map[axis])
    }
}

/// `(r, θ, rest..) -> (r cos θ, r sin θ, rest..)`.
pub struct PolarChart<F> {
    pub inner: F,
}

impl<F: MatrixField> PolarChart<F> {
    fn cartesian(x: &[f64]) -> Vec<f64> {
        let (s, co) = x[1].sin_cos();
        let mut out = vec![x[0] * co, x[0] * s];
        out.extend_from_slice(&x[2..]);
        out
    }
}

impl<F: MatrixField> MatrixField for PolarChart<F> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn kind(&self) -> FieldKind {
        self.inner.kind()
    }

    fn eval(&self, x: &[f64]) -> M2 {
        self.inner.eval(&Self::cartesian(x))
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let y = Self::cartesian(x);
        let (s, co) = x[1].sin_cos();
        match axis {
            0 => self.inner.partial(&y, 0) * c(co) + self.inner.partial(&y, 1) * c(s),
            1 => {
                self.inner.partial(&y, 0) * c(-x[0] * s) + self.inner.partial(&y, 1) * c(x[0] * co)
            }
            k => self.inner.partial(&y, k),
        }
    }
}

/// Compactifies one coordinate: `τ ∈ [0, 1)` maps to `z = L tan(pi τ / 2) ∈ [0, inf)`,
/// and `τ ∈ (-1, 0]` to `(-inf, 0]`, preserving orientation.
pub struct HalfLineChart<F> {
    pub inner: F,
    pub axis: usize,
    pub scale: f64,
}

impl<F: MatrixField> HalfLineChart<F> {
    fn map(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let tau = x[self.axis];
        let arg = PI * tau / 2.0;
        let mut y = x.to_vec();
        y[self.axis] = self.scale * arg.tan();
        let cs = arg.cos();
        (y, self.scale * PI / 2.0 / (cs * cs))
    }
}

impl<F: MatrixField> MatrixField for HalfLineChart<F> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn kind(&self) -> FieldKind {
        self.inner.kind()
    }

    fn eval(&self, x: &[f64]) -> M2 {
        self.inner.eval(&self.map(x).0)
    }

    fn partial(&self, x: &[f64], axis: usize) -> M2 {
        let (y, dz) = self.map(x);
        let d = self.inner.partial(&y, axis);
        if axis == self.axis {
            d * c(dz)
        } else {
            d
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChernError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has arity {field} but the domain has dimension {domain}")]
    Arity { field: usize, domain: usize },
    #[error("boundary not constant on axis {axis} ({side} end): variation {variation:.3e} exceeds {tol:.0e}")]
    BoundaryNotConstant {
        axis: usize,
        side: &'static str,
        variation: f64,
        tol: f64,
    },
    #[error("field is not close to the identity on axis {axis} ({side} end): deviation {deviation:.3e}; enlarge the truncation")]
    BoundaryNotIdentity {
        axis: usize,
        side: &'static str,
        deviation: f64,
    },
    #[error("field is not invertible at {point:?}: smallest singular value {sigma:.3e}")]
    NotInvertible { point: Vec<f64>, sigma: f64 },
    #[error("field is not a projection: max |P^2 - P| + |P* - P| = {defect:.3e}")]
    NotProjection { defect: f64 },
    #[error("quadrature did not settle: raw value {raw} has residual {residual:.3e} (>= {tol}); refine the grid or tolerance")]
    Unconverged { raw: f64, residual: f64, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisTag {
    Periodic,
    /// Constant along each end face.
    BoundaryConstant,
    /// Tends to a constant at both ends (one of them possibly at infinity).
    DecayToConstant,
    /// Polar radius: the lower end is the origin and is not a boundary.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub tag: AxisTag,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize, tag: AxisTag) -> Self {
        Axis { lo, hi, n, tag }
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    fn midpoint(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.step()
    }

    fn checks_lo(&self) -> bool {
        matches!(
            self.tag,
            AxisTag::BoundaryConstant | AxisTag::DecayToConstant
        )
    }

    fn checks_hi(&self) -> bool {
        !matches!(self.tag, AxisTag::Periodic)
    }
}

pub const MIN_SAMPLES: usize = 16;

/// Product grid for midpoint quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    pub axes: Vec<Axis>,
}

impl GridDomain {
    pub fn new(axes: Vec<Axis>) -> Result<Self, ChernError> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(ChernError::InvalidGrid(format!(
                "dimension {} not in 1..=3",
                axes.len()
            )));
        }
        for (k, a) in axes.iter().enumerate() {
            if a.n < MIN_SAMPLES {
                return Err(ChernError::InvalidGrid(format!(
                    "axis {k} has {} samples (minimum {MIN_SAMPLES})",
                    a.n
                )));
            }
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) {
                return Err(ChernError::InvalidGrid(format!(
                    "axis {k} range [{}, {}] is not a finite interval",
                    a.lo, a.hi
                )));
            }
        }
        Ok(GridDomain { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn samples(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    /// The same domain with every sample count scaled by `num / den`.
    pub fn rescaled(&self, num: usize, den: usize) -> Result<Self, ChernError> {
        GridDomain::new(
            self.axes
                .iter()
                .map(|a| Axis {
                    n: a.n * num / den,
                    ..*a
                })
                .collect(),
        )
    }

    fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step()).product()
    }

    fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        for k in (0..self.dim()).rev() {
            let a = &self.axes[k];
            p[k] = a.midpoint(idx % a.n);
            idx /= a.n;
        }
        p
    }

    fn total(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Points of the face `axis = value`, on a grid of `m` points per
    /// remaining axis (endpoints included).
    fn face(&self, axis: usize, value: f64, m: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![vec![0.0; self.dim()]];
        for k in 0..self.dim() {
            let a = &self.axes[k];
            let vals: Vec<f64> = if k == axis {
                vec![value]
            } else {
                (0..m)
                    .map(|i| a.lo + (a.hi - a.lo) * i as f64 / (m - 1) as f64)
                    .collect()
            };
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q[k] = v;
                        q
                    })
                })
                .collect();
        }
        pts
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Midpoint rule for a complex integrand, returning the integral and the
/// largest per-sample `aux` value (used for field sanity checks). The grid is
/// cut into `chunks` contiguous blocks summed independently and then combined
/// in block order, so the result does not depend on the thread count.
pub fn midpoint_integral(
    domain: &GridDomain,
    chunks: usize,
    integrand: impl Fn(&[f64]) -> (Complex64, f64) + Sync,
) -> (Complex64, f64) {
    let total = domain.total();
    let chunks = chunks.clamp(1, total);
    let per = total.div_ceil(chunks);
    let parts: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let (mut re, mut im) = (NeumaierSum::default(), NeumaierSum::default());
            let mut aux: f64 = 0.0;
            for idx in k * per..((k + 1) * per).min(total) {
                let (v, a) = integrand(&domain.point(idx));
                re.add(v.re);
                im.add(v.im);
                aux = aux.max(a);
            }
            (re.value(), im.value(), aux)
        })
        .collect();
    let re: NeumaierSum = parts.iter().map(|p| p.0).collect();
    let im: NeumaierSum = parts.iter().map(|p| p.1).collect();
    let vol = domain.cell_volume();
    (
        Complex64::new(re.value() * vol, im.value() * vol),
        parts.iter().map(|p| p.2).fold(0.0, f64::max),
    )
}

/// A rounded topological integral with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopoIntegral {
    pub witness: String,
    pub raw_integral: f64,
    /// Imaginary part of the raw integral, zero in exact arithmetic.
    pub imaginary_part: f64,
    pub rounded: i64,
    /// `|raw - rounded|`.
    pub residual: f64,
    pub grid: Vec<usize>,
    /// Boundary constancy or identity deviation measured before integrating.
    pub boundary_variation: f64,
    /// Change of the raw value between half and full resolution.
    pub refinement_delta: Option<f64>,
}

impl TopoIntegral {
    fn new(witness: &str, raw: Complex64, grid: Vec<usize>, boundary: f64) -> Self {
        // avoid reporting -0
        let raw = raw + Complex64::new(0.0, 0.0);
        let rounded = raw.re.round() + 0.0;
        TopoIntegral {
            witness: witness.to_string(),
            raw_integral: raw.re,
            imaginary_part: raw.im,
            rounded: rounded as i64,
            residual: (raw.re - rounded).abs(),
            grid,
            boundary_variation: boundary,
            refinement_delta: None,
        }
    }
}

/// Default block count for [`midpoint_integral`]: one per sample of the
/// first axis.
fn default_chunks(domain: &GridDomain) -> usize {
    domain.axes[0].n
}

const BOUNDARY_SAMPLES: usize = 33;

fn check_arity(field: &dyn MatrixField, domain: &GridDomain) -> Result<(), ChernError> {
    if field.arity() != domain.dim() {
        return Err(ChernError::Arity {
            field: field.arity(),
            domain: domain.dim(),
        });
    }
    Ok(())
}

fn projection_defect(p: &M2) -> f64 {
    max_abs(&(p * p - p)) + max_abs(&(p.adjoint() - p))
}

/// Largest variation of `field` over each checked end face.
pub fn boundary_variation(
    field: &dyn MatrixField,
    domain: &GridDomain,
    tol: f64,
) -> Result<f64, ChernError> {
    let mut worst: f64 = 0.0;
    for (k, a) in domain.axes.iter().enumerate() {
        for (side, check, value) in [
            ("lower", a.checks_lo(), a.lo),
            ("upper", a.checks_hi(), a.hi),
        ] {
            if !check {
                continue;
            }
            let pts = domain.face(k, value, BOUNDARY_SAMPLES);
            let first = field.eval(&pts[0]);
            let variation = pts
                .iter()
                .map(|p| max_abs(&(field.eval(p) - first)))
                .fold(0.0, f64::max);
            if variation >= tol {
                return Err(ChernError::BoundaryNotConstant {
                    axis: k,
                    side,
                    variation,
                    tol,
                });
            }
            worst = worst.max(variation);
        }
    }
    Ok(worst)
}

/// Largest `|g - I|` over each checked end face.
pub fn boundary_identity_deviation(
    field: &dyn MatrixField,
    domain: &GridDomain,
    tol: f64,
) -> Result<f64, ChernError> {
    let mut worst: f64 = 0.0;
    for (k, a) in domain.axes.iter().enumerate() {
        for (side, check, value) in [
            ("lower", a.checks_lo(), a.lo),
            ("upper", a.checks_hi(), a.hi),
        ] {
            if !check {
                continue;
            }
            let deviation = domain
                .face(k, value, BOUNDARY_SAMPLES)
                .iter()
                .map(|p| max_abs(&(field.eval(p) - ident())))
                .fold(0.0, f64::max);
            if deviation >= tol {
                return Err(ChernError::BoundaryNotIdentity {
                    axis: k,
                    side,
                    deviation,
                });
            }
            worst = worst.max(deviation);
        }
    }
    Ok(worst)
}

/// `(1 / 2 pi i) ∫ Tr(P [∂1 P, ∂2 P])` over the domain, with no boundary
/// checks.
pub fn chern_density_integral(
    field: &dyn MatrixField,
    domain: &GridDomain,
    chunks: usize,
) -> (Complex64, f64) {
    let (v, defect) = midpoint_integral(domain, chunks, |x| {
        let p = field.eval(x);
        let d1 = field.partial(x, 0);
        let d2 = field.partial(x, 1);
        ((p * (d1 * d2 - d2 * d1)).trace(), projection_defect(&p))
    });
    (v / (2.0 * PI * I), defect)
}

/// Boundary tolerance for [`chern_2d`].
pub const CHERN_BOUNDARY_TOL: f64 = 1e-3;
/// Identity tolerance on the faces for [`winding_3d`].
pub const WINDING_BOUNDARY_TOL: f64 = 1e-2;

/// First Chern number of a projection field on a 2D domain.
pub fn chern_2d(
    field: &dyn MatrixField,
    domain: &GridDomain,
    name: &str,
) -> Result<TopoIntegral, ChernError> {
    check_arity(field, domain)?;
    let boundary = boundary_variation(field, domain, CHERN_BOUNDARY_TOL)?;
    let (v, defect) = chern_density_integral(field, domain, default_chunks(domain));
    if defect > 1e-8 {
        return Err(ChernError::NotProjection { defect });
    }
    Ok(TopoIntegral::new(name, v, domain.samples(), boundary))
}

/// `-(1 / 8 pi^2) ∫ Tr(A1 [A2, A3])`, `A_i = g^{-1} ∂_i g`: the degree of a
/// field that is the identity on every end face.
pub fn winding_3d(
    field: &dyn MatrixField,
    domain: &GridDomain,
    name: &str,
) -> Result<TopoIntegral, ChernError> {
    check_arity(field, domain)?;
    let boundary = boundary_identity_deviation(field, domain, WINDING_BOUNDARY_TOL)?;
    let (v, sigma_deficit) = midpoint_integral(domain, default_chunks(domain), |x| {
        let g = field.eval(x);
        let Some(gi) = inverse(&g) else {
            return (c(0.0), f64::INFINITY);
        };
        let a1 = gi * field.partial(x, 0);
        let a2 = gi * field.partial(x, 1);
        let a3 = gi * field.partial(x, 2);
        // report 1 / sigma_min so the max over samples flags the worst point
        (
            (a1 * (a2 * a3 - a3 * a2)).trace(),
            1.0 / min_singular_value(&g).max(1e-300),
        )
    });
    if sigma_deficit > 1e6 {
        return Err(ChernError::NotInvertible {
            point: vec![],
            sigma: 1.0 / sigma_deficit,
        });
    }
    Ok(TopoIntegral::new(
        name,
        v * c(-1.0 / (8.0 * PI * PI)),
        domain.samples(),
        boundary,
    ))
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = (a + b) / 2.0;
        let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
        let (flm, frm) = (f(lm), f(rm));
        let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f((a + b) / 2.0), f(b));
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Residual above which a rounded integral is not accepted.
pub const ROUNDING_TOL: f64 = 0.05;

/// `W_f = ∓(1 / 2 pi i) ∫_{R±} Tr(f'(z) f^{-1}(z)) dz` with the substitution
/// `z = ±u / (1 - u)`, `u ∈ [0, 1]`.
pub fn winding_1d(
    field: &dyn MatrixField,
    side: Side,
    tol: f64,
    name: &str,
) -> Result<TopoIntegral, ChernError> {
    if field.arity() != 1 {
        return Err(ChernError::Arity {
            field: field.arity(),
            domain: 1,
        });
    }
    let s = side.sign();
    let mut worst: Option<(f64, f64)> = None;
    for k in 0..=64 {
        let u = k as f64 / 65.0;
        let z = s * u / (1.0 - u);
        let sigma = min_singular_value(&field.eval(&[z]));
        if sigma <= 1e-6 {
            worst = Some((z, sigma));
        }
    }
    if let Some((z, sigma)) = worst {
        return Err(ChernError::NotInvertible {
            point: vec![z],
            sigma,
        });
    }
    let integrand = |u: f64| -> Complex64 {
        if u >= 1.0 {
            return c(0.0);
        }
        let z = s * u / (1.0 - u);
        let dz = 1.0 / ((1.0 - u) * (1.0 - u));
        let f = field.eval(&[z]);
        let df = field.partial(&[z], 0);
        match inverse(&f) {
            Some(fi) => (df * fi).trace() * dz,
            None => c(f64::NAN),
        }
    };
    // |dz/du| in the integrand: both half-lines come out in increasing z
    let integral = adaptive_simpson(&integrand, 0.0, 1.0, tol);
    let w = integral * (-s) / (2.0 * PI * I);
    let out = TopoIntegral::new(name, w, vec![], 0.0);
    if out.residual >= ROUNDING_TOL {
        return Err(ChernError::Unconverged {
            raw: out.raw_integral,
            residual: out.residual,
            tol: ROUNDING_TOL,
        });
    }
    Ok(out)
}

/// Named witnesses, each on its natural coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Phat,
    Ptilde,
    Uplus,
    Uminus,
    UGamma3,
    Q,
    PGamma3,
    ExpPtildePlus,
    ExpPtildeMinus,
}

impl Witness {
    pub const ALL: [Witness; 9] = [
        Witness::Phat,
        Witness::Ptilde,
        Witness::Uplus,
        Witness::Uminus,
        Witness::UGamma3,
        Witness::Q,
        Witness::PGamma3,
        Witness::ExpPtildePlus,
        Witness::ExpPtildeMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Witness::Phat => "phat",
            Witness::Ptilde => "ptilde",
            Witness::Uplus => "uplus",
            Witness::Uminus => "uminus",
            Witness::UGamma3 => "u_gamma3",
            Witness::Q => "q",
            Witness::PGamma3 => "p_gamma3",
            Witness::ExpPtildePlus => "exp_ptilde_plus",
            Witness::ExpPtildeMinus => "exp_ptilde_minus",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Witness::ALL.into_iter().find(|w| w.name() == name)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn build_witness(w: Witness) -> Box<dyn MatrixField> {
    match w {
        Witness::Phat => Box::new(Phat),
        Witness::Ptilde => Box::new(Ptilde),
        Witness::Uplus => Box::new(HalfLinePhase {
            side: Side::Plus,
            power: 1,
        }),
        Witness::Uminus => Box::new(HalfLinePhase {
            side: Side::Minus,
            power: 1,
        }),
        Witness::UGamma3 => Box::new(UGamma3),
        Witness::Q => Box::new(ConstantField {
            value: q_matrix(),
            arity: 3,
            kind: FieldKind::Projection,
        }),
        Witness::PGamma3 => Box::new(PGamma3),
        Witness::ExpPtildePlus => Box::new(ExpPtilde { side: Side::Plus }),
        Witness::ExpPtildeMinus => Box::new(ExpPtilde { side: Side::Minus }),
    }
}

/// Largest residual of the defining identities over random samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub samples: usize,
    /// `|p̂^2 - p̂| + |p̂* - p̂| + |tr p̂ - 1|`.
    pub phat_projection: f64,
    /// Agreement of the Bloch-vector form of `p̂` with the displayed matrix.
    pub phat_literal: f64,
    /// `|u u* - I| + |det u - 1|`.
    pub u_gamma3_unitary: f64,
    /// Rank-one projection defect of `p = u q u*`, and agreement of the two
    /// ways of computing it.
    pub p_gamma3_projection: f64,
    /// `|e^{2 pi i p̃}(x, y, 0) - I|`.
    pub exp_ptilde_at_zero: f64,
    /// Analytic against finite-difference partials, all witnesses.
    pub derivative_mismatch: f64,
    pub winding_uplus: TopoIntegral,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.phat_projection < 1e-10
            && self.phat_literal < 1e-10
            && self.u_gamma3_unitary < 1e-10
            && self.p_gamma3_projection < 1e-10
            && self.exp_ptilde_at_zero < 1e-10
            && self.derivative_mismatch < 1e-6
            && self.winding_uplus.rounded == 1
            && self.winding_uplus.residual < 1e-6
    }
}

fn derivative_mismatch(field: &dyn MatrixField, x: &[f64]) -> f64 {
    (0..field.arity())
        .map(|k| max_abs(&(field.partial(x, k) - fd_partial(field, x, k))))
        .fold(0.0, f64::max)
}

pub fn witness_identities(n_samples: usize, seed: u64) -> WitnessReport {
    let rows: Vec<[f64; 6]> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed, i);
            let (x, y): (f64, f64) = (rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
            let z: f64 = rng.random_range(-10.0..10.0);
            let th: [f64; 3] = [
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(0.0..2.0 * PI),
            ];
            let p = Phat.eval(&[x, y]);
            let proj = projection_defect(&p) + (p.trace() - 1.0).norm();
            let literal = max_abs(&(p - Phat::literal(x, y)));
            let u = UGamma3.eval(&th);
            let unitary = max_abs(&(u * u.adjoint() - ident())) + (det(&u) - 1.0).norm();
            let pg = PGamma3.eval(&th);
            let pg_def = projection_defect(&pg)
                + (pg.trace() - 1.0).norm()
                + max_abs(&(pg - PGamma3::conjugated(&th)));
            let at_zero = max_abs(&(ExpPtilde { side: Side::Plus }.eval(&[x, y, 0.0]) - ident()));
            // keep away from r = 0 where the finite-difference step straddles the origin
            let (dx, dy) = if x.hypot(y) < 0.05 {
                (x + 0.1, y)
            } else {
                (x, y)
            };
            let mismatch = [
                derivative_mismatch(&Phat, &[dx, dy]),
                derivative_mismatch(
                    &NormalizedExpPtilde { side: Side::Plus },
                    &[dx, dy, z.abs()],
                ),
                derivative_mismatch(&BottTimesPhase { side: Side::Minus }, &[dx, dy, -z.abs()]),
                derivative_mismatch(&UGamma3, &th),
                derivative_mismatch(&PGamma3, &th),
                derivative_mismatch(
                    &HalfLinePhase {
                        side: Side::Plus,
                        power: 2,
                    },
                    &[z.abs()],
                ),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            [proj, literal, unitary, pg_def, at_zero, mismatch]
        })
        .collect();
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    let winding_uplus = winding_1d(&*build_witness(Witness::Uplus), Side::Plus, 1e-8, "uplus")
        .expect("u+ is a smooth phase");
    WitnessReport {
        samples: n_samples,
        phat_projection: col(0),
        phat_literal: col(1),
        u_gamma3_unitary: col(2),
        p_gamma3_projection: col(3),
        exp_ptilde_at_zero: col(4),
        derivative_mismatch: col(5),
        winding_uplus,
    }
}

/// Grid and truncation settings for the index computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantConfig {
    pub grid2d: usize,
    pub grid3d: usize,
    /// Scale `L` of the half-line compactification.
    pub truncation: f64,
    pub residual_tol: f64,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        InvariantConfig {
            grid2d: 512,
            grid3d: 128,
            truncation: 8.0,
            residual_tol: ROUNDING_TOL,
        }
    }
}

/// Unit disk in polar coordinates.
pub fn disk_domain(n: usize) -> Result<GridDomain, ChernError> {
    GridDomain::new(vec![
        Axis::new(0.0, 1.0, n, AxisTag::Radial),
        Axis::new(0.0, 2.0 * PI, n, AxisTag::Periodic),
    ])
}

/// Unit disk times a compactified half-line.
pub fn half_space_domain(n: usize, side: Side) -> Result<GridDomain, ChernError> {
    let (lo, hi) = match side {
        Side::Plus => (0.0, 1.0),
        Side::Minus => (-1.0, 0.0),
    };
    GridDomain::new(vec![
        Axis::new(0.0, 1.0, n, AxisTag::Radial),
        Axis::new(0.0, 2.0 * PI, n, AxisTag::Periodic),
        Axis::new(lo, hi, n, AxisTag::DecayToConstant),
    ])
}

fn with_refinement(
    compute: impl Fn(&GridDomain) -> Result<TopoIntegral, ChernError>,
    domain: &GridDomain,
) -> Result<TopoIntegral, ChernError> {
    let mut full = compute(domain)?;
    let half = compute(&domain.rescaled(1, 2)?)?;
    full.refinement_delta = Some((full.raw_integral - half.raw_integral).abs());
    Ok(full)
}

/// Chern number of `p̂` on the unit disk, the orientation reference.
pub fn phat_chern(n: usize) -> Result<TopoIntegral, ChernError> {
    let field = PolarChart { inner: Phat };
    with_refinement(|d| chern_2d(&field, d, "phat"), &disk_domain(n)?)
}

fn half_space_winding<F: MatrixField + Copy>(
    inner: F,
    side: Side,
    cfg: &InvariantConfig,
    name: &str,
) -> Result<TopoIntegral, ChernError> {
    let field = HalfLineChart {
        inner: PolarChart { inner },
        axis: 2,
        scale: cfg.truncation,
    };
    with_refinement(
        |d| winding_3d(&field, d, name),
        &half_space_domain(cfg.grid3d, side)?,
    )
}

/// The index data of the type-2 foliation algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F2Invariant {
    /// Degree of the normalized `e^{2 pi i p̃}` on each half-space.
    pub lift_plus: TopoIntegral,
    pub lift_minus: TopoIntegral,
    /// Degree of the reference generator `[b] ⊠ [u±]`.
    pub reference_plus: TopoIntegral,
    pub reference_minus: TopoIntegral,
    /// Degree of the lift of the unit, the constant identity.
    pub unit_lift: TopoIntegral,
    /// `δ0([p̂] - [ε1])` in the basis `[b]⊠[u+]`, `[b]⊠[u-]`.
    pub coefficients: (i64, i64),
    pub gamma1: ZMap,
    pub gamma2: ZMap,
    /// The solver accepts `gamma1` and `gamma2` as connecting maps.
    pub hexagons_consistent: bool,
    pub max_residual: f64,
    pub converged: bool,
}

/// The index data of the type-3 foliation algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F3Invariant {
    /// Chern number of `p = u q u*` on the disk transverse to the `φ` circle.
    pub p_gamma3: TopoIntegral,
    /// Chern number of `p̂`, fixing the sign convention.
    pub reference: TopoIntegral,
    pub unit_lift: TopoIntegral,
    /// The square `(θ1, θ2) ∈ [-pi/2, pi/2]^2` at fixed `φ`, integrated as is.
    pub square_audit: SquareAudit,
    pub gamma3: (i64, i64),
    pub hexagon_consistent: bool,
    pub max_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareAudit {
    pub phi0: f64,
    pub raw_integral: f64,
    /// Variation of `p` along the `θ2 = ±pi/2` edges.
    pub theta2_edge_variation: f64,
    /// Variation of `p` along the `θ1 = ±pi/2` edges.
    pub theta1_edge_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum IndexInvariant {
    F2(F2Invariant),
    F3(F3Invariant),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoliationType {
    F2,
    F3,
}

fn calibrated(raw: &TopoIntegral, reference: &TopoIntegral) -> i64 {
    raw.rounded * reference.raw_integral.signum() as i64
}

fn unit_lift(n: usize) -> Result<TopoIntegral, ChernError> {
    let domain = GridDomain::new(vec![Axis::new(0.0, 1.0, n, AxisTag::BoundaryConstant); 3])?;
    winding_3d(&ConstantField::identity(3), &domain, "unit_lift")
}

pub fn index_invariant(
    kind: FoliationType,
    cfg: &InvariantConfig,
) -> Result<IndexInvariant, ChernError> {
    match kind {
        FoliationType::F2 => f2_invariant(cfg).map(IndexInvariant::F2),
        FoliationType::F3 => f3_invariant(cfg).map(IndexInvariant::F3),
    }
}

fn f2_invariant(cfg: &InvariantConfig) -> Result<F2Invariant, ChernError> {
    let lift_plus = half_space_winding(
        NormalizedExpPtilde { side: Side::Plus },
        Side::Plus,
        cfg,
        "exp_ptilde_plus",
    )?;
    let lift_minus = half_space_winding(
        NormalizedExpPtilde { side: Side::Minus },
        Side::Minus,
        cfg,
        "exp_ptilde_minus",
    )?;
    let reference_plus = half_space_winding(
        BottTimesPhase { side: Side::Plus },
        Side::Plus,
        cfg,
        "bott_uplus",
    )?;
    let reference_minus = half_space_winding(
        BottTimesPhase { side: Side::Minus },
        Side::Minus,
        cfg,
        "bott_uminus",
    )?;
    let unit = unit_lift(MIN_SAMPLES)?;
    let cp = calibrated(&lift_plus, &reference_plus);
    let cm = calibrated(&lift_minus, &reference_minus);
    let gamma1 = ZMap::from_rows(&[vec![unit.rounded, cp], vec![unit.rounded, cm]]);
    let gamma2 = ZMap::column_vector(&[cp, cm]);

    let mut g1 = SixTermProblem::preset("gamma1", 2).expect("preset exists");
    g1.maps[2] = Some(gamma1.clone());
    let mut g2 = SixTermProblem::preset("gamma2", 1).expect("preset exists");
    g2.maps[5] = Some(gamma2.clone());
    let consistent = abk::solve_six_term(&g1).is_ok_and(|s| !s.is_empty())
        && abk::solve_six_term(&g2).is_ok_and(|s| !s.is_empty());

    let max_residual = [
        &lift_plus,
        &lift_minus,
        &reference_plus,
        &reference_minus,
        &unit,
    ]
    .iter()
    .map(|t| t.residual)
    .fold(0.0, f64::max);
    Ok(F2Invariant {
        lift_plus,
        lift_minus,
        reference_plus,
        reference_minus,
        unit_lift: unit,
        coefficients: (cp, cm),
        gamma1,
        gamma2,
        hexagons_consistent: consistent,
        max_residual,
        converged: max_residual < cfg.residual_tol,
    })
}

/// The `(θ1, θ2)` square at fixed `φ0`, integrated without boundary checks.
pub fn gamma3_square_audit(n: usize, phi0: f64) -> Result<SquareAudit, ChernError> {
    let half = PI / 2.0;
    let field = Slice {
        inner: PGamma3,
        fixed: vec![0.0, 0.0, phi0],
        map: vec![0, 1],
    };
    let domain = GridDomain::new(vec![
        Axis::new(-half, half, n, AxisTag::BoundaryConstant),
        Axis::new(-half, half, n, AxisTag::BoundaryConstant),
    ])?;
    let (v, _) = chern_density_integral(&field, &domain, default_chunks(&domain));
    let edge = |axis: usize| {
        [-half, half]
            .iter()
            .map(|&val| {
                let pts = domain.face(axis, val, BOUNDARY_SAMPLES);
                let first = field.eval(&pts[0]);
                pts.iter()
                    .map(|p| max_abs(&(field.eval(p) - first)))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    Ok(SquareAudit {
        phi0,
        raw_integral: v.re,
        theta2_edge_variation: edge(1),
        theta1_edge_variation: edge(0),
    })
}

/// `p = u q u*` on `θ1 = 0`, coordinates `(φ, θ2) ∈ [0, 2 pi] x [0, pi/2]`.
pub fn p_gamma3_disk(n: usize) -> Result<TopoIntegral, ChernError> {
    let field = Slice {
        inner: PGamma3,
        fixed: vec![0.0, 0.0, 0.0],
        map: vec![2, 1],
    };
    let domain = GridDomain::new(vec![
        Axis::new(0.0, 2.0 * PI, n, AxisTag::Periodic),
        Axis::new(0.0, PI / 2.0, n, AxisTag::BoundaryConstant),
    ])?;
    with_refinement(|d| chern_2d(&field, d, "p_gamma3"), &domain)
}

fn f3_invariant(cfg: &InvariantConfig) -> Result<F3Invariant, ChernError> {
    let p_gamma3 = p_gamma3_disk(cfg.grid2d)?;
    let reference = phat_chern(cfg.grid2d)?;
    let unit = unit_lift(MIN_SAMPLES)?;
    let square_audit = gamma3_square_audit(cfg.grid2d, 0.0)?;
    let d1 = calibrated(&p_gamma3, &reference);
    let gamma3 = (unit.rounded, d1);

    let mut hex = SixTermProblem::preset("allZ", 3).expect("preset exists");
    hex.maps[2] = Some(ZMap::new(1, 1, vec![gamma3.0]));
    hex.maps[5] = Some(ZMap::new(1, 1, vec![gamma3.1]));
    let consistent = abk::solve_six_term(&hex).is_ok_and(|s| s.len() == 1);

    let max_residual = [&p_gamma3, &reference, &unit]
        .iter()
        .map(|t| t.residual)
        .fold(0.0, f64::max);
    Ok(F3Invariant {
        p_gamma3,
        reference,
        unit_lift: unit,
        square_audit,
        gamma3,
        hexagon_consistent: consistent,
        max_residual,
        converged: max_residual < cfg.residual_tol,
    })
}
