//! The two R^2-actions on `V = R x (R^4 \ {0})`, their invariant strata and
//! complete invariant maps for the leaf spaces.
//!
//! Points are `(x, y, z, t, s)`; complex coordinates `y + iz` and `t + is` are
//! kept as real pairs and multiplication by `e^{-ia}` is written out as a
//! rotation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coadjoint::{closed_form_orbit, indexed_rng, Covector};
use crate::lie::Md5Family;
use crate::linalg::{fd_jacobian, numeric_rank, subspace_distance};

/// Singular-value cutoff for differential ranks.
pub const DIFF_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoliationError {
    #[error("point {0:?} is not in V: (y, z, t, s) must not all vanish")]
    OutsideV([f64; 5]),
    #[error("stratum {stratum} is not invariant under {action}")]
    Incompatible {
        action: ActionSpec,
        stratum: Stratum,
    },
    #[error("stratum {0} has no leaf invariant map (it is not a union of leaves of one action)")]
    NoInvariants(Stratum),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoliatedPoint(pub [f64; 5]);

impl FoliatedPoint {
    pub fn new(x: f64, y: f64, z: f64, t: f64, s: f64) -> Result<Self, FoliationError> {
        let p = [x, y, z, t, s];
        if y == 0.0 && z == 0.0 && t == 0.0 && s == 0.0 {
            return Err(FoliationError::OutsideV(p));
        }
        Ok(FoliatedPoint(p))
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn t(&self) -> f64 {
        self.0[3]
    }

    pub fn s(&self) -> f64 {
        self.0[4]
    }

    pub fn max_abs_diff(&self, other: &FoliatedPoint) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionSpec {
    Lambda12,
    Lambda14,
}

impl ActionSpec {
    pub const ALL: [ActionSpec; 2] = [ActionSpec::Lambda12, ActionSpec::Lambda14];

    /// Strata preserved by the action.
    pub fn strata(self) -> &'static [Stratum] {
        match self {
            ActionSpec::Lambda12 => &[Stratum::V1, Stratum::W1, Stratum::V2, Stratum::W2],
            ActionSpec::Lambda14 => &[Stratum::V3, Stratum::W3],
        }
    }

    /// The family whose two-dimensional coadjoint orbits are the orbits of
    /// this action, with `(x, y, z, t, s) = (alpha, beta, gamma, delta, sigma)`.
    pub fn orbit_family(self) -> Md5Family {
        use std::f64::consts::FRAC_PI_2;
        match self {
            ActionSpec::Lambda12 => Md5Family::F12 {
                lambda: 1.0,
                phi: FRAC_PI_2,
            },
            ActionSpec::Lambda14 => Md5Family::F14 {
                lambda: 0.0,
                mu: 1.0,
                phi: FRAC_PI_2,
            },
        }
    }
}

impl fmt::Display for ActionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionSpec::Lambda12 => "lambda12",
            ActionSpec::Lambda14 => "lambda14",
        })
    }
}

/// `(u + iv) e^{-ia}` as a real pair.
#[inline]
fn rotate(u: f64, v: f64, a: f64) -> (f64, f64) {
    let (sa, ca) = a.sin_cos();
    (u * ca + v * sa, v * ca - u * sa)
}

pub fn act(spec: ActionSpec, (r, a): (f64, f64), p: &FoliatedPoint) -> FoliatedPoint {
    let [x, y, z, t, s] = p.0;
    let (y1, z1) = rotate(y, z, a);
    match spec {
        ActionSpec::Lambda12 => {
            let ea = a.exp();
            FoliatedPoint([x + r, y1, z1, t * ea, s * ea])
        }
        ActionSpec::Lambda14 => {
            let (t1, s1) = rotate(t, s, a);
            FoliatedPoint([x + r, y1, z1, t1, s1])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stratum {
    V1,
    W1,
    V2,
    W2,
    V3,
    W3,
}

impl Stratum {
    pub const ALL: [Stratum; 6] = [
        Stratum::V1,
        Stratum::W1,
        Stratum::V2,
        Stratum::W2,
        Stratum::V3,
        Stratum::W3,
    ];

    pub fn contains(self, p: &FoliatedPoint) -> bool {
        let (t, s) = (p.t(), p.s());
        match self {
            Stratum::V1 => s != 0.0,
            Stratum::W1 => s == 0.0,
            Stratum::V2 => s == 0.0 && t != 0.0,
            Stratum::W2 | Stratum::W3 => s == 0.0 && t == 0.0,
            Stratum::V3 => t * t + s * s != 0.0,
        }
    }

    /// Coordinates that vary freely inside the stratum; the others are pinned
    /// to zero.
    pub fn free_coordinates(self) -> &'static [usize] {
        match self {
            Stratum::V1 | Stratum::V3 => &[0, 1, 2, 3, 4],
            Stratum::W1 => &[0, 1, 2, 3],
            Stratum::V2 => &[0, 1, 2, 3],
            Stratum::W2 | Stratum::W3 => &[0, 1, 2],
        }
    }

    /// Random point of the stratum. Coordinates are uniform in `[-3, 3]`;
    /// those that must not vanish are kept at least 0.2 away from zero.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> FoliatedPoint {
        let any = |rng: &mut R| rng.random_range(-3.0..3.0);
        let nonzero = |rng: &mut R| {
            let m: f64 = rng.random_range(0.2..3.0);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        };
        let x = any(rng);
        let (mut y, mut z) = (any(rng), any(rng));
        let p = match self {
            Stratum::V1 => [x, y, z, any(rng), nonzero(rng)],
            Stratum::W1 => {
                // (y, z, t) must not all vanish
                [x, y, z, nonzero(rng), 0.0]
            }
            Stratum::V2 => [x, y, z, nonzero(rng), 0.0],
            Stratum::W2 | Stratum::W3 => {
                if y.abs() < 0.2 && z.abs() < 0.2 {
                    y = nonzero(rng);
                    z = any(rng);
                }
                [x, y, z, 0.0, 0.0]
            }
            Stratum::V3 => {
                let t = any(rng);
                let s = if t.abs() < 0.2 {
                    nonzero(rng)
                } else {
                    any(rng)
                };
                [x, y, z, t, s]
            }
        };
        FoliatedPoint(p)
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn stratum_of(p: &FoliatedPoint) -> Result<BTreeSet<Stratum>, FoliationError> {
    if p.0[1..].iter().all(|&c| c == 0.0) {
        return Err(FoliationError::OutsideV(p.0));
    }
    Ok(Stratum::ALL.into_iter().filter(|s| s.contains(p)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: FoliatedPoint,
    pub group_element: (f64, f64),
    pub image: FoliatedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub action: ActionSpec,
    pub stratum: Stratum,
    pub samples: usize,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

const MAX_LISTED: usize = 16;

fn sample_group_element<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (rng.random_range(-5.0..5.0), rng.random_range(-3.0..3.0))
}

pub fn preservation_check(
    spec: ActionSpec,
    stratum: Stratum,
    n_samples: usize,
    seed: u64,
) -> Result<PreservationReport, FoliationError> {
    if !spec.strata().contains(&stratum) {
        return Err(FoliationError::Incompatible {
            action: spec,
            stratum,
        });
    }
    let bad: Vec<Violation> = (0..n_samples as u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = indexed_rng(seed, i);
            let p = stratum.sample(&mut rng);
            let g = sample_group_element(&mut rng);
            let image = act(spec, g, &p);
            (!stratum.contains(&image)).then_some(Violation {
                point: p,
                group_element: g,
                image,
            })
        })
        .collect();
    Ok(PreservationReport {
        action: spec,
        stratum,
        samples: n_samples,
        violation_count: bad.len(),
        violations: bad.into_iter().take(MAX_LISTED).collect(),
    })
}

/// A complete invariant map of one stratum into its model leaf space.
///
/// `eval` returns the continuous coordinates on the model space followed by
/// an optional discrete label (the component of a disjoint union).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafInvariants {
    pub stratum: Stratum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantValue {
    pub coords: [f64; 3],
    pub dim: usize,
    pub component: i8,
}

impl InvariantValue {
    pub fn max_abs_diff(&self, other: &InvariantValue) -> f64 {
        if self.component != other.component || self.dim != other.dim {
            return f64::INFINITY;
        }
        (0..self.dim)
            .map(|i| (self.coords[i] - other.coords[i]).abs())
            .fold(0.0, f64::max)
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else {
        -1
    }
}

/// `(y + iz) e^{i ln|w|}` as a real pair.
fn twist(y: f64, z: f64, w: f64) -> (f64, f64) {
    let (sn, cs) = w.abs().ln().sin_cos();
    (y * cs - z * sn, y * sn + z * cs)
}

impl LeafInvariants {
    /// Dimension of the model leaf space.
    pub fn model_dim(&self) -> usize {
        match self.stratum {
            Stratum::V1 | Stratum::V3 => 3,
            Stratum::V2 => 2,
            _ => 1,
        }
    }

    pub fn model(&self) -> &'static str {
        match self.stratum {
            Stratum::V1 => "R^3 ⊔ R^3",
            Stratum::V2 => "R^2 ⊔ R^2",
            Stratum::V3 => "C x R+",
            _ => "R+",
        }
    }

    /// The subquotient algebra whose leaf space the stratum models.
    pub fn algebra(&self) -> &'static str {
        match self.stratum {
            Stratum::V1 => "J1",
            Stratum::V2 => "J2",
            Stratum::W2 => "B2",
            Stratum::V3 => "J3",
            _ => "B3",
        }
    }

    pub fn eval(&self, p: &FoliatedPoint) -> InvariantValue {
        let [_, y, z, t, s] = p.0;
        match self.stratum {
            Stratum::V1 => {
                let (u, v) = twist(y, z, s);
                InvariantValue {
                    coords: [u, v, t / s],
                    dim: 3,
                    component: sign(s),
                }
            }
            Stratum::V2 => {
                let (u, v) = twist(y, z, t);
                InvariantValue {
                    coords: [u, v, 0.0],
                    dim: 2,
                    component: sign(t),
                }
            }
            Stratum::V3 => {
                // (y + iz) / (t + is)
                let n = t * t + s * s;
                InvariantValue {
                    coords: [(y * t + z * s) / n, (z * t - y * s) / n, n.sqrt()],
                    dim: 3,
                    component: 0,
                }
            }
            _ => InvariantValue {
                coords: [y.hypot(z), 0.0, 0.0],
                dim: 1,
                component: 0,
            },
        }
    }

    /// Rank of the differential along the stratum's free coordinates.
    pub fn differential_rank(&self, p: &FoliatedPoint) -> usize {
        let h = 1e-5 * (1.0 + p.0.iter().map(|c| c * c).sum::<f64>().sqrt());
        let dim = self.model_dim();
        let jac = fd_jacobian(
            |q| {
                let v = self.eval(&FoliatedPoint([q[0], q[1], q[2], q[3], q[4]]));
                v.coords[..dim].to_vec()
            },
            &p.0,
            self.stratum.free_coordinates(),
            h,
        );
        numeric_rank(&jac, DIFF_RANK_TOL)
    }
}

pub fn leaf_invariants(stratum: Stratum) -> Result<LeafInvariants, FoliationError> {
    match stratum {
        Stratum::W1 => Err(FoliationError::NoInvariants(stratum)),
        _ => Ok(LeafInvariants { stratum }),
    }
}

fn action_for(stratum: Stratum) -> ActionSpec {
    match stratum {
        Stratum::V3 | Stratum::W3 => ActionSpec::Lambda14,
        _ => ActionSpec::Lambda12,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub stratum: Stratum,
    pub algebra: String,
    pub model: String,
    pub model_dim: usize,
    pub samples: usize,
    /// Largest change of the invariant between a point and a translate.
    pub constancy_residual: f64,
    pub rank_histogram: BTreeMap<usize, usize>,
    /// Orbits never change the discrete component.
    pub component_preserved: bool,
}

impl InvariantCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.constancy_residual < tol
            && self.component_preserved
            && self.rank_histogram.keys().all(|&r| r == self.model_dim)
    }
}

/// Samples `n_samples` points of the stratum and a group element for each,
/// and measures orbit constancy and differential rank of the invariant map.
pub fn invariant_check(
    stratum: Stratum,
    n_samples: usize,
    seed: u64,
) -> Result<InvariantCheck, FoliationError> {
    let inv = leaf_invariants(stratum)?;
    let spec = action_for(stratum);
    let per_sample: Vec<(f64, usize, bool)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed, i);
            let p = stratum.sample(&mut rng);
            let g = sample_group_element(&mut rng);
            let before = inv.eval(&p);
            let after = inv.eval(&act(spec, g, &p));
            (
                before.max_abs_diff(&after),
                inv.differential_rank(&p),
                before.component == after.component,
            )
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for (_, rank, _) in &per_sample {
        *histogram.entry(*rank).or_insert(0) += 1;
    }
    Ok(InvariantCheck {
        stratum,
        algebra: inv.algebra().to_string(),
        model: inv.model().to_string(),
        model_dim: inv.model_dim(),
        samples: n_samples,
        constancy_residual: per_sample.iter().map(|r| r.0).fold(0.0, f64::max),
        rank_histogram: histogram,
        component_preserved: per_sample.iter().all(|r| r.2),
    })
}

/// The strata of `spec` that carry a leaf-space model, in display order.
pub fn modelled_strata(spec: ActionSpec) -> &'static [Stratum] {
    match spec {
        ActionSpec::Lambda12 => &[Stratum::V1, Stratum::V2, Stratum::W2],
        ActionSpec::Lambda14 => &[Stratum::V3, Stratum::W3],
    }
}

pub fn leafspace_report(spec: ActionSpec, n_samples: usize, seed: u64) -> Vec<InvariantCheck> {
    modelled_strata(spec)
        .iter()
        .map(|&s| invariant_check(s, n_samples, seed).expect("modelled strata have invariants"))
        .collect()
}

/// Infinitesimal generators `d/dr` and `d/da` of the action at `(0, 0)`.
pub fn generators(spec: ActionSpec, p: &FoliatedPoint) -> ([f64; 5], [f64; 5]) {
    let [_, y, z, t, s] = p.0;
    let va = match spec {
        ActionSpec::Lambda12 => [0.0, z, -y, t, s],
        ActionSpec::Lambda14 => [0.0, z, -y, s, -t],
    };
    ([1.0, 0.0, 0.0, 0.0, 0.0], va)
}

/// `[V_r, V_a]` at `p` from central differences of the generator fields.
pub fn generator_bracket(spec: ActionSpec, p: &FoliatedPoint) -> [f64; 5] {
    let h = 1e-5 * (1.0 + p.0.iter().map(|c| c * c).sum::<f64>().sqrt());
    let directional = |field: &dyn Fn(&FoliatedPoint) -> [f64; 5], dir: [f64; 5]| {
        let shift = |sgn: f64| FoliatedPoint(std::array::from_fn(|i| p.0[i] + sgn * h * dir[i]));
        let (fp, fm) = (field(&shift(1.0)), field(&shift(-1.0)));
        std::array::from_fn::<f64, 5, _>(|i| (fp[i] - fm[i]) / (2.0 * h))
    };
    let (vr, va) = generators(spec, p);
    let vr_field = |q: &FoliatedPoint| generators(spec, q).0;
    let va_field = |q: &FoliatedPoint| generators(spec, q).1;
    let a = directional(&va_field, vr);
    let b = directional(&vr_field, va);
    std::array::from_fn(|i| a[i] - b[i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub action: ActionSpec,
    pub samples: usize,
    pub bracket_residual: f64,
    pub rank_histogram: BTreeMap<usize, usize>,
    /// Largest principal-angle residual between the generator span and the
    /// tangent plane of the matching coadjoint orbit.
    pub orbit_tangent_residual: f64,
}

impl IntegrabilityReport {
    pub fn passed(&self) -> bool {
        self.bracket_residual < 1e-8
            && self.rank_histogram.keys().all(|&r| r == 2)
            && self.orbit_tangent_residual < 1e-6
    }
}

fn sample_in_v<R: Rng + ?Sized>(rng: &mut R) -> FoliatedPoint {
    loop {
        let p: [f64; 5] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        if p[1..].iter().map(|c| c * c).sum::<f64>() > 0.04 {
            return FoliatedPoint(p);
        }
    }
}

pub fn integrability_check(spec: ActionSpec, n_samples: usize, seed: u64) -> IntegrabilityReport {
    let family = spec.orbit_family();
    let rows: Vec<(f64, usize, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_in_v(&mut indexed_rng(seed, i));
            let bracket = generator_bracket(spec, &p);
            let (vr, va) = generators(spec, &p);
            let span = DMatrix::from_fn(5, 2, |r, c| if c == 0 { vr[r] } else { va[r] });
            let rank = numeric_rank(&span, DIFF_RANK_TOL);

            let [x, y, z, t, s] = p.0;
            let orbit = closed_form_orbit(family, Covector::new(x, y, z, t, s));
            let h = 1e-6;
            let da = (orbit.point(x, h).to_vector() - orbit.point(x, -h).to_vector()) / (2.0 * h);
            let tangent = DMatrix::from_fn(5, 2, |r, c| if c == 0 { vr[r] } else { da[r] });
            (
                bracket.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                rank,
                subspace_distance(&span, &tangent, DIFF_RANK_TOL),
            )
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for r in &rows {
        *histogram.entry(r.1).or_insert(0) += 1;
    }
    IntegrabilityReport {
        action: spec,
        samples: n_samples,
        bracket_residual: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        rank_histogram: histogram,
        orbit_tangent_residual: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibrationReport {
    pub samples: usize,
    /// Largest movement of the `S^3` image along closed-form orbits.
    pub constancy_residual: f64,
    pub rank_histogram: BTreeMap<usize, usize>,
}

impl FibrationReport {
    pub fn passed(&self) -> bool {
        self.constancy_residual < 1e-9 && self.rank_histogram.keys().all(|&r| r == 3)
    }
}

/// `(x, y, z, t, s) -> (y, z, t, s) / |(y, z, t, s)|`.
pub fn sphere_projection(p: &[f64]) -> Vec<f64> {
    let n = p[1..5].iter().map(|c| c * c).sum::<f64>().sqrt();
    p[1..5].iter().map(|c| c / n).collect()
}

/// The leaf-space fibration of the first foliation type, checked on the
/// family `5_4_5` whose orbits are `(x, e^a (beta, gamma, delta, sigma))`.
pub fn f1_fibration_check(n_samples: usize, seed: u64) -> FibrationReport {
    let rows: Vec<(f64, usize)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = sample_in_v(&mut indexed_rng(seed, i));
            let orbit = closed_form_orbit(Md5Family::F5, Covector(p.0));
            let base = sphere_projection(&p.0);
            let mut worst: f64 = 0.0;
            for k in 0..=12 {
                let a = -3.0 + 0.5 * k as f64;
                let q = orbit.point(p.x() + a, a);
                let img = sphere_projection(&q.0);
                for (u, v) in base.iter().zip(img.iter()) {
                    worst = worst.max((u - v).abs());
                }
            }
            let h = 1e-5 * (1.0 + p.0.iter().map(|c| c * c).sum::<f64>().sqrt());
            let jac = fd_jacobian(sphere_projection, &p.0, &[0, 1, 2, 3, 4], h);
            (worst, numeric_rank(&jac, DIFF_RANK_TOL))
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for r in &rows {
        *histogram.entry(r.1).or_insert(0) += 1;
    }
    FibrationReport {
        samples: n_samples,
        constancy_residual: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        rank_histogram: histogram,
    }
}

/// `(x, y, z, t, s) -> (y, z, t, sign s)`, taken literally.
pub fn literal_p1(p: &FoliatedPoint) -> [f64; 4] {
    [p.y(), p.z(), p.t(), sign(p.s()) as f64]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Audit {
    pub samples: usize,
    /// Largest change of the literal map along a `lambda12` orbit in `V1`.
    pub literal_variation: f64,
    pub literal_constant: bool,
    /// Whether the `sign s` slot alone stays constant.
    pub sign_constant: bool,
    pub invariant_variation: f64,
    pub invariant_constant: bool,
}

/// Compares the literal `p1` with the working invariant map of `V1` along
/// `lambda12` orbits.
pub fn p1_submersion_audit(n_samples: usize, seed: u64) -> P1Audit {
    let inv = LeafInvariants {
        stratum: Stratum::V1,
    };
    let rows: Vec<(f64, bool, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed, i);
            let p = Stratum::V1.sample(&mut rng);
            let g = sample_group_element(&mut rng);
            let q = act(ActionSpec::Lambda12, g, &p);
            let (l0, l1) = (literal_p1(&p), literal_p1(&q));
            let lit = (0..4).map(|k| (l0[k] - l1[k]).abs()).fold(0.0, f64::max);
            (
                lit,
                l0[3] == l1[3],
                inv.eval(&p).max_abs_diff(&inv.eval(&q)),
            )
        })
        .collect();
    let literal_variation = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let invariant_variation = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    P1Audit {
        samples: n_samples,
        literal_variation,
        literal_constant: literal_variation < 1e-9,
        sign_constant: rows.iter().all(|r| r.1),
        invariant_variation,
        invariant_constant: invariant_variation < 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, LN_2};

    fn pt(c: [f64; 5]) -> FoliatedPoint {
        FoliatedPoint(c)
    }

    #[test]
    fn action_examples() {
        let p = pt([0.0, 1.0, 0.0, 1.0, 1.0]);
        assert_eq!(
            act(ActionSpec::Lambda12, (1.0, 0.0), &p),
            pt([1.0, 1.0, 0.0, 1.0, 1.0])
        );
        let q = act(ActionSpec::Lambda12, (0.0, LN_2), &p);
        let expected = pt([0.0, LN_2.cos(), -LN_2.sin(), 2.0, 2.0]);
        assert!(q.max_abs_diff(&expected) < 1e-15);
        let q = act(
            ActionSpec::Lambda14,
            (0.0, FRAC_PI_2),
            &pt([0.0, 1.0, 0.0, 1.0, 0.0]),
        );
        assert!(q.max_abs_diff(&pt([0.0, 0.0, -1.0, 0.0, -1.0])) < 1e-15);
    }

    #[test]
    fn strata_examples() {
        use Stratum::*;
        let set = |v: &[Stratum]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(
            stratum_of(&pt([0.0, 1.0, 0.0, 0.0, 0.0])).unwrap(),
            set(&[W1, W2, W3])
        );
        assert_eq!(
            stratum_of(&pt([0.0, 0.0, 0.0, 0.0, 1.0])).unwrap(),
            set(&[V1, V3])
        );
        assert_eq!(
            stratum_of(&pt([0.0, 0.0, 0.0, 1.0, 0.0])).unwrap(),
            set(&[W1, V2, V3])
        );
        assert!(stratum_of(&pt([5.0, 0.0, 0.0, 0.0, 0.0])).is_err());
        assert!(FoliatedPoint::new(1.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn samplers_land_in_their_strata() {
        let mut rng = indexed_rng(4, 0);
        for s in Stratum::ALL {
            for _ in 0..200 {
                let p = s.sample(&mut rng);
                assert!(s.contains(&p), "{s} {p:?}");
                assert!(stratum_of(&p).is_ok());
            }
        }
    }

    #[test]
    fn preservation_examples() {
        for (spec, st) in [
            (ActionSpec::Lambda12, Stratum::V1),
            (ActionSpec::Lambda14, Stratum::V3),
            (ActionSpec::Lambda12, Stratum::W2),
        ] {
            let r = preservation_check(spec, st, 2000, 3).unwrap();
            assert_eq!(r.violation_count, 0);
        }
        assert!(preservation_check(ActionSpec::Lambda14, Stratum::V1, 10, 0).is_err());
    }

    #[test]
    fn invariant_examples() {
        let w2 = leaf_invariants(Stratum::W2).unwrap();
        let p = pt([0.0, 3.0, 4.0, 0.0, 0.0]);
        assert_eq!(w2.eval(&p).coords[0], 5.0);
        let v3 = leaf_invariants(Stratum::V3).unwrap();
        assert_eq!(v3.differential_rank(&pt([0.0, 1.0, 0.0, 1.0, 0.0])), 3);
        assert!(leaf_invariants(Stratum::W1).is_err());
        let c = invariant_check(Stratum::V1, 500, 8).unwrap();
        assert!(c.passed(1e-9), "{c:?}");
    }

    #[test]
    fn leafspace_models() {
        let r = leafspace_report(ActionSpec::Lambda12, 100, 1);
        let tags: Vec<_> = r
            .iter()
            .map(|c| (c.algebra.as_str(), c.model.as_str()))
            .collect();
        assert_eq!(
            tags,
            vec![("J1", "R^3 ⊔ R^3"), ("J2", "R^2 ⊔ R^2"), ("B2", "R+")]
        );
        assert!(r.iter().all(|c| c.passed(1e-9)));
        let r = leafspace_report(ActionSpec::Lambda14, 100, 1);
        assert_eq!(r[0].model, "C x R+");
        assert!(r.iter().all(|c| c.passed(1e-9)));
    }

    #[test]
    fn generator_example_and_integrability() {
        let p = pt([0.0, 1.0, 0.0, 1.0, 1.0]);
        let (vr, va) = generators(ActionSpec::Lambda12, &p);
        assert_eq!(vr, [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(va, [0.0, 0.0, -1.0, 1.0, 1.0]);
        // agrees with a difference quotient of the action itself
        let h = 1e-6;
        let plus = act(ActionSpec::Lambda14, (0.0, h), &p);
        let minus = act(ActionSpec::Lambda14, (0.0, -h), &p);
        let (_, va14) = generators(ActionSpec::Lambda14, &p);
        for i in 0..5 {
            assert!(((plus.0[i] - minus.0[i]) / (2.0 * h) - va14[i]).abs() < 1e-9);
        }
        for spec in ActionSpec::ALL {
            let r = integrability_check(spec, 300, 2);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn fibration_and_audit() {
        let r = f1_fibration_check(200, 5);
        assert!(r.passed(), "{r:?}");
        let a = p1_submersion_audit(200, 5);
        assert!(!a.literal_constant);
        assert!(a.sign_constant);
        assert!(a.invariant_constant);
        // the orbit of (0,1,0,1,1) at a = 1 moves (y, z, t)
        let p = pt([0.0, 1.0, 0.0, 1.0, 1.0]);
        let q = act(ActionSpec::Lambda12, (0.0, 1.0), &p);
        let (l0, l1) = (literal_p1(&p), literal_p1(&q));
        assert!((0..3).all(|k| l0[k] != l1[k]));
        assert_eq!(l0[3], l1[3]);
    }
}
