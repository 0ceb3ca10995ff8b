//! Coadjoint orbits of the MD5 groups.
//!
//! The orbit through a covector `F` has dimension equal to the rank of the
//! Kirillov form `B_F(X, Y) = <F, [X, Y]>`. For the MD5 families the orbit is
//! swept out by `exp(a X1)` acting on the derived-ideal coordinates together
//! with a free translation in the `X1*` coordinate; the flow is
//! `(beta, gamma, delta, sigma) -> exp(a M^T) (beta, gamma, delta, sigma)` with
//! `M` the listed `ad_{X1}` block.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4, Matrix5, Vector4, Vector5};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expm::{expm_blocks, expm_pade, Block};
use crate::lie::{ad_matrix, basis, restrict_to_ideal, LieAlgebra, Md5Family, DIM};
use crate::linalg::{numeric_rank, subspace_distance};

/// Relative singular-value cutoff for orbit dimensions.
pub const RANK_TOL: f64 = 1e-8;

/// `F = alpha X1* + beta X2* + gamma X3* + delta X4* + sigma X5*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector(pub [f64; DIM]);

impl Covector {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, sigma: f64) -> Self {
        Covector([alpha, beta, gamma, delta, sigma])
    }

    pub fn zero() -> Self {
        Covector([0.0; DIM])
    }

    pub fn alpha(&self) -> f64 {
        self.0[0]
    }

    pub fn beta(&self) -> f64 {
        self.0[1]
    }

    pub fn gamma(&self) -> f64 {
        self.0[2]
    }

    pub fn delta(&self) -> f64 {
        self.0[3]
    }

    pub fn sigma(&self) -> f64 {
        self.0[4]
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::from(self.0)
    }

    /// Coordinates on the derived ideal, `(beta, gamma, delta, sigma)`.
    pub fn ideal_part(&self) -> Vector4<f64> {
        Vector4::new(self.0[1], self.0[2], self.0[3], self.0[4])
    }

    pub fn max_abs_diff(&self, other: &Covector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Antisymmetric matrix `B[i][j] = <F, [X_i, X_j]>`.
#[derive(Debug, Clone, PartialEq)]
pub struct KirillovForm(pub Matrix5<f64>);

impl KirillovForm {
    pub fn rank(&self) -> usize {
        self.rank_with_tol(RANK_TOL)
    }

    pub fn rank_with_tol(&self, rel_tol: f64) -> usize {
        let m = DMatrix::from_column_slice(DIM, DIM, self.0.as_slice());
        numeric_rank(&m, rel_tol)
    }
}

pub fn kirillov_form(alg: &LieAlgebra, f: &Covector) -> KirillovForm {
    let sc = alg.structure_constants();
    KirillovForm(Matrix5::from_fn(|i, j| {
        (0..DIM).map(|k| sc.get(i, j, k) * f.0[k]).sum()
    }))
}

pub fn orbit_dimension(alg: &LieAlgebra, f: &Covector) -> usize {
    kirillov_form(alg, f).rank()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStratum {
    ZeroDim,
    TwoDim,
}

impl OrbitStratum {
    pub fn dimension(self) -> usize {
        match self {
            OrbitStratum::ZeroDim => 0,
            OrbitStratum::TwoDim => 2,
        }
    }
}

/// Stratum predicted for `F` by the orbit classification of `family`.
pub fn predicted_stratum(family: &Md5Family, f: &Covector) -> OrbitStratum {
    let id = family.id().index();
    let zero = match id {
        1..=10 => f.beta() == 0.0 && f.gamma() == 0.0 && f.delta() == 0.0 && f.sigma() == 0.0,
        // beta + i gamma = delta = sigma = 0
        11..=13 => {
            Complex64::new(f.beta(), f.gamma()) == Complex64::new(0.0, 0.0)
                && f.delta() == 0.0
                && f.sigma() == 0.0
        }
        // beta + i gamma = delta + i sigma = 0
        _ => {
            Complex64::new(f.beta(), f.gamma()) == Complex64::new(0.0, 0.0)
                && Complex64::new(f.delta(), f.sigma()) == Complex64::new(0.0, 0.0)
        }
    };
    if zero {
        OrbitStratum::ZeroDim
    } else {
        OrbitStratum::TwoDim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdCounterexample {
    pub covector: Covector,
    pub rank: usize,
    pub predicted: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdReport {
    pub samples: usize,
    pub rank_histogram: BTreeMap<usize, usize>,
    /// Whether ranks were also compared against the family's stratum predicate.
    pub stratum_checked: bool,
    pub counterexample_count: usize,
    /// First few counterexamples, in sample order.
    pub counterexamples: Vec<MdCounterexample>,
}

impl MdReport {
    pub fn passed(&self) -> bool {
        self.counterexample_count == 0
    }
}

const MAX_LISTED_COUNTEREXAMPLES: usize = 32;

/// Random covector: uniform direction on `S^4`, log-uniform radius in
/// `[1e-3, 1e3]`.
pub fn sample_covector<R: Rng + ?Sized>(rng: &mut R) -> Covector {
    loop {
        let v: [f64; DIM] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let radius = 10f64.powf(rng.random_range(-3.0..=3.0));
        return Covector(v.map(|x| x / norm * radius));
    }
}

/// Boundary probes: every zero pattern of `(beta, gamma, delta, sigma)`, each
/// with a random `alpha` and random nonzero entries.
fn boundary_covectors<R: Rng + ?Sized>(rng: &mut R) -> Vec<Covector> {
    (0..16u32)
        .map(|mask| {
            let mut c = [0.0; DIM];
            c[0] = rng.sample::<f64, _>(StandardNormal);
            for bit in 0..4 {
                if mask & (1 << bit) != 0 {
                    c[bit + 1] =
                        rng.random_range(0.1..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
            }
            Covector(c)
        })
        .chain(std::iter::once(Covector::zero()))
        .collect()
}

/// Per-index generator: the same stream for a given `(seed, index)` no matter
/// how the samples are split across threads.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Samples covectors and checks the MD dichotomy: every orbit dimension is 0
/// or 2, and, when `alg` carries a family, the dimension matches the family's
/// stratum predicate.
pub fn md_verify(alg: &LieAlgebra, n_samples: usize, seed: u64) -> MdReport {
    md_verify_with_tol(alg, n_samples, seed, RANK_TOL)
}

/// [`md_verify`] with an explicit relative rank tolerance.
pub fn md_verify_with_tol(
    alg: &LieAlgebra,
    n_samples: usize,
    seed: u64,
    rank_tol: f64,
) -> MdReport {
    assert!(n_samples >= 1, "md_verify needs at least one sample");
    let mut boundary_rng = indexed_rng(seed, u64::MAX);
    let mut probes = boundary_covectors(&mut boundary_rng);
    let random: Vec<Covector> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| sample_covector(&mut indexed_rng(seed, i)))
        .collect();
    probes.extend(random);

    let family = alg.family().copied();
    let results: Vec<(Covector, usize, Option<usize>)> = probes
        .par_iter()
        .map(|f| {
            let rank = kirillov_form(alg, f).rank_with_tol(rank_tol);
            let predicted = family.map(|fam| predicted_stratum(&fam, f).dimension());
            (*f, rank, predicted)
        })
        .collect();

    let mut histogram = BTreeMap::new();
    let mut counterexamples = Vec::new();
    let mut count = 0;
    for (covector, rank, predicted) in &results {
        *histogram.entry(*rank).or_insert(0) += 1;
        let bad = !(*rank == 0 || *rank == 2) || predicted.is_some_and(|p| p != *rank);
        if bad {
            count += 1;
            if counterexamples.len() < MAX_LISTED_COUNTEREXAMPLES {
                counterexamples.push(MdCounterexample {
                    covector: *covector,
                    rank: *rank,
                    predicted: *predicted,
                });
            }
        }
    }
    MdReport {
        samples: results.len(),
        rank_histogram: histogram,
        stratum_checked: family.is_some(),
        counterexample_count: count,
        counterexamples,
    }
}

/// `M = ad_{X1}` restricted to the derived ideal.
fn x1_block(alg: &LieAlgebra) -> Matrix4<f64> {
    restrict_to_ideal(&ad_matrix(alg, &basis(0)))
}

/// `(x, exp(a M^T) (beta, gamma, delta, sigma))`, matrix exponential by Padé.
pub fn coadjoint_flow(alg: &LieAlgebra, f: &Covector, a: f64, x: f64) -> Covector {
    let m = x1_block(alg);
    let e = expm_pade(&(m.transpose() * a));
    let w = e * f.ideal_part();
    Covector::new(x, w[0], w[1], w[2], w[3])
}

/// Block structure of the listed `ad_{X1}` matrix.
pub fn ad_blocks(family: &Md5Family) -> Vec<Block> {
    use Block::*;
    use Md5Family::*;
    let jordan = |lambda: f64, size: usize| Jordan { lambda, size };
    let rot = |phi: f64| Rotation {
        re: phi.cos(),
        im: phi.sin(),
    };
    match *family {
        F1 {
            lambda1,
            lambda2,
            lambda3,
        } => vec![
            Scalar(lambda1),
            Scalar(lambda2),
            Scalar(lambda3),
            Scalar(1.0),
        ],
        F2 { lambda1, lambda2 } => vec![Scalar(lambda1), Scalar(lambda2), Scalar(1.0), Scalar(1.0)],
        F3 { lambda } => vec![Scalar(lambda), Scalar(lambda), Scalar(1.0), Scalar(1.0)],
        F4 { lambda } => vec![Scalar(lambda), Scalar(1.0), Scalar(1.0), Scalar(1.0)],
        F5 => vec![Scalar(1.0); 4],
        F6 { lambda1, lambda2 } => vec![Scalar(lambda1), Scalar(lambda2), jordan(1.0, 2)],
        F7 { lambda } => vec![Scalar(lambda), Scalar(lambda), jordan(1.0, 2)],
        F8 { lambda } => vec![jordan(lambda, 2), jordan(1.0, 2)],
        F9 { lambda } => vec![Scalar(lambda), jordan(1.0, 3)],
        F10 => vec![jordan(1.0, 4)],
        F11 {
            lambda1,
            lambda2,
            phi,
        } => vec![rot(phi), Scalar(lambda1), Scalar(lambda2)],
        F12 { lambda, phi } => vec![rot(phi), Scalar(lambda), Scalar(lambda)],
        F13 { lambda, phi } => vec![rot(phi), jordan(lambda, 2)],
        F14 { lambda, mu, phi } => vec![rot(phi), Rotation { re: lambda, im: mu }],
    }
}

/// Flow through the closed-form block exponential instead of Padé.
pub fn coadjoint_flow_blocks(family: &Md5Family, f: &Covector, a: f64, x: f64) -> Covector {
    let e: Matrix4<f64> = expm_blocks(&ad_blocks(family), a);
    let w = e.transpose() * f.ideal_part();
    Covector::new(x, w[0], w[1], w[2], w[3])
}

/// The orbit through a covector, with its explicit parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitDescriptor {
    pub stratum: OrbitStratum,
    pub family: Md5Family,
    pub base: Covector,
}

impl OrbitDescriptor {
    /// Point of the orbit at parameters `(x, a)`. On the zero-dimensional
    /// stratum the orbit is `{F}` and the parameters are ignored.
    pub fn point(&self, x: f64, a: f64) -> Covector {
        if self.stratum == OrbitStratum::ZeroDim {
            return self.base;
        }
        closed_form_point(&self.family, &self.base, x, a)
    }
}

pub fn closed_form_orbit(family: Md5Family, f: Covector) -> OrbitDescriptor {
    OrbitDescriptor {
        stratum: predicted_stratum(&family, &f),
        family,
        base: f,
    }
}

/// The explicit orbit formulas, written out family by family.
fn closed_form_point(family: &Md5Family, f: &Covector, x: f64, a: f64) -> Covector {
    use Md5Family::*;
    let (b, g, d, s) = (f.beta(), f.gamma(), f.delta(), f.sigma());
    let ea = a.exp();
    let el = |l: f64| (a * l).exp();
    let rot = |phi: f64| -> Complex64 {
        // (beta + i gamma) e^{a e^{-i phi}}
        let z = Complex64::new(b, g);
        z * (Complex64::from_polar(1.0, -phi) * a).exp()
    };
    match *family {
        F1 {
            lambda1,
            lambda2,
            lambda3,
        } => Covector::new(x, b * el(lambda1), g * el(lambda2), d * el(lambda3), s * ea),
        F2 { lambda1, lambda2 } => {
            Covector::new(x, b * el(lambda1), g * el(lambda2), d * ea, s * ea)
        }
        F3 { lambda } => Covector::new(x, b * el(lambda), g * el(lambda), d * ea, s * ea),
        F4 { lambda } => Covector::new(x, b * el(lambda), g * ea, d * ea, s * ea),
        F5 => Covector::new(x, b * ea, g * ea, d * ea, s * ea),
        F6 { lambda1, lambda2 } => Covector::new(
            x,
            b * el(lambda1),
            g * el(lambda2),
            d * ea,
            d * a * ea + s * ea,
        ),
        F7 { lambda } => Covector::new(
            x,
            b * el(lambda),
            g * el(lambda),
            d * ea,
            d * a * ea + s * ea,
        ),
        F8 { lambda } => Covector::new(
            x,
            b * el(lambda),
            b * a * el(lambda) + g * el(lambda),
            d * ea,
            d * a * ea + s * ea,
        ),
        F9 { lambda } => Covector::new(
            x,
            b * el(lambda),
            g * ea,
            g * a * ea + d * ea,
            g * a * a * ea / 2.0 + d * a * ea + s * ea,
        ),
        F10 => Covector::new(
            x,
            b * ea,
            b * a * ea + g * ea,
            b * a * a * ea / 2.0 + g * a * ea + d * ea,
            b * a.powi(3) * ea / 6.0 + g * a * a * ea / 2.0 + d * a * ea + s * ea,
        ),
        F11 {
            lambda1,
            lambda2,
            phi,
        } => {
            let z = rot(phi);
            Covector::new(x, z.re, z.im, d * el(lambda1), s * el(lambda2))
        }
        F12 { lambda, phi } => {
            let z = rot(phi);
            Covector::new(x, z.re, z.im, d * el(lambda), s * el(lambda))
        }
        F13 { lambda, phi } => {
            let z = rot(phi);
            Covector::new(
                x,
                z.re,
                z.im,
                d * el(lambda),
                d * a * el(lambda) + s * el(lambda),
            )
        }
        F14 { lambda, mu, phi } => {
            let z = rot(phi);
            let w = Complex64::new(d, s) * (Complex64::new(lambda, -mu) * a).exp();
            Covector::new(x, z.re, z.im, w.re, w.im)
        }
    }
}

/// Max over the grid of `|| flow(F; a, x) - closed_form(F)(x, a) ||_inf`.
pub fn flow_vs_closed_form(family: &Md5Family, f: &Covector, grid: &[(f64, f64)]) -> f64 {
    let alg = match crate::lie::build_md5(*family) {
        Ok(alg) => alg,
        Err(_) => return f64::NAN,
    };
    let desc = closed_form_orbit(*family, *f);
    grid.iter()
        .map(|&(x, a)| {
            let flow = if desc.stratum == OrbitStratum::ZeroDim {
                // the orbit of a fixed point does not move in x either
                *f
            } else {
                coadjoint_flow(&alg, f, a, x)
            };
            flow.max_abs_diff(&desc.point(x, a))
        })
        .fold(0.0, f64::max)
}

/// `n` evenly spaced `a` values on `[lo, hi]` paired with `x`.
pub fn a_grid(lo: f64, hi: f64, n: usize, x: f64) -> Vec<(f64, f64)> {
    if n == 1 {
        return vec![(x, lo)];
    }
    (0..n)
        .map(|i| (x, lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Principal-angle residual between the orbit tangent plane at `F` (spanned by
/// `d/dx` and `d/da` of the closed form at `a = 0`) and the image of `B_F`.
pub fn orbit_tangent_residual(family: &Md5Family, f: &Covector) -> f64 {
    let alg = crate::lie::build_md5(*family).expect("valid family");
    let desc = closed_form_orbit(*family, *f);
    let h = 1e-5;
    let plus = desc.point(f.alpha(), h).to_vector();
    let minus = desc.point(f.alpha(), -h).to_vector();
    let da = (plus - minus) / (2.0 * h);
    let dx = basis(0);
    let tangent = DMatrix::from_fn(DIM, 2, |r, c| if c == 0 { dx[r] } else { da[r] });
    let b = kirillov_form(&alg, f).0;
    let image = DMatrix::from_column_slice(DIM, DIM, b.as_slice());
    subspace_distance(&tangent, &image, RANK_TOL)
}

/// Group law residual `|| flow(flow(F, a), b) - flow(F, a + b) ||_inf`.
pub fn flow_group_law_residual(alg: &LieAlgebra, f: &Covector, a: f64, b: f64) -> f64 {
    let once = coadjoint_flow(alg, f, a, f.alpha());
    let twice = coadjoint_flow(alg, &once, b, f.alpha());
    twice.max_abs_diff(&coadjoint_flow(alg, f, a + b, f.alpha()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_md5, FamilyId, StructureConstants};
    use std::f64::consts::PI;

    #[test]
    fn kirillov_form_examples() {
        let alg = build_md5(Md5Family::F5).unwrap();
        let b = kirillov_form(&alg, &Covector::new(3.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(b.0, Matrix5::zeros());
        // hand evaluation: B[0][1] = <F, [X1, X2]> = <F, X2> = beta
        let b = kirillov_form(&alg, &Covector::new(0.0, 1.0, 0.0, 0.0, 0.0));
        let mut expected = Matrix5::zeros();
        expected[(0, 1)] = 1.0;
        expected[(1, 0)] = -1.0;
        assert_eq!(b.0, expected);
        let any = build_md5(Md5Family::F10).unwrap();
        assert_eq!(kirillov_form(&any, &Covector::zero()).0, Matrix5::zeros());
    }

    #[test]
    fn orbit_dimension_examples() {
        let alg = build_md5(Md5Family::F1 {
            lambda1: 2.0,
            lambda2: 3.0,
            lambda3: 5.0,
        })
        .unwrap();
        assert_eq!(
            orbit_dimension(&alg, &Covector::new(0.0, 1.0, 0.0, 0.0, 0.0)),
            2
        );
        assert_eq!(
            orbit_dimension(&alg, &Covector::new(7.0, 0.0, 0.0, 0.0, 0.0)),
            0
        );
        let alg = build_md5(Md5Family::F14 {
            lambda: 0.0,
            mu: 1.0,
            phi: PI / 2.0,
        })
        .unwrap();
        assert_eq!(
            orbit_dimension(&alg, &Covector::new(0.0, 1.0, 1.0, 1.0, 1.0)),
            2
        );
    }

    #[test]
    fn md_verify_on_families_and_abelian() {
        let alg = build_md5(Md5Family::F3 { lambda: -1.0 }).unwrap();
        let r = md_verify(&alg, 2000, 1);
        assert!(r.passed(), "{:?}", r.counterexamples);
        assert!(r.rank_histogram.keys().all(|k| *k == 0 || *k == 2));
        let r = md_verify(&LieAlgebra::abelian(), 200, 1);
        assert_eq!(
            r.rank_histogram.keys().copied().collect::<Vec<_>>(),
            vec![0]
        );
        assert!(!r.stratum_checked);
    }

    #[test]
    fn md_verify_flags_non_md_algebra() {
        // Heisenberg-like bracket [X1,X2] = X3, [X4,X5] = X3 gives rank 4 at X3*.
        let sc = StructureConstants::from_upper_brackets(|i, j| {
            let mut v = [0.0; DIM];
            if (i, j) == (0, 1) || (i, j) == (3, 4) {
                v[2] = 1.0;
            }
            v
        });
        let alg = LieAlgebra::from_structure_constants(sc);
        let r = md_verify(&alg, 100, 5);
        assert!(r.rank_histogram.contains_key(&4));
        assert!(!r.passed());
    }

    #[test]
    fn md_verify_is_deterministic() {
        let alg = build_md5(Md5Family::F12 {
            lambda: 1.0,
            phi: PI / 2.0,
        })
        .unwrap();
        assert_eq!(md_verify(&alg, 500, 9), md_verify(&alg, 500, 9));
    }

    #[test]
    fn flow_examples() {
        let (l1, l2, l3) = (0.5, -1.5, 2.0);
        let alg = build_md5(Md5Family::F1 {
            lambda1: l1,
            lambda2: l2,
            lambda3: l3,
        })
        .unwrap();
        let f = Covector::new(0.0, 1.0, 2.0, 3.0, 4.0);
        let a = 0.8;
        let out = coadjoint_flow(&alg, &f, a, 1.5);
        let expected = Covector::new(
            1.5,
            (a * l1).exp(),
            2.0 * (a * l2).exp(),
            3.0 * (a * l3).exp(),
            4.0 * a.exp(),
        );
        assert!(out.max_abs_diff(&expected) < 1e-12);
        assert_eq!(
            coadjoint_flow(&alg, &f, 0.0, 0.0).0,
            [0.0, 1.0, 2.0, 3.0, 4.0]
        );

        let alg = build_md5(Md5Family::F10).unwrap();
        let f = Covector::new(0.0, 1.0, 0.0, 0.0, 0.0);
        let out = coadjoint_flow(&alg, &f, 1.3, 0.0);
        assert!((out.sigma() - 1.3f64.powi(3) * 1.3f64.exp() / 6.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let d = closed_form_orbit(
            Md5Family::F9 { lambda: 2.0 },
            Covector::new(0.0, 0.0, 1.0, 0.0, 0.0),
        );
        let p = d.point(0.0, 1.0);
        assert!((p.sigma() - 1f64.exp() / 2.0).abs() < 1e-15);

        let f = Covector::new(4.0, 0.0, 0.0, 0.0, 0.0);
        let d = closed_form_orbit(Md5Family::F7 { lambda: 2.0 }, f);
        assert_eq!(d.stratum, OrbitStratum::ZeroDim);
        assert_eq!(d.point(3.0, 1.0), f);

        let (lambda, a) = (0.3, 1.7);
        let d = closed_form_orbit(
            Md5Family::F13 { lambda, phi: 1.0 },
            Covector::new(0.0, 0.0, 0.0, 2.0, 5.0),
        );
        let p = d.point(0.0, a);
        let e = (a * lambda).exp();
        assert!((p.delta() - 2.0 * e).abs() < 1e-12);
        assert!((p.sigma() - (2.0 * a * e + 5.0 * e)).abs() < 1e-12);
    }

    #[test]
    fn flow_matches_closed_form_examples() {
        let grid = a_grid(-3.0, 3.0, 100, 0.25);
        let dev = flow_vs_closed_form(
            &Md5Family::F7 { lambda: 2.0 },
            &Covector::new(0.0, 1.0, 1.0, 1.0, 1.0),
            &grid,
        );
        assert!(dev < 1e-9, "{dev}");
        let dev = flow_vs_closed_form(
            &Md5Family::F14 {
                lambda: 0.0,
                mu: 1.0,
                phi: PI / 2.0,
            },
            &Covector::new(0.0, 1.0, 0.0, 1.0, 0.0),
            &grid,
        );
        assert!(dev < 1e-9, "{dev}");
        let zero_a = vec![(0.0, 0.0); 5];
        let dev = flow_vs_closed_form(
            &Md5Family::F10,
            &Covector::new(0.0, 1.0, 1.0, 1.0, 1.0),
            &zero_a,
        );
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn pade_and_block_routes_agree() {
        let mut rng = indexed_rng(17, 0);
        for id in FamilyId::ALL {
            let fam = id.sample(&mut rng);
            let alg = build_md5(fam).unwrap();
            let f = sample_covector(&mut rng);
            for &a in &[-3.0, -1.0, 0.5, 3.0] {
                let p = coadjoint_flow(&alg, &f, a, 0.0);
                let b = coadjoint_flow_blocks(&fam, &f, a, 0.0);
                let scale = b.0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                assert!(p.max_abs_diff(&b) / scale < 1e-12, "{fam:?} a={a}");
            }
        }
    }

    #[test]
    fn tangent_plane_matches_kirillov_image() {
        let mut rng = indexed_rng(23, 0);
        for id in FamilyId::ALL {
            let fam = id.sample(&mut rng);
            let f = Covector::new(0.3, 0.7, -1.1, 0.4, 0.9);
            let r = orbit_tangent_residual(&fam, &f);
            assert!(r < 1e-6, "{fam:?}: {r}");
        }
    }
}
