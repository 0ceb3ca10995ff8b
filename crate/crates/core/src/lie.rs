//! Five-dimensional real Lie algebras given by structure constants, and the
//! fourteen MD5 families whose derived ideal is the commutative span of
//! `X2..X5`.
//!
//! Basis vectors are 0-indexed internally: `X1` is index 0, `X5` is index 4.
//! Every family is determined by the 4x4 matrix of `ad_{X1}` restricted to the
//! derived ideal; column `j` of that matrix holds the coordinates of
//! `[X1, X_{j+2}]` in the basis `(X2, .., X5)`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix4, Matrix5, Vector5};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DIM: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("family {family}: parameter constraint violated: {constraint}")]
    ParameterDomain {
        family: FamilyId,
        constraint: String,
    },
    #[error("unknown family tag `{0}` (expected 5_4_1 .. 5_4_14)")]
    UnknownFamily(String),
    #[error("family {family}: missing parameter `{name}`")]
    MissingParameter {
        family: FamilyId,
        name: &'static str,
    },
}

/// Bracket coefficients `c[i][j][k]` with `[X_i, X_j] = sum_k c[i][j][k] X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    c: [[[f64; DIM]; DIM]; DIM],
}

impl StructureConstants {
    pub fn zero() -> Self {
        Self {
            c: [[[0.0; DIM]; DIM]; DIM],
        }
    }

    /// Builds the tensor from the brackets `[X_i, X_j]` for `i < j`; the
    /// remaining entries follow from antisymmetry.
    pub fn from_upper_brackets(mut bracket: impl FnMut(usize, usize) -> [f64; DIM]) -> Self {
        let mut sc = Self::zero();
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                let v = bracket(i, j);
                for k in 0..DIM {
                    sc.c[i][j][k] = v[k];
                    sc.c[j][i][k] = -v[k];
                }
            }
        }
        sc
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }

    /// Largest `|c[i][j][k] + c[j][i][k]|`; zero for every tensor built here.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    worst = worst.max((self.c[i][j][k] + self.c[j][i][k]).abs());
                }
            }
        }
        worst
    }
}

/// The fourteen family tags `5_4_1 .. 5_4_14`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyId(u8);

impl FamilyId {
    pub const ALL: [FamilyId; 14] = [
        FamilyId(1),
        FamilyId(2),
        FamilyId(3),
        FamilyId(4),
        FamilyId(5),
        FamilyId(6),
        FamilyId(7),
        FamilyId(8),
        FamilyId(9),
        FamilyId(10),
        FamilyId(11),
        FamilyId(12),
        FamilyId(13),
        FamilyId(14),
    ];

    pub fn new(index: u8) -> Option<Self> {
        (1..=14).contains(&index).then_some(FamilyId(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn tag(self) -> String {
        format!("5_4_{}", self.0)
    }

    pub fn parse(tag: &str) -> Result<Self, LieError> {
        let trimmed = tag.trim();
        let idx = trimmed
            .strip_prefix("5_4_")
            .or_else(|| trimmed.strip_prefix("5,4,"))
            .unwrap_or(trimmed);
        idx.parse::<u8>()
            .ok()
            .and_then(FamilyId::new)
            .ok_or_else(|| LieError::UnknownFamily(tag.to_string()))
    }

    /// Topological type of the associated foliation: 1 for families 1-10,
    /// 2 for 11-13 and 3 for 14.
    pub fn foliation_type(self) -> u8 {
        match self.0 {
            1..=10 => 1,
            11..=13 => 2,
            _ => 3,
        }
    }

    /// Names of the parameters the family takes, in constructor order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self.0 {
            1 => &["lambda1", "lambda2", "lambda3"],
            2 | 6 => &["lambda1", "lambda2"],
            3 | 4 | 7 | 8 | 9 => &["lambda"],
            5 | 10 => &[],
            11 => &["lambda1", "lambda2", "phi"],
            12 | 13 => &["lambda", "phi"],
            _ => &["lambda", "mu", "phi"],
        }
    }

    /// Assembles a family from named parameters, checking presence only.
    pub fn with_params(self, get: impl Fn(&str) -> Option<f64>) -> Result<Md5Family, LieError> {
        let need =
            |name: &'static str| get(name).ok_or(LieError::MissingParameter { family: self, name });
        Ok(match self.0 {
            1 => Md5Family::F1 {
                lambda1: need("lambda1")?,
                lambda2: need("lambda2")?,
                lambda3: need("lambda3")?,
            },
            2 => Md5Family::F2 {
                lambda1: need("lambda1")?,
                lambda2: need("lambda2")?,
            },
            3 => Md5Family::F3 {
                lambda: need("lambda")?,
            },
            4 => Md5Family::F4 {
                lambda: need("lambda")?,
            },
            5 => Md5Family::F5,
            6 => Md5Family::F6 {
                lambda1: need("lambda1")?,
                lambda2: need("lambda2")?,
            },
            7 => Md5Family::F7 {
                lambda: need("lambda")?,
            },
            8 => Md5Family::F8 {
                lambda: need("lambda")?,
            },
            9 => Md5Family::F9 {
                lambda: need("lambda")?,
            },
            10 => Md5Family::F10,
            11 => Md5Family::F11 {
                lambda1: need("lambda1")?,
                lambda2: need("lambda2")?,
                phi: need("phi")?,
            },
            12 => Md5Family::F12 {
                lambda: need("lambda")?,
                phi: need("phi")?,
            },
            13 => Md5Family::F13 {
                lambda: need("lambda")?,
                phi: need("phi")?,
            },
            _ => Md5Family::F14 {
                lambda: need("lambda")?,
                mu: need("mu")?,
                phi: need("phi")?,
            },
        })
    }

    /// Draws a valid parameter set: eigenvalue-type parameters in `[-2, 2]`
    /// kept at least 0.05 away from the excluded values and from each other,
    /// `phi` in `[0.05, pi - 0.05]`, `mu` in `[0.05, 2]`.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> Md5Family {
        const GAP: f64 = 0.05;
        let excl_one = self.0 <= 10;
        let mut lambdas = |count: usize| -> Vec<f64> {
            let mut out: Vec<f64> = Vec::with_capacity(count);
            while out.len() < count {
                let v: f64 = rng.random_range(-2.0..2.0);
                if v.abs() < GAP || (excl_one && (v - 1.0).abs() < GAP) {
                    continue;
                }
                if out.iter().any(|&w| (w - v).abs() < GAP) {
                    continue;
                }
                out.push(v);
            }
            out
        };
        let l = lambdas(3);
        let phi = rng.random_range(GAP..PI - GAP);
        let mu = rng.random_range(GAP..2.0);
        let lam14 = rng.random_range(-2.0..2.0);
        match self.0 {
            1 => Md5Family::F1 {
                lambda1: l[0],
                lambda2: l[1],
                lambda3: l[2],
            },
            2 => Md5Family::F2 {
                lambda1: l[0],
                lambda2: l[1],
            },
            3 => Md5Family::F3 { lambda: l[0] },
            4 => Md5Family::F4 { lambda: l[0] },
            5 => Md5Family::F5,
            6 => Md5Family::F6 {
                lambda1: l[0],
                lambda2: l[1],
            },
            7 => Md5Family::F7 { lambda: l[0] },
            8 => Md5Family::F8 { lambda: l[0] },
            9 => Md5Family::F9 { lambda: l[0] },
            10 => Md5Family::F10,
            11 => Md5Family::F11 {
                lambda1: l[0],
                lambda2: l[1],
                phi,
            },
            12 => Md5Family::F12 { lambda: l[0], phi },
            13 => Md5Family::F13 { lambda: l[0], phi },
            _ => Md5Family::F14 {
                lambda: lam14,
                mu,
                phi,
            },
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "5_4_{}", self.0)
    }
}

/// A member of one of the fourteen MD5 families, with its parameters.
///
/// Serializes as `{"family":"5_4_11","params":{"lambda1":..,"lambda2":..,"phi":..}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum Md5Family {
    #[serde(rename = "5_4_1")]
    F1 {
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
    },
    #[serde(rename = "5_4_2")]
    F2 { lambda1: f64, lambda2: f64 },
    #[serde(rename = "5_4_3")]
    F3 { lambda: f64 },
    #[serde(rename = "5_4_4")]
    F4 { lambda: f64 },
    #[serde(rename = "5_4_5")]
    F5,
    #[serde(rename = "5_4_6")]
    F6 { lambda1: f64, lambda2: f64 },
    #[serde(rename = "5_4_7")]
    F7 { lambda: f64 },
    #[serde(rename = "5_4_8")]
    F8 { lambda: f64 },
    #[serde(rename = "5_4_9")]
    F9 { lambda: f64 },
    #[serde(rename = "5_4_10")]
    F10,
    #[serde(rename = "5_4_11")]
    F11 {
        lambda1: f64,
        lambda2: f64,
        phi: f64,
    },
    #[serde(rename = "5_4_12")]
    F12 { lambda: f64, phi: f64 },
    #[serde(rename = "5_4_13")]
    F13 { lambda: f64, phi: f64 },
    #[serde(rename = "5_4_14")]
    F14 { lambda: f64, mu: f64, phi: f64 },
}

impl Md5Family {
    pub fn id(&self) -> FamilyId {
        use Md5Family::*;
        FamilyId(match self {
            F1 { .. } => 1,
            F2 { .. } => 2,
            F3 { .. } => 3,
            F4 { .. } => 4,
            F5 => 5,
            F6 { .. } => 6,
            F7 { .. } => 7,
            F8 { .. } => 8,
            F9 { .. } => 9,
            F10 => 10,
            F11 { .. } => 11,
            F12 { .. } => 12,
            F13 { .. } => 13,
            F14 { .. } => 14,
        })
    }

    /// Checks the family's parameter domain. Comparisons are exact: `lambda`
    /// equal to 1 is rejected, `1 + 1e-300` is not.
    pub fn validate(&self) -> Result<(), LieError> {
        use Md5Family::*;
        let family = self.id();
        let fail = |constraint: String| Err(LieError::ParameterDomain { family, constraint });
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                fail(format!("{name} must be finite"))
            }
        };
        let not_zero_one = |name: &str, v: f64| {
            finite(name, v)?;
            if v == 0.0 || v == 1.0 {
                fail(format!("{name} must lie in R \\ {{0, 1}} (got {v})"))
            } else {
                Ok(())
            }
        };
        let not_zero = |name: &str, v: f64| {
            finite(name, v)?;
            if v == 0.0 {
                fail(format!("{name} must be nonzero"))
            } else {
                Ok(())
            }
        };
        let distinct = |a: (&str, f64), b: (&str, f64)| {
            if a.1 == b.1 {
                fail(format!("{} must differ from {} (both {})", a.0, b.0, a.1))
            } else {
                Ok(())
            }
        };
        let angle = |v: f64| {
            finite("phi", v)?;
            if v > 0.0 && v < PI {
                Ok(())
            } else {
                fail(format!("phi must lie in (0, pi) (got {v})"))
            }
        };
        match *self {
            F1 {
                lambda1,
                lambda2,
                lambda3,
            } => {
                not_zero_one("lambda1", lambda1)?;
                not_zero_one("lambda2", lambda2)?;
                not_zero_one("lambda3", lambda3)?;
                distinct(("lambda1", lambda1), ("lambda2", lambda2))?;
                distinct(("lambda2", lambda2), ("lambda3", lambda3))?;
                distinct(("lambda3", lambda3), ("lambda1", lambda1))
            }
            F2 { lambda1, lambda2 } | F6 { lambda1, lambda2 } => {
                not_zero_one("lambda1", lambda1)?;
                not_zero_one("lambda2", lambda2)?;
                distinct(("lambda1", lambda1), ("lambda2", lambda2))
            }
            F3 { lambda } | F4 { lambda } | F7 { lambda } | F8 { lambda } | F9 { lambda } => {
                not_zero_one("lambda", lambda)
            }
            F5 | F10 => Ok(()),
            F11 {
                lambda1,
                lambda2,
                phi,
            } => {
                not_zero("lambda1", lambda1)?;
                not_zero("lambda2", lambda2)?;
                distinct(("lambda1", lambda1), ("lambda2", lambda2))?;
                angle(phi)
            }
            F12 { lambda, phi } | F13 { lambda, phi } => {
                not_zero("lambda", lambda)?;
                angle(phi)
            }
            F14 { lambda, mu, phi } => {
                finite("lambda", lambda)?;
                finite("mu", mu)?;
                if mu <= 0.0 {
                    return fail(format!("mu must be positive (got {mu})"));
                }
                angle(phi)
            }
        }
    }

    /// The listed matrix of `ad_{X1}` on the derived ideal, entries as given.
    pub fn ad_block(&self) -> Matrix4<f64> {
        use Md5Family::*;
        let diag = |a: f64, b: f64, c: f64, d: f64| Matrix4::from_diagonal(&[a, b, c, d].into());
        match *self {
            F1 {
                lambda1,
                lambda2,
                lambda3,
            } => diag(lambda1, lambda2, lambda3, 1.0),
            F2 { lambda1, lambda2 } => diag(lambda1, lambda2, 1.0, 1.0),
            F3 { lambda } => diag(lambda, lambda, 1.0, 1.0),
            F4 { lambda } => diag(lambda, 1.0, 1.0, 1.0),
            F5 => Matrix4::identity(),
            F6 { lambda1, lambda2 } => {
                let mut m = diag(lambda1, lambda2, 1.0, 1.0);
                m[(2, 3)] = 1.0;
                m
            }
            F7 { lambda } => {
                let mut m = diag(lambda, lambda, 1.0, 1.0);
                m[(2, 3)] = 1.0;
                m
            }
            F8 { lambda } => {
                let mut m = diag(lambda, lambda, 1.0, 1.0);
                m[(0, 1)] = 1.0;
                m[(2, 3)] = 1.0;
                m
            }
            F9 { lambda } => {
                let mut m = diag(lambda, 1.0, 1.0, 1.0);
                m[(1, 2)] = 1.0;
                m[(2, 3)] = 1.0;
                m
            }
            F10 => {
                let mut m = Matrix4::identity();
                m[(0, 1)] = 1.0;
                m[(1, 2)] = 1.0;
                m[(2, 3)] = 1.0;
                m
            }
            F11 {
                lambda1,
                lambda2,
                phi,
            } => rotation_block(phi, diag(0.0, 0.0, lambda1, lambda2)),
            F12 { lambda, phi } => rotation_block(phi, diag(0.0, 0.0, lambda, lambda)),
            F13 { lambda, phi } => {
                let mut m = rotation_block(phi, diag(0.0, 0.0, lambda, lambda));
                m[(2, 3)] = 1.0;
                m
            }
            F14 { lambda, mu, phi } => {
                let mut m = rotation_block(phi, diag(0.0, 0.0, lambda, lambda));
                m[(2, 3)] = -mu;
                m[(3, 2)] = mu;
                m
            }
        }
    }

    /// Named parameters, in the order of [`FamilyId::parameter_names`].
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        use Md5Family::*;
        match *self {
            F1 {
                lambda1,
                lambda2,
                lambda3,
            } => vec![
                ("lambda1", lambda1),
                ("lambda2", lambda2),
                ("lambda3", lambda3),
            ],
            F2 { lambda1, lambda2 } | F6 { lambda1, lambda2 } => {
                vec![("lambda1", lambda1), ("lambda2", lambda2)]
            }
            F3 { lambda } | F4 { lambda } | F7 { lambda } | F8 { lambda } | F9 { lambda } => {
                vec![("lambda", lambda)]
            }
            F5 | F10 => vec![],
            F11 {
                lambda1,
                lambda2,
                phi,
            } => vec![("lambda1", lambda1), ("lambda2", lambda2), ("phi", phi)],
            F12 { lambda, phi } | F13 { lambda, phi } => vec![("lambda", lambda), ("phi", phi)],
            F14 { lambda, mu, phi } => vec![("lambda", lambda), ("mu", mu), ("phi", phi)],
        }
    }
}

fn rotation_block(phi: f64, mut m: Matrix4<f64>) -> Matrix4<f64> {
    let (s, c) = phi.sin_cos();
    m[(0, 0)] = c;
    m[(0, 1)] = -s;
    m[(1, 0)] = s;
    m[(1, 1)] = c;
    m
}

/// A five-dimensional real Lie algebra in the fixed basis `X1..X5`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    sc: StructureConstants,
    family: Option<Md5Family>,
}

impl LieAlgebra {
    /// Wraps an arbitrary tensor. No Jacobi check is made; see
    /// [`jacobi_residual`].
    pub fn from_structure_constants(sc: StructureConstants) -> Self {
        Self { sc, family: None }
    }

    pub fn abelian() -> Self {
        Self::from_structure_constants(StructureConstants::zero())
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.sc
    }

    pub fn family(&self) -> Option<&Md5Family> {
        self.family.as_ref()
    }

    pub fn dim(&self) -> usize {
        DIM
    }
}

/// Instantiates a family. The only nonzero brackets are `[X1, X_j]` for
/// `j = 2..5`, read off the columns of the listed matrix.
pub fn build_md5(family: Md5Family) -> Result<LieAlgebra, LieError> {
    family.validate()?;
    let block = family.ad_block();
    let sc = StructureConstants::from_upper_brackets(|i, j| {
        let mut v = [0.0; DIM];
        if i == 0 {
            for k in 1..DIM {
                v[k] = block[(k - 1, j - 1)];
            }
        }
        v
    });
    Ok(LieAlgebra {
        sc,
        family: Some(family),
    })
}

pub fn bracket(alg: &LieAlgebra, x: &Vector5<f64>, y: &Vector5<f64>) -> Vector5<f64> {
    let mut out = Vector5::zeros();
    for i in 0..DIM {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..DIM {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for k in 0..DIM {
                out[k] += w * alg.sc.c[i][j][k];
            }
        }
    }
    out
}

pub fn basis(i: usize) -> Vector5<f64> {
    let mut v = Vector5::zeros();
    v[i] = 1.0;
    v
}

/// `max_{i,j,k} || [[Xi,Xj],Xk] + [[Xj,Xk],Xi] + [[Xk,Xi],Xj] ||_inf`.
pub fn jacobi_residual(alg: &LieAlgebra) -> f64 {
    let e: Vec<Vector5<f64>> = (0..DIM).map(basis).collect();
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let s = bracket(alg, &bracket(alg, &e[i], &e[j]), &e[k])
                    + bracket(alg, &bracket(alg, &e[j], &e[k]), &e[i])
                    + bracket(alg, &bracket(alg, &e[k], &e[i]), &e[j]);
                worst = worst.max(s.amax());
            }
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct DerivedIdeal {
    /// Orthonormal basis of `[g, g]`.
    pub basis: Vec<Vector5<f64>>,
    pub commutative: bool,
}

impl DerivedIdeal {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Whether the ideal is exactly `span(X2, .., X5)` up to `tol`: four
    /// vectors, each with vanishing `X1` component.
    pub fn is_span_x2_to_x5(&self, tol: f64) -> bool {
        self.basis.len() == 4 && self.basis.iter().all(|v| v[0].abs() <= tol)
    }
}

const IDEAL_TOL: f64 = 1e-10;

pub fn derived_ideal(alg: &LieAlgebra) -> DerivedIdeal {
    let mut cols = Vec::new();
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            cols.push(bracket(alg, &basis(i), &basis(j)));
        }
    }
    let m = DMatrix::from_fn(DIM, cols.len(), |r, c| cols[c][r]);
    let scale = m.amax().max(1.0);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut basis_vecs = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s > IDEAL_TOL * scale {
            basis_vecs.push(Vector5::from_iterator(u.column(idx).iter().copied()));
        }
    }
    let commutative = basis_vecs.iter().enumerate().all(|(a, x)| {
        basis_vecs[a + 1..]
            .iter()
            .all(|y| bracket(alg, x, y).amax() <= IDEAL_TOL * scale)
    });
    DerivedIdeal {
        basis: basis_vecs,
        commutative,
    }
}

/// Matrix of `ad_X` in the basis `X1..X5`: column `j` holds `[X, X_j]`.
pub fn ad_matrix(alg: &LieAlgebra, x: &Vector5<f64>) -> Matrix5<f64> {
    let mut m = Matrix5::zeros();
    for j in 0..DIM {
        m.set_column(j, &bracket(alg, x, &basis(j)));
    }
    m
}

/// Lower-right 4x4 block of an `ad` matrix, i.e. its restriction to
/// `span(X2..X5)`.
pub fn restrict_to_ideal(ad: &Matrix5<f64>) -> Matrix4<f64> {
    ad.fixed_view::<4, 4>(1, 1).into_owned()
}
