//! Integer homological algebra over free abelian groups: Smith normal form,
//! kernels and images, exactness of cyclic six-term sequences, a bounded
//! solver for their completions, and a table of K-groups built from formal
//! rewrite rules.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbkError {
    #[error("map {index} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape {
        index: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("search space too large: about {estimate:.3e} candidate sequences (limit {limit:.0e}); lower the bound or fix more maps")]
    SearchTooLarge { estimate: f64, limit: f64 },
    #[error("unknown preset `{0}` (expected gamma1, gamma2, gamma3 or allZ)")]
    UnknownPreset(String),
    #[error("descriptor {descriptor} is outside the catalogue: no rule for {missing}")]
    OutsideCatalogue { descriptor: String, missing: String },
}

/// Integer matrix of a homomorphism `Z^cols -> Z^rows`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZMap {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl ZMap {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "ZMap data length must be rows * cols"
        );
        ZMap { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMap::new(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ZMap::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a map from its rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        ZMap::new(rows.len(), cols, rows.concat())
    }

    /// `n x 1` matrix with the given column.
    pub fn column_vector(v: &[i64]) -> Self {
        ZMap::new(v.len(), 1, v.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> ZMap {
        let mut t = ZMap::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// `self * rhs`, i.e. first `rhs`, then `self`.
    pub fn compose(&self, rhs: &ZMap) -> ZMap {
        assert_eq!(self.cols, rhs.rows, "composition shape mismatch");
        let mut out = ZMap::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// `row[dst] += k * row[src]`
    fn add_row(&mut self, dst: usize, src: usize, k: i64) {
        for c in 0..self.cols {
            let v = self.get(src, c);
            self.data[dst * self.cols + c] += k * v;
        }
    }

    /// `col[dst] += k * col[src]`
    fn add_col(&mut self, dst: usize, src: usize, k: i64) {
        for r in 0..self.rows {
            let v = self.get(r, src);
            self.data[r * self.cols + dst] += k * v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            self.data[r * self.cols + c] *= -1;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for r in 0..self.rows {
            self.data[r * self.cols + c] *= -1;
        }
    }
}

impl fmt::Display for ZMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.row_vecs().iter().map(|r| format!("{r:?}")).collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// `U * M * V = D` with `U`, `V` unimodular and `D` diagonal, `d1 | d2 | ..`,
/// nonzero entries first.
#[derive(Debug, Clone, PartialEq)]
pub struct Snf {
    pub u: ZMap,
    pub u_inv: ZMap,
    pub d: ZMap,
    pub v: ZMap,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i))
            .collect()
    }

    /// The nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<i64> {
        self.diagonal().into_iter().filter(|&x| x != 0).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn snf(m: &ZMap) -> Snf {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = ZMap::identity(rows);
    let mut u_inv = ZMap::identity(rows);
    let mut v = ZMap::identity(cols);

    // Row operations on d are mirrored on u, and their inverses on u_inv
    // from the right.
    let row_add = |d: &mut ZMap, u: &mut ZMap, ui: &mut ZMap, dst: usize, src: usize, k: i64| {
        d.add_row(dst, src, k);
        u.add_row(dst, src, k);
        ui.add_col(src, dst, -k);
    };
    let row_swap = |d: &mut ZMap, u: &mut ZMap, ui: &mut ZMap, a: usize, b: usize| {
        d.swap_rows(a, b);
        u.swap_rows(a, b);
        ui.swap_cols(a, b);
    };

    for t in 0..rows.min(cols) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = d.get(i, j);
                    if x != 0 && pivot.is_none_or(|(pi, pj)| x.abs() < d.get(pi, pj).abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            row_swap(&mut d, &mut u, &mut u_inv, t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d.get(t, t);
            for i in t + 1..rows {
                let q = d.get(i, t).div_euclid(p);
                if q != 0 {
                    row_add(&mut d, &mut u, &mut u_inv, i, t, -q);
                }
            }
            for j in t + 1..cols {
                let q = d.get(t, j).div_euclid(p);
                if q != 0 {
                    d.add_col(j, t, -q);
                    v.add_col(j, t, -q);
                }
            }
            let clean =
                (t + 1..rows).all(|i| d.get(i, t) == 0) && (t + 1..cols).all(|j| d.get(t, j) == 0);
            if !clean {
                continue;
            }
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| d.get(i, j) % p != 0));
            match offender {
                Some(i) => row_add(&mut d, &mut u, &mut u_inv, t, i, 1),
                None => break,
            }
        }
        if d.get(t, t) < 0 {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
    }
    Snf { u, u_inv, d, v }
}

fn normalize_sign(mut v: Vec<i64>) -> Vec<i64> {
    if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn from_columns(rows: usize, columns: &[Vec<i64>]) -> ZMap {
    let mut m = ZMap::zeros(rows, columns.len());
    for (c, col) in columns.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            m.set(r, c, x);
        }
    }
    m
}

/// Basis of `ker M` as the columns of an inclusion map.
pub fn kernel_basis(m: &ZMap) -> ZMap {
    let s = snf(m);
    let r = s.rank();
    let cols: Vec<Vec<i64>> = (r..m.cols).map(|j| normalize_sign(s.v.column(j))).collect();
    from_columns(m.cols, &cols)
}

/// Basis of `im M` as the columns of an inclusion map.
pub fn image_basis(m: &ZMap) -> ZMap {
    let s = snf(m);
    let cols: Vec<Vec<i64>> = s
        .invariant_factors()
        .iter()
        .enumerate()
        .map(|(j, &dj)| normalize_sign(s.u_inv.column(j).into_iter().map(|x| x * dj).collect()))
        .collect();
    from_columns(m.rows, &cols)
}

/// `coker M = Z^free_rank + sum Z/torsion_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cokernel {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

pub fn cokernel(m: &ZMap) -> Cokernel {
    let s = snf(m);
    let f = s.invariant_factors();
    Cokernel {
        free_rank: m.rows - f.len(),
        torsion: f.into_iter().filter(|&d| d > 1).collect(),
    }
}

/// Whether `v` lies in the subgroup spanned by the columns of `basis`.
pub fn in_lattice(basis: &ZMap, v: &[i64]) -> bool {
    assert_eq!(basis.rows, v.len());
    let s = snf(basis);
    let w = s.u.apply(v);
    let f = s.invariant_factors();
    w.iter().enumerate().all(|(i, &x)| match f.get(i) {
        Some(&d) => x % d == 0,
        None => x == 0,
    })
}

/// Whether the column spans of `a` and `b` are the same subgroup.
pub fn same_subgroup(a: &ZMap, b: &ZMap) -> bool {
    (0..a.cols).all(|j| in_lattice(b, &a.column(j)))
        && (0..b.cols).all(|j| in_lattice(a, &b.column(j)))
}

pub const NODE_NAMES: [&str; 6] = ["K0(J)", "K0(A)", "K0(B)", "K1(J)", "K1(A)", "K1(B)"];

/// `K0(J) -f0-> K0(A) -f1-> K0(B) -f2-> K1(J) -f3-> K1(A) -f4-> K1(B) -f5-> K0(J)`,
/// with `f2 = delta0` and `f5 = delta1`. All groups are `Z^rank`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SixTerm {
    pub groups: [usize; 6],
    pub maps: [ZMap; 6],
}

impl SixTerm {
    pub fn new(groups: [usize; 6], maps: [ZMap; 6]) -> Result<Self, AbkError> {
        for (i, m) in maps.iter().enumerate() {
            check_shape(i, m, groups)?;
        }
        Ok(SixTerm { groups, maps })
    }

    /// Each map multiplies `Z -> Z` by the given integer.
    pub fn on_integers(pattern: [i64; 6]) -> Self {
        SixTerm {
            groups: [1; 6],
            maps: pattern.map(|k| ZMap::new(1, 1, vec![k])),
        }
    }

    pub fn exact_at(&self, node: usize) -> bool {
        exact_between(&self.maps[(node + 5) % 6], &self.maps[node])
    }

    pub fn exactness(&self) -> [bool; 6] {
        std::array::from_fn(|i| self.exact_at(i))
    }

    pub fn is_exact(&self) -> bool {
        (0..6).all(|i| self.exact_at(i))
    }

    pub fn delta0(&self) -> &ZMap {
        &self.maps[2]
    }

    pub fn delta1(&self) -> &ZMap {
        &self.maps[5]
    }
}

fn check_shape(index: usize, m: &ZMap, groups: [usize; 6]) -> Result<(), AbkError> {
    let (er, ec) = (groups[(index + 1) % 6], groups[index]);
    if m.rows != er || m.cols != ec {
        return Err(AbkError::Shape {
            index,
            rows: m.rows,
            cols: m.cols,
            expected_rows: er,
            expected_cols: ec,
        });
    }
    Ok(())
}

/// `im incoming = ker outgoing`, both inside the middle group.
pub fn exact_between(incoming: &ZMap, outgoing: &ZMap) -> bool {
    same_subgroup(&image_basis(incoming), &kernel_basis(outgoing))
}

/// The index invariant `(delta0, delta1)`, generators as columns.
pub fn ext_invariant(hexagon: &SixTerm) -> (ZMap, ZMap) {
    (hexagon.delta0().clone(), hexagon.delta1().clone())
}

/// A six-term sequence with some groups or maps left open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SixTermProblem {
    pub groups: [Option<usize>; 6],
    pub maps: [Option<ZMap>; 6],
    /// Entries of unknown maps range over `[-bound, bound]`.
    pub bound: i64,
    /// Largest rank tried for an unknown group.
    pub max_rank: usize,
}

/// Upper limit on the number of candidate sequences the solver will visit.
pub const SEARCH_LIMIT: f64 = 5e7;

impl SixTermProblem {
    pub fn new(groups: [Option<usize>; 6], maps: [Option<ZMap>; 6], bound: i64) -> Self {
        SixTermProblem {
            groups,
            maps,
            bound,
            max_rank: 2,
        }
    }

    /// The named hexagons: `gamma1` (the type-2 foliation algebra with
    /// `delta0` known and the middle groups open), `gamma2` (groups known,
    /// `delta1` known), `gamma3` (six copies of `Z`, `delta1 = 1`) and `allZ`
    /// (six copies of `Z`, every map open).
    pub fn preset(name: &str, bound: i64) -> Result<Self, AbkError> {
        let none: [Option<ZMap>; 6] = Default::default();
        Ok(match name {
            "gamma1" => {
                let mut maps = none;
                maps[2] = Some(ZMap::from_rows(&[vec![0, 1], vec![0, 1]]));
                SixTermProblem::new(
                    [Some(0), None, Some(2), Some(2), None, Some(0)],
                    maps,
                    bound,
                )
            }
            "gamma2" => {
                let mut maps = none;
                maps[5] = Some(ZMap::column_vector(&[1, 1]));
                let groups = [2, 2, 1, 0, 0, 1].map(Some);
                SixTermProblem::new(groups, maps, bound)
            }
            "gamma3" => {
                let mut maps = none;
                maps[5] = Some(ZMap::new(1, 1, vec![1]));
                SixTermProblem::new([Some(1); 6], maps, bound)
            }
            "allZ" | "allz" => SixTermProblem::new([Some(1); 6], none, bound),
            other => return Err(AbkError::UnknownPreset(other.to_string())),
        })
    }

    fn rank_assignments(&self) -> Vec<[usize; 6]> {
        let mut out = vec![[0usize; 6]];
        for i in 0..6 {
            let choices: Vec<usize> = match self.groups[i] {
                Some(r) => vec![r],
                None => {
                    // a known incident map pins the rank
                    let from_in = self.maps[(i + 5) % 6].as_ref().map(|m| m.rows);
                    let from_out = self.maps[i].as_ref().map(|m| m.cols);
                    match from_in.or(from_out) {
                        Some(r) => vec![r],
                        None => (0..=self.max_rank).collect(),
                    }
                }
            };
            out = out
                .into_iter()
                .flat_map(|g| {
                    choices.iter().map(move |&r| {
                        let mut g = g;
                        g[i] = r;
                        g
                    })
                })
                .collect();
        }
        out.into_iter()
            .filter(|g| {
                self.maps
                    .iter()
                    .enumerate()
                    .all(|(i, m)| m.as_ref().is_none_or(|m| check_shape(i, m, *g).is_ok()))
            })
            .collect()
    }

    /// Number of candidate sequences a full enumeration would visit.
    pub fn search_size(&self) -> f64 {
        let per_map = (2 * self.bound + 1) as f64;
        self.rank_assignments()
            .iter()
            .map(|g| {
                (0..6)
                    .filter(|&i| self.maps[i].is_none())
                    .map(|i| per_map.powi((g[i] * g[(i + 1) % 6]) as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

/// One equivalence class of exact completions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    /// Lexicographically smallest member of the class.
    pub representative: SixTerm,
    /// Number of enumerated completions in the class.
    pub class_size: usize,
    /// Nonzero SNF diagonal of each map.
    pub invariant_factors: [Vec<i64>; 6],
}

fn all_maps(rows: usize, cols: usize, bound: i64) -> Vec<ZMap> {
    let n = rows * cols;
    let width = (2 * bound + 1) as usize;
    let total = width.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let data = (0..n)
                .map(|_| {
                    let digit = (idx % width) as i64 - bound;
                    idx /= width;
                    digit
                })
                .collect();
            ZMap::new(rows, cols, data)
        })
        .collect()
}

fn entry_key(e: i64) -> (i64, bool) {
    (e.abs(), e < 0)
}

fn lex_cmp(a: &SixTerm, b: &SixTerm) -> Ordering {
    let flat = |s: &SixTerm| -> Vec<(i64, bool)> {
        s.maps
            .iter()
            .flat_map(|m| m.data.iter().map(|&e| entry_key(e)))
            .collect()
    };
    flat(a).cmp(&flat(b))
}

type ClassKey = ([usize; 6], [Vec<i64>; 6]);

fn class_key(s: &SixTerm) -> ClassKey {
    (
        s.groups,
        std::array::from_fn(|i| snf(&s.maps[i]).invariant_factors()),
    )
}

fn extend(
    groups: [usize; 6],
    candidates: &[Vec<ZMap>; 6],
    chosen: &mut Vec<ZMap>,
    out: &mut Vec<SixTerm>,
) {
    let i = chosen.len();
    if i == 6 {
        let seq = SixTerm {
            groups,
            maps: std::array::from_fn(|k| chosen[k].clone()),
        };
        if seq.exact_at(0) {
            out.push(seq);
        }
        return;
    }
    for m in &candidates[i] {
        if i > 0 && !exact_between(&chosen[i - 1], m) {
            continue;
        }
        chosen.push(m.clone());
        extend(groups, candidates, chosen, out);
        chosen.pop();
    }
}

/// Enumerates every exact completion with entries in `[-bound, bound]` and
/// groups of rank at most `max_rank`, then groups them into classes keyed by
/// the group ranks and the invariant factors of each map.
pub fn solve_six_term(problem: &SixTermProblem) -> Result<Vec<Completion>, AbkError> {
    let estimate = problem.search_size();
    if estimate > SEARCH_LIMIT {
        return Err(AbkError::SearchTooLarge {
            estimate,
            limit: SEARCH_LIMIT,
        });
    }
    let mut found: Vec<SixTerm> = Vec::new();
    for groups in problem.rank_assignments() {
        let candidates: [Vec<ZMap>; 6] = std::array::from_fn(|i| match &problem.maps[i] {
            Some(m) => vec![m.clone()],
            None => all_maps(groups[(i + 1) % 6], groups[i], problem.bound),
        });
        let batch: Vec<SixTerm> = candidates[0]
            .par_iter()
            .flat_map_iter(|first| {
                let mut out = Vec::new();
                extend(groups, &candidates, &mut vec![first.clone()], &mut out);
                out
            })
            .collect();
        found.extend(batch);
    }

    let mut classes: BTreeMap<ClassKey, (SixTerm, usize)> = BTreeMap::new();
    for seq in found {
        let key = class_key(&seq);
        match classes.get_mut(&key) {
            Some((rep, count)) => {
                *count += 1;
                if lex_cmp(&seq, rep) == Ordering::Less {
                    *rep = seq;
                }
            }
            None => {
                classes.insert(key, (seq, 1));
            }
        }
    }
    Ok(classes
        .into_iter()
        .map(|((_, factors), (representative, class_size))| Completion {
            representative,
            class_size,
            invariant_factors: factors,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfLine {
    Plus,
    Minus,
}

/// Named algebras whose K-groups are taken from their cited presentations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedAlgebra {
    B1,
    J1,
    J2,
    B2,
    J3,
    B3,
    CStarF2,
    CStarF3,
}

/// Symbolic space or algebra. Spaces stand for `C_0` of the space (`C` when
/// compact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KDescriptor {
    Point,
    Euclidean(u32),
    Sphere(u32),
    HalfLine(HalfLine),
    DisjointUnion(Vec<KDescriptor>),
    /// `X x R^k`
    ProductEuclidean(Box<KDescriptor>, u32),
    /// `X x S^1`
    ProductCircle(Box<KDescriptor>),
    /// `A ⊗ K`
    Stabilized(Box<KDescriptor>),
    /// `A ⋊ R^2`
    CrossedR2(Box<KDescriptor>),
    Named(NamedAlgebra),
    /// Anything else; always rejected.
    Other(String),
}

impl fmt::Display for KDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KDescriptor::Point => write!(f, "pt"),
            KDescriptor::Euclidean(n) => write!(f, "R^{n}"),
            KDescriptor::Sphere(n) => write!(f, "S^{n}"),
            KDescriptor::HalfLine(HalfLine::Plus) => write!(f, "R+"),
            KDescriptor::HalfLine(HalfLine::Minus) => write!(f, "R-"),
            KDescriptor::DisjointUnion(parts) => {
                let p: Vec<String> = parts.iter().map(|d| d.to_string()).collect();
                write!(f, "({})", p.join(" ⊔ "))
            }
            KDescriptor::ProductEuclidean(d, k) => write!(f, "R^{k} x {d}"),
            KDescriptor::ProductCircle(d) => write!(f, "{d} x S^1"),
            KDescriptor::Stabilized(d) => write!(f, "{d} ⊗ K"),
            KDescriptor::CrossedR2(d) => write!(f, "{d} ⋊ R^2"),
            KDescriptor::Named(n) => write!(f, "{n:?}"),
            KDescriptor::Other(s) => write!(f, "{s}"),
        }
    }
}

/// Ranks of `K0` and `K1` with one label per generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGroups {
    pub k0: Vec<String>,
    pub k1: Vec<String>,
}

impl KGroups {
    pub fn ranks(&self) -> (usize, usize) {
        (self.k0.len(), self.k1.len())
    }

    fn labels(k0: &[&str], k1: &[&str]) -> Self {
        KGroups {
            k0: k0.iter().map(|s| s.to_string()).collect(),
            k1: k1.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn swap(self) -> Self {
        KGroups {
            k0: self.k1,
            k1: self.k0,
        }
    }

    fn prefix(self, p: &str) -> Self {
        let f = |v: Vec<String>| v.into_iter().map(|l| format!("{p}⊠{l}")).collect();
        KGroups {
            k0: f(self.k0),
            k1: f(self.k1),
        }
    }
}

fn named_groups(n: NamedAlgebra) -> KGroups {
    use NamedAlgebra::*;
    match n {
        B1 => KGroups::labels(&["φ0β2[1̂]", "φ0β2([p̂]-[ε1])"], &[]),
        J1 => KGroups::labels(&[], &["φ1β2([b]⊠[u+])", "φ1β2([b]⊠[u-])"]),
        J2 => KGroups::labels(&["φ0β1([b]⊠[u+])", "φ0β1([b]⊠[u-])"], &[]),
        B2 => KGroups::labels(&["φ0β1([1]⊠[u+])"], &["φ1β1([p]-[ε1])"]),
        J3 => KGroups::labels(&["φ0β2([b]⊠[1])"], &["φ1β2([b]⊠[Id])"]),
        B3 => KGroups::labels(&["φ0β2[1]"], &["φ1β2[Id]"]),
        CStarF2 => KGroups::labels(&["K0(C*(F2))"], &["K1(C*(F2))"]),
        CStarF3 => KGroups::labels(&["K0(C*(F3))"], &["K1(C*(F3))"]),
    }
}

/// K-groups of a descriptor by the rewrite rules: stabilization and crossed
/// products by `R^2` act trivially, `x R^2` is the Bott shift, `x R` swaps
/// degrees, disjoint unions add, and `x S^1` splits as `X + X x R`.
pub fn ktable(d: &KDescriptor) -> Result<KGroups, AbkError> {
    use KDescriptor::*;
    Ok(match d {
        Point => KGroups::labels(&["[1]"], &[]),
        Euclidean(0) => ktable(&Point)?,
        Euclidean(n) => ktable(&ProductEuclidean(Box::new(Point), *n))?,
        HalfLine(self::HalfLine::Plus) => KGroups::labels(&[], &["[u+]"]),
        HalfLine(self::HalfLine::Minus) => KGroups::labels(&[], &["[u-]"]),
        Sphere(0) => KGroups::labels(&["[1]", "[1']"], &[]),
        Sphere(n) => {
            // S^n = point + R^n
            let top = ktable(&Euclidean(*n))?;
            KGroups {
                k0: std::iter::once("[1]".to_string()).chain(top.k0).collect(),
                k1: if *n == 1 {
                    vec!["[Id]".to_string()]
                } else {
                    top.k1
                },
            }
        }
        DisjointUnion(parts) => {
            let mut out = KGroups::labels(&[], &[]);
            for p in parts {
                let g = ktable(p)?;
                out.k0.extend(g.k0);
                out.k1.extend(g.k1);
            }
            out
        }
        ProductEuclidean(inner, k) => {
            let mut g = ktable(inner)?;
            if matches!(**inner, Point) && *k > 0 {
                // C_0(R^k) itself: Bott elements, and [u] for the odd leftover
                let mut label = vec!["[b]"; (*k / 2) as usize].join("⊠");
                if k % 2 == 1 {
                    label = if label.is_empty() {
                        "[u]".into()
                    } else {
                        format!("{label}⊠[u]")
                    };
                    return Ok(KGroups {
                        k0: vec![],
                        k1: vec![label],
                    });
                }
                return Ok(KGroups {
                    k0: vec![label],
                    k1: vec![],
                });
            }
            for _ in 0..k / 2 {
                g = g.prefix("[b]");
            }
            if k % 2 == 1 {
                g = g.prefix("[u]").swap();
            }
            g
        }
        ProductCircle(inner) => {
            let g = ktable(inner)?;
            let tag =
                |v: &[String], t: &str| v.iter().map(|l| format!("{l}⊠{t}")).collect::<Vec<_>>();
            KGroups {
                k0: [tag(&g.k0, "[1]"), tag(&g.k1, "[Id]")].concat(),
                k1: [tag(&g.k1, "[1]"), tag(&g.k0, "[Id]")].concat(),
            }
        }
        Stabilized(inner) | CrossedR2(inner) => ktable(inner)?,
        Named(n) => named_groups(*n),
        Other(name) => {
            return Err(AbkError::OutsideCatalogue {
                descriptor: name.clone(),
                missing: format!("`{name}` (known atoms: point, R^n, S^n, R+, R-, named algebras)"),
            })
        }
    })
}

/// `C_0(R^3 ⊔ R^3) ⊗ K` written as `(R^2 x R+ ⊔ R^2 x R-) ⊗ K`.
pub fn j1_leaf_model() -> KDescriptor {
    KDescriptor::Stabilized(Box::new(KDescriptor::DisjointUnion(vec![
        KDescriptor::ProductEuclidean(Box::new(KDescriptor::HalfLine(HalfLine::Plus)), 2),
        KDescriptor::ProductEuclidean(Box::new(KDescriptor::HalfLine(HalfLine::Minus)), 2),
    ])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(rows: &[&[i64]]) -> ZMap {
        ZMap::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn check_snf(m: &ZMap) -> Snf {
        let s = snf(m);
        assert_eq!(s.u.compose(m).compose(&s.v), s.d, "U M V != D for {m}");
        assert_eq!(s.u.compose(&s.u_inv), ZMap::identity(m.rows()));
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert_eq!(w[1] % w[0], 0);
        }
        s
    }

    #[test]
    fn snf_examples() {
        let s = check_snf(&z(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.diagonal(), vec![1, 6]);
        let s = check_snf(&ZMap::zeros(2, 3));
        assert_eq!(s.u, ZMap::identity(2));
        assert_eq!(s.v, ZMap::identity(3));
        assert!(s.d.is_zero());
        let s = check_snf(&z(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]));
        assert_eq!(s.diagonal(), vec![2, 6, 12]);
        check_snf(&ZMap::zeros(0, 2));
    }

    #[test]
    fn kernel_and_image_examples() {
        let d0 = z(&[&[0, 1], &[0, 1]]);
        assert_eq!(kernel_basis(&d0), ZMap::column_vector(&[1, 0]));
        assert_eq!(image_basis(&d0), ZMap::column_vector(&[1, 1]));
        let id = ZMap::identity(3);
        assert_eq!(kernel_basis(&id).cols(), 0);
        assert!(same_subgroup(&image_basis(&id), &id));
        assert_eq!(kernel_basis(&ZMap::column_vector(&[1, 1])).cols(), 0);
        let c = cokernel(&d0);
        assert_eq!((c.free_rank, c.torsion.clone()), (1, vec![]));
        assert_eq!(cokernel(&ZMap::new(1, 1, vec![4])).torsion, vec![4]);
    }

    #[test]
    fn lattice_membership() {
        let b = z(&[&[2, 0], &[0, 3]]);
        assert!(in_lattice(&b, &[4, -3]));
        assert!(!in_lattice(&b, &[1, 0]));
        assert!(in_lattice(&ZMap::zeros(2, 0), &[0, 0]));
        assert!(!in_lattice(&ZMap::zeros(2, 0), &[0, 1]));
        assert!(same_subgroup(
            &z(&[&[1, 1], &[0, 2]]),
            &z(&[&[1, 0], &[0, 2]])
        ));
        assert!(!same_subgroup(&z(&[&[2], &[0]]), &z(&[&[1], &[0]])));
    }

    #[test]
    fn exactness_examples() {
        assert!(SixTerm::on_integers([0, 1, 0, 1, 0, 1]).is_exact());
        let s = SixTerm::on_integers([1, 1, 0, 0, 0, 0]);
        assert!(!s.exact_at(1));
        assert_eq!(SixTerm::on_integers([0; 6]).exactness(), [false; 6]);
    }

    #[test]
    fn shape_errors() {
        let maps: [ZMap; 6] = std::array::from_fn(|_| ZMap::new(1, 1, vec![0]));
        assert!(SixTerm::new([1, 2, 1, 1, 1, 1], maps).is_err());
    }

    #[test]
    fn all_integer_hexagon_has_two_classes() {
        let sols = solve_six_term(&SixTermProblem::preset("allZ", 3).unwrap()).unwrap();
        let mut patterns: Vec<Vec<i64>> = sols
            .iter()
            .map(|c| c.representative.maps.iter().map(|m| m.get(0, 0)).collect())
            .collect();
        patterns.sort();
        assert_eq!(
            patterns,
            vec![vec![0, 1, 0, 1, 0, 1], vec![1, 0, 1, 0, 1, 0]]
        );
        assert!(sols.iter().all(|c| c.class_size == 8));
    }

    #[test]
    fn gamma1_forces_rank_one_middle_groups() {
        let sols = solve_six_term(&SixTermProblem::preset("gamma1", 2).unwrap()).unwrap();
        assert_eq!(sols.len(), 1);
        let g = sols[0].representative.groups;
        assert_eq!((g[1], g[4]), (1, 1));
        let d0 = z(&[&[0, 1], &[0, 1]]);
        assert_eq!(kernel_basis(&d0).cols(), 1);
        assert_eq!(cokernel(&d0).free_rank, 1);
    }

    #[test]
    fn gamma2_and_gamma3_are_unique() {
        let sols = solve_six_term(&SixTermProblem::preset("gamma2", 1).unwrap()).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].representative.is_exact());
        let sols = solve_six_term(&SixTermProblem::preset("gamma3", 3).unwrap()).unwrap();
        assert_eq!(sols.len(), 1);
        let (d0, d1) = ext_invariant(&sols[0].representative);
        assert_eq!((d0.get(0, 0), d1.get(0, 0)), (0, 1));
        let p: Vec<i64> = sols[0]
            .representative
            .maps
            .iter()
            .map(|m| m.get(0, 0))
            .collect();
        assert_eq!(p, vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn oversized_search_is_rejected() {
        let mut p = SixTermProblem::preset("allZ", 3).unwrap();
        p.groups = [None; 6];
        p.max_rank = 3;
        match solve_six_term(&p) {
            Err(AbkError::SearchTooLarge { estimate, .. }) => assert!(estimate > SEARCH_LIMIT),
            other => panic!("expected overflow, got {other:?}"),
        }
        assert!(SixTermProblem::preset("gamma9", 3).is_err());
    }

    #[test]
    fn ktable_examples() {
        let j1 = ktable(&j1_leaf_model()).unwrap();
        assert_eq!(j1.ranks(), (0, 2));
        assert_eq!(j1.k1, vec!["[b]⊠[u+]", "[b]⊠[u-]"]);
        let s1 = ktable(&KDescriptor::Sphere(1)).unwrap();
        assert_eq!(s1, KGroups::labels(&["[1]"], &["[Id]"]));
        let b2 = ktable(&KDescriptor::Named(NamedAlgebra::B2)).unwrap();
        assert_eq!(b2.ranks(), (1, 1));
        let literal = KDescriptor::Stabilized(Box::new(KDescriptor::HalfLine(HalfLine::Plus)));
        assert_eq!(ktable(&literal).unwrap().ranks(), (0, 1));
        let r2s1 = KDescriptor::ProductCircle(Box::new(KDescriptor::Euclidean(2)));
        assert_eq!(ktable(&r2s1).unwrap().ranks(), (1, 1));
        assert_eq!(ktable(&KDescriptor::Sphere(2)).unwrap().ranks(), (2, 0));
        assert_eq!(ktable(&KDescriptor::Euclidean(3)).unwrap().ranks(), (0, 1));
        let err = ktable(&KDescriptor::Other("C*(F1)".into())).unwrap_err();
        assert!(err.to_string().contains("C*(F1)"));
    }

    #[test]
    fn ktable_ignores_stabilization_and_crossed_products() {
        for d in [
            j1_leaf_model(),
            KDescriptor::Sphere(3),
            KDescriptor::Named(NamedAlgebra::J3),
        ] {
            let base = ktable(&d).unwrap();
            assert_eq!(
                ktable(&KDescriptor::Stabilized(Box::new(d.clone()))).unwrap(),
                base
            );
            assert_eq!(ktable(&KDescriptor::CrossedR2(Box::new(d))).unwrap(), base);
        }
    }
}
