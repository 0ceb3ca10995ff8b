//! Matrix exponential of small dense real matrices.
//!
//! Two independent routes: a degree-13 Padé approximant with scaling and
//! squaring for arbitrary square matrices, and closed-form exponentials of
//! the block shapes that occur in the MD5 `ad` matrices (scalar, Jordan and
//! rotation-dilation blocks).

use nalgebra::{DMatrix, Matrix2, SMatrix};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate
/// to double precision.
const THETA13: f64 = 5.371920351148152;

/// `exp(A)` by Padé(13) scaling and squaring.
pub fn expm_pade<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let d = expm_pade_dyn(&DMatrix::from_column_slice(N, N, a.as_slice()));
    SMatrix::from_column_slice(d.as_slice())
}

pub fn expm_pade_dyn(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix exponential needs a square matrix");
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// A diagonal block of a block-diagonal matrix with known exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    /// `[lambda]`
    Scalar(f64),
    /// `lambda I + N` of the given size, `N` the upper shift.
    Jordan { lambda: f64, size: usize },
    /// `[[re, -im], [im, re]]`, i.e. multiplication by `re + i im`.
    Rotation { re: f64, im: f64 },
}

impl Block {
    pub fn size(&self) -> usize {
        match self {
            Block::Scalar(_) => 1,
            Block::Jordan { size, .. } => *size,
            Block::Rotation { .. } => 2,
        }
    }
}

/// `exp(a B)` for a block-diagonal `B` given by `blocks` (sizes summing to N).
pub fn expm_blocks<const N: usize>(blocks: &[Block], a: f64) -> SMatrix<f64, N, N> {
    let mut out = SMatrix::<f64, N, N>::zeros();
    let mut at = 0;
    for block in blocks {
        match *block {
            Block::Scalar(l) => out[(at, at)] = (a * l).exp(),
            Block::Jordan { lambda, size } => {
                let e = (a * lambda).exp();
                // exp(a N) has (a^k / k!) on the k-th superdiagonal
                let mut coeff = e;
                for k in 0..size {
                    for i in 0..size - k {
                        out[(at + i, at + i + k)] = coeff;
                    }
                    coeff *= a / (k as f64 + 1.0);
                }
            }
            Block::Rotation { re, im } => {
                let e = (a * re).exp();
                let (s, c) = (a * im).sin_cos();
                let r = Matrix2::new(c, -s, s, c) * e;
                out.fixed_view_mut::<2, 2>(at, at).copy_from(&r);
            }
        }
        at += block.size();
    }
    assert_eq!(at, N, "block sizes must add up to the matrix size");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;

    #[test]
    fn zero_matrix_gives_identity() {
        let z = Matrix4::<f64>::zeros();
        assert_eq!(expm_pade(&z), Matrix4::identity());
    }

    #[test]
    fn pade_matches_blocks_on_jordan_and_rotation() {
        let blocks = [
            Block::Rotation { re: 0.3, im: 1.2 },
            Block::Jordan {
                lambda: -0.4,
                size: 2,
            },
        ];
        for &a in &[-3.0, -0.5, 0.0, 0.7, 3.0] {
            let closed = expm_blocks::<4>(&blocks, a);
            let mut m = Matrix4::zeros();
            m[(0, 0)] = 0.3;
            m[(0, 1)] = -1.2;
            m[(1, 0)] = 1.2;
            m[(1, 1)] = 0.3;
            m[(2, 2)] = -0.4;
            m[(2, 3)] = 1.0;
            m[(3, 3)] = -0.4;
            let pade = expm_pade(&(m * a));
            let rel = (closed - pade).amax() / closed.amax();
            assert!(rel < 1e-12, "a = {a}: rel {rel}");
        }
    }

    #[test]
    fn pade_agrees_with_nalgebra_exp() {
        let m = Matrix4::new(
            1.0, 1.0, 0.0, 0.0, //
            0.0, 1.0, 1.0, 0.0, //
            0.0, 0.0, 1.0, 1.0, //
            0.0, 0.0, 0.0, 1.0,
        ) * 2.7;
        let ours = expm_pade(&m);
        let theirs = m.exp();
        assert!((ours - theirs).amax() / theirs.amax() < 1e-12);
    }

    #[test]
    fn four_by_four_jordan_closed_form() {
        let e = expm_blocks::<4>(
            &[Block::Jordan {
                lambda: 1.0,
                size: 4,
            }],
            2.0,
        );
        let ea = 2f64.exp();
        assert!((e[(0, 3)] - ea * 8.0 / 6.0).abs() < 1e-12);
        assert!((e[(1, 3)] - ea * 2.0).abs() < 1e-12);
        assert_eq!(e[(3, 0)], 0.0);
    }
}
