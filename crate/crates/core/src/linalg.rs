//! Small dense helpers shared by the orbit and foliation checks.

use nalgebra::DMatrix;

/// Number of singular values above `rel_tol * max(1, sigma_max)`.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let cutoff = rel_tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let cutoff = rel_tol * svd.singular_values.max().max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Sine of the largest principal angle between two subspaces given by
/// spanning columns; 1 when their dimensions differ.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let qa = column_space(a, rel_tol);
    let qb = column_space(b, rel_tol);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    let pa = &qa * qa.transpose();
    let pb = &qb * qb.transpose();
    let diff = pa - pb;
    diff.singular_values().max()
}

/// Central-difference Jacobian of `f: R^n -> R^m` at `x`, differentiating only
/// along the coordinates listed in `free`.
pub fn fd_jacobian(
    f: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    free: &[usize],
    h: f64,
) -> DMatrix<f64> {
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, free.len());
    let mut xp = x.to_vec();
    for (col, &i) in free.iter().enumerate() {
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        for r in 0..m {
            jac[(r, col)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_distance() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(numeric_rank(&m, 1e-8), 1);
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert!(subspace_distance(&m, &a, 1e-8) < 1e-14);
        let b = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 0.0]);
        assert!((subspace_distance(&a, &b, 1e-8) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let j = fd_jacobian(
            |x| vec![2.0 * x[0] + x[2], x[1]],
            &[0.3, 0.1, -1.0],
            &[0, 2],
            1e-5,
        );
        assert!((j[(0, 0)] - 2.0).abs() < 1e-9);
        assert!((j[(0, 1)] - 1.0).abs() < 1e-9);
        assert!(j[(1, 0)].abs() < 1e-12);
    }
}
