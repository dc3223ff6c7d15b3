//! Small dense Hermitian helpers on top of nalgebra.

use nalgebra::linalg::{SymmetricEigen, SVD};

use crate::{CMat, Error, Result, C64};

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted
/// ascending; eigenvectors are the matching columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // symmetrize so roundoff in the lower triangle does not leak in
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

fn spectral_apply(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut d = CMat::zeros(n, n);
    for (i, v) in vals.iter().enumerate() {
        d[(i, i)] = C64::new(f(*v), 0.0);
    }
    &vecs * d * vecs.adjoint()
}

/// `m^{-1/2}` for Hermitian positive definite `m`. Eigenvalues below `floor`
/// are reported as [`Error::SingularGram`].
pub fn inv_sqrt_hermitian(m: &CMat, floor: f64) -> Result<CMat> {
    let (vals, _) = hermitian_eigen(m);
    if let Some(&min) = vals.first() {
        if min < floor {
            return Err(Error::SingularGram { min_eig: min });
        }
    }
    Ok(spectral_apply(m, |v| 1.0 / v.sqrt()))
}

/// Principal square root of a Hermitian positive semidefinite matrix;
/// negative roundoff eigenvalues are clamped to zero.
pub fn sqrt_hermitian(m: &CMat) -> CMat {
    spectral_apply(m, |v| v.max(0.0).sqrt())
}

/// Number of singular values above `rel_threshold * max(1, largest)`.
pub fn numeric_rank(m: &CMat, rel_threshold: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = SVD::new(m.clone(), false, false);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_threshold * largest.max(1.0);
    svd.singular_values.iter().filter(|&&s| s > cut).count()
}

/// Spectral norm.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    SVD::new(m.clone(), false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Entrywise transpose without conjugation.
pub fn transpose(m: &CMat) -> CMat {
    m.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_of_two_by_two() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let (vals, _) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_root_squares_to_inverse() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.3), c(0.5, -0.3), c(1.0, 0.0)]);
        let r = inv_sqrt_hermitian(&m, 1e-12).unwrap();
        let prod = &r * &m * &r;
        assert!((prod - CMat::identity(2, 2)).norm() < 1e-13);
    }

    #[test]
    fn singular_gram_rejected() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(inv_sqrt_hermitian(&m, 1e-12), Err(Error::SingularGram { .. })));
    }
}
