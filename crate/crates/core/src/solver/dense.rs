//! Dense kernels: rank, nullspaces, generalized eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Default relative threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-9;

/// Singular values in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values above `rel_tol` times the largest.
pub fn dense_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Ratio `s[r-1] / s[r]` around rank `r`, with the trailing value floored at
/// machine precision relative to the largest singular value.
pub fn singular_gap(s: &[f64], rank: usize) -> f64 {
    if rank == 0 || s.is_empty() {
        return 0.0;
    }
    let floor = f64::EPSILON * s[0];
    let next = s.get(rank).copied().unwrap_or(0.0).max(floor);
    s[rank - 1] / next
}

/// Orthonormal basis (columns) of the nullspace of `a`.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rel_tol * smax.max(f64::MIN_POSITIVE))
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column range of a symmetric positive
/// semidefinite Gram matrix's generating set: returns `C` such that the
/// combinations `G`-orthonormal, i.e. `C^T G C = I`, dropping directions
/// with eigenvalue below `rel_tol` times the largest.
pub fn gram_orthonormalize(gram: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = gram.nrows();
    let eig = SymmetricEigen::new(gram.clone());
    let emax = eig.eigenvalues.max();
    let mut idx: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > rel_tol * emax).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<DVector<f64>> = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Smallest eigenvalue of `A x = lambda B x` above `zero_tol` (absolute),
/// with `B` symmetric positive definite.
pub fn generalized_eig_min(a: &DMatrix<f64>, b: &DMatrix<f64>, zero_tol: f64) -> Option<f64> {
    let l = b.clone().cholesky()?.unpack();
    let linv = l.clone().try_inverse()?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    SymmetricEigen::new(c)
        .eigenvalues
        .iter()
        .copied()
        .filter(|&e| e > zero_tol)
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks() {
        assert_eq!(dense_rank(&DMatrix::identity(5, 5), RANK_TOL), 5);
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let v = DVector::from_vec(vec![0.5, -1.0, 2.0, 4.0]);
        assert_eq!(dense_rank(&(&u * v.transpose()), RANK_TOL), 1);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0]);
        let n = nullspace(&a, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&a * &n).amax() < 1e-14);
        assert!((n.transpose() * &n - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn generalized_eigen() {
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert!((generalized_eig_min(&b, &b, 1e-10).unwrap() - 1.0).abs() < 1e-13);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]);
        let i = DMatrix::identity(2, 2);
        assert!((generalized_eig_min(&a, &i, 1e-10).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gram_orthonormalization() {
        let v = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, 1.0, 1.0, 3.0, 4.0]);
        let g = v.transpose() * &v;
        let c = gram_orthonormalize(&g, 1e-12);
        assert_eq!(c.ncols(), 2);
        assert!((c.transpose() * &g * &c - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
