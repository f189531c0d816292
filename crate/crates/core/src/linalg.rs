//! Dense complex linear algebra helpers built on nalgebra's SVD.

use nalgebra::{DMatrix, DVector};

use crate::coeff::C64;

pub type CMat = DMatrix<C64>;

/// Thin SVD with singular values sorted in descending order.
///
/// Returns `(U, σ, V)` with `A = U diag(σ) Vᴴ`, `U: rows × k`, `V: cols × k`,
/// `k = min(rows, cols)`.
pub fn svd_sorted(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (CMat::zeros(rows, 0), Vec::new(), CMat::zeros(cols, 0));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = CMat::from_fn(rows, k, |r, c| u[(r, order[c])]);
    let v_sorted = CMat::from_fn(cols, k, |r, c| v[(r, order[c])]);
    (u_sorted, s, v_sorted)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Largest singular value, 0 for empty matrices.
pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the column space, keeping directions with `σ > tol`.
pub fn range(a: &CMat, tol: f64) -> CMat {
    let (u, s, _) = svd_sorted(a);
    let rank = s.iter().take_while(|&&x| x > tol).count();
    u.columns(0, rank).into_owned()
}

/// Orthonormal basis of `{x : ‖Ax‖ ≤ tol‖x‖}` (numerical null space).
pub fn null_space(a: &CMat, tol: f64) -> CMat {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    if rows == 0 {
        return CMat::identity(cols, cols);
    }
    // Pad with zero rows so the SVD returns a full right basis.
    let padded = if rows < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (_, s, v) = svd_sorted(&padded);
    let rank = s.iter().take_while(|&&x| x > tol).count();
    v.columns(rank, cols - rank).into_owned()
}

/// `X − Q(QᴴX)` for `Q` with orthonormal columns.
pub fn project_out(q: &CMat, x: &CMat) -> CMat {
    if q.ncols() == 0 {
        return x.clone();
    }
    x - q * (q.adjoint() * x)
}

pub fn hstack(blocks: &[&CMat], rows: usize) -> CMat {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn from_columns(cols: &[DVector<C64>], rows: usize) -> CMat {
    let mut out = CMat::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Max-entry deviation of `QᴴQ` from the identity.
pub fn orthonormality_defect(q: &CMat) -> f64 {
    let g = q.adjoint() * q;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn null_space_of_wide_matrix() {
        // [1 1 0] has a two-dimensional null space.
        let a = CMat::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let n = null_space(&a, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((a * &n).norm() < 1e-12);
        assert!(orthonormality_defect(&n) < 1e-12);
    }

    #[test]
    fn range_drops_dependent_columns() {
        let a = CMat::from_row_slice(2, 3, &[c(1.0), c(0.0), c(1.0), c(0.0), c(1.0), c(1.0)]);
        assert_eq!(range(&a, 1e-12).ncols(), 2);
        let b = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        assert_eq!(range(&b, 1e-12).ncols(), 1);
    }

    #[test]
    fn sorted_svd_reconstructs() {
        let a = CMat::from_fn(4, 3, |i, j| C64::new((i * 3 + j) as f64, (i as f64) - (j as f64)));
        let (u, s, v) = svd_sorted(&a);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let sd = CMat::from_diagonal(&DVector::from_iterator(3, s.iter().map(|&x| c(x))));
        assert!((u * sd * v.adjoint() - a).norm() < 1e-10);
    }
}
