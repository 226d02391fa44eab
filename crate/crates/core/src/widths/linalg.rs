use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Thin QR with the signs fixed so that `R` has a nonnegative diagonal.
pub(crate) fn orth(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..q.ncols().min(r.nrows()) {
        if r[(k, k)] < 0.0 {
            let mut col = q.column_mut(k);
            col.neg_mut();
        }
    }
    q
}

/// Extend orthonormal columns to `k` orthonormal columns in the same space.
pub(crate) fn complete_basis(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let r = a.nrows();
    let mut cols: Vec<DVector<f64>> = (0..a.ncols()).map(|c| a.column(c).into_owned()).collect();
    let mut e = 0;
    while cols.len() < k && e < r {
        let mut v = DVector::zeros(r);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v.axpy(-d, c, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
        e += 1;
    }
    if cols.is_empty() {
        DMatrix::zeros(r, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal complement of the columns of `v`.
pub(crate) fn complement(v: &DMatrix<f64>) -> DMatrix<f64> {
    let r = v.nrows();
    let full = complete_basis(v, r);
    full.columns(v.ncols(), r - v.ncols()).into_owned()
}

/// Orthonormal basis of the span of `points` (columns of the returned
/// matrix) and all singular values of the point matrix in decreasing order.
pub(crate) fn principal_frame(points: &[DVector<f64>]) -> (DMatrix<f64>, Vec<f64>) {
    let d = points[0].len();
    let m = points.len();
    let p = DMatrix::from_fn(d, m, |r, c| points[c][r]);
    let svd = p.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&x| x > 1e-12 * smax && x > 0.0).count();
    let cols: Vec<DVector<f64>> = idx[..rank].iter().map(|&i| u.column(i).into_owned()).collect();
    let frame = if cols.is_empty() { DMatrix::zeros(d, 0) } else { orth(&DMatrix::from_columns(&cols)) };
    (frame, s)
}

/// Eigenvalues of a symmetric matrix in increasing order with matching vectors.
pub(crate) fn sym_eigen_sorted(c: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(c.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(&idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

/// Squared distance from `q` to the span of the orthonormal columns of `v`.
pub(crate) fn residual_sq(q: &DVector<f64>, v: &DMatrix<f64>) -> f64 {
    if v.ncols() == 0 {
        return q.norm_squared();
    }
    let b = v.tr_mul(q);
    (q - v * b).norm_squared()
}

/// Largest deviation of `B^T B` from the identity.
pub(crate) fn orthonormality_defect(b: &DMatrix<f64>) -> f64 {
    let g = b.tr_mul(b);
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
