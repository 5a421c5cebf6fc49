//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, ascending.
pub fn sym_eig(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let s = (a + a.transpose()) * 0.5;
    let e = SymmetricEigen::new(s);
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

pub fn sym_eigvals(a: &DMatrix<f64>) -> Vec<f64> {
    sym_eig(a).0
}

/// 1-norm condition number via an explicit inverse (fine for `N ≲ 30`).
pub fn cond1(a: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        (0..m.ncols()).map(|c| m.column(c).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    };
    match a.clone().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Orthonormal basis of the column span (rank decided relative to `tol`).
pub fn orth(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    for col in a.column_iter() {
        let mut v = col.clone_owned();
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > tol * scale {
            basis.push(v / nv);
        }
    }
    if basis.is_empty() {
        return DMatrix::zeros(a.nrows(), 0);
    }
    DMatrix::from_columns(&basis)
}

/// Orthonormal basis of the orthogonal complement of `q`'s columns (`q` orthonormal).
pub fn complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let mut basis: Vec<DVector<f64>> = q.column_iter().map(|c| c.clone_owned()).collect();
    let start = basis.len();
    for i in 0..n {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            basis.push(v / nv);
        }
        if basis.len() == n {
            break;
        }
    }
    let rest = &basis[start..];
    if rest.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(rest)
}

/// Least squares `min ‖A x − b‖` through the SVD, with the condition number.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let x = svd.solve(b, smax * 1e-15).unwrap_or_else(|_| DVector::zeros(a.ncols()));
    (x, if smin > 0.0 { smax / smin } else { f64::INFINITY })
}

/// Least-squares fit with per-parameter standard errors.
#[derive(Clone, Debug)]
pub struct LsqFit {
    pub x: DVector<f64>,
    pub stderr: DVector<f64>,
    pub cond: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// `min ‖A x − b‖` with columns equilibrated first; standard errors from
/// `σ² (AᵀA)⁻¹` with `σ²` the residual variance.
pub fn lsq_fit(a: &DMatrix<f64>, b: &DVector<f64>) -> LsqFit {
    let (nr, nc) = a.shape();
    let scales: Vec<f64> = (0..nc).map(|c| a.column(c).norm().max(1e-300)).collect();
    let mut an = a.clone();
    for (c, s) in scales.iter().enumerate() {
        an.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = an.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let y = svd.solve(b, smax * 1e-15).unwrap_or_else(|_| DVector::zeros(nc));
    let r = &an * &y - b;
    let dof = nr.saturating_sub(nc).max(1) as f64;
    let sigma2 = r.norm_squared() / dof;
    let v = svd.v_t.as_ref().expect("requested").transpose();
    let mut stderr = DVector::zeros(nc);
    for c in 0..nc {
        let mut acc = 0.0;
        for (k, sv) in svd.singular_values.iter().enumerate() {
            if *sv > smax * 1e-15 {
                acc += (v[(c, k)] / sv).powi(2);
            }
        }
        stderr[c] = (sigma2 * acc).sqrt() / scales[c];
    }
    let x = DVector::from_iterator(nc, y.iter().zip(&scales).map(|(y, s)| y / s));
    LsqFit { x, stderr, cond: if smin > 0.0 { smax / smin } else { f64::INFINITY }, rms: (r.norm_squared() / nr as f64).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthogonal() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let q = orth(&a, 1e-12);
        let c = complement(&q);
        assert_eq!(c.ncols(), 2);
        assert!((q.transpose() * &c).amax() < 1e-14);
        assert!((c.transpose() * &c - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let (v, q) = sym_eig(&a);
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let l = DMatrix::from_diagonal(&DVector::from_vec(v));
        assert!((&q * l * q.transpose() - a).amax() < 1e-12);
    }

    #[test]
    fn lsq_fit_recovers_line() {
        let a = DMatrix::from_fn(5, 2, |r, c| if c == 0 { 1.0 } else { r as f64 * 100.0 });
        let b = DVector::from_fn(5, |r, _| 2.0 + 0.03 * r as f64 * 100.0);
        let f = lsq_fit(&a, &b);
        assert!((f.x[0] - 2.0).abs() < 1e-12 && (f.x[1] - 0.03).abs() < 1e-14);
        assert!(f.rms < 1e-12 && f.stderr.amax() < 1e-10);
    }
}
