use super::sparse::{dot, norm2, SparseMatrix};
use crate::error::{Error, Result};

/// Jacobi-preconditioned conjugate gradients.
///
/// Stops when `||A x - rhs|| <= tol * ||rhs||`. A non-positive curvature `p^T A p`
/// is reported as [`Error::NotPositiveDefinite`].
pub fn solve_spd(a: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let max_iter = (10 * a.nrows).max(100);
    solve_spd_with(a, rhs, tol, max_iter).map(|(x, _)| x)
}

/// As [`solve_spd`] with an explicit iteration cap; also returns the relative residual history.
pub fn solve_spd_with(a: &SparseMatrix, rhs: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.nrows;
    assert_eq!(rhs.len(), n);
    let bnorm = norm2(rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, vec![0.0]));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = vec![1.0];
    for it in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { iteration: it, curvature: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= tol {
            return Ok((x, history));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let final_residual = *history.last().unwrap();
    Err(Error::NoConvergence { iterations: max_iter, final_residual, history })
}
