//! Block factorization of saddle-point systems `[A B^T; B 0]`.
//!
//! The velocity block is factored by envelope Cholesky. The pressure Schur complement
//! `S = B A^-1 B^T` is formed explicitly and factored by dense LU with partial pivoting
//! when the pressure space is small; larger pressure spaces use preconditioned
//! conjugate gradients on `S`.

use super::cholesky::EnvelopeCholesky;
use super::dense::DenseLu;
use super::sparse::{dot, norm2, SparseMatrix, TripletBuilder};
use crate::error::{Error, Result};

/// Pressure spaces up to this size get an explicit Schur complement.
pub const DIRECT_SCHUR_LIMIT: usize = 1500;

const PIVOT_TOL: f64 = 1e-10;
/// Default relative residual bound of [`SaddleFactorization::solve`].
pub const RESIDUAL_BOUND: f64 = 1e-10;

/// Saddle system with SPD block `a` (n_u x n_u) and constraint block `b` (n_p x n_u).
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
}

impl SaddleSystem {
    pub fn n_u(&self) -> usize {
        self.a.nrows
    }

    pub fn n_p(&self) -> usize {
        self.b.nrows
    }

    pub fn dim(&self) -> usize {
        self.n_u() + self.n_p()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (u, p) = x.split_at(self.n_u());
        let mut top = self.a.mul_vec(u);
        let btp = self.b.mul_transpose_vec(p);
        top.iter_mut().zip(&btp).for_each(|(t, v)| *t += v);
        top.extend(self.b.mul_vec(u));
        top
    }

    /// Assembled block matrix, for export.
    pub fn to_block_matrix(&self) -> SparseMatrix {
        let nu = self.n_u();
        let mut t = TripletBuilder::with_capacity(self.dim(), self.dim(), self.a.nnz() + 2 * self.b.nnz());
        for i in 0..nu {
            for (j, v) in self.a.row(i) {
                t.push(i, j, v);
            }
        }
        for i in 0..self.n_p() {
            for (j, v) in self.b.row(i) {
                t.push(nu + i, j, v);
                t.push(j, nu + i, v);
            }
        }
        t.build()
    }
}

enum SchurSolver {
    Direct(DenseLu),
    Iterative { precond: Vec<f64> },
}

/// Reusable factorization of a [`SaddleSystem`].
pub struct SaddleFactorization {
    system: SaddleSystem,
    bt: SparseMatrix,
    chol: EnvelopeCholesky,
    schur: SchurSolver,
    tol: f64,
}

impl SaddleFactorization {
    pub fn new(system: SaddleSystem) -> Result<Self> {
        Self::with_limit(system, DIRECT_SCHUR_LIMIT)
    }

    pub fn with_limit(system: SaddleSystem, direct_limit: usize) -> Result<Self> {
        let chol = EnvelopeCholesky::factor(&system.a)?;
        let bt = system.b.transpose();
        let (nu, np) = (system.n_u(), system.n_p());
        let schur = if np <= direct_limit {
            let mut s = vec![0.0; np * np];
            let mut col = vec![0.0; nu];
            for j in 0..np {
                col.iter_mut().for_each(|c| *c = 0.0);
                for (k, v) in system.b.row(j) {
                    col[k] = v;
                }
                let x = chol.solve(&col);
                let sj = system.b.mul_vec(&x);
                for i in 0..np {
                    s[i * np + j] = sj[i];
                }
            }
            let lu = DenseLu::factor(s, np, PIVOT_TOL).map_err(|e| match e {
                Error::SingularPivot { row } => Error::SingularPivot { row: nu + row },
                other => other,
            })?;
            SchurSolver::Direct(lu)
        } else {
            let diag_a = system.a.diagonal();
            let precond = (0..np)
                .map(|j| {
                    let d: f64 = system.b.row(j).map(|(k, v)| v * v / diag_a[k]).sum();
                    if d > 0.0 {
                        1.0 / d
                    } else {
                        1.0
                    }
                })
                .collect();
            SchurSolver::Iterative { precond }
        };
        Ok(SaddleFactorization { system, bt, chol, schur, tol: RESIDUAL_BOUND })
    }

    /// Sets the relative residual bound used by [`solve`](Self::solve).
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn system(&self) -> &SaddleSystem {
        &self.system
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.schur, SchurSolver::Direct(_))
    }

    fn schur_apply(&self, p: &[f64]) -> Vec<f64> {
        let x = self.chol.solve(&self.bt.mul_vec(p));
        self.system.b.mul_vec(&x)
    }

    fn solve_schur(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match &self.schur {
            SchurSolver::Direct(lu) => Ok(lu.solve(rhs)),
            SchurSolver::Iterative { precond } => {
                let np = rhs.len();
                let bnorm = norm2(rhs);
                let mut x = vec![0.0; np];
                if bnorm == 0.0 {
                    return Ok(x);
                }
                let mut r = rhs.to_vec();
                let mut z: Vec<f64> = r.iter().zip(precond).map(|(a, b)| a * b).collect();
                let mut p = z.clone();
                let mut rz = dot(&r, &z);
                let mut history = vec![1.0];
                let max_iter = 2000.max(np);
                for it in 0..max_iter {
                    let sp = self.schur_apply(&p);
                    let psp = dot(&p, &sp);
                    if !(psp > 0.0) {
                        return Err(Error::NotPositiveDefinite { iteration: it, curvature: psp });
                    }
                    let alpha = rz / psp;
                    for i in 0..np {
                        x[i] += alpha * p[i];
                        r[i] -= alpha * sp[i];
                    }
                    let rel = norm2(&r) / bnorm;
                    history.push(rel);
                    if rel <= 1e-14 {
                        return Ok(x);
                    }
                    for i in 0..np {
                        z[i] = r[i] * precond[i];
                    }
                    let rz_new = dot(&r, &z);
                    let beta = rz_new / rz;
                    rz = rz_new;
                    for i in 0..np {
                        p[i] = z[i] + beta * p[i];
                    }
                }
                // stagnation near machine precision is accepted; the outer residual check decides
                if *history.last().unwrap() < 1e-11 {
                    return Ok(x);
                }
                Err(Error::NoConvergence {
                    iterations: max_iter,
                    final_residual: *history.last().unwrap(),
                    history,
                })
            }
        }
    }

    fn solve_once(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let nu = self.system.n_u();
        let (f, g) = rhs.split_at(nu);
        let y = self.chol.solve(f);
        let mut srhs = self.system.b.mul_vec(&y);
        srhs.iter_mut().zip(g).for_each(|(s, g)| *s -= g);
        let p = self.solve_schur(&srhs)?;
        let btp = self.bt.mul_vec(&p);
        let f2: Vec<f64> = f.iter().zip(&btp).map(|(a, b)| a - b).collect();
        let mut x = self.chol.solve(&f2);
        x.extend(p);
        Ok(x)
    }

    /// Solves `K x = rhs` with `||K x - rhs|| <= tol ||rhs||`, refining iteratively if needed.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.system.dim());
        let bnorm = norm2(rhs);
        if bnorm == 0.0 {
            return Ok(vec![0.0; rhs.len()]);
        }
        let mut x = self.solve_once(rhs)?;
        let mut res = f64::INFINITY;
        for _ in 0..3 {
            let kx = self.system.apply(&x);
            let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
            res = norm2(&r);
            if res <= self.tol * bnorm {
                return Ok(x);
            }
            let dx = self.solve_once(&r)?;
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
        }
        let kx = self.system.apply(&x);
        let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
        let final_res = norm2(&r).min(res);
        if final_res <= self.tol * bnorm {
            Ok(x)
        } else {
            Err(Error::SaddleResidual { residual: final_res, bound: self.tol * bnorm })
        }
    }
}

/// One-shot factor and solve.
pub fn solve_saddle(system: &SaddleSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    SaddleFactorization::new(system.clone())?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_system() -> SaddleSystem {
        let a = SparseMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        let b = SparseMatrix::from_dense(&[vec![1.0, -1.0, 0.5]]);
        SaddleSystem { a, b }
    }

    #[test]
    fn zero_rhs() {
        let x = solve_saddle(&small_system(), &[0.0; 4]).unwrap();
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn direct_and_iterative_agree() {
        let sys = small_system();
        let rhs = [1.0, 2.0, -1.0, 0.3];
        let d = SaddleFactorization::with_limit(sys.clone(), 10).unwrap();
        let i = SaddleFactorization::with_limit(sys.clone(), 0).unwrap();
        assert!(d.is_direct() && !i.is_direct());
        let xd = d.solve(&rhs).unwrap();
        let xi = i.solve(&rhs).unwrap();
        let r = sys.apply(&xd);
        for (a, b) in r.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-13);
        }
        for (a, b) in xd.iter().zip(&xi) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_constraint_detected() {
        let mut sys = small_system();
        sys.b = SparseMatrix::from_dense(&[vec![1.0, -1.0, 0.5], vec![2.0, -2.0, 1.0]]);
        match SaddleFactorization::new(sys) {
            Err(Error::SingularPivot { row }) => assert!(row >= 3),
            Err(e) => panic!("{e}"),
            Ok(_) => panic!("expected singular pivot"),
        }
    }

    #[test]
    fn block_matrix_matches_apply() {
        let sys = small_system();
        let k = sys.to_block_matrix();
        let x = [0.3, -1.0, 2.0, 0.7];
        assert_eq!(k.mul_vec(&x), sys.apply(&x));
        assert_eq!(k.asymmetry(), 0.0);
    }
}
