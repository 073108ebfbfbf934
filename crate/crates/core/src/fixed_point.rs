//! The constructive scheme: an inner contraction iteration for momentum with the
//! temperature frozen, a linearized heat solve, and the outer Picard loop that
//! composes them.
//!
//! Temperatures are split as `theta = theta_D + vartheta` where `theta_D` is a
//! closed-form lifting interpolated onto the Q2 space and `vartheta` vanishes on
//! the walls.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ScalarFn, VectorFn};
use crate::forms;
use crate::linsolve::{norm2, EnvelopeCholesky, SaddleFactorization, SaddleSystem, SparseMatrix, RESIDUAL_BOUND};
use crate::material::MaterialModel;
use crate::norms::h1_norm;
use crate::space::DiscreteSpace;

/// Stokes operator `[A -D^T; -D 0]` restricted to the free velocity dofs, factored once.
pub struct StokesOperator {
    free: Vec<usize>,
    n_velocity: usize,
    factor: SaddleFactorization,
}

impl StokesOperator {
    pub fn new(space: &DiscreteSpace, model: &MaterialModel) -> Result<Self> {
        Self::with_tolerance(space, model, RESIDUAL_BOUND)
    }

    /// As [`new`](Self::new) with relative residual bound `tol` for every solve.
    pub fn with_tolerance(space: &DiscreteSpace, model: &MaterialModel, tol: f64) -> Result<Self> {
        let a = forms::assemble_a(space, model).matrix;
        let d = forms::assemble_divergence(space).matrix;
        let n = space.n_scalar();
        let free: Vec<usize> = (0..3)
            .flat_map(|c| space.free_nodes().iter().map(move |&i| c * n + i))
            .collect();
        let all_p: Vec<usize> = (0..space.n_pressure()).collect();
        let system = SaddleSystem { a: a.submatrix(&free, &free), b: d.submatrix(&all_p, &free).scaled(-1.0) };
        Ok(StokesOperator { free, n_velocity: 3 * n, factor: SaddleFactorization::new(system)?.with_tolerance(tol) })
    }

    /// Global velocity dofs that are not on the walls.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn factorization(&self) -> &SaddleFactorization {
        &self.factor
    }

    /// Solves `a(u, v) - (P, div v) = <load, v>`, `(q, div u) = 0` with no-slip walls.
    /// `load` is indexed by global velocity dofs; wall rows are ignored.
    pub fn solve(&self, load: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let np = self.factor.system().n_p();
        let mut rhs: Vec<f64> = self.free.iter().map(|&i| load[i]).collect();
        rhs.extend(std::iter::repeat(0.0).take(np));
        let x = self.factor.solve(&rhs)?;
        let mut u = vec![0.0; self.n_velocity];
        for (k, &i) in self.free.iter().enumerate() {
            u[i] = x[k];
        }
        Ok((u, x[self.free.len()..].to_vec()))
    }
}

/// Conduction operator on the free temperature nodes, factored once.
pub struct HeatOperator {
    kappa: SparseMatrix,
    free: Vec<usize>,
    chol: EnvelopeCholesky,
}

impl HeatOperator {
    pub fn new(space: &DiscreteSpace, model: &MaterialModel) -> Result<Self> {
        let kappa = forms::assemble_kappa(space, model).matrix;
        let free = space.free_nodes().to_vec();
        let chol = EnvelopeCholesky::factor(&kappa.submatrix(&free, &free))?;
        Ok(HeatOperator { kappa, free, chol })
    }

    /// Full conduction matrix (all nodes).
    pub fn kappa(&self) -> &SparseMatrix {
        &self.kappa
    }

    /// Solves `kappa(vartheta, phi) = <load, phi>` for `vartheta` vanishing on the walls.
    pub fn solve(&self, load: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.free.iter().map(|&i| load[i]).collect();
        let x = self.chol.solve(&rhs);
        let mut out = vec![0.0; self.kappa.nrows];
        for (k, &i) in self.free.iter().enumerate() {
            out[i] = x[k];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    /// Outer relaxation factor in (0, 1]; 1 is the plain composition.
    pub damping: f64,
    /// Relative residual bound of every saddle-point solve.
    pub linear_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { inner_tol: 1e-12, inner_max_iter: 100, outer_tol: 1e-10, outer_max_iter: 50, damping: 1.0, linear_tol: RESIDUAL_BOUND }
    }
}

/// Data of one coupled problem.
#[derive(Clone)]
pub struct Problem {
    pub model: MaterialModel,
    /// Body force per unit mass.
    pub g: VectorFn,
    /// Boundary temperature lifting.
    pub theta_d: ScalarFn,
    /// Extra momentum source (force per unit volume), for manufactured solutions.
    pub momentum_source: Option<VectorFn>,
    /// Extra heat source, for manufactured solutions.
    pub heat_source: Option<ScalarFn>,
    pub settings: SolverSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct State {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// Full temperature `theta_D + vartheta`.
    pub theta: Vec<f64>,
    /// Wall-homogeneous part of the temperature.
    pub vartheta: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InnerTrace {
    /// `||w_{k+1} - w_k||_{H^1}` for k = 0, 1, ...
    pub increments: Vec<f64>,
    /// Empirical contraction ratios; entry `k - 1` is the ratio of increments k and k - 1.
    pub ratios: Vec<f64>,
}

impl InnerTrace {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    /// Largest ratio with index k >= 2 (0 when there is none).
    pub fn max_ratio_from_second(&self) -> f64 {
        self.ratios.iter().skip(1).copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterRecord {
    pub iter: usize,
    pub inner: InnerTrace,
    pub d_theta_norm: f64,
    pub r_momentum: f64,
    pub r_heat: f64,
    pub flow: FlowMeasure,
    /// `int alpha1 nu e(u):e(u)` at this iterate.
    pub dissipation: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<OuterRecord>,
    pub converged: bool,
}

impl IterationTrace {
    /// CSV with columns iter, inner_iters, beta_hat, d_theta_norm, r_momentum, r_heat,
    /// min_flux, inflow_fraction. `beta_hat` is the largest inner ratio from k = 2 on.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,inner_iters,beta_hat,d_theta_norm,r_momentum,r_heat,min_flux,inflow_fraction\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.iter,
                r.inner.iterations(),
                r.inner.max_ratio_from_second(),
                r.d_theta_norm,
                r.r_momentum,
                r.r_heat,
                r.flow.min_flux,
                r.flow.inflow_fraction
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FaceFlow {
    pub min_flux: f64,
    pub inflow_fraction: f64,
}

/// Backflow diagnostics on the open ends; `faces[0]` is x = 0, `faces[1]` is x = Lx.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FlowMeasure {
    pub min_flux: f64,
    pub inflow_fraction: f64,
    pub faces: [FaceFlow; 2],
}

/// Factored operators plus problem data.
pub struct FixedPointSolver<'a> {
    pub space: &'a DiscreteSpace,
    pub problem: Problem,
    pub stokes: StokesOperator,
    pub heat: HeatOperator,
    /// Interpolated boundary temperature lifting.
    pub theta_d: Vec<f64>,
    base_momentum: Vec<f64>,
    base_heat: Vec<f64>,
}

impl<'a> FixedPointSolver<'a> {
    pub fn new(space: &'a DiscreteSpace, problem: Problem) -> Result<Self> {
        let stokes = StokesOperator::with_tolerance(space, &problem.model, problem.settings.linear_tol)?;
        let heat = HeatOperator::new(space, &problem.model)?;
        let theta_d = space.interpolate_scalar(|p| (problem.theta_d)(p));
        let base_momentum = match &problem.momentum_source {
            Some(f) => forms::vector_source_load(space, &|p| f(p)).values,
            None => vec![0.0; space.n_velocity()],
        };
        let mut base_heat = heat.kappa.mul_vec(&theta_d);
        base_heat.iter_mut().for_each(|v| *v = -*v);
        if let Some(h) = &problem.heat_source {
            let hl = forms::scalar_source_load(space, &|p| h(p)).values;
            base_heat.iter_mut().zip(&hl).for_each(|(a, b)| *a += b);
        }
        Ok(FixedPointSolver { space, problem, stokes, heat, theta_d, base_momentum, base_heat })
    }

    fn full_theta(&self, vartheta: &[f64]) -> Vec<f64> {
        vartheta.iter().zip(&self.theta_d).map(|(a, b)| a + b).collect()
    }

    fn momentum_load(&self, theta: &[f64]) -> Vec<f64> {
        let g = &self.problem.g;
        let mut load = forms::assemble_buoyancy(self.space, &self.problem.model, theta, &|p| g(p)).values;
        load.iter_mut().zip(&self.base_momentum).for_each(|(a, b)| *a += b);
        load
    }

    /// Iterates `w_{k+1} = K(w_k)` where `a(w_{k+1}, v) - (P, div v) = (rho(theta) g, v) - b(w_k, w_k, v)`
    /// with `theta = theta_frozen + theta_D`, until the H^1 increment drops to `tol`.
    pub fn inner_momentum_solve(
        &self,
        theta_frozen: &[f64],
        u_init: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, InnerTrace)> {
        let theta = self.full_theta(theta_frozen);
        let base = self.momentum_load(&theta);
        let model = &self.problem.model;
        let mut trace = InnerTrace::default();
        let mut u = u_init.to_vec();
        let mut streak = 0;
        for _ in 0..max_iter {
            let conv = forms::convection_load(self.space, model, &u, &u).values;
            let load: Vec<f64> = base.iter().zip(&conv).map(|(a, b)| a - b).collect();
            let (w, p) = self.stokes.solve(&load)?;
            let diff: Vec<f64> = w.iter().zip(&u).map(|(a, b)| a - b).collect();
            let inc = h1_norm(self.space, &diff);
            if let Some(&prev) = trace.increments.last() {
                let ratio = if prev > 0.0 { inc / prev } else if inc > 0.0 { f64::INFINITY } else { 0.0 };
                trace.ratios.push(ratio);
                streak = if ratio >= 1.0 { streak + 1 } else { 0 };
            }
            trace.increments.push(inc);
            u = w;
            if inc <= tol {
                return Ok((u, p, trace));
            }
            if streak >= 3 {
                return Err(Error::InnerDivergence { trace: Box::new(trace) });
            }
        }
        Err(Error::InnerMaxIterations(max_iter))
    }

    /// Solves `kappa(vartheta, phi) = e(u, u, phi) - d(theta, u, theta, phi) - kappa(theta_D, phi)`
    /// with `theta = theta_frozen + theta_D`.
    pub fn heat_solve(&self, u: &[f64], theta_frozen: &[f64]) -> Vec<f64> {
        self.heat_step(u, theta_frozen).0
    }

    /// Heat solve plus the total dissipation `int alpha1 nu e(u):e(u)`.
    fn heat_step(&self, u: &[f64], theta_frozen: &[f64]) -> (Vec<f64>, f64) {
        let theta = self.full_theta(theta_frozen);
        let model = &self.problem.model;
        let e = forms::assemble_e_load(self.space, model, u, u);
        let d = forms::assemble_d_load(self.space, model, &theta, u, &theta).values;
        let load: Vec<f64> = (0..d.len()).map(|i| self.base_heat[i] + e.values[i] - d[i]).collect();
        (self.heat.solve(&load), e.sum())
    }

    /// Picard loop from `vartheta = 0`, stopping when `||vartheta_{n+1} - vartheta_n||_{H^1} <= outer_tol`.
    pub fn outer_loop(&self) -> Result<(State, IterationTrace)> {
        let s = self.problem.settings;
        let n = self.space.n_scalar();
        let mut vartheta = vec![0.0; n];
        let mut u = vec![0.0; self.space.n_velocity()];
        let mut trace = IterationTrace::default();
        for iter in 1..=s.outer_max_iter {
            let start = Instant::now();
            let (u_new, p, inner) = self.inner_momentum_solve(&vartheta, &u, s.inner_tol, s.inner_max_iter)?;
            u = u_new;
            let (t2, dissipation) = self.heat_step(&u, &vartheta);
            let next: Vec<f64> = vartheta.iter().zip(&t2).map(|(a, b)| a + s.damping * (b - a)).collect();
            let diff: Vec<f64> = next.iter().zip(&vartheta).map(|(a, b)| a - b).collect();
            let d_theta_norm = h1_norm(self.space, &diff);
            vartheta = next;
            let state = State { u: u.clone(), p, theta: self.full_theta(&vartheta), vartheta: vartheta.clone() };
            let (r_momentum, r_heat) = self.weak_residual(&state);
            let flow = backward_flow_measure(self.space, &state);
            trace.records.push(OuterRecord {
                iter,
                inner,
                d_theta_norm,
                r_momentum,
                r_heat,
                flow,
                dissipation,
                wall_time: start.elapsed(),
            });
            if d_theta_norm <= s.outer_tol {
                trace.converged = true;
                return Ok((state, trace));
            }
        }
        Err(Error::OuterMaxIterations { iterations: s.outer_max_iter, trace: Box::new(trace) })
    }

    /// Euclidean norms of the momentum and heat residual vectors over the free test dofs.
    pub fn weak_residual(&self, state: &State) -> (f64, f64) {
        let model = &self.problem.model;
        let space = self.space;
        let sys = self.stokes.factorization().system();
        let free = self.stokes.free_dofs();
        let uf: Vec<f64> = free.iter().map(|&i| state.u[i]).collect();
        let mut rm = sys.a.mul_vec(&uf);
        let btp = sys.b.mul_transpose_vec(&state.p);
        let load = self.momentum_load(&state.theta);
        let conv = forms::convection_load(space, model, &state.u, &state.u).values;
        for (k, &i) in free.iter().enumerate() {
            rm[k] += btp[k] + conv[i] - load[i];
        }
        let kt = self.heat.kappa.mul_vec(&state.theta);
        let e = forms::assemble_e_load(space, model, &state.u, &state.u).values;
        let d = forms::assemble_d_load(space, model, &state.theta, &state.u, &state.theta).values;
        let h: Vec<f64> = match &self.problem.heat_source {
            Some(h) => forms::scalar_source_load(space, &|p| h(p)).values,
            None => vec![0.0; space.n_scalar()],
        };
        let rh: Vec<f64> = space.free_nodes().iter().map(|&i| kt[i] - e[i] + d[i] - h[i]).collect();
        (norm2(&rm), norm2(&rh))
    }
}

/// Minimum of `u . n` over the open-end quadrature points and the area fraction with `u . n < 0`.
pub fn backward_flow_measure(space: &DiscreteSpace, state: &State) -> FlowMeasure {
    let n = space.n_scalar();
    let mut faces = [FaceFlow { min_flux: f64::INFINITY, inflow_fraction: 0.0 }; 2];
    let mut area = [0.0; 2];
    for (fp, phi) in space.open_end_points() {
        let nodes = space.cell_nodes(fp.cell);
        let mut un = 0.0;
        for c in 0..3 {
            let uc: f64 = (0..27).map(|a| state.u[c * n + nodes[a]] * phi[a]).sum();
            un += uc * fp.normal[c];
        }
        let f = &mut faces[fp.face];
        f.min_flux = f.min_flux.min(un);
        area[fp.face] += fp.weight;
        if un < 0.0 {
            f.inflow_fraction += fp.weight;
        }
    }
    let inflow_area = faces[0].inflow_fraction + faces[1].inflow_fraction;
    for (f, a) in faces.iter_mut().zip(area) {
        f.inflow_fraction /= a;
    }
    FlowMeasure {
        min_flux: faces[0].min_flux.min(faces[1].min_flux),
        inflow_fraction: inflow_area / (area[0] + area[1]),
        faces,
    }
}
