//! Discrete viscous, convection, conduction, heat-convection, dissipation and
//! buoyancy forms on the Taylor-Hood spaces.
//!
//! Velocity vectors use the component-major layout of [`DiscreteSpace`]. All
//! operators are assembled over the full (unconstrained) dof set; Dirichlet
//! elimination happens in the solvers.

use crate::linsolve::{SparseMatrix, TripletBuilder};
use crate::material::MaterialModel;
use crate::space::DiscreteSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    AViscous,
    BConvection,
    Kappa,
    MixedSaddle,
    Divergence,
    Mass,
}

#[derive(Debug, Clone)]
pub struct AssembledOperator {
    pub matrix: SparseMatrix,
    pub kind: OperatorKind,
    pub symmetric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    Buoyancy,
    Dissipation,
    ConvectionLoad,
    Lifting,
    Source,
}

#[derive(Debug, Clone)]
pub struct LoadVector {
    pub values: Vec<f64>,
    pub kind: LoadKind,
}

impl LoadVector {
    /// Sets the listed rows to zero.
    pub fn constrain(&mut self, rows: &[usize]) {
        for &r in rows {
            self.values[r] = 0.0;
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Local 27x27 matrix of `int grad(phi_a) . grad(phi_b)`; identical on every cell.
pub fn local_stiffness(space: &DiscreteSpace) -> [[f64; 27]; 27] {
    let t = &space.tables;
    let mut k = [[0.0; 27]; 27];
    for q in 0..t.len() {
        let g = &t.q2_grad[q];
        let w = t.weights[q];
        for a in 0..27 {
            for b in 0..27 {
                k[a][b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2]);
            }
        }
    }
    k
}

/// Local 27x27 mass matrix.
pub fn local_mass(space: &DiscreteSpace) -> [[f64; 27]; 27] {
    let t = &space.tables;
    let mut m = [[0.0; 27]; 27];
    for q in 0..t.len() {
        let v = &t.q2[q];
        let w = t.weights[q];
        for a in 0..27 {
            for b in 0..27 {
                m[a][b] += w * v[a] * v[b];
            }
        }
    }
    m
}

fn scatter_scalar(space: &DiscreteSpace, local: &[[f64; 27]; 27], coef: f64, blocks: usize) -> SparseMatrix {
    let n = space.n_scalar();
    let mut t = TripletBuilder::with_capacity(blocks * n, blocks * n, blocks * 729 * space.n_cells());
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        for c in 0..blocks {
            for a in 0..27 {
                for b in 0..27 {
                    t.push(c * n + nodes[a], c * n + nodes[b], coef * local[a][b]);
                }
            }
        }
    }
    t.build()
}

/// Scalar stiffness `int grad(phi_i) . grad(phi_j)` (unit coefficient).
pub fn scalar_stiffness(space: &DiscreteSpace) -> SparseMatrix {
    scatter_scalar(space, &local_stiffness(space), 1.0, 1)
}

/// Scalar mass matrix.
pub fn scalar_mass(space: &DiscreteSpace) -> AssembledOperator {
    AssembledOperator {
        matrix: scatter_scalar(space, &local_mass(space), 1.0, 1),
        kind: OperatorKind::Mass,
        symmetric: true,
    }
}

/// Viscous form `nu int grad u : grad v` on the velocity space.
pub fn assemble_a(space: &DiscreteSpace, model: &MaterialModel) -> AssembledOperator {
    AssembledOperator {
        matrix: scatter_scalar(space, &local_stiffness(space), model.nu, 3),
        kind: OperatorKind::AViscous,
        symmetric: true,
    }
}

/// Conduction form `lambda int grad theta . grad phi`.
pub fn assemble_kappa(space: &DiscreteSpace, model: &MaterialModel) -> AssembledOperator {
    AssembledOperator {
        matrix: scatter_scalar(space, &local_stiffness(space), model.lambda, 1),
        kind: OperatorKind::Kappa,
        symmetric: true,
    }
}

/// Divergence operator `D[j, (c, a)] = int q_j d(phi_a)/dx_c` (pressure rows, velocity columns).
pub fn assemble_divergence(space: &DiscreteSpace) -> AssembledOperator {
    let t = &space.tables;
    let mut local = [[[0.0; 27]; 3]; 8];
    for q in 0..t.len() {
        let w = t.weights[q];
        for j in 0..8 {
            let qj = t.q1[q][j] * w;
            for a in 0..27 {
                for c in 0..3 {
                    local[j][c][a] += qj * t.q2_grad[q][a][c];
                }
            }
        }
    }
    let n = space.n_scalar();
    let mut b = TripletBuilder::with_capacity(space.n_pressure(), 3 * n, 8 * 81 * space.n_cells());
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let pn = space.cell_pressure_nodes(cell);
        for j in 0..8 {
            for c in 0..3 {
                for a in 0..27 {
                    b.push(pn[j], c * n + nodes[a], local[j][c][a]);
                }
            }
        }
    }
    AssembledOperator { matrix: b.build(), kind: OperatorKind::Divergence, symmetric: false }
}

/// Unconstrained Stokes block matrix `[A -D^T; -D 0]` over all velocity and pressure dofs.
///
/// With the pressure entering as `-(P, div v)` the natural boundary condition of the
/// weak form is the do-nothing condition `-P n + nu (grad u) n = 0`; nothing is added
/// on the open ends.
pub fn assemble_saddle(space: &DiscreteSpace, model: &MaterialModel) -> AssembledOperator {
    let a = assemble_a(space, model).matrix;
    let d = assemble_divergence(space).matrix;
    let nu = a.nrows;
    let dim = nu + d.nrows;
    let mut t = TripletBuilder::with_capacity(dim, dim, a.nnz() + 2 * d.nnz());
    for i in 0..nu {
        for (j, v) in a.row(i) {
            t.push(i, j, v);
        }
    }
    for i in 0..d.nrows {
        for (j, v) in d.row(i) {
            t.push(nu + i, j, -v);
            t.push(j, nu + i, -v);
        }
    }
    AssembledOperator { matrix: t.build(), kind: OperatorKind::MixedSaddle, symmetric: true }
}

/// Convection operator with frozen transport field: `w^T B(u0) v = rho0 int (u0 . grad) v . w`.
pub fn assemble_b(space: &DiscreteSpace, model: &MaterialModel, u0: &[f64]) -> AssembledOperator {
    let n = space.n_scalar();
    let t = &space.tables;
    let mut tb = TripletBuilder::with_capacity(3 * n, 3 * n, 3 * 729 * space.n_cells());
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lu = space.gather_vector(&nodes, u0);
        let mut local = [[0.0; 27]; 27];
        for q in 0..t.len() {
            let (u, _) = space.eval_vector(q, &lu);
            let w = t.weights[q] * model.rho0;
            for b in 0..27 {
                let g = t.q2_grad[q][b];
                let adv = w * (u[0] * g[0] + u[1] * g[1] + u[2] * g[2]);
                if adv == 0.0 {
                    continue;
                }
                for a in 0..27 {
                    local[a][b] += adv * t.q2[q][a];
                }
            }
        }
        for c in 0..3 {
            for a in 0..27 {
                for b in 0..27 {
                    tb.push(c * n + nodes[a], c * n + nodes[b], local[a][b]);
                }
            }
        }
    }
    AssembledOperator { matrix: tb.build(), kind: OperatorKind::BConvection, symmetric: false }
}

/// Load `phi_i -> b(u0, v, phi_i) = rho0 int (u0 . grad) v . phi_i` on the velocity space.
pub fn convection_load(space: &DiscreteSpace, model: &MaterialModel, u0: &[f64], v: &[f64]) -> LoadVector {
    let n = space.n_scalar();
    let t = &space.tables;
    let mut out = vec![0.0; 3 * n];
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lu = space.gather_vector(&nodes, u0);
        let lv = space.gather_vector(&nodes, v);
        let mut local = [[0.0; 27]; 3];
        for q in 0..t.len() {
            let (u, _) = space.eval_vector(q, &lu);
            let (_, gv) = space.eval_vector(q, &lv);
            let w = t.weights[q] * model.rho0;
            for c in 0..3 {
                let conv = w * (u[0] * gv[c][0] + u[1] * gv[c][1] + u[2] * gv[c][2]);
                for a in 0..27 {
                    local[c][a] += conv * t.q2[q][a];
                }
            }
        }
        for c in 0..3 {
            for a in 0..27 {
                out[c * n + nodes[a]] += local[c][a];
            }
        }
    }
    LoadVector { values: out, kind: LoadKind::ConvectionLoad }
}

/// Heat-convection load `phi_i -> c_V int rho(theta_frozen) u . grad(theta) phi_i`.
pub fn assemble_d_load(
    space: &DiscreteSpace,
    model: &MaterialModel,
    theta_frozen: &[f64],
    u: &[f64],
    theta_transported: &[f64],
) -> LoadVector {
    let t = &space.tables;
    let mut out = vec![0.0; space.n_scalar()];
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lf = space.gather_scalar(&nodes, theta_frozen);
        let lu = space.gather_vector(&nodes, u);
        let lt = space.gather_scalar(&nodes, theta_transported);
        let mut local = [0.0; 27];
        for q in 0..t.len() {
            let (tf, _) = space.eval_scalar(q, &lf);
            let (uq, _) = space.eval_vector(q, &lu);
            let (_, gt) = space.eval_scalar(q, &lt);
            let s = t.weights[q] * model.c_v * model.density(tf) * (uq[0] * gt[0] + uq[1] * gt[1] + uq[2] * gt[2]);
            for a in 0..27 {
                local[a] += s * t.q2[q][a];
            }
        }
        for a in 0..27 {
            out[nodes[a]] += local[a];
        }
    }
    LoadVector { values: out, kind: LoadKind::ConvectionLoad }
}

/// Symmetric gradient contraction `e(u) : e(v)` from two Jacobians.
pub fn strain_contraction(gu: &[[f64; 3]; 3], gv: &[[f64; 3]; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let eu = 0.5 * (gu[i][j] + gu[j][i]);
            let ev = 0.5 * (gv[i][j] + gv[j][i]);
            s += eu * ev;
        }
    }
    s
}

/// Dissipation load `phi_i -> alpha1 nu int e(u) : e(v) phi_i`.
pub fn assemble_e_load(space: &DiscreteSpace, model: &MaterialModel, u: &[f64], v: &[f64]) -> LoadVector {
    let t = &space.tables;
    let coef = model.alpha1 * model.nu;
    let mut out = vec![0.0; space.n_scalar()];
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lu = space.gather_vector(&nodes, u);
        let lv = space.gather_vector(&nodes, v);
        let mut local = [0.0; 27];
        for q in 0..t.len() {
            let (_, gu) = space.eval_vector(q, &lu);
            let (_, gv) = space.eval_vector(q, &lv);
            let s = t.weights[q] * coef * strain_contraction(&gu, &gv);
            for a in 0..27 {
                local[a] += s * t.q2[q][a];
            }
        }
        for a in 0..27 {
            out[nodes[a]] += local[a];
        }
    }
    LoadVector { values: out, kind: LoadKind::Dissipation }
}

/// Buoyancy load `v_i -> int rho(theta) g . v_i`.
pub fn assemble_buoyancy(
    space: &DiscreteSpace,
    model: &MaterialModel,
    theta: &[f64],
    g: &dyn Fn([f64; 3]) -> [f64; 3],
) -> LoadVector {
    let n = space.n_scalar();
    let t = &space.tables;
    let mut out = vec![0.0; 3 * n];
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lt = space.gather_scalar(&nodes, theta);
        let mut local = [[0.0; 27]; 3];
        for q in 0..t.len() {
            let (th, _) = space.eval_scalar(q, &lt);
            let gq = g(space.qp_coord(cell, q));
            let r = t.weights[q] * model.density(th);
            for c in 0..3 {
                let s = r * gq[c];
                if s == 0.0 {
                    continue;
                }
                for a in 0..27 {
                    local[c][a] += s * t.q2[q][a];
                }
            }
        }
        for c in 0..3 {
            for a in 0..27 {
                out[c * n + nodes[a]] += local[c][a];
            }
        }
    }
    LoadVector { values: out, kind: LoadKind::Buoyancy }
}

/// Load of a closed-form vector source `v_i -> int f . v_i`.
pub fn vector_source_load(space: &DiscreteSpace, f: &dyn Fn([f64; 3]) -> [f64; 3]) -> LoadVector {
    let n = space.n_scalar();
    let t = &space.tables;
    let mut out = vec![0.0; 3 * n];
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        for q in 0..t.len() {
            let fq = f(space.qp_coord(cell, q));
            for c in 0..3 {
                let s = t.weights[q] * fq[c];
                for a in 0..27 {
                    out[c * n + nodes[a]] += s * t.q2[q][a];
                }
            }
        }
    }
    LoadVector { values: out, kind: LoadKind::Source }
}

/// Load of a closed-form scalar source `phi_i -> int h phi_i`.
pub fn scalar_source_load(space: &DiscreteSpace, h: &dyn Fn([f64; 3]) -> f64) -> LoadVector {
    let t = &space.tables;
    let mut out = vec![0.0; space.n_scalar()];
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        for q in 0..t.len() {
            let s = t.weights[q] * h(space.qp_coord(cell, q));
            for a in 0..27 {
                out[nodes[a]] += s * t.q2[q][a];
            }
        }
    }
    LoadVector { values: out, kind: LoadKind::Source }
}

/// `(rho0 / 2) * surface integral over the open ends of (u . n) |v|^2`.
pub fn outflow_flux_term(space: &DiscreteSpace, model: &MaterialModel, u: &[f64], v: &[f64]) -> f64 {
    let n = space.n_scalar();
    let mut s = 0.0;
    for (fp, phi) in space.open_end_points() {
        let nodes = space.cell_nodes(fp.cell);
        let mut uq = [0.0; 3];
        let mut vq = [0.0; 3];
        for c in 0..3 {
            for a in 0..27 {
                uq[c] += u[c * n + nodes[a]] * phi[a];
                vq[c] += v[c * n + nodes[a]] * phi[a];
            }
        }
        let un = uq[0] * fp.normal[0] + uq[1] * fp.normal[1] + uq[2] * fp.normal[2];
        s += fp.weight * un * (vq[0] * vq[0] + vq[1] * vq[1] + vq[2] * vq[2]);
    }
    0.5 * model.rho0 * s
}

/// `b(u, v, w) = rho0 int (u . grad) v . w` with `u` given in closed form at the quadrature points.
pub fn convection_trilinear_fn(
    space: &DiscreteSpace,
    model: &MaterialModel,
    u: &dyn Fn([f64; 3]) -> [f64; 3],
    v: &[f64],
    w: &[f64],
) -> f64 {
    let t = &space.tables;
    let mut s = 0.0;
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lv = space.gather_vector(&nodes, v);
        let lw = space.gather_vector(&nodes, w);
        for q in 0..t.len() {
            let uq = u(space.qp_coord(cell, q));
            let (_, gv) = space.eval_vector(q, &lv);
            let (wq, _) = space.eval_vector(q, &lw);
            for c in 0..3 {
                s += t.weights[q] * (uq[0] * gv[c][0] + uq[1] * gv[c][1] + uq[2] * gv[c][2]) * wq[c];
            }
        }
    }
    model.rho0 * s
}

/// [`outflow_flux_term`] with `u` given in closed form.
pub fn outflow_flux_fn(space: &DiscreteSpace, model: &MaterialModel, u: &dyn Fn([f64; 3]) -> [f64; 3], v: &[f64]) -> f64 {
    let n = space.n_scalar();
    let mut s = 0.0;
    for (fp, phi) in space.open_end_points() {
        let nodes = space.cell_nodes(fp.cell);
        let uq = u(fp.point);
        let mut vq = [0.0; 3];
        for c in 0..3 {
            for a in 0..27 {
                vq[c] += v[c * n + nodes[a]] * phi[a];
            }
        }
        let un = uq[0] * fp.normal[0] + uq[1] * fp.normal[1] + uq[2] * fp.normal[2];
        s += fp.weight * un * (vq[0] * vq[0] + vq[1] * vq[1] + vq[2] * vq[2]);
    }
    0.5 * model.rho0 * s
}
