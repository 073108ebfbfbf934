//! Taylor-Hood (Q2 velocity / Q1 pressure) and Q2 temperature spaces on the channel mesh.

use crate::element::{gauss_legendre, quadratic_1d, CellTables};
use crate::error::{Error, Result};
use crate::mesh::ChannelMesh;

pub const DEFAULT_QUAD_ORDER: usize = 5;

/// Discrete function spaces. Scalar Q2 nodes live on the `(2nx+1) x (2ny+1) x (2nz+1)`
/// lattice, x fastest. Velocity dofs are component-major: `comp * n_scalar + node`.
/// Pressure dofs coincide with mesh vertices.
#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    pub mesh: ChannelMesh,
    pub quad_order: usize,
    pub tables: CellTables,
    /// Q2 lattice size per axis.
    pub lattice: [usize; 3],
    /// Per scalar node: lies on the closure of the walls.
    pub wall_node: Vec<bool>,
    /// Temperature dofs on the walls (sorted).
    pub dirichlet_mask_theta: Vec<usize>,
    /// Velocity dofs on the walls (sorted).
    pub dirichlet_mask_u: Vec<usize>,
    /// Scalar node -> index among free (non-wall) nodes.
    free_index: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
}

/// A quadrature point on an open end.
#[derive(Debug, Clone, Copy)]
pub struct FacePoint {
    pub cell: usize,
    /// 0 for the x = 0 end, 1 for x = Lx.
    pub face: usize,
    pub point: [f64; 3],
    pub weight: f64,
    pub normal: [f64; 3],
}

pub fn build_spaces(mesh: &ChannelMesh, quad_order: usize) -> Result<DiscreteSpace> {
    if quad_order < 3 {
        return Err(Error::QuadratureOrder(quad_order));
    }
    let [nx, ny, nz] = mesh.divisions;
    let lattice = [2 * nx + 1, 2 * ny + 1, 2 * nz + 1];
    let n = lattice[0] * lattice[1] * lattice[2];
    let mut wall_node = vec![false; n];
    for k in 0..lattice[2] {
        for j in 0..lattice[1] {
            for i in 0..lattice[0] {
                let on_wall = j == 0 || j == lattice[1] - 1 || k == 0 || k == lattice[2] - 1;
                wall_node[i + lattice[0] * (j + lattice[1] * k)] = on_wall;
            }
        }
    }
    let dirichlet_mask_theta: Vec<usize> = (0..n).filter(|&i| wall_node[i]).collect();
    let dirichlet_mask_u: Vec<usize> = (0..3)
        .flat_map(|c| dirichlet_mask_theta.iter().map(move |&i| c * n + i))
        .collect();
    let mut free_index = vec![None; n];
    let mut free_nodes = Vec::new();
    for i in 0..n {
        if !wall_node[i] {
            free_index[i] = Some(free_nodes.len());
            free_nodes.push(i);
        }
    }
    Ok(DiscreteSpace {
        mesh: mesh.clone(),
        quad_order,
        tables: CellTables::new(mesh.spacing(), quad_order),
        lattice,
        wall_node,
        dirichlet_mask_theta,
        dirichlet_mask_u,
        free_index,
        free_nodes,
    })
}

impl DiscreteSpace {
    pub fn n_scalar(&self) -> usize {
        self.wall_node.len()
    }

    pub fn n_velocity(&self) -> usize {
        3 * self.n_scalar()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.vertex_count()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.cell_count()
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    pub fn free_index(&self, node: usize) -> Option<usize> {
        self.free_index[node]
    }

    pub fn node_coord(&self, node: usize) -> [f64; 3] {
        let [lx, ly, _] = self.lattice;
        let (i, j, k) = (node % lx, (node / lx) % ly, node / (lx * ly));
        let d = self.mesh.dims;
        let nd = self.mesh.divisions;
        [
            d[0] * i as f64 / (2 * nd[0]) as f64,
            d[1] * j as f64 / (2 * nd[1]) as f64,
            d[2] * k as f64 / (2 * nd[2]) as f64,
        ]
    }

    fn cell_ijk(&self, cell: usize) -> [usize; 3] {
        let [nx, ny, _] = self.mesh.divisions;
        [cell % nx, (cell / nx) % ny, cell / (nx * ny)]
    }

    pub fn cell_origin(&self, cell: usize) -> [f64; 3] {
        let [i, j, k] = self.cell_ijk(cell);
        let h = self.tables.h;
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    }

    /// Global scalar Q2 nodes of a cell, local index a + 3b + 9c.
    pub fn cell_nodes(&self, cell: usize) -> [usize; 27] {
        let [i, j, k] = self.cell_ijk(cell);
        let [lx, ly, _] = self.lattice;
        let mut out = [0; 27];
        for c in 0..3 {
            for b in 0..3 {
                for a in 0..3 {
                    out[a + 3 * b + 9 * c] = (2 * i + a) + lx * ((2 * j + b) + ly * (2 * k + c));
                }
            }
        }
        out
    }

    /// Pressure (vertex) dofs of a cell, local index a + 2b + 4c.
    pub fn cell_pressure_nodes(&self, cell: usize) -> [usize; 8] {
        let [i, j, k] = self.cell_ijk(cell);
        let [nx, ny, _] = self.mesh.divisions;
        let mut out = [0; 8];
        for c in 0..2 {
            for b in 0..2 {
                for a in 0..2 {
                    out[a + 2 * b + 4 * c] = (i + a) + (nx + 1) * ((j + b) + (ny + 1) * (k + c));
                }
            }
        }
        out
    }

    /// Physical quadrature point `q` of `cell`.
    pub fn qp_coord(&self, cell: usize, q: usize) -> [f64; 3] {
        let o = self.cell_origin(cell);
        let p = self.tables.points[q];
        [o[0] + p[0], o[1] + p[1], o[2] + p[2]]
    }

    pub fn interpolate_scalar(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.n_scalar()).map(|i| f(self.node_coord(i))).collect()
    }

    pub fn interpolate_vector(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        let n = self.n_scalar();
        let mut out = vec![0.0; 3 * n];
        for i in 0..n {
            let v = f(self.node_coord(i));
            for c in 0..3 {
                out[c * n + i] = v[c];
            }
        }
        out
    }

    pub fn interpolate_pressure(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.mesh.vertices.iter().map(|&p| f(p)).collect()
    }

    /// Pressure dofs lifted onto the Q2 lattice (exact since Q1 is contained in Q2).
    pub fn pressure_on_lattice(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_scalar()];
        let [lx, ly, _] = self.lattice;
        let [nx, ny, _] = self.mesh.divisions;
        for (node, o) in out.iter_mut().enumerate() {
            let (i, j, k) = (node % lx, (node / lx) % ly, node / (lx * ly));
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for ci in [i / 2, i.div_ceil(2)] {
                for cj in [j / 2, j.div_ceil(2)] {
                    for ck in [k / 2, k.div_ceil(2)] {
                        acc += p[ci + (nx + 1) * (cj + (ny + 1) * ck)];
                        cnt += 1.0;
                    }
                }
            }
            *o = acc / cnt;
        }
        out
    }

    /// Local values of a scalar field (27 entries).
    pub fn gather_scalar(&self, nodes: &[usize; 27], field: &[f64]) -> [f64; 27] {
        nodes.map(|n| field[n])
    }

    /// Local values of a velocity field, `[component][local node]`.
    pub fn gather_vector(&self, nodes: &[usize; 27], field: &[f64]) -> [[f64; 27]; 3] {
        let n = self.n_scalar();
        [0, 1, 2].map(|c| nodes.map(|i| field[c * n + i]))
    }

    /// Value and gradient of a local scalar field at quadrature point `q`.
    pub fn eval_scalar(&self, q: usize, local: &[f64; 27]) -> (f64, [f64; 3]) {
        let phi = &self.tables.q2[q];
        let dphi = &self.tables.q2_grad[q];
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for a in 0..27 {
            v += local[a] * phi[a];
            for d in 0..3 {
                g[d] += local[a] * dphi[a][d];
            }
        }
        (v, g)
    }

    /// Value and Jacobian (`grad[c][d] = du_c/dx_d`) of a local vector field.
    pub fn eval_vector(&self, q: usize, local: &[[f64; 27]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let mut v = [0.0; 3];
        let mut g = [[0.0; 3]; 3];
        for c in 0..3 {
            let (vc, gc) = self.eval_scalar(q, &local[c]);
            v[c] = vc;
            g[c] = gc;
        }
        (v, g)
    }

    pub fn eval_hessian(&self, q: usize, local: &[f64; 27]) -> [f64; 6] {
        let h = &self.tables.q2_hess[q];
        let mut out = [0.0; 6];
        for a in 0..27 {
            for m in 0..6 {
                out[m] += local[a] * h[a][m];
            }
        }
        out
    }

    pub fn eval_pressure(&self, q: usize, local: &[f64; 8]) -> f64 {
        self.tables.q1[q].iter().zip(local).map(|(a, b)| a * b).sum()
    }

    /// Quadrature points on the two open ends, with the basis of the adjacent cell.
    pub fn open_end_points(&self) -> Vec<(FacePoint, [f64; 27])> {
        let (t, w) = gauss_legendre(self.quad_order);
        let [nx, ny, nz] = self.mesh.divisions;
        let h = self.tables.h;
        let mut out = Vec::new();
        for face in 0..2 {
            let i = if face == 0 { 0 } else { nx - 1 };
            let xr = if face == 0 { 0.0 } else { 1.0 };
            let normal = if face == 0 { [-1.0, 0.0, 0.0] } else { [1.0, 0.0, 0.0] };
            let bx = quadratic_1d(xr);
            for k in 0..nz {
                for j in 0..ny {
                    let cell = i + nx * (j + ny * k);
                    let o = self.cell_origin(cell);
                    for (qk, &tz) in t.iter().enumerate() {
                        for (qj, &ty) in t.iter().enumerate() {
                            let by = quadratic_1d(ty);
                            let bz = quadratic_1d(tz);
                            let mut phi = [0.0; 27];
                            for c in 0..3 {
                                for b in 0..3 {
                                    for a in 0..3 {
                                        phi[a + 3 * b + 9 * c] = bx[a][0] * by[b][0] * bz[c][0];
                                    }
                                }
                            }
                            let fp = FacePoint {
                                cell,
                                face,
                                point: [o[0] + xr * h[0], o[1] + ty * h[1], o[2] + tz * h[2]],
                                weight: w[qj] * w[qk] * h[1] * h[2],
                                normal,
                            };
                            out.push((fp, phi));
                        }
                    }
                }
            }
        }
        out
    }
}
