//! Manufactured solutions and convergence studies.
//!
//! Exact fields are sums of separable terms `c * X(x) Y(y) Z(z)` whose 1D profiles
//! carry hand-coded first and second derivatives; gradients, Hessians and the
//! induced forcings follow from the product rule.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::fields::VectorField;
use crate::fixed_point::{FixedPointSolver, HeatOperator, IterationTrace, Problem, SolverSettings, StokesOperator};
use crate::forms::{scalar_source_load, strain_contraction, vector_source_load};
use crate::material::MaterialModel;
use crate::mesh::build_channel_mesh;
use crate::space::{build_spaces, DiscreteSpace, DEFAULT_QUAD_ORDER};

/// One-dimensional profile with value, first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Profile {
    One,
    /// `sin(w t)`
    Sin(f64),
    /// `cos(w t)`
    Cos(f64),
    /// `c0 + c1 t + c2 t^2`
    Quadratic([f64; 3]),
}

impl Profile {
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match *self {
            Profile::One => [1.0, 0.0, 0.0],
            Profile::Sin(w) => {
                let (s, c) = (w * t).sin_cos();
                [s, w * c, -w * w * s]
            }
            Profile::Cos(w) => {
                let (s, c) = (w * t).sin_cos();
                [c, -w * s, -w * w * c]
            }
            Profile::Quadratic(c) => [c[0] + t * (c[1] + t * c[2]), c[1] + 2.0 * c[2] * t, 2.0 * c[2]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub coef: f64,
    pub profiles: [Profile; 3],
}

/// Scalar field given as a sum of separable terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeparableField {
    pub terms: Vec<Term>,
}

impl SeparableField {
    pub fn zero() -> Self {
        SeparableField { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        SeparableField { terms: vec![Term { coef: c, profiles: [Profile::One; 3] }] }
    }

    pub fn term(coef: f64, profiles: [Profile; 3]) -> Self {
        SeparableField { terms: vec![Term { coef, profiles }] }
    }

    pub fn plus(mut self, other: SeparableField) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.coef *= s);
        self
    }

    /// Value, gradient and Hessian at `p`.
    pub fn jet(&self, p: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let mut v = 0.0;
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for t in &self.terms {
            let e = [0, 1, 2].map(|d| t.profiles[d].eval(p[d]));
            v += t.coef * e[0][0] * e[1][0] * e[2][0];
            for i in 0..3 {
                let mut gi = t.coef;
                for d in 0..3 {
                    gi *= if d == i { e[d][1] } else { e[d][0] };
                }
                g[i] += gi;
                for j in 0..3 {
                    let mut hij = t.coef;
                    for d in 0..3 {
                        let order = (d == i) as usize + (d == j) as usize;
                        hij *= e[d][order];
                    }
                    h[i][j] += hij;
                }
            }
        }
        (v, g, h)
    }

    pub fn value(&self, p: [f64; 3]) -> f64 {
        self.jet(p).0
    }

    pub fn gradient(&self, p: [f64; 3]) -> [f64; 3] {
        self.jet(p).1
    }

    pub fn laplacian(&self, p: [f64; 3]) -> f64 {
        let h = self.jet(p).2;
        h[0][0] + h[1][1] + h[2][2]
    }
}

/// Closed-form velocity, pressure and temperature with the material data they are paired with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManufacturedCase {
    pub name: String,
    pub dims: [f64; 3],
    pub model: MaterialModel,
    pub u: [SeparableField; 3],
    pub p: SeparableField,
    pub theta: SeparableField,
    /// Constant temperature on the walls, used as the lifting.
    pub theta_wall: f64,
    /// Body force per unit mass.
    pub g: VectorField,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Compatibility {
    pub max_divergence: f64,
    pub max_wall_velocity: f64,
    /// `|-P n + nu (grad u) n|` on the open ends.
    pub max_do_nothing: f64,
    pub max_wall_theta: f64,
    /// `|d theta / d n|` on the open ends.
    pub max_open_flux: f64,
}

impl Compatibility {
    pub fn flow_ok(&self, tol: f64) -> bool {
        self.max_divergence < tol && self.max_wall_velocity < tol && self.max_do_nothing < tol
    }

    pub fn heat_ok(&self, tol: f64) -> bool {
        self.max_wall_theta < tol && self.max_open_flux < tol
    }
}

impl ManufacturedCase {
    pub fn velocity(&self, x: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|c| self.u[c].value(x))
    }

    /// `grad[c][d] = d u_c / d x_d`.
    pub fn velocity_gradient(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        [0, 1, 2].map(|c| self.u[c].gradient(x))
    }

    /// `-nu lap u + grad P`.
    pub fn stokes_forcing(&self, x: [f64; 3]) -> [f64; 3] {
        let gp = self.p.gradient(x);
        [0, 1, 2].map(|c| -self.model.nu * self.u[c].laplacian(x) + gp[c])
    }

    /// Momentum source (per unit volume) completing `rho(theta) g` so that the fields solve
    /// `-nu lap u + rho0 (u . grad) u + grad P = rho(theta) g + f`.
    pub fn momentum_source(&self, x: [f64; 3]) -> [f64; 3] {
        let st = self.stokes_forcing(x);
        let u = self.velocity(x);
        let gu = self.velocity_gradient(x);
        let rho = self.model.density(self.theta.value(x));
        let g = self.g.eval(x);
        [0, 1, 2].map(|c| {
            st[c] + self.model.rho0 * (u[0] * gu[c][0] + u[1] * gu[c][1] + u[2] * gu[c][2]) - rho * g[c]
        })
    }

    /// `-lambda lap theta`.
    pub fn poisson_forcing(&self, x: [f64; 3]) -> f64 {
        -self.model.lambda * self.theta.laplacian(x)
    }

    /// Heat source `h` with `-lambda lap theta + c_V rho(theta) u . grad theta = alpha1 nu e(u):e(u) + h`.
    pub fn heat_source(&self, x: [f64; 3]) -> f64 {
        let m = &self.model;
        let (th, gt, _) = self.theta.jet(x);
        let u = self.velocity(x);
        let gu = self.velocity_gradient(x);
        self.poisson_forcing(x) + m.c_v * m.density(th) * (u[0] * gt[0] + u[1] * gt[1] + u[2] * gt[2])
            - m.alpha1 * m.nu * strain_contraction(&gu, &gu)
    }

    /// Samples boundary and divergence conditions on a regular grid of `n^3` points plus boundary faces.
    pub fn compatibility(&self, n: usize) -> Compatibility {
        let l = self.dims;
        let mut c = Compatibility::default();
        let coord = |i: usize, d: usize| l[d] * (i as f64 + 0.37) / n as f64;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let x = [coord(i, 0), coord(j, 1), coord(k, 2)];
                    let g = self.velocity_gradient(x);
                    c.max_divergence = c.max_divergence.max((g[0][0] + g[1][1] + g[2][2]).abs());
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let (s, t) = ((a as f64 + 0.37) / n as f64, (b as f64 + 0.61) / n as f64);
                for side in [0.0, 1.0] {
                    for wall in [[s * l[0], side * l[1], t * l[2]], [s * l[0], t * l[1], side * l[2]]] {
                        let u = self.velocity(wall);
                        c.max_wall_velocity = c.max_wall_velocity.max(u.iter().map(|v| v.abs()).fold(0.0, f64::max));
                        c.max_wall_theta = c.max_wall_theta.max((self.theta.value(wall) - self.theta_wall).abs());
                    }
                    let x = [side * l[0], s * l[1], t * l[2]];
                    let nx = if side == 0.0 { -1.0 } else { 1.0 };
                    let g = self.velocity_gradient(x);
                    let pv = self.p.value(x);
                    for comp in 0..3 {
                        let pn = if comp == 0 { -pv * nx } else { 0.0 };
                        c.max_do_nothing = c.max_do_nothing.max((pn + self.model.nu * g[comp][0] * nx).abs());
                    }
                    c.max_open_flux = c.max_open_flux.max(self.theta.gradient(x)[0].abs());
                }
            }
        }
        c
    }
}

fn unit_model() -> MaterialModel {
    MaterialModel::constant_density(1.0, 1.0, 1.0, 1.0, 1.0)
}

/// Smooth divergence-free velocity from the stream-function-like construction
/// `u = (X Y' Z, -X' Y Z, 0)` with `X = sin(pi x/Lx)`, `Y = sin^2(pi y/Ly)`,
/// `Z = sin(pi z/Lz)`, and pressure `P = nu X' Y' Z` (do-nothing compatible).
pub fn stokes_trig_velocity(dims: [f64; 3], nu: f64, amplitude: f64) -> ([SeparableField; 3], SeparableField) {
    let (wx, wy, wz) = (PI / dims[0], PI / dims[1], PI / dims[2]);
    // Y = (1 - cos(2 wy y)) / 2, Y' = wy sin(2 wy y)
    let u1 = SeparableField::term(amplitude * wy, [Profile::Sin(wx), Profile::Sin(2.0 * wy), Profile::Sin(wz)]);
    let u2 = SeparableField::term(-0.5 * amplitude * wx, [Profile::Cos(wx), Profile::One, Profile::Sin(wz)])
        .plus(SeparableField::term(0.5 * amplitude * wx, [Profile::Cos(wx), Profile::Cos(2.0 * wy), Profile::Sin(wz)]));
    let p = SeparableField::term(nu * amplitude * wx * wy, [Profile::Cos(wx), Profile::Sin(2.0 * wy), Profile::Sin(wz)]);
    ([u1, u2, SeparableField::zero()], p)
}

pub fn stokes_trig(dims: [f64; 3]) -> ManufacturedCase {
    let model = unit_model();
    let (u, p) = stokes_trig_velocity(dims, model.nu, 1.0);
    ManufacturedCase {
        name: "stokes_trig".into(),
        dims,
        model,
        u,
        p,
        theta: SeparableField::zero(),
        theta_wall: 0.0,
        g: VectorField::constant([0.0; 3]),
    }
}

/// `u = (y (Ly - y) z (Lz - z), 0, 0)`, `P = 0`: reproduced exactly by Q2/Q1.
pub fn stokes_polynomial(dims: [f64; 3]) -> ManufacturedCase {
    let py = Profile::Quadratic([0.0, dims[1], -1.0]);
    let pz = Profile::Quadratic([0.0, dims[2], -1.0]);
    ManufacturedCase {
        name: "stokes_polynomial".into(),
        dims,
        model: unit_model(),
        u: [SeparableField::term(1.0, [Profile::One, py, pz]), SeparableField::zero(), SeparableField::zero()],
        p: SeparableField::zero(),
        theta: SeparableField::zero(),
        theta_wall: 0.0,
        g: VectorField::constant([0.0; 3]),
    }
}

/// `theta = offset + cos(pi x/Lx) sin(pi y/Ly) sin(pi z/Lz)`: zero normal flux on the open ends.
pub fn heat_trig(dims: [f64; 3], offset: f64) -> ManufacturedCase {
    let (wx, wy, wz) = (PI / dims[0], PI / dims[1], PI / dims[2]);
    ManufacturedCase {
        name: "heat_trig".into(),
        dims,
        model: unit_model(),
        u: [SeparableField::zero(), SeparableField::zero(), SeparableField::zero()],
        p: SeparableField::zero(),
        theta: SeparableField::constant(offset).plus(SeparableField::term(
            1.0,
            [Profile::Cos(wx), Profile::Sin(wy), Profile::Sin(wz)],
        )),
        theta_wall: offset,
        g: VectorField::constant([0.0; 3]),
    }
}

/// `theta = y (Ly - y) z (Lz - z)`.
pub fn heat_quadratic(dims: [f64; 3]) -> ManufacturedCase {
    let mut c = heat_trig(dims, 0.0);
    c.name = "heat_quadratic".into();
    c.theta = SeparableField::term(
        1.0,
        [Profile::One, Profile::Quadratic([0.0, dims[1], -1.0]), Profile::Quadratic([0.0, dims[2], -1.0])],
    );
    c
}

/// `theta = sin(pi x/Lx) sin(pi y/Ly) sin(pi z/Lz)`: nonzero normal flux on the open ends,
/// which the discrete problem (natural zero-flux condition there) cannot reproduce.
pub fn heat_incompatible(dims: [f64; 3]) -> ManufacturedCase {
    let (wx, wy, wz) = (PI / dims[0], PI / dims[1], PI / dims[2]);
    let mut c = heat_trig(dims, 0.0);
    c.name = "heat_incompatible".into();
    c.theta = SeparableField::term(1.0, [Profile::Sin(wx), Profile::Sin(wy), Profile::Sin(wz)]);
    c
}

/// Coupled case: trigonometric velocity of the given amplitude and
/// `theta = 1 + 0.5 cos(pi x/Lx) sin(pi y/Ly) sin(pi z/Lz)`.
pub fn coupled_case(dims: [f64; 3], model: MaterialModel, amplitude: f64, g: VectorField) -> ManufacturedCase {
    let (u, p) = stokes_trig_velocity(dims, model.nu, amplitude);
    let mut c = heat_trig(dims, 1.0);
    c.theta = SeparableField::constant(1.0).plus(c.theta.terms.into_iter().skip(1).fold(SeparableField::zero(), |acc, t| {
        acc.plus(SeparableField { terms: vec![Term { coef: 0.5 * t.coef, ..t }] })
    }));
    ManufacturedCase { name: "coupled".into(), model, u, p, g, ..c }
}

/// Zero velocity with constant temperature.
pub fn zero_case(dims: [f64; 3], model: MaterialModel, theta: f64) -> ManufacturedCase {
    ManufacturedCase {
        name: "zero".into(),
        dims,
        model,
        u: [SeparableField::zero(), SeparableField::zero(), SeparableField::zero()],
        p: SeparableField::zero(),
        theta: SeparableField::constant(theta),
        theta_wall: theta,
        g: VectorField::constant([0.0; 3]),
    }
}

/// `(||u_h - u||_{L^2}, ||u_h - u||_{H^1})` for a vector (3 components) or scalar field.
pub fn field_errors(
    space: &DiscreteSpace,
    uh: &[f64],
    exact: &dyn Fn([f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>),
) -> (f64, f64) {
    let n = space.n_scalar();
    let nc = uh.len() / n;
    let t = &space.tables;
    let (mut l2, mut h1) = (0.0, 0.0);
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let locals: Vec<[f64; 27]> = (0..nc).map(|c| nodes.map(|i| uh[c * n + i])).collect();
        for q in 0..t.len() {
            let (ev, eg) = exact(space.qp_coord(cell, q));
            for c in 0..nc {
                let (v, g) = space.eval_scalar(q, &locals[c]);
                l2 += t.weights[q] * (v - ev[c]).powi(2);
                h1 += t.weights[q] * ((g[0] - eg[c][0]).powi(2) + (g[1] - eg[c][1]).powi(2) + (g[2] - eg[c][2]).powi(2));
            }
        }
    }
    (l2.sqrt(), (l2 + h1).sqrt())
}

pub fn pressure_error(space: &DiscreteSpace, ph: &[f64], exact: &dyn Fn([f64; 3]) -> f64) -> f64 {
    let t = &space.tables;
    let mut s = 0.0;
    for cell in 0..space.n_cells() {
        let pn = space.cell_pressure_nodes(cell);
        let local = pn.map(|i| ph[i]);
        for q in 0..t.len() {
            s += t.weights[q] * (space.eval_pressure(q, &local) - exact(space.qp_coord(cell, q))).powi(2);
        }
    }
    s.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub divisions: [usize; 3],
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
    /// Pressure L^2 error for flow studies, `None` for heat studies.
    pub pressure_l2: Option<f64>,
    /// Temperature L^2 and H^1 errors of coupled runs.
    pub theta_l2: Option<f64>,
    pub theta_h1: Option<f64>,
    pub order_l2: Option<f64>,
    pub order_h1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorTable {
    pub case: String,
    pub rows: Vec<ErrorRow>,
    /// Errors decrease from each level to the next.
    pub monotone: bool,
    /// Every H^1 error is below 1e-10 (exact reproduction; orders are then meaningless).
    pub exact: bool,
}

impl ErrorTable {
    /// Fills in observed orders and the monotonicity flag.
    pub fn from_rows(case: &str, mut rows: Vec<ErrorRow>) -> Self {
        for k in 1..rows.len() {
            let hr = (rows[k - 1].h / rows[k].h).ln();
            rows[k].order_l2 = Some((rows[k - 1].l2 / rows[k].l2).ln() / hr);
            rows[k].order_h1 = Some((rows[k - 1].h1 / rows[k].h1).ln() / hr);
        }
        let monotone = rows.windows(2).all(|w| w[1].l2 < w[0].l2 && w[1].h1 < w[0].h1);
        let exact = !rows.is_empty() && rows.iter().all(|r| r.h1 < 1e-10);
        ErrorTable { case: case.into(), rows, monotone, exact }
    }

    pub fn final_orders(&self) -> (f64, f64) {
        let last = self.rows.last().expect("non-empty table");
        (last.order_l2.unwrap_or(f64::NAN), last.order_h1.unwrap_or(f64::NAN))
    }

    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut s = String::from("nx,ny,nz,h,l2_error,h1_error,pressure_l2_error,theta_l2_error,theta_h1_error,order_l2,order_h1\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{:.16e},{},{},{},{},{}\n",
                r.divisions[0],
                r.divisions[1],
                r.divisions[2],
                r.h,
                r.l2,
                r.h1,
                fmt(r.pressure_l2),
                fmt(r.theta_l2),
                fmt(r.theta_h1),
                fmt(r.order_l2),
                fmt(r.order_h1)
            ));
        }
        s
    }
}

fn level_space(dims: [f64; 3], divisions: [usize; 3]) -> Result<DiscreteSpace> {
    build_spaces(&build_channel_mesh(dims, divisions)?, DEFAULT_QUAD_ORDER)
}

fn max_spacing(space: &DiscreteSpace) -> f64 {
    space.tables.h.iter().copied().fold(0.0, f64::max)
}

/// Stokes solve with the manufactured forcing on each level.
pub fn mms_stokes_study(case: &ManufacturedCase, levels: &[[usize; 3]]) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for &div in levels {
        let space = level_space(case.dims, div)?;
        let op = StokesOperator::new(&space, &case.model)?;
        let (u, p) = op.solve(&vector_source_load(&space, &|x| case.stokes_forcing(x)).values)?;
        let (l2, h1) = field_errors(&space, &u, &|x| (case.velocity(x).to_vec(), case.velocity_gradient(x).to_vec()));
        let pe = pressure_error(&space, &p, &|x| case.p.value(x));
        rows.push(ErrorRow {
            divisions: div,
            h: max_spacing(&space),
            l2,
            h1,
            pressure_l2: Some(pe),
            theta_l2: None,
            theta_h1: None,
            order_l2: None,
            order_h1: None,
        });
    }
    Ok(ErrorTable::from_rows(&case.name, rows))
}

/// Poisson solve `-lambda lap theta = h` with the wall value as lifting on each level.
pub fn mms_heat_study(case: &ManufacturedCase, levels: &[[usize; 3]]) -> Result<ErrorTable> {
    let mut rows = Vec::new();
    for &div in levels {
        let space = level_space(case.dims, div)?;
        let heat = HeatOperator::new(&space, &case.model)?;
        let lift = vec![case.theta_wall; space.n_scalar()];
        let mut load = scalar_source_load(&space, &|x| case.poisson_forcing(x)).values;
        let kl = heat.kappa().mul_vec(&lift);
        load.iter_mut().zip(&kl).for_each(|(a, b)| *a -= b);
        let theta: Vec<f64> = heat.solve(&load).iter().zip(&lift).map(|(a, b)| a + b).collect();
        let (l2, h1) = field_errors(&space, &theta, &|x| {
            let (v, g, _) = case.theta.jet(x);
            (vec![v], vec![g])
        });
        rows.push(ErrorRow {
            divisions: div,
            h: max_spacing(&space),
            l2,
            h1,
            pressure_l2: None,
            theta_l2: None,
            theta_h1: None,
            order_l2: None,
            order_h1: None,
        });
    }
    Ok(ErrorTable::from_rows(&case.name, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledReport {
    pub case: String,
    pub divisions: [usize; 3],
    pub h: f64,
    pub outer_iterations: usize,
    pub velocity_l2: f64,
    pub velocity_h1: f64,
    pub pressure_l2: f64,
    pub theta_l2: f64,
    pub theta_h1: f64,
    pub trace: IterationTrace,
}

/// Full nonlinear pipeline with manufactured sources on one mesh.
pub fn coupled_mms(case: &ManufacturedCase, divisions: [usize; 3], settings: SolverSettings) -> Result<CoupledReport> {
    let space = level_space(case.dims, divisions)?;
    let c = Arc::new(case.clone());
    let (c1, c2) = (c.clone(), c.clone());
    let problem = Problem {
        model: case.model,
        g: case.g.to_fn(),
        theta_d: {
            let w = case.theta_wall;
            Arc::new(move |_| w)
        },
        momentum_source: Some(Arc::new(move |x| c1.momentum_source(x))),
        heat_source: Some(Arc::new(move |x| c2.heat_source(x))),
        settings,
    };
    let solver = FixedPointSolver::new(&space, problem)?;
    let (state, trace) = solver.outer_loop()?;
    let (velocity_l2, velocity_h1) =
        field_errors(&space, &state.u, &|x| (case.velocity(x).to_vec(), case.velocity_gradient(x).to_vec()));
    let (theta_l2, theta_h1) = field_errors(&space, &state.theta, &|x| {
        let (v, g, _) = case.theta.jet(x);
        (vec![v], vec![g])
    });
    Ok(CoupledReport {
        case: case.name.clone(),
        divisions,
        h: max_spacing(&space),
        outer_iterations: trace.records.len(),
        velocity_l2,
        velocity_h1,
        pressure_l2: pressure_error(&space, &state.p, &|x| case.p.value(x)),
        theta_l2,
        theta_h1,
        trace,
    })
}

impl CoupledReport {
    pub fn error_row(&self) -> ErrorRow {
        ErrorRow {
            divisions: self.divisions,
            h: self.h,
            l2: self.velocity_l2,
            h1: self.velocity_h1,
            pressure_l2: Some(self.pressure_l2),
            theta_l2: Some(self.theta_l2),
            theta_h1: Some(self.theta_h1),
            order_l2: None,
            order_h1: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives() {
        for p in [Profile::Sin(1.3), Profile::Cos(0.7), Profile::Quadratic([1.0, -2.0, 0.5])] {
            let t = 0.41;
            let h = 1e-5;
            let e = p.eval(t);
            let d1 = (p.eval(t + h)[0] - p.eval(t - h)[0]) / (2.0 * h);
            let d2 = (p.eval(t + h)[1] - p.eval(t - h)[1]) / (2.0 * h);
            assert!((d1 - e[1]).abs() < 1e-8 && (d2 - e[2]).abs() < 1e-8);
        }
    }

    #[test]
    fn cases_are_compatible() {
        let dims = [1.0, 1.0, 4.0];
        assert!(stokes_trig(dims).compatibility(12).flow_ok(1e-12));
        assert!(stokes_polynomial(dims).compatibility(12).flow_ok(1e-12));
        assert!(heat_trig(dims, 0.3).compatibility(12).heat_ok(1e-12));
        assert!(heat_quadratic(dims).compatibility(12).heat_ok(1e-12));
        assert!(!heat_incompatible(dims).compatibility(12).heat_ok(1e-3));
        let c = coupled_case(dims, MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0), 0.1, VectorField::constant([0.0, 0.0, -1.0]));
        assert!(c.compatibility(12).flow_ok(1e-12) && c.compatibility(12).heat_ok(1e-12));
    }

    #[test]
    fn polynomial_cases_exact() {
        let dims = [1.0, 1.0, 2.0];
        let t = mms_stokes_study(&stokes_polynomial(dims), &[[1, 1, 2], [2, 2, 4]]).unwrap();
        for r in &t.rows {
            assert!(r.h1 < 1e-11 && r.pressure_l2.unwrap() < 1e-11, "{r:?}");
        }
        let t = mms_heat_study(&heat_quadratic(dims), &[[1, 1, 2], [2, 2, 4]]).unwrap();
        for r in &t.rows {
            assert!(r.h1 < 1e-12, "{r:?}");
        }
    }
}
