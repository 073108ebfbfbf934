use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use openchannel::fields::VectorField;
use openchannel::fixed_point::SolverSettings;
use openchannel::forms::strain_contraction;
use openchannel::material::MaterialModel;
use openchannel::verification::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Second-order forward jet in three variables: value, gradient, Hessian.
#[derive(Clone, Copy)]
struct J {
    v: f64,
    g: [f64; 3],
    h: [[f64; 3]; 3],
}

impl J {
    fn c(v: f64) -> J {
        J { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }
    fn var(v: f64, i: usize) -> J {
        let mut j = J::c(v);
        j.g[i] = 1.0;
        j
    }
    /// Chain rule through a scalar function with derivatives `f0, f1, f2`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> J {
        let mut r = J::c(f0);
        for a in 0..3 {
            r.g[a] = f1 * self.g[a];
            for b in 0..3 {
                r.h[a][b] = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
            }
        }
        r
    }
    fn sin(self) -> J {
        self.chain(self.v.sin(), self.v.cos(), -self.v.sin())
    }
    fn cos(self) -> J {
        self.chain(self.v.cos(), -self.v.sin(), -self.v.cos())
    }
    fn lap(&self) -> f64 {
        self.h[0][0] + self.h[1][1] + self.h[2][2]
    }
}

impl Add for J {
    type Output = J;
    fn add(self, o: J) -> J {
        let mut r = self;
        r.v += o.v;
        for a in 0..3 {
            r.g[a] += o.g[a];
            for b in 0..3 {
                r.h[a][b] += o.h[a][b];
            }
        }
        r
    }
}

impl Neg for J {
    type Output = J;
    fn neg(self) -> J {
        self * J::c(-1.0)
    }
}

impl Sub for J {
    type Output = J;
    fn sub(self, o: J) -> J {
        self + (-o)
    }
}

impl Mul for J {
    type Output = J;
    fn mul(self, o: J) -> J {
        let mut r = J::c(self.v * o.v);
        for a in 0..3 {
            r.g[a] = self.g[a] * o.v + self.v * o.g[a];
            for b in 0..3 {
                r.h[a][b] = self.h[a][b] * o.v + self.g[a] * o.g[b] + self.g[b] * o.g[a] + self.v * o.h[a][b];
            }
        }
        r
    }
}

fn k(v: f64) -> J {
    J::c(v)
}

/// Trigonometric velocity and pressure written out directly:
/// `u = a (X Y' Z, -X' Y Z, 0)`, `P = nu a X' Y' Z`, `X = sin(pi x/Lx)`, `Y = sin^2(pi y/Ly)`, `Z = sin(pi z/Lz)`.
fn trig_flow(dims: [f64; 3], nu: f64, a: f64, x: [J; 3]) -> ([J; 3], J) {
    let (wx, wy, wz) = (PI / dims[0], PI / dims[1], PI / dims[2]);
    let (sx, cx) = ((k(wx) * x[0]).sin(), (k(wx) * x[0]).cos());
    let (sy, cy) = ((k(wy) * x[1]).sin(), (k(wy) * x[1]).cos());
    let z = (k(wz) * x[2]).sin();
    let big_x = sx;
    let dx = k(wx) * cx;
    let big_y = sy * sy;
    let dy = k(2.0 * wy) * sy * cy;
    let u = [k(a) * big_x * dy * z, -(k(a) * dx * big_y * z), k(0.0)];
    (u, k(nu * a) * dx * dy * z)
}

fn coupled_theta(dims: [f64; 3], x: [J; 3]) -> J {
    let (wx, wy, wz) = (PI / dims[0], PI / dims[1], PI / dims[2]);
    k(1.0) + k(0.5) * (k(wx) * x[0]).cos() * (k(wy) * x[1]).sin() * (k(wz) * x[2]).sin()
}

fn points(dims: [f64; 3], n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [0, 1, 2].map(|d| rng.gen_range(0.0..dims[d]))).collect()
}

fn jets(p: [f64; 3]) -> [J; 3] {
    [J::var(p[0], 0), J::var(p[1], 1), J::var(p[2], 2)]
}

/// Strong momentum and heat residuals of the manufactured fields with the case's sources.
fn strong_residuals(case: &ManufacturedCase, m: &MaterialModel, u: [J; 3], p: J, th: J, x: [f64; 3]) -> (f64, f64, f64) {
    let g = case.g.eval(x);
    let f = case.momentum_source(x);
    let rho = m.density(th.v);
    let mut rm: f64 = 0.0;
    for c in 0..3 {
        let conv: f64 = (0..3).map(|d| u[d].v * u[c].g[d]).sum();
        let r = -m.nu * u[c].lap() + m.rho0 * conv + p.g[c] - rho * g[c] - f[c];
        rm = rm.max(r.abs());
    }
    let div = (u[0].g[0] + u[1].g[1] + u[2].g[2]).abs();
    let gu = [u[0].g, u[1].g, u[2].g];
    let adv: f64 = (0..3).map(|d| u[d].v * th.g[d]).sum();
    let rh = -m.lambda * th.lap() + m.c_v * rho * adv - m.alpha1 * m.nu * strain_contraction(&gu, &gu) - case.heat_source(x);
    (rm, div, rh.abs())
}

const DIMS: [f64; 3] = [1.0, 1.0, 4.0];

#[test]
fn coupled_forcing_matches_independent_jets() {
    let m = MaterialModel::boussinesq(0.7, 1.3, 1.1, 0.9, 0.8, 0.1, 0.0);
    let case = coupled_case(DIMS, m, 0.3, VectorField::constant([0.2, 0.0, -1.0]));
    for x in points(DIMS, 1000, 1) {
        let (u, p) = trig_flow(DIMS, m.nu, 0.3, jets(x));
        let th = coupled_theta(DIMS, jets(x));
        let (rm, div, rh) = strong_residuals(&case, &m, u, p, th, x);
        assert!(rm < 1e-10 && div < 1e-10 && rh < 1e-10, "{x:?}: {rm} {div} {rh}");
        assert!((case.theta.value(x) - th.v).abs() < 1e-14);
    }
}

#[test]
fn single_physics_forcings_match_independent_jets() {
    let trig = stokes_trig(DIMS);
    let heat = heat_trig(DIMS, 0.25);
    let quad = heat_quadratic(DIMS);
    for x in points(DIMS, 1000, 2) {
        let (u, p) = trig_flow(DIMS, 1.0, 1.0, jets(x));
        let f = trig.stokes_forcing(x);
        for c in 0..3 {
            assert!((-u[c].lap() + p.g[c] - f[c]).abs() < 1e-10);
        }
        let [a, b, c] = jets(x);
        let th = k(0.25) + (k(PI) * a).cos() * (k(PI) * b).sin() * (k(PI / 4.0) * c).sin();
        assert!((-th.lap() - heat.poisson_forcing(x)).abs() < 1e-10);
        let q = b * (k(1.0) - b) * c * (k(4.0) - c);
        assert!((-q.lap() - quad.poisson_forcing(x)).abs() < 1e-10);
    }
}

#[test]
fn compatibility_flags() {
    let m = MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0);
    for c in [stokes_trig(DIMS), stokes_polynomial(DIMS), coupled_case(DIMS, m, 0.1, VectorField::constant([0.0, 0.0, -1.0]))] {
        assert!(c.compatibility(12).flow_ok(1e-12), "{}", c.name);
    }
    for c in [heat_trig(DIMS, 0.0), heat_quadratic(DIMS), coupled_case(DIMS, m, 0.1, VectorField::constant([0.0; 3]))] {
        assert!(c.compatibility(12).heat_ok(1e-12), "{}", c.name);
    }
    assert!(!heat_incompatible(DIMS).compatibility(12).heat_ok(1e-3));
}

#[test]
fn polynomial_cases_reproduced_exactly() {
    let levels = [[1, 1, 2], [2, 2, 4]];
    let s = mms_stokes_study(&stokes_polynomial(DIMS), &levels).unwrap();
    let h = mms_heat_study(&heat_quadratic(DIMS), &levels).unwrap();
    for t in [&s, &h] {
        assert!(t.exact, "{}", t.to_csv());
        assert!(t.rows.iter().all(|r| r.l2 < 1e-10 && r.h1 < 1e-10));
    }
    assert!(s.rows.iter().all(|r| r.pressure_l2.unwrap() < 1e-9));
}

#[test]
fn heat_orders_and_negative_control() {
    let levels = [[2, 2, 8], [4, 4, 16], [8, 8, 32]];
    let t = mms_heat_study(&heat_trig(DIMS, 0.0), &levels).unwrap();
    let (l2, h1) = t.final_orders();
    assert!(t.monotone && h1 >= 1.8 && l2 >= 2.5, "{}", t.to_csv());
    let bad = mms_heat_study(&heat_incompatible(DIMS), &levels).unwrap();
    let (bl2, bh1) = bad.final_orders();
    assert!(bl2 < 1.0 && bh1 < 1.0, "{}", bad.to_csv());
}

#[test]
fn error_table_csv() {
    let t = mms_heat_study(&heat_trig(DIMS, 0.0), &[[1, 1, 4], [2, 2, 8]]).unwrap();
    let csv = t.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "nx,ny,nz,h,l2_error,h1_error,pressure_l2_error,theta_l2_error,theta_h1_error,order_l2,order_h1");
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.split(',').count() == 11));
}

#[test]
fn coupled_zero_case_is_exact() {
    let m = MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0);
    let r = coupled_mms(&zero_case(DIMS, m, 0.4), [1, 1, 4], SolverSettings::default()).unwrap();
    assert_eq!(r.outer_iterations, 1);
    assert!(r.velocity_h1 < 1e-12 && r.theta_h1 < 1e-12 && r.pressure_l2 < 1e-12, "{r:?}");
}

#[test]
fn coupled_small_amplitude_tracks_single_physics_rates() {
    let m = MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0);
    let case = coupled_case(DIMS, m, 0.1, VectorField::constant([0.0, 0.0, -1.0]));
    let coarse = coupled_mms(&case, [2, 2, 8], SolverSettings::default()).unwrap();
    let fine = coupled_mms(&case, [4, 4, 16], SolverSettings::default()).unwrap();
    let stokes = mms_stokes_study(&stokes_trig(DIMS), &[[2, 2, 8], [4, 4, 16]]).unwrap();
    for r in [&coarse, &fine] {
        assert!(r.trace.converged && r.outer_iterations <= 30);
    }
    let order = (coarse.velocity_h1 / fine.velocity_h1).log2();
    let single = stokes.final_orders().1;
    assert!((order - single).abs() < 0.2 && order > 1.6, "{order} vs {single}");
    assert!((coarse.theta_h1 / fine.theta_h1).log2() > 1.6);
}

#[test]
fn large_amplitude_probe_is_recorded() {
    let m = MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0);
    let case = coupled_case(DIMS, m, 1.0, VectorField::constant([0.0, 0.0, -1.0]));
    match coupled_mms(&case, [2, 2, 8], SolverSettings::default()) {
        Ok(r) => assert!(r.trace.converged && r.outer_iterations >= 3),
        Err(e) => assert!(matches!(
            e,
            openchannel::Error::OuterMaxIterations { .. } | openchannel::Error::InnerDivergence { .. } | openchannel::Error::InnerMaxIterations(_)
        )),
    }
}
