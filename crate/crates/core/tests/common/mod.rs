#![allow(dead_code)]

use openchannel::material::MaterialModel;
use openchannel::mesh::build_channel_mesh;
use openchannel::space::{build_spaces, DiscreteSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn space(dims: [f64; 3], div: [usize; 3]) -> DiscreteSpace {
    build_spaces(&build_channel_mesh(dims, div).unwrap(), 5).unwrap()
}

pub fn unit_model() -> MaterialModel {
    MaterialModel::constant_density(1.0, 1.0, 1.0, 1.0, 1.0)
}

pub fn small_model() -> MaterialModel {
    MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random polynomial of degree <= 2 in each variable.
pub fn random_q2(rng: &mut ChaCha8Rng) -> impl Fn([f64; 3]) -> f64 {
    let c: Vec<f64> = random_vec(rng, 27);
    move |p: [f64; 3]| {
        let mut s = 0.0;
        for k in 0..3 {
            for j in 0..3 {
                for i in 0..3 {
                    s += c[i + 3 * (j + 3 * k)] * p[0].powi(i as i32) * p[1].powi(j as i32) * p[2].powi(k as i32);
                }
            }
        }
        s
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// `u = (X Y' Z, -X' Y Z, 0)` plus `(X2 Y2 Z2', 0, -X2' Y2 Z2)` with random cubic X, X2:
/// divergence free, vanishing normal component on the walls, polynomial.
pub fn random_solenoidal(rng: &mut ChaCha8Rng, l: [f64; 3]) -> impl Fn([f64; 3]) -> [f64; 3] {
    let a: Vec<f64> = random_vec(rng, 4);
    let b: Vec<f64> = random_vec(rng, 4);
    let cubic = |c: &[f64], x: f64| (c[0] + x * (c[1] + x * (c[2] + x * c[3])), c[1] + x * (2.0 * c[2] + 3.0 * x * c[3]));
    move |p: [f64; 3]| {
        let [x, y, z] = p;
        let (xa, dxa) = cubic(&a, x);
        let (xb, dxb) = cubic(&b, x);
        let ya = y * y * (l[1] - y).powi(2);
        let dya = 2.0 * y * (l[1] - y) * (l[1] - 2.0 * y);
        let za = z * (l[2] - z);
        let yb = y * (l[1] - y);
        let zb = z * z * (l[2] - z).powi(2);
        let dzb = 2.0 * z * (l[2] - z) * (l[2] - 2.0 * z);
        [xa * dya * za + xb * yb * dzb, -dxa * ya * za, -dxb * yb * zb]
    }
}
