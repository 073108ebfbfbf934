//! Quadrature evaluation of discrete norms: L^p, H^1 and the broken W^{2,p} norm
//! (cellwise second derivatives of the quadratic basis).
//!
//! Fields are recognized by length: `n_scalar` entries for a scalar Q2 field,
//! `3 n_scalar` for a velocity field. Pointwise magnitudes are Euclidean
//! (Frobenius for gradients and Hessians).

use crate::error::{Error, Result};
use crate::space::DiscreteSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Lp(f64),
    H1,
    BrokenW2(f64),
}

/// Lower end of the admissible exponent range.
pub const S_MIN: f64 = 4.0 / 3.0;

/// Checked entry point: rejects exponents outside `[4/3, s0)`.
pub fn discrete_norms(space: &DiscreteSpace, field: &[f64], which: NormKind) -> Result<f64> {
    let s0 = crate::spectrum::s0_bound();
    let check = |s: f64| {
        if s >= S_MIN && s < s0 {
            Ok(())
        } else {
            Err(Error::ExponentRange { value: s, range: format!("[4/3, {s0:.6})") })
        }
    };
    match which {
        NormKind::Lp(s) => {
            check(s)?;
            Ok(lp_norm(space, field, s))
        }
        NormKind::H1 => Ok(h1_norm(space, field)),
        NormKind::BrokenW2(s) => {
            check(s)?;
            Ok(broken_w2_norm(space, field, s))
        }
    }
}

fn components(space: &DiscreteSpace, field: &[f64]) -> usize {
    let n = space.n_scalar();
    if field.len() == n {
        1
    } else {
        assert_eq!(field.len(), 3 * n, "field length matches neither scalar nor vector layout");
        3
    }
}

/// Calls `f(weight, |v|^2, |grad v|^2, |D^2 v|^2)` at every quadrature point.
fn fold_points(space: &DiscreteSpace, field: &[f64], hessian: bool, mut f: impl FnMut(f64, f64, f64, f64)) {
    let nc = components(space, field);
    let n = space.n_scalar();
    let t = &space.tables;
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let locals: Vec<[f64; 27]> = (0..nc).map(|c| nodes.map(|i| field[c * n + i])).collect();
        for q in 0..t.len() {
            let (mut v2, mut g2, mut h2) = (0.0, 0.0, 0.0);
            for l in &locals {
                let (v, g) = space.eval_scalar(q, l);
                v2 += v * v;
                g2 += g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
                if hessian {
                    let h = space.eval_hessian(q, l);
                    h2 += h[0] * h[0] + h[1] * h[1] + h[2] * h[2] + 2.0 * (h[3] * h[3] + h[4] * h[4] + h[5] * h[5]);
                }
            }
            f(t.weights[q], v2, g2, h2);
        }
    }
}

/// `(int |v|^p)^(1/p)`; `p = inf` gives the maximum over quadrature points and nodes.
pub fn lp_norm(space: &DiscreteSpace, field: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return sup_norm(space, field);
    }
    let mut s = 0.0;
    fold_points(space, field, false, |w, v2, _, _| s += w * v2.powf(0.5 * p));
    s.powf(1.0 / p)
}

/// Maximum of `|v|` over quadrature points and nodal values.
pub fn sup_norm(space: &DiscreteSpace, field: &[f64]) -> f64 {
    let nc = components(space, field);
    let n = space.n_scalar();
    let mut m = (0..n)
        .map(|i| (0..nc).map(|c| field[c * n + i].powi(2)).sum::<f64>())
        .fold(0.0f64, f64::max);
    fold_points(space, field, false, |_, v2, _, _| m = m.max(v2));
    m.sqrt()
}

/// `||grad v||_{L^2}`.
pub fn h1_seminorm(space: &DiscreteSpace, field: &[f64]) -> f64 {
    let mut s = 0.0;
    fold_points(space, field, false, |w, _, g2, _| s += w * g2);
    s.sqrt()
}

/// `(||v||_{L^2}^2 + ||grad v||_{L^2}^2)^(1/2)`.
pub fn h1_norm(space: &DiscreteSpace, field: &[f64]) -> f64 {
    let mut s = 0.0;
    fold_points(space, field, false, |w, v2, g2, _| s += w * (v2 + g2));
    s.sqrt()
}

/// `(int |v|^p + |grad v|^p + |D^2 v|^p)^(1/p)` with second derivatives taken cellwise.
pub fn broken_w2_norm(space: &DiscreteSpace, field: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    fold_points(space, field, true, |w, v2, g2, h2| {
        s += w * (v2.powf(0.5 * p) + g2.powf(0.5 * p) + h2.powf(0.5 * p));
    });
    s.powf(1.0 / p)
}

/// Second-derivative part of [`broken_w2_norm`] alone.
pub fn broken_hessian_seminorm(space: &DiscreteSpace, field: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    fold_points(space, field, true, |w, _, _, h2| s += w * h2.powf(0.5 * p));
    s.powf(1.0 / p)
}

/// L^p norm of a closed-form scalar function by cell quadrature.
/// Volume average of a scalar field.
pub fn mean_value(space: &DiscreteSpace, field: &[f64]) -> f64 {
    let t = &space.tables;
    let mut s = 0.0;
    for cell in 0..space.n_cells() {
        let local = space.gather_scalar(&space.cell_nodes(cell), field);
        for q in 0..t.len() {
            s += t.weights[q] * space.eval_scalar(q, &local).0;
        }
    }
    s / space.mesh.volume()
}

pub fn closed_form_lp_scalar(space: &DiscreteSpace, f: &dyn Fn([f64; 3]) -> f64, p: f64) -> f64 {
    let t = &space.tables;
    let mut s = 0.0;
    for cell in 0..space.n_cells() {
        for q in 0..t.len() {
            s += t.weights[q] * f(space.qp_coord(cell, q)).abs().powf(p);
        }
    }
    s.powf(1.0 / p)
}

/// L^p norm of a closed-form vector function by cell quadrature.
pub fn closed_form_lp_vector(space: &DiscreteSpace, f: &dyn Fn([f64; 3]) -> [f64; 3], p: f64) -> f64 {
    let t = &space.tables;
    let mut s = 0.0;
    for cell in 0..space.n_cells() {
        for q in 0..t.len() {
            let v = f(space.qp_coord(cell, q));
            s += t.weights[q] * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).powf(0.5 * p);
        }
    }
    s.powf(1.0 / p)
}
