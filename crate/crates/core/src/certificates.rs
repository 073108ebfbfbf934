//! Empirical constants of the form bounds and the smallness / uniqueness certificates.
//!
//! Norm surrogates, used consistently throughout:
//! - a velocity produced by a solve is measured by the L^s norm of its load,
//!   a temperature produced by a solve by the L^r norm of its source;
//! - `||theta||_{W^{2,r}}` (and its `W^{2-eps,r}` relative) is the broken W^{2,r} norm;
//! - `||g||` is the L^s quadrature norm of the body force.
//!
//! Constants are running maxima of ratios over random smooth discrete fields; they
//! are lower bounds of the true suprema and are reported as empirical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed_point::{HeatOperator, State, StokesOperator};
use crate::forms::{strain_contraction, vector_source_load, scalar_source_load};
use crate::material::MaterialModel;
use crate::norms::{broken_w2_norm, closed_form_lp_scalar, closed_form_lp_vector, sup_norm};
use crate::space::DiscreteSpace;

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimates {
    pub c_b: f64,
    pub c_d: f64,
    pub c_e: f64,
    pub c_eps: f64,
    pub c_1: f64,
    pub samples: usize,
    pub seed: u64,
    pub s: f64,
    pub r: f64,
    pub method: String,
}

/// Random cosine expansion with wave numbers 0..=2 per axis.
#[derive(Debug, Clone)]
struct CosineLoad {
    dims: [f64; 3],
    coef: Vec<[f64; 3]>,
}

impl CosineLoad {
    fn random(rng: &mut ChaCha8Rng, dims: [f64; 3]) -> Self {
        let coef = (0..27)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        CosineLoad { dims, coef }
    }

    fn eval(&self, p: [f64; 3]) -> [f64; 3] {
        let pi = std::f64::consts::PI;
        let c: Vec<[f64; 3]> = (0..3)
            .map(|d| [0.0, 1.0, 2.0].map(|k: f64| (k * pi * p[d] / self.dims[d]).cos()))
            .collect();
        let mut out = [0.0; 3];
        for (m, a) in self.coef.iter().enumerate() {
            let w = c[0][m % 3] * c[1][(m / 3) % 3] * c[2][m / 9];
            for k in 0..3 {
                out[k] += a[k] * w;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct SampleRatios {
    c_b: f64,
    c_d: f64,
    c_e: f64,
    c_eps: f64,
    c_1: f64,
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// `(int |F(x)|^p)^(1/p)` for a pointwise quantity built from two velocity fields and a temperature.
fn pointwise_lp(
    space: &DiscreteSpace,
    u: &[f64],
    v: &[f64],
    theta: &[f64],
    p: f64,
    f: impl Fn([f64; 3], [[f64; 3]; 3], [f64; 3], [[f64; 3]; 3], [f64; 3]) -> f64,
) -> f64 {
    let t = &space.tables;
    let mut s = 0.0;
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lu = space.gather_vector(&nodes, u);
        let lv = space.gather_vector(&nodes, v);
        let lt = space.gather_scalar(&nodes, theta);
        for q in 0..t.len() {
            let (uq, gu) = space.eval_vector(q, &lu);
            let (vq, gv) = space.eval_vector(q, &lv);
            let (_, gt) = space.eval_scalar(q, &lt);
            s += t.weights[q] * f(uq, gu, vq, gv, gt).abs().powf(p);
        }
    }
    s.powf(1.0 / p)
}

fn sample(
    space: &DiscreteSpace,
    stokes: &StokesOperator,
    heat: &HeatOperator,
    s: f64,
    r: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SampleRatios> {
    let dims = space.mesh.dims;
    let fu = CosineLoad::random(rng, dims);
    let fv = CosineLoad::random(rng, dims);
    let ft = CosineLoad::random(rng, dims);
    let (u, _) = stokes.solve(&vector_source_load(space, &|p| fu.eval(p)).values)?;
    let (v, _) = stokes.solve(&vector_source_load(space, &|p| fv.eval(p)).values)?;
    let theta = heat.solve(&scalar_source_load(space, &|p| ft.eval(p)[0]).values);
    let u_d = closed_form_lp_vector(space, &|p| fu.eval(p), s);
    let v_d = closed_form_lp_vector(space, &|p| fv.eval(p), s);
    let f_theta = closed_form_lp_scalar(space, &|p| ft.eval(p)[0], r);
    let theta_w2 = broken_w2_norm(space, &theta, r);

    // |(u . grad) v|
    let b = {
        let t = &space.tables;
        let mut acc = 0.0;
        for cell in 0..space.n_cells() {
            let nodes = space.cell_nodes(cell);
            let lu = space.gather_vector(&nodes, &u);
            let lv = space.gather_vector(&nodes, &v);
            for q in 0..t.len() {
                let (uq, _) = space.eval_vector(q, &lu);
                let (_, gv) = space.eval_vector(q, &lv);
                let w: [f64; 3] = [0, 1, 2].map(|c| uq[0] * gv[c][0] + uq[1] * gv[c][1] + uq[2] * gv[c][2]);
                acc += t.weights[q] * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).powf(0.5 * s);
            }
        }
        acc.powf(1.0 / s)
    };
    let d = pointwise_lp(space, &u, &v, &theta, r, |uq, _, _, _, gt| uq[0] * gt[0] + uq[1] * gt[1] + uq[2] * gt[2]);
    let e = pointwise_lp(space, &u, &v, &theta, r, |_, gu, _, gv, _| strain_contraction(&gu, &gv));
    Ok(SampleRatios {
        c_b: b / (u_d * v_d),
        c_d: d / (u_d * theta_w2),
        c_e: e / (u_d * v_d),
        c_eps: theta_w2 / f_theta,
        c_1: sup_norm(space, &theta) / f_theta,
    })
}

fn check_sr(s: f64, r: f64) -> Result<()> {
    let s0 = crate::spectrum::s0_bound();
    if !(s >= crate::norms::S_MIN && s < s0) {
        return Err(Error::ExponentRange { value: s, range: format!("[4/3, {s0:.6})") });
    }
    let (lo, hi) = admissible_sr(s)?;
    if !(r >= lo && r <= hi) {
        return Err(Error::ExponentRange { value: r, range: format!("[{lo}, {hi}]") });
    }
    Ok(())
}

/// Running maxima of the defining ratios over `samples` random smooth fields.
/// Sample `i` draws from its own ChaCha stream, so estimates for `n` samples are a
/// prefix of those for any larger count.
pub fn estimate_constants(
    space: &DiscreteSpace,
    model: &MaterialModel,
    samples: usize,
    seed: u64,
    s: f64,
    r: f64,
) -> Result<ConstantEstimates> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("at least {MIN_SAMPLES} samples required, got {samples}")));
    }
    check_sr(s, r)?;
    let stokes = StokesOperator::new(space, model)?;
    let heat = HeatOperator::new(space, model)?;
    let ratios: Vec<SampleRatios> = (0..samples)
        .into_par_iter()
        .map(|i| sample(space, &stokes, &heat, s, r, &mut rng_for(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let mut est = ConstantEstimates {
        c_b: 0.0,
        c_d: 0.0,
        c_e: 0.0,
        c_eps: 0.0,
        c_1: 0.0,
        samples,
        seed,
        s,
        r,
        method: "empirical: running maximum over random cosine loads (wave numbers <= 2), solved fields".into(),
    };
    for q in ratios {
        est.c_b = est.c_b.max(q.c_b);
        est.c_d = est.c_d.max(q.c_d);
        est.c_e = est.c_e.max(q.c_e);
        est.c_eps = est.c_eps.max(q.c_eps);
        est.c_1 = est.c_1.max(q.c_1);
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub g_norm: f64,
    /// Smallest admissible margin, `None` when no `beta` in (0, 1) satisfies both inequalities.
    pub beta: Option<f64>,
    pub ball_radius: Option<f64>,
    /// `1 / (4 C_b rho_sharp rho0)`: the bound on `||g||` at `beta = 1`.
    pub first_threshold: f64,
    /// `1 / (2 C_eps C_d c_V rho_sharp^2)`.
    pub second_threshold: f64,
    /// `second_threshold - beta / (4 C_b rho_sharp rho0)` at the smallest `beta`.
    pub second_headroom: f64,
    pub smallness_ok: bool,
}

/// Evaluates `||g|| <= beta / (4 C_b rho_sharp rho0) < 1 / (2 C_eps C_d c_V rho_sharp^2)`
/// with the smallest `beta = 4 C_b rho_sharp rho0 ||g||`.
pub fn smallness_check(est: &ConstantEstimates, model: &MaterialModel, g_norm: f64) -> SmallnessReport {
    let rs = model.rho_sharp();
    let denom = 4.0 * est.c_b * rs * model.rho0;
    let first_threshold = 1.0 / denom;
    let second_threshold = 1.0 / (2.0 * est.c_eps * est.c_d * model.c_v * rs * rs);
    let beta = (denom * g_norm).max(f64::MIN_POSITIVE);
    let lhs = beta / denom;
    let second_headroom = second_threshold - lhs;
    let ok = beta < 1.0 && lhs < second_threshold;
    SmallnessReport {
        g_norm,
        beta: ok.then_some(beta),
        ball_radius: ok.then(|| beta / (2.0 * est.c_b * model.rho0)),
        first_threshold,
        second_threshold,
        second_headroom,
        smallness_ok: ok,
    }
}

/// Surrogate norms of one solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionNorms {
    /// L^s norm of the momentum load `rho(theta) g - rho0 (u . grad) u`.
    pub u_d: f64,
    /// Broken W^{2,r} norm of the full temperature.
    pub theta_w2r: f64,
}

/// Surrogate norms of a converged state.
pub fn solution_norms(
    space: &DiscreteSpace,
    model: &MaterialModel,
    g: &dyn Fn([f64; 3]) -> [f64; 3],
    state: &State,
    s: f64,
    r: f64,
) -> SolutionNorms {
    let t = &space.tables;
    let mut acc = 0.0;
    for cell in 0..space.n_cells() {
        let nodes = space.cell_nodes(cell);
        let lu = space.gather_vector(&nodes, &state.u);
        let lt = space.gather_scalar(&nodes, &state.theta);
        for q in 0..t.len() {
            let (uq, gu) = space.eval_vector(q, &lu);
            let (th, _) = space.eval_scalar(q, &lt);
            let gq = g(space.qp_coord(cell, q));
            let rho = model.density(th);
            let f: [f64; 3] = [0, 1, 2].map(|c| {
                rho * gq[c] - model.rho0 * (uq[0] * gu[c][0] + uq[1] * gu[c][1] + uq[2] * gu[c][2])
            });
            acc += t.weights[q] * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).powf(0.5 * s);
        }
    }
    SolutionNorms { u_d: acc.powf(1.0 / s), theta_w2r: broken_w2_norm(space, &state.theta, r) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub r: f64,
    pub norms_1: SolutionNorms,
    pub norms_2: SolutionNorms,
    /// `c_V C_1 C_eps C_d C_rho ||u1|| ||theta2|| + c_V C_eps rho_sharp C_d ||u2||`.
    pub sigma_coefficient: f64,
    /// `c_V C_eps rho_sharp C_d ||theta1|| + alpha1 nu C_e (||u1|| + ||u2||)`.
    pub z_coefficient: f64,
    /// `C_1 C_rho ||g||`.
    pub g_coupling: f64,
    /// Total coefficient of `||sigma||` after adding both inequalities.
    pub r1: f64,
    /// Total coefficient of `||z||` after adding both inequalities.
    pub r2: f64,
    pub uniqueness_ok: bool,
    pub grouping: String,
}

/// `R1`, `R2` for two solutions (pass the same norms twice for a single state).
/// Refuses `r <= 3/2`, where the sup-norm embedding is unavailable.
pub fn uniqueness_certificate(
    n1: &SolutionNorms,
    n2: &SolutionNorms,
    est: &ConstantEstimates,
    model: &MaterialModel,
    g_norm: f64,
) -> Result<UniquenessReport> {
    let r = est.r;
    if !(r > 1.5) {
        return Err(Error::ExponentRange { value: r, range: "(3/2, inf)".into() });
    }
    let rs = model.rho_sharp();
    let sigma_coefficient = model.c_v * est.c_1 * est.c_eps * est.c_d * model.c_rho() * n1.u_d * n2.theta_w2r
        + model.c_v * est.c_eps * rs * est.c_d * n2.u_d;
    let z_coefficient =
        model.c_v * est.c_eps * rs * est.c_d * n1.theta_w2r + model.alpha1 * model.nu * est.c_e * (n1.u_d + n2.u_d);
    let g_coupling = est.c_1 * model.c_rho() * g_norm;
    let r1 = sigma_coefficient * (1.0 + g_coupling);
    let r2 = z_coefficient * (1.0 + g_coupling) + model.rho0 * est.c_b * (n1.u_d + n2.u_d);
    Ok(UniquenessReport {
        r,
        norms_1: *n1,
        norms_2: *n2,
        sigma_coefficient,
        z_coefficient,
        g_coupling,
        r1,
        r2,
        uniqueness_ok: r1 < 1.0 && r2 < 1.0,
        grouping: "R1 = sigma_coefficient * (1 + g_coupling); \
                   R2 = z_coefficient * (1 + g_coupling) + rho0 C_b (||u1|| + ||u2||)"
            .into(),
    })
}

/// Admissible `r` for a given `s`: `[6/5, 3s / (2 (3 - s))]` for `s < 3`, `[6/5, inf)` for `s >= 3`.
pub fn admissible_sr(s: f64) -> Result<(f64, f64)> {
    let s0 = crate::spectrum::s0_bound();
    if !(s >= crate::norms::S_MIN && s < s0) {
        return Err(Error::ExponentRange { value: s, range: format!("[4/3, {s0:.6})") });
    }
    let hi = if s < 3.0 { 3.0 * s / (2.0 * (3.0 - s)) } else { f64::INFINITY };
    Ok((1.2, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub constants: ConstantEstimates,
    pub smallness: SmallnessReport,
    pub uniqueness: UniquenessReport,
    pub r_interval: (f64, f64),
}

impl CertificateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
