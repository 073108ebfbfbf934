mod common;

use common::*;
use openchannel::forms::*;
use openchannel::linsolve::{dot, SaddleFactorization, SaddleSystem};
use openchannel::material::MaterialModel;
use openchannel::norms::{discrete_norms, h1_norm, sup_norm, NormKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn viscous_and_conduction_forms() {
    let s = space([1.0; 3], [2, 2, 2]);
    let a = assemble_a(&s, &unit_model());
    assert!(a.symmetric);
    let u = s.interpolate_vector(|p| [p[1], 0.0, 0.0]);
    assert!(rel_close(a.matrix.bilinear(&u, &u), 1.0, 1e-12));
    let c = s.interpolate_vector(|_| [0.3, 0.2, -1.0]);
    assert!(a.matrix.bilinear(&c, &c).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, y) = (random_vec(&mut rng, s.n_velocity()), random_vec(&mut rng, s.n_velocity()));
    assert!((a.matrix.bilinear(&x, &y) - a.matrix.bilinear(&y, &x)).abs() < 1e-12);

    let model = MaterialModel { lambda: 2.0, ..unit_model() };
    let k = assemble_kappa(&s, &model).matrix;
    let t = s.interpolate_scalar(|p| p[0]);
    assert!(rel_close(k.bilinear(&t, &t), 2.0, 1e-12));
    assert!(k.bilinear(&vec![1.5; s.n_scalar()], &vec![1.5; s.n_scalar()]).abs() < 1e-12);
    assert!(k.asymmetry() < 1e-12);
}

#[test]
fn saddle_divergence_rows() {
    let s = space([1.0; 3], [2, 2, 2]);
    let d = assemble_divergence(&s).matrix;
    let c = s.interpolate_vector(|_| [1.0, 2.0, 3.0]);
    assert!(d.mul_vec(&c).iter().all(|v| v.abs() < 1e-13));
    let u = s.interpolate_vector(|p| [p[0], 0.0, 0.0]);
    let ones = vec![1.0; s.n_pressure()];
    assert!(rel_close(dot(&ones, &d.mul_vec(&u)), 1.0, 1e-12));

    let k = assemble_saddle(&s, &unit_model());
    assert_eq!(k.matrix.nrows, s.n_velocity() + s.n_pressure());
    let ns = s.n_scalar();
    let free: Vec<usize> = (0..3).flat_map(|c| s.free_nodes().iter().map(move |&i| c * ns + i)).collect();
    let all_p: Vec<usize> = (0..s.n_pressure()).collect();
    let sys = SaddleSystem {
        a: assemble_a(&s, &unit_model()).matrix.submatrix(&free, &free),
        b: d.submatrix(&all_p, &free).scaled(-1.0),
    };
    let x = SaddleFactorization::new(sys.clone()).unwrap().solve(&vec![0.0; sys.dim()]).unwrap();
    assert!(x.iter().all(|v| *v == 0.0));
}

#[test]
fn convection_operator_values() {
    let s = space([1.0; 3], [1, 1, 1]);
    let m = unit_model();
    assert_eq!(assemble_b(&s, &m, &vec![0.0; s.n_velocity()]).matrix.values.iter().map(|v| v.abs()).sum::<f64>(), 0.0);
    let u0 = s.interpolate_vector(|_| [1.0, 0.0, 0.0]);
    let v = s.interpolate_vector(|p| [p[0], 0.0, 0.0]);
    let b = assemble_b(&s, &m, &u0).matrix;
    assert!(rel_close(b.bilinear(&u0, &v), 1.0, 1e-12));
    let load = convection_load(&s, &m, &u0, &v);
    assert!(rel_close(dot(&load.values, &u0), 1.0, 1e-12));
}

#[test]
fn outflow_identity_random_fields() {
    let l = [1.0, 1.0, 2.0];
    let s = space(l, [2, 2, 4]);
    let m = MaterialModel { rho0: 1.7, ..unit_model() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut largest_flux = 0.0f64;
    for _ in 0..20 {
        let u = random_solenoidal(&mut rng, l);
        let (f0, f1, f2) = (random_q2(&mut rng), random_q2(&mut rng), random_q2(&mut rng));
        let v = s.interpolate_vector(|p| [f0(p), f1(p), f2(p)]);
        let b = convection_trilinear_fn(&s, &m, &u, &v, &v);
        let flux = outflow_flux_fn(&s, &m, &u, &v);
        assert!((b - flux).abs() < 1e-10, "b = {b}, flux = {flux}");
        largest_flux = largest_flux.max(flux.abs());
    }
    assert!(largest_flux > 1e-2, "fluxes too small to be informative: {largest_flux}");
}

#[test]
fn discrete_outflow_identity_for_nodal_transport() {
    // Transport field in the discrete space: u = (y (1 - y) z (1 - z), 0, 0)
    let s = space([1.0; 3], [2, 2, 2]);
    let m = unit_model();
    let u = s.interpolate_vector(|p| [p[1] * (1.0 - p[1]) * p[2] * (1.0 - p[2]), 0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (f0, f1) = (random_q2(&mut rng), random_q2(&mut rng));
    let v = s.interpolate_vector(|p| [f0(p), 0.0, f1(p)]);
    let b = assemble_b(&s, &m, &u).matrix.bilinear(&v, &v);
    assert!((b - outflow_flux_term(&s, &m, &u, &v)).abs() < 1e-12);
}

#[test]
fn heat_convection_load() {
    let s = space([1.0; 3], [2, 1, 1]);
    let m = unit_model();
    let theta = s.interpolate_scalar(|p| p[0]);
    let zero_u = vec![0.0; s.n_velocity()];
    assert!(assemble_d_load(&s, &m, &theta, &zero_u, &theta).values.iter().all(|v| *v == 0.0));
    let u = s.interpolate_vector(|_| [1.0, 0.0, 0.0]);
    let flat = vec![2.0; s.n_scalar()];
    assert!(assemble_d_load(&s, &m, &theta, &u, &flat).values.iter().all(|v| v.abs() < 1e-14));
    let d = assemble_d_load(&s, &m, &theta, &u, &theta).values;
    let mass = scalar_mass(&s).matrix;
    let row_sums = mass.mul_vec(&vec![1.0; s.n_scalar()]);
    for (a, b) in d.iter().zip(&row_sums) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn dissipation_load() {
    let s = space([1.0; 3], [2, 2, 1]);
    let m = unit_model();
    let t = s.interpolate_vector(|_| [0.5, -1.0, 2.0]);
    assert!(assemble_e_load(&s, &m, &t, &t).values.iter().all(|v| v.abs() < 1e-14));
    let u = s.interpolate_vector(|p| [p[1], 0.0, 0.0]);
    assert!(rel_close(assemble_e_load(&s, &m, &u, &u).sum(), 0.5, 1e-12));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let r = random_vec(&mut rng, s.n_velocity());
        let n = s.n_scalar();
        for cell in 0..s.n_cells() {
            let local = s.gather_vector(&s.cell_nodes(cell), &r);
            for q in 0..s.tables.len() {
                let (_, g) = s.eval_vector(q, &local);
                assert!(strain_contraction(&g, &g) >= 0.0);
            }
        }
        assert!(assemble_e_load(&s, &m, &r, &r).sum() >= 0.0, "{n}");
    }
}

#[test]
fn buoyancy_load() {
    let s = space([2.0, 1.0, 1.0], [2, 1, 1]);
    let m = unit_model();
    let theta = vec![0.0; s.n_scalar()];
    assert!(assemble_buoyancy(&s, &m, &theta, &|_| [0.0; 3]).values.iter().all(|v| *v == 0.0));
    let down = |_: [f64; 3]| [0.0, 0.0, -1.0];
    let total_z = |l: &LoadVector| l.values[2 * s.n_scalar()..].iter().sum::<f64>();
    assert!(rel_close(total_z(&assemble_buoyancy(&s, &m, &theta, &down)), -2.0, 1e-12));
    let clamped = small_model();
    let hot = vec![1e6; s.n_scalar()];
    let cold = total_z(&assemble_buoyancy(&s, &clamped, &theta, &down));
    let warm = total_z(&assemble_buoyancy(&s, &clamped, &hot, &down));
    assert!(rel_close(warm, 0.5 * cold, 1e-12));
}

#[test]
fn norms_of_simple_fields() {
    let s = space([1.0; 3], [2, 2, 2]);
    let zero = vec![0.0; s.n_scalar()];
    for k in [NormKind::Lp(2.0), NormKind::H1, NormKind::BrokenW2(2.0)] {
        assert_eq!(discrete_norms(&s, &zero, k).unwrap(), 0.0);
    }
    let x = s.interpolate_scalar(|p| p[0]);
    assert!(rel_close(discrete_norms(&s, &x, NormKind::Lp(2.0)).unwrap(), (1.0f64 / 3.0).sqrt(), 1e-12));
    let w2 = discrete_norms(&s, &x, NormKind::BrokenW2(2.0)).unwrap();
    let lower = discrete_norms(&s, &x, NormKind::H1).unwrap();
    assert!(rel_close(w2, lower, 1e-12), "second-derivative part must vanish: {w2} vs {lower}");
    assert!(discrete_norms(&s, &x, NormKind::Lp(1.2)).is_err());
    assert!(discrete_norms(&s, &x, NormKind::BrokenW2(3.5)).is_err());
}

#[test]
fn heat_convection_continuity_in_density_argument() {
    // |d(t1,u,th,phi) - d(t2,u,th,phi)| <= c C_rho |t1 - t2|_inf |u|_H1 |th|_H1 with c <= c_V |phi|_inf
    let model = MaterialModel::boussinesq(1.0, 1.0, 1.3, 1.0, 1.0, 0.2, 0.0);
    let measure = |div: [usize; 3]| {
        let s = space([1.0, 1.0, 2.0], div);
        let mut worst = 0.0f64;
        for k in 1..=4 {
            let kf = k as f64;
            let t1 = s.interpolate_scalar(|p| (kf * p[0]).sin() + p[2]);
            let t2 = s.interpolate_scalar(|p| (kf * p[0]).sin() + p[2] + 0.3 * (p[1] * kf).cos());
            let u = s.interpolate_vector(|p| [p[1] * (1.0 - p[1]), kf * p[2].sin() * 0.2, p[0] * 0.1]);
            let th = s.interpolate_scalar(|p| (p[0] + kf * p[1]).cos());
            let phi = s.interpolate_scalar(|p| (p[0] * p[1] * p[2] * kf).cos());
            let d1 = assemble_d_load(&s, &model, &t1, &u, &th).values;
            let d2 = assemble_d_load(&s, &model, &t2, &u, &th).values;
            let diff: f64 = d1.iter().zip(&d2).zip(&phi).map(|((a, b), p)| (a - b) * p).sum();
            let dt: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a - b).collect();
            let denom = model.c_rho() * sup_norm(&s, &dt) * h1_norm(&s, &u) * h1_norm(&s, &th) * sup_norm(&s, &phi);
            worst = worst.max(diff.abs() / denom);
        }
        worst
    };
    let coarse = measure([2, 2, 4]);
    let fine = measure([4, 4, 8]);
    assert!(coarse.is_finite() && fine.is_finite());
    assert!(fine <= 1.3 * (1.0 + 1e-12), "bound violated: {fine}");
    assert!((coarse - fine).abs() <= 0.2 * fine, "unstable constant: {coarse} vs {fine}");
}

#[test]
fn homogeneity() {
    let s = space([1.0; 3], [1, 1, 2]);
    let m = small_model();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = s.n_velocity();
    let (u, v, w) = (random_vec(&mut rng, n), random_vec(&mut rng, n), random_vec(&mut rng, n));
    let a: f64 = rng.gen_range(0.5..3.0);
    let sc = |x: &[f64]| x.iter().map(|v| v * a).collect::<Vec<f64>>();
    let b = |u: &[f64], v: &[f64], w: &[f64]| dot(&convection_load(&s, &m, u, v).values, w);
    let base = b(&u, &v, &w);
    for val in [b(&sc(&u), &v, &w), b(&u, &sc(&v), &w), b(&u, &v, &sc(&w))] {
        assert!(rel_close(val, a * base, 1e-12));
    }
    let e = |u: &[f64], v: &[f64]| assemble_e_load(&s, &m, u, v).values;
    let e0 = e(&u, &v);
    for val in [e(&sc(&u), &v), e(&u, &sc(&v))] {
        for (x, y) in val.iter().zip(&e0) {
            assert!(rel_close(*x, a * y, 1e-12));
        }
    }
}

#[test]
fn assembly_is_deterministic() {
    let s = space([1.0, 1.0, 2.0], [2, 2, 3]);
    let m = small_model();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_vec(&mut rng, s.n_velocity());
    let a1 = assemble_b(&s, &m, &u).matrix;
    let a2 = assemble_b(&s, &m, &u).matrix;
    assert_eq!(a1.values, a2.values);
    assert_eq!(assemble_e_load(&s, &m, &u, &u).values, assemble_e_load(&s, &m, &u, &u).values);
}
