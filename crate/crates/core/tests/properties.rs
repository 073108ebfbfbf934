use openchannel::linsolve::{dot, SparseMatrix, TripletBuilder};
use openchannel::material::MaterialModel;
use openchannel::mesh::{build_channel_mesh, FacetTag};
use proptest::prelude::*;

fn matrix(n: usize, m: usize, entries: &[(usize, usize, f64)]) -> SparseMatrix {
    let mut b = TripletBuilder::new(n, m);
    for &(i, j, v) in entries {
        b.push(i % n, j % m, v);
    }
    b.build()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mesh_counts(nx in 1usize..5, ny in 1usize..5, nz in 1usize..5, lx in 0.1f64..5.0) {
        let m = build_channel_mesh([lx, 1.0, 2.0], [nx, ny, nz]).unwrap();
        prop_assert_eq!(m.vertex_count(), (nx + 1) * (ny + 1) * (nz + 1));
        prop_assert_eq!(m.cell_count(), nx * ny * nz);
        prop_assert_eq!(m.facets_with(FacetTag::GammaN).count(), 2 * ny * nz);
        prop_assert_eq!(m.facets_with(FacetTag::GammaD).count(), 2 * nx * (ny + nz));
        prop_assert!((m.tagged_area(FacetTag::GammaN) - 4.0).abs() < 1e-12);
        prop_assert!((m.volume() - 2.0 * lx).abs() < 1e-12 * lx.max(1.0));
    }

    #[test]
    fn density_bounded_and_lipschitz(
        alpha_v in 0.0f64..1.0,
        rho0 in 0.1f64..5.0,
        theta_ref in -3.0f64..3.0,
        a in -100.0f64..100.0,
        b in -100.0f64..100.0,
    ) {
        let m = MaterialModel::boussinesq(1.0, rho0, 1.0, 1.0, 1.0, alpha_v, theta_ref);
        let (ra, rb) = (m.density(a), m.density(b));
        for r in [ra, rb] {
            prop_assert!(r > 0.0 && r <= m.rho_sharp());
        }
        prop_assert!((ra - rb).abs() <= m.c_rho() * (a - b).abs() * (1.0 + 1e-12) + 1e-15);
        if a <= b {
            prop_assert!(ra >= rb);
        }
        prop_assert!(m.validate(50.0, 400).violations.is_empty());
    }

    #[test]
    fn sparse_products_agree_with_dense(
        entries in prop::collection::vec((0usize..50, 0usize..50, -1.0f64..1.0), 1..80),
        n in 1usize..8,
        m in 1usize..8,
        x in prop::collection::vec(-1.0f64..1.0, 8),
        y in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let a = matrix(n, m, &entries);
        let d = a.to_dense();
        let (x, y) = (&x[..m], &y[..n]);
        let ax = a.mul_vec(x);
        for i in 0..n {
            let e: f64 = (0..m).map(|j| d[i][j] * x[j]).sum();
            prop_assert!((ax[i] - e).abs() < 1e-12);
        }
        prop_assert!((dot(y, &ax) - dot(x, &a.mul_transpose_vec(y))).abs() < 1e-12);
        prop_assert_eq!(a.transpose().transpose().to_dense(), d.clone());
        let back = SparseMatrix::from_matrix_market(&a.to_matrix_market()).unwrap();
        prop_assert_eq!(back.to_dense(), d);
    }
}
