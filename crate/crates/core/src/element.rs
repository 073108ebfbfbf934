//! Gauss-Legendre rules and tensor-product Lagrange bases on the unit cube.

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// 1D quadratic Lagrange basis at nodes 0, 1/2, 1: value, first and second derivative.
pub fn quadratic_1d(t: f64) -> [[f64; 3]; 3] {
    [
        [2.0 * (t - 0.5) * (t - 1.0), 4.0 * t - 3.0, 4.0],
        [-4.0 * t * (t - 1.0), -8.0 * t + 4.0, -8.0],
        [2.0 * t * (t - 0.5), 4.0 * t - 1.0, 4.0],
    ]
}

/// 1D linear Lagrange basis at nodes 0, 1: value and derivative.
pub fn linear_1d(t: f64) -> [[f64; 2]; 2] {
    [[1.0 - t, -1.0], [t, 1.0]]
}

/// Basis data at the quadrature points of one axis-aligned box cell.
///
/// Every cell of the structured mesh has the same size, so one table serves the whole mesh.
#[derive(Debug, Clone)]
pub struct CellTables {
    pub h: [f64; 3],
    /// Quadrature points relative to the cell origin.
    pub points: Vec<[f64; 3]>,
    /// Physical weights (include the cell volume).
    pub weights: Vec<f64>,
    /// Quadratic basis values `[qp][node]`, node = a + 3b + 9c.
    pub q2: Vec<[f64; 27]>,
    /// Quadratic basis gradients `[qp][node][axis]`.
    pub q2_grad: Vec<[[f64; 3]; 27]>,
    /// Quadratic basis Hessians `[qp][node]` as (xx, yy, zz, xy, xz, yz).
    pub q2_hess: Vec<[[f64; 6]; 27]>,
    /// Linear basis values `[qp][node]`, node = a + 2b + 4c.
    pub q1: Vec<[f64; 8]>,
}

impl CellTables {
    pub fn new(h: [f64; 3], n: usize) -> Self {
        let (t, w) = gauss_legendre(n);
        let mut tables = CellTables {
            h,
            points: Vec::new(),
            weights: Vec::new(),
            q2: Vec::new(),
            q2_grad: Vec::new(),
            q2_hess: Vec::new(),
            q1: Vec::new(),
        };
        let vol = h[0] * h[1] * h[2];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let r = [t[i], t[j], t[k]];
                    tables.points.push([r[0] * h[0], r[1] * h[1], r[2] * h[2]]);
                    tables.weights.push(w[i] * w[j] * w[k] * vol);
                    let b = [quadratic_1d(r[0]), quadratic_1d(r[1]), quadratic_1d(r[2])];
                    let mut val = [0.0; 27];
                    let mut grad = [[0.0; 3]; 27];
                    let mut hess = [[0.0; 6]; 27];
                    for c in 0..3 {
                        for bb in 0..3 {
                            for a in 0..3 {
                                let node = a + 3 * bb + 9 * c;
                                let (x, y, z) = (b[0][a], b[1][bb], b[2][c]);
                                val[node] = x[0] * y[0] * z[0];
                                grad[node] = [
                                    x[1] * y[0] * z[0] / h[0],
                                    x[0] * y[1] * z[0] / h[1],
                                    x[0] * y[0] * z[1] / h[2],
                                ];
                                hess[node] = [
                                    x[2] * y[0] * z[0] / (h[0] * h[0]),
                                    x[0] * y[2] * z[0] / (h[1] * h[1]),
                                    x[0] * y[0] * z[2] / (h[2] * h[2]),
                                    x[1] * y[1] * z[0] / (h[0] * h[1]),
                                    x[1] * y[0] * z[1] / (h[0] * h[2]),
                                    x[0] * y[1] * z[1] / (h[1] * h[2]),
                                ];
                            }
                        }
                    }
                    tables.q2.push(val);
                    tables.q2_grad.push(grad);
                    tables.q2_hess.push(hess);
                    let l = [linear_1d(r[0]), linear_1d(r[1]), linear_1d(r[2])];
                    let mut v1 = [0.0; 8];
                    for c in 0..2 {
                        for bb in 0..2 {
                            for a in 0..2 {
                                v1[a + 2 * bb + 4 * c] = l[0][a][0] * l[1][bb][0] * l[2][c][0];
                            }
                        }
                    }
                    tables.q1.push(v1);
                }
            }
        }
        tables
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
