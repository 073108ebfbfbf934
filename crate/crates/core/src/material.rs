//! Material constants and the temperature-dependent density law.

use serde::Serialize;

/// Density as a function of temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityLaw {
    /// `rho(theta) = rho0`.
    Constant,
    /// `rho0 * (1 - alpha_v * (theta - theta_ref))` clamped to `[rho_min, rho0]`.
    ClampedBoussinesq { alpha_v: f64, theta_ref: f64, rho_min: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialModel {
    pub nu: f64,
    pub rho0: f64,
    pub c_v: f64,
    pub lambda: f64,
    pub alpha1: f64,
    pub law: DensityLaw,
}

impl MaterialModel {
    /// Clamped Boussinesq law with the default floor `rho0 / 2`.
    pub fn boussinesq(nu: f64, rho0: f64, c_v: f64, lambda: f64, alpha1: f64, alpha_v: f64, theta_ref: f64) -> Self {
        MaterialModel {
            nu,
            rho0,
            c_v,
            lambda,
            alpha1,
            law: DensityLaw::ClampedBoussinesq { alpha_v, theta_ref, rho_min: 0.5 * rho0 },
        }
    }

    pub fn constant_density(nu: f64, rho0: f64, c_v: f64, lambda: f64, alpha1: f64) -> Self {
        MaterialModel { nu, rho0, c_v, lambda, alpha1, law: DensityLaw::Constant }
    }

    pub fn density(&self, theta: f64) -> f64 {
        match self.law {
            DensityLaw::Constant => self.rho0,
            DensityLaw::ClampedBoussinesq { alpha_v, theta_ref, rho_min } => {
                let lin = self.rho0 * (1.0 - alpha_v * (theta - theta_ref));
                if lin.is_nan() {
                    // theta = +-inf with alpha_v = 0
                    self.rho0
                } else {
                    lin.clamp(rho_min, self.rho0)
                }
            }
        }
    }

    /// Upper bound of the density law.
    pub fn rho_sharp(&self) -> f64 {
        self.rho0
    }

    /// Lipschitz constant of the density law.
    pub fn c_rho(&self) -> f64 {
        match self.law {
            DensityLaw::Constant => 0.0,
            DensityLaw::ClampedBoussinesq { alpha_v, .. } => self.rho0 * alpha_v.abs(),
        }
    }

    /// Checks positivity, monotonicity and the Lipschitz bound on `samples` points of
    /// `[-t_max, t_max]`. Never fails; violations are listed in the report.
    pub fn validate(&self, t_max: f64, samples: usize) -> ValidationReport {
        let mut violations = Vec::new();
        for (name, v, ok) in [
            ("nu", self.nu, self.nu > 0.0),
            ("rho0", self.rho0, self.rho0 > 0.0),
            ("c_v", self.c_v, self.c_v > 0.0),
            ("lambda", self.lambda, self.lambda > 0.0),
            ("alpha1", self.alpha1, self.alpha1 >= 0.0),
        ] {
            if !(ok && v.is_finite()) {
                violations.push(format!("{name} = {v} out of range"));
            }
        }
        if let DensityLaw::ClampedBoussinesq { rho_min, .. } = self.law {
            if !(rho_min > 0.0 && rho_min <= self.rho0) {
                violations.push(format!("rho_min = {rho_min} must lie in (0, rho0]"));
            }
        }
        let n = samples.max(2);
        let dt = 2.0 * t_max / (n - 1) as f64;
        let mut max_slope: f64 = 0.0;
        let mut prev = self.density(-t_max);
        let mut first_bad = [false; 4];
        for i in 0..n {
            let t = -t_max + i as f64 * dt;
            let r = self.density(t);
            if !(r > 0.0) && !first_bad[0] {
                first_bad[0] = true;
                violations.push(format!("density {r} not positive at theta = {t}"));
            }
            if r > self.rho_sharp() && !first_bad[1] {
                first_bad[1] = true;
                violations.push(format!("density {r} exceeds rho_sharp at theta = {t}"));
            }
            if i > 0 {
                if r > prev && !first_bad[2] {
                    first_bad[2] = true;
                    violations.push(format!("density increases near theta = {t}"));
                }
                let slope = (r - prev).abs() / dt;
                max_slope = max_slope.max(slope);
                if slope > self.c_rho() * (1.0 + 1e-12) + 1e-300 && !first_bad[3] {
                    first_bad[3] = true;
                    violations.push(format!("slope {slope} exceeds C_rho = {} near theta = {t}", self.c_rho()));
                }
            }
            prev = r;
        }
        ValidationReport { violations, empirical_c_rho: max_slope }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// Largest sampled difference quotient; a lower bound of the Lipschitz constant.
    pub empirical_c_rho: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn law(alpha_v: f64) -> MaterialModel {
        MaterialModel::boussinesq(1.0, 1.0, 1.0, 1.0, 0.0, alpha_v, 0.0)
    }

    #[test]
    fn reference_point() {
        let m = MaterialModel::boussinesq(1.0, 2.5, 1.0, 1.0, 0.0, 0.3, 1.5);
        assert_eq!(m.density(1.5), 2.5);
    }

    #[test]
    fn hot_limit_hits_floor() {
        let m = law(0.1);
        assert_eq!(m.density(1e300), 0.5);
        assert_eq!(m.density(f64::INFINITY), 0.5);
    }

    #[test]
    fn direct_evaluation() {
        let m = law(0.1);
        assert!((m.density(2.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn validate_cases() {
        let ok = law(0.1).validate(100.0, 10_000);
        assert!(ok.passed(), "{:?}", ok.violations);
        assert!((ok.empirical_c_rho - 0.1).abs() < 1e-9);

        let bad = law(-0.1).validate(100.0, 10_000);
        assert!(bad.violations.iter().any(|v| v.contains("increases")));

        let c = MaterialModel::constant_density(1.0, 1.0, 1.0, 1.0, 0.0).validate(100.0, 10_000);
        assert!(c.passed());
        assert_eq!(c.empirical_c_rho, 0.0);
    }

    #[test]
    fn validate_rejects_bad_constants() {
        let mut m = law(0.1);
        m.nu = -1.0;
        assert!(!m.validate(10.0, 100).passed());
    }

    proptest! {
        #[test]
        fn density_bounded(theta in -1e6f64..1e6, alpha in 0.0f64..2.0, rho0 in 0.1f64..10.0) {
            let m = MaterialModel::boussinesq(1.0, rho0, 1.0, 1.0, 0.0, alpha, 0.0);
            let r = m.density(theta);
            prop_assert!(r > 0.0 && r <= m.rho_sharp());
        }

        #[test]
        fn lipschitz(a in -50.0f64..50.0, b in -50.0f64..50.0, alpha in 0.0f64..0.5) {
            let m = law(alpha);
            prop_assert!((m.density(a) - m.density(b)).abs() <= m.c_rho() * (a - b).abs() + 1e-14);
        }
    }
}
