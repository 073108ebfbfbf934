//! Closed-form scalar and vector fields used for body forces, boundary temperature
//! liftings and sources, with a small registry of named fields for configuration.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub type ScalarFn = Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

/// Named scalar fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScalarField {
    /// `c`
    Constant { value: f64 },
    /// `c + a . x`
    Linear { value: f64, gradient: [f64; 3] },
    /// `c + a cos(2 pi x / wavelength)`
    CosineX { value: f64, amplitude: f64, wavelength: f64 },
}

/// Named vector fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum VectorField {
    Constant { value: [f64; 3] },
    /// `amplitude * cos(2 pi x / wavelength)`
    CosineX { amplitude: [f64; 3], wavelength: f64 },
}

pub const SCALAR_FIELD_NAMES: [&str; 3] = ["constant", "linear", "cosine_x"];
pub const VECTOR_FIELD_NAMES: [&str; 2] = ["constant", "cosine_x"];

fn expect(name: &str, params: &[f64], n: usize) -> Result<(), String> {
    if params.len() == n {
        Ok(())
    } else {
        Err(format!("field '{name}' takes {n} parameters, got {}", params.len()))
    }
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Constant { value }
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        match *self {
            ScalarField::Constant { value } => value,
            ScalarField::Linear { value, gradient } => {
                value + gradient[0] * p[0] + gradient[1] * p[1] + gradient[2] * p[2]
            }
            ScalarField::CosineX { value, amplitude, wavelength } => value + amplitude * (2.0 * PI * p[0] / wavelength).cos(),
        }
    }

    /// Largest absolute value on the box `[0, dims]`.
    pub fn max_abs(&self, dims: [f64; 3]) -> f64 {
        match *self {
            ScalarField::Constant { value } => value.abs(),
            ScalarField::Linear { .. } => {
                let mut m = 0.0f64;
                for corner in 0..8 {
                    let p = [0, 1, 2].map(|d| if corner >> d & 1 == 1 { dims[d] } else { 0.0 });
                    m = m.max(self.eval(p).abs());
                }
                m
            }
            ScalarField::CosineX { value, amplitude, .. } => value.abs() + amplitude.abs(),
        }
    }

    pub fn to_fn(&self) -> ScalarFn {
        let f = self.clone();
        Arc::new(move |p| f.eval(p))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarField::Constant { .. } => "constant",
            ScalarField::Linear { .. } => "linear",
            ScalarField::CosineX { .. } => "cosine_x",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            ScalarField::Constant { value } => vec![value],
            ScalarField::Linear { value, gradient } => vec![value, gradient[0], gradient[1], gradient[2]],
            ScalarField::CosineX { value, amplitude, wavelength } => vec![value, amplitude, wavelength],
        }
    }

    pub fn from_parts(name: &str, params: &[f64]) -> Result<Self, String> {
        match name {
            "constant" => {
                expect(name, params, 1)?;
                Ok(ScalarField::Constant { value: params[0] })
            }
            "linear" => {
                expect(name, params, 4)?;
                Ok(ScalarField::Linear { value: params[0], gradient: [params[1], params[2], params[3]] })
            }
            "cosine_x" => {
                expect(name, params, 3)?;
                if !(params[2] > 0.0) {
                    return Err("cosine_x wavelength must be positive".into());
                }
                Ok(ScalarField::CosineX { value: params[0], amplitude: params[1], wavelength: params[2] })
            }
            other => Err(format!("unknown scalar field '{other}' (known: {})", SCALAR_FIELD_NAMES.join(", "))),
        }
    }
}

impl VectorField {
    pub fn constant(value: [f64; 3]) -> Self {
        VectorField::Constant { value }
    }

    pub fn eval(&self, p: [f64; 3]) -> [f64; 3] {
        match *self {
            VectorField::Constant { value } => value,
            VectorField::CosineX { amplitude, wavelength } => {
                let c = (2.0 * PI * p[0] / wavelength).cos();
                amplitude.map(|a| a * c)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            VectorField::Constant { value } => value == [0.0; 3],
            VectorField::CosineX { amplitude, .. } => amplitude == [0.0; 3],
        }
    }

    /// Multiplies the field by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            VectorField::Constant { value } => VectorField::Constant { value: value.map(|v| v * s) },
            VectorField::CosineX { amplitude, wavelength } => VectorField::CosineX { amplitude: amplitude.map(|v| v * s), wavelength },
        }
    }

    pub fn to_fn(&self) -> VectorFn {
        let f = self.clone();
        Arc::new(move |p| f.eval(p))
    }

    pub fn name(&self) -> &'static str {
        match self {
            VectorField::Constant { .. } => "constant",
            VectorField::CosineX { .. } => "cosine_x",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            VectorField::Constant { value } => value.to_vec(),
            VectorField::CosineX { amplitude, wavelength } => vec![amplitude[0], amplitude[1], amplitude[2], wavelength],
        }
    }

    pub fn from_parts(name: &str, params: &[f64]) -> Result<Self, String> {
        match name {
            "constant" => {
                expect(name, params, 3)?;
                Ok(VectorField::Constant { value: [params[0], params[1], params[2]] })
            }
            "cosine_x" => {
                expect(name, params, 4)?;
                if !(params[3] > 0.0) {
                    return Err("cosine_x wavelength must be positive".into());
                }
                Ok(VectorField::CosineX { amplitude: [params[0], params[1], params[2]], wavelength: params[3] })
            }
            other => Err(format!("unknown vector field '{other}' (known: {})", VECTOR_FIELD_NAMES.join(", "))),
        }
    }
}

fn write_parts(f: &mut fmt::Formatter<'_>, name: &str, params: &[f64]) -> fmt::Result {
    write!(f, "{name}")?;
    for p in params {
        write!(f, " {p:?}")?;
    }
    Ok(())
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_parts(f, self.name(), &self.params())
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_parts(f, self.name(), &self.params())
    }
}
