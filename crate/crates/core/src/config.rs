//! Line-based run configuration: `[section]` headers followed by `key = value` lines.
//! `#` starts a comment. Every violation is collected with its line number.
//!
//! ```text
//! [geometry]
//! dims = 1.0 1.0 4.0
//! divisions = 4 4 16
//! [material]
//! nu = 1.0
//! rho0 = 1.0
//! c_v = 1.0
//! lambda = 1.0
//! [forcing]
//! g = constant 0.0 0.0 -1.0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::certificates::{admissible_sr, MIN_SAMPLES};
use crate::fields::{ScalarField, VectorField};
use crate::fixed_point::SolverSettings;
use crate::material::{DensityLaw, MaterialModel};
use crate::norms::S_MIN;
use crate::spectrum::s0_bound;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryConfig {
    pub dims: [f64; 3],
    pub divisions: [usize; 3],
    pub quad_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyConfig {
    pub samples: usize,
    pub s: f64,
    pub r: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    pub tol: f64,
    /// Number of scalar (Laplacian) exponents listed.
    pub k_max: usize,
    /// Grid of the optional `f(z)` sample CSV; `[0, 0]` disables it.
    pub samples: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MmsCase {
    StokesPolynomial,
    StokesTrig,
    HeatQuadratic,
    HeatTrig,
    HeatIncompatible,
    Coupled,
}

impl MmsCase {
    pub const ALL: [MmsCase; 6] = [
        MmsCase::StokesPolynomial,
        MmsCase::StokesTrig,
        MmsCase::HeatQuadratic,
        MmsCase::HeatTrig,
        MmsCase::HeatIncompatible,
        MmsCase::Coupled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MmsCase::StokesPolynomial => "stokes_polynomial",
            MmsCase::StokesTrig => "stokes_trig",
            MmsCase::HeatQuadratic => "heat_quadratic",
            MmsCase::HeatTrig => "heat_trig",
            MmsCase::HeatIncompatible => "heat_incompatible",
            MmsCase::Coupled => "coupled",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsConfig {
    pub levels: Vec<[usize; 3]>,
    pub cases: Vec<MmsCase>,
    /// Velocity amplitude of the coupled case.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub vtk: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialModel,
    pub g: VectorField,
    pub theta_d: ScalarField,
    pub solver: SolverSettings,
    pub certify: CertifyConfig,
    pub spectrum: SpectrumConfig,
    pub mms: MmsConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, `None` for missing keys.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// All violations found in one configuration text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: [(&str, &[&str]); 9] = [
    ("geometry", &["dims", "divisions", "quad_order"]),
    ("material", &["nu", "rho0", "c_v", "lambda", "alpha1", "density", "alpha_v", "theta_ref", "rho_min"]),
    ("forcing", &["g"]),
    ("boundary", &["theta_d"]),
    ("solver", &["inner_tol", "inner_max_iter", "outer_tol", "outer_max_iter", "damping", "linear_tol"]),
    ("certify", &["samples", "s", "r", "seed"]),
    ("spectrum", &["re_min", "re_max", "im_max", "tol", "k_max", "samples"]),
    ("mms", &["levels", "cases", "amplitude"]),
    ("output", &["dir", "vtk"]),
];

const REQUIRED: [(&str, &str); 7] = [
    ("geometry", "dims"),
    ("geometry", "divisions"),
    ("material", "nu"),
    ("material", "rho0"),
    ("material", "c_v"),
    ("material", "lambda"),
    ("forcing", "g"),
];

type Entries = BTreeMap<(String, String), (usize, String)>;

struct Reader {
    entries: Entries,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn err(&mut self, line: Option<usize>, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    fn raw(&self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.get(&(section.to_string(), key.to_string())).cloned()
    }

    /// Parses an optional entry with `conv`, reporting failures against its line.
    fn get<T>(&mut self, section: &str, key: &str, conv: impl Fn(&str) -> Result<T, String>) -> Option<(usize, T)> {
        let (line, text) = self.raw(section, key)?;
        match conv(&text) {
            Ok(v) => Some((line, v)),
            Err(m) => {
                self.err(Some(line), format!("{section}.{key}: {m}"));
                None
            }
        }
    }

    /// Like [`get`](Self::get) with a default and a range check.
    fn value<T: Clone>(
        &mut self,
        section: &str,
        key: &str,
        default: T,
        conv: impl Fn(&str) -> Result<T, String>,
        check: impl Fn(&T) -> Result<(), String>,
    ) -> T {
        match self.get(section, key, conv) {
            Some((line, v)) => {
                if let Err(m) = check(&v) {
                    self.err(Some(line), format!("{section}.{key}: {m}"));
                }
                v
            }
            None => default,
        }
    }
}

fn float(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got '{s}'"))
    }
}

fn uint(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got '{s}'"))
}

fn floats3(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s.split_whitespace().map(float).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 3 numbers, got {}", v.len()))
}

fn uints<const N: usize>(s: &str) -> Result<[usize; N], String> {
    let v: Vec<usize> = s.split_whitespace().map(uint).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<usize>| format!("expected {N} integers, got {}", v.len()))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{s}'")),
    }
}

fn field_parts(s: &str) -> Result<(String, Vec<f64>), String> {
    let mut it = s.split_whitespace();
    let name = it.next().ok_or("expected a field name")?.to_string();
    let params = it.map(float).collect::<Result<_, _>>()?;
    Ok((name, params))
}

fn vector_field(s: &str) -> Result<VectorField, String> {
    let (name, p) = field_parts(s)?;
    VectorField::from_parts(&name, &p)
}

fn scalar_field(s: &str) -> Result<ScalarField, String> {
    let (name, p) = field_parts(s)?;
    ScalarField::from_parts(&name, &p)
}

/// `2x2x8 4x4x16`
fn levels(s: &str) -> Result<Vec<[usize; 3]>, String> {
    s.split_whitespace()
        .map(|t| {
            let parts: Vec<&str> = t.split('x').collect();
            if parts.len() != 3 {
                return Err(format!("expected a level like 4x4x16, got '{t}'"));
            }
            uints::<3>(&parts.join(" "))
        })
        .collect()
}

fn cases(s: &str) -> Result<Vec<MmsCase>, String> {
    s.split_whitespace()
        .map(|t| {
            MmsCase::parse(t).ok_or_else(|| {
                let known: Vec<&str> = MmsCase::ALL.iter().map(|c| c.name()).collect();
                format!("unknown case '{t}' (known: {})", known.join(", "))
            })
        })
        .collect()
}

fn positive(v: &f64) -> Result<(), String> {
    if *v > 0.0 {
        Ok(())
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn non_negative(v: &f64) -> Result<(), String> {
    if *v >= 0.0 {
        Ok(())
    } else {
        Err(format!("must be non-negative, got {v}"))
    }
}

fn at_least(min: usize) -> impl Fn(&usize) -> Result<(), String> {
    move |v| if *v >= min { Ok(()) } else { Err(format!("must be at least {min}, got {v}")) }
}

fn any<T>(_: &T) -> Result<(), String> {
    Ok(())
}

/// Splits the text into section/key entries, reporting syntax errors, unknown
/// sections or keys, and duplicates.
fn tokenize(text: &str) -> Reader {
    let mut r = Reader { entries: BTreeMap::new(), errors: Vec::new() };
    let mut section: Option<&str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                r.err(Some(line), format!("malformed section header '{content}'"));
                section = None;
                continue;
            };
            let name = name.trim();
            match SECTIONS.iter().find(|(s, _)| *s == name) {
                Some((s, _)) => section = Some(s),
                None => {
                    r.err(Some(line), format!("unknown section [{name}]"));
                    section = None;
                }
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            r.err(Some(line), format!("expected 'key = value', got '{content}'"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            r.err(Some(line), format!("key '{key}' outside a known section"));
            continue;
        };
        let keys = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !keys.contains(&key) {
            r.err(Some(line), format!("unknown key '{key}' in [{sec}]"));
            continue;
        }
        if value.is_empty() {
            r.err(Some(line), format!("{sec}.{key}: empty value"));
            continue;
        }
        let k = (sec.to_string(), key.to_string());
        if let Some((first, _)) = r.entries.get(&k) {
            let first = *first;
            r.err(Some(line), format!("{sec}.{key}: duplicate key (first set on line {first})"));
            continue;
        }
        r.entries.insert(k, (line, value.to_string()));
    }
    r
}

/// Parses and validates a configuration, filling defaults for optional keys.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut r = tokenize(text);
    for (sec, key) in REQUIRED {
        if r.raw(sec, key).is_none() {
            r.err(None, format!("missing required key {sec}.{key}"));
        }
    }

    let dims = r.value("geometry", "dims", [1.0; 3], floats3, |d| {
        if d.iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            Err("all lengths must be positive".into())
        }
    });
    let divisions = r.value("geometry", "divisions", [1; 3], uints::<3>, |d| {
        if d.iter().all(|v| *v >= 1) {
            Ok(())
        } else {
            Err("all division counts must be at least 1".into())
        }
    });
    let quad_order = r.value("geometry", "quad_order", crate::space::DEFAULT_QUAD_ORDER, uint, |q| {
        if (3..=10).contains(q) {
            Ok(())
        } else {
            Err(format!("must lie in 3..=10, got {q}"))
        }
    });

    let nu = r.value("material", "nu", 1.0, float, positive);
    let rho0 = r.value("material", "rho0", 1.0, float, positive);
    let c_v = r.value("material", "c_v", 1.0, float, positive);
    let lambda = r.value("material", "lambda", 1.0, float, positive);
    let alpha1 = r.value("material", "alpha1", 0.0, float, non_negative);
    let density = r.value("material", "density", "constant".to_string(), |s| Ok(s.to_string()), |s| {
        if s == "constant" || s == "boussinesq" {
            Ok(())
        } else {
            Err(format!("expected constant or boussinesq, got '{s}'"))
        }
    });
    let law = if density == "boussinesq" {
        let alpha_v = r.value("material", "alpha_v", 0.0, float, non_negative);
        let theta_ref = r.value("material", "theta_ref", 0.0, float, any);
        let rho_min = r.value("material", "rho_min", 0.5 * rho0, float, |v| {
            if *v > 0.0 && *v <= rho0 {
                Ok(())
            } else {
                Err(format!("must lie in (0, rho0], got {v}"))
            }
        });
        DensityLaw::ClampedBoussinesq { alpha_v, theta_ref, rho_min }
    } else {
        for key in ["alpha_v", "theta_ref", "rho_min"] {
            if let Some((line, _)) = r.raw("material", key) {
                r.err(Some(line), format!("material.{key} requires density = boussinesq"));
            }
        }
        DensityLaw::Constant
    };
    let material = MaterialModel { nu, rho0, c_v, lambda, alpha1, law };

    let g = r.value("forcing", "g", VectorField::constant([0.0; 3]), vector_field, any);
    let theta_d = r.value("boundary", "theta_d", ScalarField::constant(0.0), scalar_field, any);

    let d = SolverSettings::default();
    let solver = SolverSettings {
        inner_tol: r.value("solver", "inner_tol", d.inner_tol, float, positive),
        inner_max_iter: r.value("solver", "inner_max_iter", d.inner_max_iter, uint, at_least(1)),
        outer_tol: r.value("solver", "outer_tol", d.outer_tol, float, positive),
        outer_max_iter: r.value("solver", "outer_max_iter", d.outer_max_iter, uint, at_least(1)),
        damping: r.value("solver", "damping", d.damping, float, |v| {
            if *v > 0.0 && *v <= 1.0 {
                Ok(())
            } else {
                Err(format!("must lie in (0, 1], got {v}"))
            }
        }),
        linear_tol: r.value("solver", "linear_tol", d.linear_tol, float, positive),
    };

    let s0 = s0_bound();
    let s = r.value("certify", "s", 2.0, float, |v| {
        if *v >= S_MIN && *v < s0 {
            Ok(())
        } else {
            Err(format!("must lie in [4/3, {s0:.6}), got {v}"))
        }
    });
    let r_interval = admissible_sr(s).ok();
    let certify = CertifyConfig {
        samples: r.value("certify", "samples", MIN_SAMPLES, uint, at_least(MIN_SAMPLES)),
        s,
        r: r.value("certify", "r", 2.0, float, |v| match r_interval {
            Some((lo, hi)) if *v >= lo && *v <= hi && *v > 1.5 => Ok(()),
            Some((lo, hi)) => Err(format!("must lie in ({}, {hi}] (admissible [{lo}, {hi}] and above 3/2), got {v}", 1.5f64.max(lo))),
            None => Ok(()),
        }),
        seed: r.value("certify", "seed", 0u64, |s| s.parse().map_err(|_| format!("expected an unsigned integer, got '{s}'")), any),
    };

    let re_min = r.value("spectrum", "re_min", 0.1, float, any);
    let spectrum = SpectrumConfig {
        re_min,
        re_max: r.value("spectrum", "re_max", 1.9, float, |v| {
            if *v > re_min {
                Ok(())
            } else {
                Err(format!("must exceed re_min = {re_min}, got {v}"))
            }
        }),
        im_max: r.value("spectrum", "im_max", 5.0, float, positive),
        tol: r.value("spectrum", "tol", 1e-12, float, positive),
        k_max: r.value("spectrum", "k_max", 4, uint, any),
        samples: r.value("spectrum", "samples", [0, 0], uints::<2>, any),
    };

    let mms = MmsConfig {
        levels: r.value("mms", "levels", vec![[2, 2, 8], [4, 4, 16], [8, 8, 32]], levels, |l: &Vec<[usize; 3]>| {
            if l.is_empty() {
                Err("at least one level is required".into())
            } else if l.iter().flatten().any(|v| *v == 0) {
                Err("division counts must be at least 1".into())
            } else {
                Ok(())
            }
        }),
        cases: r.value("mms", "cases", MmsCase::ALL.to_vec(), cases, |c: &Vec<MmsCase>| {
            if c.is_empty() {
                Err("at least one case is required".into())
            } else {
                Ok(())
            }
        }),
        amplitude: r.value("mms", "amplitude", 0.1, float, any),
    };

    let output = OutputConfig {
        dir: r.value("output", "dir", PathBuf::from("out"), |s| Ok(PathBuf::from(s)), any),
        vtk: r.value("output", "vtk", true, boolean, any),
    };

    if r.errors.is_empty() {
        Ok(RunConfig { geometry: GeometryConfig { dims, divisions, quad_order }, material, g, theta_d, solver, certify, spectrum, mms, output })
    } else {
        r.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(r.errors))
    }
}

fn join<T: fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// Canonical text of a configuration: every key, fixed order, shortest round-trip floats.
pub fn emit_config(c: &RunConfig) -> String {
    let mut out = String::new();
    let mut section = |name: &str, entries: Vec<(&str, String)>| {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("[{name}]\n"));
        for (k, v) in entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
    };
    let g = &c.geometry;
    section(
        "geometry",
        vec![("dims", join(&g.dims)), ("divisions", join(&g.divisions)), ("quad_order", g.quad_order.to_string())],
    );
    let m = &c.material;
    let mut mat = vec![
        ("nu", format!("{:?}", m.nu)),
        ("rho0", format!("{:?}", m.rho0)),
        ("c_v", format!("{:?}", m.c_v)),
        ("lambda", format!("{:?}", m.lambda)),
        ("alpha1", format!("{:?}", m.alpha1)),
    ];
    match m.law {
        DensityLaw::Constant => mat.push(("density", "constant".into())),
        DensityLaw::ClampedBoussinesq { alpha_v, theta_ref, rho_min } => {
            mat.push(("density", "boussinesq".into()));
            mat.push(("alpha_v", format!("{alpha_v:?}")));
            mat.push(("theta_ref", format!("{theta_ref:?}")));
            mat.push(("rho_min", format!("{rho_min:?}")));
        }
    }
    section("material", mat);
    section("forcing", vec![("g", c.g.to_string())]);
    section("boundary", vec![("theta_d", c.theta_d.to_string())]);
    let s = &c.solver;
    section(
        "solver",
        vec![
            ("inner_tol", format!("{:?}", s.inner_tol)),
            ("inner_max_iter", s.inner_max_iter.to_string()),
            ("outer_tol", format!("{:?}", s.outer_tol)),
            ("outer_max_iter", s.outer_max_iter.to_string()),
            ("damping", format!("{:?}", s.damping)),
            ("linear_tol", format!("{:?}", s.linear_tol)),
        ],
    );
    let ce = &c.certify;
    section(
        "certify",
        vec![
            ("samples", ce.samples.to_string()),
            ("s", format!("{:?}", ce.s)),
            ("r", format!("{:?}", ce.r)),
            ("seed", ce.seed.to_string()),
        ],
    );
    let sp = &c.spectrum;
    section(
        "spectrum",
        vec![
            ("re_min", format!("{:?}", sp.re_min)),
            ("re_max", format!("{:?}", sp.re_max)),
            ("im_max", format!("{:?}", sp.im_max)),
            ("tol", format!("{:?}", sp.tol)),
            ("k_max", sp.k_max.to_string()),
            ("samples", join(&sp.samples)),
        ],
    );
    let levels: Vec<String> = c.mms.levels.iter().map(|l| format!("{}x{}x{}", l[0], l[1], l[2])).collect();
    let cases: Vec<&str> = c.mms.cases.iter().map(|c| c.name()).collect();
    section(
        "mms",
        vec![("levels", levels.join(" ")), ("cases", cases.join(" ")), ("amplitude", format!("{:?}", c.mms.amplitude))],
    );
    section("output", vec![("dir", c.output.dir.display().to_string()), ("vtk", c.output.vtk.to_string())]);
    out
}
