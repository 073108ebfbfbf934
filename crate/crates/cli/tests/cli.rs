use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BASE: &str = "[geometry]\ndims = 1.0 1.0 4.0\ndivisions = 1 1 4\n\n[material]\nnu = 1.0\nrho0 = 1.0\nc_v = 1.0\nlambda = 1.0\nalpha1 = 1.0\ndensity = boussinesq\nalpha_v = 0.1\n\n[forcing]\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_openchannel"));
    c.env_remove("OPENCHANNEL_THREADS");
    c
}

fn run(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join(format!("{sub}.conf"));
    fs::write(&path, config).unwrap();
    bin().arg(sub).arg("--config").arg(&path).arg("--out").arg(dir.join("out")).args(extra).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn config(g: &str) -> String {
    format!("{BASE}g = constant {g}\n")
}

#[test]
fn spectrum_reports_anchor_values() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "spectrum", &format!("{}\n[spectrum]\nsamples = 4 4\n", config("0 0 0")), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&d.path().join("out/spectrum.json"));
    assert!((j["z0"].as_f64().unwrap() - 1.352317).abs() < 1e-5);
    assert!((j["mu_m"].as_f64().unwrap() - 1.352317).abs() < 1e-5);
    assert!((j["s0"].as_f64().unwrap() - 3.087930).abs() < 1e-5);
    assert_eq!(j["winding_count"].as_i64(), Some(2));
    let csv = fs::read_to_string(d.path().join("out/spectrum_samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn solve_at_rest_converges_in_one_iteration() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "solve", &format!("{}\n[boundary]\ntheta_d = constant 0.3\n", config("0 0 0")), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&d.path().join("out/solve.json"));
    assert_eq!(j["converged"], Value::Bool(true));
    assert_eq!(j["outer_iterations"].as_u64(), Some(1));
    assert_eq!(j["max_speed"].as_f64(), Some(0.0));
    assert!((j["mean_theta"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    for f in ["mesh.vtk", "facets.vtk", "state.vtk", "trace.csv"] {
        assert!(d.path().join("out").join(f).exists(), "{f}");
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("wrote ") && l.ends_with("solve.json")));
}

#[test]
fn config_errors_exit_2() {
    let d = TempDir::new().unwrap();
    let bad = config("0 0 0").replace("nu = 1.0", "nu = -1.0");
    let o = run(d.path(), "solve", &bad, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6"));

    let o = bin().args(["solve", "--config"]).arg(d.path().join("absent.conf")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin().arg("solve").output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let path = d.path().join("ok.conf");
    fs::write(&path, config("0 0 0")).unwrap();
    for v in ["0", "many"] {
        let o = bin().arg("spectrum").arg("--config").arg(&path).env("OPENCHANNEL_THREADS", v).output().unwrap();
        assert_eq!(o.status.code(), Some(2), "{v}");
    }
}

#[test]
fn divergence_exits_3() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "solve", &config("2000.0 0.0 -2000.0"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let out = d.path().join("out");
    assert!(out.join("divergence.json").exists() || out.join("trace.csv").exists());
}

#[test]
fn certificate_failure_exits_4() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "certify", &config("200.0 0.0 -200.0"), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&d.path().join("out/certificate.json"));
    assert_eq!(j["smallness"]["smallness_ok"], Value::Bool(false));
    assert_eq!(j["smallness"]["beta"], Value::Null);
}

#[test]
fn certify_small_data_passes_with_report() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), "certify", &config("1.0 0.0 -1.0"), &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = json(&d.path().join("out/certificate.json"));
    assert_eq!(j["constants"]["seed"].as_u64(), Some(3));
    let beta = j["smallness"]["beta"].as_f64().unwrap();
    assert!(beta > 0.0 && beta < 1.0);
    let u = &j["uniqueness"];
    assert!(u["r1"].as_f64().unwrap() < 1.0 && u["r2"].as_f64().unwrap() < 1.0);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn artifacts_are_reproducible_across_thread_counts() {
    let cfg = format!("{}\n[boundary]\ntheta_d = linear 0.0 0.1 0.0 0.0\n", config("3.0 0.0 -3.0"));
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for (d, threads) in [(&a, None), (&b, Some("1"))] {
        let path = d.path().join("c.conf");
        fs::write(&path, &cfg).unwrap();
        for sub in ["solve", "certify"] {
            let mut c = bin();
            c.arg(sub).arg("--config").arg(&path).arg("--out").arg(d.path().join(sub));
            if let Some(t) = threads {
                c.env("OPENCHANNEL_THREADS", t);
            }
            assert_eq!(c.output().unwrap().status.code(), Some(0), "{sub}");
        }
    }
    for sub in ["solve", "certify"] {
        let (fa, fb) = (files(&a.path().join(sub)), files(&b.path().join(sub)));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{sub}");
    }
}
