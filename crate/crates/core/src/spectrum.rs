//! Corner spectrum at the junction of the no-slip walls and the open ends.
//!
//! For a right dihedral angle the Stokes pencil reduces to the transcendental
//! equation `z^2 - 4 cos^2(z pi/2) - sin^2(z pi/2) = 0`; the scalar (heat) pencil has
//! the eigenvalues `2k + 1`. Roots are located by counting windings of `f` around
//! rectangles, subdividing, and polishing with Newton's method.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Samples per rectangle side before adaptive refinement.
const SIDE_SAMPLES: usize = 1000;
/// Phase jump between neighbouring samples that triggers refinement.
const MAX_PHASE_STEP: f64 = PI / 8.0;
/// Boxes below this diameter are polished directly.
const LEAF_SIZE: f64 = 0.05;
const MAX_DEPTH: usize = 40;

/// `f(z) = z^2 - 4 cos^2(z pi / 2) - sin^2(z pi / 2)`.
pub fn mellin_symbol(z: Complex64) -> Complex64 {
    let a = z * (PI / 2.0);
    let (c, s) = (a.cos(), a.sin());
    z * z - 4.0 * c * c - s * s
}

/// `f'(z) = 2z + (3 pi / 2) sin(pi z)`.
pub fn mellin_derivative(z: Complex64) -> Complex64 {
    2.0 * z + (1.5 * PI) * (z * PI).sin()
}

fn f_real(x: f64) -> f64 {
    x * x - 2.5 - 1.5 * (PI * x).cos()
}

/// Search rectangle `re_min <= Re z <= re_max`, `|Im z| <= im_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Strip {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

impl Root {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    re: [f64; 2],
    im: [f64; 2],
}

impl Rect {
    fn diameter(&self) -> f64 {
        (self.re[1] - self.re[0]).hypot(self.im[1] - self.im[0])
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re[0] - slack && z.re <= self.re[1] + slack && z.im >= self.im[0] - slack && z.im <= self.im[1] + slack
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re[0] + self.re[1]), 0.5 * (self.im[0] + self.im[1]))
    }
}

/// Phase increment along a segment, refining where the phase moves fast.
/// Returns `None` when `f` is (numerically) zero on the segment.
fn phase_change(a: Complex64, b: Complex64, scale: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut prev_z = a;
    let mut prev = mellin_symbol(a);
    for i in 1..=SIDE_SAMPLES {
        let z = a + (b - a) * (i as f64 / SIDE_SAMPLES as f64);
        let fz = mellin_symbol(z);
        total += refine_step(prev_z, prev, z, fz, scale, 0)?;
        prev_z = z;
        prev = fz;
    }
    Some(total)
}

fn refine_step(za: Complex64, fa: Complex64, zb: Complex64, fb: Complex64, scale: f64, depth: usize) -> Option<f64> {
    let tiny = 1e-10 * scale;
    if fa.norm() < tiny || fb.norm() < tiny {
        return None;
    }
    let d = (fb / fa).arg();
    if d.abs() <= MAX_PHASE_STEP {
        return Some(d);
    }
    if depth > 30 {
        return None;
    }
    let zm = 0.5 * (za + zb);
    let fm = mellin_symbol(zm);
    Some(refine_step(za, fa, zm, fm, scale, depth + 1)? + refine_step(zm, fm, zb, fb, scale, depth + 1)?)
}

/// Number of zeros of `f` inside the rectangle, or `None` if one lies on the contour.
fn winding(r: &Rect) -> Option<i64> {
    let c = [
        Complex64::new(r.re[0], r.im[0]),
        Complex64::new(r.re[1], r.im[0]),
        Complex64::new(r.re[1], r.im[1]),
        Complex64::new(r.re[0], r.im[1]),
    ];
    let scale = 1.0 + c.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let mut total = 0.0;
    for k in 0..4 {
        total += phase_change(c[k], c[(k + 1) % 4], scale)?;
    }
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.1 {
        return None;
    }
    Some(n as i64)
}

fn newton(z0: Complex64, tol: f64) -> Option<Complex64> {
    let mut z = z0;
    for _ in 0..60 {
        let fz = mellin_symbol(z);
        let dz = fz / mellin_derivative(z);
        if !dz.re.is_finite() || !dz.im.is_finite() {
            return None;
        }
        z -= dz;
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    (mellin_symbol(z).norm() < tol).then_some(z)
}

fn split(r: &Rect, frac: f64) -> [Rect; 2] {
    if r.re[1] - r.re[0] >= r.im[1] - r.im[0] {
        let m = r.re[0] + frac * (r.re[1] - r.re[0]);
        [Rect { re: [r.re[0], m], im: r.im }, Rect { re: [m, r.re[1]], im: r.im }]
    } else {
        let m = r.im[0] + frac * (r.im[1] - r.im[0]);
        [Rect { re: r.re, im: [r.im[0], m] }, Rect { re: r.re, im: [m, r.im[1]] }]
    }
}

/// Moves the rectangle edges outward until no zero sits on the contour.
fn settle(r: Rect) -> (Rect, i64) {
    let mut cur = r;
    let mut eps = 1e-9 * (1.0 + r.diameter());
    for _ in 0..20 {
        if let Some(n) = winding(&cur) {
            return (cur, n);
        }
        cur = Rect { re: [r.re[0] - eps, r.re[1] + eps], im: [r.im[0] - eps, r.im[1] + eps] };
        eps *= 3.0;
    }
    (cur, -1)
}

fn search(r: Rect, count: i64, tol: f64, depth: usize) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let missed = |found: usize| Error::MissedRoot {
        winding: count,
        found,
        re_lo: r.re[0],
        re_hi: r.re[1],
        im_lo: r.im[0],
        im_hi: r.im[1],
    };
    if count == 1 && r.diameter() < LEAF_SIZE {
        return match newton(r.center(), tol) {
            Some(z) if r.contains(z, 1e-9) => Ok(vec![z]),
            _ => Err(missed(0)),
        };
    }
    if depth >= MAX_DEPTH {
        // cluster or multiple root: polish once and report by multiplicity
        return match newton(r.center(), tol) {
            Some(z) => Ok(vec![z; count as usize]),
            None => Err(missed(0)),
        };
    }
    // Off-center cuts keep real roots off the interior contours; a second cut
    // position is tried when a zero sits on the first one.
    for frac in [0.4871, 0.6180, 0.3719] {
        let parts: Vec<(Rect, i64)> = split(&r, frac).iter().map(|h| settle(*h)).collect();
        if parts.iter().all(|(_, n)| *n >= 0) && parts.iter().map(|(_, n)| n).sum::<i64>() == count {
            return descend(parts, tol, depth);
        }
    }
    Err(missed(0))
}

fn descend(parts: Vec<(Rect, i64)>, tol: f64, depth: usize) -> Result<Vec<Complex64>> {
    let (a, b) = (parts[0], parts[1]);
    let (ra, rb) = rayon::join(|| search(a.0, a.1, tol, depth + 1), || search(b.0, b.1, tol, depth + 1));
    let mut out = ra?;
    out.extend(rb?);
    Ok(out)
}

/// Real roots of `f` on `[lo, hi]` from sign changes on a fine grid.
pub fn real_axis_scan(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=samples).map(|i| lo + (hi - lo) * i as f64 / samples as f64).collect();
    for w in xs.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (f_real(a), f_real(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if f_real(a) * f_real(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if f_real(hi) == 0.0 && roots.last().map_or(true, |&r| r != hi) {
        roots.push(hi);
    }
    roots
}

/// All roots of `f` in the closed strip, sorted by real then imaginary part.
pub fn find_roots(strip: Strip, tol: f64) -> Result<Vec<Root>> {
    if !(strip.re_min < strip.re_max) || !(strip.im_max >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "strip needs re_min < re_max, im_max >= 0 and tol > 0 (got {strip:?}, tol {tol})"
        )));
    }
    let outer = Rect { re: [strip.re_min, strip.re_max], im: [-strip.im_max, strip.im_max] };
    let (rect, count) = settle(outer);
    if count < 0 {
        return Err(Error::MissedRoot {
            winding: count,
            found: 0,
            re_lo: strip.re_min,
            re_hi: strip.re_max,
            im_lo: -strip.im_max,
            im_hi: strip.im_max,
        });
    }
    let mut zs = search(rect, count, tol, 0)?;
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut roots: Vec<Root> = zs
        .into_iter()
        .map(|z| {
            // snap numerically real roots onto the axis
            let z = if z.im.abs() < 1e-12 { Complex64::new(z.re, 0.0) } else { z };
            let z = newton(z, tol).unwrap_or(z);
            Root { re: z.re, im: z.im, residual: mellin_symbol(z).norm() }
        })
        .collect();
    let distinct = {
        let mut d = roots.clone();
        d.dedup_by(|a, b| (a.z() - b.z()).norm() < 1e-8);
        d.len()
    };
    if distinct != count as usize && roots.len() != count as usize {
        return Err(Error::MissedRoot {
            winding: count,
            found: distinct,
            re_lo: strip.re_min,
            re_hi: strip.re_max,
            im_lo: -strip.im_max,
            im_hi: strip.im_max,
        });
    }
    // real-axis cross-check: every sign change must be among the polished roots
    for x in real_axis_scan(strip.re_min, strip.re_max, 4000) {
        if !roots.iter().any(|r| (r.re - x).abs() < 1e-6 && r.im.abs() < 1e-6) {
            return Err(Error::MissedRoot {
                winding: count,
                found: roots.len(),
                re_lo: x,
                re_hi: x,
                im_lo: 0.0,
                im_hi: 0.0,
            });
        }
    }
    roots.retain(|r| {
        r.re >= strip.re_min - 1e-9 && r.re <= strip.re_max + 1e-9 && r.im.abs() <= strip.im_max + 1e-9
    });
    Ok(roots)
}

/// Winding count of `f` around the strip boundary.
pub fn count_roots(strip: Strip) -> Option<i64> {
    let (_, n) = settle(Rect { re: [strip.re_min, strip.re_max], im: [-strip.im_max, strip.im_max] });
    (n >= 0).then_some(n)
}

/// `[1, 3, 5, ..., 2 k_max + 1]`.
pub fn scalar_exponents(k_max: usize) -> Vec<f64> {
    (0..=k_max).map(|k| (2 * k + 1) as f64).collect()
}

/// `2 / (2 - mu)`.
pub fn s0_from_mu(mu: f64) -> f64 {
    2.0 / (2.0 - mu)
}

/// `s0` from the real root of `f` near 1.35, without a full root search.
pub fn s0_bound() -> f64 {
    static S0: OnceLock<f64> = OnceLock::new();
    *S0.get_or_init(|| {
        let z = newton(Complex64::new(1.35, 0.0), 1e-13).expect("real root near 1.35");
        s0_from_mu(z.re)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub strip: Strip,
    pub winding_count: i64,
    pub stokes_roots: Vec<Root>,
    pub scalar_roots: Vec<f64>,
    /// Real part of the smallest Stokes eigenvalue above 1.
    pub z0: f64,
    pub mu_m: f64,
    pub s0: f64,
    pub residuals: Vec<f64>,
    pub f_at_1: f64,
    pub f_at_2: f64,
    pub s0_formula: String,
    pub s0_alternative_value: f64,
    pub note: String,
}

/// Root search plus the derived regularity quantities.
pub fn compute_spectrum(strip: Strip, tol: f64, k_max: usize) -> Result<SpectrumResult> {
    let stokes_roots = find_roots(strip, tol)?;
    let winding_count = count_roots(strip).unwrap_or(-1);
    let scalar_roots = scalar_exponents(k_max);
    let mut res = SpectrumResult {
        strip,
        winding_count,
        residuals: stokes_roots.iter().map(|r| r.residual).collect(),
        stokes_roots,
        scalar_roots,
        z0: f64::NAN,
        mu_m: f64::NAN,
        s0: f64::NAN,
        f_at_1: mellin_symbol(Complex64::new(1.0, 0.0)).norm(),
        f_at_2: mellin_symbol(Complex64::new(2.0, 0.0)).norm(),
        s0_formula: "s0 = 2/(2 - mu_M)".into(),
        s0_alternative_value: f64::NAN,
        note: "the alternative form 2/(Re z0 + 2) evaluates to s0_alternative_value, which is below 1 and violates \
               max(0, 2 - mu_M) < 2/s; 2/(2 - mu_M) is used"
            .into(),
    };
    let (mu, s0) = regularity_bounds(&res)?;
    res.z0 = mu;
    res.mu_m = mu;
    res.s0 = s0;
    res.s0_alternative_value = 2.0 / (mu + 2.0);
    Ok(res)
}

/// `(mu_M, s0)`: the smallest real part above 1 among all eigenvalues, and `2/(2 - mu_M)`.
/// Fails if an eigenvalue other than 1 lies in `0 < Re z < mu_M`.
pub fn regularity_bounds(spectrum: &SpectrumResult) -> Result<(f64, f64)> {
    let eps = 1e-9;
    let all: Vec<Complex64> = spectrum
        .stokes_roots
        .iter()
        .map(Root::z)
        .chain(spectrum.scalar_roots.iter().map(|&x| Complex64::new(x, 0.0)))
        .collect();
    let mu = all
        .iter()
        .filter(|z| z.re > 1.0 + eps)
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if !mu.is_finite() {
        return Err(Error::Spectrum("no eigenvalue with real part above 1 in the searched region".into()));
    }
    for z in &all {
        let is_one = (z - Complex64::new(1.0, 0.0)).norm() < eps;
        if z.re > 0.0 && z.re < mu && !is_one {
            return Err(Error::Spectrum(format!("eigenvalue {z} lies in the strip 0 < Re z < {mu}")));
        }
    }
    if mu >= 2.0 {
        return Err(Error::Spectrum(format!("mu_M = {mu} leaves 2/(2 - mu_M) undefined")));
    }
    Ok((mu, s0_from_mu(mu)))
}

/// Per-component verdict of `max(0, 2 - mu_M) < delta_i + 2/p < 2`.
pub fn weighted_admissibility(delta: &[f64], p: f64, mu_m: f64) -> Result<Vec<bool>> {
    if !(p > 1.0) {
        return Err(Error::ExponentRange { value: p, range: "(1, inf)".into() });
    }
    let lo = (2.0 - mu_m).max(0.0);
    delta
        .iter()
        .map(|&d| {
            if !(d > -2.0 / p) {
                return Err(Error::InvalidArgument(format!("weight exponent {d} must exceed -2/p = {}", -2.0 / p)));
            }
            let v = d + 2.0 / p;
            Ok(lo < v && v < 2.0)
        })
        .collect()
}

/// CSV grid of `f(z)` samples over the strip: `re,im,f_re,f_im,abs`.
pub fn symbol_samples_csv(strip: Strip, n_re: usize, n_im: usize) -> String {
    let mut out = String::from("re,im,f_re,f_im,abs\n");
    for j in 0..=n_im {
        let im = -strip.im_max + 2.0 * strip.im_max * j as f64 / n_im.max(1) as f64;
        for i in 0..=n_re {
            let re = strip.re_min + (strip.re_max - strip.re_min) * i as f64 / n_re.max(1) as f64;
            let f = mellin_symbol(Complex64::new(re, im));
            out.push_str(&format!("{re:.16e},{im:.16e},{:.16e},{:.16e},{:.16e}\n", f.re, f.im, f.norm()));
        }
    }
    out
}
