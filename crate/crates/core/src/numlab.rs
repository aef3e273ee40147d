//! Floating-point oracles: an adaptive Dormand–Prince 5(4) integrator, the
//! reduced return map `dr/dθ = r^d A / (1 + r^{d−1} B)`, Taylor fits of the
//! displacement, zero counting and the planar ε-perturbed runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bautin::FieldSpec;
use crate::melnikov::XyPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("tolerances must be positive")]
    BadConfig,
    #[error("step limit reached at t = {0}")]
    MaxSteps(f64),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("denominator 1 + r^(d-1) B degenerate at θ = {0}")]
    Degenerate(f64),
    #[error("orbit does not return to the section")]
    NonReturning,
    #[error("invalid grid: {0}")]
    BadGrid(String),
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Constant step size; disables error control.
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-12, max_steps: 2_000_000, fixed_step: None }
    }
}

impl IntegratorConfig {
    /// Dormand–Prince: fifth-order solution with embedded fourth-order error estimate.
    pub const ORDER: u32 = 5;

    fn validate(&self) -> Result<(), NumError> {
        let ok = self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.fixed_step.is_none_or(|h| h > 0.0);
        if ok {
            Ok(())
        } else {
            Err(NumError::BadConfig)
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side `f(t, y, dy)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), NumError>;
}

impl<F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), NumError>> Rhs for F {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), NumError> {
        self(t, y, dy)
    }
}

/// One Dormand–Prince step; returns the new state and the error estimate.
fn dp_step<F: Rhs>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>), NumError> {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for s in 0..7 {
        for i in 0..n {
            tmp[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
        }
        f.eval(t + C[s] * h, &tmp, &mut k[s])?;
    }
    let mut y5 = vec![0.0; n];
    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for s in 0..7 {
            s5 += B5[s] * k[s][i];
            s4 += B4[s] * k[s][i];
        }
        y5[i] = y[i] + h * s5;
        err[i] = h * (s5 - s4);
    }
    Ok((y5, err))
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Event `g(t, y)`; integration stops where `g` first crosses zero upward.
pub type Event<'a> = &'a dyn Fn(f64, &[f64]) -> f64;

/// Integrate from `t0` toward `t1`, optionally stopping at an upward zero
/// crossing of `event`, located by bisection on the last step size.
pub fn integrate<F: Rhs>(
    f: &mut F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    event: Option<Event<'_>>,
) -> Result<Trajectory, NumError> {
    cfg.validate()?;
    let mut t = t0;
    let mut y = y0.to_vec();
    let span = t1 - t0;
    let mut h = cfg.fixed_step.unwrap_or(span.abs() * 1e-3).min(span.abs()).copysign(span);
    let (mut accepted, mut rejected) = (0, 0);
    while (t1 - t) * span.signum() > 0.0 {
        if accepted + rejected >= cfg.max_steps {
            return Err(NumError::MaxSteps(t));
        }
        let last = (t + h - t1) * span.signum() >= 0.0;
        let hh = if last { t1 - t } else { h };
        let (y_new, err) = dp_step(f, t, &y, hh)?;
        let ratio = if cfg.fixed_step.is_some() {
            0.0
        } else {
            let s: f64 = y
                .iter()
                .zip(&y_new)
                .zip(&err)
                .map(|((a, b), e)| {
                    let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
                    (e / sc).powi(2)
                })
                .sum();
            (s / y.len() as f64).sqrt()
        };
        if !ratio.is_finite() {
            rejected += 1;
            h *= 0.25;
            if h.abs() < 1e-14 * span.abs() {
                return Err(NumError::StepUnderflow(t));
            }
            continue;
        }
        if ratio <= 1.0 {
            if let Some(g) = event {
                if g(t, &y) < 0.0 && g(t + hh, &y_new) >= 0.0 {
                    let (te, ye) = bisect_event(f, t, &y, hh, g)?;
                    return Ok(Trajectory { t: te, y: ye, accepted: accepted + 1, rejected });
                }
            }
            t = if last { t1 } else { t + hh };
            y = y_new;
            accepted += 1;
        } else {
            rejected += 1;
        }
        if cfg.fixed_step.is_none() {
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h = hh * factor;
            if h.abs() < 1e-14 * span.abs() {
                return Err(NumError::StepUnderflow(t));
            }
        }
    }
    Ok(Trajectory { t, y, accepted, rejected })
}

fn bisect_event<F: Rhs>(f: &mut F, t: f64, y: &[f64], h: f64, g: Event<'_>) -> Result<(f64, Vec<f64>), NumError> {
    let (mut lo, mut hi) = (0.0, h);
    let mut best = dp_step(f, t, y, hi)?.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let ym = dp_step(f, t, y, mid)?.0;
        if g(t + mid, &ym) >= 0.0 {
            hi = mid;
            best = ym;
        } else {
            lo = mid;
        }
    }
    Ok((t + hi, best))
}

/// Homogeneous degree-`d` field with float coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericField {
    pub d: u32,
    /// Coefficient of `x^{d−j} y^j` in `P`, resp. `Q`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl NumericField {
    pub fn new(d: u32, a: Vec<f64>, b: Vec<f64>) -> Self {
        NumericField { d, a, b }
    }

    /// Evaluate the coefficients of `spec` at a parameter point.
    pub fn from_spec(spec: &FieldSpec, point: &[f64]) -> Self {
        NumericField {
            d: spec.degree(),
            a: spec.a_coeffs().iter().map(|p| p.eval_f64(point)).collect(),
            b: spec.b_coeffs().iter().map(|p| p.eval_f64(point)).collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn size(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(A(θ), B(θ))`.
    pub fn ab(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let d = self.d as i32;
        let (mut p, mut q) = (0.0, 0.0);
        for j in 0..=self.d as usize {
            let m = c.powi(d - j as i32) * s.powi(j as i32);
            p += self.a[j] * m;
            q += self.b[j] * m;
        }
        (c * p + s * q, c * q - s * p)
    }
}

/// `r(2π) − r₀` for real `r₀`, integrating `u = ln(r/r₀)`.
pub fn displacement(field: &NumericField, r0: f64, cfg: &IntegratorConfig) -> Result<f64, NumError> {
    let e = field.d as i32 - 1;
    let mut rhs = |theta: f64, y: &[f64], dy: &mut [f64]| {
        let (a, b) = field.ab(theta);
        let rp = (r0 * y[0].exp()).powi(e);
        let den = 1.0 + rp * b;
        if den <= 1e-8 {
            return Err(NumError::Degenerate(theta));
        }
        dy[0] = rp * a / den;
        Ok(())
    };
    let tr = integrate(&mut rhs, 0.0, 2.0 * PI, &[0.0], cfg, None)?;
    Ok(r0 * tr.y[0].exp_m1())
}

/// `r(2π)`.
pub fn integrate_return(field: &NumericField, r0: f64, cfg: &IntegratorConfig) -> Result<f64, NumError> {
    Ok(r0 + displacement(field, r0, cfg)?)
}

/// `r(2π) − r₀` for complex `r₀`.
pub fn displacement_complex(field: &NumericField, r0: Complex64, cfg: &IntegratorConfig) -> Result<Complex64, NumError> {
    let e = field.d as i32 - 1;
    let mut rhs = |theta: f64, y: &[f64], dy: &mut [f64]| {
        let (a, b) = field.ab(theta);
        let u = Complex64::new(y[0], y[1]);
        let rp = (r0 * u.exp()).powi(e);
        let den = 1.0 + rp * b;
        if den.norm() <= 1e-8 {
            return Err(NumError::Degenerate(theta));
        }
        let v = rp * a / den;
        dy[0] = v.re;
        dy[1] = v.im;
        Ok(())
    };
    let tr = integrate(&mut rhs, 0.0, 2.0 * PI, &[0.0, 0.0], cfg, None)?;
    let (re, im) = (tr.y[0], tr.y[1]);
    // e^u − 1 without cancellation for small u
    let half = (im / 2.0).sin();
    let em1 = Complex64::new(re.exp_m1() * im.cos() - 2.0 * half * half, re.exp() * im.sin());
    Ok(r0 * em1)
}

/// Sample circle for Taylor fits.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FitGrid {
    pub radius: f64,
    pub points: usize,
}

impl Default for FitGrid {
    fn default() -> Self {
        FitGrid { radius: 0.25, points: 64 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub grid: FitGrid,
    /// `coeffs[k]` approximates the coefficient of `r₀^k`.
    pub coeffs: Vec<f64>,
    /// Condition number of the sampling matrix (the scaled DFT is unitary).
    pub condition_number: f64,
    /// `max |ĉ_k| ρ^k` over the upper half of the spectrum, relative to
    /// the largest term; measures aliasing and truncation.
    pub residual: f64,
    pub warning: Option<String>,
}

impl FitReport {
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }
}

/// Taylor coefficients of the displacement from samples on the complex
/// circle `|r₀| = ρ`, recovered by a discrete Fourier transform.
pub fn fit_displacement(field: &NumericField, cfg: &IntegratorConfig, grid: &FitGrid) -> Result<FitReport, NumError> {
    let n = grid.points;
    if n < 8 || !n.is_multiple_of(2) || !(grid.radius > 0.0) {
        return Err(NumError::BadGrid(format!("{} points at radius {}", n, grid.radius)));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..=n / 2 {
        let z = Complex64::from_polar(grid.radius, 2.0 * PI * j as f64 / n as f64);
        let v = if j == 0 || j == n / 2 {
            Complex64::new(displacement(field, z.re, cfg)?, 0.0)
        } else {
            displacement_complex(field, z, cfg)?
        };
        samples[j] = v;
        if j > 0 && j < n / 2 {
            samples[n - j] = v.conj();
        }
    }
    let mut coeffs = Vec::with_capacity(n / 2);
    for k in 0..n / 2 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, s) in samples.iter().enumerate() {
            acc += s * Complex64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64);
        }
        coeffs.push(acc.re / n as f64 / grid.radius.powi(k as i32));
    }
    let terms: Vec<f64> = coeffs.iter().enumerate().map(|(k, c)| c.abs() * grid.radius.powi(k as i32)).collect();
    let head = terms.iter().fold(0.0f64, |m, v| m.max(*v));
    let tail = terms[n / 4..].iter().fold(0.0f64, |m, v| m.max(*v));
    let residual = if head > 0.0 { tail / head } else { 0.0 };
    let warning = (residual > 1e-6).then(|| format!("slow coefficient decay on the fit circle (tail ratio {residual:.3e})"));
    Ok(FitReport { grid: grid.clone(), coeffs, condition_number: 1.0, residual, warning })
}

/// Fit on the largest circle, halving from `grid.radius`, whose spectrum
/// decays and whose orbits stay regular.
pub fn fit_displacement_auto(field: &NumericField, cfg: &IntegratorConfig, grid: &FitGrid) -> Result<FitReport, NumError> {
    let mut g = grid.clone();
    let mut last = None;
    for _ in 0..12 {
        match fit_displacement(field, cfg, &g) {
            Ok(rep) if rep.warning.is_none() => return Ok(rep),
            Ok(rep) => last = Some(Ok(rep)),
            Err(NumError::Degenerate(t)) => last = Some(Err(NumError::Degenerate(t))),
            Err(e) => return Err(e),
        }
        g.radius *= 0.5;
    }
    last.unwrap_or(Err(NumError::BadGrid("no usable radius".into())))
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMethod {
    /// Sign changes of directly integrated displacements.
    Direct,
    /// Sign changes of the fitted Taylor model; used where the displacement
    /// is below what direct integration can resolve.
    TaylorModel,
    Hybrid,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroCount {
    /// Sign changes of the displacement on `(0, r_max]`.
    pub count: usize,
    /// Displacement indistinguishable from zero: no count is meaningful.
    pub center_like: bool,
    pub method: ZeroMethod,
    /// Radius below which the Taylor model replaced direct integration.
    pub resolution_radius: f64,
    /// Approximate zero locations.
    pub zeros: Vec<f64>,
    pub fit: FitReport,
}

const GRID_POINTS: usize = 240;
/// Relative displacement `|r(2π) − r₀| / r₀` that direct integration resolves.
const RESOLVABLE: f64 = 1e-9;

/// Count isolated zeros of the displacement on `(0, r_max]`.
pub fn count_displacement_zeros(field: &NumericField, cfg: &IntegratorConfig, r_max: f64) -> Result<ZeroCount, NumError> {
    if !(r_max > 0.0) {
        return Err(NumError::BadGrid(format!("r_max = {r_max}")));
    }
    let radius = (0.25 / field.size().max(1.0)).max(2.0 * r_max.min(0.25));
    let fit = fit_displacement_auto(field, cfg, &FitGrid { radius, points: 64 })?;
    let rho = fit.grid.radius;
    // noise of coefficient k is about tol·ρ / ρ^k
    let noise = 1e3 * cfg.rel_tol.max(1e-15) * rho;
    let model: Vec<f64> = fit
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| if c.abs() * rho.powi(k as i32) <= noise || k < 2 { 0.0 } else { *c })
        .collect();
    let Some(m) = model.iter().position(|c| *c != 0.0) else {
        return Ok(ZeroCount {
            count: 0,
            center_like: true,
            method: ZeroMethod::TaylorModel,
            resolution_radius: r_max,
            zeros: vec![],
            fit,
        });
    };
    // below r_lo the leading term is under the integrator's resolution
    let r_lo = (RESOLVABLE / model[m].abs()).powf(1.0 / (m as f64 - 1.0)).min(rho * 0.5);
    let taylor_top = r_lo.min(r_max);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let reduced = |r: f64| model[m..].iter().rev().fold(0.0, |acc, c| acc * r + c);
    let geo = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    };
    for r in geo(taylor_top * 1e-12, taylor_top, GRID_POINTS) {
        samples.push((r, reduced(r)));
    }
    let method = if r_lo >= r_max {
        ZeroMethod::TaylorModel
    } else {
        let direct: Result<Vec<_>, _> = geo(r_lo, r_max, GRID_POINTS)
            .into_iter()
            .skip(1)
            .map(|r| displacement(field, r, cfg).map(|v| (r, v)))
            .collect();
        samples.extend(direct?);
        if r_lo * 1e3 < r_max && taylor_top == r_lo {
            ZeroMethod::Hybrid
        } else {
            ZeroMethod::Direct
        }
    };
    let mut zeros = Vec::new();
    for w in samples.windows(2) {
        let ((ra, fa), (rb, fb)) = (w[0], w[1]);
        if fa == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        zeros.push(refine_zero(field, cfg, ra, rb, fa, r_lo, &reduced)?);
    }
    Ok(ZeroCount { count: zeros.len(), center_like: false, method, resolution_radius: r_lo, zeros, fit })
}

fn refine_zero(
    field: &NumericField,
    cfg: &IntegratorConfig,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    r_lo: f64,
    reduced: &dyn Fn(f64) -> f64,
) -> Result<f64, NumError> {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let v = if mid <= r_lo { reduced(mid) } else { displacement(field, mid, cfg)? };
        if v.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Float coefficients of a polynomial vector field `P∂x + Q∂y`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarField {
    pub p: Vec<(u32, u32, f64)>,
    pub q: Vec<(u32, u32, f64)>,
}

impl PlanarField {
    pub fn new(p: &XyPoly, q: &XyPoly, point: &[f64]) -> Self {
        let f = |poly: &XyPoly| poly.terms().map(|((i, j), c)| (*i, *j, c.eval_f64(point))).collect();
        PlanarField { p: f(p), q: f(q) }
    }

    fn eval(terms: &[(u32, u32, f64)], x: f64, y: f64) -> f64 {
        terms.iter().map(|(i, j, c)| c * x.powi(*i as i32) * y.powi(*j as i32)).sum()
    }

    pub fn pq(&self, x: f64, y: f64) -> (f64, f64) {
        (Self::eval(&self.p, x, y), Self::eval(&self.q, x, y))
    }
}

/// `(L(c, ε) − c) / ε` for `X₀ + εX₁`, section the positive x-axis.
///
/// State `(x, y, w, φ)` with `w = (f − c)/ε` and `φ` the unwrapped angle;
/// the run stops where `φ` reaches `2π`.
pub fn planar_return(x1: &PlanarField, eps: f64, c: f64, cfg: &IntegratorConfig) -> Result<f64, NumError> {
    let mut rhs = |_t: f64, s: &[f64], ds: &mut [f64]| {
        let (x, y) = (s[0], s[1]);
        let (p, q) = x1.pq(x, y);
        let (dx, dy) = (-y + eps * p, x + eps * q);
        let r2 = x * x + y * y;
        let dphi = (x * dy - y * dx) / r2;
        if !(dphi > 0.0) || !r2.is_finite() {
            return Err(NumError::NonReturning);
        }
        ds[0] = dx;
        ds[1] = dy;
        ds[2] = x * p + y * q;
        ds[3] = dphi;
        Ok(())
    };
    let event = |_t: f64, s: &[f64]| s[3] - 2.0 * PI;
    let x0 = (2.0 * c).sqrt();
    let tr = integrate(&mut rhs, 0.0, 8.0 * PI, &[x0, 0.0, 0.0, 0.0], cfg, Some(&event))?;
    if tr.y[3] < 2.0 * PI {
        return Err(NumError::NonReturning);
    }
    Ok(tr.y[2])
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    /// `(c, (L(c,ε) − c)/ε^k, M(c))`.
    pub samples: Vec<(f64, f64, f64)>,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub k_star: usize,
    pub rows: Vec<ScalingRow>,
    /// `max_deviation(ε/2) / max_deviation(ε)` for consecutive rows.
    pub ratios: Vec<f64>,
}

impl ScalingReport {
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|r| (lo..=hi).contains(r))
    }
}

/// Default `c` grid: 8 points spread over `[0.005, 0.05]`.
pub fn default_c_grid() -> Vec<f64> {
    (0..8).map(|i| 0.005 + 0.045 * i as f64 / 7.0).collect()
}

/// Tabulate `(L(c,ε) − c)/ε^{k*}` against `M(c)`.
pub fn epsilon_scaling(
    x1: &PlanarField,
    k_star: usize,
    m: &dyn Fn(f64) -> f64,
    eps: &[f64],
    cs: &[f64],
    cfg: &IntegratorConfig,
) -> Result<ScalingReport, NumError> {
    let mut rows = Vec::new();
    for &e in eps {
        let mut samples = Vec::new();
        let mut max_deviation = 0.0f64;
        for &c in cs {
            let scaled = planar_return(x1, e, c, cfg)? / e.powi(k_star as i32 - 1);
            let mc = m(c);
            max_deviation = max_deviation.max((scaled - mc).abs());
            samples.push((c, scaled, mc));
        }
        rows.push(ScalingRow { eps: e, samples, max_deviation });
    }
    let ratios = rows.windows(2).map(|w| w[1].max_deviation / w[0].max_deviation).collect();
    Ok(ScalingReport { k_star, rows, ratios })
}
