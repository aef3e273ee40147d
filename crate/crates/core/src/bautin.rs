//! Return-map recursion for `ẋ = −y + P`, `ẏ = x + Q` with `P`, `Q`
//! homogeneous of degree `d`.
//!
//! In polar coordinates `dr/dθ = Σ_j (−1)^j r^{d+j(d−1)} A B^j` with
//! `A = (xP + yQ)(cos θ, sin θ)` and `B = (xQ − yP)(cos θ, sin θ)`.
//! Writing `r(θ) = r₀ + Σ v_k(θ) r₀^k` gives the triangular system
//! `v_k' = Σ_i B_{ik}[v] R_i` solved here exactly, together with the
//! rotation-invariant generators `z_k` and the growth certificates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::idealkit::{buchberger, GrobnerBasis, IdealError};
use crate::polycore::{int, rat_to_f64, Algebra, Degree, Exponent, OrderSpec, ParamPoly, Rational, Vars};
use crate::trigsym::{TrigPoly, PI_SYMBOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BautinError {
    #[error("perturbation degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("expected {expected} coefficients per component, got {got}")]
    WrongParamCount { expected: usize, got: usize },
    #[error("coefficients use different variable lists")]
    VarMismatch,
    #[error("rotation ({0}, {1}) is not on the unit circle")]
    NotARotation(String, String),
    #[error("truncation order {k} is below the degree {d}")]
    OrderTooLow { k: usize, d: u32 },
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

/// Homogeneous degree-`d` perturbation. `a[j]`, `b[j]` are the coefficients
/// of `x^{d−j} y^j` in `P` and `Q`; they may be constants or polynomials in
/// the symbolic parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    d: u32,
    vars: Vars,
    a: Vec<ParamPoly>,
    b: Vec<ParamPoly>,
}

fn label(prefix: char, i: u32, j: u32, d: u32) -> String {
    if d < 10 {
        format!("{prefix}{i}{j}")
    } else {
        format!("{prefix}{i}_{j}")
    }
}

impl FieldSpec {
    /// All `2(d+1)` coefficients as independent parameters
    /// `a{d}0, a{d-1}1, …, a0{d}, b{d}0, …, b0{d}`.
    pub fn symbolic(d: u32) -> Result<Self, BautinError> {
        if d < 2 {
            return Err(BautinError::InvalidDegree(d));
        }
        let mut names = Vec::new();
        for p in ['a', 'b'] {
            for j in 0..=d {
                names.push(label(p, d - j, j, d));
            }
        }
        let vars = Vars::new(&names);
        let n = d as usize + 1;
        let a = (0..n).map(|j| ParamPoly::var(&vars, j)).collect();
        let b = (0..n).map(|j| ParamPoly::var(&vars, n + j)).collect();
        Ok(FieldSpec { d, vars, a, b })
    }

    pub fn numeric(d: u32, a: Vec<Rational>, b: Vec<Rational>) -> Result<Self, BautinError> {
        let vars = Vars::empty();
        let a = a.into_iter().map(|c| ParamPoly::constant(&vars, c)).collect();
        let b = b.into_iter().map(|c| ParamPoly::constant(&vars, c)).collect();
        Self::from_polys(d, vars, a, b)
    }

    pub fn from_polys(d: u32, vars: Vars, a: Vec<ParamPoly>, b: Vec<ParamPoly>) -> Result<Self, BautinError> {
        if d < 2 {
            return Err(BautinError::InvalidDegree(d));
        }
        let n = d as usize + 1;
        for v in [&a, &b] {
            if v.len() != n {
                return Err(BautinError::WrongParamCount { expected: n, got: v.len() });
            }
        }
        if a.iter().chain(&b).any(|p| p.vars() != &vars) {
            return Err(BautinError::VarMismatch);
        }
        Ok(FieldSpec { d, vars, a, b })
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    /// Coefficient of `x^i y^j` in `P`.
    pub fn a(&self, i: u32, j: u32) -> &ParamPoly {
        assert_eq!(i + j, self.d);
        &self.a[j as usize]
    }

    /// Coefficient of `x^i y^j` in `Q`.
    pub fn b(&self, i: u32, j: u32) -> &ParamPoly {
        assert_eq!(i + j, self.d);
        &self.b[j as usize]
    }

    pub fn a_coeffs(&self) -> &[ParamPoly] {
        &self.a
    }

    pub fn b_coeffs(&self) -> &[ParamPoly] {
        &self.b
    }

    /// Substitute numeric parameter values.
    pub fn specialize(&self, point: &[Rational]) -> FieldSpec {
        let vars = Vars::empty();
        let f = |p: &ParamPoly| ParamPoly::constant(&vars, p.eval_rational(point));
        FieldSpec { d: self.d, vars: vars.clone(), a: self.a.iter().map(f).collect(), b: self.b.iter().map(f).collect() }
    }

    /// `(P(x,y), Q(x,y))` evaluated in floating point at a parameter point.
    pub fn eval_pq(&self, point: &[f64], x: f64, y: f64) -> (f64, f64) {
        let d = self.d as i32;
        let mut p = 0.0;
        let mut q = 0.0;
        for j in 0..=self.d as usize {
            let m = x.powi(d - j as i32) * y.powi(j as i32);
            p += self.a[j].eval_f64(point) * m;
            q += self.b[j].eval_f64(point) * m;
        }
        (p, q)
    }

    /// Numeric coefficients, if the field carries no symbolic parameters.
    pub fn numeric_coeffs(&self) -> Option<(Vec<Rational>, Vec<Rational>)> {
        let f = |v: &[ParamPoly]| v.iter().map(|p| p.constant_value()).collect::<Option<Vec<_>>>();
        Some((f(&self.a)?, f(&self.b)?))
    }
}

/// `cos^p θ · sin^q θ` for all `p + q = n`, indexed by `q`.
fn trig_monomials(vars: &Vars, n: u32) -> Vec<TrigPoly> {
    let c = TrigPoly::cos(vars, 1);
    let s = TrigPoly::sin(vars, 1);
    (0..=n).map(|q| c.pow(n - q).mul(&s.pow(q))).collect()
}

/// `A = (xP + yQ)(cos θ, sin θ)`, `B = (xQ − yP)(cos θ, sin θ)`.
pub fn build_ab(spec: &FieldSpec) -> (TrigPoly, TrigPoly) {
    let vars = &spec.vars;
    let mono = trig_monomials(vars, spec.d + 1);
    let mut a = TrigPoly::zero(vars);
    let mut b = TrigPoly::zero(vars);
    for j in 0..=spec.d as usize {
        // x · x^{d−j} y^j = cos^{d+1−j} sin^j, y · x^{d−j} y^j = cos^{d−j} sin^{j+1}
        let xm = &mono[j];
        let ym = &mono[j + 1];
        a = a.add(&xm.mul_param(&spec.a[j])).add(&ym.mul_param(&spec.b[j]));
        b = b.add(&xm.mul_param(&spec.b[j])).sub(&ym.mul_param(&spec.a[j]));
    }
    (a, b)
}

/// `R_k` for `k = d..=kmax`, returned as a map from `k` (zero entries kept).
pub fn series_r(spec: &FieldSpec, kmax: usize) -> BTreeMap<usize, TrigPoly> {
    let (a, b) = build_ab(spec);
    series_r_from_ab(spec.d, &a, &b, kmax)
}

fn series_r_from_ab(d: u32, a: &TrigPoly, b: &TrigPoly, kmax: usize) -> BTreeMap<usize, TrigPoly> {
    let d = d as usize;
    let mut out = BTreeMap::new();
    let mut term = a.clone();
    let mut j = 0usize;
    for k in d..=kmax {
        if (k - d).is_multiple_of(d - 1) {
            let jj = (k - d) / (d - 1);
            while j < jj {
                term = term.mul(b).neg();
                j += 1;
            }
            out.insert(k, term.clone());
        } else {
            out.insert(k, TrigPoly::zero(a.vars()));
        }
    }
    out
}

/// Coefficient of `r₀^k` in `(r₀ + Σ_{p≥2} v_p r₀^p)^i`, where `v[p − 2] = v_p`.
pub fn composition_coeff<T: Algebra>(i: usize, k: usize, v: &[T], unit: &T) -> T {
    assert!(i >= 1 && k >= i);
    // series[n] is the coefficient of r₀^{n+1}
    let len = k - i + 1;
    let mut base: Vec<T> = Vec::with_capacity(len);
    base.push(unit.one_like());
    for n in 1..len {
        base.push(v.get(n - 1).cloned().unwrap_or_else(|| unit.zero_like()));
    }
    let mut acc: Vec<T> = base.clone();
    for _ in 1..i {
        let mut next = vec![unit.zero_like(); len];
        for (x, ax) in acc.iter().enumerate() {
            if ax.is_zero_elem() {
                continue;
            }
            for (y, by) in base.iter().enumerate().take(len - x) {
                if by.is_zero_elem() {
                    continue;
                }
                next[x + y] = next[x + y].add_ref(&ax.mul_ref(by));
            }
        }
        acc = next;
    }
    acc.pop().unwrap()
}

/// Output of [`run_recursion`].
#[derive(Clone, Debug)]
pub struct ReturnSeries {
    pub d: u32,
    /// Highest order computed.
    pub k_max: usize,
    pub vars: Vars,
    /// `R_k`, `k = d..=k_max`.
    pub r: BTreeMap<usize, TrigPoly>,
    /// `v_k`, `k = d..=k_max`.
    pub v: BTreeMap<usize, TrigPoly>,
    /// `L_k = v_k(2π)`, over `vars ⊕ [pi]`.
    pub l: BTreeMap<usize, ParamPoly>,
}

impl ReturnSeries {
    pub fn pi_vars(&self) -> Vars {
        self.vars.with(PI_SYMBOL)
    }

    /// `L_k` with π evaluated and parameters at `point`.
    pub fn l_f64(&self, k: usize, point: &[f64]) -> f64 {
        let mut pt = point.to_vec();
        pt.push(PI);
        self.l.get(&k).map_or(0.0, |p| p.eval_f64(&pt))
    }

    /// `v_k`, zero for `2 ≤ k < d`.
    pub fn v_k(&self, k: usize) -> TrigPoly {
        self.v.get(&k).cloned().unwrap_or_else(|| TrigPoly::zero(&self.vars))
    }
}

#[derive(Debug, Error, Clone)]
#[error("recursion stopped at order {stopped_at}: {reason}")]
pub struct RecursionError {
    pub stopped_at: usize,
    pub reason: String,
    /// Everything computed below `stopped_at`.
    pub partial: Box<ReturnSeries>,
}

/// Resource caps for the recursion.
#[derive(Clone, Copy, Debug)]
pub struct RecursionLimits {
    /// Maximum number of rational coefficients in any single `v_k`.
    pub max_coefficients: usize,
}

impl Default for RecursionLimits {
    fn default() -> Self {
        RecursionLimits { max_coefficients: 20_000_000 }
    }
}

pub fn default_order(d: u32) -> usize {
    match d {
        2 => 9,
        3 => 13,
        d => (4 * d - 1) as usize,
    }
}

/// Drives `w_k' = Σ_i P[i][k] R_i` where `P[i][k]` is the coefficient of
/// `r₀^k` in `(r₀ + Σ w_p r₀^p)^i`; `finish(k, rhs)` turns the right-hand
/// side into `w_k`.
fn power_table_recursion<F>(
    d: usize,
    kmax: usize,
    r: &BTreeMap<usize, TrigPoly>,
    vars: &Vars,
    mut finish: F,
) -> Result<(), (usize, String)>
where
    F: FnMut(usize, TrigPoly) -> Result<TrigPoly, String>,
{
    let zero = TrigPoly::zero(vars);
    // w[p] for p ≥ 1 (w[1] = 1)
    let mut w: Vec<TrigPoly> = vec![zero.clone(), TrigPoly::one(vars)];
    // table[i][k]; row 0 unused
    let mut table: Vec<Vec<TrigPoly>> = vec![Vec::new(); kmax + 1];
    for k in 1..=kmax {
        for row in table.iter_mut().skip(1) {
            row.resize(k + 1, zero.clone());
        }
    }
    table[1][1] = TrigPoly::one(vars);
    for k in 2..=kmax {
        // rows i = 2..=k at column k
        let new_entries: Vec<(usize, TrigPoly)> = (2..=k)
            .into_par_iter()
            .map(|i| {
                if i == k {
                    return (i, TrigPoly::one(vars));
                }
                let mut acc = TrigPoly::zero(vars);
                for (j, wj) in w.iter().enumerate().take(k - i + 2).skip(1) {
                    let prev = &table[i - 1][k - j];
                    if wj.is_zero() || prev.is_zero() {
                        continue;
                    }
                    acc = acc.add(&wj.mul(prev));
                }
                (i, acc)
            })
            .collect();
        for (i, t) in new_entries {
            table[i][k] = t;
        }
        let wk = if k < d {
            TrigPoly::zero(vars)
        } else {
            let rhs = (d..=k)
                .into_par_iter()
                .filter_map(|i| {
                    let ri = r.get(&i)?;
                    if ri.is_zero() || table[i][k].is_zero() {
                        return None;
                    }
                    Some(table[i][k].mul(ri))
                })
                .reduce(|| TrigPoly::zero(vars), |a, b| a.add(&b));
            finish(k, rhs).map_err(|e| (k, e))?
        };
        table[1][k] = wk.clone();
        w.push(wk);
    }
    Ok(())
}

pub fn run_recursion(spec: &FieldSpec, kmax: usize) -> Result<ReturnSeries, RecursionError> {
    run_recursion_with_limits(spec, kmax, &RecursionLimits::default())
}

pub fn run_recursion_with_limits(
    spec: &FieldSpec,
    kmax: usize,
    limits: &RecursionLimits,
) -> Result<ReturnSeries, RecursionError> {
    let d = spec.d as usize;
    let vars = spec.vars.clone();
    let r = series_r(spec, kmax.max(d));
    let mut series = ReturnSeries { d: spec.d, k_max: d.saturating_sub(1), vars: vars.clone(), r: r.clone(), v: BTreeMap::new(), l: BTreeMap::new() };
    if kmax < d {
        return Err(RecursionError {
            stopped_at: kmax,
            reason: format!("truncation order {kmax} is below the degree {d}"),
            partial: Box::new(series),
        });
    }
    let mut out_v = BTreeMap::new();
    let mut out_l = BTreeMap::new();
    let res = power_table_recursion(d, kmax, &r, &vars, |k, rhs| {
        let vk = rhs.antiderivative();
        if vk.size() > limits.max_coefficients {
            return Err(format!("v_{k} has {} coefficients, above the cap {}", vk.size(), limits.max_coefficients));
        }
        out_l.insert(k, vk.eval_2pi());
        out_v.insert(k, vk.clone());
        Ok(vk)
    });
    series.k_max = out_v.keys().next_back().copied().unwrap_or(d - 1);
    series.v = out_v;
    series.l = out_l;
    series.r.retain(|k, _| *k <= kmax);
    match res {
        Ok(()) => Ok(series),
        Err((k, reason)) => {
            series.r.retain(|kk, _| *kk < k);
            Err(RecursionError { stopped_at: k, reason, partial: Box::new(series) })
        }
    }
}

/// One membership claim checked by [`invariant_generators`].
#[derive(Clone, Debug, Serialize)]
pub struct MembershipCheck {
    pub k: usize,
    pub claim: String,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct InvariantSeries {
    pub d: u32,
    pub k_max: usize,
    /// `z_k`, `k = d..=k_max`, over the parameter variables only.
    pub z: BTreeMap<usize, ParamPoly>,
    /// Zero-mean trigonometric parts `s_k`.
    pub s: BTreeMap<usize, TrigPoly>,
    pub checks: Vec<MembershipCheck>,
}

impl InvariantSeries {
    /// True when every membership check passed, i.e. `Σ L_k x^k` and
    /// `Σ 2π z_k x^k` are φ-equivalent up to `k_max`.
    pub fn phi_equivalent_to_l(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// The `z_k` are computed from the recursion driven by the purely
/// trigonometric parts: `T_k = Σ B_{ik}[s] R_i`, `z_k` its mean, `s_k` the
/// zero-mean antiderivative of `T_k − z_k`.
pub fn invariant_z(series: &ReturnSeries) -> (BTreeMap<usize, ParamPoly>, BTreeMap<usize, TrigPoly>) {
    let d = series.d as usize;
    let mut z = BTreeMap::new();
    let mut s = BTreeMap::new();
    power_table_recursion(d, series.k_max, &series.r, &series.vars, |k, rhs| {
        let (mean, rest) = rhs.split_mean();
        let anti = rest.antiderivative();
        let (c, _) = anti.split_mean();
        let sk = anti.sub(&TrigPoly::from_param(c));
        z.insert(k, mean);
        s.insert(k, sk.clone());
        Ok(sk)
    })
    .expect("trigonometric recursion has no failure path");
    (z, s)
}

/// Membership of a polynomial over `vars ⊕ [pi]` in an ideal given by a
/// π-free basis: every π-coefficient must belong.
fn member_pi(f: &ParamPoly, basis: Option<&GrobnerBasis>, vars: &Vars) -> bool {
    if f.is_zero() {
        return true;
    }
    let Some(basis) = basis else { return false };
    let idx = f.vars().len() - 1;
    f.split_by_var(idx, vars).values().all(|c| basis.member(c).member)
}

fn member_plain(f: &ParamPoly, basis: Option<&GrobnerBasis>) -> bool {
    f.is_zero() || basis.is_some_and(|b| b.member(f).member)
}

pub fn invariant_generators(series: &ReturnSeries) -> Result<InvariantSeries, BautinError> {
    let d = series.d as usize;
    let vars = &series.vars;
    let pvars = series.pi_vars();
    let (z, s) = invariant_z(series);
    let two_pi = {
        let mut e = Exponent::zero(pvars.len());
        e.0[pvars.len() - 1] = 1;
        ParamPoly::monomial(&pvars, e, int(2))
    };
    let mut checks = Vec::new();
    let mut gens: Vec<ParamPoly> = Vec::new();
    let mut basis: Option<GrobnerBasis> = None;
    for k in d..=series.k_max {
        let zk = &z[&k];
        let lk = &series.l[&k];
        let diff = lk - &(&two_pi * &zk.extend_var(&pvars));
        checks.push(MembershipCheck {
            k,
            claim: format!("L_{k} - 2*pi*z_{k} in ideal(z_{d}..z_{})", k - 1),
            holds: member_pi(&diff, basis.as_ref(), vars),
        });
        let split = series.v[&k].split_invariant().expect("v_k vanishes at 0 by construction");
        let mut extra_ok = member_plain(&(&split.z - zk), basis.as_ref());
        for c in split.r.values() {
            extra_ok &= member_plain(c, basis.as_ref());
        }
        for (_, c) in split.mixed.terms() {
            extra_ok &= member_plain(c, basis.as_ref());
        }
        checks.push(MembershipCheck {
            k,
            claim: format!("theta-polynomial part of v_{k} beyond z_{k} in ideal(z_{d}..z_{})", k - 1),
            holds: extra_ok,
        });
        if !zk.is_zero() && !member_plain(zk, basis.as_ref()) {
            gens.push(zk.clone());
            basis = Some(buchberger(&gens, &OrderSpec::GradedLex)?);
        }
    }
    Ok(InvariantSeries { d: series.d, k_max: series.k_max, z, s, checks })
}

/// Express the field in coordinates rotated by the angle with cosine `c`
/// and sine `s`: `x = c x' − s y'`, `y = s x' + c y'`.
pub fn rotate_params(spec: &FieldSpec, c: &Rational, s: &Rational) -> Result<FieldSpec, BautinError> {
    if &(c * c) + &(s * s) != Rational::one() {
        return Err(BautinError::NotARotation(c.to_string(), s.to_string()));
    }
    let d = spec.d;
    let xy = Vars::new(&["x", "y"]);
    let x = &ParamPoly::var(&xy, 0).scale(c) - &ParamPoly::var(&xy, 1).scale(s);
    let y = &ParamPoly::var(&xy, 0).scale(s) + &ParamPoly::var(&xy, 1).scale(c);
    let n = d as usize + 1;
    let mut a_new = vec![ParamPoly::zero(&spec.vars); n];
    let mut b_new = vec![ParamPoly::zero(&spec.vars); n];
    for j in 0..n {
        let pc = &(spec.a[j].scale(c)) + &(spec.b[j].scale(s));
        let qc = &(spec.b[j].scale(c)) - &(spec.a[j].scale(s));
        let mono = &x.pow(d - j as u32) * &y.pow(j as u32);
        for (jp, (anew, bnew)) in a_new.iter_mut().zip(b_new.iter_mut()).enumerate() {
            let w = mono.coeff(&Exponent::from_slice(&[(d as usize - jp) as u16, jp as u16]));
            if !w.is_zero() {
                anew.add_scaled(&pc, &w);
                bnew.add_scaled(&qc, &w);
            }
        }
    }
    FieldSpec::from_polys(d, spec.vars.clone(), a_new, b_new)
}

/// Substitute the rotated parameters into a polynomial of the symbolic
/// parameters: `p ↦ p(a', b')`.
pub fn rotate_poly(p: &ParamPoly, rotated: &FieldSpec) -> ParamPoly {
    let images: Vec<ParamPoly> = rotated.a.iter().chain(&rotated.b).cloned().collect();
    p.substitute(&images, p.vars())
}

/// Growth constants of an `A₀`-series: `deg a_k ≤ K₁k + K₂`, `|a_k| ≤ K₃K₄^k`.
#[derive(Clone, Debug, Serialize)]
pub struct A0Cert {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub verified_upto: usize,
    pub violations: Vec<String>,
}

impl A0Cert {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct A0Report {
    /// Constants for the right-hand side coefficients `R_k`.
    pub r_cert: A0Cert,
    /// Constants for the displacement coefficients `L_k`, derived from the
    /// majorant quadratic.
    pub l_cert: A0Cert,
    /// Radius of convergence of the majorant series.
    pub majorant_radius: f64,
}

/// Majorant constants `(K₃′, K₄′, ρ)` for `Ψ − x = 2π K₃ (K₄Ψ)²/(1 − K₄Ψ)`.
pub fn majorant_constants(k3: f64, k4: f64) -> (f64, f64, f64) {
    let c = k4 + 2.0 * PI * k3 * k4 * k4;
    let p = 2.0 * c - k4;
    // smaller root of K4²ρ² − 2pρ + 1 = 0, written without cancellation
    let rho = 1.0 / (p + (p * p - k4 * k4).sqrt());
    let psi = (1.0 + k4 * rho) / (2.0 * c);
    (psi, 1.0 / rho, rho)
}

pub fn a0_certify(series: &ReturnSeries) -> A0Report {
    let d = series.d as i64;
    let dm1 = (d - 1) as u32;
    let base = int(2 * (d + 1));
    let base_f = (2 * (d + 1)) as f64;
    let k3 = base_f.powf(-1.0 / (d - 1) as f64);
    let k4 = base_f.powf(1.0 / (d - 1) as f64);
    let mut rv = Vec::new();
    for (&k, rk) in &series.r {
        if let Degree::Finite(deg) = rk.param_degree() {
            if deg as usize * dm1 as usize > k - 1 {
                rv.push(format!("deg R_{k} = {deg} exceeds (k-1)/(d-1)"));
            }
        }
        if let Some(norm) = rk.harmonic_norm() {
            let ok = if (k - 1) % dm1 as usize == 0 {
                norm <= num_traits::pow(base.clone(), (k - 1) / dm1 as usize)
            } else {
                rat_to_f64(&norm) <= base_f.powf((k - 1) as f64 / dm1 as f64) * (1.0 + 1e-12)
            };
            if !ok {
                rv.push(format!("|R_{k}| = {} exceeds [2(d+1)]^((k-1)/(d-1))", rat_to_f64(&norm)));
            }
        } else {
            rv.push(format!("R_{k} is not a trigonometric polynomial"));
        }
    }
    let (k3p, k4p, rho) = majorant_constants(k3, k4);
    let mut lv = Vec::new();
    let pi_idx = series.pi_vars().len() - 1;
    for (&k, vk) in &series.v {
        if let Degree::Finite(deg) = vk.param_degree() {
            if deg as usize * dm1 as usize > k {
                lv.push(format!("deg v_{k} = {deg} exceeds k/(d-1)"));
            }
        }
        let norm = series.l[&k].norm_substituting(pi_idx, PI);
        let bound = k3p * k4p.powi(k as i32);
        if norm > bound * (1.0 + 1e-12) {
            lv.push(format!("|L_{k}| = {norm:e} exceeds K3'K4'^k = {bound:e}"));
        }
    }
    let k1 = 1.0 / (d - 1) as f64;
    A0Report {
        r_cert: A0Cert { k1, k2: -k1, k3, k4, verified_upto: series.k_max, violations: rv },
        l_cert: A0Cert { k1, k2: 0.0, k3: k3p, k4: k4p, verified_upto: series.k_max, violations: lv },
        majorant_radius: rho,
    }
}

/// Evaluate `L_k` at a rational parameter point with π kept exact.
pub fn l_at(series: &ReturnSeries, k: usize, point: &[Rational]) -> ParamPoly {
    let pv = Vars::new(&[PI_SYMBOL]);
    let n = series.vars.len();
    let l = &series.l[&k];
    let mut out = ParamPoly::zero(&pv);
    for (e, c) in l.terms() {
        let mut coef = c.clone();
        for (i, x) in point.iter().enumerate().take(n) {
            coef *= num_traits::pow(x.clone(), e.0[i] as usize);
        }
        out.add_term(Exponent::from_slice(&[e.0[n]]), coef);
    }
    out
}
