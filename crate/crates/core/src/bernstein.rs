//! Bernstein classes and the quantitative zero bound for the displacement
//! function.
//!
//! `B¹_{R,α,K}`: `max_{|z|≤R}|f| ≤ K · max_{|z|≤αR}|f|`.
//! `B²_{N,R,c}`: `|a_j|R^j ≤ c · max_{i≤N}|a_i|R^i` for `j > N`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::bautin::{InvariantSeries, ReturnSeries};
use crate::idealkit::{buchberger, fit_c1, hironaka_divide, BautinIndex, GrobnerBasis, IdealError};
use crate::polycore::{int, rat_to_f64, Exponent, OrderSpec, ParamPoly, Rational, Vars};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BernsteinError {
    #[error("radius ratio β = {0} must lie in (0, 1)")]
    BadBeta(String),
    #[error("α = {0} must lie in (0, 1)")]
    BadAlpha(String),
    #[error("K = {0} must be at least 1")]
    BadK(String),
    #[error("Bautin index {0} is below 2")]
    IndexTooSmall(usize),
    #[error("coefficient list has {len} entries, need more than N = {n}")]
    TooFewCoefficients { len: usize, n: usize },
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

/// Per-index outcome of a `B²` check.
#[derive(Clone, Debug, Serialize)]
pub struct B2Report {
    /// `max_{i≤N} |a_i| R^i`.
    pub witness: f64,
    /// Indices `j > N` with `|a_j|R^j > c · witness`.
    pub failures: Vec<usize>,
    pub checked_upto: usize,
}

impl B2Report {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn b2_check(coeffs: &[f64], n: usize, r: f64, c: f64) -> Result<B2Report, BernsteinError> {
    if coeffs.len() <= n {
        return Err(BernsteinError::TooFewCoefficients { len: coeffs.len(), n });
    }
    let witness = coeffs[..=n]
        .iter()
        .enumerate()
        .map(|(i, a)| a.abs() * r.powi(i as i32))
        .fold(0.0, f64::max);
    let failures = coeffs
        .iter()
        .enumerate()
        .skip(n + 1)
        .filter(|(j, a)| a.abs() * r.powi(*j as i32) > c * witness)
        .map(|(j, _)| j)
        .collect();
    Ok(B2Report { witness, failures, checked_upto: coeffs.len() - 1 })
}

fn check_alpha(alpha: &Rational) -> Result<(), BernsteinError> {
    if alpha.is_positive() && alpha < &Rational::one() {
        Ok(())
    } else {
        Err(BernsteinError::BadAlpha(alpha.to_string()))
    }
}

/// `K = α^{−N}[1 + α(1 − α^N)/(1 − α) + cβ/(1 − β)]` with `β = R′/R`.
pub fn b1_from_b2(n: u32, r: &Rational, c: &Rational, r_prime: &Rational, alpha: &Rational) -> Result<Rational, BernsteinError> {
    check_alpha(alpha)?;
    let beta = r_prime / r;
    if !beta.is_positive() || beta >= Rational::one() {
        return Err(BernsteinError::BadBeta(beta.to_string()));
    }
    let one = Rational::one();
    let an = num_traits::pow(alpha.clone(), n as usize);
    let inner = &one + alpha * (&one - &an) / (&one - alpha) + c * &beta / (&one - &beta);
    Ok(inner / an)
}

/// `(N, c)` with `Kα^{N+1}/(1 − α) ≤ 1/2` and `c = K(2K+1)/(1 − α)²`.
pub fn b2_from_b1(alpha: &Rational, k: &Rational) -> Result<(u32, Rational), BernsteinError> {
    check_alpha(alpha)?;
    if k < &Rational::one() {
        return Err(BernsteinError::BadK(k.to_string()));
    }
    let (kf, af) = (rat_to_f64(k), rat_to_f64(alpha));
    let guess = ((kf.log2() - (1.0 - af).log2() + 1.0) / (1.0 / af).log2()).floor().max(0.0) as u32;
    let one = Rational::one();
    let half = Rational::new(1.into(), 2.into());
    let mut n = guess;
    while k * num_traits::pow(alpha.clone(), n as usize + 1) / (&one - alpha) > half {
        n += 1;
    }
    let c = k * (k * int(2) + &one) / ((&one - alpha) * (&one - alpha));
    Ok((n, c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZeroBound {
    Finite(u32),
    /// The formula degenerates at `α = 1`.
    Unbounded,
}

/// `⌊log₂K / log₂((1 + α²)/2α)⌋`, rounded up by a hair so that float error
/// never undercounts.
pub fn zero_bound_b1(k: f64, alpha: f64) -> ZeroBound {
    if k <= 1.0 {
        return ZeroBound::Finite(0);
    }
    if alpha >= 1.0 {
        return ZeroBound::Unbounded;
    }
    let denom = ((1.0 + alpha * alpha) / (2.0 * alpha)).log2();
    if denom <= 0.0 {
        return ZeroBound::Unbounded;
    }
    let v = k.log2() / denom;
    ZeroBound::Finite((v * (1.0 + 1e-12) + 1e-12).floor() as u32)
}

/// `R″ = R / (2^{3N} max(c, 2))`, with `N` raised to 2 when smaller.
pub fn zero_radius_b2(n: u32, r: &Rational, c: &Rational) -> (Rational, u32) {
    let n = n.max(2);
    let two = int(2);
    let m = if c > &two { c.clone() } else { two };
    let denom = Rational::from_integer(num_bigint::BigInt::from(1u8) << (3 * n) as usize) * m;
    (r / denom, n)
}

/// Same as [`zero_radius_b2`] in floating point, for very large `c`.
pub fn zero_radius_b2_f64(n: u32, r: f64, c: f64) -> (f64, u32) {
    let n = n.max(2);
    (r / (2f64.powi(3 * n as i32) * c.max(2.0)), n)
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Grid size for max-modulus estimates on circles.
pub const GRID: usize = 1024;
/// Inflation applied to grid maxima.
pub const GRID_SAFETY: f64 = 1.0 + 1e-6;

/// `max |p|` on the circle `|z| = r` from a uniform grid.
pub fn max_modulus(coeffs: &[f64], r: f64, grid: usize) -> f64 {
    (0..grid)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / grid as f64;
            horner(coeffs, Complex64::from_polar(r, t)).norm()
        })
        .fold(0.0, f64::max)
}

/// `K` of a `B¹` certificate for a polynomial, from grid maxima: the outer
/// maximum is inflated and the inner one deflated.
pub fn b1_constant(coeffs: &[f64], r: f64, alpha: f64) -> f64 {
    let outer = max_modulus(coeffs, r, GRID) * GRID_SAFETY;
    let inner = max_modulus(coeffs, alpha * r, GRID) / GRID_SAFETY;
    (outer / inner).max(1.0)
}

/// Complex roots of `Σ coeffs[i] z^i` via companion-matrix eigenvalues.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    // roots at the origin
    let zeros = c.iter().take_while(|&&a| a == 0.0).count();
    let c = &c[zeros..];
    let n = c.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if n == 0 {
        return roots;
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    roots.extend(m.complex_eigenvalues().iter().copied());
    roots
}

pub fn count_roots_in_disc(coeffs: &[f64], radius: f64) -> usize {
    polynomial_roots(coeffs).iter().filter(|z| z.norm() <= radius).count()
}

/// Sparse polynomial with float coefficients, used where π has been
/// evaluated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FloatPoly {
    pub terms: BTreeMap<Exponent, f64>,
}

impl FloatPoly {
    pub fn from_param(p: &ParamPoly) -> Self {
        FloatPoly { terms: p.terms().map(|(e, c)| (e.clone(), rat_to_f64(c))).collect() }
    }

    /// Collapse a polynomial over `vars ⊕ [pi]`, substituting π.
    pub fn from_pi_poly(p: &ParamPoly) -> Self {
        let idx = p.vars().len() - 1;
        let mut out = FloatPoly::default();
        for (e, c) in p.terms() {
            let w = rat_to_f64(c) * PI.powi(e.0[idx] as i32);
            let mut key = e.clone();
            key.0.truncate(idx);
            *out.terms.entry(key).or_insert(0.0) += w;
        }
        out
    }

    pub fn add(&self, other: &FloatPoly) -> FloatPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> FloatPoly {
        FloatPoly { terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &FloatPoly) -> FloatPoly {
        let mut out = FloatPoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                *out.terms.entry(ea.add(eb)).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    /// Upper bound for `|p(λ)|` when every `|λ_i| ≤ lambda_bar` (`≥ 1`).
    pub fn bound_at(&self, lambda_bar: f64) -> f64 {
        self.terms.iter().map(|(e, c)| c.abs() * lambda_bar.powi(e.degree() as i32)).sum()
    }
}

/// Ideal-side data needed by the displacement certificate: the Gröbner
/// basis of the Bautin ideal, the change-of-basis matrix from the focal
/// values `L_first..L_k0` to that basis, and the division constants.
#[derive(Clone, Debug)]
pub struct IdealData {
    pub index: BautinIndex,
    pub basis: GrobnerBasis,
    /// `phi_l[j][i]`: coefficient of `L_{first+i}` in `g_j`.
    pub phi_l: Vec<Vec<FloatPoly>>,
    /// `C = max 1/|lead coeff|`.
    pub c_div: f64,
    /// Empirical `C₁` over the divisions of all computed coefficients.
    pub c1: f64,
    /// Steps in those divisions that broke the per-step norm bound.
    pub division_bound_violations: usize,
}

impl IdealData {
    /// `M(λ̄) = Σ_j Σ_l sup_{|λ|≤λ̄} |Φ_jl(λ)|`.
    pub fn m_bound(&self, lambda_bar: f64) -> f64 {
        self.phi_l.iter().flatten().map(|p| p.bound_at(lambda_bar)).sum::<f64>() * (1.0 + 1e-12)
    }
}

/// Split a polynomial over `vars ⊕ [pi]` into its π-coefficients.
fn pi_parts(p: &ParamPoly, vars: &Vars) -> BTreeMap<u16, ParamPoly> {
    p.split_by_var(p.vars().len() - 1, vars)
}

fn pi_power(vars: &Vars, m: u16) -> FloatPoly {
    let mut fp = FloatPoly::default();
    fp.terms.insert(Exponent::zero(vars.len()), PI.powi(m as i32));
    fp
}

/// Assemble [`IdealData`] from the recursion and the invariant generators.
/// The Bautin ideal is generated by the `z_k` that enlarge the chain; each
/// such `z_j` is rewritten through `L_j` using `L_j − 2πz_j ∈ ideal(z_<j)`.
pub fn ideal_data(series: &ReturnSeries, inv: &InvariantSeries, index: &BautinIndex) -> Result<IdealData, BernsteinError> {
    let vars = &series.vars;
    let first = index.first;
    let k0 = index.k0;
    let order = OrderSpec::GradedLex;
    let gens_idx = &index.new_generators;
    let width = k0 - first + 1;
    let zero_row = || vec![FloatPoly::default(); width];
    // t[g] expresses z_{gens_idx[g]} through L_first..L_k0
    let mut t: Vec<Vec<FloatPoly>> = Vec::new();
    for (g, &j) in gens_idx.iter().enumerate() {
        let mut row = zero_row();
        row[j - first] = pi_power(vars, 0).scale(1.0 / (2.0 * PI));
        if g > 0 {
            let earlier: Vec<ParamPoly> = gens_idx[..g].iter().map(|m| inv.z[m].clone()).collect();
            let basis = buchberger(&earlier, &order)?;
            let pv = series.pi_vars();
            let two_pi_z = inv.z[&j].extend_var(&pv).mul_term(&Exponent::unit(pv.len(), pv.len() - 1), &int(2));
            let diff = &series.l[&j] - &two_pi_z;
            // q_m = Σ_p π^p cof_{p,m}
            let mut q: Vec<FloatPoly> = vec![FloatPoly::default(); g];
            for (p, part) in pi_parts(&diff, vars) {
                let mem = basis.member(&part);
                assert!(mem.member, "L_{j} - 2πz_{j} left the ideal of earlier generators");
                for (qm, cof) in q.iter_mut().zip(&mem.input_cofactors) {
                    *qm = qm.add(&FloatPoly::from_param(cof).mul(&pi_power(vars, p)));
                }
            }
            for (m, qm) in q.iter().enumerate() {
                for (cell, tm) in row.iter_mut().zip(&t[m]) {
                    *cell = cell.add(&qm.mul(tm).scale(-1.0 / (2.0 * PI)));
                }
            }
        }
        t.push(row);
    }
    let gens: Vec<ParamPoly> = gens_idx.iter().map(|j| inv.z[j].clone()).collect();
    let basis = buchberger(&gens, &order)?;
    let mut phi_l = Vec::new();
    for row in basis.cofactors() {
        let mut out = zero_row();
        for (phi, tg) in row.iter().zip(&t) {
            let fp = FloatPoly::from_param(phi);
            for (cell, tl) in out.iter_mut().zip(tg) {
                *cell = cell.add(&fp.mul(tl));
            }
        }
        phi_l.push(out);
    }
    // empirical C₁ from dividing every π-coefficient of every L_k and z_k
    let mut samples = Vec::new();
    let mut violations = 0;
    for k in series.l.keys() {
        let mut polys: Vec<ParamPoly> = pi_parts(&series.l[k], vars).into_values().collect();
        polys.push(inv.z[k].clone());
        for f in polys {
            if f.is_zero() {
                continue;
            }
            let res = hironaka_divide(&f, &basis);
            violations += res.bound_violations.len();
            let deg = f.degree().finite().unwrap_or(0);
            samples.push((res, f.norm(), deg));
        }
    }
    let c1 = fit_c1(&samples);
    Ok(IdealData {
        index: index.clone(),
        c_div: rat_to_f64(&basis.c_const()),
        basis,
        phi_l,
        c1,
        division_bound_violations: violations,
    })
}

/// Certificate bounding the number of small limit cycles at one parameter
/// point.
#[derive(Clone, Debug, Serialize)]
pub struct DisplacementCert {
    /// Bautin index used.
    pub d: usize,
    pub r: f64,
    pub c: f64,
    pub r_double_prime: f64,
    pub zero_bound: usize,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub c_div: f64,
    pub c1: f64,
    pub m: f64,
    pub lambda_bar: f64,
}

/// Assemble `R`, `c` and `R″` from the growth, division and cofactor constants.
#[allow(clippy::too_many_arguments)]
pub fn displacement_certificate(
    k: [f64; 4],
    c_div: f64,
    c1: f64,
    m: f64,
    lambda_bar: f64,
    d: usize,
) -> Result<DisplacementCert, BernsteinError> {
    if d < 2 {
        return Err(BernsteinError::IndexTooSmall(d));
    }
    let [k1, k2, k3, k4] = k;
    let cl = c1 * lambda_bar;
    let r = 1.0 / (cl.powf(k1) * k4);
    let head = m * c_div * k3 * cl.powf(k2);
    let c = if r <= 1.0 { head / r.powi(d as i32) } else { head / r };
    let (r2, _) = zero_radius_b2_f64(d as u32 - 1, r, c);
    Ok(DisplacementCert {
        d,
        r,
        c,
        r_double_prime: r2,
        zero_bound: d - 1,
        k1,
        k2,
        k3,
        k4,
        c_div,
        c1,
        m,
        lambda_bar,
    })
}

/// `λ̄ = max(1, max_i |λ_i|)`.
pub fn lambda_bar(point: &[f64]) -> f64 {
    point.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

/// Re-check `|f_k|R^k ≤ c · max_{i≤d}|f_i|R^i` on the given coefficient
/// values (`values[k]` is `f_k`, missing indices are zero). Returns the
/// failing indices.
pub fn verify_chain(cert: &DisplacementCert, values: &BTreeMap<usize, f64>) -> Vec<usize> {
    let head = values
        .iter()
        .filter(|(k, _)| **k <= cert.d)
        .map(|(k, v)| v.abs() * cert.r.powi(*k as i32))
        .fold(0.0, f64::max);
    values
        .iter()
        .filter(|(k, v)| v.abs() * cert.r.powi(**k as i32) > cert.c * head * (1.0 + 1e-9))
        .map(|(k, _)| *k)
        .collect()
}
