//! Successive derivatives of the return map of `X₀ + εX₁`, where
//! `X₀ = x∂y − y∂x` has first integral `f = (x² + y²)/2`.
//!
//! Convention: `ι_{P∂x+Q∂y}(dx∧dy) = P dy − Q dx`; level circles
//! `γ_c = {f = c}` are oriented counterclockwise. With `η = ι_{X₁}(dx∧dy)`
//! the recursion is `ξ₁ = η`, and whenever `∮ξ_k ≡ 0` one writes
//! `ξ_k = g_k df + dR_k` and sets `ξ_{k+1} = g_k η`. Then the `ε^k`
//! coefficient of `c ↦ f(return point)` is `∮_{γ_c} ξ_k`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::bautin::FieldSpec;
use crate::polycore::{fmt_rational, int, ParamPoly, Rational, Vars};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MelnikovError {
    #[error("form has nonzero period {0}; no decomposition g df + dR exists")]
    NonzeroPeriod(String),
    #[error("decomposition failed although the period vanished")]
    Internal,
    #[error("Kmax must be at least 1")]
    BadOrder,
}

/// Polynomial in `x, y` whose coefficients are polynomials in parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XyPoly {
    vars: Vars,
    terms: BTreeMap<(u32, u32), ParamPoly>,
}

impl XyPoly {
    pub fn zero(vars: &Vars) -> Self {
        XyPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    /// `c · x^i y^j`.
    pub fn monomial(vars: &Vars, i: u32, j: u32, c: ParamPoly) -> Self {
        let mut p = XyPoly::zero(vars);
        p.add_term(i, j, &c);
        p
    }

    pub fn from_rational_terms<I: IntoIterator<Item = ((u32, u32), Rational)>>(it: I) -> Self {
        let vars = Vars::empty();
        let mut p = XyPoly::zero(&vars);
        for ((i, j), c) in it {
            p.add_term(i, j, &ParamPoly::constant(&vars, c));
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &ParamPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> ParamPoly {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| ParamPoly::zero(&self.vars))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(|| ParamPoly::zero(&self.vars));
        *e = &*e + c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn add(&self, other: &XyPoly) -> XyPoly {
        let mut out = self.clone();
        for ((i, j), c) in &other.terms {
            out.add_term(*i, *j, c);
        }
        out
    }

    pub fn sub(&self, other: &XyPoly) -> XyPoly {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> XyPoly {
        let mut out = XyPoly::zero(&self.vars);
        for ((i, j), c) in &self.terms {
            out.add_term(*i, *j, &c.scale(s));
        }
        out
    }

    pub fn mul(&self, other: &XyPoly) -> XyPoly {
        let mut out = XyPoly::zero(&self.vars);
        for ((i, j), c) in &self.terms {
            for ((k, l), d) in &other.terms {
                out.add_term(i + k, j + l, &(c * d));
            }
        }
        out
    }

    /// Multiply by `x^i y^j`.
    pub fn shift(&self, i: u32, j: u32) -> XyPoly {
        XyPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|((a, b), c)| ((a + i, b + j), c.clone())).collect() }
    }

    pub fn dx(&self) -> XyPoly {
        let mut out = XyPoly::zero(&self.vars);
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                out.add_term(i - 1, *j, &c.scale(&int(*i as i64)));
            }
        }
        out
    }

    pub fn dy(&self) -> XyPoly {
        let mut out = XyPoly::zero(&self.vars);
        for ((i, j), c) in &self.terms {
            if *j > 0 {
                out.add_term(*i, j - 1, &c.scale(&int(*j as i64)));
            }
        }
        out
    }

    /// Part of total degree `n`.
    pub fn homogeneous_part(&self, n: u32) -> XyPoly {
        XyPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|((i, j), _)| i + j == n).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    pub fn eval_f64(&self, point: &[f64], x: f64, y: f64) -> f64 {
        self.terms.iter().map(|((i, j), c)| c.eval_f64(point) * x.powi(*i as i32) * y.powi(*j as i32)).sum()
    }
}

impl fmt::Display for XyPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|((i, j), c)| {
                let mut m = Vec::new();
                match i {
                    0 => {}
                    1 => m.push("x".to_string()),
                    _ => m.push(format!("x^{i}")),
                }
                match j {
                    0 => {}
                    1 => m.push("y".to_string()),
                    _ => m.push(format!("y^{j}")),
                }
                let coef = match c.constant_value() {
                    Some(q) => fmt_rational(&q),
                    None => format!("({c})"),
                };
                if m.is_empty() {
                    coef
                } else if coef == "1" {
                    m.join("*")
                } else {
                    format!("{coef}*{}", m.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `P ∂x + Q ∂y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub p: XyPoly,
    pub q: XyPoly,
}

impl VectorField {
    /// The homogeneous perturbation `P ∂x + Q ∂y` described by `spec`.
    pub fn from_field_spec(spec: &FieldSpec) -> Self {
        let d = spec.degree();
        let mut p = XyPoly::zero(spec.vars());
        let mut q = XyPoly::zero(spec.vars());
        for j in 0..=d {
            p.add_term(d - j, j, spec.a(d - j, j));
            q.add_term(d - j, j, spec.b(d - j, j));
        }
        VectorField { p, q }
    }

    /// `P = −∂H/∂y`, `Q = ∂H/∂x`.
    pub fn hamiltonian(h: &XyPoly) -> Self {
        VectorField { p: h.dy().scale(&-Rational::one()), q: h.dx() }
    }
}

/// `ω = A dx + B dy`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PForm {
    pub a: XyPoly,
    pub b: XyPoly,
}

impl PForm {
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `dR`.
    pub fn exact(r: &XyPoly) -> PForm {
        PForm { a: r.dx(), b: r.dy() }
    }

    /// `g df` with `f = (x² + y²)/2`.
    pub fn g_df(g: &XyPoly) -> PForm {
        PForm { a: g.shift(1, 0), b: g.shift(0, 1) }
    }

    pub fn add(&self, o: &PForm) -> PForm {
        PForm { a: self.a.add(&o.a), b: self.b.add(&o.b) }
    }

    pub fn mul_poly(&self, g: &XyPoly) -> PForm {
        PForm { a: self.a.mul(g), b: self.b.mul(g) }
    }

    fn degree(&self) -> Option<u32> {
        match (self.a.degree(), self.b.degree()) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        }
    }
}

/// `ι_{X₁}(dx∧dy) = P dy − Q dx`.
pub fn interior_product(x1: &VectorField) -> PForm {
    PForm { a: x1.q.scale(&-Rational::one()), b: x1.p.clone() }
}

/// `π · Σ coeffs[m] c^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CirclePoly {
    vars: Vars,
    pub coeffs: BTreeMap<u32, ParamPoly>,
}

impl CirclePoly {
    pub fn zero(vars: &Vars) -> Self {
        CirclePoly { vars: vars.clone(), coeffs: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, m: u32, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(m).or_insert_with(|| ParamPoly::zero(&self.vars));
        *e = &*e + c;
        if e.is_zero() {
            self.coeffs.remove(&m);
        }
    }

    /// Coefficient of `π c^m`.
    pub fn coeff(&self, m: u32) -> ParamPoly {
        self.coeffs.get(&m).cloned().unwrap_or_else(|| ParamPoly::zero(&self.vars))
    }

    pub fn eval_f64(&self, point: &[f64], c: f64) -> f64 {
        std::f64::consts::PI * self.coeffs.iter().map(|(m, k)| k.eval_f64(point) * c.powi(*m as i32)).sum::<f64>()
    }
}

impl fmt::Display for CirclePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .rev()
            .map(|(m, k)| {
                let coef = match k.constant_value() {
                    Some(q) => fmt_rational(&q),
                    None => format!("({k})"),
                };
                match m {
                    0 => format!("{coef}*pi"),
                    1 => format!("{coef}*pi*c"),
                    _ => format!("{coef}*pi*c^{m}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn double_factorial(n: i64) -> Rational {
    let mut acc = Rational::one();
    let mut k = n;
    while k > 1 {
        acc *= int(k);
        k -= 2;
    }
    acc
}

/// `(1/2π)∫₀^{2π} cos^a sin^b`.
fn trig_moment(a: u32, b: u32) -> Rational {
    if a % 2 == 1 || b % 2 == 1 {
        return Rational::zero();
    }
    double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1) / double_factorial((a + b) as i64)
}

/// `∮_{γ_c} ω` as `π` times a polynomial in `c` (radius² = 2c).
pub fn circle_integral(omega: &PForm) -> CirclePoly {
    let vars = omega.a.vars().clone();
    let mut out = CirclePoly::zero(&vars);
    // ∮ x^p y^q dx = −(2c)^m · 2π · moment(p, q+1), ∮ x^p y^q dy = (2c)^m · 2π · moment(p+1, q)
    let mut push = |p: u32, q: u32, coef: &ParamPoly, dx: bool| {
        let (a, b) = if dx { (p, q + 1) } else { (p + 1, q) };
        let w = trig_moment(a, b);
        if w.is_zero() {
            return;
        }
        let m = (p + q).div_ceil(2);
        let scale = Rational::from_integer(num_bigint::BigInt::from(1u8) << (m + 1) as usize) * w;
        let scale = if dx { -scale } else { scale };
        out.add_term(m, &coef.scale(&scale));
    };
    for ((p, q), c) in omega.a.terms() {
        push(*p, *q, c, true);
    }
    for ((p, q), c) in omega.b.terms() {
        push(*p, *q, c, false);
    }
    out
}

/// Reduced row echelon form of a rational matrix, applying the same row
/// operations to a right-hand side of parameter polynomials.
fn rref_solve(mut m: Vec<Vec<Rational>>, mut rhs: Vec<ParamPoly>, ncols: usize) -> Option<Vec<ParamPoly>> {
    let vars = rhs.first().map(|p| p.vars().clone()).unwrap_or_else(Vars::empty);
    let nrows = m.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        rhs.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        rhs[row] = rhs[row].scale(&inv);
        for r in 0..nrows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[row].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
                let sub = rhs[row].scale(&f);
                rhs[r] = &rhs[r] - &sub;
            }
        }
        pivots.push((row, col));
        row += 1;
        if row == nrows {
            break;
        }
    }
    if rhs[row..].iter().any(|r| !r.is_zero()) {
        return None;
    }
    let mut sol = vec![ParamPoly::zero(&vars); ncols];
    for (r, c) in pivots {
        sol[c] = rhs[r].clone();
    }
    Some(sol)
}

/// `ω = g df + dR` with `f = (x² + y²)/2`, solved degree by degree as an
/// exact linear system. Unknowns are ordered `g` monomials then `R`
/// monomials, each by descending power of `x`; free unknowns are set to 0.
pub fn star_decompose(omega: &PForm) -> Result<(XyPoly, XyPoly), MelnikovError> {
    let period = circle_integral(omega);
    if !period.is_zero() {
        return Err(MelnikovError::NonzeroPeriod(period.to_string()));
    }
    let vars = omega.a.vars().clone();
    let mut g = XyPoly::zero(&vars);
    let mut r = XyPoly::zero(&vars);
    let Some(top) = omega.degree() else { return Ok((g, r)) };
    for n in 0..=top {
        let a = omega.a.homogeneous_part(n);
        let b = omega.b.homogeneous_part(n);
        if a.is_zero() && b.is_zero() {
            continue;
        }
        // g has degree n−1 (n monomials), R degree n+1 (n+2 monomials)
        let ng = n as usize;
        let nr = n as usize + 2;
        // rows: dx coefficient of x^{n−k} y^k (k = 0..=n), then dy coefficients
        let rows = 2 * (n as usize + 1);
        let mut mat = vec![vec![Rational::zero(); ng + nr]; rows];
        for t in 0..ng {
            // g monomial x^{n−1−t} y^t: g·x dx + g·y dy
            let j = t;
            mat[j][t] += Rational::one(); // x·g lands on y-power j in dx
            mat[n as usize + 1 + j + 1][t] += Rational::one(); // y·g lands on y-power j+1 in dy
        }
        for t in 0..nr {
            let (i, j) = (n + 1 - t as u32, t as u32);
            if i > 0 {
                // ∂x: i x^{i−1} y^j, total degree n, y-power j
                mat[j as usize][ng + t] += int(i as i64);
            }
            if j > 0 {
                mat[n as usize + 1 + (j as usize - 1)][ng + t] += int(j as i64);
            }
        }
        let mut rhs = Vec::with_capacity(rows);
        for k in 0..=n {
            rhs.push(a.coeff(n - k, k));
        }
        for k in 0..=n {
            rhs.push(b.coeff(n - k, k));
        }
        let sol = rref_solve(mat, rhs, ng + nr).ok_or(MelnikovError::Internal)?;
        for t in 0..ng {
            g.add_term(n - 1 - t as u32, t as u32, &sol[t]);
        }
        for t in 0..nr {
            r.add_term(n + 1 - t as u32, t as u32, &sol[ng + t]);
        }
    }
    let rebuilt = PForm::g_df(&g).add(&PForm::exact(&r));
    if &rebuilt != omega {
        return Err(MelnikovError::Internal);
    }
    Ok((g, r))
}

#[derive(Clone, Debug)]
pub struct MelnikovResult {
    /// First order with a nonvanishing derivative, if any up to `kmax`.
    pub k_star: Option<usize>,
    /// `L_{k*}(c)`, or zero when `k_star` is `None`.
    pub m: CirclePoly,
    /// All computed `L_k(c)`, `k = 1..`.
    pub orders: Vec<CirclePoly>,
    /// Decomposition witnesses `(g_k, R_k)` for every vanishing order.
    pub trail: Vec<(XyPoly, XyPoly)>,
    pub kmax: usize,
}

pub fn successive_melnikov(x1: &VectorField, kmax: usize) -> Result<MelnikovResult, MelnikovError> {
    if kmax < 1 {
        return Err(MelnikovError::BadOrder);
    }
    let eta = interior_product(x1);
    let vars = eta.a.vars().clone();
    let mut xi = eta.clone();
    let mut orders = Vec::new();
    let mut trail = Vec::new();
    for k in 1..=kmax {
        let lk = circle_integral(&xi);
        orders.push(lk.clone());
        if !lk.is_zero() {
            return Ok(MelnikovResult { k_star: Some(k), m: lk, orders, trail, kmax });
        }
        if k == kmax {
            break;
        }
        let (g, r) = star_decompose(&xi).map_err(|_| MelnikovError::Internal)?;
        xi = eta.mul_poly(&g);
        trail.push((g, r));
    }
    Ok(MelnikovResult { k_star: None, m: CirclePoly::zero(&vars), orders, trail, kmax })
}
