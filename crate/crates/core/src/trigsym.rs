//! Polynomials in θ, cos(lθ) and sin(lθ) with [`ParamPoly`] coefficients.
//!
//! Every element is a finite sum `c(λ) θ^m cos(lθ)` / `c(λ) θ^m sin(lθ)` in
//! canonical harmonic form: products are expanded with the product-to-sum
//! identities, equal keys are merged and zero coefficients dropped, so
//! structural equality is mathematical equality.
//!
//! Values at θ = 2π are returned over the parameter variables extended by a
//! trailing variable `pi`, so that `(2π)^m` stays exact.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Mutex;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::polycore::{int, rat, rat_to_f64, Algebra, Degree, Exponent, ParamPoly, Rational, Vars};

/// Name of the exact π symbol appended to parameter variables.
pub const PI_SYMBOL: &str = "pi";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Cos,
    Sin,
}

/// Basis element `θ^m cos(lθ)` or `θ^m sin(lθ)`; `(l = 0, Sin)` never occurs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrigKey {
    pub m: u32,
    pub l: u32,
    pub phase: Phase,
}

impl TrigKey {
    pub fn new(m: u32, l: u32, phase: Phase) -> Self {
        debug_assert!(!(l == 0 && phase == Phase::Sin));
        TrigKey { m, l, phase }
    }

    fn eval(&self, theta: f64) -> f64 {
        let t = theta.powi(self.m as i32);
        match self.phase {
            Phase::Cos => t * (self.l as f64 * theta).cos(),
            Phase::Sin => t * (self.l as f64 * theta).sin(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitError {
    #[error("value at θ=0 is {0}, expected 0 for an antiderivative")]
    NonzeroAtOrigin(String),
}

/// Element of `Q[λ] ⊗ Q[θ, cos θ, sin θ]` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigPoly {
    vars: Vars,
    terms: BTreeMap<TrigKey, ParamPoly>,
}

/// Harmonic expansion `∑ (coef, key)` of a product of two basis elements,
/// ignoring θ powers (those just add).
fn harmonic_product(a: TrigKey, b: TrigKey) -> [(Rational, u32, Phase); 2] {
    let half = rat(1, 2);
    let neg_half = rat(-1, 2);
    let (l1, l2) = (a.l as i64, b.l as i64);
    let diff = l1 - l2;
    let sum = (l1 + l2) as u32;
    let ad = diff.unsigned_abs() as u32;
    // sin(l1 - l2) expressed with a nonnegative harmonic
    let sin_diff_sign = if diff >= 0 { half.clone() } else { neg_half.clone() };
    match (a.phase, b.phase) {
        (Phase::Cos, Phase::Cos) => [(half.clone(), ad, Phase::Cos), (half, sum, Phase::Cos)],
        (Phase::Sin, Phase::Sin) => [(half, ad, Phase::Cos), (neg_half, sum, Phase::Cos)],
        (Phase::Sin, Phase::Cos) => [(half, sum, Phase::Sin), (sin_diff_sign, ad, Phase::Sin)],
        (Phase::Cos, Phase::Sin) => [(half, sum, Phase::Sin), (-sin_diff_sign, ad, Phase::Sin)],
    }
}

type AntiderivTable = HashMap<TrigKey, Vec<(TrigKey, Rational)>>;

fn antideriv_cache() -> &'static Mutex<AntiderivTable> {
    static CACHE: std::sync::OnceLock<Mutex<AntiderivTable>> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Indefinite antiderivative of a basis element (no constant adjustment).
fn indefinite(key: TrigKey) -> Vec<(TrigKey, Rational)> {
    if key.l == 0 {
        return vec![(TrigKey::new(key.m + 1, 0, Phase::Cos), Rational::new(1.into(), (key.m + 1).into()))];
    }
    let l = Rational::from_integer(key.l.into());
    let inv_l = l.recip();
    let mut out: Vec<(TrigKey, Rational)> = Vec::new();
    // ∫θ^m cos = θ^m sin / l - (m/l) ∫θ^{m-1} sin
    // ∫θ^m sin = -θ^m cos / l + (m/l) ∫θ^{m-1} cos
    let (lead_key, lead_coef, sign) = match key.phase {
        Phase::Cos => (TrigKey::new(key.m, key.l, Phase::Sin), inv_l.clone(), -Rational::one()),
        Phase::Sin => (TrigKey::new(key.m, key.l, Phase::Cos), -inv_l.clone(), Rational::one()),
    };
    out.push((lead_key, lead_coef));
    if key.m > 0 {
        let factor = sign * Rational::from_integer(key.m.into()) * inv_l;
        let other = match key.phase {
            Phase::Cos => Phase::Sin,
            Phase::Sin => Phase::Cos,
        };
        for (k, c) in indefinite(TrigKey::new(key.m - 1, key.l, other)) {
            out.push((k, c * &factor));
        }
    }
    out
}

/// Antiderivative vanishing at θ=0.
fn definite(key: TrigKey) -> Vec<(TrigKey, Rational)> {
    if let Some(v) = antideriv_cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let mut g = indefinite(key);
    let at_zero: Rational = g
        .iter()
        .filter(|(k, _)| k.m == 0 && k.phase == Phase::Cos)
        .fold(Rational::zero(), |acc, (_, c)| acc + c);
    if !at_zero.is_zero() {
        g.push((TrigKey::new(0, 0, Phase::Cos), -at_zero));
    }
    let mut merged: BTreeMap<TrigKey, Rational> = BTreeMap::new();
    for (k, c) in g {
        *merged.entry(k).or_insert_with(Rational::zero) += c;
    }
    let v: Vec<_> = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    antideriv_cache().lock().unwrap().insert(key, v.clone());
    v
}

impl TrigPoly {
    pub fn zero(vars: &Vars) -> Self {
        TrigPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn from_param(p: ParamPoly) -> Self {
        let vars = p.vars().clone();
        let mut t = TrigPoly::zero(&vars);
        t.add_term(TrigKey::new(0, 0, Phase::Cos), &p);
        t
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        Self::from_param(ParamPoly::constant(vars, c))
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rational::one())
    }

    /// `cos(lθ)`.
    pub fn cos(vars: &Vars, l: u32) -> Self {
        Self::basis(vars, TrigKey::new(0, l, Phase::Cos))
    }

    /// `sin(lθ)`; zero when `l = 0`.
    pub fn sin(vars: &Vars, l: u32) -> Self {
        if l == 0 {
            return Self::zero(vars);
        }
        Self::basis(vars, TrigKey::new(0, l, Phase::Sin))
    }

    /// `θ^m`.
    pub fn theta_pow(vars: &Vars, m: u32) -> Self {
        Self::basis(vars, TrigKey::new(m, 0, Phase::Cos))
    }

    pub fn basis(vars: &Vars, key: TrigKey) -> Self {
        let mut t = TrigPoly::zero(vars);
        t.terms.insert(key, ParamPoly::one(vars));
        t
    }

    pub fn from_terms<I: IntoIterator<Item = (TrigKey, ParamPoly)>>(vars: &Vars, it: I) -> Self {
        let mut t = TrigPoly::zero(vars);
        for (k, c) in it {
            t.add_term(k, &c);
        }
        t
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TrigKey, &ParamPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &TrigKey) -> ParamPoly {
        self.terms.get(key).cloned().unwrap_or_else(|| ParamPoly::zero(&self.vars))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total number of rational coefficients stored.
    pub fn size(&self) -> usize {
        self.terms.values().map(|p| p.len()).sum()
    }

    pub fn add_term(&mut self, key: TrigKey, c: &ParamPoly) {
        self.add_term_scaled(key, c, &Rational::one());
    }

    fn add_term_scaled(&mut self, key: TrigKey, c: &ParamPoly, s: &Rational) {
        if c.is_zero() || s.is_zero() {
            return;
        }
        if key.l == 0 && key.phase == Phase::Sin {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.scale(s));
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_scaled(c, s);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        assert!(self.vars == other.vars, "TrigPoly add: variable mismatch");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        out
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TrigPoly {
        TrigPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> TrigPoly {
        if s.is_zero() {
            return TrigPoly::zero(&self.vars);
        }
        TrigPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, c)| (*k, c.scale(s))).collect(),
        }
    }

    pub fn mul_param(&self, p: &ParamPoly) -> TrigPoly {
        let mut out = TrigPoly::zero(&self.vars);
        for (k, c) in &self.terms {
            out.add_term(*k, &(c * p));
        }
        out
    }

    /// Exact product in canonical harmonics.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        assert!(self.vars == other.vars, "TrigPoly mul: variable mismatch");
        let mut out = TrigPoly::zero(&self.vars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let c = ca * cb;
                if c.is_zero() {
                    continue;
                }
                let m = ka.m + kb.m;
                if ka.l == 0 {
                    out.add_term(TrigKey::new(m, kb.l, kb.phase), &c);
                    continue;
                }
                if kb.l == 0 {
                    out.add_term(TrigKey::new(m, ka.l, ka.phase), &c);
                    continue;
                }
                for (s, l, ph) in harmonic_product(*ka, *kb) {
                    if l == 0 && ph == Phase::Sin {
                        continue;
                    }
                    out.add_term_scaled(TrigKey::new(m, l, ph), &c, &s);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> TrigPoly {
        let mut out = TrigPoly::one(&self.vars);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Antiderivative `F` with `F(0) = 0`.
    pub fn antiderivative(&self) -> TrigPoly {
        let mut out = TrigPoly::zero(&self.vars);
        for (k, c) in &self.terms {
            for (kk, s) in definite(*k) {
                out.add_term_scaled(kk, c, &s);
            }
        }
        out
    }

    pub fn derivative(&self) -> TrigPoly {
        let mut out = TrigPoly::zero(&self.vars);
        for (k, c) in &self.terms {
            if k.m > 0 {
                out.add_term_scaled(TrigKey::new(k.m - 1, k.l, k.phase), c, &int(k.m as i64));
            }
            if k.l > 0 {
                let l = int(k.l as i64);
                match k.phase {
                    Phase::Cos => out.add_term_scaled(TrigKey::new(k.m, k.l, Phase::Sin), c, &-l),
                    Phase::Sin => out.add_term_scaled(TrigKey::new(k.m, k.l, Phase::Cos), c, &l),
                }
            }
        }
        out
    }

    /// Value at θ = 0.
    pub fn eval_at_zero(&self) -> ParamPoly {
        let mut out = ParamPoly::zero(&self.vars);
        for (k, c) in &self.terms {
            if k.m == 0 && k.phase == Phase::Cos {
                out.add_scaled(c, &Rational::one());
            }
        }
        out
    }

    /// Exact value at θ = 2π over `vars ⊕ [pi]`.
    pub fn eval_2pi(&self) -> ParamPoly {
        let ext = self.vars.with(PI_SYMBOL);
        let pi_idx = ext.len() - 1;
        let mut out = ParamPoly::zero(&ext);
        for (k, c) in &self.terms {
            if k.phase == Phase::Sin {
                continue;
            }
            let mut shift = Exponent::zero(ext.len());
            shift.0[pi_idx] = k.m as u16;
            let two_m = Rational::from_integer(num_bigint::BigInt::from(1u8) << k.m as usize);
            out.add_scaled(&c.extend_var(&ext).mul_term(&shift, &Rational::one()), &two_m);
        }
        out
    }

    /// Mean over one period; only defined for θ-free elements.
    pub fn mean(&self) -> Option<ParamPoly> {
        if self.theta_degree() > 0 {
            return None;
        }
        Some(self.coeff(&TrigKey::new(0, 0, Phase::Cos)))
    }

    /// Highest power of θ present.
    pub fn theta_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.m).max().unwrap_or(0)
    }

    pub fn max_harmonic(&self) -> u32 {
        self.terms.keys().map(|k| k.l).max().unwrap_or(0)
    }

    /// Degree in the parameters.
    pub fn param_degree(&self) -> Degree {
        self.terms.values().map(|c| c.degree()).max().unwrap_or(Degree::NegInfinity)
    }

    /// `∑ norm(coeff)` over θ-free terms; bounds the parameter norm of the
    /// element at every θ.
    pub fn harmonic_norm(&self) -> Option<Rational> {
        if self.theta_degree() > 0 {
            return None;
        }
        Some(self.terms.values().fold(Rational::zero(), |acc, c| acc + c.norm()))
    }

    /// `∑ norm(coeff)·(2π)^m`: bound on the parameter norm for θ ∈ [0, 2π].
    pub fn param_norm_sup(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c.norm_f64() * (2.0 * PI).powi(k.m as i32))
            .sum()
    }

    /// Parameter norm of the element at a fixed θ (floating point).
    pub fn param_norm_at(&self, theta: f64) -> f64 {
        let mut acc: HashMap<Exponent, f64> = HashMap::new();
        for (k, c) in &self.terms {
            let w = k.eval(theta);
            for (e, x) in c.terms() {
                *acc.entry(e.clone()).or_insert(0.0) += rat_to_f64(x) * w;
            }
        }
        acc.values().map(|v| v.abs()).sum()
    }

    pub fn eval_f64(&self, theta: f64, point: &[f64]) -> f64 {
        self.terms.iter().map(|(k, c)| c.eval_f64(point) * k.eval(theta)).sum()
    }

    /// Substitute numeric parameter values, leaving a θ-expression over no variables.
    pub fn specialize(&self, point: &[Rational]) -> TrigPoly {
        let empty = Vars::empty();
        let mut out = TrigPoly::zero(&empty);
        for (k, c) in &self.terms {
            out.add_term(*k, &ParamPoly::constant(&empty, c.eval_rational(point)));
        }
        out
    }

    /// Apply a map to every coefficient (e.g. a parameter substitution).
    pub fn map_coeffs<F: Fn(&ParamPoly) -> ParamPoly>(&self, vars: &Vars, f: F) -> TrigPoly {
        let mut out = TrigPoly::zero(vars);
        for (k, c) in &self.terms {
            out.add_term(*k, &f(c));
        }
        out
    }

    /// Drop θ-free harmonic `l = 0` part and return `(mean, rest)`.
    pub fn split_mean(&self) -> (ParamPoly, TrigPoly) {
        let key = TrigKey::new(0, 0, Phase::Cos);
        let mean = self.coeff(&key);
        let mut rest = self.clone();
        rest.terms.remove(&key);
        (mean, rest)
    }

    /// Decompose `v = z θ + ∑_{m≥2} r_m θ^m + s(θ) + mixed(θ)` where `s` is a
    /// trigonometric polynomial with `s(0) = 0` and `mixed` collects the
    /// `θ^m·{cos,sin}(lθ)` terms with `m, l ≥ 1`.
    pub fn split_invariant(&self) -> Result<InvariantSplit, SplitError> {
        let v0 = self.eval_at_zero();
        if !v0.is_zero() {
            return Err(SplitError::NonzeroAtOrigin(v0.to_string()));
        }
        let mut z = ParamPoly::zero(&self.vars);
        let mut r = BTreeMap::new();
        let mut s = TrigPoly::zero(&self.vars);
        let mut mixed = TrigPoly::zero(&self.vars);
        for (k, c) in &self.terms {
            match (k.m, k.l) {
                (1, 0) => z = c.clone(),
                (m, 0) if m >= 2 => {
                    r.insert(m, c.clone());
                }
                (0, _) => s.add_term(*k, c),
                _ => mixed.add_term(*k, c),
            }
        }
        Ok(InvariantSplit { z, r, s, mixed })
    }
}

/// Output of [`TrigPoly::split_invariant`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantSplit {
    pub z: ParamPoly,
    /// `θ^m` coefficients for `m ≥ 2`.
    pub r: BTreeMap<u32, ParamPoly>,
    pub s: TrigPoly,
    pub mixed: TrigPoly,
}

impl Algebra for TrigPoly {
    fn zero_like(&self) -> Self {
        TrigPoly::zero(&self.vars)
    }
    fn one_like(&self) -> Self {
        TrigPoly::one(&self.vars)
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn scale_int(&self, k: i64) -> Self {
        self.scale(&int(k))
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let mut basis = Vec::new();
                if k.m == 1 {
                    basis.push("θ".to_string());
                } else if k.m > 1 {
                    basis.push(format!("θ^{}", k.m));
                }
                if k.l > 0 {
                    let name = if k.phase == Phase::Cos { "cos" } else { "sin" };
                    basis.push(if k.l == 1 { format!("{name}(θ)") } else { format!("{name}({}θ)", k.l) });
                }
                if basis.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", basis.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nv() -> Vars {
        Vars::empty()
    }

    fn c(x: Rational) -> TrigPoly {
        TrigPoly::constant(&nv(), x)
    }

    #[test]
    fn cos_squared() {
        let v = nv();
        let p = TrigPoly::cos(&v, 1).mul(&TrigPoly::cos(&v, 1));
        let want = c(rat(1, 2)).add(&TrigPoly::cos(&v, 2).scale(&rat(1, 2)));
        assert_eq!(p, want);
    }

    #[test]
    fn identity_product() {
        let v = nv();
        let t = TrigPoly::sin(&v, 3).add(&TrigPoly::theta_pow(&v, 2));
        assert_eq!(TrigPoly::one(&v).mul(&t), t);
    }

    #[test]
    fn sin_times_cos2() {
        let v = nv();
        let p = TrigPoly::sin(&v, 1).mul(&TrigPoly::cos(&v, 2));
        let want = TrigPoly::sin(&v, 3)
            .scale(&rat(1, 2))
            .sub(&TrigPoly::sin(&v, 1).scale(&rat(1, 2)));
        assert_eq!(p, want);
    }

    #[test]
    fn antiderivative_examples() {
        let v = nv();
        assert_eq!(TrigPoly::cos(&v, 1).antiderivative(), TrigPoly::sin(&v, 1));
        assert_eq!(TrigPoly::one(&v).antiderivative(), TrigPoly::theta_pow(&v, 1));
        let tc = TrigPoly::theta_pow(&v, 1).mul(&TrigPoly::cos(&v, 1));
        let want = TrigPoly::theta_pow(&v, 1)
            .mul(&TrigPoly::sin(&v, 1))
            .add(&TrigPoly::cos(&v, 1))
            .sub(&TrigPoly::one(&v));
        assert_eq!(tc.antiderivative(), want);
        assert_eq!(want.derivative(), tc);
    }

    #[test]
    fn eval_2pi_examples() {
        let v = nv();
        assert!(TrigPoly::sin(&v, 3).eval_2pi().is_zero());
        let t = TrigPoly::theta_pow(&v, 1).eval_2pi();
        assert_eq!(t.to_string(), "2*pi");
        let f = TrigPoly::theta_pow(&v, 1)
            .mul(&TrigPoly::sin(&v, 1))
            .add(&TrigPoly::cos(&v, 1))
            .sub(&TrigPoly::one(&v));
        assert!(f.eval_2pi().is_zero());
    }

    #[test]
    fn split_examples() {
        let v = nv();
        let s = TrigPoly::theta_pow(&v, 1).scale(&int(3)).split_invariant().unwrap();
        assert_eq!(s.z.constant_value(), Some(int(3)));
        assert!(s.r.is_empty() && s.s.is_zero());
        let s = TrigPoly::sin(&v, 1).split_invariant().unwrap();
        assert!(s.z.is_zero());
        assert_eq!(s.s, TrigPoly::sin(&v, 1));
        let p = TrigPoly::theta_pow(&v, 1)
            .scale(&int(2))
            .add(&TrigPoly::theta_pow(&v, 2))
            .add(&TrigPoly::cos(&v, 1))
            .sub(&TrigPoly::one(&v));
        let s = p.split_invariant().unwrap();
        assert_eq!(s.z.constant_value(), Some(int(2)));
        assert_eq!(s.r.len(), 1);
        assert_eq!(s.r[&2].constant_value(), Some(int(1)));
        assert_eq!(s.s, TrigPoly::cos(&v, 1).sub(&TrigPoly::one(&v)));
        assert!(s.mixed.is_zero());
        assert!(TrigPoly::cos(&v, 1).split_invariant().is_err());
    }

    fn random_trig(rng: &mut ChaCha8Rng, vars: &Vars) -> TrigPoly {
        let mut t = TrigPoly::zero(vars);
        for _ in 0..rng.gen_range(1..6) {
            let m = rng.gen_range(0..3);
            let l = rng.gen_range(0..4);
            let phase = if l > 0 && rng.gen_bool(0.5) { Phase::Sin } else { Phase::Cos };
            let mut coef = ParamPoly::constant(vars, rat(rng.gen_range(-5..=5), rng.gen_range(1..4)));
            for i in 0..vars.len() {
                if rng.gen_bool(0.5) {
                    coef = &coef * &ParamPoly::var(vars, i);
                }
            }
            t.add_term(TrigKey::new(m, l, phase), &coef);
        }
        t
    }

    /// Composite Gauss-Legendre (5 nodes) on `n` panels.
    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let x = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
        let w = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for p in 0..n {
            let mid = a + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(w) {
                s += wi * f(mid + 0.5 * h * xi);
            }
        }
        s * 0.5 * h
    }

    #[test]
    fn antiderivative_laws_and_quadrature() {
        let vars = Vars::new(&["a", "b"]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let t = random_trig(&mut rng, &vars);
            let f = t.antiderivative();
            assert_eq!(f.derivative(), t);
            assert!(f.eval_at_zero().is_zero());
            let lam = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let exact = f.eval_2pi();
            let mut pt = lam.to_vec();
            pt.push(PI);
            let num = quad(|th| t.eval_f64(th, &lam), 0.0, 2.0 * PI, 200);
            assert!((exact.eval_f64(&pt) - num).abs() < 1e-12, "{} vs {}", exact.eval_f64(&pt), num);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let vars = Vars::new(&["a", "b"]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s = random_trig(&mut rng, &vars);
            let t = random_trig(&mut rng, &vars);
            let p = s.mul(&t);
            let th = rng.gen_range(0.0..2.0 * PI);
            let lam = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let want = s.eval_f64(th, &lam) * t.eval_f64(th, &lam);
            let got = p.eval_f64(th, &lam);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
            assert_eq!(p, t.mul(&s));
        }
    }

    #[test]
    fn product_associative() {
        let vars = Vars::new(&["a"]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let (a, b, cc) = (random_trig(&mut rng, &vars), random_trig(&mut rng, &vars), random_trig(&mut rng, &vars));
            assert_eq!(a.mul(&b).mul(&cc), a.mul(&b.mul(&cc)));
        }
    }
}
