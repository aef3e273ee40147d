//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`ParamPoly`] lives in `Q[λ_1, ..., λ_D]` where the λ are named
//! perturbation parameters (`a20`, `b11`, ...). Terms are kept in a
//! `BTreeMap` keyed by [`Exponent`], whose natural `Ord` is the graded order
//! with a lexicographic tie-break, so the last stored term is always the
//! privileged (initial) monomial under the default [`OrderSpec`].
//!
//! Note that everything downstream of the monomial order (Gröbner bases,
//! division constants, certificate radii) depends on that choice.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;
use thiserror::Error;

/// Exact coefficient field.
pub type Rational = BigRational;

/// Build a rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // huge numerator or denominator: scale both down first
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable sets differ: {left:?} vs {right:?}")]
    VarMismatch { left: Vec<String>, right: Vec<String> },
    #[error("exponent length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
}

/// Exponent vector of a monomial.
///
/// `Ord` is graded: total degree first, ties broken lexicographically with
/// the first variable most significant. So `(2,0) > (1,1) > (0,2)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Exponent(pub SmallVec<[u16; 12]>);

impl Exponent {
    pub fn zero(len: usize) -> Self {
        Exponent(SmallVec::from_elem(0, len))
    }

    pub fn unit(len: usize, var: usize) -> Self {
        let mut e = Self::zero(len);
        e.0[var] = 1;
        e
    }

    pub fn from_slice(s: &[u16]) -> Self {
        Exponent(SmallVec::from_slice(s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.len(), other.len());
        Exponent(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other` divides `self`.
    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        debug_assert_eq!(self.len(), other.len());
        let mut out = SmallVec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Exponent(out))
    }

    pub fn divides(&self, other: &Exponent) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn lcm(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(other.0.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    /// True when the two monomials share no variable.
    pub fn coprime(&self, other: &Exponent) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Monomial order selection.
///
/// `GradedLex` is the default and matches the natural `Ord` of [`Exponent`].
/// `BlockGradedLex { split }` compares the first `split` variables with
/// graded-lex and only on a tie looks at the remaining ones (again
/// graded-lex); it is used to treat trailing variables as coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum OrderSpec {
    #[default]
    GradedLex,
    BlockGradedLex { split: usize },
}

fn graded_lex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl OrderSpec {
    /// Total order on exponent vectors; see the type docs for the rule.
    pub fn compare(&self, a: &Exponent, b: &Exponent) -> Result<Ordering, PolyError> {
        if a.len() != b.len() {
            return Err(PolyError::LengthMismatch(a.len(), b.len()));
        }
        Ok(self.cmp_unchecked(a, b))
    }

    pub(crate) fn cmp_unchecked(&self, a: &Exponent, b: &Exponent) -> Ordering {
        match *self {
            OrderSpec::GradedLex => a.cmp(b),
            OrderSpec::BlockGradedLex { split } => {
                let s = split.min(a.len());
                graded_lex(&a.0[..s], &b.0[..s]).then_with(|| graded_lex(&a.0[s..], &b.0[s..]))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            OrderSpec::GradedLex => "graded-lex".to_string(),
            OrderSpec::BlockGradedLex { split } => format!("block-graded-lex({split})"),
        }
    }
}

/// Named variable list shared between polynomials.
#[derive(Clone, Debug)]
pub struct Vars(Arc<[String]>);

impl Vars {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Vars(names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into())
    }

    pub fn empty() -> Self {
        Vars(Vec::<String>::new().into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// New list with `name` appended.
    pub fn with(&self, name: &str) -> Vars {
        let mut v: Vec<String> = self.0.to_vec();
        v.push(name.to_string());
        Vars(v.into())
    }
}

impl PartialEq for Vars {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Vars {}

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::Finite(d) => Some(d),
            Degree::NegInfinity => None,
        }
    }

    /// Degree sum as for a product; `-inf` absorbs.
    pub fn plus(self, other: Degree) -> Degree {
        match (self, other) {
            (Degree::Finite(a), Degree::Finite(b)) => Degree::Finite(a + b),
            _ => Degree::NegInfinity,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::Finite(d) => write!(f, "{d}"),
            Degree::NegInfinity => write!(f, "-inf"),
        }
    }
}

/// Exact sparse polynomial in named parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPoly {
    vars: Vars,
    terms: BTreeMap<Exponent, Rational>,
}

impl ParamPoly {
    pub fn zero(vars: &Vars) -> Self {
        ParamPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Exponent::zero(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn var(vars: &Vars, idx: usize) -> Self {
        let mut p = Self::zero(vars);
        p.terms.insert(Exponent::unit(vars.len(), idx), Rational::one());
        p
    }

    pub fn monomial(vars: &Vars, exp: Exponent, c: Rational) -> Self {
        assert_eq!(exp.len(), vars.len(), "exponent length must match variable count");
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Rational)>>(vars: &Vars, it: I) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in it {
            assert_eq!(e.len(), vars.len(), "exponent length must match variable count");
            p.add_term(e, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &Rational)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Exponent, Rational> {
        self.terms
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

    pub fn coeff(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Value if the polynomial is constant.
    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.is_zero().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &ParamPoly) -> Result<(), PolyError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VarMismatch {
                left: self.vars.names().to_vec(),
                right: other.vars.names().to_vec(),
            })
        }
    }

    pub fn try_add(&self, other: &ParamPoly) -> Result<ParamPoly, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &ParamPoly) -> Result<ParamPoly, PolyError> {
        self.check_vars(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &ParamPoly) -> ParamPoly {
        if self.is_zero() || other.is_zero() {
            return ParamPoly::zero(&self.vars);
        }
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        let mut acc: HashMap<Exponent, Rational> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let prod = ca * cb;
                acc.entry(ea.add(eb))
                    .and_modify(|c| *c += &prod)
                    .or_insert(prod);
            }
        }
        ParamPoly {
            vars: self.vars.clone(),
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero(&self.vars);
        }
        ParamPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Multiply by `c * λ^shift`.
    pub fn mul_term(&self, shift: &Exponent, c: &Rational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero(&self.vars);
        }
        ParamPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.add(shift), x * c)).collect(),
        }
    }

    /// `self += c * other`, in place.
    pub fn add_scaled(&mut self, other: &ParamPoly, c: &Rational) {
        if c.is_one() {
            for (e, x) in &other.terms {
                self.add_term(e.clone(), x.clone());
            }
        } else {
            for (e, x) in &other.terms {
                self.add_term(e.clone(), x * c);
            }
        }
    }

    /// `self -= c * λ^shift * other`, in place.
    pub fn sub_scaled_shifted(&mut self, other: &ParamPoly, shift: &Exponent, c: &Rational) {
        for (e, x) in &other.terms {
            self.add_term(e.add(shift), -(x * c));
        }
    }

    pub fn pow(&self, n: u32) -> ParamPoly {
        let mut out = ParamPoly::one(&self.vars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul_unchecked(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        out
    }

    /// ℓ¹ norm of the coefficient vector.
    pub fn norm(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, c| acc + c.abs())
    }

    pub fn norm_f64(&self) -> f64 {
        self.terms.values().map(|c| rat_to_f64(c).abs()).sum()
    }

    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|e| e.degree())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// Degree in the variables with index `< split` only.
    pub fn partial_degree(&self, split: usize) -> Degree {
        self.terms
            .keys()
            .map(|e| e.0[..split.min(e.len())].iter().map(|&x| x as u32).sum())
            .max()
            .map_or(Degree::NegInfinity, Degree::Finite)
    }

    /// Order-maximal exponent with its coefficient.
    pub fn privileged_exponent(&self, order: &OrderSpec) -> Result<(Exponent, Rational), PolyError> {
        let (e, c) = match order {
            OrderSpec::GradedLex => self.terms.iter().next_back(),
            _ => self.terms.iter().max_by(|a, b| order.cmp_unchecked(a.0, b.0)),
        }
        .ok_or(PolyError::ZeroPolynomial)?;
        Ok((e.clone(), c.clone()))
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars());
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.0.iter().zip(point).map(|(&k, &x)| x.powi(k as i32)).product();
                rat_to_f64(c) * m
            })
            .sum()
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars());
        let mut out = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (&k, x) in e.0.iter().zip(point) {
                if k > 0 {
                    m *= num_traits::pow(x.clone(), k as usize);
                }
            }
            out += m;
        }
        out
    }

    /// Substitute every variable by a polynomial over `target` variables.
    pub fn substitute(&self, images: &[ParamPoly], target: &Vars) -> ParamPoly {
        assert_eq!(images.len(), self.nvars());
        let mut cache: HashMap<(usize, u16), ParamPoly> = HashMap::new();
        let mut out = ParamPoly::zero(target);
        for (e, c) in &self.terms {
            let mut m = ParamPoly::constant(target, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = cache
                    .entry((i, k))
                    .or_insert_with(|| images[i].pow(k as u32))
                    .clone();
                m = m.mul_unchecked(&pw);
            }
            out = &out + &m;
        }
        out
    }

    /// Same polynomial viewed over `vars` extended by one trailing variable.
    pub fn extend_var(&self, extended: &Vars) -> ParamPoly {
        assert_eq!(extended.len(), self.nvars() + 1);
        ParamPoly {
            vars: extended.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut x = e.0.clone();
                    x.push(0);
                    (Exponent(x), c.clone())
                })
                .collect(),
        }
    }

    /// Split by powers of variable `idx`; returned parts no longer carry it.
    pub fn split_by_var(&self, idx: usize, reduced: &Vars) -> BTreeMap<u16, ParamPoly> {
        assert_eq!(reduced.len() + 1, self.nvars());
        let mut out: BTreeMap<u16, ParamPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let k = e.0[idx];
            let mut x = e.0.clone();
            x.remove(idx);
            out.entry(k)
                .or_insert_with(|| ParamPoly::zero(reduced))
                .add_term(Exponent(x), c.clone());
        }
        out
    }

    /// Substitute a float for variable `idx` and return the ℓ¹ norm of the
    /// resulting real-coefficient polynomial in the remaining variables.
    pub fn norm_substituting(&self, idx: usize, value: f64) -> f64 {
        let mut acc: HashMap<SmallVec<[u16; 12]>, f64> = HashMap::new();
        for (e, c) in &self.terms {
            let mut x = e.0.clone();
            let k = x.remove(idx);
            *acc.entry(x).or_insert(0.0) += rat_to_f64(c) * value.powi(k as i32);
        }
        acc.values().map(|v| v.abs()).sum()
    }

    /// Apply `f` to every coefficient, dropping those that become zero.
    pub fn map_coeffs<F: Fn(&Rational) -> Rational>(&self, f: F) -> ParamPoly {
        ParamPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Rebuild over a different variable list of the same length.
    pub fn relabel(&self, vars: &Vars) -> ParamPoly {
        assert_eq!(vars.len(), self.nvars());
        ParamPoly { vars: vars.clone(), terms: self.terms.clone() }
    }

    /// Fold the trailing variable into coefficients by substituting `value`.
    pub fn eval_var_rational(&self, idx: usize, value: &Rational, reduced: &Vars) -> ParamPoly {
        let mut out = ParamPoly::zero(reduced);
        for (k, part) in self.split_by_var(idx, reduced) {
            out = &out + &part.scale(&num_traits::pow(value.clone(), k as usize));
        }
        out
    }
}

impl std::ops::Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: &ParamPoly) -> ParamPoly {
        self.try_add(rhs).expect("ParamPoly add: variable mismatch")
    }
}

impl std::ops::Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: &ParamPoly) -> ParamPoly {
        self.check_vars(rhs).expect("ParamPoly sub: variable mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: &ParamPoly) -> ParamPoly {
        self.try_mul(rhs).expect("ParamPoly mul: variable mismatch")
    }
}

impl std::ops::Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Human readable form, highest monomial first, e.g. `a20^2 - 2/3*a20*b11 + 1`.
impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = &self.vars.names()[i];
                    if k == 1 { name.clone() } else { format!("{name}^{k}") }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&a), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Minimal ring interface shared by [`ParamPoly`] and the trigonometric
/// polynomials, so series manipulations can be written once.
pub trait Algebra: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn scale_int(&self, k: i64) -> Self;
}

impl Algebra for ParamPoly {
    fn zero_like(&self) -> Self {
        ParamPoly::zero(&self.vars)
    }
    fn one_like(&self) -> Self {
        ParamPoly::one(&self.vars)
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_int(&self, k: i64) -> Self {
        self.scale(&int(k))
    }
}
