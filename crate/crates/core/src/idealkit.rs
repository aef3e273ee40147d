//! Ideals in the parameter ring: Gröbner bases with cofactors, the
//! partition-based division with norm tracking, membership, φ-equivalence
//! of coefficient sequences and the Bautin index of a truncated sequence.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::polycore::{rat_to_f64, Exponent, OrderSpec, ParamPoly, Rational, Vars};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("all generators are zero")]
    AllZero,
    #[error("generators live over different variable lists")]
    VarMismatch,
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

/// Caps for basis completion.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_basis: usize,
    pub max_pairs: usize,
    pub max_terms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_basis: 400, max_pairs: 200_000, max_terms: 2_000_000 }
    }
}

fn lead(p: &ParamPoly, order: &OrderSpec) -> Option<(Exponent, Rational)> {
    p.privileged_exponent(order).ok()
}

/// Cell of the partition of `N^D` induced by a list of exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    /// `α ∈ Δ_i`: the first `i` (0-based) with `exps[i] | α`.
    Delta(usize),
    /// `α` is divisible by none of the exponents.
    Complement,
}

/// The partition `Δ_1, …, Δ_s, Δ̄` attached to privileged exponents.
#[derive(Clone, Debug)]
pub struct Partition {
    exps: Vec<Exponent>,
}

impl Partition {
    pub fn new(exps: &[Exponent]) -> Self {
        Partition { exps: exps.to_vec() }
    }

    pub fn classify(&self, alpha: &Exponent) -> Cell {
        self.exps
            .iter()
            .position(|e| e.divides(alpha))
            .map_or(Cell::Complement, Cell::Delta)
    }
}

pub fn partition(exps: &[Exponent]) -> Partition {
    Partition::new(exps)
}

/// How monomials are cleared during division.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DivisionStrategy {
    /// Each step splits the whole current polynomial along the partition and
    /// replaces every divisible monomial at once.
    #[default]
    Batch,
    /// Each step treats only the privileged monomial.
    LeadingTerm,
}

#[derive(Clone, Debug)]
pub struct DivisionResult {
    pub quotients: Vec<ParamPoly>,
    pub remainder: ParamPoly,
    pub steps: usize,
    /// `norm(f^(t+1)) / norm(f^(t))` for every step (0 when `f^(t)` vanished).
    pub per_step_norm_growth: Vec<f64>,
    /// `max 1/|lead coeff of g_j|`.
    pub c: Rational,
    /// `max norm(g_j)`.
    pub g: Rational,
    /// Steps where the growth exceeded `1 + C·G` (always empty for a correct run).
    pub bound_violations: Vec<usize>,
}

impl DivisionResult {
    /// Largest quotient norm.
    pub fn max_quotient_norm(&self) -> Rational {
        self.quotients.iter().map(|q| q.norm()).max().unwrap_or_else(Rational::zero)
    }
}

/// Gröbner basis with the cofactor matrix expressing every element through
/// the original inputs.
#[derive(Clone, Debug)]
pub struct GrobnerBasis {
    vars: Vars,
    gens: Vec<ParamPoly>,
    exps: Vec<Exponent>,
    /// `cofactors[j][l]`: `g_j = Σ_l cofactors[j][l] · inputs[l]`.
    cofactors: Vec<Vec<ParamPoly>>,
    inputs: Vec<ParamPoly>,
    order: OrderSpec,
}

#[derive(Clone, Debug)]
pub struct Membership {
    pub member: bool,
    /// Quotients with respect to the basis elements.
    pub quotients: Vec<ParamPoly>,
    /// Coefficients with respect to the original inputs (valid when `member`).
    pub input_cofactors: Vec<ParamPoly>,
    pub remainder: ParamPoly,
}

struct Elem {
    poly: ParamPoly,
    exp: Exponent,
    cof: Vec<ParamPoly>,
}

fn zero_cofs(vars: &Vars, n: usize) -> Vec<ParamPoly> {
    vec![ParamPoly::zero(vars); n]
}

fn cof_sub_scaled_shifted(dst: &mut [ParamPoly], src: &[ParamPoly], shift: &Exponent, c: &Rational) {
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            d.sub_scaled_shifted(s, shift, c);
        }
    }
}

fn cof_scale(v: &[ParamPoly], c: &Rational) -> Vec<ParamPoly> {
    v.iter().map(|p| p.scale(c)).collect()
}

/// Full reduction of `(p, cof)` by `basis`, tracking cofactors.
fn reduce_full(
    mut p: ParamPoly,
    mut cof: Vec<ParamPoly>,
    basis: &[Elem],
    order: &OrderSpec,
    limits: &Limits,
) -> Result<(ParamPoly, Vec<ParamPoly>), IdealError> {
    let vars = p.vars().clone();
    let mut rem = ParamPoly::zero(&vars);
    while let Some((e, c)) = lead(&p, order) {
        if p.len() > limits.max_terms {
            return Err(IdealError::ResourceLimit(format!("intermediate polynomial with {} terms", p.len())));
        }
        match basis.iter().find(|g| g.exp.divides(&e)) {
            Some(g) => {
                let shift = e.checked_sub(&g.exp).expect("divisibility checked");
                // basis elements are monic
                p.sub_scaled_shifted(&g.poly, &shift, &c);
                cof_sub_scaled_shifted(&mut cof, &g.cof, &shift, &c);
            }
            None => {
                p.add_term(e.clone(), -c.clone());
                rem.add_term(e, c);
            }
        }
    }
    Ok((rem, cof))
}

fn make_monic(el: &mut Elem, c: &Rational) {
    if !c.is_one() {
        let inv = c.recip();
        el.poly = el.poly.scale(&inv);
        el.cof = cof_scale(&el.cof, &inv);
    }
}

/// Buchberger completion with the normal selection strategy, product and
/// chain criteria, and final interreduction.
pub fn buchberger(gens: &[ParamPoly], order: &OrderSpec) -> Result<GrobnerBasis, IdealError> {
    buchberger_with_limits(gens, order, &Limits::default())
}

pub fn buchberger_with_limits(
    gens: &[ParamPoly],
    order: &OrderSpec,
    limits: &Limits,
) -> Result<GrobnerBasis, IdealError> {
    let vars = match gens.first() {
        Some(g) => g.vars().clone(),
        None => return Err(IdealError::AllZero),
    };
    if gens.iter().any(|g| g.vars() != &vars) {
        return Err(IdealError::VarMismatch);
    }
    if gens.iter().all(|g| g.is_zero()) {
        return Err(IdealError::AllZero);
    }
    let n_in = gens.len();
    let mut basis: Vec<Elem> = Vec::new();
    // Seed with the inputs, each reduced by what is already present.
    let mut pairs: BTreeSet<(u32, Exponent, usize, usize)> = BTreeSet::new();
    let mut live: Vec<bool> = Vec::new();
    let insert = |basis: &mut Vec<Elem>, live: &mut Vec<bool>, pairs: &mut BTreeSet<(u32, Exponent, usize, usize)>, el: Elem| {
        let j = basis.len();
        for (i, g) in basis.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let l = g.exp.lcm(&el.exp);
            pairs.insert((l.degree(), l, i, j));
        }
        basis.push(el);
        live.push(true);
    };
    for (l, g) in gens.iter().enumerate() {
        let mut cof = zero_cofs(&vars, n_in);
        cof[l] = ParamPoly::one(&vars);
        let (r, cof) = reduce_full(g.clone(), cof, &basis, order, limits)?;
        if let Some((e, c)) = lead(&r, order) {
            let mut el = Elem { poly: r, exp: e, cof };
            make_monic(&mut el, &c);
            insert(&mut basis, &mut live, &mut pairs, el);
        }
    }
    let mut processed = 0usize;
    while let Some(key) = pairs.iter().next().cloned() {
        pairs.remove(&key);
        let (_, lcm, i, j) = key;
        processed += 1;
        if processed > limits.max_pairs {
            return Err(IdealError::ResourceLimit(format!("more than {} S-pairs", limits.max_pairs)));
        }
        // product criterion
        if basis[i].exp.coprime(&basis[j].exp) {
            continue;
        }
        // chain criterion
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].exp.divides(&lcm)
                && !has_pair(&pairs, i, k)
                && !has_pair(&pairs, j, k)
        });
        if chain {
            continue;
        }
        let si = lcm.checked_sub(&basis[i].exp).unwrap();
        let sj = lcm.checked_sub(&basis[j].exp).unwrap();
        let mut s = ParamPoly::zero(&vars);
        s.sub_scaled_shifted(&basis[i].poly, &si, &-Rational::one());
        s.sub_scaled_shifted(&basis[j].poly, &sj, &Rational::one());
        let mut cof = zero_cofs(&vars, n_in);
        cof_sub_scaled_shifted(&mut cof, &basis[i].cof, &si, &-Rational::one());
        cof_sub_scaled_shifted(&mut cof, &basis[j].cof, &sj, &Rational::one());
        let (r, cof) = reduce_full(s, cof, &basis, order, limits)?;
        if let Some((e, c)) = lead(&r, order) {
            if basis.len() >= limits.max_basis {
                return Err(IdealError::ResourceLimit(format!("basis exceeded {} elements", limits.max_basis)));
            }
            let mut el = Elem { poly: r, exp: e, cof };
            make_monic(&mut el, &c);
            insert(&mut basis, &mut live, &mut pairs, el);
        }
    }
    // interreduce: drop redundant leads, then tail-reduce
    let mut keep: Vec<Elem> = Vec::new();
    let mut idx: Vec<usize> = (0..basis.len()).collect();
    idx.sort_by(|&a, &b| order.cmp_unchecked(&basis[a].exp, &basis[b].exp).then(a.cmp(&b)));
    for &a in &idx {
        let redundant = idx.iter().any(|&b| {
            b != a
                && basis[b].exp.divides(&basis[a].exp)
                && (basis[b].exp != basis[a].exp || b < a)
        });
        if !redundant {
            keep.push(Elem { poly: basis[a].poly.clone(), exp: basis[a].exp.clone(), cof: basis[a].cof.clone() });
        }
    }
    let mut out: Vec<Elem> = Vec::with_capacity(keep.len());
    for k in 0..keep.len() {
        let others: Vec<Elem> = keep
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, e)| Elem { poly: e.poly.clone(), exp: e.exp.clone(), cof: e.cof.clone() })
            .collect();
        let el = &keep[k];
        // keep the lead, reduce the tail
        let mut tail = el.poly.clone();
        tail.add_term(el.exp.clone(), -Rational::one());
        let (r, cof) = reduce_full(tail, el.cof.clone(), &others, order, limits)?;
        let mut poly = r;
        poly.add_term(el.exp.clone(), Rational::one());
        out.push(Elem { poly, exp: el.exp.clone(), cof });
    }
    // the interreduced tails only use the other elements, so cofactors stay valid
    out.sort_by(|a, b| order.cmp_unchecked(&a.exp, &b.exp));
    Ok(GrobnerBasis {
        vars,
        gens: out.iter().map(|e| e.poly.clone()).collect(),
        exps: out.iter().map(|e| e.exp.clone()).collect(),
        cofactors: out.into_iter().map(|e| e.cof).collect(),
        inputs: gens.to_vec(),
        order: *order,
    })
}

fn has_pair(pairs: &BTreeSet<(u32, Exponent, usize, usize)>, a: usize, b: usize) -> bool {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    pairs.iter().any(|(_, _, i, j)| *i == a && *j == b)
}

impl GrobnerBasis {
    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn gens(&self) -> &[ParamPoly] {
        &self.gens
    }

    pub fn exps(&self) -> &[Exponent] {
        &self.exps
    }

    pub fn cofactors(&self) -> &[Vec<ParamPoly>] {
        &self.cofactors
    }

    pub fn inputs(&self) -> &[ParamPoly] {
        &self.inputs
    }

    pub fn order(&self) -> OrderSpec {
        self.order
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn partition(&self) -> Partition {
        Partition::new(&self.exps)
    }

    /// `C = max 1/|lead coeff|`.
    pub fn c_const(&self) -> Rational {
        self.gens
            .iter()
            .zip(&self.exps)
            .map(|(g, e)| g.coeff(e).abs().recip())
            .max()
            .unwrap_or_else(Rational::one)
    }

    /// `G = max norm(g_j)`.
    pub fn g_const(&self) -> Rational {
        self.gens.iter().map(|g| g.norm()).max().unwrap_or_else(Rational::zero)
    }

    /// Every S-polynomial reduces to zero.
    pub fn satisfies_s_criterion(&self) -> bool {
        for i in 0..self.gens.len() {
            for j in i + 1..self.gens.len() {
                let l = self.exps[i].lcm(&self.exps[j]);
                let si = l.checked_sub(&self.exps[i]).unwrap();
                let sj = l.checked_sub(&self.exps[j]).unwrap();
                let ci = self.gens[i].coeff(&self.exps[i]);
                let cj = self.gens[j].coeff(&self.exps[j]);
                let mut s = ParamPoly::zero(&self.vars);
                s.sub_scaled_shifted(&self.gens[i], &si, &-cj);
                s.sub_scaled_shifted(&self.gens[j], &sj, &ci);
                if !self.divide(&s, DivisionStrategy::LeadingTerm).remainder.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// `g_j = Σ_l Φ_jl f_l` for every `j`.
    pub fn cofactors_consistent(&self) -> bool {
        self.gens.iter().zip(&self.cofactors).all(|(g, row)| {
            let mut acc = ParamPoly::zero(&self.vars);
            for (phi, f) in row.iter().zip(&self.inputs) {
                acc = &acc + &(phi * f);
            }
            &acc == g
        })
    }

    /// Division along the partition of the privileged exponents.
    pub fn divide(&self, f: &ParamPoly, strategy: DivisionStrategy) -> DivisionResult {
        let order = self.order;
        let vars = &self.vars;
        let part = self.partition();
        let c_const = self.c_const();
        let g_const = self.g_const();
        let bound = Rational::one() + &c_const * &g_const;
        let lcs: Vec<Rational> = self.gens.iter().zip(&self.exps).map(|(g, e)| g.coeff(e)).collect();
        let mut quotients = vec![ParamPoly::zero(vars); self.gens.len()];
        let mut remainder = ParamPoly::zero(vars);
        let mut cur = f.clone();
        let mut steps = 0usize;
        let mut growth = Vec::new();
        let mut violations = Vec::new();
        while !cur.is_zero() {
            let before = cur.norm();
            let next = match strategy {
                DivisionStrategy::Batch => {
                    let mut next = ParamPoly::zero(vars);
                    for (e, c) in cur.terms() {
                        match part.classify(e) {
                            Cell::Delta(i) => {
                                let shift = e.checked_sub(&self.exps[i]).unwrap();
                                let q = c / &lcs[i];
                                quotients[i].add_term(shift.clone(), q.clone());
                                // x^β - (x^{β-α}/lc)·g: the lead cancels exactly
                                next.sub_scaled_shifted(&self.gens[i], &shift, &q);
                                next.add_term(e.clone(), c.clone());
                            }
                            Cell::Complement => remainder.add_term(e.clone(), c.clone()),
                        }
                    }
                    next
                }
                DivisionStrategy::LeadingTerm => {
                    let (e, c) = lead(&cur, &order).unwrap();
                    let mut next = cur.clone();
                    match part.classify(&e) {
                        Cell::Delta(i) => {
                            let shift = e.checked_sub(&self.exps[i]).unwrap();
                            let q = &c / &lcs[i];
                            quotients[i].add_term(shift.clone(), q.clone());
                            next.sub_scaled_shifted(&self.gens[i], &shift, &q);
                        }
                        Cell::Complement => {
                            next.add_term(e.clone(), -c.clone());
                            remainder.add_term(e, c);
                        }
                    }
                    next
                }
            };
            let after = next.norm();
            if after > &bound * &before {
                violations.push(steps);
            }
            growth.push(rat_to_f64(&after) / rat_to_f64(&before));
            steps += 1;
            cur = next;
        }
        DivisionResult {
            quotients,
            remainder,
            steps,
            per_step_norm_growth: growth,
            c: c_const,
            g: g_const,
            bound_violations: violations,
        }
    }

    /// Membership with a checked certificate.
    pub fn member(&self, f: &ParamPoly) -> Membership {
        let res = self.divide(f, DivisionStrategy::LeadingTerm);
        let member = res.remainder.is_zero();
        let mut input_cofactors = vec![ParamPoly::zero(&self.vars); self.inputs.len()];
        if member {
            for (q, row) in res.quotients.iter().zip(&self.cofactors) {
                if q.is_zero() {
                    continue;
                }
                for (acc, phi) in input_cofactors.iter_mut().zip(row) {
                    *acc = &*acc + &(q * phi);
                }
            }
            let mut check = ParamPoly::zero(&self.vars);
            for (h, f_l) in input_cofactors.iter().zip(&self.inputs) {
                check = &check + &(h * f_l);
            }
            assert!(&check == f, "membership certificate failed reconstruction");
        }
        Membership { member, quotients: res.quotients, input_cofactors, remainder: res.remainder }
    }
}

pub fn hironaka_divide(f: &ParamPoly, basis: &GrobnerBasis) -> DivisionResult {
    basis.divide(f, DivisionStrategy::Batch)
}

pub fn ideal_member(f: &ParamPoly, basis: &GrobnerBasis) -> Membership {
    basis.member(f)
}

/// Membership in `ideal(gens)` for a possibly empty or all-zero generator list.
pub fn member_of_span(f: &ParamPoly, gens: &[ParamPoly], order: &OrderSpec) -> Result<bool, IdealError> {
    if f.is_zero() {
        return Ok(true);
    }
    let nz: Vec<ParamPoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if nz.is_empty() {
        return Ok(false);
    }
    Ok(buchberger(&nz, order)?.member(f).member)
}

/// Empirical `C₁`: the smallest `C₁ ≥ 1` with
/// `max quotient norm ≤ C · C₁^{deg f} · norm(f)` over the given divisions.
pub fn fit_c1(samples: &[(DivisionResult, Rational, u32)]) -> f64 {
    let mut c1: f64 = 1.0;
    for (res, f_norm, deg) in samples {
        if f_norm.is_zero() || *deg == 0 {
            continue;
        }
        let ratio = rat_to_f64(&res.max_quotient_norm()) / (rat_to_f64(&res.c) * rat_to_f64(f_norm));
        if ratio > 1.0 {
            c1 = c1.max(ratio.powf(1.0 / *deg as f64));
        }
    }
    c1
}

/// Result of the Bautin index computation on a truncated sequence.
#[derive(Clone, Debug, Serialize)]
pub struct BautinIndex {
    /// Index of the last generator that is not in the ideal of its predecessors.
    pub k0: usize,
    /// Index of the first supplied coefficient.
    pub first: usize,
    /// Index of the last supplied coefficient.
    pub truncation: usize,
    /// Indices of the coefficients that enlarged the ideal.
    pub new_generators: Vec<usize>,
    pub identically_center: bool,
    pub caveat: String,
}

/// `coeffs[i]` is the coefficient of index `first + i`.
pub fn bautin_index(coeffs: &[ParamPoly], first: usize, order: &OrderSpec) -> Result<BautinIndex, IdealError> {
    let truncation = first + coeffs.len().saturating_sub(1);
    let mut gens: Vec<ParamPoly> = Vec::new();
    let mut basis: Option<GrobnerBasis> = None;
    let mut new_generators = Vec::new();
    for (i, l) in coeffs.iter().enumerate() {
        let inside = l.is_zero() || basis.as_ref().is_some_and(|b| b.member(l).member);
        if !inside {
            gens.push(l.clone());
            basis = Some(buchberger(&gens, order)?);
            new_generators.push(first + i);
        }
    }
    let identically_center = new_generators.is_empty();
    let k0 = new_generators.last().copied().unwrap_or(first);
    Ok(BautinIndex {
        k0,
        first,
        truncation,
        new_generators,
        identically_center,
        caveat: format!(
            "stabilization observed only for indices {first}..={truncation}; later coefficients were not computed"
        ),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiEquivalence {
    pub equivalent: bool,
    /// First index (0-based) where a difference left the ideal.
    pub first_failure: Option<usize>,
    /// The relation also held with the roles swapped.
    pub symmetric: bool,
}

fn phi_one_way(phi: &[ParamPoly], psi: &[ParamPoly], k: usize, order: &OrderSpec) -> Result<Option<usize>, IdealError> {
    let mut basis: Option<GrobnerBasis> = None;
    for i in 0..k {
        let diff = &phi[i] - &psi[i];
        let ok = diff.is_zero() || basis.as_ref().is_some_and(|b| b.member(&diff).member);
        if !ok {
            return Ok(Some(i));
        }
        let nz: Vec<ParamPoly> = phi[..=i].iter().filter(|p| !p.is_zero()).cloned().collect();
        if !nz.is_empty() && !phi[i].is_zero() {
            basis = Some(buchberger(&nz, order)?);
        }
    }
    Ok(None)
}

/// `Φ_k − Ψ_k ∈ ideal(Φ_1..Φ_{k−1})` for the first `k` entries.
pub fn phi_equivalent(phi: &[ParamPoly], psi: &[ParamPoly], k: usize, order: &OrderSpec) -> Result<PhiEquivalence, IdealError> {
    let k = k.min(phi.len()).min(psi.len());
    let first_failure = phi_one_way(phi, psi, k, order)?;
    let symmetric = if first_failure.is_none() { phi_one_way(psi, phi, k, order)?.is_none() } else { false };
    Ok(PhiEquivalence { equivalent: first_failure.is_none(), first_failure, symmetric })
}
