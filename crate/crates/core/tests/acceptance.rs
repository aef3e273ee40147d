//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use focal_core::bautin::{
    a0_certify, invariant_generators, rotate_params, rotate_poly, run_recursion, series_r, FieldSpec, InvariantSeries,
    ReturnSeries,
};
use focal_core::bernstein::{
    b1_constant, count_roots_in_disc, displacement_certificate, ideal_data, lambda_bar, verify_chain, zero_bound_b1,
    zero_radius_b2, zero_radius_b2_f64, ZeroBound,
};
use focal_core::idealkit::{bautin_index, buchberger, hironaka_divide, BautinIndex, Cell};
use focal_core::melnikov::{circle_integral, successive_melnikov, VectorField, XyPoly};
use focal_core::numlab::{
    count_displacement_zeros, default_c_grid, epsilon_scaling, fit_displacement, FitGrid, IntegratorConfig,
    NumericField, PlanarField,
};
use focal_core::polycore::{int, rat, rat_to_f64, Degree, Exponent, OrderSpec, ParamPoly, Rational, Vars};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Quadratic {
    series: ReturnSeries,
    inv: InvariantSeries,
    index: BautinIndex,
}

fn quadratic() -> &'static Quadratic {
    static CELL: OnceLock<Quadratic> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = FieldSpec::symbolic(2).unwrap();
        let series = run_recursion(&spec, 9).unwrap();
        let inv = invariant_generators(&series).unwrap();
        let index = z_index(&inv).unwrap();
        Quadratic { series, inv, index }
    })
}

fn z_index(inv: &InvariantSeries) -> Result<BautinIndex, String> {
    let zs: Vec<ParamPoly> = inv.z.values().cloned().collect();
    let first = *inv.z.keys().next().unwrap();
    bautin_index(&zs, first, &OrderSpec::GradedLex).map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rand_rat(rng: &mut ChaCha8Rng, bound: i64, den: i64) -> Rational {
    rat(rng.gen_range(-bound..=bound), den)
}

fn quad_point(rng: &mut ChaCha8Rng, bound: i64, den: i64) -> Vec<Rational> {
    (0..6).map(|_| rand_rat(rng, bound, den)).collect()
}

fn numeric_pair(point: &[Rational]) -> (FieldSpec, NumericField) {
    let spec = FieldSpec::numeric(2, point[..3].to_vec(), point[3..].to_vec()).unwrap();
    let f: Vec<f64> = point.iter().map(rat_to_f64).collect();
    (spec, NumericField::new(2, f[..3].to_vec(), f[3..].to_vec()))
}

fn low_orders_vanish() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 2..=4u32 {
        let spec = FieldSpec::symbolic(d).unwrap();
        let series = run_recursion(&spec, d as usize + 1).map_err(|e| e.to_string())?;
        for k in 2..d as usize {
            ensure(series.v_k(k).is_zero() && !series.l.contains_key(&k), format!("v_{k} nonzero for d={d}"))?;
            ensure(series.r.get(&k).is_none_or(|r| r.is_zero()), format!("R_{k} nonzero for d={d}"))?;
        }
        ensure(!series.v_k(d as usize).is_zero(), format!("v_{d} vanished for d={d}"))?;
        // the numerical return map agrees: no r₀^k terms below r₀^d
        let point: Vec<f64> = (0..spec.vars().len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let field = NumericField::from_spec(&spec, &point);
        let fit = fit_displacement(&field, &cfg, &FitGrid::default()).map_err(|e| e.to_string())?;
        let scale = fit.coeffs.iter().enumerate().map(|(k, c)| c.abs() * 0.25f64.powi(k as i32)).fold(0.0, f64::max);
        for k in 2..d as usize {
            ensure(fit.coeff(k).abs() * 0.25f64.powi(k as i32) < 1e-9 * scale, format!("fitted order {k} nonzero, d={d}"))?;
        }
    }
    Ok("d = 2, 3, 4".into())
}

fn rhs_bounds() -> Outcome {
    let mut checked = 0;
    for d in 2..=3u32 {
        let spec = FieldSpec::symbolic(d).unwrap();
        let base = int(2 * (d as i64 + 1));
        for (k, rk) in series_r(&spec, 12) {
            if let Degree::Finite(deg) = rk.param_degree() {
                ensure(deg as usize * (d as usize - 1) < k, format!("deg R_{k} = {deg}, d={d}"))?;
            }
            let norm = rk.harmonic_norm().ok_or("R_k depends on θ polynomially")?;
            // norm ≤ base^((k−1)/(d−1)) ⟺ norm^(d−1) ≤ base^(k−1)
            let lhs = num_traits::pow(norm.clone(), d as usize - 1);
            let rhs = num_traits::pow(base.clone(), k - 1);
            ensure(lhs <= rhs, format!("|R_{k}| = {} too large, d={d}", rat_to_f64(&norm)))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} coefficients, k ≤ 12"))
}

fn v_degree_bound() -> Outcome {
    let cubic = run_recursion(&FieldSpec::symbolic(3).unwrap(), 11).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for series in [&quadratic().series, &cubic] {
        let d = series.d as usize;
        for (k, vk) in &series.v {
            if let Degree::Finite(deg) = vk.param_degree() {
                ensure(deg as usize * (d - 1) <= *k, format!("deg v_{k} = {deg}, d={d}"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} coefficients (d=2 to k=9, d=3 to k=11)"))
}

fn symbolic_vs_numeric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // u = ln(r/r₀) is small here, so control its error relatively
    let cfg = IntegratorConfig { abs_tol: 1e-18, rel_tol: 1e-13, ..Default::default() };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (spec, field) = numeric_pair(&quad_point(&mut rng, 100, 1000));
        let series = run_recursion(&spec, 5).map_err(|e| e.to_string())?;
        let fit = fit_displacement(&field, &cfg, &FitGrid::default()).map_err(|e| e.to_string())?;
        for k in [3, 5] {
            let exact = series.l_f64(k, &[]);
            let rel = (fit.coeff(k) - exact).abs() / exact.abs();
            worst = worst.max(rel);
            ensure(rel <= 1e-5, format!("L_{k}: fitted {} vs exact {exact}", fit.coeff(k)))?;
        }
    }
    Ok(format!("20 points, worst relative error {worst:.2e}"))
}

fn invariance_and_phi_equivalence() -> Outcome {
    let q = quadratic();
    let spec = FieldSpec::symbolic(2).unwrap();
    for (c, s) in [(rat(3, 5), rat(4, 5)), (rat(5, 13), rat(12, 13))] {
        let rot = rotate_params(&spec, &c, &s).map_err(|e| e.to_string())?;
        for (k, z) in &q.inv.z {
            ensure(&rotate_poly(z, &rot) == z, format!("z_{k} not invariant under ({c}, {s})"))?;
        }
    }
    let failed: Vec<String> = q.inv.checks.iter().filter(|c| !c.holds).map(|c| format!("k={} {}", c.k, c.claim)).collect();
    ensure(failed.is_empty(), failed.join("; "))?;
    Ok(format!("z_2..z_9 invariant, {} membership certificates", q.inv.checks.len()))
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &Vars, deg: u16, max_terms: usize) -> ParamPoly {
    let mut p = ParamPoly::zero(vars);
    for _ in 0..rng.gen_range(1..=max_terms) {
        let mut e = vec![0u16; vars.len()];
        let total = rng.gen_range(0..=deg);
        for _ in 0..total {
            e[rng.gen_range(0..vars.len())] += 1;
        }
        let den = rng.gen_range(1..5);
        p.add_term(Exponent::from_slice(&e), rand_rat(rng, 9, den));
    }
    p
}

fn random_vars(rng: &mut ChaCha8Rng) -> Vars {
    let n = rng.gen_range(1..=4);
    let names: Vec<String> = (1..=n).map(|i| format!("l{i}")).collect();
    Vars::new(&names)
}

fn random_basis(rng: &mut ChaCha8Rng, vars: &Vars) -> focal_core::idealkit::GrobnerBasis {
    loop {
        let gens: Vec<ParamPoly> =
            (0..rng.gen_range(1..=3)).map(|_| random_poly(rng, vars, 3, 3)).collect();
        if gens.iter().all(|g| g.is_zero()) {
            continue;
        }
        if let Ok(b) = buchberger(&gens, &OrderSpec::GradedLex) {
            return b;
        }
    }
}

fn division_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut steps = 0;
    for n in 0..1000 {
        let vars = random_vars(&mut rng);
        let basis = random_basis(&mut rng, &vars);
        let f = random_poly(&mut rng, &vars, 6, 8);
        let res = hironaka_divide(&f, &basis);
        steps += res.steps;
        let mut rebuilt = res.remainder.clone();
        for (h, g) in res.quotients.iter().zip(basis.gens()) {
            rebuilt = &rebuilt + &(h * g);
        }
        ensure(rebuilt == f, format!("instance {n}: reconstruction"))?;
        let deg_f = f.degree();
        for h in res.quotients.iter().chain([&res.remainder]) {
            ensure(h.degree() <= deg_f, format!("instance {n}: degree contract"))?;
        }
        let part = basis.partition();
        for (i, h) in res.quotients.iter().enumerate() {
            for (e, _) in h.terms() {
                let shifted = e.add(&basis.exps()[i]);
                ensure(part.classify(&shifted) == Cell::Delta(i), format!("instance {n}: quotient {i} leaves Δ_{i}"))?;
            }
        }
        for (e, _) in res.remainder.terms() {
            ensure(part.classify(e) == Cell::Complement, format!("instance {n}: remainder leaves Δ̄"))?;
        }
        ensure(res.bound_violations.is_empty(), format!("instance {n}: norm growth above 1 + CG"))?;
    }
    Ok(format!("1000 instances, {steps} division steps"))
}

fn membership_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 0..100 {
        let vars = random_vars(&mut rng);
        let basis = random_basis(&mut rng, &vars);
        let mut f = ParamPoly::zero(&vars);
        for g in basis.inputs() {
            f = &f + &(&random_poly(&mut rng, &vars, 3, 3) * g);
        }
        let m = basis.member(&f);
        ensure(m.member && m.remainder.is_zero(), format!("member {n} rejected"))?;
    }
    let mut made = 0;
    while made < 100 {
        let vars = random_vars(&mut rng);
        let basis = random_basis(&mut rng, &vars);
        let part = basis.partition();
        let mut r = ParamPoly::zero(&vars);
        for (e, c) in random_poly(&mut rng, &vars, 5, 6).terms() {
            if part.classify(e) == Cell::Complement {
                r.add_term(e.clone(), c.clone());
            }
        }
        if r.is_zero() {
            continue;
        }
        let mut f = r.clone();
        for g in basis.gens() {
            f = &f + &(&random_poly(&mut rng, &vars, 2, 2) * g);
        }
        let m = basis.member(&f);
        ensure(!m.member && m.remainder == r, format!("non-member {made} not certified"))?;
        made += 1;
    }
    Ok("100 members, 100 non-members with remainder witnesses".into())
}

fn bernstein_bounds() -> Outcome {
    ensure(zero_bound_b1(4.0, 0.5) == ZeroBound::Finite(6), "K=4, α=1/2 spot value")?;
    ensure(zero_radius_b2(2, &int(1), &int(2)) == (rat(1, 128), 2), "N=2, c=2, R=1 spot value")?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_b2 = 0usize;
    for i in 0..200 {
        let n = rng.gen_range(2..=4usize);
        let r: f64 = rng.gen_range(0.5..2.0);
        let c: f64 = rng.gen_range(0.5..4.0);
        let mut a: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let head = a.iter().enumerate().map(|(i, x)| x.abs() * r.powi(i as i32)).fold(0.0, f64::max);
        for j in n + 1..=10 {
            a.push(rng.gen_range(-1.0..1.0) * c * head / r.powi(j as i32));
        }
        let (r2, bound) = zero_radius_b2_f64(n as u32, r, c);
        let roots = count_roots_in_disc(&a, r2);
        worst_b2 = worst_b2.max(roots);
        ensure(roots <= bound as usize, format!("B² sample {i}: {roots} roots > {bound}"))?;
    }
    for i in 0..200 {
        let a: Vec<f64> = (0..=10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha: f64 = rng.gen_range(0.3..0.8);
        let k = b1_constant(&a, 1.0, alpha);
        let ZeroBound::Finite(bound) = zero_bound_b1(k, alpha) else {
            return Err(format!("B¹ sample {i}: unbounded"));
        };
        let roots = count_roots_in_disc(&a, alpha);
        ensure(roots <= bound as usize, format!("B¹ sample {i}: {roots} roots > {bound}"))?;
    }
    Ok(format!("400 samples, spot values exact, max B² root count {worst_b2}"))
}

fn displacement_certificates() -> Outcome {
    let q = quadratic();
    let data = ideal_data(&q.series, &q.inv, &q.index).map_err(|e| e.to_string())?;
    let a0 = a0_certify(&q.series);
    ensure(a0.l_cert.is_valid(), a0.l_cert.violations.join("; "))?;
    let k = [a0.l_cert.k1, a0.l_cert.k2, a0.l_cert.k3, a0.l_cert.k4];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = IntegratorConfig::default();
    let mut summary = Vec::new();
    for i in 0..5 {
        let point = quad_point(&mut rng, 50, 100);
        let fpoint: Vec<f64> = point.iter().map(rat_to_f64).collect();
        let lb = lambda_bar(&fpoint);
        let cert = displacement_certificate(k, data.c_div, data.c1, data.m_bound(lb), lb, q.index.k0)
            .map_err(|e| e.to_string())?;
        ensure(cert.r_double_prime > 0.0, format!("point {i}: R″ not positive"))?;
        let values: BTreeMap<usize, f64> = q.series.l.keys().map(|k| (*k, q.series.l_f64(*k, &fpoint))).collect();
        let bad = verify_chain(&cert, &values);
        ensure(bad.is_empty(), format!("point {i}: chain fails at {bad:?}"))?;
        let (_, field) = numeric_pair(&point);
        let zc = count_displacement_zeros(&field, &cfg, cert.r_double_prime).map_err(|e| e.to_string())?;
        ensure(zc.count <= cert.zero_bound, format!("point {i}: {} zeros > {}", zc.count, cert.zero_bound))?;
        summary.push(format!("{}({:?})", zc.count, zc.method));
    }
    Ok(format!("R″ ≈ {:.3e}, bound {}, zeros {}", {
        let lb = 1.0;
        displacement_certificate(k, data.c_div, data.c1, data.m_bound(lb), lb, q.index.k0).unwrap().r_double_prime
    }, q.index.k0 - 1, summary.join(" ")))
}

fn index_stability() -> Outcome {
    let q = quadratic();
    let idx = &q.index;
    ensure(!idx.identically_center, "all coefficients vanished")?;
    let again = z_index(&q.inv)?;
    ensure(again.k0 == idx.k0 && again.new_generators == idx.new_generators, "re-run changed the index")?;
    let gens: Vec<ParamPoly> = idx.new_generators.iter().map(|j| q.inv.z[j].clone()).collect();
    let basis = buchberger(&gens, &OrderSpec::GradedLex).map_err(|e| e.to_string())?;
    let vars = &q.series.vars;
    let pi_idx = vars.len();
    for k in idx.k0 + 1..=q.series.k_max {
        for (p, part) in q.series.l[&k].split_by_var(pi_idx, vars) {
            ensure(basis.member(&part).member, format!("π^{p} part of L_{k} not a member"))?;
        }
    }
    // raw focal values with π replaced by two rational values
    for pi in [rat(22, 7), rat(355, 113)] {
        let raw: Vec<ParamPoly> =
            q.series.l.values().map(|l| l.eval_var_rational(pi_idx, &pi, vars)).collect();
        let first = *q.series.l.keys().next().unwrap();
        let raw_idx = bautin_index(&raw, first, &OrderSpec::GradedLex).map_err(|e| e.to_string())?;
        ensure(raw_idx.k0 == idx.k0, format!("raw index {} at π ↦ {pi} differs from {}", raw_idx.k0, idx.k0))?;
    }
    Ok(format!("k0 = {}, generators at {:?}, truncation {}", idx.k0, idx.new_generators, idx.truncation))
}

fn melnikov_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let vars = Vars::empty();
    for i in 0..5 {
        let mut h = XyPoly::zero(&vars);
        for _ in 0..5 {
            let a = rng.gen_range(0..=4u32);
            let b = rng.gen_range(0..=4 - a);
            h.add_term(a, b, &ParamPoly::constant(&vars, rand_rat(&mut rng, 5, 3)));
        }
        let res = successive_melnikov(&VectorField::hamiltonian(&h), 5).map_err(|e| e.to_string())?;
        ensure(res.k_star.is_none() && res.orders.iter().all(|o| o.is_zero()), format!("Hamiltonian sample {i}"))?;
    }
    let cube = |i, j| XyPoly::from_rational_terms([((i + 2, j), int(1)), ((i, j + 2), int(1))]);
    let radial = VectorField { p: cube(1, 0), q: cube(0, 1) };
    let res = successive_melnikov(&radial, 5).map_err(|e| e.to_string())?;
    ensure(res.k_star == Some(1) && res.m.to_string() == "8*pi*c^2", format!("radial M = {}", res.m))?;
    ensure(circle_integral(&focal_core::melnikov::interior_product(&radial)) == res.m, "radial period")?;
    let field = PlanarField::new(&radial.p, &radial.q, &[]);
    let cfg = IntegratorConfig { abs_tol: 1e-15, ..Default::default() };
    let m = |c: f64| res.m.eval_f64(&[], c);
    let rep = epsilon_scaling(&field, 1, &m, &[4e-3, 2e-3, 1e-3, 5e-4], &default_c_grid(), &cfg)
        .map_err(|e| e.to_string())?;
    let ratios: Vec<String> = rep.ratios.iter().map(|r| format!("{r:.4}")).collect();
    ensure(rep.ratios_within(0.35, 0.65), format!("ratios {}", ratios.join(", ")))?;
    Ok(format!("Hamiltonian ≡ 0 to k=5, radial M = 8πc², ratios {}", ratios.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("low orders vanish below d", low_orders_vanish),
        ("degree and norm bounds on R_k", rhs_bounds),
        ("degree bound on v_k", v_degree_bound),
        ("symbolic vs numeric focal values", symbolic_vs_numeric),
        ("rotation invariance and φ-equivalence", invariance_and_phi_equivalence),
        ("division contracts", division_contracts),
        ("membership soundness", membership_soundness),
        ("Bernstein zero bounds", bernstein_bounds),
        ("displacement certificates", displacement_certificates),
        ("Bautin index stability", index_stability),
        ("Melnikov suite", melnikov_suite),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
