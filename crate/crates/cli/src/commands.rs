use std::fmt;
use std::path::Path;
use std::time::Instant;

use focal_core::bautin::{a0_certify, default_order, invariant_generators, run_recursion, FieldSpec, ReturnSeries};
use focal_core::bernstein::{displacement_certificate, ideal_data, lambda_bar, verify_chain};
use focal_core::idealkit::{bautin_index, buchberger, GrobnerBasis};
use focal_core::melnikov::successive_melnikov;
use focal_core::numlab::{
    count_displacement_zeros, default_c_grid, epsilon_scaling, IntegratorConfig, NumericField, PlanarField,
};
use focal_core::polycore::{fmt_rational, rat, rat_to_f64, OrderSpec, ParamPoly, Rational};
use serde_json::{json, Map, Value};

use crate::input::{FieldFile, InputError, PointFile};
use crate::report::{exact, float, to_value, Report};
use crate::Common;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) | CliError::Compute(s) => write!(f, "{s}"),
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn compute<E: fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// Relative precision stated for values where π was evaluated in floating point.
const PI_EVAL_TOL: f64 = 1e-15;

fn new_report(command: &str, common: &Common) -> Report {
    let mut r = Report::new(command);
    if common.timings {
        r.timings = Some(Map::new());
    }
    r
}

fn echo_field(file: &FieldFile) -> Value {
    let terms: Vec<Value> = file
        .coeffs
        .iter()
        .map(|((w, i, j), v)| json!({ "term": format!("{w} {i} {j}"), "coefficient": exact(fmt_rational(v)) }))
        .collect();
    json!({ "path": file.path, "degree": file.degree, "terms": terms })
}

fn resolve_order(order: Option<usize>, spec: &FieldSpec) -> Result<usize, CliError> {
    let k = order.unwrap_or_else(|| default_order(spec.degree()));
    if k < spec.degree() as usize {
        return Err(CliError::Input(format!("order {k} is below the degree {}", spec.degree())));
    }
    Ok(k)
}

fn timed<T>(report: &mut Report, step: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    report.time(step, t.elapsed().as_secs_f64());
    out
}

fn recursion(report: &mut Report, spec: &FieldSpec, k: usize) -> Result<ReturnSeries, CliError> {
    timed(report, "recursion", || run_recursion(spec, k)).map_err(compute)
}

pub fn lyapunov(field: &Path, order: Option<usize>, symbolic: bool, common: &Common) -> Result<Report, CliError> {
    let file = FieldFile::load(field)?;
    let spec = if symbolic { file.family_spec()? } else { file.numeric_spec()? };
    let k = resolve_order(order, &spec)?;
    let mut report = new_report("lyapunov", common);
    report.inputs.insert("field".into(), echo_field(&file));
    report.inputs.insert("order".into(), json!(k));
    report.inputs.insert("symbolic".into(), json!(symbolic));
    report.inputs.insert("parameters".into(), json!(spec.vars().names()));
    let series = recursion(&mut report, &spec, k)?;
    let numeric = spec.vars().is_empty();
    let coeffs: Vec<Value> = series
        .l
        .iter()
        .map(|(k, l)| {
            let mut row = json!({ "k": k, "L": exact(l) });
            if numeric {
                row["numeric"] = float(series.l_f64(*k, &[]), PI_EVAL_TOL);
            }
            row
        })
        .collect();
    report.results.insert("degree".into(), json!(spec.degree()));
    report.results.insert("coefficients".into(), Value::Array(coeffs));
    let a0 = timed(&mut report, "a0_certificate", || a0_certify(&series));
    for v in a0.r_cert.violations.iter().chain(&a0.l_cert.violations) {
        report.violations.push(v.clone());
    }
    report.certificates.insert("a0".into(), json!({ "report": to_value(&a0), "provenance": "float(1e-12)" }));
    Ok(report)
}

pub fn certify(field: &Path, lambda: &Path, order: Option<usize>, common: &Common) -> Result<Report, CliError> {
    let file = FieldFile::load(field)?;
    let spec = file.family_spec()?;
    let point_file = PointFile::load(lambda)?;
    let point = point_file.point_for(spec.vars())?;
    let k = resolve_order(order, &spec)?;
    let mut report = new_report("certify", common);
    report.inputs.insert("field".into(), echo_field(&file));
    report.inputs.insert("order".into(), json!(k));
    let lam: Map<String, Value> =
        spec.vars().names().iter().zip(&point).map(|(n, v)| (n.clone(), exact(fmt_rational(v)))).collect();
    report.inputs.insert("lambda".into(), Value::Object(lam));

    let series = recursion(&mut report, &spec, k)?;
    let inv = timed(&mut report, "invariants", || invariant_generators(&series)).map_err(compute)?;
    for c in inv.checks.iter().filter(|c| !c.holds) {
        report.violations.push(format!("k={}: {}", c.k, c.claim));
    }
    let zs: Vec<ParamPoly> = inv.z.values().cloned().collect();
    let first = *inv.z.keys().next().expect("order at least the degree");
    let index = timed(&mut report, "index", || bautin_index(&zs, first, &OrderSpec::GradedLex)).map_err(compute)?;
    if index.identically_center {
        return Err(CliError::Compute(format!(
            "all coefficients up to order {k} vanish identically; no certificate exists"
        )));
    }
    let data = timed(&mut report, "ideal_data", || ideal_data(&series, &inv, &index)).map_err(compute)?;
    let a0 = a0_certify(&series);
    for v in &a0.l_cert.violations {
        report.violations.push(v.clone());
    }
    let fpoint: Vec<f64> = point.iter().map(rat_to_f64).collect();
    let lb = lambda_bar(&fpoint);
    let c = &a0.l_cert;
    let cert = displacement_certificate([c.k1, c.k2, c.k3, c.k4], data.c_div, data.c1, data.m_bound(lb), lb, index.k0)
        .map_err(compute)?;
    if data.division_bound_violations > 0 {
        report.violations.push(format!("{} division steps exceeded 1 + CG", data.division_bound_violations));
    }
    let values = series.l.keys().map(|k| (*k, series.l_f64(*k, &fpoint))).collect();
    for bad in verify_chain(&cert, &values) {
        report.violations.push(format!("coefficient {bad} breaks |f_k|R^k <= c max_(i<=d) |f_i|R^i"));
    }
    let nf = NumericField::from_spec(&spec, &fpoint);
    let cfg = IntegratorConfig::default();
    let zc = timed(&mut report, "zero_count", || count_displacement_zeros(&nf, &cfg, cert.r_double_prime))
        .map_err(compute)?;
    if zc.count > cert.zero_bound {
        report.violations.push(format!("{} displacement zeros exceed the bound {}", zc.count, cert.zero_bound));
    }
    report.results.insert("lambda_bar".into(), float(lb, 0.0));
    report.results.insert(
        "bautin_index".into(),
        json!({ "k0": index.k0, "generators": index.new_generators, "truncation": index.truncation, "caveat": index.caveat }),
    );
    report.results.insert(
        "zero_count".into(),
        json!({
            "count": zc.count,
            "center_like": zc.center_like,
            "method": to_value(&zc.method),
            "resolution_radius": float(zc.resolution_radius, cfg.rel_tol),
            "zeros": zc.zeros.iter().map(|z| float(*z, 1e-9)).collect::<Vec<_>>(),
            "within_bound": zc.count <= cert.zero_bound,
        }),
    );
    let tol = 1e-12;
    report.certificates.insert(
        "displacement".into(),
        json!({
            "bautin_index": cert.d,
            "R": float(cert.r, tol),
            "R_formula": "((C1*lambda_bar)^K1*K4)^-1",
            "c": float(cert.c, tol),
            "R_double_prime": float(cert.r_double_prime, tol),
            "zero_bound": cert.zero_bound,
            "K1": float(cert.k1, tol),
            "K2": float(cert.k2, tol),
            "K3": float(cert.k3, tol),
            "K4": float(cert.k4, tol),
            "C": float(cert.c_div, tol),
            "C1": float(cert.c1, tol),
            "M": float(cert.m, tol),
        }),
    );
    Ok(report)
}

pub fn melnikov(field: &Path, kmax: usize, validate: bool, common: &Common) -> Result<Report, CliError> {
    let file = FieldFile::load(field)?;
    if kmax < 1 {
        return Err(CliError::Input("kmax must be at least 1".into()));
    }
    let x1 = file.vector_field();
    let mut report = new_report("melnikov", common);
    report.inputs.insert("field".into(), echo_field(&file));
    report.inputs.insert("kmax".into(), json!(kmax));
    report.inputs.insert("P".into(), exact(&x1.p));
    report.inputs.insert("Q".into(), exact(&x1.q));
    let res = timed(&mut report, "recursion", || successive_melnikov(&x1, kmax)).map_err(compute)?;
    report.results.insert("k_star".into(), json!(res.k_star));
    report.results.insert("M".into(), exact(&res.m));
    let orders: Vec<Value> = res.orders.iter().enumerate().map(|(i, o)| json!({ "k": i + 1, "L": exact(o) })).collect();
    report.results.insert("orders".into(), Value::Array(orders));
    let trail: Vec<Value> = res
        .trail
        .iter()
        .enumerate()
        .map(|(i, (g, r))| json!({ "k": i + 1, "g": exact(g), "R": exact(r) }))
        .collect();
    report.certificates.insert("decompositions".into(), Value::Array(trail));
    if validate {
        let planar = PlanarField::new(&x1.p, &x1.q, &[]);
        let cfg = IntegratorConfig { abs_tol: 1e-15, ..Default::default() };
        let eps = [4e-3, 2e-3, 1e-3, 5e-4];
        let k_star = res.k_star.unwrap_or(1);
        let m = |c: f64| res.m.eval_f64(&[], c);
        let rep = timed(&mut report, "validation", || {
            epsilon_scaling(&planar, k_star, &m, &eps, &default_c_grid(), &cfg)
        })
        .map_err(compute)?;
        let ok = match res.k_star {
            Some(_) => rep.ratios_within(0.35, 0.65),
            None => rep.rows.iter().all(|r| r.max_deviation < 1e-8),
        };
        if !ok {
            report.violations.push("ε-scaling does not match the computed derivative".into());
        }
        let rows: Vec<Value> = rep
            .rows
            .iter()
            .map(|r| {
                json!({
                    "eps": r.eps,
                    "max_deviation": float(r.max_deviation, cfg.rel_tol),
                    "samples": r.samples.iter().map(|(c, s, mc)| json!({
                        "c": c,
                        "scaled_displacement": float(*s, cfg.rel_tol),
                        "M": float(*mc, PI_EVAL_TOL),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        report.results.insert(
            "validation".into(),
            json!({ "scaled_by_eps_power": k_star, "rows": rows, "ratios": rep.ratios, "passes": ok }),
        );
    }
    Ok(report)
}

/// Generator sequence `(k, g_k)` with `first` the smallest index.
struct Generators {
    label: String,
    gens: Vec<(usize, ParamPoly)>,
}

fn chain_report(gens: &Generators) -> Result<(Vec<Value>, Option<GrobnerBasis>), CliError> {
    let mut rows = Vec::new();
    let mut inputs: Vec<ParamPoly> = Vec::new();
    let mut basis: Option<GrobnerBasis> = None;
    for (k, g) in &gens.gens {
        let mut row = json!({ "k": k, "generator": exact(g) });
        if g.is_zero() {
            row["member"] = json!(true);
        } else if let Some(m) = basis.as_ref().map(|b| b.member(g)).filter(|m| m.member) {
            row["member"] = json!(true);
            row["cofactors"] = Value::Array(m.input_cofactors.iter().map(exact).collect());
        } else {
            row["member"] = json!(false);
            inputs.push(g.clone());
            basis = Some(buchberger(&inputs, &OrderSpec::GradedLex).map_err(compute)?);
        }
        rows.push(row);
    }
    Ok((rows, basis))
}

pub fn ideal(field: &Path, order: Option<usize>, use_invariants: bool, index_only: bool, common: &Common) -> Result<Report, CliError> {
    let file = FieldFile::load(field)?;
    let spec = file.family_spec()?;
    let k = resolve_order(order, &spec)?;
    let command = if index_only { "index" } else { "ideal" };
    let mut report = new_report(command, common);
    report.inputs.insert("field".into(), echo_field(&file));
    report.inputs.insert("order".into(), json!(k));
    report.inputs.insert("use_invariants".into(), json!(use_invariants));
    report.inputs.insert("parameters".into(), json!(spec.vars().names()));
    let series = recursion(&mut report, &spec, k)?;
    let vars = spec.vars().clone();
    let sequences: Vec<Generators> = if use_invariants {
        let inv = timed(&mut report, "invariants", || invariant_generators(&series)).map_err(compute)?;
        for c in inv.checks.iter().filter(|c| !c.holds) {
            report.violations.push(format!("k={}: {}", c.k, c.claim));
        }
        vec![Generators { label: "z_k".into(), gens: inv.z.into_iter().collect() }]
    } else {
        // π enters every L_k; the chain is computed with π replaced by two
        // rational values and both runs must agree
        [rat(355, 113), rat(22, 7)]
            .iter()
            .map(|pi: &Rational| Generators {
                label: format!("L_k at pi = {}", fmt_rational(pi)),
                gens: series.l.iter().map(|(k, l)| (*k, l.eval_var_rational(vars.len(), pi, &vars))).collect(),
            })
            .collect()
    };
    let mut summaries = Vec::new();
    for (n, seq) in sequences.iter().enumerate() {
        let t = Instant::now();
        let (rows, basis) = chain_report(seq)?;
        report.time(&format!("chain_{n}"), t.elapsed().as_secs_f64());
        let nonzero: Vec<ParamPoly> = seq.gens.iter().map(|(_, g)| g.clone()).collect();
        let first = seq.gens.first().map_or(spec.degree() as usize, |(k, _)| *k);
        let idx = bautin_index(&nonzero, first, &OrderSpec::GradedLex).map_err(compute)?;
        summaries.push(idx.clone());
        if n > 0 {
            continue;
        }
        report.results.insert("generators".into(), json!(seq.label));
        report.results.insert("chain".into(), Value::Array(rows));
        report.results.insert(
            "bautin_index".into(),
            json!({
                "k0": idx.k0,
                "first": idx.first,
                "truncation": idx.truncation,
                "new_generators": idx.new_generators,
                "identically_center": idx.identically_center,
                "caveat": idx.caveat,
            }),
        );
        if !index_only {
            let b = basis.as_ref();
            report.results.insert(
                "basis".into(),
                Value::Array(b.map(|b| b.gens().iter().map(exact).collect()).unwrap_or_default()),
            );
            report.certificates.insert(
                "groebner".into(),
                json!({
                    "order": OrderSpec::GradedLex.name(),
                    "s_criterion": b.is_none_or(|b| b.satisfies_s_criterion()),
                    "cofactors_consistent": b.is_none_or(|b| b.cofactors_consistent()),
                    "size": b.map_or(0, |b| b.len()),
                }),
            );
        }
    }
    if summaries.len() > 1 {
        let ks: Vec<usize> = summaries.iter().map(|s| s.k0).collect();
        report.results.insert("pi_specializations".into(), json!(["355/113", "22/7"]));
        if ks.windows(2).any(|w| w[0] != w[1]) {
            report.violations.push(format!("index depends on the value substituted for pi: {ks:?}"));
        }
    }
    Ok(report)
}
