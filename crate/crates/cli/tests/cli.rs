use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_focal"))
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("focal-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str], files: &[&Path]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for f in files {
        cmd.arg(f);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const QUADRATIC: &str = "degree 2\na 2 0 1\na 1 1 1\nb 0 2 1\nb 1 1 2\n";

#[test]
fn lyapunov_reports_exact_and_numeric_values() {
    let s = Scratch::new("lyap");
    let f = s.file("q.txt", QUADRATIC);
    let out = run(&["lyapunov", "--order", "5", "--field"], &[&f]);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "lyapunov");
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["schema", "command", "inputs", "results", "certificates", "violations", "timings"]);
    let c = &v["results"]["coefficients"];
    assert_eq!(c[0]["L"]["value"], "0");
    assert_eq!(c[1]["L"]["value"], "-1/4*pi");
    assert_eq!(c[1]["L"]["provenance"], "exact");
    let num = c[1]["numeric"]["value"].as_f64().unwrap();
    assert!((num + std::f64::consts::PI / 4.0).abs() < 1e-15);
    assert!(v["timings"].is_null());
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let s = Scratch::new("det");
    let f = s.file("q.txt", QUADRATIC);
    let a = run(&["lyapunov", "--order", "6", "--field"], &[&f]);
    let b = run(&["lyapunov", "--order", "6", "--field"], &[&f]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again.as_bytes(), a.stdout.as_slice());

    let out_path = s.0.join("report.json");
    let o = bin()
        .args(["lyapunov", "--order", "6", "--field"])
        .arg(&f)
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&out_path).unwrap(), a.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let s = Scratch::new("threads");
    let f = s.file("fam.txt", "degree 2\na 2 0 1\nb 0 2 -1\n");
    let mut outs = Vec::new();
    for n in ["1", "3"] {
        let o = bin().env("FOCAL_THREADS", n).args(["ideal", "--order", "5", "--field"]).arg(&f).output().unwrap();
        assert!(o.status.success());
        outs.push(o.stdout);
    }
    assert_eq!(outs[0], outs[1]);
    let o = bin().env("FOCAL_THREADS", "many").args(["ideal", "--field"]).arg(&f).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn timings_are_opt_in() {
    let s = Scratch::new("timings");
    let f = s.file("q.txt", QUADRATIC);
    let v = json(&run(&["lyapunov", "--order", "4", "--timings", "--field"], &[&f]));
    assert!(v["timings"]["recursion"].is_number());
}

#[test]
fn text_format() {
    let s = Scratch::new("text");
    let f = s.file("q.txt", QUADRATIC);
    let out = run(&["lyapunov", "--order", "3", "--format", "text", "--field"], &[&f]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("results.coefficients[1].L = -1/4*pi  [exact]"), "{text}");
}

#[test]
fn input_errors_exit_with_one() {
    let s = Scratch::new("input");
    let bad = s.file("bad.txt", "degree 2\na 2 0 1\nq 1 1 3\n");
    let out = run(&["lyapunov", "--field"], &[&bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.txt:3"), "{err}");

    let f = s.file("fam.txt", "degree 2\n");
    let lam = s.file("lam.txt", "a20 1/2\nb11 one\n");
    let out = bin().args(["certify", "--order", "5", "--field"]).arg(&f).arg("--lambda").arg(&lam).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lam.txt:2"));

    let lam = s.file("lam2.txt", "a20 1/2\nc33 1\n");
    let out = bin().args(["certify", "--order", "5", "--field"]).arg(&f).arg("--lambda").arg(&lam).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lam2.txt:2"));

    let out = run(&["lyapunov", "--order", "1", "--field"], &[&f]);
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["lyapunov", "--field"]).arg(s.0.join("missing.txt")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn certificate_for_identically_zero_family_is_a_compute_error() {
    let s = Scratch::new("zero");
    let f = s.file("z.txt", "degree 2\na 2 0 0\na 1 1 0\na 0 2 0\nb 2 0 0\nb 1 1 0\nb 0 2 0\n");
    let lam = s.file("lam.txt", "");
    let out = bin().args(["certify", "--order", "5", "--field"]).arg(&f).arg("--lambda").arg(&lam).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn certify_quadratic_point() {
    let s = Scratch::new("certify");
    let f = s.file("fam.txt", "degree 2\n");
    let lam = s.file("lam.txt", "a20 1/10\na02 1/5\nb20 -1/10\nb11 1/10\nb02 3/10\n");
    let out = bin().args(["certify", "--order", "7", "--field"]).arg(&f).arg("--lambda").arg(&lam).output().unwrap();
    let v = json(&out);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    let cert = &v["certificates"]["displacement"];
    assert_eq!(cert["bautin_index"], 7);
    assert_eq!(cert["zero_bound"], 6);
    let rpp = cert["R_double_prime"]["value"].as_f64().unwrap();
    let r = cert["R"]["value"].as_f64().unwrap();
    assert!(rpp > 0.0 && rpp < r);
    assert_eq!(v["results"]["zero_count"]["within_bound"], true);
}

#[test]
fn melnikov_radial_and_hamiltonian() {
    let s = Scratch::new("mel");
    let radial = s.file("r.txt", "degree 1\na 1 0 1\nb 0 1 1\n");
    let v = json(&run(&["melnikov", "--validate", "--field"], &[&radial]));
    assert_eq!(v["results"]["k_star"], 1);
    assert_eq!(v["results"]["M"]["value"], "4*pi*c");
    assert_eq!(v["results"]["validation"]["passes"], true);

    let ham = s.file("h.txt", "degree 2\nb 2 0 1\n");
    let v = json(&run(&["melnikov", "--kmax", "3", "--field"], &[&ham]));
    assert!(v["results"]["k_star"].is_null());
    assert_eq!(v["results"]["M"]["value"], "0");

    let cubic = s.file("c.txt", "a 3 0 1\na 1 2 1\nb 2 1 1\nb 0 3 1\n");
    let v = json(&run(&["melnikov", "--field"], &[&cubic]));
    assert_eq!(v["results"]["k_star"], 1);
    assert_eq!(v["results"]["M"]["value"], "8*pi*c^2");
}

#[test]
fn index_agrees_with_and_without_invariants() {
    let s = Scratch::new("index");
    let f = s.file("fam.txt", "degree 2\n");
    let inv = json(&run(&["index", "--order", "7", "--use-invariants", "--field"], &[&f]));
    let raw = json(&run(&["index", "--order", "7", "--field"], &[&f]));
    for v in [&inv, &raw] {
        assert_eq!(v["results"]["bautin_index"]["k0"], 7);
        assert_eq!(v["results"]["bautin_index"]["new_generators"], serde_json::json!([3, 5, 7]));
        assert!(v["violations"].as_array().unwrap().is_empty());
    }
}

#[test]
fn ideal_basis_is_certified() {
    let s = Scratch::new("ideal");
    let f = s.file("fam.txt", "degree 2\n");
    let v = json(&run(&["ideal", "--order", "5", "--use-invariants", "--field"], &[&f]));
    let g = &v["certificates"]["groebner"];
    assert_eq!(g["s_criterion"], true);
    assert_eq!(g["cofactors_consistent"], true);
    let chain = v["results"]["chain"].as_array().unwrap();
    assert_eq!(chain.len(), 4);
    assert_eq!(chain[0]["member"], true);
    assert_eq!(chain[1]["member"], false);
}

#[test]
fn zero_and_hamiltonian_fields_have_vanishing_coefficients() {
    let s = Scratch::new("centers");
    // H = x^3/3 + x y^2: P = -2xy, Q = x^2 + y^2
    for (name, body) in [("zero.txt", "degree 2\n"), ("ham.txt", "degree 2\na 1 1 -2\nb 2 0 1\nb 0 2 1\n")] {
        let f = s.file(name, body);
        let v = json(&run(&["lyapunov", "--order", "7", "--field"], &[&f]));
        for c in v["results"]["coefficients"].as_array().unwrap() {
            assert_eq!(c["L"]["value"], "0", "{name}: {c}");
        }
    }
}

#[test]
fn certify_at_origin_echoes_radius_formula() {
    let s = Scratch::new("origin");
    let f = s.file("fam.txt", "degree 2\n");
    let lam = s.file("lam.txt", "# all parameters zero\n");
    let out = bin().args(["certify", "--order", "5", "--field"]).arg(&f).arg("--lambda").arg(&lam).output().unwrap();
    let v = json(&out);
    assert_eq!(v["results"]["lambda_bar"]["value"], 1.0);
    let cert = &v["certificates"]["displacement"];
    let val = |k: &str| cert[k]["value"].as_f64().unwrap();
    let expect = 1.0 / (val("C1").powf(val("K1")) * val("K4"));
    assert!((val("R") - expect).abs() <= 1e-12 * expect);
    assert_eq!(cert["R_formula"], "((C1*lambda_bar)^K1*K4)^-1");
}
