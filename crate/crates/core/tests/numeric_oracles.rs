use focal_core::bautin::{l_at, run_recursion, FieldSpec};
use focal_core::numlab::{
    count_displacement_zeros, displacement, fit_displacement, FitGrid, IntegratorConfig, NumericField, ZeroMethod,
};
use focal_core::polycore::{int, rat, rat_to_f64, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    (0..6).map(|_| rat(rng.gen_range(-100..=100), 1000)).collect()
}

fn numeric(point: &[Rational]) -> (FieldSpec, NumericField) {
    let spec = FieldSpec::numeric(2, point[..3].to_vec(), point[3..].to_vec()).unwrap();
    let f: Vec<f64> = point.iter().map(rat_to_f64).collect();
    (spec, NumericField::new(2, f[..3].to_vec(), f[3..].to_vec()))
}

#[test]
fn fit_recovers_exact_focal_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cfg = IntegratorConfig::default();
    for _ in 0..4 {
        let (spec, field) = numeric(&random_point(&mut rng));
        let series = run_recursion(&spec, 5).unwrap();
        let fit = fit_displacement(&field, &cfg, &FitGrid::default()).unwrap();
        assert!(fit.warning.is_none());
        for k in [3, 5] {
            let exact = series.l_f64(k, &[]);
            assert!((fit.coeff(k) - exact).abs() <= 1e-5 * exact.abs(), "k={k}: {} vs {exact}", fit.coeff(k));
        }
        let dense = fit_displacement(&field, &cfg, &FitGrid { points: 128, ..FitGrid::default() }).unwrap();
        assert!((dense.coeff(3) - fit.coeff(3)).abs() < 1e-7);
    }
}

#[test]
fn direct_return_matches_truncated_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (spec, field) = numeric(&random_point(&mut rng));
    let series = run_recursion(&spec, 9).unwrap();
    let r0: f64 = 0.05;
    let sum: f64 = (2..=9).map(|k| series.l_f64(k, &[]) * r0.powi(k as i32)).sum();
    let tail = series.l_f64(9, &[]).abs() * r0.powi(9) * 10.0 + 1e-14;
    let d = displacement(&field, r0, &IntegratorConfig::default()).unwrap();
    assert!((d - sum).abs() <= tail, "{d} vs {sum}");
}

#[test]
fn constructed_small_limit_cycle_is_counted() {
    // at a20 = −2 the first focal value vanishes for this choice of the others
    let base = vec![int(-2), int(1), int(1), int(0), int(1), int(1)];
    let (spec, _) = numeric(&base);
    let series = run_recursion(&spec, 5).unwrap();
    assert!(l_at(&series, 3, &[]).is_zero());
    let l5 = series.l_f64(5, &[]);
    assert!(l5 != 0.0);
    // L_3 = 2π·δ/8 after a20 += δ; aim for a cycle near r = 0.02
    let target = -l5 * 0.02f64.powi(2);
    let delta = Rational::from_float(target * 8.0 / (2.0 * std::f64::consts::PI)).unwrap();
    let mut point = base.clone();
    point[0] += delta;
    let (spec, field) = numeric(&point);
    let l3 = run_recursion(&spec, 3).unwrap().l_f64(3, &[]);
    assert!(l3.signum() != l5.signum());
    let cfg = IntegratorConfig::default();
    let zc = count_displacement_zeros(&field, &cfg, 0.05).unwrap();
    assert_eq!(zc.count, 1, "{:?}", zc.zeros);
    assert!(!zc.center_like);
    assert!((zc.zeros[0] - 0.02).abs() < 0.005, "{:?}", zc.zeros);
    let inside = displacement(&field, 0.01, &cfg).unwrap();
    let outside = displacement(&field, 0.04, &cfg).unwrap();
    assert!(inside.signum() != outside.signum());
}

#[test]
fn tiny_interval_uses_taylor_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (_, field) = numeric(&random_point(&mut rng));
    let zc = count_displacement_zeros(&field, &IntegratorConfig::default(), 1e-20).unwrap();
    assert_eq!(zc.method, ZeroMethod::TaylorModel);
    assert_eq!(zc.count, 0);
}
