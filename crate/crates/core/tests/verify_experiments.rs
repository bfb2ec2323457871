use sparse_bilinear::exponents::ExponentTriple;
use sparse_bilinear::grid::*;
use sparse_bilinear::measures::*;
use sparse_bilinear::operators::OperatorConfig;
use sparse_bilinear::sparse::CubeFamily;
use sparse_bilinear::verify::*;

fn gauss(spec: &GridSpec, s: f64) -> GridFunction {
    GridFunction::from_fn(spec, |x| (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * s * s)).exp()).unwrap()
}

#[test]
fn scaling_slope_on_the_circle() {
    let spec = GridSpec::centered(1, 32.0, 2048).unwrap();
    let mu = bilinear_sphere_measure(1, 32).unwrap();
    let x = ExponentTriple::from_ratios((1, 2), (1, 3), (1, 2));
    let rep = scaling_law_experiment(&mu, &gauss(&spec, 1.0), &gauss(&spec, 0.8), &x, &[0.5, 1.0, 2.0, 4.0]).unwrap();
    assert!((rep.predicted + 1.0 / 3.0).abs() < 1e-15);
    assert!(rep.error() < 0.1, "{rep:?}");
}

#[test]
fn continuity_decays_in_both_slots() {
    let spec = GridSpec::centered(1, 2.0, 1024).unwrap();
    let k = TestFunctionKind::IndicatorUnionOfCubes { count: 3, min_level: 3, max_level: 5 };
    let f = random_test_function(1, &k, &spec).unwrap();
    let g = random_test_function(2, &k, &spec).unwrap();
    let cfg = OperatorConfig::new(bilinear_sphere_measure(1, 24).unwrap(), 1.0).unwrap();
    let x = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 1));
    let ys: Vec<f64> = (3..=7).map(|k| 2f64.powi(-k)).collect();
    for slot in [Slot::First, Slot::Second, Slot::Both] {
        let fit = continuity_experiment(OperatorKind::SingleScale, &cfg, &f, &g, &x, &ys, slot).unwrap();
        assert!(fit.fitted_eta > 0.0 && fit.triangle_bound_ok, "{fit:?}");
    }
    assert!(continuity_experiment(OperatorKind::SingleScale, &cfg, &f, &g, &x, &[0.1, 0.2], Slot::First).is_err());
}

#[test]
fn sparse_trials_are_reproducible_and_resolution_stable() {
    let cfg = SparseRatioConfig::d1(1, 42);
    let (a, sa) = sparse_trial(&cfg, 0).unwrap();
    let (b, sb) = sparse_trial(&cfg, 0).unwrap();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    let (_, fine) = sparse_trial(&cfg.refined(), 0).unwrap();
    assert_eq!(fine.cubes, sa.cubes);
}

#[test]
fn hypothesis_is_enforced_before_running() {
    let mut cfg = SparseRatioConfig::d1(2, 1);
    cfg.x = ("1/2".into(), "1/2".into(), "3/4".into());
    assert!(sparse_ratio_experiment(&cfg).is_err());
}

#[test]
fn lemma_bounds_and_preconditions() {
    let spec = GridSpec::unit(1, 128).unwrap();
    let root = spec.root_cube();
    let f = GridFunction::from_fn(&spec, |x| 1.0 / (x[0] + 0.01).sqrt()).unwrap();
    assert!(embedding_ratio(&f, &root, 2.0, 1.0).unwrap() <= embedding_bound(2.0, 1.0));
    assert!(embedding_ratio(&f, &root, 1.0, 2.0).is_err());
    assert!(level_set_ratio(&f, &root, 1.5).unwrap() <= 2.0);
    assert_eq!(sparse_average_bound(0.5, 1.0, 2.0), 4.0);
    let fam = CubeFamily::full(&spec, &root).unwrap();
    let one = GridFunction::constant(&spec, 1.0);
    let s = sparse_bilinear::sparse::build_sparse_family(
        &one,
        &one,
        &one,
        &root,
        &sparse_bilinear::sparse::choose_c0(1.0, 1.0, 1.0).unwrap(),
        &fam,
    )
    .unwrap();
    assert!((sparse_average_ratio(&s, &f, 1.0, 2.0).unwrap() - f.lp_norm(1.0) / f.lp_norm(2.0)).abs() < 1e-12);
    assert!(sparse_average_ratio(&s, &f, 2.0, 2.0).is_err());
}

#[test]
fn muckenhoupt_is_scale_invariant_in_each_weight() {
    let spec = GridSpec::unit(1, 64).unwrap();
    let w1 = GridFunction::from_fn(&spec, |x| (x[0] - 0.5).abs().powf(0.3)).unwrap();
    let w2 = GridFunction::from_fn(&spec, |x| 1.0 + x[0]).unwrap();
    let fam = CubeFamily::full(&spec, &spec.root_cube()).unwrap();
    let base = WeightVector::new(w1.clone(), w2.clone(), 8.0, 8.0, [2.0, 2.0, 1.2]).unwrap();
    let k = muckenhoupt_constant(&base, &fam).unwrap();
    assert!(k >= 1.0 - 1e-12);
    for i in 0..2 {
        assert!(base.homogeneity_exponent(i).abs() < 1e-12);
    }
    let scaled = WeightVector::new(w1.scaled(7.0), w2.scaled(0.1), 8.0, 8.0, [2.0, 2.0, 1.2]).unwrap();
    assert!((muckenhoupt_constant(&scaled, &fam).unwrap() - k).abs() < 1e-9 * k);
    assert!(WeightVector::new(w1.clone(), w2.clone(), 8.0, 8.0, [2.0, 2.0, 2.0]).is_err());
    assert!(WeightVector::new(w1.scaled(-1.0), w2, 8.0, 8.0, [2.0, 2.0, 1.2]).is_err());
}

#[test]
fn suite_reports_serialize() {
    let rep = multiplier_suite(2).unwrap();
    assert!(rep.pass, "{:?}", rep.failures());
    let csv = rep.to_csv();
    assert_eq!(csv.lines().count(), rep.checks.len() + 1);
    let back: SuiteReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
    assert_eq!(back, rep);
    assert!(run_suite("bogus", 1, None).is_err());
}
