use proptest::prelude::*;
use sparse_bilinear::dyadic::DyadicCube;
use sparse_bilinear::grid::*;

fn indicator(spec: &GridSpec, lo: f64, hi: f64) -> GridFunction {
    GridFunction::from_fn(spec, |x| if x.iter().all(|&v| v >= lo && v < hi) { 1.0 } else { 0.0 }).unwrap()
}

#[test]
fn indicator_norms_are_measure_powers() {
    let spec = GridSpec::unit(2, 64).unwrap();
    let f = indicator(&spec, 0.25, 0.75);
    for p in [1.0, 2.0, 3.5] {
        assert!((f.lp_norm(p) - 0.25f64.powf(1.0 / p)).abs() < 1e-12);
    }
    assert_eq!(f.lp_norm(f64::INFINITY), 1.0);
    assert!((f.integral() - 0.25).abs() < 1e-12);
}

#[test]
fn lorentz_norm_of_an_indicator() {
    // normalized measure a: the norm is a^{1/r}
    let spec = GridSpec::unit(1, 256).unwrap();
    let f = indicator(&spec, 0.0, 0.125);
    let root = spec.root_cube();
    for r in [1.0, 2.0, 4.0] {
        assert!((lorentz_norm(&f, &root, r).unwrap() - 0.125f64.powf(1.0 / r)).abs() < 1e-12);
    }
    let g = f.scaled(3.0);
    assert!((lorentz_norm(&g, &root, 2.0).unwrap() - 3.0 * 0.125f64.sqrt()).abs() < 1e-12);
}

#[test]
fn level_sets_of_dyadic_values() {
    let spec = GridSpec::unit(1, 8).unwrap();
    let f = GridFunction::new(&spec, vec![1.0, 2.0, 3.0, 4.0, 0.0, 0.5, 8.0, 1.5]).unwrap();
    let ls = level_sets(&f).unwrap();
    // 2^m ≤ |f| < 2^{m+1}
    let count = |m: i32| ls.mask(m).map_or(0, |k| k.iter().filter(|&&b| b).count());
    assert_eq!(count(0), 2);
    assert_eq!(count(1), 2);
    assert_eq!(count(2), 1);
    assert_eq!(count(3), 1);
    assert_eq!(count(-1), 1);
}

#[test]
fn pyramid_matches_brute_force_averages() {
    let spec = GridSpec::unit(2, 32).unwrap();
    let kind = TestFunctionKind::SmoothBumpMixture { count: 3, min_width: 0.05, max_width: 0.3 };
    let f = random_test_function(5, &kind, &spec).unwrap();
    for t in [1.0, 2.5] {
        let pyr = PowerPyramid::new(&f, t).unwrap();
        for (g, c) in [(0, vec![0, 0]), (-1, vec![1, 0]), (-3, vec![2, 5]), (-5, vec![31, 0])] {
            let q = DyadicCube::new(1, g, c);
            let cells = spec.cube_cells(&q).unwrap().indices(&spec);
            let brute = (cells.iter().map(|&i| f.values[i].abs().powf(t)).sum::<f64>() / cells.len() as f64).powf(1.0 / t);
            assert!((pyr.average(&q) - brute).abs() < 1e-12 * brute.max(1.0));
            assert!((lp_average(&f, &q, t).unwrap() - brute).abs() < 1e-12 * brute.max(1.0));
        }
    }
}

#[test]
fn random_indicators_do_not_depend_on_resolution() {
    let kind = TestFunctionKind::IndicatorUnionOfCubes { count: 4, min_level: 1, max_level: 5 };
    let a = random_test_function(11, &kind, &GridSpec::unit(1, 64).unwrap()).unwrap();
    let b = random_test_function(11, &kind, &GridSpec::unit(1, 128).unwrap()).unwrap();
    for i in 0..64 {
        assert_eq!(a.values[i], b.values[2 * i]);
        assert_eq!(a.values[i], b.values[2 * i + 1]);
    }
}

#[test]
fn grid_translation_is_exact_on_cell_multiples() {
    let spec = GridSpec::unit(1, 64).unwrap();
    let f = GridFunction::from_fn(&spec, |x| x[0] * x[0]).unwrap();
    let h = spec.h();
    let d = translate_diff(&f, &[3.0 * h]).unwrap();
    for i in 3..64 {
        assert!((d.values[i] - (f.values[i] - f.values[i - 3])).abs() < 1e-15);
    }
    for i in 0..3 {
        assert_eq!(d.values[i], f.values[i]);
    }
}

#[test]
fn json_round_trip() {
    let spec = GridSpec::centered(2, 1.5, 8).unwrap();
    let f = GridFunction::from_fn(&spec, |x| x[0].sin() + x[1]).unwrap();
    assert_eq!(GridFunction::from_json(&f.to_json().unwrap()).unwrap(), f);
}

#[test]
fn mismatched_values_are_rejected() {
    let spec = GridSpec::unit(2, 4).unwrap();
    assert!(GridFunction::new(&spec, vec![0.0; 15]).is_err());
    assert!(GridSpec::unit(1, 12).is_err());
    assert!(GridSpec::unit(0, 8).is_err());
}

proptest! {
    #[test]
    fn interpolation_reproduces_cell_values(seed in 0u64..500, i in 0usize..32) {
        let spec = GridSpec::unit(1, 32).unwrap();
        let kind = TestFunctionKind::SmoothBumpMixture { count: 2, min_width: 0.05, max_width: 0.2 };
        let f = random_test_function(seed, &kind, &spec).unwrap();
        let c = spec.center(i);
        prop_assert!((f.eval(&c) - f.values[i]).abs() < 1e-12);
    }

    #[test]
    fn holder_for_the_inner_product(seed in 0u64..500) {
        let spec = GridSpec::unit(1, 64).unwrap();
        let kind = TestFunctionKind::SmoothBumpMixture { count: 3, min_width: 0.02, max_width: 0.2 };
        let f = random_test_function(seed, &kind, &spec).unwrap();
        let g = random_test_function(seed + 1000, &kind, &spec).unwrap();
        prop_assert!(f.inner(&g).abs() <= f.lp_norm(3.0) * g.lp_norm(1.5) * (1.0 + 1e-12));
    }
}
