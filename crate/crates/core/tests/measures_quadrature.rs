use sparse_bilinear::measures::*;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn every_family_is_a_probability_measure() {
    let all = [
        triangle_measure(2, 12).unwrap(),
        bilinear_sphere_measure(1, 40).unwrap(),
        bilinear_sphere_measure(2, 8).unwrap(),
        product_sphere_measure(2, 7).unwrap(),
    ];
    for mu in &all {
        assert!((mu.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(mu.weights.iter().all(|&w| w > 0.0));
    }
}

#[test]
fn triangle_nodes_form_unit_equilateral_triangles() {
    let mu = triangle_measure(2, 10).unwrap();
    assert_eq!(mu.len(), 20);
    for k in 0..mu.len() {
        let (y, z) = (mu.y(k), mu.z(k));
        let diff = [y[0] - z[0], y[1] - z[1]];
        assert!((norm(y) - 1.0).abs() < 1e-14);
        assert!((norm(z) - 1.0).abs() < 1e-14);
        assert!((norm(&diff) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn bilinear_sphere_nodes_lie_on_the_sphere() {
    for mu in [bilinear_sphere_measure(1, 17).unwrap(), bilinear_sphere_measure(2, 6).unwrap()] {
        for k in 0..mu.len() {
            let r2 = norm(mu.y(k)).powi(2) + norm(mu.z(k)).powi(2);
            assert!((r2 - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn second_moments_match_the_uniform_sphere() {
    // E[y_1^2] = 1/(2d) on the unit sphere of R^{2d}
    for (mu, d) in [(bilinear_sphere_measure(1, 16).unwrap(), 1.0), (bilinear_sphere_measure(2, 8).unwrap(), 2.0)] {
        let m = mu.integrate(|y, _| y[0] * y[0]);
        assert!((m - 1.0 / (2.0 * d)).abs() < 1e-10, "{m}");
        let odd = mu.integrate(|y, z| y[0] * z[0]);
        assert!(odd.abs() < 1e-12);
    }
    // fourth moment on S^3: E[y_1^4] = 3/(4*6) = 1/8
    let mu = bilinear_sphere_measure(2, 12).unwrap();
    let m4 = mu.integrate(|y, _| y[0].powi(4));
    assert!((m4 - 0.125).abs() < 1e-8, "{m4}");
}

#[test]
fn product_sphere_is_a_tensor_product() {
    let mu = product_sphere_measure(2, 5).unwrap();
    assert_eq!(mu.len(), 25);
    let m = mu.integrate(|y, z| y[0] * y[0] * z[1] * z[1]);
    assert!((m - 0.25).abs() < 1e-12);
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let (x, w) = gauss_legendre01(4);
    for k in 0..8 {
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
    }
}

#[test]
fn fourier_transform_at_zero_is_mass() {
    let mu = triangle_measure(2, 8).unwrap();
    let z = fourier_transform(&mu, &[0.0, 0.0], &[0.0, 0.0]);
    assert!((z.re - 1.0).abs() < 1e-14 && z.im.abs() < 1e-14);
    // circle: |transform| at large frequency decays
    let c = bilinear_sphere_measure(1, 256).unwrap();
    let hi = fourier_envelope(&c, &[1.0, 0.0], 20.0, 8);
    assert!(hi < 0.3, "{hi}");
}

#[test]
fn normalization_rescales_support() {
    let mu = bilinear_sphere_measure(1, 32).unwrap();
    let (nu, factor) = normalize_support(&mu).unwrap();
    assert!((nu.support_diam - 0.5).abs() < 1e-12);
    assert!(factor > 0.0);
}

#[test]
fn unsupported_dimensions() {
    assert!(matches!(triangle_measure(3, 8), Err(sparse_bilinear::Error::NotImplemented(_))));
    assert!(product_sphere_measure(1, 8).is_err());
    assert!(bilinear_sphere_measure(1, 2).is_err());
}

#[test]
fn json_round_trip() {
    let mu = bilinear_sphere_measure(2, 4).unwrap();
    assert_eq!(DiscreteMeasure::from_json(&mu.to_json().unwrap()).unwrap(), mu);
}
