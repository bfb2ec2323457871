use proptest::prelude::*;
use sparse_bilinear::exponents::*;

fn point() -> impl Strategy<Value = ExponentTriple> {
    (0i64..=12, 0i64..=12, 0i64..=12, 1i64..=12)
        .prop_map(|(a, b, c, d)| ExponentTriple::from_ratios((a.min(d), d), (b.min(d), d), (c.min(d), d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn vertices_to_facets_and_back(pts in prop::collection::vec(point(), 4..9)) {
        let p = ExponentPolytope::from_vertices("random", &pts).unwrap();
        for v in &p.vertices {
            prop_assert!(pts.contains(v));
        }
        for x in &pts {
            prop_assert!(p.contains(x, MembershipMode::Closed));
        }
        prop_assert!(p.cross_check());
        let again = ExponentPolytope::from_vertices("again", &p.vertices).unwrap();
        prop_assert_eq!(&again.vertices, &p.vertices);
        prop_assert_eq!(&again.halfspaces, &p.halfspaces);
        let back = ExponentPolytope::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.vertices, p.vertices.clone());
    }

    #[test]
    fn centroid_is_inside(pts in prop::collection::vec(point(), 4..9)) {
        let p = ExponentPolytope::from_vertices("random", &pts).unwrap();
        prop_assert!(p.contains(&p.centroid().unwrap(), MembershipMode::Closed));
    }
}

#[test]
fn unit_cube_facets() {
    let mut pts = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                pts.push(ExponentTriple::from_ratios((a, 1), (b, 1), (c, 1)));
            }
        }
    }
    let p = ExponentPolytope::from_vertices("cube", &pts).unwrap();
    assert_eq!(p.vertices.len(), 8);
    assert_eq!(p.halfspaces.len(), 6);
    let mid = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 2));
    assert!(p.contains(&mid, MembershipMode::Interior));
    assert!(!p.contains(&pts[0], MembershipMode::Interior));
}

#[test]
fn parsing_rejects_garbage() {
    assert!(ExponentTriple::parse("1/2,1/2").is_err());
    assert!(ExponentTriple::parse("1/0,1/2,1/2").is_err());
    assert!(ExponentTriple::parse("a,b,c").is_err());
    assert_eq!(ExponentTriple::parse("1/2, 2/4 ,1").unwrap(), ExponentTriple::from_ratios((1, 2), (1, 2), (1, 1)));
}

#[test]
fn scaling_exponent_is_exact() {
    let x = ExponentTriple::from_ratios((1, 3), (1, 3), (1, 2));
    assert_eq!(scaling_exponent(&x, 2), rat(-1, 3));
}

#[test]
fn decay_thresholds_are_rational() {
    let t = decay_thresholds(3).unwrap();
    assert_eq!(t.first, rat(12, 5));
    assert!(t.first_below_four);
    assert_eq!(split_decay_exponent(&rat(2, 1), &rat(2, 1)), rat(1, 3));
}

#[test]
fn admissibility_bundle() {
    let good = admissibility(&ExponentTriple::from_ratios((1, 2), (1, 2), (1, 3)));
    assert!(good.bundle());
    // r = 2 ≥ p = q = 1, so this point is admissible
    assert!(admissibility(&ExponentTriple::from_ratios((1, 1), (1, 1), (1, 2))).bundle());
    let bad = admissibility(&ExponentTriple::from_ratios((1, 1), (1, 1), (2, 1)));
    assert!(!bad.r_ge_p && !bad.r_gt_1 && !bad.bundle());
}
