use proptest::prelude::*;
use sparse_bilinear::dyadic::*;

fn cube() -> impl Strategy<Value = (usize, DyadicCube)> {
    (1usize..=3).prop_flat_map(|d| {
        let n = 3usize.pow(d as u32);
        (Just(d), 1..=n, -6i32..=6, prop::collection::vec(-50i64..50, d))
            .prop_map(|(d, id, g, c)| (d, DyadicCube::new(id, g, c)))
    })
}

proptest! {
    #[test]
    fn parent_of_child_is_self((d, q) in cube()) {
        let fam = shifted_lattices(d, 1.0).unwrap();
        for k in fam.children(&q) {
            prop_assert_eq!(fam.parent(&k), q.clone());
            prop_assert!(fam.contains(&q, &k));
        }
    }

    #[test]
    fn locate_finds_the_cube_holding_a_point((d, q) in cube(), u in prop::collection::vec(0.01f64..0.99, 3)) {
        let fam = shifted_lattices(d, 1.0).unwrap();
        let b = fam.cube_box(&q);
        let x: Vec<f64> = (0..d).map(|i| b.lo[i] + u[i] * (b.hi[i] - b.lo[i])).collect();
        prop_assert_eq!(fam.locate(q.lattice_id, q.generation, &x), q.clone());
        let up = fam.locate(q.lattice_id, q.generation + 2, &x);
        prop_assert_eq!(fam.ancestor(&q, q.generation + 2), Some(up));
    }

    #[test]
    fn tripled_cube_has_one_owner(d in 1usize..=3, g in -4i32..=4, k in prop::collection::vec(-40i64..40, 3)) {
        let fam = shifted_lattices(d, 1.0).unwrap();
        let k = &k[..d];
        let c = fam.assign_tripled(g, k);
        let s = fam.side(g);
        let b = fam.cube_box(&c);
        for i in 0..d {
            let want = s * (k[i] - 1) as f64 / 3.0;
            prop_assert!((b.lo[i] - want).abs() < 1e-9 * (1.0 + want.abs()));
            prop_assert!((b.hi[i] - b.lo[i] - s).abs() < 1e-12 * s.max(1.0));
        }
        let m: Vec<i64> = k.iter().map(|v| v - 1).collect();
        prop_assert_eq!(fam.lattices_with_corner(g, &m), vec![c.lattice_id]);
    }
}

#[test]
fn lattice_ids_follow_base_three_digits() {
    let fam = shifted_lattices(2, 1.0).unwrap();
    assert_eq!(fam.lattice_count(), 9);
    assert_eq!(fam.digits(1, 0), vec![0, 0]);
    assert_eq!(fam.digits(2, 0), vec![1, 0]);
    assert_eq!(fam.digits(4, 0), vec![0, 1]);
    // digits 1 and 2 swap on odd generations
    assert_eq!(fam.digits(2, 1), vec![2, 0]);
    assert_eq!(fam.digits(3, -1), vec![1, 0]);
}

#[test]
fn shifted_boxes_at_two_generations() {
    let fam = shifted_lattices(1, 1.0).unwrap();
    // generation 0, digit 1: [1/3, 4/3); its parent has digit 2 at side 2: [4/3, 10/3) or [-2/3, 4/3)
    let q = DyadicCube::new(2, 0, vec![0]);
    let b = fam.cube_box(&q);
    assert!((b.lo[0] - 1.0 / 3.0).abs() < 1e-15);
    let p = fam.parent(&q);
    let pb = fam.cube_box(&p);
    assert!((pb.lo[0] + 2.0 / 3.0).abs() < 1e-15 && (pb.hi[0] - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn enlarged_cover_in_one_dimension() {
    let fam = shifted_lattices(1, 1.0).unwrap();
    let q = DyadicCube::new(1, 0, vec![0]);
    let kids = fam.children(&q);
    assert_eq!(fam.enlarged_cover(&q, 1).unwrap(), vec![kids[0].clone()]);
    assert_eq!(fam.enlarged_cover(&q, 2).unwrap(), kids);
    assert_eq!(fam.enlarged_cover(&q, 3).unwrap(), vec![kids[1].clone()]);
    assert!(fam.enlarged_cover(&q, 0).is_err());
    assert!(fam.enlarged_cover(&q, 4).is_err());
}

#[test]
fn enlarged_cover_in_two_dimensions() {
    let fam = shifted_lattices(2, 1.0).unwrap();
    let q = DyadicCube::new(1, 0, vec![0, 0]);
    // the center third meets all four children, a corner third only one
    assert_eq!(fam.enlarged_cover(&q, 5).unwrap().len(), 4);
    assert_eq!(fam.enlarged_cover(&q, 1).unwrap().len(), 1);
    assert_eq!(fam.enlarged_cover(&q, 2).unwrap().len(), 2);
    let mid = fam.middle_third(&q);
    assert!((mid.lo[0] - 1.0 / 3.0).abs() < 1e-15 && (mid.hi[1] - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn subcube_enumeration_order() {
    let fam = shifted_lattices(2, 1.0).unwrap();
    let q = DyadicCube::new(5, 1, vec![3, -2]);
    let subs = fam.subcube_enumeration(&q);
    assert_eq!(subs.len(), 9);
    assert_eq!(subs[0].corner, vec![2, -3]);
    assert_eq!(subs[4], q);
    assert_eq!(subs[8].corner, vec![4, -1]);
}

#[test]
fn ordering_puts_coarse_first() {
    let a = DyadicCube::new(1, 2, vec![0]);
    let b = DyadicCube::new(1, 0, vec![0]);
    assert!(a < b);
}
