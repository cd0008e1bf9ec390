mod common;

use aip_core::body::{affine_image, hausdorff_distance, polytope, ConvexBody, Ellipsoid};
use aip_core::constructions::{body_k, contact_system_k, FamilyParams};
use aip_core::ellipsoids::{
    john, john_position_transform, loewner, mvee_points, solve_contact_weights, verify_contact_system,
    ContactSystem, EllipsoidResult,
};
use aip_core::linalg::{Matrix, Vector};
use aip_core::sphere;
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn ball(e: &EllipsoidResult) -> ConvexBody {
    ConvexBody::Ellipsoid(e.ellipsoid.clone())
}

fn square() -> ConvexBody {
    ConvexBody::unit_ball(f64::INFINITY, 2)
}

fn shape_err(e: &EllipsoidResult, want: &Matrix) -> f64 {
    (e.ellipsoid.shape() - want).norm()
}

#[test]
fn mvee_examples() {
    let r = mvee_points(&sphere::axis_directions(2), 1e-10, 100_000).unwrap();
    assert!(r.ellipsoid.center().norm() < 1e-9);
    assert!(shape_err(&r, &Matrix::identity(2, 2)) < 1e-8);

    let tri = [v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])];
    let r = mvee_points(&tri, 1e-10, 100_000).unwrap();
    let o = mvee_2d_oracle(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    assert!((r.ellipsoid.volume() / o.area() - 1.0).abs() < 1e-6);

    let line = [v(&[0.0, 0.0]), v(&[1.0, 1.0]), v(&[2.0, 2.0])];
    assert!(mvee_points(&line, 1e-8, 10_000).is_err());
}

#[test]
fn mvee_matches_planar_subset_oracle() {
    let mut g = sphere::rng(404);
    for _ in 0..15 {
        let n = g.gen_range(4..=8);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)]).collect();
        let vs: Vec<Vector> = pts.iter().map(|p| v(p)).collect();
        let r = mvee_points(&vs, 1e-10, 200_000).unwrap();
        let o = mvee_2d_oracle(&pts);
        let ratio = r.ellipsoid.volume() / o.area();
        assert!((ratio - 1.0).abs() < 1e-6, "ratio {ratio} for {pts:?}");
    }
}

#[test]
fn loewner_examples() {
    let r = loewner(&square(), 500, 1e-9).unwrap();
    assert!(r.ellipsoid.center().norm() < 1e-6);
    assert!(shape_err(&r, &(Matrix::identity(2, 2) * 0.5)) < 1e-6);

    let k2 = loewner(&body_k(2).unwrap(), 2000, 1e-9).unwrap();
    assert!(k2.ellipsoid.center().norm() < 1e-2);
    assert!(shape_err(&k2, &Matrix::identity(3, 3)) < 2e-2);

    let verts = vec![v(&[0.0, 0.0]), v(&[3.0, 0.5]), v(&[1.0, 2.0])];
    let a = loewner(&ConvexBody::vpolytope(verts.clone()).unwrap(), 500, 1e-10).unwrap();
    let b = mvee_points(&verts, 1e-10, 100_000).unwrap();
    assert!((a.ellipsoid.center() - b.ellipsoid.center()).norm() < 1e-8);
    assert!((a.ellipsoid.shape() - b.ellipsoid.shape()).norm() < 1e-6);
}

#[test]
fn john_examples() {
    let r = john(&square(), 600, 1e-9).unwrap();
    assert!(r.ellipsoid.center().norm() < 1e-6);
    assert!(shape_err(&r, &Matrix::identity(2, 2)) < 1e-6);

    let e = Ellipsoid::new(v(&[0.5, -1.0]), Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0])).unwrap();
    let r = john(&ConvexBody::Ellipsoid(e.clone()), 600, 1e-9).unwrap();
    assert!((r.ellipsoid.center() - e.center()).norm() < 1e-8);
    assert!((r.ellipsoid.shape() - e.shape()).norm() < 1e-8);
}

#[test]
fn triangle_john_beats_inscribed_grid() {
    for seed in [1u64, 2, 3] {
        let mut g = sphere::rng(seed);
        let verts: Vec<Vector> = (0..3).map(|_| v(&[g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)])).collect();
        let Ok(tri) = polytope::Polytope::new(verts) else { continue };
        let (n, b) = half_planes(&tri);
        let (lo, hi) = ConvexBody::Polytope(tri.clone()).bounding_box();
        let grid = inscribed_area_grid(&n, &b, [lo[0], lo[1]], [hi[0], hi[1]], 24);
        let r = john(&ConvexBody::Polytope(tri.clone()), 600, 1e-9).unwrap();
        assert!(r.ellipsoid.volume() >= (1.0 - 1e-4) * grid, "{} < {grid}", r.ellipsoid.volume());
        // Steiner inellipse: area π/(3√3)·area(T).
        let exact = std::f64::consts::PI / (3.0 * 3f64.sqrt()) * tri.volume().unwrap();
        assert!((r.ellipsoid.volume() / exact - 1.0).abs() < 1e-6);
    }
}

#[test]
fn certificates_on_fresh_directions() {
    let bodies = vec![
        random_polygon(11),
        random_polytope3(5),
        ConvexBody::hull(vec![
            (-0.4, ConvexBody::unit_ball(2.0, 2)),
            (0.8, ConvexBody::ball(f64::INFINITY, 0.3, Vector::zeros(2)).unwrap()),
        ])
        .unwrap(),
    ];
    for body in &bodies {
        let d = body.dim();
        let l = loewner(body, 2000, 1e-9).unwrap();
        let j = john(body, 600, 1e-9).unwrap();
        let (le, je) = (ball(&l), ball(&j));
        let tol = 1e-6 * body.diameter_bound();
        for u in sphere::directions(d, 10_000, 0xfeed) {
            let h = body.support(&u).unwrap();
            assert!(h <= le.support(&u).unwrap() + tol);
            assert!(je.support(&u).unwrap() <= h + tol);
        }
    }
}

#[test]
fn contact_weights_recover_k4() {
    // The weights are not unique for this system; the pattern with one value
    // per orbit is. Averaging over each orbit projects onto it.
    let sys = contact_system_k(4).unwrap();
    let p = FamilyParams::new(4).unwrap();
    let (w, res) = solve_contact_weights(&sys.vectors()).unwrap();
    assert!(res < 1e-10);
    let t1 = w[..8].iter().sum::<f64>() / 8.0;
    let t2 = w[8..].iter().sum::<f64>() / 8.0;
    assert!((t1 - p.t1).abs() < 1e-8, "{t1} vs {}", p.t1);
    assert!((t2 - p.t2).abs() < 1e-8, "{t2} vs {}", p.t2);
    let pattern = ContactSystem::new(sys.vectors(), [vec![t1; 8], vec![t2; 8]].concat());
    assert!(verify_contact_system(&pattern, 1e-10).0);
}

#[test]
fn contact_weights_round_trip() {
    for body in [square(), random_polygon(3), random_polytope3(8)] {
        let r = john(&body, 600, 1e-10).unwrap();
        let Some(sys) = r.contact else { continue };
        let (w, res) = solve_contact_weights(&sys.vectors()).unwrap();
        assert!(res < 1e-8);
        let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        let sys2 = ContactSystem::new(
            keep.iter().map(|&i| sys.vectors()[i].clone()).collect(),
            keep.iter().map(|&i| w[i]).collect(),
        );
        assert!(verify_contact_system(&sys2, 1e-7).0);
    }
}

#[test]
fn john_position_examples() {
    let (t, _) = john_position_transform(&ConvexBody::unit_ball(2.0, 3)).unwrap();
    assert!((t.linear_part() - Matrix::identity(3, 3)).norm() < 1e-6);
    assert!(t.translation_part().norm() < 1e-6);

    let sq = ConvexBody::ball(f64::INFINITY, 3.0, v(&[1.0, 1.0])).unwrap();
    let (_, img) = john_position_transform(&sq).unwrap();
    let j = john(&img, 600, 1e-9).unwrap();
    assert!(j.ellipsoid.center().norm() < 1e-6);
    assert!(shape_err(&j, &Matrix::identity(2, 2)) < 1e-6);
    for u in sphere::directions(2, 2000, 4) {
        assert!(img.support(&u).unwrap() <= 2.0 + 1e-6);
    }

    let tri = ConvexBody::vpolytope(vec![v(&[0.1, 0.3]), v(&[2.0, -0.4]), v(&[0.7, 1.9])]).unwrap();
    let (_, img) = john_position_transform(&tri).unwrap();
    assert!(john(&img, 600, 1e-9).unwrap().ellipsoid.center().norm() < 1e-6);
}

#[test]
fn john_position_is_inside_d_ball() {
    for body in [random_polygon(21), random_polygon(22), random_polytope3(3), random_polytope3(4)] {
        let d = body.dim() as f64;
        let (_, img) = john_position_transform(&body).unwrap();
        for u in sphere::directions(body.dim(), 4000, 12) {
            assert!(img.support(&u).unwrap() <= d + 1e-3);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ellipsoids_are_equivariant(seed in 0u64..1000, tseed in 0u64..1000, three in any::<bool>()) {
        let body = if three { random_polytope3(seed) } else { random_polygon(seed) };
        let t = random_affine(body.dim(), 10.0, tseed);
        let img = affine_image(&t, &body).unwrap();
        let diam = img.diameter_bound();
        for f in [|b: &ConvexBody| loewner(b, 2000, 1e-9), |b: &ConvexBody| john(b, 600, 1e-9)] {
            let a = f(&img).unwrap();
            let b = affine_image(&t, &ball(&f(&body).unwrap())).unwrap();
            let dh = hausdorff_distance(&ball(&a), &b, 2000).unwrap().distance;
            prop_assert!(dh <= 1e-3 * diam, "{dh} vs diam {diam}");
        }
    }
}
