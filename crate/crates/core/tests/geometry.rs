use std::f64::consts::PI;

use grl_core::geometry::*;
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

fn through_origin(level: u32) -> TriMesh {
    gen_icosphere(level, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap()
}

#[test]
fn icosahedron_counts() {
    let m = gen_icosphere(0, Vec3::zeros(), 1.0).unwrap();
    assert_eq!((m.num_vertices(), m.num_faces()), (12, 20));
    assert_eq!(m.euler_characteristic(), 2);
}

#[test]
fn level_three_through_origin() {
    let m = through_origin(3);
    assert_eq!(m.num_vertices(), 642);
    let b = m.basepoint().expect("basepoint");
    assert_eq!(m.vertices()[b], Vec3::zeros());
}

#[test]
fn level_too_large() {
    assert!(matches!(gen_icosphere(9, Vec3::zeros(), 1.0), Err(GeometryError::LevelTooLarge { .. })));
}

#[test]
fn level_two_area_close_to_sphere() {
    // Oracle: sum of the inscribed flat triangles, computed independently
    // from the face list with the cross-product formula.
    let m = through_origin(2);
    let v = m.vertices();
    let area: f64 = m.faces().iter().map(|&[a, b, c]| 0.5 * (v[b] - v[a]).cross(&(v[c] - v[a])).norm()).sum();
    assert!((m.area() - area).abs() < 1e-12);
    let rel = (area - 4.0 * PI).abs() / (4.0 * PI);
    assert!(rel < 0.03, "{rel}");
}

#[test]
fn rescale_examples() {
    let unit = gen_icosphere(5, Vec3::zeros(), 1.0).unwrap();
    let (_, s) = rescale_to_area(&unit, 4.0 * PI).unwrap();
    assert!((s - 1.0).abs() < 2e-3, "{s}");

    let radius_two = gen_icosphere(5, Vec3::new(0.0, 0.0, 2.0), 2.0).unwrap();
    let (small, s) = rescale_to_area(&radius_two, 4.0 * PI).unwrap();
    assert!((s - 0.5).abs() < 1e-3, "{s}");
    assert!((small.area() - 4.0 * PI).abs() < 1e-10 * 4.0 * PI);
    assert_eq!(small.vertices()[small.basepoint().unwrap()], Vec3::zeros());
    let exact = ParamSurface::sphere(Vec3::new(0.0, 0.0, 2.0), 2.0).unwrap();
    let (_, s_exact) = exact.normalized_to_area(4.0 * PI);
    assert!((s_exact - 0.5).abs() < 1e-15);

    let (m, _) = rescale_to_area(&through_origin(3), 4.0 * PI).unwrap();
    let (again, s) = rescale_to_area(&m, 4.0 * PI).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    let moved = m.vertices().iter().zip(again.vertices()).fold(0.0f64, |a, (p, q)| a.max((p - q).norm()));
    assert!(moved < 1e-12);
    assert_eq!(again.basepoint(), m.basepoint());
}

#[test]
fn rescale_rejects_degenerate_target() {
    assert!(rescale_to_area(&through_origin(1), 0.0).is_err());
}

#[test]
fn curvature_on_unit_sphere_level_five() {
    let g = vertex_geometry(&gen_icosphere(5, Vec3::zeros(), 1.0).unwrap());
    let eh = g.iter().fold(0.0f64, |a, s| a.max((s.h - 2.0).abs()));
    let ek = g.iter().fold(0.0f64, |a, s| a.max((s.k - 1.0).abs()));
    assert!(eh <= 0.05 && ek <= 0.05, "H {eh}, K {ek}");
}

#[test]
fn curvature_scales_with_radius() {
    let g = vertex_geometry(&gen_icosphere(4, Vec3::new(0.3, 0.0, 0.0), 2.0).unwrap());
    for s in &g {
        assert!((s.h - 1.0).abs() <= 0.05, "{}", s.h);
        assert!((s.k - 0.25).abs() <= 0.05 * 0.25, "{}", s.k);
    }
}

#[test]
fn curvature_error_decreases_with_level() {
    let errors: Vec<(f64, f64)> = (3..=6)
        .map(|l| {
            let g = vertex_geometry(&gen_icosphere(l, Vec3::zeros(), 1.0).unwrap());
            (
                g.iter().fold(0.0f64, |a, s| a.max((s.h - 2.0).abs())),
                g.iter().fold(0.0f64, |a, s| a.max((s.k - 1.0).abs())),
            )
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1].1 < w[0].1, "{errors:?}");
        assert!(w[1].0 <= w[0].0.max(1e-10), "{errors:?}");
    }
}

#[test]
fn normals_point_outward_on_convex_meshes() {
    let c = Vec3::new(0.4, -1.0, 2.0);
    let m = gen_ellipsoid(3, c, Vec3::new(1.0, 2.0, 0.7)).unwrap();
    let centroid = m.vertices().iter().sum::<Vec3>() / m.num_vertices() as f64;
    for (n, y) in vertex_normals(&m).iter().zip(m.vertices()) {
        assert!(n.dot(&(y - centroid)) > 0.0);
    }
}

#[test]
fn star_shape_examples() {
    let r = star_shape_check(&through_origin(3)).unwrap();
    assert!(r.sign_consistent && r.min_support > 0.0);
    assert!(matches!(
        star_shape_check(&gen_icosphere(2, Vec3::zeros(), 1.0).unwrap()),
        Err(GeometryError::MissingBasepoint)
    ));
}

/// Two balls of radius 1 centred at `(0,0,1)` and `(0,0,2.6)`, blended by a
/// smooth maximum of their radial profiles. Seen from the origin at the
/// bottom of the lower ball, the neck hides part of the upper ball.
fn dumbbell() -> TriMesh {
    let profile = |z: f64| {
        let a = (1.0 - (z - 1.0).powi(2)).max(0.0).sqrt();
        let b = (1.0 - (z - 2.6).powi(2)).max(0.0).sqrt();
        (a.powi(8) + b.powi(8)).powf(1.0 / 8.0)
    };
    unit_icosphere(3)
        .unwrap()
        .map_vertices(|u| {
            let z = 1.8 + 1.8 * u.z;
            let r = u.x.hypot(u.y);
            let s = if r > 0.0 { profile(z) / r } else { 0.0 };
            Vec3::new(u.x * s, u.y * s, z)
        })
        .unwrap()
        .with_snapped_basepoint()
        .unwrap()
}

#[test]
fn dumbbell_is_not_star_shaped() {
    let m = dumbbell();
    // Independent evidence: some vertex has its outward normal pointing back
    // towards the origin, with normals from the face list directly.
    let v = m.vertices();
    let mut normals = vec![Vec3::zeros(); v.len()];
    for &[a, b, c] in m.faces() {
        let n = (v[b] - v[a]).cross(&(v[c] - v[a]));
        for i in [a, b, c] {
            normals[i] += n;
        }
    }
    let bp = m.basepoint().unwrap();
    let ring = m.one_ring(bp);
    let facing_origin = (0..v.len()).filter(|&i| !ring.contains(&i) && v[i].dot(&normals[i]) < 0.0).count();
    assert!(facing_origin > 0);
    let r = star_shape_check(&m).unwrap();
    assert!(!r.sign_consistent);
    assert!(r.min_support < 0.0 && r.max_support > 0.0);
}

#[test]
fn off_round_trip_is_bit_identical() {
    let m = through_origin(2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.off");
    save_off(&m, &path).unwrap();
    let back = load_off(&path).unwrap();
    assert_eq!(back.vertices(), m.vertices());
    assert_eq!(back.faces(), m.faces());
    assert_eq!(back.basepoint(), m.basepoint());
}

#[test]
fn off_rejects_edge_with_three_faces() {
    let text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
    let err = read_off(text.as_bytes()).unwrap_err();
    assert!(matches!(err, GeometryError::NonManifoldEdge { a: 0, b: 1, .. }), "{err}");
    assert!(err.to_string().contains("(0, 1)"));
}

#[test]
fn off_rejects_empty_face_list() {
    let text = "OFF\n3 0 0\n0 0 0\n1 0 0\n0 1 0\n";
    assert!(matches!(read_off(text.as_bytes()), Err(GeometryError::NoFaces)));
}

fn rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -PI..PI)
        .prop_filter("axis", |(x, y, z, _)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z, a)| Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(x, y, z)), a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vertex_geometry_is_rotation_invariant(rot in rotation()) {
        let m = through_origin(2);
        let r = m.map_vertices(|v| rot * v).unwrap();
        prop_assert_eq!(r.basepoint(), m.basepoint());
        for (a, b) in vertex_geometry(&m).iter().zip(&vertex_geometry(&r)) {
            prop_assert!((rot * a.normal - b.normal).norm() < 1e-12);
            prop_assert!((a.h - b.h).abs() < 1e-12);
            prop_assert!((a.k - b.k).abs() < 1e-12);
            match (a.support_quotient, b.support_quotient) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => prop_assert!(false, "exclusion changed"),
            }
        }
    }

    #[test]
    fn gauss_bonnet_on_perturbed_meshes(seed in 0u64..1000, amp in 0.0..0.3f64) {
        let m = unit_icosphere(2).unwrap().map_vertices(|u| {
            let bump = 1.0 + amp * ((seed as f64 + 3.0 * u.x).sin() * (2.0 * u.y + u.z).cos());
            u * bump
        }).unwrap();
        let total: f64 = angle_defects(&m).iter().sum();
        prop_assert!((total - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn rescale_hits_target(a in 0.3..3.0f64, b in 0.3..3.0f64, c in 0.3..3.0f64, target in 0.1..100.0f64) {
        let m = gen_ellipsoid(2, Vec3::new(0.1, 0.2, 0.3), Vec3::new(a, b, c)).unwrap();
        let (r, _) = rescale_to_area(&m, target).unwrap();
        prop_assert!((r.area() - target).abs() <= 1e-10 * target);
    }
}
