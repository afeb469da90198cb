mod common;

use std::f64::consts::PI;

use grl_core::geometry::{tangent_basis, ParamSurface, Vec3};
use grl_core::kelvin::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{ELLIPSOID_KELVIN_THRESHOLD, KELVIN_SAMPLE_SEED};

fn test_ellipsoid() -> ParamSurface {
    ParamSurface::ellipsoid(Vec3::new(0.0, 0.0, 1.5), Vec3::new(1.0, 1.0, 1.5))
        .unwrap()
        .normalized_to_area(4.0 * PI)
        .0
}

fn unit_sphere() -> ParamSurface {
    ParamSurface::sphere(Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap()
}

/// Gaussian curvature of the inverted surface at `Φ(q)` from central
/// differences of `Φ∘X` in the polar parametrisation, with `K(q)` itself
/// also taken from differences of `X`.
fn oracle_residual(s: &ParamSurface, q: &Vec3, d: f64) -> f64 {
    let c = s.center();
    let a = s.semiaxes();
    let u = (q - c).component_div(&a);
    let (t, p) = (u.z.clamp(-1.0, 1.0).acos(), u.y.atan2(u.x));
    let x = |t: f64, p: f64| s.position(t, p);
    let y = |t: f64, p: f64| {
        let v = x(t, p);
        v / v.norm_squared()
    };
    let gauss = |f: &dyn Fn(f64, f64) -> Vec3| {
        let f0 = f(t, p);
        let ft = (f(t + d, p) - f(t - d, p)) / (2.0 * d);
        let fp = (f(t, p + d) - f(t, p - d)) / (2.0 * d);
        let ftt = (f(t + d, p) - f0 * 2.0 + f(t - d, p)) / (d * d);
        let fpp = (f(t, p + d) - f0 * 2.0 + f(t, p - d)) / (d * d);
        let ftp = (f(t + d, p + d) - f(t + d, p - d) - f(t - d, p + d) + f(t - d, p - d)) / (4.0 * d * d);
        let n = ft.cross(&fp).normalize();
        let first = ft.dot(&ft) * fp.dot(&fp) - ft.dot(&fp).powi(2);
        (ftt.dot(&n) * fpp.dot(&n) - ftp.dot(&n).powi(2)) / first
    };
    let image = q / q.norm_squared();
    gauss(&y) - (gauss(&x) - 1.0) / image.norm_squared().powi(2)
}

fn samples(s: &ParamSurface) -> Vec<Vec3> {
    sample_surface(s, 500, &mut ChaCha8Rng::seed_from_u64(KELVIN_SAMPLE_SEED))
}

#[test]
fn point_examples() {
    assert_eq!(kelvin_point(&Vec3::new(0.0, 0.0, 2.0)).unwrap(), Vec3::new(0.0, 0.0, 0.5));
    let u = Vec3::new(1.0, 2.0, -2.0) / 3.0;
    assert!((kelvin_point(&u).unwrap() - u).norm() < 1e-15);
    assert!(matches!(kelvin_point(&Vec3::new(1e-13, 0.0, 0.0)), Err(KelvinError::Singular(_))));
}

#[test]
fn involution_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let y = Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let back = kelvin_point(&kelvin_point(&y).unwrap()).unwrap();
        assert!((back - y).norm() <= 1e-13 * y.norm());
    }
}

#[test]
fn conformal_factor_examples() {
    let y = Vec3::new(0.0, 0.0, 2.0);
    let j = kelvin_jacobian(&y);
    let (t1, t2) = tangent_basis(&Vec3::z());
    assert!(((j * t1).norm_squared() - 1.0 / 16.0).abs() < 1e-15);
    assert!((j * t1).dot(&(j * t2)).abs() < 1e-15);
    for gap in conformal_factor_check(&unit_sphere(), &[y]).unwrap() {
        assert!(gap <= 1e-12);
    }
    let e = test_ellipsoid();
    let pts = sample_surface(&e, 1000, &mut ChaCha8Rng::seed_from_u64(2));
    let pts: Vec<Vec3> = pts.into_iter().filter(|p| p.norm() >= CONFORMAL_MIN_RADIUS).collect();
    assert!(conformal_factor_check(&e, &pts).unwrap().iter().all(|g| *g <= 1e-12));
    assert!(conformal_factor_check(&e, &[Vec3::new(0.0, 0.0, 1e-4)]).is_err());
}

#[test]
fn sphere_image_is_a_plane() {
    let s = unit_sphere();
    for q in samples(&s) {
        if q.norm() >= ORIGIN_EXCLUSION {
            assert!((kelvin_point(&q).unwrap().z - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn sphere_residual_vanishes() {
    let s = unit_sphere();
    let pts = samples(&s);
    let fd = curvature_correspondence_residual(&s, &pts, CurvatureMethod::FiniteDifference, FD_STEP);
    assert!(fd.max_residual <= 1e-8, "{}", fd.max_residual);
    assert_eq!(fd.sample_count + fd.skipped, 500);
    let cf = curvature_correspondence_residual(&s, &pts, CurvatureMethod::ClosedForm, FD_STEP);
    assert!(cf.max_residual <= 1e-10, "{}", cf.max_residual);
}

#[test]
fn ellipsoid_threshold_oracle() {
    let e = test_ellipsoid();
    let pts: Vec<Vec3> = samples(&e).into_iter().filter(|q| q.norm() >= ORIGIN_EXCLUSION).collect();
    let worst = |d: f64| pts.iter().map(|q| oracle_residual(&e, q, d).abs()).fold(0.0, f64::max);
    let (a, b) = (worst(1e-4), worst(5e-5));
    assert!((a - b).abs() <= 0.01 * a.max(b), "{a} {b}");
    assert!(ELLIPSOID_KELVIN_THRESHOLD <= 0.99 * a.min(b), "{a} {b}");
}

#[test]
fn ellipsoid_residual_exceeds_threshold() {
    let e = test_ellipsoid();
    let pts = samples(&e);
    for method in [CurvatureMethod::FiniteDifference, CurvatureMethod::ClosedForm] {
        let r = curvature_correspondence_residual(&e, &pts, method, FD_STEP);
        assert!(r.max_residual > ELLIPSOID_KELVIN_THRESHOLD, "{method:?}: {}", r.max_residual);
    }
}

#[test]
fn origin_ball_is_skipped() {
    let s = unit_sphere();
    let r = curvature_correspondence_residual(&s, &[Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 2.0)], CurvatureMethod::ClosedForm, FD_STEP);
    assert_eq!((r.skipped, r.sample_count), (1, 1));
}

proptest! {
    #[test]
    fn involution_and_unit_sphere_fixed(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
        let v = Vec3::new(x, y, z);
        prop_assume!(v.norm() > 1e-3);
        let back = kelvin_point(&kelvin_point(&v).unwrap()).unwrap();
        prop_assert!((back - v).norm() <= 1e-13 * v.norm());
        let u = v.normalize();
        prop_assert!((kelvin_point(&u).unwrap() - u).norm() < 1e-15);
    }

    #[test]
    fn conformal_gap_on_any_ellipsoid(a in 0.5..2.0f64, b in 0.5..2.0f64, c in 0.5..2.0f64, seed in 0u64..100) {
        let e = ParamSurface::ellipsoid(Vec3::new(0.0, 0.0, c), Vec3::new(a, b, c)).unwrap();
        let pts: Vec<Vec3> = sample_surface(&e, 50, &mut ChaCha8Rng::seed_from_u64(seed))
            .into_iter()
            .filter(|p| p.norm() >= CONFORMAL_MIN_RADIUS)
            .collect();
        prop_assert!(conformal_factor_check(&e, &pts).unwrap().iter().all(|g| *g <= 1e-12));
    }
}
