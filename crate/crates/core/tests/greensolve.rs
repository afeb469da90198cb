use std::f64::consts::PI;

use grl_core::geometry::{gen_ellipsoid, gen_icosphere, rescale_to_area, TriMesh, Vec3};
use grl_core::greensolve::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type SymmetryMap = dyn Fn(&Vec3) -> Vec3;

fn area_normalized(mesh: TriMesh) -> TriMesh {
    rescale_to_area(&mesh, 4.0 * PI).unwrap().0
}

fn sphere(level: u32) -> TriMesh {
    area_normalized(gen_icosphere(level, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap())
}

fn fit(mesh: &TriMesh, exclusion: f64) -> LogFit {
    let op = assemble(mesh);
    let g = solve_green(&op, mesh, mesh.basepoint().unwrap()).unwrap();
    fit_log_constant(&g, mesh, &op, exclusion).unwrap()
}

/// Midpoint rule for `(1/2π)∫₀^{π/2} ln(2 sin t)·2 sin t cos t dt`, the
/// spherical mean of the chordal log over the unit sphere through the source.
fn quadrature_constant() -> f64 {
    let n = 200_000;
    let h = 0.5 * PI / n as f64;
    let s: f64 = (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            (2.0 * t.sin()).ln() * 2.0 * t.sin() * t.cos()
        })
        .sum();
    s * h / (2.0 * PI)
}

#[test]
fn log_constant_matches_quadrature() {
    assert!((sphere_log_constant() - quadrature_constant()).abs() < 1e-9);
    assert!((sphere_log_constant() - 0.0307).abs() < 1e-4);
}

#[test]
fn operator_kernel_and_symmetry() {
    let m = sphere(3);
    let op = assemble(&m);
    assert_eq!(op.stiffness.max_asymmetry(), 0.0);
    assert!(op.quadratic_form(&vec![1.0; op.dim()]).abs() < 1e-10);
    assert!((op.total_mass() - m.area()).abs() < 1e-10 * m.area());
}

#[test]
fn first_eigenvalue_level_four() {
    let m = gen_icosphere(4, Vec3::zeros(), 1.0).unwrap();
    let op = assemble(&m);
    let start: Vec<f64> = m.vertices().iter().map(|v| v.z + 0.3 * v.x * v.y).collect();
    let lambda = op.smallest_nonzero_eigenvalue(&start, 40).unwrap();
    assert!((lambda - 2.0).abs() < 0.2, "{lambda}");
}

#[test]
fn gauge_is_mass_mean_zero() {
    for m in [sphere(3), area_normalized(gen_ellipsoid(3, Vec3::new(0.0, 0.0, 1.5), Vec3::new(1.0, 1.0, 1.5)).unwrap())] {
        let op = assemble(&m);
        let g = solve_green(&op, &m, 17).unwrap();
        let scale = g.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(op.mean(&g.values).abs() <= 1e-9 * scale);
        assert!(g.relative_residual <= SOLVE_RTOL);
    }
}

#[test]
fn symmetric_about_the_pole() {
    // The basepoint is the south-pole vertex. Rotations by 2π/5 about the
    // polar axis and the mirror y → −y map the mesh to itself, so their orbits
    // consist of vertices equidistant from the source.
    let m = sphere(4);
    let op = assemble(&m);
    let p = m.basepoint().unwrap();
    let g = solve_green(&op, &m, p).unwrap();
    let v = m.vertices();
    let find = |q: Vec3| v.iter().position(|y| (y - q).norm() < 1e-9);
    let maps: [Box<SymmetryMap>; 2] = [
        Box::new(|y| {
            let (s, c) = (0.4 * PI).sin_cos();
            Vec3::new(c * y.x - s * y.y, s * y.x + c * y.y, y.z)
        }),
        Box::new(|y| Vec3::new(y.x, -y.y, y.z)),
    ];
    let mut pairs = 0;
    for (i, y) in v.iter().enumerate() {
        for map in &maps {
            let j = find(map(y)).expect("mesh is symmetric");
            assert!((y.norm() - v[j].norm()).abs() < 1e-12);
            assert!((g.values[i] - g.values[j]).abs() < 1e-8, "{i} {j}: {} {}", g.values[i], g.values[j]);
            pairs += usize::from(i != j);
        }
    }
    assert!(pairs > m.num_vertices());
}

#[test]
fn discrete_green_identity() {
    let m = sphere(3);
    let op = assemble(&m);
    let p = 5;
    let b = point_source(&op, p);
    let g = solve_green(&op, &m, p).unwrap();
    let sg = op.stiffness.apply(&g.values);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let mut f: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        op.project_mean_zero(&mut f);
        let pair: f64 = f.iter().zip(&b).map(|(a, c)| a * c).sum();
        assert!((pair - f[p]).abs() < 1e-12);
        let weak: f64 = f.iter().zip(&sg).map(|(a, c)| a * c).sum();
        assert!((weak - f[p]).abs() < 1e-8, "{weak} vs {}", f[p]);
    }
}

#[test]
fn sphere_fit_converges() {
    let fits: Vec<LogFit> = (3..=5).map(|l| fit(&sphere(l), 0.3)).collect();
    for w in fits.windows(2) {
        assert!(w[0].max_residual >= 2.0 * w[1].max_residual, "{:?}", fits);
    }
    let last = fits.last().unwrap();
    assert!((last.c - sphere_log_constant()).abs() < 2e-2);
    assert!((last.area - 4.0 * PI).abs() < 1e-10);
    assert!(last.excluded_count < last.vertex_count / 10);
}

#[test]
fn ellipsoid_separates_from_sphere() {
    let e = area_normalized(gen_ellipsoid(4, Vec3::new(0.0, 0.0, 1.5), Vec3::new(1.0, 1.0, 1.5)).unwrap());
    let (fe, fs) = (fit(&e, 0.3), fit(&sphere(4), 0.3));
    assert!(fe.max_residual >= 5.0 * fs.max_residual, "{} vs {}", fe.max_residual, fs.max_residual);
}

#[test]
fn exclusion_beyond_diameter_is_config_error() {
    let m = sphere(2);
    let op = assemble(&m);
    let g = solve_green(&op, &m, m.basepoint().unwrap()).unwrap();
    assert!(matches!(fit_log_constant(&g, &m, &op, 10.0), Err(GreenError::Config(_))));
    assert!(matches!(fit_log_constant(&g, &m, &op, 0.0), Err(GreenError::Config(_))));
}

#[test]
fn bad_vertex_is_config_error() {
    let m = sphere(1);
    let op = assemble(&m);
    assert!(matches!(solve_green(&op, &m, m.num_vertices()), Err(GreenError::Config(_))));
}

#[test]
fn solves_are_deterministic() {
    let m = sphere(3);
    let op = assemble(&m);
    let a = solve_green(&op, &m, 3).unwrap();
    let b = solve_green(&assemble(&m), &m, 3).unwrap();
    assert_eq!(a.values, b.values);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_shift_moves_only_c(shift in -5.0..5.0f64) {
        let m = sphere(2);
        let op = assemble(&m);
        let g = solve_green(&op, &m, m.basepoint().unwrap()).unwrap();
        let mut h = g.clone();
        h.values.iter_mut().for_each(|v| *v += shift);
        let (a, b) = (fit_log_constant(&g, &m, &op, 0.3).unwrap(), fit_log_constant(&h, &m, &op, 0.3).unwrap());
        prop_assert!((b.c - a.c - shift).abs() < 1e-12);
        prop_assert!((b.max_residual - a.max_residual).abs() < 1e-12);
        prop_assert!((b.rms_residual - a.rms_residual).abs() < 1e-12);
    }

    #[test]
    fn stiffness_rows_sum_to_zero(a in 0.5..2.0f64, b in 0.5..2.0f64, c in 0.5..2.0f64) {
        let m = gen_ellipsoid(2, Vec3::zeros(), Vec3::new(a, b, c)).unwrap();
        let op = assemble(&m);
        let scale = op.stiffness.diagonal().iter().fold(0.0f64, |s, d| s.max(d.abs()));
        prop_assert!(op.max_row_sum() <= 1e-12 * scale);
        prop_assert_eq!(op.stiffness.max_asymmetry(), 0.0);
    }
}
