use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Args;
use grl_core::geometry::{
    angle_defects, gen_ellipsoid, gen_icosphere, read_off, rescale_to_area, unit_icosphere, write_off, ParamSurface, Vec3,
};
use grl_core::greensolve::{assemble, fit_log_constant, point_source, solve_green, sphere_log_constant};
use grl_core::kelvin::{
    conformal_factor_check, curvature_correspondence_residual, kelvin_point, sample_surface, CurvatureMethod, FD_STEP,
};
use grl_core::radial::{
    build_selfadjoint, eigenvalues, field_gap, latitude_ratio, moving_plane_report, newton_solve, ode_residual,
    pde_residual, reflect, series_start, shoot, uniqueness_probe, HemisphereGrid, OdeForm, Solution,
};
use grl_core::rigidity::{
    conformal_nd_check, mean_curvature_identity, mean_curvature_rhs, sample_hypersphere, surface2_residual,
    umbilic_probe, DEFAULT_UMBILIC_RADII,
};
use nalgebra::{DVector, Vector2};
use rand::Rng;
use serde_json::json;

use super::{max_abs, rng};
use crate::report::{Check, Report};

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Only the fast checks with exact answers
    #[arg(long)]
    pub quick: bool,
}

type Job = (&'static str, fn(u64) -> anyhow::Result<Check>);

const QUICK: &[Job] = &[
    ("icosahedronCounts", icosahedron_counts),
    ("level3Counts", level3_counts),
    ("offRoundTrip", off_round_trip),
    ("gaussBonnet", gauss_bonnet),
    ("rescaleFactor", rescale_factor),
    ("laplaceKernel", laplace_kernel),
    ("greenGauge", green_gauge),
    ("surface2Sphere", surface2_sphere),
    ("meanCurvatureSphere", mean_curvature_sphere),
    ("amgm", amgm),
    ("umbilicSphere", umbilic_sphere),
    ("conformalExamples", conformal_examples),
    ("odeResidualExamples", ode_residual_examples),
    ("exactShot", exact_shot),
    ("zeroGridResidual", zero_grid_residual),
    ("reflectionExamples", reflection_examples),
    ("latitudeRatio", latitude_ratio_examples),
    ("lemmaExamples", lemma_examples),
    ("kelvinPoints", kelvin_points),
    ("kelvinSphere", kelvin_sphere),
];

const FULL: &[Job] = &[
    ("greenConvergence", green_convergence),
    ("ellipsoidSurface2", ellipsoid_surface2),
    ("umbilicEllipsoids", umbilic_ellipsoids),
    ("odeUniqueness", ode_uniqueness),
    ("newtonRefinement", newton_refinement),
    ("movingPlane", moving_plane_sweep),
    ("lemmaSweep", lemma_sweep),
    ("kelvinFiniteDifference", kelvin_fd),
    ("higherDimension", higher_dimension),
];

pub fn run(a: &SuiteArgs, seed: u64, threads: usize) -> anyhow::Result<Report> {
    let jobs: Vec<&Job> = QUICK.iter().chain(if a.quick { [].iter() } else { FULL.iter() }).collect();
    let results: Mutex<Vec<Option<Check>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    let workers = threads.min(jobs.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some((name, f)) = jobs.get(k) else { break };
                let c = match f(seed) {
                    Ok(c) => Check { name: (*name).into(), ..c },
                    Err(e) => Check::new(name, false).detail(format!("error: {e:#}")),
                };
                results.lock().expect("no worker panics while holding the lock")[k] = Some(c);
            });
        }
    });
    let checks: Vec<Check> = results.into_inner()?.into_iter().map(|c| c.expect("every job ran")).collect();
    let mut report = Report::new("suite", json!({ "quick": a.quick, "count": checks.len() }));
    report.checks = checks;
    Ok(report)
}

fn sphere() -> ParamSurface {
    ParamSurface::sphere(Vec3::new(0.0, 0.0, 1.0), 1.0).expect("valid sphere")
}

fn icosahedron_counts(_: u64) -> anyhow::Result<Check> {
    let m = unit_icosphere(0)?;
    Ok(Check::new("", m.num_vertices() == 12 && m.num_faces() == 20))
}

fn level3_counts(_: u64) -> anyhow::Result<Check> {
    let m = gen_icosphere(3, Vec3::new(0.0, 0.0, 1.0), 1.0)?;
    Ok(Check::new("", m.num_vertices() == 642 && m.num_faces() == 1280 && m.basepoint().is_some()))
}

fn off_round_trip(_: u64) -> anyhow::Result<Check> {
    let m = gen_ellipsoid(2, Vec3::new(0.0, 0.0, 1.5), Vec3::new(1.0, 1.0, 1.5))?;
    let mut buf = Vec::new();
    write_off(&m, &mut buf)?;
    let back = read_off(buf.as_slice())?;
    Ok(Check::new("", back.vertices() == m.vertices() && back.faces() == m.faces()))
}

fn gauss_bonnet(_: u64) -> anyhow::Result<Check> {
    let m = gen_ellipsoid(3, Vec3::new(0.0, 0.0, 1.5), Vec3::new(1.0, 1.0, 1.5))?;
    let total: f64 = angle_defects(&m).iter().sum();
    Ok(Check::at_most("", (total - 2.0 * TAU).abs(), 1e-10))
}

fn rescale_factor(_: u64) -> anyhow::Result<Check> {
    let (_, s) = ParamSurface::sphere(Vec3::new(0.0, 0.0, 2.0), 2.0)?.normalized_to_area(4.0 * PI);
    let (m, _) = rescale_to_area(&gen_icosphere(3, Vec3::zeros(), 1.0)?, 4.0 * PI)?;
    let (_, again) = rescale_to_area(&m, 4.0 * PI)?;
    Ok(Check::at_most("", (s - 0.5).abs().max((again - 1.0).abs()), 1e-12))
}

fn laplace_kernel(_: u64) -> anyhow::Result<Check> {
    let op = assemble(&gen_icosphere(3, Vec3::new(0.0, 0.0, 1.0), 1.0)?);
    Ok(Check::at_most("", op.max_row_sum().max(op.stiffness.max_asymmetry()), 1e-12))
}

fn green_gauge(_: u64) -> anyhow::Result<Check> {
    let m = gen_icosphere(3, Vec3::new(0.0, 0.0, 1.0), 1.0)?;
    let op = assemble(&m);
    let p = m.basepoint().expect("sphere through the origin");
    let g = solve_green(&op, &m, p)?;
    // S G = e_p − m/Area, checked directly.
    let b = point_source(&op, p);
    let sg = op.stiffness.apply(&g.values);
    let identity = max_abs(sg.iter().zip(&b).map(|(x, y)| x - y));
    Ok(Check::at_most("", op.mean(&g.values).abs().max(identity), 1e-9))
}

fn surface2_sphere(_: u64) -> anyhow::Result<Check> {
    let r = surface2_residual(&sphere().sample_grid(32, 32));
    Ok(Check::at_most("", r.max_residual, 1e-12))
}

fn mean_curvature_sphere(_: u64) -> anyhow::Result<Check> {
    let rows = mean_curvature_identity(&sphere().sample_grid(32, 32), 1e-12);
    Ok(Check::at_most("", max_abs(rows.iter().map(|r| r.gap)), 1e-12))
}

fn amgm(seed: u64) -> anyhow::Result<Check> {
    let mut g = rng(seed);
    let min = (0..10_000).map(|_| mean_curvature_rhs(10f64.powf(g.gen_range(-3.0..3.0)))).fold(f64::INFINITY, f64::min);
    Ok(Check::above("", min, 2.0 - 1e-12))
}

fn umbilic_sphere(_: u64) -> anyhow::Result<Check> {
    let est = umbilic_probe(&sphere(), &DEFAULT_UMBILIC_RADII)?;
    Ok(Check::at_most("", max_abs(est.iter().map(|e| e.limit - 0.5)), 1e-6))
}

fn conformal_examples(_: u64) -> anyhow::Result<Check> {
    let a = conformal_nd_check(3, 1.0, &[DVector::from_vec(vec![0.0, 0.0, 0.0, 2.0])])?;
    let b = conformal_nd_check(4, 2.0, &[DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 4.0])])?;
    Ok(Check::at_most("", (a[0].rhs - 1.0).abs().max((b[0].rhs - 0.5).abs()), 1e-14))
}

fn ode_residual_examples(_: u64) -> anyhow::Result<Check> {
    let (t, ok_start) = (0.7f64, series_start(1e-3)? == (2.0 * 1e-3f64.sin(), 2.0 * 1e-3f64.cos()));
    let (r, form) = ode_residual(2.0 * t.sin(), 2.0 * t.cos(), -2.0 * t.sin(), t);
    let (rp, fp) = ode_residual(2.0, 0.0, -2.0, FRAC_PI_2);
    let ok = ok_start && form == OdeForm::Standard && fp == OdeForm::CosMultiplied && rp == 0.0;
    Ok(Check::at_most("", r.abs(), 1e-12).then(ok))
}

fn exact_shot(_: u64) -> anyhow::Result<Check> {
    let (u0, s0) = series_start(1e-3)?;
    let out = shoot(1e-3, u0, s0, 1e-4)?;
    let err = max_abs(out.profile.thetas.iter().zip(&out.profile.u).map(|(t, u)| u - 2.0 * t.sin()));
    Ok(Check::at_most("", err, 1e-6).then(out.abort.is_none()))
}

fn zero_grid_residual(_: u64) -> anyhow::Result<Check> {
    let r = pde_residual(&HemisphereGrid::from_fn(0.05, 32, 16, |_, _| 0.0)?);
    let gap = max_abs(r.values[16..].iter().map(|v| v - 0.5));
    Ok(Check::at_most("", gap, 1e-12))
}

fn reflection_examples(seed: u64) -> anyhow::Result<Check> {
    let mut worst = (reflect(&Vec3::z(), FRAC_PI_4)? - Vec3::x()).norm();
    let mut g = rng(seed);
    for _ in 0..1000 {
        let x = Vec3::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
        if x.norm() < 1e-3 {
            continue;
        }
        let x = x.normalize();
        let t = g.gen_range(0.01..1.5);
        worst = worst.max((reflect(&reflect(&x, t)?, t)? - x).norm());
    }
    Ok(Check::at_most("", worst, 1e-14))
}

fn latitude_ratio_examples(_: u64) -> anyhow::Result<Check> {
    let a = (latitude_ratio(FRAC_PI_8, FRAC_PI_4)? - (1.0 + 2f64.sqrt())).abs();
    let b = (latitude_ratio(0.6, 0.6)? - 1.0).abs();
    Ok(Check::at_most("", a.max(b), 1e-14))
}

fn lemma_examples(_: u64) -> anyhow::Result<Check> {
    let a = Vector2::new(0.3, -0.4);
    let same = field_gap(&a, &a, 1.0)?;
    let m = build_selfadjoint(&Vector2::new(1.0, 0.0), &Vector2::new(1.0, 0.0), 1.0)?;
    let (lo, hi) = eigenvalues(&m);
    let ok = same.lipschitz_ok && same.monotone_ok;
    Ok(Check::at_most("", (lo - 1.0).abs().max((hi - 3.0).abs()), 1e-12).then(ok))
}

fn kelvin_points(seed: u64) -> anyhow::Result<Check> {
    let mut worst = (kelvin_point(&Vec3::new(0.0, 0.0, 2.0))? - Vec3::new(0.0, 0.0, 0.5)).norm();
    let u = Vec3::new(0.6, 0.0, 0.8);
    worst = worst.max((kelvin_point(&u)? - u).norm());
    let mut g = rng(seed);
    for _ in 0..1000 {
        let y = Vec3::new(g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0));
        if y.norm() < 1e-2 {
            continue;
        }
        worst = worst.max((kelvin_point(&kelvin_point(&y)?)? - y).norm() / y.norm());
    }
    let c = conformal_factor_check(&sphere(), &[Vec3::new(0.0, 0.0, 2.0)])?;
    Ok(Check::at_most("", worst.max(c[0]), 1e-12))
}

fn kelvin_sphere(seed: u64) -> anyhow::Result<Check> {
    let s = sphere();
    let pts = sample_surface(&s, 100, &mut rng(seed));
    let r = curvature_correspondence_residual(&s, &pts, CurvatureMethod::ClosedForm, FD_STEP);
    Ok(Check::at_most("", r.max_residual, 1e-8))
}

fn green_convergence(_: u64) -> anyhow::Result<Check> {
    let mut errs = Vec::new();
    for level in 3..=5 {
        let (m, _) = rescale_to_area(&gen_icosphere(level, Vec3::new(0.0, 0.0, 1.0), 1.0)?, 4.0 * PI)?;
        let op = assemble(&m);
        let g = solve_green(&op, &m, m.basepoint().expect("through origin"))?;
        let fit = fit_log_constant(&g, &m, &op, 0.3)?;
        errs.push((fit.c - sphere_log_constant()).abs().max(fit.max_residual));
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    Ok(Check::at_most("", errs[2], 2e-2).then(decreasing).detail(format!("errors {errs:?}")))
}

fn ellipsoid_surface2(_: u64) -> anyhow::Result<Check> {
    let e = ParamSurface::ellipsoid(Vec3::new(0.0, 0.0, 1.5), Vec3::new(1.0, 1.0, 1.5))?.normalized_to_area(4.0 * PI).0;
    let r = surface2_residual(&e.sample_grid(64, 64));
    Ok(Check::above("", r.max_residual, 0.05))
}

fn umbilic_ellipsoids(_: u64) -> anyhow::Result<Check> {
    let mut worst = 0.0f64;
    for ax in [[1.0, 2.0, 2.0], [1.0, 1.0, 2.0], [2.0, 1.0, 1.5]] {
        let s = ParamSurface::ellipsoid(Vec3::new(0.0, 0.0, ax[2]), Vec3::from(ax))?;
        let est = umbilic_probe(&s, &DEFAULT_UMBILIC_RADII)?;
        worst = worst.max(max_abs(est.iter().map(|e| e.limit - e.expected)));
    }
    Ok(Check::at_most("", worst, 1e-4))
}

fn ode_uniqueness(_: u64) -> anyhow::Result<Check> {
    let exact = uniqueness_probe(0.0, 1e-3, 1e-4)?;
    let mut ok = exact.pole_defect <= 1e-6 && exact.pole_slope <= 1e-6;
    for beta in [0.2, -0.2] {
        let r = uniqueness_probe(beta, 1e-3, 1e-4)?;
        ok &= r.abort_angle.is_some() || r.pole_defect > 100.0 * exact.pole_defect;
    }
    Ok(Check::new("", ok).detail(format!("exact defect {:e}", exact.pole_defect)))
}

fn newton_refinement(_: u64) -> anyhow::Result<Check> {
    let err = |n: usize| -> anyhow::Result<f64> {
        let init = HemisphereGrid::perturbed(0.05, n, n, 0.2)?;
        let exact = HemisphereGrid::exact(0.05, n, n)?;
        Ok(newton_solve(&init, exact.row(0), 1e-10, 20)?.grid.max_diff(&exact))
    };
    let ratio = err(128)? / err(256)?;
    Ok(Check::within("", ratio, 3.5, 4.5))
}

fn moving_plane_sweep(_: u64) -> anyhow::Result<Check> {
    let (u0, s0) = series_start(1e-3)?;
    let p = shoot(1e-3, u0, s0, 1e-4)?.profile;
    let mut min_w = f64::INFINITY;
    for k in 1..=9 {
        min_w = min_w.min(moving_plane_report(Solution::Profile(&p), k as f64 * FRAC_PI_2 / 10.0, 0.0)?.min_w);
    }
    Ok(Check::above("", min_w, -1e-12))
}

fn lemma_sweep(seed: u64) -> anyhow::Result<Check> {
    let mut g = rng(seed);
    let mut fails = 0;
    for m in [1.0, 10.0] {
        for _ in 0..100_000 {
            let mut pick = || loop {
                let v = Vector2::new(g.gen_range(-m..m), g.gen_range(-m..m));
                if v.norm() <= m {
                    break v;
                }
            };
            let (a, b) = (pick(), pick());
            let r = field_gap(&a, &b, m)?;
            fails += usize::from(!(r.lipschitz_ok && r.monotone_ok));
        }
    }
    Ok(Check::new("", fails == 0).detail(format!("{fails} failures")))
}

fn kelvin_fd(seed: u64) -> anyhow::Result<Check> {
    let s = sphere();
    let pts = sample_surface(&s, 500, &mut rng(seed));
    let r = curvature_correspondence_residual(&s, &pts, CurvatureMethod::FiniteDifference, FD_STEP);
    Ok(Check::at_most("", r.max_residual, 1e-8))
}

fn higher_dimension(seed: u64) -> anyhow::Result<Check> {
    let mut worst = 0.0f64;
    let mut g = rng(seed);
    for n in 3..=6 {
        for r in [0.5, 1.0, 2.0] {
            let rows = conformal_nd_check(n, r, &sample_hypersphere(n, r, 200, &mut g))?;
            worst = worst.max(max_abs(rows.iter().map(|x| x.gap * r)));
        }
    }
    Ok(Check::at_most("", worst, 1e-12))
}
