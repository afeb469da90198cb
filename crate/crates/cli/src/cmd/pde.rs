use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::path::PathBuf;

use anyhow::bail;
use clap::{Args, Subcommand, ValueEnum};
use grl_core::radial::{
    asymptotics_check, build_selfadjoint, eigenvalues, field, field_gap, latitude_ratio, moving_plane_report,
    newton_solve, pde_residual, point_at, reflect, selfadjoint_bounds, series_start, shoot, HemisphereGrid,
    RadialError, RadialProfile, Solution,
};
use nalgebra::Vector2;
use rand::Rng;
use serde_json::json;

use super::rng;
use crate::args::{GridArgs, GridKind};
use crate::report::{Check, Report};

/// Second-order convergence: error ratio under grid halving.
pub const RATIO_RANGE: (f64, f64) = (3.5, 4.5);
pub const ORDER_RANGE: (f64, f64) = (1.8, 2.2);
pub const REFLECT_TOL: f64 = 1e-12;

#[derive(Debug, Subcommand)]
pub enum PdeCommand {
    /// Residual of the discretised equation on a grid
    Residual(PdeResidualArgs),
    /// Solve the discretised equation with Newton's method
    Newton(NewtonArgs),
    /// Asymptotic quotients near the collar
    Asymptotics(AsymptoticsArgs),
    /// Randomised checks of the two ellipticity lemmas
    Lemmas(LemmaArgs),
}

#[derive(Debug, Args)]
pub struct PdeResidualArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also evaluate at twice the resolution and check the ratio
    #[arg(long)]
    pub refine: bool,
    /// Fail when the max residual exceeds this
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NewtonArgs {
    /// Initial guess (collar data are always the exact ones)
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    /// Write the converged grid as JSON
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Also solve at twice the resolution and check second-order convergence
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolutionKind {
    /// Rotationally symmetric profile from the latitude ODE
    Profile,
    /// Grid from --grid/--load
    Grid,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, value_enum, default_value = "profile")]
    pub solution: SolutionKind,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Start latitude for the profile
    #[arg(long, default_value_t = 1e-3)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    /// Random pairs per bound M
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Gradient bounds M
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 10.0])]
    pub bounds: Vec<f64>,
    /// Largest λ for the self-adjoint construction
    #[arg(long, default_value_t = 5.0)]
    pub lambda_max: f64,
}

#[derive(Debug, Args)]
pub struct MovingPlaneArgs {
    #[arg(long, value_enum, default_value = "profile")]
    pub solution: SolutionKind,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Planes at k·(π/2)/(planes+1), k = 1..planes
    #[arg(long, default_value_t = 9)]
    pub planes: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Points compared between the latitude ratio and explicit reflection
    #[arg(long, default_value_t = 1000)]
    pub ratio_samples: usize,
}

pub fn run(c: &PdeCommand, seed: u64) -> anyhow::Result<Report> {
    match c {
        PdeCommand::Residual(a) => residual(a),
        PdeCommand::Newton(a) => newton(a),
        PdeCommand::Asymptotics(a) => asymptotics(a),
        PdeCommand::Lemmas(a) => lemmas(a, seed),
    }
}

fn residual(a: &PdeResidualArgs) -> anyhow::Result<Report> {
    let g = a.grid.grid()?;
    let r = pde_residual(&g);
    let mut report = Report::new("pde residual", json!(null));
    if let Some(t) = a.tol {
        report.check(Check::at_most("maxResidual", r.max_abs, t));
    }
    let fine = if a.refine {
        let f = pde_residual(&a.grid.refined()?).max_abs;
        let ratio = r.max_abs / f;
        // The zero grid has a residual that does not shrink; only consistent data refine.
        if a.grid.grid != GridKind::Zero {
            report.check(Check::within("refinementRatio", ratio, RATIO_RANGE.0, RATIO_RANGE.1));
        }
        json!({ "maxResidual": f, "ratio": ratio })
    } else {
        json!(null)
    };
    let mut csv = String::from("theta,phi,residual\n");
    for i in 1..g.n_theta() {
        for j in 0..g.n_phi() {
            csv.push_str(&format!("{:?},{:?},{:?}\n", g.theta(i), g.phi(j), r.values[i * g.n_phi() + j]));
        }
    }
    report.csv = Some(csv);
    report.result = json!({
        "nTheta": g.n_theta(),
        "nPhi": g.n_phi(),
        "thetaCollar": g.theta_collar(),
        "maxResidual": r.max_abs,
        "refined": fine,
    });
    Ok(report)
}

struct Solve {
    iterations: usize,
    residual: f64,
    error: f64,
    history: Vec<f64>,
    grid: HemisphereGrid,
}

fn solve(a: &NewtonArgs, n: usize) -> anyhow::Result<Result<Solve, String>> {
    let init = if n == a.grid.n { a.grid.grid()? } else { a.grid.build(a.grid.grid, n)? };
    let exact = HemisphereGrid::exact(init.theta_collar(), init.n_theta(), init.n_phi())?;
    match newton_solve(&init, exact.row(0), a.tol, a.max_iter) {
        Ok(o) => Ok(Ok(Solve {
            iterations: o.iterations,
            residual: o.residual_norm,
            error: o.grid.max_diff(&exact),
            history: o.history,
            grid: o.grid,
        })),
        Err(e @ RadialError::NotConverged { .. }) => Ok(Err(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn newton(a: &NewtonArgs) -> anyhow::Result<Report> {
    let mut report = Report::new("pde newton", json!(null));
    let coarse = match solve(a, a.grid.n)? {
        Ok(s) => s,
        Err(msg) => {
            report.check(Check::new("converged", false).detail(msg));
            return Ok(report);
        }
    };
    report.check(Check::at_most("converged", coarse.residual, a.tol));
    if let Some(p) = &a.save {
        std::fs::write(p, coarse.grid.to_json())?;
    }
    let asym = asymptotics_check(Solution::Grid(&coarse.grid), 1e-3);
    let refined = if a.refine {
        if a.grid.load.is_some() {
            bail!("--refine needs a generated initial grid, not --load");
        }
        match solve(a, 2 * a.grid.n)? {
            Ok(f) => {
                let ratio = coarse.error / f.error;
                report.check(Check::at_most("convergedFine", f.residual, a.tol));
                report.check(Check::within("refinementRatio", ratio, RATIO_RANGE.0, RATIO_RANGE.1));
                report.check(Check::within("order", ratio.log2(), ORDER_RANGE.0, ORDER_RANGE.1));
                json!({ "iterations": f.iterations, "residualNorm": f.residual, "errorVsExact": f.error, "ratio": ratio })
            }
            Err(msg) => {
                report.check(Check::new("convergedFine", false).detail(msg));
                json!(null)
            }
        }
    } else {
        json!(null)
    };
    report.result = json!({
        "nTheta": coarse.grid.n_theta(),
        "nPhi": coarse.grid.n_phi(),
        "iterations": coarse.iterations,
        "residualNorm": coarse.residual,
        "history": coarse.history,
        "errorVsExact": coarse.error,
        "poleValue": coarse.grid.get(coarse.grid.n_theta() - 1, 0),
        "asymptotics": asym,
        "refined": refined,
    });
    let g = &coarse.grid;
    let mut csv = String::from("theta,phi,rho\n");
    for i in 0..g.n_theta() {
        for j in 0..g.n_phi() {
            csv.push_str(&format!("{:?},{:?},{:?}\n", g.theta(i), g.phi(j), g.get(i, j)));
        }
    }
    report.csv = Some(csv);
    Ok(report)
}

fn profile(theta0: f64, step: f64) -> anyhow::Result<RadialProfile> {
    let (u0, s0) = series_start(theta0)?;
    let out = shoot(theta0, u0, s0, step)?;
    if let Some(ab) = out.abort {
        bail!("exact profile aborted at θ = {} ({})", ab.theta, ab.reason);
    }
    Ok(out.profile)
}

fn asymptotics(a: &AsymptoticsArgs) -> anyhow::Result<Report> {
    let r = match a.solution {
        SolutionKind::Profile => asymptotics_check(Solution::Profile(&profile(a.theta0, a.step)?), a.epsilon),
        SolutionKind::Grid => asymptotics_check(Solution::Grid(&a.grid.grid()?), a.epsilon),
    };
    let mut report = Report::new("pde asymptotics", json!(null));
    report.check(Check::new("asymptotics", r.pass));
    report.result = serde_json::to_value(&r)?;
    Ok(report)
}

fn lemmas(a: &LemmaArgs, seed: u64) -> anyhow::Result<Report> {
    if !(a.lambda_max > 1.0) || a.bounds.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        bail!("need --lambda-max > 1 and positive finite --bounds");
    }
    let mut g = rng(seed);
    let disk = |m: f64, g: &mut rand_chacha::ChaCha8Rng| loop {
        let v = Vector2::new(g.gen_range(-m..m), g.gen_range(-m..m));
        if v.norm() <= m {
            break v;
        }
    };
    let mut per_bound = Vec::new();
    let mut failures = 0;
    for &m in &a.bounds {
        let (mut lip, mut mono) = (f64::INFINITY, f64::INFINITY);
        let mut fail = 0;
        for _ in 0..a.samples {
            let (x, y) = (disk(m, &mut g), disk(m, &mut g));
            let r = field_gap(&x, &y, m)?;
            fail += usize::from(!(r.lipschitz_ok && r.monotone_ok));
            lip = lip.min(r.lipschitz_margin);
            mono = mono.min(r.monotone_margin);
        }
        failures += fail;
        per_bound.push(json!({ "m": m, "failures": fail, "minLipschitzMargin": lip, "minMonotoneMargin": mono }));
    }
    let (mut triples, mut outside, mut attempts) = (0usize, 0usize, 0usize);
    while triples < a.samples && attempts < 100 * a.samples.max(1) {
        attempts += 1;
        let lambda = g.gen_range(1.0..a.lambda_max);
        let x = Vector2::new(g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0));
        let y = Vector2::new(g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0)) * lambda;
        if x.norm() < 1e-3 || y.norm() > lambda * x.norm() || y.dot(&x) < x.norm_squared() / lambda {
            continue;
        }
        triples += 1;
        let (lo, hi) = eigenvalues(&build_selfadjoint(&x, &y, lambda)?);
        let (blo, bhi) = selfadjoint_bounds(lambda);
        outside += usize::from(lo < blo || hi > bhi);
    }
    let mut report = Report::new("pde lemmas", json!(null));
    report.check(Check::new("fieldGap", failures == 0).detail(format!("{failures} failures")));
    report.check(Check::new("selfAdjointWindow", outside == 0).detail(format!("{outside}/{triples} outside")));
    let v = field(&Vector2::new(3.0, 4.0));
    report.result = json!({
        "bounds": per_bound,
        "selfAdjointTriples": triples,
        "selfAdjointOutside": outside,
        "fieldAt34": [v.x, v.y],
    });
    Ok(report)
}

pub fn moving_plane(a: &MovingPlaneArgs, seed: u64) -> anyhow::Result<Report> {
    if a.planes == 0 {
        bail!("--planes must be at least 1");
    }
    let prof;
    let grid;
    let sol = match a.solution {
        SolutionKind::Profile => {
            prof = profile(a.theta0, a.step)?;
            Solution::Profile(&prof)
        }
        SolutionKind::Grid => {
            grid = a.grid.grid()?;
            Solution::Grid(&grid)
        }
    };
    let mut rows = Vec::with_capacity(a.planes);
    for k in 1..=a.planes {
        rows.push(moving_plane_report(sol, k as f64 * FRAC_PI_2 / (a.planes + 1) as f64, a.sigma)?);
    }
    let min_w = rows.iter().map(|r| r.min_w).fold(f64::INFINITY, f64::min);

    // Latitude ratio against explicit reflection on points below each plane.
    let mut g = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..a.ratio_samples {
        let gamma = g.gen_range(0.05..1.5);
        let alpha = g.gen_range(0.01..gamma);
        let x = point_at(alpha, 0.0);
        let xr = reflect(&x, gamma)?;
        worst = worst.max((latitude_ratio(alpha, gamma)? - xr.z / x.z).abs());
    }
    let closed = (latitude_ratio(FRAC_PI_8, FRAC_PI_4)? - (1.0 + 2f64.sqrt())).abs();

    let mut report = Report::new("moving-plane", json!(null));
    report.check(Check::above("minW", min_w, -REFLECT_TOL));
    report.check(Check::at_most("ratioVsReflect", worst, REFLECT_TOL));
    report.check(Check::at_most("ratioClosedForm", closed, REFLECT_TOL));
    let mut csv = String::from("theta_plane,min_w,min_w_sigma,omega_empty,evaluated,skipped\n");
    for r in &rows {
        csv.push_str(&format!(
            "{:?},{:?},{:?},{},{},{}\n",
            r.theta_plane, r.min_w, r.min_w_sigma, r.omega_empty, r.evaluated, r.skipped
        ));
    }
    report.csv = Some(csv);
    report.result = json!({ "planes": rows, "minW": min_w, "sigma": a.sigma });
    Ok(report)
}
