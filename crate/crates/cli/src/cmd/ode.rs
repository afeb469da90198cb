use clap::{Args, Subcommand};
use grl_core::radial::{
    linearized_coeffs, ode_residual, ode_rhs, operator_f, series_start, shoot, uniqueness_probe, UniquenessReport,
};
use serde_json::json;

use super::max_abs;
use crate::report::{Check, Report};

pub const EXACT_TOL: f64 = 1e-6;
/// A perturbed start must show a pole defect this many times the exact one.
pub const DETECTION_FACTOR: f64 = 100.0;
pub const HALVING_TOL: f64 = 0.01;
pub const LINEARIZE_STEP: f64 = 1e-6;
pub const LINEARIZE_TOL: f64 = 1e-6;

#[derive(Debug, Subcommand)]
pub enum OdeCommand {
    /// Integrate from a start latitude to the pole and measure regularity there
    Shoot(ShootArgs),
    /// Evaluate the ODE residual at one point
    Residual(ResidualArgs),
    /// Partial derivatives of the operator against central differences
    Linearize(LinearizeArgs),
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    /// Second-order perturbation of the series start, u0 = 2 sin θ0 + β θ0²
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Raw initial value (with --s0, bypasses the series start)
    #[arg(long, requires = "s0", allow_hyphen_values = true)]
    pub u0: Option<f64>,
    /// Raw initial slope
    #[arg(long, requires = "u0", allow_hyphen_values = true)]
    pub s0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub du: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ddu: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct LinearizeArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
}

pub fn run(c: &OdeCommand) -> anyhow::Result<Report> {
    match c {
        OdeCommand::Shoot(a) => run_shoot(a),
        OdeCommand::Residual(a) => {
            let (value, form) = ode_residual(a.u, a.du, a.ddu, a.theta);
            Ok(Report::new("ode residual", json!({ "value": value, "form": form })))
        }
        OdeCommand::Linearize(a) => linearize(a),
    }
}

fn run_shoot(a: &ShootArgs) -> anyhow::Result<Report> {
    if let (Some(u0), Some(s0)) = (a.u0, a.s0) {
        let out = shoot(a.theta0, u0, s0, a.step)?;
        let mut report = Report::new("ode shoot", json!(null));
        let last = out.profile.len() - 1;
        report.result = json!({
            "mode": "raw",
            "theta0": a.theta0,
            "u0": u0,
            "s0": s0,
            "step": out.step,
            "nodes": out.profile.len(),
            "endTheta": out.profile.thetas[last],
            "endU": out.profile.u[last],
            "endDu": out.profile.du[last],
            "abort": out.abort,
        });
        report.csv = Some(out.profile.to_csv());
        return Ok(report);
    }

    let probe = uniqueness_probe(a.beta, a.theta0, a.step)?;
    let (u0, s0) = series_start(a.theta0)?;
    let out = shoot(a.theta0, u0 + a.beta * a.theta0 * a.theta0, s0, a.step)?;
    let mut report = Report::new("ode shoot", json!(null));
    let defect = |r: &UniquenessReport| r.pole_defect;
    let mut extra = json!({});
    if a.beta == 0.0 {
        let sup = max_abs(out.profile.thetas.iter().zip(&out.profile.u).map(|(t, u)| u - 2.0 * t.sin()));
        report.check(Check::at_most("poleDefect", probe.pole_defect, EXACT_TOL));
        report.check(Check::at_most("poleSlope", probe.pole_slope, EXACT_TOL));
        report.check(Check::at_most("supError", sup, EXACT_TOL));
        extra["supError"] = json!(sup);
    } else {
        let exact = uniqueness_probe(0.0, a.theta0, a.step)?;
        let half = uniqueness_probe(a.beta, a.theta0, a.step / 2.0)?;
        let detected = probe.abort_angle.is_some() || defect(&probe) > DETECTION_FACTOR * defect(&exact);
        report.check(
            Check::new("perturbationDetected", detected)
                .detail(format!("defect {:e} vs exact {:e}", probe.pole_defect, exact.pole_defect)),
        );
        let stable = match (probe.abort_angle, half.abort_angle) {
            (Some(x), Some(y)) => (x - y).abs() <= HALVING_TOL * x.abs(),
            (None, None) => (probe.pole_defect - half.pole_defect).abs() <= HALVING_TOL * probe.pole_defect,
            _ => false,
        };
        report.check(Check::new("stableUnderHalving", stable));
        extra = json!({ "exactDefect": exact.pole_defect, "halvedStep": half });
    }
    report.result = json!({
        "mode": "series",
        "probe": probe,
        "abort": out.abort,
        "nodes": out.profile.len(),
        "details": extra,
    });
    report.csv = Some(out.profile.to_csv());
    Ok(report)
}

fn linearize(a: &LinearizeArgs) -> anyhow::Result<Report> {
    let f0 = operator_f(a.m, a.p, a.z, a.theta)?;
    let (fm, fp, fz) = linearized_coeffs(a.m, a.p, a.z, a.theta)?;
    let e = LINEARIZE_STEP;
    let fd = |dm: f64, dp: f64, dz: f64| -> anyhow::Result<f64> {
        let plus = operator_f(a.m + dm, a.p + dp, a.z + dz, a.theta)?;
        let minus = operator_f(a.m - dm, a.p - dp, a.z - dz, a.theta)?;
        Ok((plus - minus) / (2.0 * e))
    };
    let num = [fd(e, 0.0, 0.0)?, fd(0.0, e, 0.0)?, fd(0.0, 0.0, e)?];
    let exact = [fm, fp, fz];
    let gap = max_abs((0..3).map(|k| (exact[k] - num[k]) / exact[k].abs().max(1.0)));
    let mut report = Report::new("ode linearize", json!(null));
    report.check(Check::at_most("finiteDifference", gap, LINEARIZE_TOL));
    // The ODE solved for u'' is the M with F = 0.
    let rhs = ode_rhs(a.theta, a.z, a.p);
    let f_at_rhs = operator_f(rhs, a.p, a.z, a.theta)?;
    report.result = json!({
        "f": f0,
        "coefficients": { "fM": fm, "fP": fp, "fZ": fz },
        "finiteDifference": num,
        "relativeGap": gap,
        "odeRhs": rhs,
        "fAtOdeRhs": f_at_rhs,
    });
    Ok(report)
}
