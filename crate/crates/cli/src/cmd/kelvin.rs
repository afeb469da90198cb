use anyhow::bail;
use clap::{Args, ValueEnum};
use grl_core::kelvin::{
    conformal_factor_check, curvature_correspondence_residual, kelvin_jacobian, kelvin_point, sample_surface,
    CurvatureMethod, CONFORMAL_MIN_RADIUS, FD_STEP,
};
use serde_json::json;

use super::{max_abs, rng};
use crate::args::{parse_vec3, Expect, SurfaceArgs};
use crate::report::{Check, Report};
use grl_core::geometry::Vec3;

pub const CONFORMAL_TOL: f64 = 1e-12;
pub const CORRESPONDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Finite differences of the transformed surface
    Fd,
    /// Chain rule through the closed-form second fundamental form
    ClosedForm,
}

#[derive(Debug, Args)]
pub struct KelvinArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "fd")]
    pub method: Method,
    #[arg(long, default_value_t = FD_STEP)]
    pub step: f64,
    #[arg(long, value_enum, default_value = "hold")]
    pub expect: Expect,
    #[arg(long, default_value_t = CORRESPONDENCE_TOL)]
    pub tol: f64,
    /// Residual that `--expect violated` must exceed
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Also transform this point
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub point: Option<Vec3>,
}

pub fn run(a: &KelvinArgs, seed: u64) -> anyhow::Result<Report> {
    if !(a.step > 0.0 && a.step < 1e-2) {
        bail!("--step must lie in (0, 0.01), got {}", a.step);
    }
    let (s, scale) = a.surface.analytic()?;
    let samples = sample_surface(&s, a.samples, &mut rng(seed));
    let away: Vec<Vec3> = samples.iter().copied().filter(|y| y.norm() >= CONFORMAL_MIN_RADIUS).collect();
    let conformal = max_abs(conformal_factor_check(&s, &away)?);
    let method = match a.method {
        Method::Fd => CurvatureMethod::FiniteDifference,
        Method::ClosedForm => CurvatureMethod::ClosedForm,
    };
    let corr = curvature_correspondence_residual(&s, &samples, method, a.step);

    let mut report = Report::new("kelvin", json!(null));
    report.check(Check::at_most("conformalFactor", conformal, CONFORMAL_TOL));
    report.check(match a.expect {
        Expect::Hold => Check::at_most("curvatureCorrespondence", corr.max_residual, a.tol),
        Expect::Violated => Check::above("curvatureCorrespondence", corr.max_residual, a.threshold),
    });
    let point = match a.point {
        Some(y) => {
            let x = kelvin_point(&y)?;
            let back = kelvin_point(&x)?;
            let jac = kelvin_jacobian(&y);
            json!({
                "input": [y.x, y.y, y.z],
                "image": [x.x, x.y, x.z],
                "involutionError": (back - y).norm(),
                "jacobianDeterminant": jac.determinant(),
            })
        }
        None => json!(null),
    };
    let mut csv = String::from("x,y,z,residual\n");
    let kept = samples.iter().filter(|q| q.norm() >= grl_core::kelvin::ORIGIN_EXCLUSION);
    for (q, r) in kept.zip(&corr.residuals) {
        csv.push_str(&format!("{:?},{:?},{:?},{r:?}\n", q.x, q.y, q.z));
    }
    report.csv = Some(csv);
    report.result = json!({
        "surface": { "source": s, "scale": scale },
        "samples": a.samples,
        "conformalMaxGap": conformal,
        "conformalSkipped": samples.len() - away.len(),
        "method": corr.method,
        "step": a.step,
        "evaluated": corr.sample_count,
        "skipped": corr.skipped,
        "maxResidual": corr.max_residual,
        "point": point,
    });
    Ok(report)
}
