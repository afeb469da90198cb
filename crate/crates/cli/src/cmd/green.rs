use std::f64::consts::TAU;

use anyhow::{anyhow, bail};
use clap::Args;
use grl_core::greensolve::{assemble, fit_log_constant, solve_green, sphere_log_constant, GreenError};
use serde_json::json;

use super::max_abs;
use crate::args::{Shape, SurfaceArgs, AREA};
use crate::report::{Check, Report};

pub const SPHERE_C_TOL: f64 = 2e-2;
pub const GAUGE_TOL: f64 = 1e-9;
pub const EIGEN_ITERS: usize = 40;
pub const EIGEN_REL_TOL: f64 = 0.1;

#[derive(Debug, Args)]
pub struct GreenArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Chordal radius around the source left out of the fit
    #[arg(long, default_value_t = 0.3)]
    pub exclude: f64,
    /// Source vertex (default: the vertex at the origin)
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Also estimate the first nonzero eigenvalue
    #[arg(long)]
    pub eigen: bool,
    /// Fail unless the fit residual stays below this
    #[arg(long)]
    pub max_residual: Option<f64>,
}

pub fn run(a: &GreenArgs) -> anyhow::Result<Report> {
    let src = a.surface.mesh()?;
    let mesh = &src.mesh;
    let p = match a.vertex.or(mesh.basepoint()) {
        Some(p) if p < mesh.num_vertices() => p,
        Some(p) => bail!("vertex {p} out of range (mesh has {})", mesh.num_vertices()),
        None => bail!("mesh has no vertex at the origin; pass --vertex"),
    };
    let op = assemble(mesh);
    let mut report = Report::new("green", json!(null));
    let field = match solve_green(&op, mesh, p) {
        Ok(f) => f,
        Err(e @ GreenError::NotConverged { .. }) => {
            report.check(Check::new("solverConverged", false).detail(e.to_string()));
            report.result = json!({ "source": src.info, "sourceVertex": p });
            return Ok(report);
        }
        Err(e) => return Err(anyhow!(e)),
    };
    let fit = fit_log_constant(&field, mesh, &op, a.exclude)?;
    let gmax = max_abs(field.values.iter().copied());
    report.check(Check::new("solverConverged", true));
    report.check(Check::at_most("gauge", op.mean(&field.values).abs() / gmax.max(1.0), GAUGE_TOL));

    // The reference constant applies to a round sphere of area 4π, from any source.
    let round = a.surface.shape == Shape::Sphere && !a.surface.is_mesh_file() && (op.total_mass() / AREA - 1.0).abs() < 1e-2;
    let reference = round.then(sphere_log_constant);
    if let Some(c) = reference {
        report.check(Check::at_most("sphereConstant", (fit.c - c).abs(), SPHERE_C_TOL));
    }
    if let Some(limit) = a.max_residual {
        report.check(Check::at_most("fitResidual", fit.max_residual, limit));
    }
    let eigen = if a.eigen {
        let start: Vec<f64> = mesh.vertices().iter().map(|v| v.z + 0.3 * v.x - 0.2 * v.y).collect();
        let lambda = op.smallest_nonzero_eigenvalue(&start, EIGEN_ITERS)?;
        if a.surface.shape == Shape::Sphere && !a.surface.is_mesh_file() {
            // First eigenvalue 2/r² with r² = Area/4π.
            let expected = 2.0 * AREA / op.total_mass();
            report.check(Check::at_most("sphereEigenvalue", (lambda / expected - 1.0).abs(), EIGEN_REL_TOL));
        }
        Some(lambda)
    } else {
        None
    };

    let v = mesh.vertices();
    let yp = v[p];
    let mut csv = String::from("vertex,distance,g,log_residual\n");
    for (i, y) in v.iter().enumerate() {
        let d = (y - yp).norm();
        let r = if d > 0.0 { format!("{:?}", field.values[i] + d.ln() / TAU - fit.c) } else { String::new() };
        csv.push_str(&format!("{i},{d:?},{:?},{r}\n", field.values[i]));
    }
    report.csv = Some(csv);
    report.result = json!({
        "source": src.info,
        "sourceVertex": p,
        "vertices": mesh.num_vertices(),
        "iterations": field.iterations,
        "relativeResidual": field.relative_residual,
        "fit": fit,
        "referenceC": reference,
        "eigenvalue": eigen,
        "maxRowSum": op.max_row_sum(),
    });
    Ok(report)
}
