use anyhow::bail;
use clap::{Args, ValueEnum};
use grl_core::geometry::{vertex_geometry, GeometrySample};
use grl_core::rigidity::{
    conformal_nd_check, mean_curvature_identity, mean_curvature_rhs, sample_hypersphere, surface2_residual,
    surface2_value, umbilic_probe, DEFAULT_UMBILIC_RADII,
};
use rand::Rng;
use serde_json::json;

use super::{max_abs, rng};
use crate::args::{Expect, SurfaceArgs};
use crate::report::{Check, Report};

pub const CLOSED_FORM_TOL: f64 = 1e-12;
pub const UMBILIC_TOL: f64 = 1e-4;
pub const MAX_DIM: usize = 10;
pub const AMGM_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RigidityCheck {
    /// `2⟨y,ν⟩²/|y|⁴ − H⟨y,ν⟩/|y|² + 1/2 = 0`
    Surface2,
    /// `H = 2⟨y,ν⟩/|y|² + |y|²/(2⟨y,ν⟩)` and its AM-GM consequence `H ≥ 2`
    MeanCurvature,
    /// Limits of the support quotient along principal directions at the origin
    Umbilic,
    /// The higher-dimensional conformal identity on round hyperspheres
    Conformal,
}

#[derive(Debug, Args)]
pub struct RigidityArgs {
    #[arg(long, value_enum, default_value = "surface2")]
    pub check: RigidityCheck,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Closed-form samples per parameter direction
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Evaluate on mesh vertices instead of closed-form samples
    #[arg(long)]
    pub discrete: bool,
    /// Tolerance for `--expect hold`
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value = "hold")]
    pub expect: Expect,
    /// Residual that `--expect violated` must exceed
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Decreasing probe radii for the umbilic check
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Hypersphere dimension n for the conformal check
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Random samples (conformal points or AM-GM sweep)
    #[arg(long)]
    pub samples: Option<usize>,
}

impl RigidityArgs {
    /// Mesh vertices or closed-form samples; the flag says which.
    fn samples(&self) -> anyhow::Result<(Vec<GeometrySample>, &'static str, serde_json::Value)> {
        if self.discrete || self.surface.is_mesh_file() {
            let src = self.surface.mesh()?;
            Ok((vertex_geometry(&src.mesh), "mesh", src.info))
        } else {
            if self.grid < 2 {
                bail!("--grid must be at least 2");
            }
            let (s, scale) = self.surface.analytic()?;
            Ok((s.sample_grid(self.grid, self.grid), "closed-form", json!({ "source": s, "scale": scale })))
        }
    }

    /// Default tolerance: tight for closed forms, none for meshes.
    fn verdict(&self, name: &str, value: f64, path: &str, default_tol: f64) -> Option<Check> {
        match self.expect {
            Expect::Violated => Some(Check::above(name, value, self.threshold)),
            Expect::Hold => match (self.tol, path) {
                (Some(t), _) => Some(Check::at_most(name, value, t)),
                (None, "mesh") => None,
                (None, _) => Some(Check::at_most(name, value, default_tol)),
            },
        }
    }
}

pub fn run(a: &RigidityArgs, seed: u64) -> anyhow::Result<Report> {
    match a.check {
        RigidityCheck::Surface2 => surface2(a),
        RigidityCheck::MeanCurvature => mean_curvature(a, seed),
        RigidityCheck::Umbilic => umbilic(a),
        RigidityCheck::Conformal => conformal(a, seed),
    }
}

fn point_csv(samples: &[GeometrySample], value: impl Fn(&GeometrySample, f64) -> f64) -> String {
    let mut csv = String::from("x,y,z,residual\n");
    for s in samples {
        if let Some(q) = s.support_quotient {
            let p = s.point;
            csv.push_str(&format!("{:?},{:?},{:?},{:?}\n", p.x, p.y, p.z, value(s, q)));
        }
    }
    csv
}

fn surface2(a: &RigidityArgs) -> anyhow::Result<Report> {
    let (samples, path, source) = a.samples()?;
    let r = surface2_residual(&samples);
    let mut report = Report::new("rigidity", json!(null));
    report.extend(a.verdict("surface2", r.max_residual, path, CLOSED_FORM_TOL));
    report.csv = Some(point_csv(&samples, |s, _| surface2_value(&s.point, &s.normal, s.h)));
    report.result = json!({
        "check": "surface2",
        "path": path,
        "surface": source,
        "samples": samples.len(),
        "evaluated": r.residuals.len(),
        "skipped": r.skipped,
        "singular": r.singular,
        "maxResidual": r.max_residual,
        "rmsResidual": r.rms_residual,
    });
    Ok(report)
}

fn mean_curvature(a: &RigidityArgs, seed: u64) -> anyhow::Result<Report> {
    let (samples, path, source) = a.samples()?;
    let rows = mean_curvature_identity(&samples, CLOSED_FORM_TOL);
    let gap = max_abs(rows.iter().filter(|r| !r.singular).map(|r| r.gap));
    let mut report = Report::new("rigidity", json!(null));
    report.extend(a.verdict("meanCurvature", gap, path, CLOSED_FORM_TOL));
    let below = rows.iter().filter(|r| !r.singular && !r.geq2).count();

    // a + 1/a ≥ 2 for a > 0, swept log-uniformly over six decades.
    let n = a.samples.unwrap_or(AMGM_SAMPLES);
    let mut g = rng(seed);
    let amgm_min = (0..n)
        .map(|_| mean_curvature_rhs(10f64.powf(g.gen_range(-3.0..3.0))))
        .fold(f64::INFINITY, f64::min);
    report.check(Check::new("amgm", amgm_min >= 2.0 - CLOSED_FORM_TOL).detail(format!("min a + 1/a = {amgm_min:?}")));
    report.csv = Some(point_csv(&samples, |s, q| s.h - mean_curvature_rhs(2.0 * q)));
    report.result = json!({
        "check": "mean-curvature",
        "path": path,
        "surface": source,
        "evaluated": rows.len(),
        "singular": rows.iter().filter(|r| r.singular).count(),
        "maxGap": gap,
        "minRhs": rows.iter().filter(|r| !r.singular).map(|r| r.rhs).fold(f64::INFINITY, f64::min),
        "rhsBelowTwo": below,
        "amgmSamples": n,
        "amgmMin": amgm_min,
    });
    Ok(report)
}

fn umbilic(a: &RigidityArgs) -> anyhow::Result<Report> {
    let (s, scale) = a.surface.analytic()?;
    let radii = a.radii.clone().unwrap_or(DEFAULT_UMBILIC_RADII.to_vec());
    let est = umbilic_probe(&s, &radii)?;
    let err = max_abs(est.iter().map(|e| e.limit - e.expected));
    let spread = est.iter().map(|e| e.limit).fold(f64::NEG_INFINITY, f64::max)
        - est.iter().map(|e| e.limit).fold(f64::INFINITY, f64::min);
    let mut report = Report::new("rigidity", json!(null));
    report.extend(a.verdict("umbilic", err, "closed-form", UMBILIC_TOL));
    report.result = json!({
        "check": "umbilic",
        "surface": { "source": s, "scale": scale },
        "radii": radii,
        "estimates": est,
        "maxLimitError": err,
        "directionalSpread": spread,
    });
    Ok(report)
}

fn conformal(a: &RigidityArgs, seed: u64) -> anyhow::Result<Report> {
    let n = a.samples.unwrap_or(100);
    let r = a.surface.radius;
    // The sampler rejects from a cube, so very high dimensions would stall it.
    if !(3..=MAX_DIM).contains(&a.dim) || !(r > 0.0 && r.is_finite()) {
        bail!("conformal check needs 3 ≤ --dim ≤ {MAX_DIM} and a positive --radius");
    }
    let pts = sample_hypersphere(a.dim, r, n, &mut rng(seed));
    let rows = conformal_nd_check(a.dim, r, &pts)?;
    let gap = max_abs(rows.iter().map(|x| x.gap / x.lhs.abs().max(1.0)));
    let mut report = Report::new("rigidity", json!(null));
    report.extend(a.verdict("conformal", gap, "closed-form", CLOSED_FORM_TOL));
    let mut csv = String::from("lhs,rhs,gap\n");
    for x in &rows {
        csv.push_str(&format!("{:?},{:?},{:?}\n", x.lhs, x.rhs, x.gap));
    }
    report.csv = Some(csv);
    report.result = json!({
        "check": "conformal",
        "dimension": a.dim,
        "radius": r,
        "samples": rows.len(),
        "maxRelativeGap": gap,
    });
    Ok(report)
}
