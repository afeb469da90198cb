use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::Args;
use grl_core::geometry::{angle_defects, save_off, star_shape_check, vertex_geometry};
use serde_json::json;

use super::max_abs;
use crate::args::SurfaceArgs;
use crate::report::{Check, Report};

pub const GAUSS_BONNET_TOL: f64 = 1e-10;

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Save the (rescaled) mesh as OFF
    #[arg(long)]
    pub save: Option<PathBuf>,
}

pub fn run(a: &MeshArgs) -> anyhow::Result<Report> {
    let src = a.surface.mesh()?;
    let mesh = &src.mesh;
    let total: f64 = angle_defects(mesh).iter().sum();
    let chi = mesh.euler_characteristic();
    let gb = (total - TAU * chi as f64).abs();
    let geom = vertex_geometry(mesh);
    let hs: Vec<f64> = geom.iter().map(|g| g.h).collect();
    let ks: Vec<f64> = geom.iter().map(|g| g.k).collect();
    let range = |v: &[f64]| json!([v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max)]);

    let (h_err, k_err) = match &src.surface {
        Some(s) => {
            let samples: Vec<_> = mesh.vertices().iter().map(|v| s.sample(v)).collect();
            (
                Some(max_abs(geom.iter().zip(&samples).map(|(g, e)| g.h - e.h))),
                Some(max_abs(geom.iter().zip(&samples).map(|(g, e)| g.k - e.k))),
            )
        }
        None => (None, None),
    };

    let mut report = Report::new("mesh", json!(null));
    report.check(Check::at_most("gaussBonnet", gb, GAUSS_BONNET_TOL));
    let star = match mesh.basepoint() {
        Some(_) => {
            let s = star_shape_check(mesh)?;
            report.check(Check::new("starShaped", s.sign_consistent).detail(format!("min support {:e}", s.min_support)));
            json!({
                "minSupport": s.min_support,
                "maxSupport": s.max_support,
                "minQuotient": s.min_quotient,
                "signConsistent": s.sign_consistent,
                "excluded": s.excluded,
            })
        }
        None => json!(null),
    };
    if let Some(p) = &a.save {
        save_off(mesh, p)?;
    }
    report.result = json!({
        "source": src.info,
        "vertices": mesh.num_vertices(),
        "faces": mesh.num_faces(),
        "area": mesh.area(),
        "eulerCharacteristic": chi,
        "totalAngleDefect": total,
        "basepoint": mesh.basepoint(),
        "meanCurvatureRange": range(&hs),
        "gaussCurvatureRange": range(&ks),
        "meanCurvatureError": h_err,
        "gaussCurvatureError": k_err,
        "starShape": star,
    });
    let mut csv = String::from("x,y,z,h,k,support_quotient\n");
    for g in &geom {
        let q = g.support_quotient.map(|q| format!("{q:?}")).unwrap_or_default();
        csv.push_str(&format!("{:?},{:?},{:?},{:?},{:?},{q}\n", g.point.x, g.point.y, g.point.z, g.h, g.k));
    }
    report.csv = Some(csv);
    Ok(report)
}
