use serde::Serialize;

use super::laplace::LaplaceOperator;
use super::GreenError;
use crate::geometry::TriMesh;

pub const SOLVE_RTOL: f64 = 1e-10;

/// Discrete Green function `G(p, ·)` in the mass-weighted mean-zero gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenField {
    pub basepoint: usize,
    pub values: Vec<f64>,
    pub mean_zero: bool,
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LogFit {
    pub c: f64,
    pub max_residual: f64,
    pub rms_residual: f64,
    pub excluded_count: usize,
    pub vertex_count: usize,
    pub area: f64,
}

/// Right-hand side `e_p − m/Area`.
pub fn point_source(op: &LaplaceOperator, p: usize) -> Vec<f64> {
    let area = op.total_mass();
    let mut b: Vec<f64> = op.mass.iter().map(|m| -m / area).collect();
    b[p] += 1.0;
    b
}

/// Solves `S G = e_p − m/Area` to `‖residual‖ ≤ 1e-10 ‖rhs‖` and fixes the
/// gauge to mass-weighted mean zero.
pub fn solve_green(op: &LaplaceOperator, mesh: &TriMesh, p: usize) -> Result<GreenField, GreenError> {
    let n = mesh.num_vertices();
    if n != op.dim() {
        return Err(GreenError::Config(format!(
            "operator has {} rows but mesh has {n} vertices",
            op.dim()
        )));
    }
    if p >= n {
        return Err(GreenError::Config(format!("vertex {p} out of range (mesh has {n})")));
    }
    let b = point_source(op, p);
    let mut g = vec![0.0; n];
    let st = op.stiffness.solve_pcg(&b, &mut g, SOLVE_RTOL, 20 * n + 1000);
    if !st.converged {
        return Err(GreenError::NotConverged {
            iterations: st.iterations,
            relative_residual: st.relative_residual,
        });
    }
    op.project_mean_zero(&mut g);
    Ok(GreenField {
        basepoint: p,
        values: g,
        mean_zero: true,
        iterations: st.iterations,
        relative_residual: st.relative_residual,
    })
}

/// Least-squares constant `c` in `G ≈ −ln|y − y_p|/(2π) + c` over vertices
/// farther than `exclusion` (chordal) from the source, weighted by vertex
/// area. Residual statistics use the same vertices and weights.
pub fn fit_log_constant(
    field: &GreenField,
    mesh: &TriMesh,
    op: &LaplaceOperator,
    exclusion: f64,
) -> Result<LogFit, GreenError> {
    if !(exclusion > 0.0) {
        return Err(GreenError::Config(format!("exclusion radius must be positive, got {exclusion}")));
    }
    let v = mesh.vertices();
    let yp = v[field.basepoint];
    let mut kept = Vec::new();
    for (i, y) in v.iter().enumerate() {
        let d = (y - yp).norm();
        if d > exclusion {
            kept.push((i, field.values[i] + d.ln() / std::f64::consts::TAU));
        }
    }
    if kept.is_empty() {
        return Err(GreenError::Config(format!(
            "exclusion radius {exclusion} removes every vertex"
        )));
    }
    let wsum: f64 = kept.iter().map(|&(i, _)| op.mass[i]).sum();
    let c = kept.iter().map(|&(i, s)| op.mass[i] * s).sum::<f64>() / wsum;
    let mut max_residual = 0.0f64;
    let mut ss = 0.0;
    for &(i, s) in &kept {
        let r = s - c;
        max_residual = max_residual.max(r.abs());
        ss += op.mass[i] * r * r;
    }
    Ok(LogFit {
        c,
        max_residual,
        rms_residual: (ss / wsum).sqrt(),
        excluded_count: v.len() - kept.len(),
        vertex_count: v.len(),
        area: op.total_mass(),
    })
}

/// `(ln 2 − 1/2)/(2π)`: the constant forced by the mean-zero gauge on the
/// round sphere of area 4π through the source.
pub fn sphere_log_constant() -> f64 {
    (std::f64::consts::LN_2 - 0.5) / std::f64::consts::TAU
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{gen_icosphere, Vec3};
    use crate::greensolve::assemble;

    #[test]
    fn gauge_and_residual() {
        let m = gen_icosphere(3, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let op = assemble(&m);
        let g = solve_green(&op, &m, m.basepoint().unwrap()).unwrap();
        assert!(op.mean(&g.values).abs() < 1e-9);
        let b = point_source(&op, g.basepoint);
        let r: Vec<f64> = op.stiffness.apply(&g.values).iter().zip(&b).map(|(a, b)| a - b).collect();
        let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(rn <= 1e-10 * bn);
    }

    #[test]
    fn shifting_field_shifts_constant() {
        let m = gen_icosphere(3, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let op = assemble(&m);
        let g = solve_green(&op, &m, m.basepoint().unwrap()).unwrap();
        let a = fit_log_constant(&g, &m, &op, 0.3).unwrap();
        let mut shifted = g.clone();
        shifted.values.iter_mut().for_each(|x| *x += 0.75);
        let b = fit_log_constant(&shifted, &m, &op, 0.3).unwrap();
        assert!((b.c - a.c - 0.75).abs() < 1e-12);
        assert!((b.max_residual - a.max_residual).abs() < 1e-12);
        assert!((b.rms_residual - a.rms_residual).abs() < 1e-12);
    }

    #[test]
    fn oversized_exclusion_is_config_error() {
        let m = gen_icosphere(2, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let op = assemble(&m);
        let g = solve_green(&op, &m, m.basepoint().unwrap()).unwrap();
        assert!(matches!(fit_log_constant(&g, &m, &op, 3.0), Err(GreenError::Config(_))));
        assert!(matches!(fit_log_constant(&g, &m, &op, 0.0), Err(GreenError::Config(_))));
    }

    #[test]
    fn bad_vertex_is_config_error() {
        let m = gen_icosphere(1, Vec3::zeros(), 1.0).unwrap();
        let op = assemble(&m);
        assert!(matches!(solve_green(&op, &m, 999), Err(GreenError::Config(_))));
    }
}
