use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use super::grid::HemisphereGrid;
use super::ode::RadialProfile;
use super::RadialError;
use crate::geometry::Vec3;

/// Unit normal `v_θ = cos θ_p e₃ − sin θ_p e₁` of the reflection plane.
pub fn plane_normal(theta_plane: f64) -> Vec3 {
    Vec3::new(-theta_plane.sin(), 0.0, theta_plane.cos())
}

/// `x_θ = x − 2⟨x,v_θ⟩v_θ` for a unit vector `x`.
pub fn reflect(x: &Vec3, theta_plane: f64) -> Result<Vec3, RadialError> {
    if (x.norm() - 1.0).abs() > 1e-12 {
        return Err(RadialError::Domain(format!("|x| = {} is not 1", x.norm())));
    }
    let v = plane_normal(theta_plane);
    Ok(x - v * (2.0 * x.dot(&v)))
}

/// Latitude `arcsin⟨x,e₃⟩`, computed stably as an angle.
pub fn latitude(x: &Vec3) -> f64 {
    x.z.atan2(x.x.hypot(x.y))
}

pub fn point_at(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(ct * cp, ct * sp, st)
}

/// `sin(2γ − α)/sin α`: ratio of latitude sines of `x = (cos α, 0, sin α)`
/// and its reflection in the plane at angle `γ`.
pub fn latitude_ratio(alpha: f64, gamma: f64) -> Result<f64, RadialError> {
    if !(alpha > 0.0 && alpha <= gamma && gamma < FRAC_PI_2) {
        return Err(RadialError::Domain(format!(
            "need 0 < α ≤ γ < π/2, got α = {alpha}, γ = {gamma}"
        )));
    }
    Ok((2.0 * gamma - alpha).sin() / alpha.sin())
}

/// A solution of the radial problem on the upper hemisphere.
#[derive(Debug, Clone, Copy)]
pub enum Solution<'a> {
    /// Rotationally symmetric, `u(θ)` interpolated linearly.
    Profile(&'a RadialProfile),
    /// Full grid, `ρ` interpolated bilinearly.
    Grid(&'a HemisphereGrid),
}

impl Solution<'_> {
    /// `ρ` at a point of the upper hemisphere, `None` below the data.
    pub fn rho_at(&self, x: &Vec3) -> Option<f64> {
        let theta = latitude(x);
        match self {
            Self::Profile(p) => p.interpolate(theta).filter(|u| *u > 0.0).map(f64::ln),
            Self::Grid(g) => g.interpolate(theta, x.y.atan2(x.x)),
        }
    }
}

/// `w_θ(x) = ρ(x_θ) − ρ(x)`; `None` if either point lies below the data.
pub fn reflection_gap(sol: Solution<'_>, x: &Vec3, theta_plane: f64) -> Result<Option<f64>, RadialError> {
    let xr = reflect(x, theta_plane)?;
    Ok(sol.rho_at(&xr).zip(sol.rho_at(x)).map(|(a, b)| a - b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReflectionReport {
    pub theta_plane: f64,
    pub min_w: f64,
    pub sigma: f64,
    pub min_w_sigma: f64,
    pub omega_empty: bool,
    /// Nodes of `Σ_θ` evaluated.
    pub evaluated: usize,
    /// Nodes of `Σ_θ` whose reflection fell outside the data.
    pub skipped: usize,
}

pub const PROFILE_PHI_SAMPLES: usize = 64;
pub const PROFILE_MAX_ROWS: usize = 400;

/// Minimum of `w_θ` over the nodes with `⟨x,v_θ⟩ < 0`, and of
/// `w_{θ,σ} = w_θ + max(σ/⟨x,e₃⟩ − 1, 0)`.
///
/// Profile nodes are the profile latitudes (thinned to at most 400 rows)
/// times 64 longitudes; grid nodes are the grid nodes.
pub fn moving_plane_report(sol: Solution<'_>, theta_plane: f64, sigma: f64) -> Result<ReflectionReport, RadialError> {
    if !(theta_plane > 0.0 && theta_plane < FRAC_PI_2) {
        return Err(RadialError::Domain(format!("plane angle {theta_plane} outside (0, π/2)")));
    }
    if !(sigma >= 0.0) {
        return Err(RadialError::Domain(format!("σ must be non-negative, got {sigma}")));
    }
    let nodes: Vec<(Vec3, f64)> = match sol {
        Solution::Profile(p) => {
            let stride = p.len().div_ceil(PROFILE_MAX_ROWS).max(1);
            let mut rows: Vec<usize> = (0..p.len()).step_by(stride).collect();
            if rows.last() != Some(&(p.len() - 1)) {
                rows.push(p.len() - 1);
            }
            rows.iter()
                .filter(|&&k| p.u[k] > 0.0)
                .flat_map(|&k| {
                    (0..PROFILE_PHI_SAMPLES).map(move |j| {
                        let phi = TAU * j as f64 / PROFILE_PHI_SAMPLES as f64;
                        (point_at(p.thetas[k], phi), p.u[k].ln())
                    })
                })
                .collect()
        }
        Solution::Grid(g) => (0..g.n_theta())
            .flat_map(|i| (0..g.n_phi()).map(move |j| (point_at(g.theta(i), g.phi(j)), g.get(i, j))))
            .collect(),
    };
    let v = plane_normal(theta_plane);
    let mut report = ReflectionReport {
        theta_plane,
        min_w: f64::INFINITY,
        sigma,
        min_w_sigma: f64::INFINITY,
        omega_empty: true,
        evaluated: 0,
        skipped: 0,
    };
    for (x, rho) in nodes {
        if x.dot(&v) >= 0.0 {
            continue;
        }
        let xr = x - v * (2.0 * x.dot(&v));
        let Some(rr) = sol.rho_at(&xr) else {
            report.skipped += 1;
            continue;
        };
        let w = rr - rho;
        let ws = w + (sigma / x.z - 1.0).max(0.0);
        report.evaluated += 1;
        report.min_w = report.min_w.min(w);
        report.min_w_sigma = report.min_w_sigma.min(ws);
        if ws < 0.0 {
            report.omega_empty = false;
        }
    }
    Ok(report)
}
