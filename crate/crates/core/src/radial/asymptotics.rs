use serde::Serialize;

use super::grid::HemisphereGrid;
use super::ode::RadialProfile;
use super::reflect::Solution;
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AsymptoticsRow {
    pub theta: f64,
    /// Range over longitude of `e^ρ/(2 sin θ)`.
    pub ratio1_min: f64,
    pub ratio1_max: f64,
    /// Maximum over longitude of `|e^ρ∇ρ − 2e₃|`.
    pub ratio2_max: f64,
    /// `2 sin θ`: the value of the second quantity on the exact solution.
    pub ratio2_allowance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AsymptoticsReport {
    pub epsilon: f64,
    pub rows: Vec<AsymptoticsRow>,
    pub pass: bool,
}

/// Both asymptotic quotients on the three lowest rows.
///
/// Passes when `|ratio1 − 1| ≤ ε` and `ratio2 ≤ ε + 2 sin θ` on every row.
/// The exact solution has `e^ρ∇ρ = 2 cos θ e_θ`, whose distance to `2e₃` is
/// exactly `2 sin θ`, so the allowance is what the admissible solution
/// itself shows at a collar of finite height.
pub fn asymptotics_check(sol: Solution<'_>, epsilon: f64) -> AsymptoticsReport {
    let rows = match sol {
        Solution::Profile(p) => profile_rows(p),
        Solution::Grid(g) => grid_rows(g),
    };
    let pass = rows.iter().all(|r| {
        (r.ratio1_min - 1.0).abs() <= epsilon
            && (r.ratio1_max - 1.0).abs() <= epsilon
            && r.ratio2_max <= epsilon + r.ratio2_allowance
    });
    AsymptoticsReport { epsilon, rows, pass }
}

/// `|u_θ e_θ + (u_φ/cos θ) e_φ − 2e₃|` at longitude `φ`.
fn gradient_gap(theta: f64, phi: f64, u_t: f64, u_p: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let e_t = Vec3::new(-st * cp, -st * sp, ct);
    let e_p = Vec3::new(-sp, cp, 0.0);
    (e_t * u_t + e_p * (u_p / ct) - Vec3::z() * 2.0).norm()
}

fn profile_rows(p: &RadialProfile) -> Vec<AsymptoticsRow> {
    (0..p.len().min(3))
        .map(|k| {
            let t = p.thetas[k];
            let r1 = p.u[k] / (2.0 * t.sin());
            AsymptoticsRow {
                theta: t,
                ratio1_min: r1,
                ratio1_max: r1,
                ratio2_max: gradient_gap(t, 0.0, p.du[k], 0.0),
                ratio2_allowance: 2.0 * t.sin(),
            }
        })
        .collect()
}

fn grid_rows(g: &HemisphereGrid) -> Vec<AsymptoticsRow> {
    let (h, dphi, m) = (g.h(), g.dphi(), g.n_phi());
    let u = |i: usize, j: usize| g.get(i, j).exp();
    (0..3)
        .map(|i| {
            let t = g.theta(i);
            let mut row = AsymptoticsRow {
                theta: t,
                ratio1_min: f64::INFINITY,
                ratio1_max: f64::NEG_INFINITY,
                ratio2_max: 0.0,
                ratio2_allowance: 2.0 * t.sin(),
            };
            for j in 0..m {
                let u_t = if i == 0 {
                    (-3.0 * u(0, j) + 4.0 * u(1, j) - u(2, j)) / (2.0 * h)
                } else {
                    (u(i + 1, j) - u(i - 1, j)) / (2.0 * h)
                };
                let u_p = (u(i, (j + 1) % m) - u(i, (j + m - 1) % m)) / (2.0 * dphi);
                let r1 = u(i, j) / (2.0 * t.sin());
                row.ratio1_min = row.ratio1_min.min(r1);
                row.ratio1_max = row.ratio1_max.max(r1);
                row.ratio2_max = row.ratio2_max.max(gradient_gap(t, g.phi(j), u_t, u_p));
            }
            row
        })
        .collect()
}
