//! Kelvin transform `Φ(y) = y/|y|²` of analytic surfaces: conformality of
//! the pull-back metric and the Gaussian-curvature correspondence of the
//! image surface.

use nalgebra::{Matrix2, Matrix3};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{ParamSurface, Vec3};

pub const SINGULAR_RADIUS: f64 = 1e-12;
pub const CONFORMAL_MIN_RADIUS: f64 = 1e-3;
pub const ORIGIN_EXCLUSION: f64 = 0.05;
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum KelvinError {
    #[error("point at distance {0:e} from the origin maps to infinity")]
    Singular(f64),
}

pub fn kelvin_point(y: &Vec3) -> Result<Vec3, KelvinError> {
    let r2 = y.norm_squared();
    if r2.sqrt() <= SINGULAR_RADIUS {
        return Err(KelvinError::Singular(r2.sqrt()));
    }
    Ok(y / r2)
}

/// Differential `DΦ_x[v] = v/|x|² − 2⟨x,v⟩x/|x|⁴`.
pub fn kelvin_differential(x: &Vec3, v: &Vec3) -> Vec3 {
    let r2 = x.norm_squared();
    v / r2 - x * (2.0 * x.dot(v) / (r2 * r2))
}

/// Second differential `D²Φ_x[v, w]`.
pub fn kelvin_second_differential(x: &Vec3, v: &Vec3, w: &Vec3) -> Vec3 {
    let r2 = x.norm_squared();
    let (xv, xw) = (x.dot(v), x.dot(w));
    (v * xw + w * xv + x * v.dot(w)) * (-2.0 / (r2 * r2)) + x * (8.0 * xv * xw / (r2 * r2 * r2))
}

/// For each sample, the largest entry of `|y|⁴·G − I`, where `G` is the
/// Gram matrix of `DΦ` applied to an orthonormal tangent basis. Scaling by
/// `|y|⁴` makes the gap relative to the conformal factor.
pub fn conformal_factor_check(surface: &ParamSurface, samples: &[Vec3]) -> Result<Vec<f64>, KelvinError> {
    samples
        .iter()
        .map(|y| {
            let r = y.norm();
            if r < CONFORMAL_MIN_RADIUS {
                return Err(KelvinError::Singular(r));
            }
            let (t1, t2) = crate::geometry::tangent_basis(&surface.normal(y));
            let (a, b) = (kelvin_differential(y, &t1), kelvin_differential(y, &t2));
            let r4 = r.powi(4);
            let gram = Matrix2::new(a.dot(&a), a.dot(&b), b.dot(&a), b.dot(&b)) * r4;
            Ok((gram - Matrix2::identity()).abs().max())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureMethod {
    ClosedForm,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrespondenceReport {
    pub surface: String,
    pub sample_count: usize,
    pub skipped: usize,
    pub max_residual: f64,
    pub method: CurvatureMethod,
    pub residuals: Vec<f64>,
}

/// Gaussian curvature of an immersion from its first and second
/// derivatives `Y_s, Y_t, Y_ss, Y_st, Y_tt`.
fn gauss_from_jet(ys: &Vec3, yt: &Vec3, yss: &Vec3, yst: &Vec3, ytt: &Vec3) -> f64 {
    let n = ys.cross(yt).normalize();
    let first = ys.dot(ys) * yt.dot(yt) - ys.dot(yt).powi(2);
    let second = yss.dot(&n) * ytt.dot(&n) - yst.dot(&n).powi(2);
    second / first
}

/// Gaussian curvature of `Φ(M)` at `Φ(q)`, by the chain rule through the
/// closed-form second fundamental form in a tangent chart at `q`.
pub fn image_gauss_closed_form(surface: &ParamSurface, q: &Vec3) -> f64 {
    let n = surface.normal(q);
    let (t1, t2) = crate::geometry::tangent_basis(&n);
    let ii = surface.second_fundamental(q, &t1, &t2);
    // Chart X(s,t) = q + s t1 + t t2 − ½ II(s,t) n + …
    let x_ab = |a: usize, b: usize| -n * ii[(a, b)];
    let t = [t1, t2];
    let y_a = |a: usize| kelvin_differential(q, &t[a]);
    let y_ab = |a: usize, b: usize| kelvin_differential(q, &x_ab(a, b)) + kelvin_second_differential(q, &t[a], &t[b]);
    gauss_from_jet(&y_a(0), &y_a(1), &y_ab(0, 0), &y_ab(0, 1), &y_ab(1, 1))
}

/// Offset `d = e + λn` from the surface point `q` such that `q + d` lies
/// on the surface (the root nearest to `q + e`). The implicit equation is
/// expanded about `q`, so `d` keeps relative precision for small `e`.
fn lift_offset(surface: &ParamSurface, q: &Vec3, e: &Vec3, n: &Vec3) -> Vec3 {
    let ax = surface.semiaxes();
    let inv2 = ax.component_mul(&ax).map(|v| 1.0 / v);
    let dq = q - surface.center();
    let base = dq.component_mul(&dq).dot(&inv2) - 1.0;
    let qa = n.component_mul(n).dot(&inv2);
    let qb = 2.0 * (dq + e).component_mul(n).dot(&inv2);
    let qc = base + (dq * 2.0 + e).component_mul(e).dot(&inv2);
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let big = -0.5 * (qb + qb.signum() * disc);
    let lambda = if big == 0.0 { 0.0 } else { qc / big };
    e + n * lambda
}

/// Gaussian curvature of `Φ(M)` at `Φ(q)` from central differences of
/// `Φ∘X` in a normal-graph chart, Richardson-extrapolated over `h`, `h/2`.
///
/// The differenced quantity is `Φ(q + d) − Φ(q)`, evaluated without
/// cancellation; differencing `Φ(q + d)` itself loses about
/// `ε|Φ(q)|/h²` and breaks 1e-8 near the origin ball at `h = 1e-5`.
pub fn image_gauss_finite_difference(surface: &ParamSurface, q: &Vec3, h: f64) -> f64 {
    let n = surface.normal(q);
    let (t1, t2) = crate::geometry::tangent_basis(&n);
    let q2 = q.norm_squared();
    let y = |s: f64, t: f64| {
        let d = lift_offset(surface, q, &(t1 * s + t2 * t), &n);
        let grow = 2.0 * q.dot(&d) + d.norm_squared();
        let x2 = q2 + grow;
        d / x2 - q * (grow / (x2 * q2))
    };
    let jet = |h: f64| {
        let y0 = y(0.0, 0.0);
        let (sp, sm, tp, tm) = (y(h, 0.0), y(-h, 0.0), y(0.0, h), y(0.0, -h));
        let ys = (sp - sm) / (2.0 * h);
        let yt = (tp - tm) / (2.0 * h);
        let yss = (sp - y0 * 2.0 + sm) / (h * h);
        let ytt = (tp - y0 * 2.0 + tm) / (h * h);
        let yst = (y(h, h) - y(h, -h) - y(-h, h) + y(-h, -h)) / (4.0 * h * h);
        [ys, yt, yss, yst, ytt]
    };
    let (a, b) = (jet(h), jet(0.5 * h));
    let r: Vec<Vec3> = (0..5).map(|k| (b[k] * 4.0 - a[k]) / 3.0).collect();
    gauss_from_jet(&r[0], &r[1], &r[2], &r[3], &r[4])
}

/// `K̃(Φ(q)) − |Φ(q)|⁻⁴ (K(q) − 1)` at each sample with `|q| ≥ 0.05`.
pub fn curvature_correspondence_residual(
    surface: &ParamSurface,
    samples: &[Vec3],
    method: CurvatureMethod,
    fd_step: f64,
) -> CorrespondenceReport {
    let mut residuals = Vec::with_capacity(samples.len());
    let mut skipped = 0;
    for q in samples {
        if q.norm() < ORIGIN_EXCLUSION {
            skipped += 1;
            continue;
        }
        let image = q / q.norm_squared();
        let kt = match method {
            CurvatureMethod::ClosedForm => image_gauss_closed_form(surface, q),
            CurvatureMethod::FiniteDifference => image_gauss_finite_difference(surface, q, fd_step),
        };
        residuals.push(kt - (surface.gauss_curvature(q) - 1.0) / image.norm_squared().powi(2));
    }
    CorrespondenceReport {
        surface: surface.label(),
        sample_count: residuals.len(),
        skipped,
        max_residual: residuals.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        method,
        residuals,
    }
}

/// Random surface points, uniform in `(cos θ, φ)` of the parametrisation.
pub fn sample_surface<R: Rng>(surface: &ParamSurface, count: usize, rng: &mut R) -> Vec<Vec3> {
    (0..count)
        .map(|_| {
            let theta = rng.gen_range(-1.0f64..1.0).acos();
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            surface.position(theta, phi)
        })
        .collect()
}

/// Jacobian matrix of `Φ` at `x`, `(I − 2x̂x̂ᵀ)/|x|²`.
pub fn kelvin_jacobian(x: &Vec3) -> Matrix3<f64> {
    let r2 = x.norm_squared();
    (Matrix3::identity() - x * x.transpose() * (2.0 / r2)) / r2
}
