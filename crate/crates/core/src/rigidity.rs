//! Pointwise identities equivalent to the logarithmic Green function at the
//! origin, evaluated on closed-form or mesh samples.

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeometrySample, ParamSurface, Vec3};

#[derive(Debug, Error)]
pub enum RigidityError {
    #[error("radii must be positive and strictly decreasing, with at least two entries")]
    BadRadii,
    #[error("surface is not tangent to the horizontal plane at the origin")]
    NotTangentAtOrigin,
    #[error("radius {0} leaves the lower sheet of the surface")]
    RadiusTooLarge(f64),
    #[error("dimension n = {0} must be at least 3")]
    BadDimension(usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("sample {index} is off the sphere by {distance:e}")]
    OffSphere { index: usize, distance: f64 },
    #[error("sample {index} has dimension {got}, expected {expected}")]
    WrongDimension { index: usize, got: usize, expected: usize },
}

/// Residual `2⟨y,ν⟩²/|y|⁴ − H⟨y,ν⟩/|y|² + 1/2` at one point.
pub fn surface2_value(y: &Vec3, normal: &Vec3, h: f64) -> f64 {
    let r2 = y.norm_squared();
    let q = y.dot(normal) / r2;
    2.0 * q * q - h * q + 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Surface2Report {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub rms_residual: f64,
    /// Indices of samples with `⟨y,ν⟩ = 0`.
    pub singular: Vec<usize>,
    /// Samples without a support quotient (origin or basepoint ring).
    pub skipped: usize,
}

/// Evaluates the rigidity residual at every sample that carries a support
/// quotient. Residuals are listed in sample order, skipping the excluded.
pub fn surface2_residual(samples: &[GeometrySample]) -> Surface2Report {
    let mut residuals = Vec::with_capacity(samples.len());
    let mut singular = Vec::new();
    let mut skipped = 0;
    for (i, s) in samples.iter().enumerate() {
        let Some(q) = s.support_quotient else {
            skipped += 1;
            continue;
        };
        if q == 0.0 {
            singular.push(i);
        }
        residuals.push(2.0 * q * q - s.h * q + 0.5);
    }
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let rms_residual = if residuals.is_empty() {
        0.0
    } else {
        (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
    };
    Surface2Report { residuals, max_residual, rms_residual, singular, skipped }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MeanCurvatureRow {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub geq2: bool,
    pub singular: bool,
}

/// `a + 1/a` with `a = 2⟨y,ν⟩/|y|²`.
pub fn mean_curvature_rhs(a: f64) -> f64 {
    a + 1.0 / a
}

/// Compares `H` against `2⟨y,ν⟩/|y|² + |y|²/(2⟨y,ν⟩)`. Samples without a
/// support quotient are skipped; zero support is flagged with `rhs = NaN`.
pub fn mean_curvature_identity(samples: &[GeometrySample], tol: f64) -> Vec<MeanCurvatureRow> {
    samples
        .iter()
        .filter_map(|s| s.support_quotient.map(|q| (s.h, q)))
        .map(|(h, q)| {
            if q == 0.0 {
                return MeanCurvatureRow { lhs: h, rhs: f64::NAN, gap: f64::NAN, geq2: false, singular: true };
            }
            let rhs = mean_curvature_rhs(2.0 * q);
            MeanCurvatureRow { lhs: h, rhs, gap: h - rhs, geq2: rhs >= 2.0 - tol, singular: false }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UmbilicEstimate {
    pub direction: [f64; 3],
    /// Quotients `⟨y,ν⟩/|y|²` at each radius.
    pub quotients: Vec<f64>,
    /// Extrapolated limit from the two smallest radii.
    pub limit: f64,
    /// Half the principal curvature at the origin.
    pub expected: f64,
}

/// First-order Richardson extrapolation to `r = 0` from two radii.
pub fn richardson(ra: f64, qa: f64, rb: f64, qb: f64) -> f64 {
    (ra * qb - rb * qa) / (ra - rb)
}

/// Limits of the support quotient along the principal directions at the
/// origin, probing the lower sheet above `r·e_i`.
pub fn umbilic_probe(surface: &ParamSurface, radii: &[f64]) -> Result<Vec<UmbilicEstimate>, RigidityError> {
    if radii.len() < 2 || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(RigidityError::BadRadii);
    }
    let origin = Vec3::zeros();
    if !surface.passes_through_origin() || (surface.normal(&origin) + Vec3::z()).norm() > 1e-12 {
        return Err(RigidityError::NotTangentAtOrigin);
    }
    let frame = surface.principal(&origin);
    [(frame.d1, frame.k1), (frame.d2, frame.k2)]
        .into_iter()
        .map(|(d, k)| {
            let quotients = radii
                .iter()
                .map(|&r| {
                    let (x, y) = (r * d.x, r * d.y);
                    let z = surface.lower_height(x, y).ok_or(RigidityError::RadiusTooLarge(r))?;
                    let p = Vec3::new(x, y, z);
                    Ok(p.dot(&surface.normal(&p)) / p.norm_squared())
                })
                .collect::<Result<Vec<f64>, RigidityError>>()?;
            let n = radii.len();
            let limit = richardson(radii[n - 2], quotients[n - 2], radii[n - 1], quotients[n - 1]);
            Ok(UmbilicEstimate { direction: d.into(), quotients, limit, expected: 0.5 * k })
        })
        .collect()
}

pub const DEFAULT_UMBILIC_RADII: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalRow {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Checks `H = ⟨y,ν⟩/|y|² + R/(4n(n−1))·|y|²/⟨y,ν⟩` on the round
/// hypersphere of radius `r` in `R^{n+1}` centred at `r·e_{n+1}`, where `H`
/// is the averaged mean curvature `1/r` and `R = n(n−1)/r²`.
pub fn conformal_nd_check(n: usize, r: f64, samples: &[DVector<f64>]) -> Result<Vec<ConformalRow>, RigidityError> {
    if n < 3 {
        return Err(RigidityError::BadDimension(n));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(RigidityError::BadRadius(r));
    }
    let mut c = DVector::zeros(n + 1);
    c[n] = r;
    let nf = n as f64;
    let scalar = nf * (nf - 1.0) / (r * r);
    let h_avg = 1.0 / r;
    samples
        .iter()
        .enumerate()
        .map(|(index, y)| {
            if y.len() != n + 1 {
                return Err(RigidityError::WrongDimension { index, got: y.len(), expected: n + 1 });
            }
            let d = y - &c;
            let distance = (d.norm() - r).abs();
            if distance > 1e-10 {
                return Err(RigidityError::OffSphere { index, distance });
            }
            let nu = d / r;
            let y2 = y.norm_squared();
            let s = y.dot(&nu);
            let rhs = s / y2 + scalar / (4.0 * nf * (nf - 1.0)) * y2 / s;
            Ok(ConformalRow { lhs: h_avg, rhs, gap: h_avg - rhs })
        })
        .collect()
}

/// Uniform random points on the hypersphere of radius `r` through the
/// origin in `R^{n+1}`, keeping away from the origin by `0.01·r`.
pub fn sample_hypersphere<R: Rng>(n: usize, r: f64, count: usize, rng: &mut R) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // Marsaglia-style rejection in the cube, then project.
        let v: DVector<f64> = DVector::from_fn(n + 1, |_, _| rng.gen_range(-1.0..1.0));
        let len = v.norm();
        if !(len > 1e-3 && len <= 1.0) {
            continue;
        }
        let mut y: DVector<f64> = v * (r / len);
        y[n] += r;
        if y.norm() > 0.01 * r {
            out.push(y);
        }
    }
    out
}
