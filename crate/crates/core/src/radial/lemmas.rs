use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::Serialize;

use super::RadialError;

/// `V(v) = v/√(1+|v|²)`, the gradient of `√(1+|v|²)`.
pub fn field(v: &Vector2<f64>) -> Vector2<f64> {
    v / (1.0 + v.norm_squared()).sqrt()
}

/// `λ = (1+M²)^{3/2}`.
pub fn ellipticity_constant(m: f64) -> f64 {
    (1.0 + m * m).powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldGap {
    pub lambda: f64,
    pub lipschitz_ok: bool,
    pub monotone_ok: bool,
    /// `λ|b−a| − |V(b)−V(a)|`.
    pub lipschitz_margin: f64,
    /// `⟨V(b)−V(a), b−a⟩ − λ⁻¹|b−a|²`.
    pub monotone_margin: f64,
}

/// Checks `|V(b)−V(a)| ≤ λ|b−a|` and `⟨V(b)−V(a), b−a⟩ ≥ λ⁻¹|b−a|²` for
/// `|a|, |b| ≤ M`.
pub fn field_gap(a: &Vector2<f64>, b: &Vector2<f64>, m: f64) -> Result<FieldGap, RadialError> {
    if !(m >= 0.0) || a.norm() > m || b.norm() > m {
        return Err(RadialError::Domain(format!(
            "need |a|, |b| ≤ M, got {}, {} with M = {m}",
            a.norm(),
            b.norm()
        )));
    }
    let lambda = ellipticity_constant(m);
    let d = b - a;
    let dv = field(b) - field(a);
    let lip = lambda * d.norm() - dv.norm();
    let mono = dv.dot(&d) - d.norm_squared() / lambda;
    // Relative slack for rounding in the differences.
    let slack = 1e-12 * d.norm_squared();
    Ok(FieldGap {
        lambda,
        lipschitz_ok: lip >= -slack,
        monotone_ok: mono >= -slack,
        lipschitz_margin: lip,
        monotone_margin: mono,
    })
}

/// Eigenvalue window `[1/(2λ), 4λ³]` guaranteed by [`build_selfadjoint`].
pub fn selfadjoint_bounds(lambda: f64) -> (f64, f64) {
    (0.5 / lambda, 4.0 * lambda.powi(3))
}

/// Symmetric `A` with `A a = b`, built in the frame `(a/|a|, a⊥/|a|)` as
/// `[[b¹, b²], [b², 3λ³]]`.
///
/// Requires `a ≠ 0`, `λ ≥ 1`, `|b| ≤ λ|a|` and `⟨b,a⟩ ≥ λ⁻¹|a|²`.
pub fn build_selfadjoint(a: &Vector2<f64>, b: &Vector2<f64>, lambda: f64) -> Result<Matrix2<f64>, RadialError> {
    let na = a.norm();
    let tol = 1e-12 * (1.0 + na * na);
    if !(na > 0.0) || !(lambda >= 1.0) {
        return Err(RadialError::Domain(format!("need a ≠ 0 and λ ≥ 1, got |a| = {na}, λ = {lambda}")));
    }
    if b.norm() > lambda * na + tol || b.dot(a) < na * na / lambda - tol {
        return Err(RadialError::Domain(format!(
            "hypotheses fail: |b| = {}, λ|a| = {}, ⟨b,a⟩ = {}, |a|²/λ = {}",
            b.norm(),
            lambda * na,
            b.dot(a),
            na * na / lambda
        )));
    }
    let e1 = a / na;
    let e2 = Vector2::new(-e1.y, e1.x);
    let (b1, b2) = (b.dot(&e1) / na, b.dot(&e2) / na);
    let frame = Matrix2::new(b1, b2, b2, 3.0 * lambda.powi(3));
    let r = Matrix2::from_columns(&[e1, e2]);
    let m = r * frame * r.transpose();
    // Symmetrise the rounding of the rotation.
    Ok((m + m.transpose()) * 0.5)
}

/// Ascending eigenvalues of a symmetric 2×2 matrix.
pub fn eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let e = SymmetricEigen::new(*m).eigenvalues;
    (e[0].min(e[1]), e[0].max(e[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_points() {
        let a = Vector2::new(0.3, -0.4);
        let g = field_gap(&a, &a, 1.0).unwrap();
        assert!(g.lipschitz_ok && g.monotone_ok);
        assert_eq!(g.monotone_margin, 0.0);
    }

    #[test]
    fn unit_axes_example() {
        let g = field_gap(&Vector2::new(1.0, 0.0), &Vector2::new(0.0, 1.0), 1.0).unwrap();
        assert!((g.lambda - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!(g.lipschitz_ok && g.monotone_ok);
        assert!(field_gap(&Vector2::new(2.0, 0.0), &Vector2::zeros(), 1.0).is_err());
    }

    #[test]
    fn lambda_one_forces_identity_like() {
        let a = Vector2::new(0.6, 0.8);
        let m = build_selfadjoint(&a, &a, 1.0).unwrap();
        let (lo, hi) = eigenvalues(&m);
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
        assert!((m * a - a).norm() < 1e-15);
    }

    #[test]
    fn lambda_two_example() {
        let a = Vector2::new(1.0, 0.0);
        let b = Vector2::new(0.5, 1.0);
        let m = build_selfadjoint(&a, &b, 2.0).unwrap();
        assert_eq!(m, Matrix2::new(0.5, 1.0, 1.0, 24.0));
        let (lo, hi) = eigenvalues(&m);
        let (blo, bhi) = selfadjoint_bounds(2.0);
        assert!(lo >= blo && hi <= bhi);
    }

    #[test]
    fn rejects_violated_hypotheses() {
        let a = Vector2::new(1.0, 0.0);
        assert!(build_selfadjoint(&a, &Vector2::new(0.1, 0.0), 2.0).is_err());
        assert!(build_selfadjoint(&a, &Vector2::new(0.5, 3.0), 2.0).is_err());
        assert!(build_selfadjoint(&Vector2::zeros(), &a, 2.0).is_err());
        assert!(build_selfadjoint(&a, &a, 0.5).is_err());
    }
}
