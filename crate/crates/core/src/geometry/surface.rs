use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use serde::Serialize;

use super::{GeometryError, GeometrySample, Vec3};

/// Analytic closed surface: a sphere or an axis-aligned ellipsoid.
///
/// Both are level sets of the quadratic `F(x) = Σ ((x-c)_i / a_i)² - 1`, so
/// normals and curvatures come from the gradient and (constant) Hessian of
/// `F`. The sphere case short-circuits to the exact values `2/r` and `1/r²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamSurface {
    Sphere { center: [f64; 3], radius: f64 },
    Ellipsoid { center: [f64; 3], semiaxes: [f64; 3] },
}

/// Principal curvatures `k1 >= k2` with unit tangent directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalFrame {
    pub k1: f64,
    pub k2: f64,
    pub d1: Vec3,
    pub d2: Vec3,
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl ParamSurface {
    pub fn sphere(center: Vec3, radius: f64) -> Result<Self, GeometryError> {
        if !positive(radius) || !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self::Sphere { center: center.into(), radius })
    }

    pub fn ellipsoid(center: Vec3, semiaxes: Vec3) -> Result<Self, GeometryError> {
        if !semiaxes.iter().all(|&a| positive(a)) || !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!(
                "semiaxes must be positive, got ({}, {}, {})",
                semiaxes.x, semiaxes.y, semiaxes.z
            )));
        }
        Ok(Self::Ellipsoid { center: center.into(), semiaxes: semiaxes.into() })
    }

    pub fn center(&self) -> Vec3 {
        match self {
            Self::Sphere { center, .. } | Self::Ellipsoid { center, .. } => Vec3::from(*center),
        }
    }

    pub fn semiaxes(&self) -> Vec3 {
        match *self {
            Self::Sphere { radius, .. } => Vec3::repeat(radius),
            Self::Ellipsoid { semiaxes, .. } => Vec3::from(semiaxes),
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Self::Sphere { .. })
    }

    pub fn label(&self) -> String {
        let c = self.center();
        match *self {
            Self::Sphere { radius, .. } => {
                format!("sphere(center=({}, {}, {}), radius={})", c.x, c.y, c.z, radius)
            }
            Self::Ellipsoid { semiaxes: [a, b, s], .. } => format!(
                "ellipsoid(center=({}, {}, {}), semiaxes=({a}, {b}, {s}))",
                c.x, c.y, c.z
            ),
        }
    }

    /// Whether the origin lies on the surface (implicit value within 1e-12).
    pub fn passes_through_origin(&self) -> bool {
        self.implicit(&Vec3::zeros()).abs() <= 1e-12
    }

    /// `X(θ, φ) = c + D (sin θ cos φ, sin θ sin φ, cos θ)` with polar angle θ.
    pub fn position(&self, theta: f64, phi: f64) -> Vec3 {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        self.center() + self.semiaxes().component_mul(&Vec3::new(st * cp, st * sp, ct))
    }

    pub fn implicit(&self, x: &Vec3) -> f64 {
        (x - self.center()).component_div(&self.semiaxes()).norm_squared() - 1.0
    }

    pub fn implicit_gradient(&self, x: &Vec3) -> Vec3 {
        let a = self.semiaxes();
        (x - self.center()).component_div(&a.component_mul(&a)) * 2.0
    }

    /// Constant Hessian `2 D⁻²` of the implicit function.
    pub fn implicit_hessian(&self) -> Matrix3<f64> {
        let a = self.semiaxes();
        Matrix3::from_diagonal(&Vec3::new(2.0 / (a.x * a.x), 2.0 / (a.y * a.y), 2.0 / (a.z * a.z)))
    }

    /// Outward unit normal at a surface point.
    pub fn normal(&self, x: &Vec3) -> Vec3 {
        match *self {
            Self::Sphere { radius, .. } => (x - self.center()) / radius,
            Self::Ellipsoid { .. } => self.implicit_gradient(x).normalize(),
        }
    }

    /// Mean curvature `κ₁ + κ₂` for the outward normal.
    pub fn mean_curvature(&self, x: &Vec3) -> f64 {
        match *self {
            Self::Sphere { radius, .. } => 2.0 / radius,
            Self::Ellipsoid { .. } => {
                let g = self.implicit_gradient(x);
                let gn = g.norm();
                let n = g / gn;
                let h = self.implicit_hessian();
                (h.trace() - n.dot(&(h * n))) / gn
            }
        }
    }

    pub fn gauss_curvature(&self, x: &Vec3) -> f64 {
        match *self {
            Self::Sphere { radius, .. } => 1.0 / (radius * radius),
            Self::Ellipsoid { .. } => {
                let g = self.implicit_gradient(x);
                let h = self.implicit_hessian();
                let adj = Vec3::new(h[(1, 1)] * h[(2, 2)], h[(0, 0)] * h[(2, 2)], h[(0, 0)] * h[(1, 1)]);
                g.component_mul(&g).dot(&adj) / g.norm_squared().powi(2)
            }
        }
    }

    /// Second fundamental form in an orthonormal tangent basis `(t1, t2)`,
    /// sign chosen so that the sphere has positive curvatures.
    pub fn second_fundamental(&self, x: &Vec3, t1: &Vec3, t2: &Vec3) -> Matrix2<f64> {
        let g = self.implicit_gradient(x).norm();
        let h = self.implicit_hessian();
        let e = |u: &Vec3, v: &Vec3| u.dot(&(h * v)) / g;
        Matrix2::new(e(t1, t1), e(t1, t2), e(t2, t1), e(t2, t2))
    }

    pub fn principal(&self, x: &Vec3) -> PrincipalFrame {
        let n = self.normal(x);
        let (t1, t2) = tangent_basis(&n);
        let ii = self.second_fundamental(x, &t1, &t2);
        let eig = SymmetricEigen::new(ii);
        let (i1, i2) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
        let dir = |i: usize| (t1 * eig.eigenvectors[(0, i)] + t2 * eig.eigenvectors[(1, i)]).normalize();
        let (mut k1, mut k2) = (eig.eigenvalues[i1], eig.eigenvalues[i2]);
        if let Self::Sphere { radius, .. } = *self {
            k1 = 1.0 / radius;
            k2 = k1;
        }
        PrincipalFrame { k1, k2, d1: dir(i1), d2: dir(i2) }
    }

    /// Closed-form measurements at a surface point. The support quotient is
    /// omitted when the point is the origin.
    pub fn sample(&self, x: &Vec3) -> GeometrySample {
        let normal = self.normal(x);
        let r2 = x.norm_squared();
        GeometrySample {
            point: *x,
            normal,
            h: self.mean_curvature(x),
            k: self.gauss_curvature(x),
            support_quotient: (r2 > 0.0).then(|| x.dot(&normal) / r2),
        }
    }

    /// Samples on an `n_theta × n_phi` parameter grid with cell-centred polar
    /// angles, which keeps the poles (and a basepoint sitting on one) out.
    pub fn sample_grid(&self, n_theta: usize, n_phi: usize) -> Vec<GeometrySample> {
        let mut out = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = (i as f64 + 0.5) * std::f64::consts::PI / n_theta as f64;
            for j in 0..n_phi {
                let phi = j as f64 * std::f64::consts::TAU / n_phi as f64;
                out.push(self.sample(&self.position(theta, phi)));
            }
        }
        out
    }

    pub fn area(&self) -> f64 {
        match *self {
            Self::Sphere { radius, .. } => 4.0 * std::f64::consts::PI * radius * radius,
            Self::Ellipsoid { semiaxes: [a, b, c], .. } => ellipsoid_area(a, b, c),
        }
    }

    /// Image under the homothety `x ↦ s·x` about the origin.
    pub fn scaled(&self, s: f64) -> Self {
        let c: [f64; 3] = (self.center() * s).into();
        match *self {
            Self::Sphere { radius, .. } => Self::Sphere { center: c, radius: radius * s },
            Self::Ellipsoid { semiaxes, .. } => {
                Self::Ellipsoid { center: c, semiaxes: (Vec3::from(semiaxes) * s).into() }
            }
        }
    }

    /// Rescaled about the origin to total area `target`; returns the surface
    /// and the scale factor.
    pub fn normalized_to_area(&self, target: f64) -> (Self, f64) {
        let s = (target / self.area()).sqrt();
        (self.scaled(s), s)
    }

    /// Height of the lower sheet above the horizontal point `(x, y)`, or
    /// `None` outside the vertical shadow of the surface.
    pub fn lower_height(&self, x: f64, y: f64) -> Option<f64> {
        let c = self.center();
        let a = self.semiaxes();
        let w = ((x - c.x) / a.x).powi(2) + ((y - c.y) / a.y).powi(2);
        if w > 1.0 {
            return None;
        }
        // c3 - a3·sqrt(1-w) rewritten to avoid cancellation near the bottom.
        Some((c.z - a.z) + a.z * w / (1.0 + (1.0 - w).sqrt()))
    }
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `n`.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    (t1, n.cross(&t1))
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Surface area of the ellipsoid with semiaxes `(a, b, c)`: Gauss–Legendre
/// in `t = cos θ`, trapezoid (spectrally accurate) in the periodic `φ`.
fn ellipsoid_area(a: f64, b: f64, c: f64) -> f64 {
    let (ts, ws) = gauss_legendre(96);
    let n_phi = 256;
    let dphi = std::f64::consts::TAU / n_phi as f64;
    let mut total = 0.0;
    for (t, w) in ts.iter().zip(&ws) {
        let s2 = 1.0 - t * t;
        let mut ring = 0.0;
        for j in 0..n_phi {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            ring += (c * c * s2 * (b * b * cp * cp + a * a * sp * sp) + a * a * b * b * t * t).sqrt();
        }
        total += w * ring * dphi;
    }
    total
}
