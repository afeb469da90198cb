use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::RadialError;

/// Latitude profile `u(θ) = e^{ρ(θ)}` with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub thetas: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// `u` at latitude `theta` by linear interpolation; `None` outside the
    /// profile.
    pub fn interpolate(&self, theta: f64) -> Option<f64> {
        let (first, last) = (*self.thetas.first()?, *self.thetas.last()?);
        if theta < first || theta > last {
            return None;
        }
        let k = self.thetas.partition_point(|&t| t <= theta).clamp(1, self.len() - 1);
        let (t0, t1) = (self.thetas[k - 1], self.thetas[k]);
        let s = (theta - t0) / (t1 - t0);
        Some(self.u[k - 1] * (1.0 - s) + self.u[k] * s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,u,du\n");
        for i in 0..self.len() {
            out.push_str(&format!("{:?},{:?},{:?}\n", self.thetas[i], self.u[i], self.du[i]));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeForm {
    Standard,
    /// Multiplied through by `cos θ`, used at the pole.
    CosMultiplied,
}

/// Left-hand side `u²u″ − u u′² − tan θ·u′(u²+u′²) + (u/2)(u²+u′²)²`.
/// At `θ = π/2` the equation multiplied by `cos θ` is returned instead.
pub fn ode_residual(u: f64, du: f64, ddu: f64, theta: f64) -> (f64, OdeForm) {
    let q = u * u + du * du;
    if theta == FRAC_PI_2 {
        return (-du * q, OdeForm::CosMultiplied);
    }
    let value = u * u * ddu - u * du * du - theta.tan() * du * q + 0.5 * u * q * q;
    (value, OdeForm::Standard)
}

/// Second derivative from the equation. At the pole `tan θ·u′` is replaced
/// by its limit `−u″` along a regular solution.
pub fn ode_rhs(theta: f64, u: f64, du: f64) -> f64 {
    let q = u * u + du * du;
    if theta == FRAC_PI_2 {
        (u * du * du - 0.5 * u * q * q) / (2.0 * u * u + du * du)
    } else {
        (u * du * du + theta.tan() * du * q - 0.5 * u * q * q) / (u * u)
    }
}

/// The exact-solution jet `(2 sin θ₀, 2 cos θ₀)`.
pub fn series_start(theta0: f64) -> Result<(f64, f64), RadialError> {
    if !(theta0 > 0.0 && theta0 <= 0.01) {
        return Err(RadialError::Config(format!("start latitude {theta0} outside (0, 0.01]")));
    }
    Ok((2.0 * theta0.sin(), 2.0 * theta0.cos()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AbortRecord {
    pub theta: f64,
    pub u: f64,
    pub du: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShootOutcome {
    pub profile: RadialProfile,
    /// Step actually used: `(π/2 − θ₀)/n` for the smallest `n` with step ≤ `h`.
    pub step: f64,
    pub abort: Option<AbortRecord>,
}

pub const BLOWUP_SLOPE: f64 = 1e6;

/// Classical RK4 from `θ₀` to `π/2` with a uniform step that lands exactly
/// on the pole. Integration stops, with an abort record, once `u ≤ 0`,
/// `|u′| > 10⁶` or a value is not finite.
pub fn shoot(theta0: f64, u0: f64, s0: f64, h: f64) -> Result<ShootOutcome, RadialError> {
    if !(u0 > 0.0) || !s0.is_finite() {
        return Err(RadialError::Config(format!("need u0 > 0 and finite s0, got ({u0}, {s0})")));
    }
    if !(h > 0.0 && h <= 1e-3) {
        return Err(RadialError::Config(format!("step {h} outside (0, 1e-3]")));
    }
    if !(1e-6..FRAC_PI_2).contains(&theta0) {
        return Err(RadialError::Config(format!("start latitude {theta0} outside [1e-6, π/2)")));
    }
    let n = ((FRAC_PI_2 - theta0) / h).ceil() as usize;
    let step = (FRAC_PI_2 - theta0) / n as f64;
    let node = |i: usize| if i == n { FRAC_PI_2 } else { theta0 + i as f64 * step };

    let mut profile = RadialProfile {
        thetas: Vec::with_capacity(n + 1),
        u: Vec::with_capacity(n + 1),
        du: Vec::with_capacity(n + 1),
    };
    let (mut u, mut p) = (u0, s0);
    profile.thetas.push(theta0);
    profile.u.push(u);
    profile.du.push(p);
    for i in 0..n {
        let (t, tn) = (node(i), node(i + 1));
        let tm = t + 0.5 * step;
        let k1u = p;
        let k1p = ode_rhs(t, u, p);
        let k2u = p + 0.5 * step * k1p;
        let k2p = ode_rhs(tm, u + 0.5 * step * k1u, p + 0.5 * step * k1p);
        let k3u = p + 0.5 * step * k2p;
        let k3p = ode_rhs(tm, u + 0.5 * step * k2u, p + 0.5 * step * k2p);
        let k4u = p + step * k3p;
        let k4p = ode_rhs(tn, u + step * k3u, p + step * k3p);
        u += step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        let reason = if !(u.is_finite() && p.is_finite()) {
            Some("non-finite")
        } else if u <= 0.0 {
            Some("u <= 0")
        } else if p.abs() > BLOWUP_SLOPE {
            Some("blow-up")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Ok(ShootOutcome {
                profile,
                step,
                abort: Some(AbortRecord { theta: tn, u, du: p, reason }),
            });
        }
        profile.thetas.push(tn);
        profile.u.push(u);
        profile.du.push(p);
    }
    Ok(ShootOutcome { profile, step, abort: None })
}

/// Distances from the pole at which the log-mode amplitude is fitted.
pub const POLE_FIT_DISTANCES: [f64; 3] = [2e-3, 4e-3, 6e-3];

/// Amplitude `C` of the singular mode `u′ ≈ −C/sin(π/2 − θ)` near the pole.
///
/// A perturbed profile picks up a logarithmic term at the pole, so the raw
/// slope `u′(π/2)` grows like `1/h` under refinement. Fitting
/// `sin(t)·u′ = −C + b t² + a t⁴` (with `t` the distance to the pole) on
/// three nodes gives a step-independent measure that vanishes exactly for
/// regular profiles.
pub fn pole_log_amplitude(profile: &RadialProfile, step: f64) -> Result<f64, RadialError> {
    let n = profile.len();
    if profile.thetas.last() != Some(&FRAC_PI_2) {
        return Err(RadialError::Config("profile does not reach the pole".into()));
    }
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for (row, &t) in POLE_FIT_DISTANCES.iter().enumerate() {
        let m = (t / step).round() as usize;
        if m == 0 || m >= n {
            return Err(RadialError::Config(format!("step {step} too coarse for the pole fit")));
        }
        let tt = m as f64 * step;
        a[(row, 0)] = 1.0;
        a[(row, 1)] = tt * tt;
        a[(row, 2)] = tt.powi(4);
        b[row] = tt.sin() * profile.du[n - 1 - m];
    }
    let sol = a.lu().solve(&b).ok_or_else(|| RadialError::Solver("singular pole fit".into()))?;
    Ok(-sol[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UniquenessReport {
    pub beta: f64,
    /// `|C|` from [`pole_log_amplitude`]; infinite when the shot aborted.
    pub pole_defect: f64,
    /// Raw `|u′(π/2)|`; infinite when the shot aborted.
    pub pole_slope: f64,
    pub u_pole: f64,
    pub abort_angle: Option<f64>,
    pub step: f64,
}

/// Shoots from `u0 = 2 sin θ₀ + β θ₀²`, `s0 = 2 cos θ₀` and measures pole
/// regularity.
pub fn uniqueness_probe(beta: f64, theta0: f64, h: f64) -> Result<UniquenessReport, RadialError> {
    if !(beta.abs() <= 10.0) {
        return Err(RadialError::Config(format!("|beta| = {} exceeds 10", beta.abs())));
    }
    let (u0, s0) = series_start(theta0)?;
    let out = shoot(theta0, u0 + beta * theta0 * theta0, s0, h)?;
    if let Some(ab) = out.abort {
        return Ok(UniquenessReport {
            beta,
            pole_defect: f64::INFINITY,
            pole_slope: f64::INFINITY,
            u_pole: f64::NAN,
            abort_angle: Some(ab.theta),
            step: out.step,
        });
    }
    let c = pole_log_amplitude(&out.profile, out.step)?;
    let last = out.profile.len() - 1;
    Ok(UniquenessReport {
        beta,
        pole_defect: c.abs(),
        pole_slope: out.profile.du[last].abs(),
        u_pole: out.profile.u[last],
        abort_angle: None,
        step: out.step,
    })
}

/// `F(M,P,Z,θ) = M − P²/Z − tan θ·P(Z²+P²)/Z² + (Z²+P²)²/(2Z)`.
pub fn operator_f(m: f64, p: f64, z: f64, theta: f64) -> Result<f64, RadialError> {
    check_domain(z, theta)?;
    let q = z * z + p * p;
    Ok(m - p * p / z - theta.tan() * p * q / (z * z) + q * q / (2.0 * z))
}

/// Partial derivatives `(F_M, F_P, F_Z)`.
pub fn linearized_coeffs(_m: f64, p: f64, z: f64, theta: f64) -> Result<(f64, f64, f64), RadialError> {
    check_domain(z, theta)?;
    let t = theta.tan();
    let (z2, p2) = (z * z, p * p);
    let q = z2 + p2;
    let f_p = -2.0 * p / z - t * (z2 + 3.0 * p2) / z2 + 2.0 * p * q / z;
    let f_z = p2 / z2 + 2.0 * t * p2 * p / (z2 * z) + q * (3.0 * z2 - p2) / (2.0 * z2);
    Ok((1.0, f_p, f_z))
}

fn check_domain(z: f64, theta: f64) -> Result<(), RadialError> {
    if !(z > 0.0) {
        return Err(RadialError::Domain(format!("Z must be positive, got {z}")));
    }
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(RadialError::Domain(format!("θ = {theta} outside (0, π/2)")));
    }
    Ok(())
}
