use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use super::dual::Real;
use super::RadialError;

/// Log-radial function `ρ(θ, φ)` sampled on `[θ_c, π/2] × [0, 2π)`.
///
/// Row `i` sits at latitude `θ_c + i·h` with `h = (π/2 − θ_c)/(n_theta − 1)`,
/// so the last row is the pole. Column `j` sits at `φ = 2πj/n_phi`. Storage
/// is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HemisphereGrid {
    theta_collar: f64,
    n_theta: usize,
    n_phi: usize,
    rho: Vec<f64>,
}

pub const MIN_THETA_ROWS: usize = 6;
pub const MIN_PHI_COLS: usize = 8;

impl HemisphereGrid {
    pub fn new(theta_collar: f64, n_theta: usize, n_phi: usize, rho: Vec<f64>) -> Result<Self, RadialError> {
        let g = Self { theta_collar, n_theta, n_phi, rho };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), RadialError> {
        if !(self.theta_collar > 0.0 && self.theta_collar < FRAC_PI_4) {
            return Err(RadialError::Config(format!(
                "collar latitude {} outside (0, π/4)",
                self.theta_collar
            )));
        }
        if self.n_theta < MIN_THETA_ROWS || self.n_phi < MIN_PHI_COLS || !self.n_phi.is_multiple_of(2) {
            return Err(RadialError::Config(format!(
                "grid {}×{} needs at least {MIN_THETA_ROWS} rows and an even number (≥ {MIN_PHI_COLS}) of columns",
                self.n_theta, self.n_phi
            )));
        }
        if self.rho.len() != self.n_theta * self.n_phi {
            return Err(RadialError::Config(format!(
                "expected {} values, got {}",
                self.n_theta * self.n_phi,
                self.rho.len()
            )));
        }
        if let Some(k) = self.rho.iter().position(|x| !x.is_finite()) {
            return Err(RadialError::Config(format!("non-finite value at index {k}")));
        }
        Ok(())
    }

    pub fn from_fn(
        theta_collar: f64,
        n_theta: usize,
        n_phi: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, RadialError> {
        let h = (FRAC_PI_2 - theta_collar) / (n_theta.max(2) - 1) as f64;
        let mut rho = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let theta = if i + 1 == n_theta { FRAC_PI_2 } else { theta_collar + i as f64 * h };
            for j in 0..n_phi {
                rho.push(f(theta, TAU * j as f64 / n_phi as f64));
            }
        }
        Self::new(theta_collar, n_theta, n_phi, rho)
    }

    /// `ρ = ln(2 sin θ)`.
    pub fn exact(theta_collar: f64, n_theta: usize, n_phi: usize) -> Result<Self, RadialError> {
        Self::from_fn(theta_collar, n_theta, n_phi, |t, _| (2.0 * t.sin()).ln())
    }

    /// `ρ = ln(2⟨c,x⟩)` with `c = (sin τ, 0, cos τ)`: the unit sphere through
    /// the origin tilted by `τ` towards `e₁`.
    pub fn tilted(theta_collar: f64, n_theta: usize, n_phi: usize, tilt: f64) -> Result<Self, RadialError> {
        Self::from_fn(theta_collar, n_theta, n_phi, |t, p| {
            (2.0 * (tilt.sin() * t.cos() * p.cos() + tilt.cos() * t.sin())).ln()
        })
    }

    /// Exact solution plus `a·sin 3φ·sin(θ−θ_c)·cos³θ`. The `cos³θ` factor
    /// makes the bump smooth across the pole, so the pole row stays
    /// φ-constant; an untapered bump has a kink there that Newton cannot
    /// remove on fine grids.
    pub fn perturbed(theta_collar: f64, n_theta: usize, n_phi: usize, amplitude: f64) -> Result<Self, RadialError> {
        Self::from_fn(theta_collar, n_theta, n_phi, |t, p| {
            (2.0 * t.sin()).ln() + amplitude * (3.0 * p).sin() * (t - theta_collar).sin() * t.cos().powi(3)
        })
    }

    pub fn theta_collar(&self) -> f64 {
        self.theta_collar
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn h(&self) -> f64 {
        (FRAC_PI_2 - self.theta_collar) / (self.n_theta - 1) as f64
    }

    pub fn dphi(&self) -> f64 {
        TAU / self.n_phi as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        if i + 1 == self.n_theta {
            FRAC_PI_2
        } else {
            self.theta_collar + i as f64 * self.h()
        }
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_phi as f64
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n_phi + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.rho[i * self.n_phi + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rho[i * self.n_phi..(i + 1) * self.n_phi]
    }

    /// Largest deviation of the pole row from its first entry.
    pub fn pole_spread(&self) -> f64 {
        let row = self.row(self.n_theta - 1);
        row.iter().map(|v| (v - row[0]).abs()).fold(0.0, f64::max)
    }

    /// Maximum absolute difference to another grid of the same shape.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.rho.iter().zip(&other.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, RadialError> {
        let g: Self = serde_json::from_str(text).map_err(|e| RadialError::Config(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    /// `ρ` at an arbitrary point of the hemisphere by bilinear interpolation
    /// in `(θ, φ)`; `None` below the collar.
    pub fn interpolate(&self, theta: f64, phi: f64) -> Option<f64> {
        if theta < self.theta_collar - 1e-14 {
            return None;
        }
        let s = ((theta - self.theta_collar) / self.h()).clamp(0.0, (self.n_theta - 1) as f64);
        let i0 = (s.floor() as usize).min(self.n_theta - 2);
        let ft = s - i0 as f64;
        let u = phi.rem_euclid(TAU) / self.dphi();
        let j0 = (u.floor() as usize) % self.n_phi;
        let fp = u - u.floor();
        let j1 = (j0 + 1) % self.n_phi;
        let row = |i: usize| self.get(i, j0) * (1.0 - fp) + self.get(i, j1) * fp;
        Some(row(i0) * (1.0 - ft) + row(i0 + 1) * ft)
    }

    pub(crate) fn stencil(&self) -> Stencil {
        Stencil::new(self.theta_collar, self.n_theta, self.n_phi)
    }
}

/// Residual field of the discretised equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualField {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Row-major; the Dirichlet row 0 is not evaluated and holds 0.
    pub values: Vec<f64>,
    pub max_abs: f64,
}

/// Residual of `div(∇ρ/W) + ½ e^{2ρ} W`, `W = √(1+|∇ρ|²)`, at every node
/// above the collar row.
///
/// Rows below latitude π/4 use a conservative second-order flux form.
/// Rows from π/4 up to the last ring use fourth-order central differences
/// of the expanded operator, continuing across the pole by `(θ, φ) ↦
/// (π − θ, φ + π)`. The pole row uses a Cartesian jet fitted from the first
/// two rings.
pub fn pde_residual(grid: &HemisphereGrid) -> ResidualField {
    let st = grid.stencil();
    let (n, m) = (grid.n_theta, grid.n_phi);
    let mut values = vec![0.0; n * m];
    let val = |r: usize, c: usize| grid.get(r, c);
    for i in 1..n - 1 {
        for j in 0..m {
            values[i * m + j] = if st.is_cap_row(i) {
                let patch = st.cap_patch(i, j, |r, c, _| val(r, c));
                cap_local(&patch, st.theta[i], st.h, st.dphi)
            } else {
                let patch = st.bulk_patch(i, j, |r, c, _| val(r, c));
                bulk_local(&patch, &st.bulk_geom(i))
            };
        }
    }
    let pole = st.pole_residual(grid.get(n - 1, 0), val);
    values[(n - 1) * m..].fill(pole);
    let max_abs = values[m..].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    ResidualField { n_theta: n, n_phi: m, values, max_abs }
}

/// Precomputed geometry of the stencils.
pub(crate) struct Stencil {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub dphi: f64,
    pub theta: Vec<f64>,
    pub cos: Vec<f64>,
    cos_phi: [Vec<f64>; 2],
    sin_phi: [Vec<f64>; 2],
}

pub(crate) struct BulkGeom {
    h: f64,
    dphi: f64,
    c: [f64; 3],
    ch_minus: f64,
    ch_plus: f64,
    pole_above: bool,
}

/// Linear weights of the pole jet `(gx, gy, hxx, hyy, hxy)`.
pub(crate) type JetWeights = [f64; 5];

impl Stencil {
    pub fn new(theta_collar: f64, n: usize, m: usize) -> Self {
        let h = (FRAC_PI_2 - theta_collar) / (n - 1) as f64;
        let theta: Vec<f64> =
            (0..n).map(|i| if i + 1 == n { FRAC_PI_2 } else { theta_collar + i as f64 * h }).collect();
        let cos = theta.iter().map(|t| t.cos()).collect();
        let dphi = TAU / m as f64;
        let trig = |k: f64, f: fn(f64) -> f64| (0..m).map(|j| f(k * j as f64 * dphi)).collect::<Vec<_>>();
        Self {
            n,
            m,
            h,
            dphi,
            theta,
            cos,
            cos_phi: [trig(1.0, f64::cos), trig(2.0, f64::cos)],
            sin_phi: [trig(1.0, f64::sin), trig(2.0, f64::sin)],
        }
    }

    pub fn is_cap_row(&self, i: usize) -> bool {
        i >= 2 && i + 1 < self.n && (self.theta[i] >= FRAC_PI_4 || i + 2 == self.n)
    }

    /// Storage row and column of extended index `(r, c)`; rows past the pole
    /// fold back with a half-turn in φ.
    pub fn source(&self, r: usize, c: isize) -> (usize, usize) {
        let m = self.m as isize;
        if r >= self.n {
            let back = 2 * (self.n - 1) - r;
            (back, (c + m / 2).rem_euclid(m) as usize)
        } else {
            (r, c.rem_euclid(m) as usize)
        }
    }

    pub fn bulk_geom(&self, i: usize) -> BulkGeom {
        BulkGeom {
            h: self.h,
            dphi: self.dphi,
            c: [self.cos[i - 1], self.cos[i], self.cos[i + 1]],
            ch_minus: (self.theta[i] - 0.5 * self.h).cos(),
            ch_plus: (self.theta[i] + 0.5 * self.h).cos(),
            pole_above: i + 2 == self.n,
        }
    }

    /// 3×3 patch around `(i, j)`; `f(row, col, slot)` supplies values.
    pub fn bulk_patch<T: Copy>(&self, i: usize, j: usize, f: impl Fn(usize, usize, usize) -> T) -> [[T; 3]; 3] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let (r, c) = self.source(i + a - 1, j as isize + b as isize - 1);
                f(r, c, a * 3 + b)
            })
        })
    }

    /// 5×5 patch around `(i, j)` with extension across the pole.
    pub fn cap_patch<T: Copy>(&self, i: usize, j: usize, f: impl Fn(usize, usize, usize) -> T) -> [[T; 5]; 5] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let (r, c) = self.source(i + a - 2, j as isize + b as isize - 2);
                f(r, c, a * 5 + b)
            })
        })
    }

    /// Jet weights for ring `k ∈ {1, 2}` (rows `n−2`, `n−3`) at column `j`.
    pub fn jet_weights(&self, ring: usize, j: usize) -> JetWeights {
        let (h, mf) = (self.h, self.m as f64);
        let (wg, wa) = if ring == 1 { (8.0, 16.0) } else { (-1.0, -1.0) };
        let g = wg / (6.0 * h) * 2.0 / mf;
        let a = wa / (12.0 * h * h) / mf;
        let b = wa / (12.0 * h * h) * 2.0 / mf;
        let (c2, s2) = (self.cos_phi[1][j], self.sin_phi[1][j]);
        [
            g * self.cos_phi[0][j],
            g * self.sin_phi[0][j],
            2.0 * (a + b * c2),
            2.0 * (a - b * c2),
            2.0 * b * s2,
        ]
    }

    /// Jet weights of the pole value itself.
    pub fn jet_pole_weights(&self) -> JetWeights {
        let a = -15.0 / (12.0 * self.h * self.h);
        [0.0, 0.0, 2.0 * a, 2.0 * a, 0.0]
    }

    pub fn pole_jet(&self, pole: f64, val: impl Fn(usize, usize) -> f64) -> JetWeights {
        let mut jet = self.jet_pole_weights().map(|w| w * pole);
        for ring in 1..=2 {
            let r = self.n - 1 - ring;
            for j in 0..self.m {
                let w = self.jet_weights(ring, j);
                let v = val(r, j);
                for k in 0..5 {
                    jet[k] += w[k] * v;
                }
            }
        }
        jet
    }

    pub fn pole_residual(&self, pole: f64, val: impl Fn(usize, usize) -> f64) -> f64 {
        let jet = self.pole_jet(pole, val);
        pole_local(pole, jet[0], jet[1], jet[2], jet[3], jet[4])
    }
}

pub(crate) fn bulk_local<T: Real>(r: &[[T; 3]; 3], g: &BulkGeom) -> T {
    let (h, dphi) = (g.h, g.dphi);
    let p = |a: usize| {
        if a == 2 && g.pole_above {
            T::cst(0.0)
        } else {
            (r[a][2] - r[a][0]) * (1.0 / (2.0 * dphi * g.c[a]))
        }
    };
    let flux = |lo: usize, ch: f64| {
        let rt = (r[lo + 1][1] - r[lo][1]) * (1.0 / h);
        let ph = (p(lo) + p(lo + 1)) * 0.5;
        rt * ch / (rt * rt + ph * ph + 1.0).sqrt()
    };
    let rt = |b: usize| (r[2][b] - r[0][b]) * (1.0 / (2.0 * h));
    let c = g.c[1];
    let gflux = |lo: usize| {
        let rph = (r[1][lo + 1] - r[1][lo]) * (1.0 / dphi);
        let rth = (rt(lo) + rt(lo + 1)) * 0.5;
        let q = rph * (1.0 / c);
        rph / (rth * rth + q * q + 1.0).sqrt()
    };
    let pc = p(1);
    let rtc = rt(1);
    let w = (rtc * rtc + pc * pc + 1.0).sqrt();
    (flux(1, g.ch_plus) - flux(0, g.ch_minus)) * (1.0 / (h * c))
        + (gflux(1) - gflux(0)) * (1.0 / (dphi * c * c))
        + (r[1][1] * 2.0).exp() * w * 0.5
}

fn d1<T: Real>(f: [T; 5], s: f64) -> T {
    (f[1] - f[3]) * (8.0 / (12.0 * s)) + (f[4] - f[0]) * (1.0 / (12.0 * s))
}

fn d2<T: Real>(f: [T; 5], s: f64) -> T {
    ((f[1] + f[3]) * 16.0 - (f[0] + f[4]) - f[2] * 30.0) * (1.0 / (12.0 * s * s))
}

/// Pointwise form at a cap node; patch rows run in increasing θ, the
/// central row being the node.
pub(crate) fn cap_local<T: Real>(r: &[[T; 5]; 5], theta: f64, h: f64, dphi: f64) -> T {
    // Reverse to the d1/d2 convention f[0..5] = values at offsets +2..−2.
    let rows = |b: usize| [r[4][b], r[3][b], r[2][b], r[1][b], r[0][b]];
    let cols = |a: usize| [r[a][4], r[a][3], r[a][2], r[a][1], r[a][0]];
    let dt = d1(rows(2), h);
    let dtt = d2(rows(2), h);
    let dp = d1(cols(2), dphi);
    let dpp = d2(cols(2), dphi);
    let dp_rows = [d1(cols(4), dphi), d1(cols(3), dphi), dp, d1(cols(1), dphi), d1(cols(0), dphi)];
    let dtp = d1(dp_rows, h);
    pointwise(r[2][2], dt, dp, dtt, dpp, dtp, theta)
}

fn pointwise<T: Real>(rho: T, dt: T, dp: T, dtt: T, dpp: T, dtp: T, theta: f64) -> T {
    let (s, c) = theta.sin_cos();
    let t = s / c;
    let q = dp * (1.0 / c);
    let w2 = dt * dt + q * q + 1.0;
    let w = w2.sqrt();
    let lap = dtt - dt * t + dpp * (1.0 / (c * c));
    let h_tp = (dtp + dp * t) * (1.0 / c);
    let h_pp = (dpp - dt * (s * c)) * (1.0 / (c * c));
    let hs = dtt * dt * dt + h_tp * dt * q * 2.0 + h_pp * q * q;
    (lap - hs / w2) / w + (rho * 2.0).exp() * w * 0.5
}

/// Euclidean form at the pole in geodesic normal coordinates.
pub(crate) fn pole_local<T: Real>(p: T, gx: T, gy: T, hxx: T, hyy: T, hxy: T) -> T {
    let w2 = gx * gx + gy * gy + 1.0;
    let w = w2.sqrt();
    let hs = hxx * gx * gx + hxy * gx * gy * 2.0 + hyy * gy * gy;
    ((hxx + hyy) - hs / w2) / w + (p * 2.0).exp() * w * 0.5
}
