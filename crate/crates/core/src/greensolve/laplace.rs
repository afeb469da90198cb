use super::sparse::{dot, CsrMatrix};
use super::GreenError;
use crate::geometry::{barycentric_areas, TriMesh};

/// Cotangent stiffness matrix (weak form of `−Δ_M`) and lumped barycentric
/// mass.
#[derive(Debug, Clone)]
pub struct LaplaceOperator {
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
}

pub fn assemble(mesh: &TriMesh) -> LaplaceOperator {
    let v = mesh.vertices();
    let mut trip = Vec::with_capacity(mesh.num_faces() * 12);
    for &[a, b, c] in mesh.faces() {
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            // Angle at i, opposite edge (j, k).
            let (u, w) = (v[j] - v[i], v[k] - v[i]);
            let half_cot = 0.5 * u.dot(&w) / u.cross(&w).norm();
            trip.push((j, k, -half_cot));
            trip.push((k, j, -half_cot));
            trip.push((j, j, half_cot));
            trip.push((k, k, half_cot));
        }
    }
    LaplaceOperator {
        stiffness: CsrMatrix::from_triplets(mesh.num_vertices(), trip),
        mass: barycentric_areas(mesh),
    }
}

impl LaplaceOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        dot(f, &self.stiffness.apply(f))
    }

    /// Largest `|Σ_j S_ij|` relative to the largest diagonal entry.
    pub fn max_row_sum(&self) -> f64 {
        let dmax = self.stiffness.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        (0..self.dim())
            .map(|i| self.stiffness.row(i).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
            / dmax
    }

    /// Mass-weighted mean.
    pub fn mean(&self, f: &[f64]) -> f64 {
        dot(f, &self.mass) / self.total_mass()
    }

    /// Subtracts the mass-weighted mean in place.
    pub fn project_mean_zero(&self, f: &mut [f64]) {
        let m = self.mean(f);
        f.iter_mut().for_each(|x| *x -= m);
    }

    /// Smallest nonzero eigenvalue of `S v = λ M v` by inverse iteration on
    /// the complement of the constants, starting from `start`.
    pub fn smallest_nonzero_eigenvalue(
        &self,
        start: &[f64],
        iterations: usize,
    ) -> Result<f64, GreenError> {
        let n = self.dim();
        let mut x = start.to_vec();
        self.project_mean_zero(&mut x);
        let mut lambda = f64::NAN;
        for _ in 0..iterations {
            let mnorm = dot(&x, &x.iter().zip(&self.mass).map(|(a, m)| a * m).collect::<Vec<_>>()).sqrt();
            x.iter_mut().for_each(|a| *a /= mnorm);
            lambda = self.quadratic_form(&x);
            let rhs: Vec<f64> = x.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
            let mut y = vec![0.0; n];
            let st = self.stiffness.solve_pcg(&rhs, &mut y, super::SOLVE_RTOL, 20 * n);
            if !st.converged {
                return Err(GreenError::NotConverged {
                    iterations: st.iterations,
                    relative_residual: st.relative_residual,
                });
            }
            self.project_mean_zero(&mut y);
            x = y;
        }
        Ok(lambda)
    }
}
