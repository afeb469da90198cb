use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::Serialize;

use super::dual::Dual;
use super::grid::{bulk_local, cap_local, pole_local, HemisphereGrid, Stencil};
use super::RadialError;

pub const MAX_HALVINGS: usize = 30;
pub const POLE_SPREAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NewtonOutcome {
    pub grid: HemisphereGrid,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Max-norm residual before each iteration and after the last.
    pub history: Vec<f64>,
}

/// Unknowns: rows `1..n−1` (all columns) followed by the single pole value.
struct System {
    st: Stencil,
    base: HemisphereGrid,
}

impl System {
    fn len(&self) -> usize {
        (self.st.n - 2) * self.st.m + 1
    }

    fn unknown(&self, r: usize, c: usize) -> Option<usize> {
        match r {
            0 => None,
            r if r + 1 == self.st.n => Some(self.len() - 1),
            r => Some((r - 1) * self.st.m + c),
        }
    }

    fn grid_of(&self, x: &[f64]) -> HemisphereGrid {
        let mut g = self.base.clone();
        for r in 1..self.st.n {
            for c in 0..self.st.m {
                g.set(r, c, x[self.unknown(r, c).expect("interior")]);
            }
        }
        g
    }

    fn unknowns_of(&self, g: &HemisphereGrid) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        for r in 1..self.st.n - 1 {
            for c in 0..self.st.m {
                x[(r - 1) * self.st.m + c] = g.get(r, c);
            }
        }
        x[self.len() - 1] = g.get(self.st.n - 1, 0);
        x
    }

    /// Row weight `cos²θ`. The `∂_φφ/cos²θ` term next to the pole magnifies
    /// roundoff by `1/(h·Δφ)²`, which would otherwise put a floor near 1e-9
    /// under the residual at 128 rows.
    fn weight(&self, i: usize) -> f64 {
        self.st.cos[i] * self.st.cos[i]
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let g = self.grid_of(x);
        let (n, m) = (self.st.n, self.st.m);
        let mut out = vec![0.0; self.len()];
        for i in 1..n - 1 {
            let w = self.weight(i);
            for j in 0..m {
                let v = |r: usize, c: usize, _| g.get(r, c);
                out[(i - 1) * m + j] = w * if self.st.is_cap_row(i) {
                    cap_local(&self.st.cap_patch(i, j, v), self.st.theta[i], self.st.h, self.st.dphi)
                } else {
                    bulk_local(&self.st.bulk_patch(i, j, v), &self.st.bulk_geom(i))
                };
            }
        }
        out[self.len() - 1] = self.st.pole_residual(g.get(n - 1, 0), |r, c| g.get(r, c));
        out
    }

    fn jacobian(&self, x: &[f64]) -> Vec<Triplet<usize, usize, f64>> {
        let g = self.grid_of(x);
        let (n, m) = (self.st.n, self.st.m);
        let mut trip = Vec::with_capacity(self.len() * 26 + 2 * m);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(32);
        let flush = |eq: usize, row: &mut Vec<(usize, f64)>, trip: &mut Vec<Triplet<usize, usize, f64>>| {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let (col, mut v) = row[k];
                k += 1;
                while k < row.len() && row[k].0 == col {
                    v += row[k].1;
                    k += 1;
                }
                trip.push(Triplet::new(eq, col, v));
            }
            row.clear();
        };
        for i in 1..n - 1 {
            let w = self.weight(i);
            for j in 0..m {
                let eq = (i - 1) * m + j;
                if self.st.is_cap_row(i) {
                    let patch = self.st.cap_patch(i, j, |r, c, k| Dual::<25>::var(g.get(r, c), k));
                    let d = cap_local(&patch, self.st.theta[i], self.st.h, self.st.dphi);
                    let cols = self.st.cap_patch(i, j, |r, c, _| self.unknown(r, c));
                    for (k, col) in cols.iter().flatten().enumerate() {
                        if let Some(col) = col {
                            row.push((*col, w * d.d[k]));
                        }
                    }
                } else {
                    let patch = self.st.bulk_patch(i, j, |r, c, k| Dual::<9>::var(g.get(r, c), k));
                    let d = bulk_local(&patch, &self.st.bulk_geom(i));
                    let cols = self.st.bulk_patch(i, j, |r, c, _| self.unknown(r, c));
                    for (k, col) in cols.iter().flatten().enumerate() {
                        if let Some(col) = col {
                            row.push((*col, w * d.d[k]));
                        }
                    }
                }
                flush(eq, &mut row, &mut trip);
            }
        }
        // Pole equation: differentiate through the jet, then chain with its
        // linear weights.
        let pole = g.get(n - 1, 0);
        let jet = self.st.pole_jet(pole, |r, c| g.get(r, c));
        let v = |k: usize, val: f64| Dual::<6>::var(val, k);
        let d = pole_local(v(0, pole), v(1, jet[0]), v(2, jet[1]), v(3, jet[2]), v(4, jet[3]), v(5, jet[4]));
        let chain = |w: [f64; 5]| (0..5).map(|k| d.d[k + 1] * w[k]).sum::<f64>();
        let eq = self.len() - 1;
        row.push((eq, d.d[0] + chain(self.st.jet_pole_weights())));
        for ring in 1..=2 {
            let r = n - 1 - ring;
            for c in 0..m {
                if let Some(col) = self.unknown(r, c) {
                    row.push((col, chain(self.st.jet_weights(ring, c))));
                }
            }
        }
        flush(eq, &mut row, &mut trip);
        trip
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton iteration for the discretised equation with the collar row
/// held at `dirichlet` and the pole row constrained to a single value.
/// Interior equations are weighted by `cos²θ`; the pole equation is not.
///
/// `init` must have a φ-constant pole row (spread at most 1e-10). Each step is
/// halved (at most 30 times) until the Euclidean residual norm decreases;
/// the Newton direction is a descent direction for it, unlike the max-norm
/// used for the stopping test.
pub fn newton_solve(
    init: &HemisphereGrid,
    dirichlet: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome, RadialError> {
    let (n, m) = (init.n_theta(), init.n_phi());
    if dirichlet.len() != m {
        return Err(RadialError::Config(format!(
            "collar data has {} values, grid has {m} columns",
            dirichlet.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(RadialError::Config(format!("tolerance must be positive, got {tol}")));
    }
    let mut base = init.clone();
    for (j, &v) in dirichlet.iter().enumerate() {
        base.set(0, j, v);
    }
    if init.pole_spread() > POLE_SPREAD_TOL {
        return Err(RadialError::Config(format!(
            "pole row varies by {:e} in φ",
            init.pole_spread()
        )));
    }
    let pole_mean = base.row(n - 1).iter().sum::<f64>() / m as f64;
    for j in 0..m {
        base.set(n - 1, j, pole_mean);
    }
    let sys = System { st: base.stencil(), base };
    let mut x = sys.unknowns_of(&sys.base);
    let mut f = sys.residual(&x);
    let mut norm = max_norm(&f);
    let mut merit = l2_norm(&f);
    let mut history = vec![norm];
    let mut iterations = 0;
    while norm > tol {
        if iterations == max_iter {
            return Err(RadialError::NotConverged { iterations, residual: norm });
        }
        let trip = sys.jacobian(&x);
        let jac = SparseColMat::<usize, f64>::try_new_from_triplets(sys.len(), sys.len(), &trip)
            .map_err(|e| RadialError::Solver(format!("{e:?}")))?;
        let lu = jac.sp_lu().map_err(|e| RadialError::Solver(format!("{e:?}")))?;
        let rhs = Mat::from_fn(sys.len(), 1, |i, _| -f[i]);
        let dx = lu.solve(&rhs);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + step * dx[(i, 0)]).collect();
            let ft = sys.residual(&trial);
            let mt = l2_norm(&ft);
            if mt.is_finite() && mt < merit {
                x = trial;
                norm = max_norm(&ft);
                merit = mt;
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        history.push(norm);
        if !accepted {
            return Err(RadialError::NotConverged { iterations, residual: norm });
        }
    }
    Ok(NewtonOutcome { grid: sys.grid_of(&x), iterations, residual_norm: norm, history })
}
