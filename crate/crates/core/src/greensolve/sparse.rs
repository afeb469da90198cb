/// Compressed sparse row matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

impl CsrMatrix {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed
    /// in a fixed order so the result does not depend on input ordering
    /// beyond the sort.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// Largest `|A_ij − A_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Jacobi-preconditioned conjugate gradients for symmetric positive
    /// semidefinite `A` and consistent `b`. Stops when
    /// `‖b − A x‖ ≤ rtol·‖b‖`; the true residual is recomputed at the end.
    pub fn solve_pcg(&self, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> CgStats {
        let n = self.n;
        let inv_diag: Vec<f64> = self
            .diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        let bnorm = norm(b);
        if bnorm == 0.0 {
            x.fill(0.0);
            return CgStats { iterations: 0, relative_residual: 0.0, converged: true };
        }
        let target = rtol * bnorm;
        let mut r = vec![0.0; n];
        self.mul_vec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut iterations = 0;
        while iterations < max_iter && norm(&r) > target {
            self.mul_vec(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            // Periodically replace the recursive residual to stop drift.
            if iterations % 200 == 0 {
                self.mul_vec(x, &mut r);
                for i in 0..n {
                    r[i] = b[i] - r[i];
                }
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        self.mul_vec(x, &mut r);
        let res = b.iter().zip(&r).map(|(b, r)| (b - r) * (b - r)).sum::<f64>().sqrt();
        CgStats {
            iterations,
            relative_residual: res / bnorm,
            converged: res <= target,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, vec![(1, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5), (0, 1, 1.5)]);
        assert_eq!(m.get(1, 0), 1.5);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.max_asymmetry(), 0.0);
    }

    #[test]
    fn pcg_solves_spd_system() {
        // 1D Dirichlet Laplacian.
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.apply(&xs);
        let mut x = vec![0.0; n];
        let st = a.solve_pcg(&b, &mut x, 1e-12, 1000);
        assert!(st.converged);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}
