use std::collections::HashMap;

use nalgebra::Vector3;

use super::{GeometryError, Vec3};

/// Closed, consistently oriented triangle mesh in R³.
///
/// Construction goes through [`TriMesh::new`], which rejects open,
/// non-manifold, inconsistently oriented or degenerate input. The optional
/// basepoint is a vertex sitting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    basepoint: Option<usize>,
}

impl TriMesh {
    pub fn new(
        vertices: Vec<Vec3>,
        faces: Vec<[usize; 3]>,
        basepoint: Option<usize>,
    ) -> Result<Self, GeometryError> {
        let mesh = Self {
            vertices,
            faces,
            basepoint,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    /// Sum of face areas, accumulated in face order.
    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Euler characteristic V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        let edges = self.faces.len() * 3 / 2;
        self.vertices.len() as i64 - edges as i64 + self.faces.len() as i64
    }

    /// Applies `f` to every vertex and revalidates. The basepoint is kept only
    /// if its image still sits at the origin.
    pub fn map_vertices<F>(&self, f: F) -> Result<Self, GeometryError>
    where
        F: Fn(&Vec3) -> Vec3,
    {
        let vertices: Vec<Vec3> = self.vertices.iter().map(f).collect();
        let diag = bbox_diagonal(&vertices);
        let basepoint = self
            .basepoint
            .filter(|&b| vertices[b].norm() <= ORIGIN_TOL * diag);
        Self::new(vertices, self.faces.clone(), basepoint)
    }

    /// Moves the vertex nearest to the origin exactly onto it and marks it as
    /// the basepoint.
    pub fn with_snapped_basepoint(mut self) -> Result<Self, GeometryError> {
        let nearest = self
            .vertices
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .ok_or(GeometryError::NoFaces)?;
        self.vertices[nearest] = Vector3::zeros();
        self.basepoint = Some(nearest);
        self.validate()?;
        Ok(self)
    }

    /// Vertex indices sharing a face with `v`, sorted and deduplicated.
    pub fn one_ring(&self, v: usize) -> Vec<usize> {
        let mut ring: Vec<usize> = self
            .faces
            .iter()
            .filter(|f| f.contains(&v))
            .flat_map(|f| f.iter().copied())
            .filter(|&w| w != v)
            .collect();
        ring.sort_unstable();
        ring.dedup();
        ring
    }

    fn validate(&self) -> Result<(), GeometryError> {
        if self.faces.is_empty() {
            return Err(GeometryError::NoFaces);
        }
        let nv = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) {
                return Err(GeometryError::IndexOutOfRange { face: fi });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(GeometryError::DegenerateFace { face: fi, area: 0.0 });
            }
        }
        if let Some(v) = self.vertices.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::NonFiniteVertex { vertex: v });
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *directed.entry((a, b)).or_default() += 1;
                *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        // Report the smallest offending edge so messages are reproducible.
        let mut bad: Vec<(&(usize, usize), &usize)> =
            undirected.iter().filter(|(_, &n)| n != 2).collect();
        bad.sort();
        if let Some((&(a, b), &count)) = bad.first() {
            return Err(if count == 1 {
                GeometryError::OpenEdge { a, b }
            } else {
                GeometryError::NonManifoldEdge { a, b, count }
            });
        }
        let mut flipped: Vec<&(usize, usize)> = directed
            .iter()
            .filter(|(_, &n)| n > 1)
            .map(|(e, _)| e)
            .collect();
        flipped.sort();
        if let Some(&&(a, b)) = flipped.first() {
            return Err(GeometryError::InconsistentOrientation { a, b });
        }

        let diag = bbox_diagonal(&self.vertices);
        let min_area = 1e-14 * diag * diag;
        for fi in 0..self.faces.len() {
            let area = self.face_area(fi);
            if !(area >= min_area) {
                return Err(GeometryError::DegenerateFace { face: fi, area });
            }
        }
        if let Some(b) = self.basepoint {
            if b >= nv {
                return Err(GeometryError::BasepointOffOrigin { vertex: b, norm: f64::NAN });
            }
            let norm = self.vertices[b].norm();
            if norm > ORIGIN_TOL * diag {
                return Err(GeometryError::BasepointOffOrigin { vertex: b, norm });
            }
        }
        Ok(())
    }
}

pub(crate) const ORIGIN_TOL: f64 = 1e-12;

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

pub(crate) fn bbox_diagonal(vertices: &[Vec3]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> (Vec<Vec3>, Vec<[usize; 3]>) {
        let v = vec![
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(1.0, -1.0, -1.0),
            Vector3::new(-1.0, 1.0, -1.0),
            Vector3::new(-1.0, -1.0, 1.0),
        ];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        (v, f)
    }

    #[test]
    fn tetrahedron_is_valid() {
        let (v, f) = tetra();
        let m = TriMesh::new(v, f, None).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn open_mesh_names_edge() {
        let (v, mut f) = tetra();
        f.pop();
        let err = TriMesh::new(v, f, None).unwrap_err();
        assert!(matches!(err, GeometryError::OpenEdge { .. }), "{err}");
    }

    #[test]
    fn flipped_face_is_rejected() {
        let (v, mut f) = tetra();
        f[3] = [1, 2, 3];
        let err = TriMesh::new(v, f, None).unwrap_err();
        assert!(matches!(err, GeometryError::InconsistentOrientation { .. }), "{err}");
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let (mut v, f) = tetra();
        v[3] = (v[0] + v[1]) * 0.5;
        v[2] = v[0] * 0.25 + v[1] * 0.75;
        assert!(matches!(
            TriMesh::new(v, f, None),
            Err(GeometryError::DegenerateFace { .. })
        ));
    }

    #[test]
    fn basepoint_must_be_at_origin() {
        let (v, f) = tetra();
        assert!(matches!(
            TriMesh::new(v, f, Some(0)),
            Err(GeometryError::BasepointOffOrigin { .. })
        ));
    }
}
