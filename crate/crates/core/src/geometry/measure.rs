use super::{GeometryError, TriMesh, Vec3};

/// Pointwise geometric data at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub point: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    /// Mean curvature `κ₁ + κ₂` (unit sphere: 2).
    pub h: f64,
    /// Gaussian curvature.
    pub k: f64,
    /// `⟨y,ν⟩ / |y|²`; `None` where it is excluded or undefined.
    pub support_quotient: Option<f64>,
}

impl GeometrySample {
    pub fn support(&self) -> f64 {
        self.point.dot(&self.normal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarShapeReport {
    pub min_support: f64,
    pub max_support: f64,
    pub min_quotient: f64,
    pub sign_consistent: bool,
    pub excluded: usize,
}

fn corner(p: &Vec3, q: &Vec3, r: &Vec3) -> (f64, f64) {
    // Interior angle at p and its cotangent.
    let (u, v) = (q - p, r - p);
    let cross = u.cross(&v).norm();
    let dot = u.dot(&v);
    (cross.atan2(dot), dot / cross)
}

/// One third of the incident face areas per vertex.
pub fn barycentric_areas(mesh: &TriMesh) -> Vec<f64> {
    let mut area = vec![0.0; mesh.num_vertices()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let a = mesh.face_area(fi) / 3.0;
        for &v in f {
            area[v] += a;
        }
    }
    area
}

/// Mixed Voronoi areas: the circumcentric share of each non-obtuse face,
/// and half/quarter of an obtuse face's area split at its obtuse corner.
/// Positive on every valid mesh and summing to the total area.
pub fn mixed_areas(mesh: &TriMesh) -> Vec<f64> {
    let v = mesh.vertices();
    let mut area = vec![0.0; v.len()];
    for (fi, &[a, b, c]) in mesh.faces().iter().enumerate() {
        let fa = mesh.face_area(fi);
        let corners = [(a, b, c), (b, c, a), (c, a, b)].map(|(i, j, k)| corner(&v[i], &v[j], &v[k]));
        let obtuse = corners.iter().position(|(ang, _)| *ang > std::f64::consts::FRAC_PI_2);
        for (slot, (i, j, k)) in [(a, b, c), (b, c, a), (c, a, b)].into_iter().enumerate() {
            area[i] += match obtuse {
                Some(o) if o == slot => fa / 2.0,
                Some(_) => fa / 4.0,
                None => {
                    // cot at j weights edge ik, cot at k weights edge ij.
                    let cot_j = corners[(slot + 1) % 3].1;
                    let cot_k = corners[(slot + 2) % 3].1;
                    ((v[k] - v[i]).norm_squared() * cot_j + (v[j] - v[i]).norm_squared() * cot_k) / 8.0
                }
            };
        }
    }
    area
}

/// Angle-weighted vertex normals (unit length).
pub fn vertex_normals(mesh: &TriMesh) -> Vec<Vec3> {
    let v = mesh.vertices();
    let mut normals = vec![Vec3::zeros(); v.len()];
    for &[a, b, c] in mesh.faces() {
        let n = (v[b] - v[a]).cross(&(v[c] - v[a])).normalize();
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            normals[i] += n * corner(&v[i], &v[j], &v[k]).0;
        }
    }
    normals.iter().map(|n| n.normalize()).collect()
}

/// `2π − Σ` incident corner angles; sums to `2π·χ` over a closed mesh.
pub fn angle_defects(mesh: &TriMesh) -> Vec<f64> {
    let v = mesh.vertices();
    let mut sum = vec![0.0; v.len()];
    for &[a, b, c] in mesh.faces() {
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            sum[i] += corner(&v[i], &v[j], &v[k]).0;
        }
    }
    sum.iter().map(|s| std::f64::consts::TAU - s).collect()
}

/// Discrete normals and curvatures at every vertex.
///
/// `H = -⟨Δx, ν⟩` with `Δ` the cotangent Laplacian normalised by mixed
/// Voronoi area, `K` = angle defect / mixed area. Barycentric area leaves an
/// O(1) error on subdivided icospheres (about 0.29 in `H`). The support quotient is left
/// out at the basepoint and its one-ring.
pub fn vertex_geometry(mesh: &TriMesh) -> Vec<GeometrySample> {
    let v = mesh.vertices();
    let area = mixed_areas(mesh);
    let normals = vertex_normals(mesh);
    let defects = angle_defects(mesh);

    let mut lap = vec![Vec3::zeros(); v.len()];
    for &[a, b, c] in mesh.faces() {
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            // The angle at i is opposite edge jk.
            let w = 0.5 * corner(&v[i], &v[j], &v[k]).1;
            let d = (v[k] - v[j]) * w;
            lap[j] += d;
            lap[k] -= d;
        }
    }

    let mut excluded = vec![false; v.len()];
    if let Some(b) = mesh.basepoint() {
        excluded[b] = true;
        for w in mesh.one_ring(b) {
            excluded[w] = true;
        }
    }

    (0..v.len())
        .map(|i| {
            let n = normals[i];
            let r2 = v[i].norm_squared();
            GeometrySample {
                point: v[i],
                normal: n,
                h: -(lap[i] / area[i]).dot(&n),
                k: defects[i] / area[i],
                support_quotient: (!excluded[i] && r2 > 0.0).then(|| v[i].dot(&n) / r2),
            }
        })
        .collect()
}

/// Support function `⟨y,ν⟩` statistics away from the basepoint.
pub fn star_shape_check(mesh: &TriMesh) -> Result<StarShapeReport, GeometryError> {
    if mesh.basepoint().is_none() {
        return Err(GeometryError::MissingBasepoint);
    }
    let samples = vertex_geometry(mesh);
    let mut report = StarShapeReport {
        min_support: f64::INFINITY,
        max_support: f64::NEG_INFINITY,
        min_quotient: f64::INFINITY,
        sign_consistent: true,
        excluded: 0,
    };
    for s in &samples {
        let Some(q) = s.support_quotient else {
            report.excluded += 1;
            continue;
        };
        let p = s.support();
        report.min_support = report.min_support.min(p);
        report.max_support = report.max_support.max(p);
        report.min_quotient = report.min_quotient.min(q);
        report.sign_consistent &= p > 0.0;
    }
    Ok(report)
}

/// Scales about the origin so the total area equals `target`. Returns the
/// mesh and the scale factor.
pub fn rescale_to_area(mesh: &TriMesh, target: f64) -> Result<(TriMesh, f64), GeometryError> {
    let area = mesh.area();
    if !(area > 0.0) || !(target > 0.0) {
        return Err(GeometryError::Degenerate(format!(
            "cannot rescale area {area} to {target}"
        )));
    }
    let s = (target / area).sqrt();
    Ok((mesh.map_vertices(|x| x * s)?, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{gen_icosphere, unit_icosphere};
    use std::f64::consts::PI;

    #[test]
    fn gauss_bonnet_on_icosphere() {
        let m = gen_icosphere(3, Vec3::new(0.2, -0.1, 0.4), 1.3).unwrap();
        let total: f64 = angle_defects(&m).iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn barycentric_areas_sum_to_area() {
        let m = unit_icosphere(3).unwrap();
        let s: f64 = barycentric_areas(&m).iter().sum();
        assert!((s - m.area()).abs() < 1e-12 * m.area());
    }

    #[test]
    fn mixed_areas_sum_to_area() {
        let m = gen_icosphere(2, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let s: f64 = mixed_areas(&m).iter().sum();
        assert!((s - m.area()).abs() < 1e-12 * m.area());
        assert!(mixed_areas(&m).iter().all(|a| *a > 0.0));
    }

    #[test]
    fn level_five_unit_sphere_curvatures() {
        let m = unit_icosphere(5).unwrap();
        let g = vertex_geometry(&m);
        let eh = g.iter().map(|s| (s.h - 2.0).abs()).fold(0.0, f64::max);
        let ek = g.iter().map(|s| (s.k - 1.0).abs()).fold(0.0, f64::max);
        assert!(eh <= 0.05 && ek <= 0.05, "H err {eh}, K err {ek}");
        for s in &g {
            assert!(s.normal.dot(&s.point) > 0.0);
            assert!((s.normal.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_two_scales_curvature() {
        let m = gen_icosphere(4, Vec3::zeros(), 2.0).unwrap();
        for s in vertex_geometry(&m) {
            assert!((s.h - 1.0).abs() <= 0.05);
            assert!((s.k - 0.25).abs() <= 0.05 * 0.25);
        }
    }

    #[test]
    fn basepoint_ring_excluded() {
        let m = gen_icosphere(2, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let b = m.basepoint().unwrap();
        let g = vertex_geometry(&m);
        assert!(g[b].support_quotient.is_none());
        let excluded = g.iter().filter(|s| s.support_quotient.is_none()).count();
        assert_eq!(excluded, 1 + m.one_ring(b).len());
    }

    #[test]
    fn star_shape_on_sphere_through_origin() {
        let m = gen_icosphere(3, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let r = star_shape_check(&m).unwrap();
        assert!(r.sign_consistent && r.min_support > 0.0);
    }

    #[test]
    fn star_shape_needs_basepoint() {
        let m = unit_icosphere(1).unwrap();
        assert!(matches!(star_shape_check(&m), Err(GeometryError::MissingBasepoint)));
    }

    #[test]
    fn rescale_radius_two_sphere() {
        let m = gen_icosphere(3, Vec3::new(0.0, 0.0, 2.0), 2.0).unwrap();
        let (r, s) = rescale_to_area(&m, 4.0 * PI).unwrap();
        // Mesh area is below 16π, so the factor sits a little above 1/2.
        assert!((s - 0.5).abs() < 0.01);
        assert!((r.area() - 4.0 * PI).abs() < 1e-10 * 4.0 * PI);
        assert_eq!(r.basepoint(), m.basepoint());
    }
}
