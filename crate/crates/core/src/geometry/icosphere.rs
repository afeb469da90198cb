use std::collections::HashMap;

use super::{GeometryError, TriMesh, Vec3};

/// Largest accepted subdivision level (10·4⁸ + 2 = 655 362 vertices).
pub const MAX_LEVEL: u32 = 8;

/// Unit icosahedron with vertices at both poles, subdivided `level` times
/// with every new vertex projected back to the unit sphere.
pub fn unit_icosphere(level: u32) -> Result<TriMesh, GeometryError> {
    if level > MAX_LEVEL {
        return Err(GeometryError::LevelTooLarge { level, max: MAX_LEVEL });
    }
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..level {
        let (v, f) = subdivide(vertices, &faces);
        vertices = v;
        faces = f;
    }
    TriMesh::new(vertices, faces, None)
}

/// Icosphere of the given center and radius. When the sphere passes through
/// the origin the nearest vertex is snapped onto it and becomes the
/// basepoint.
pub fn gen_icosphere(level: u32, center: Vec3, radius: f64) -> Result<TriMesh, GeometryError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("radius {radius}")));
    }
    let mesh = unit_icosphere(level)?.map_vertices(|u| center + u * radius)?;
    if (center.norm() - radius).abs() <= 1e-12 * radius.max(1.0) {
        mesh.with_snapped_basepoint()
    } else {
        Ok(mesh)
    }
}

/// Axis-aligned ellipsoid obtained by stretching the unit icosphere.
pub fn gen_ellipsoid(level: u32, center: Vec3, semiaxes: Vec3) -> Result<TriMesh, GeometryError> {
    if semiaxes.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("semiaxes {semiaxes:?}")));
    }
    let mesh = unit_icosphere(level)?.map_vertices(|u| center + u.component_mul(&semiaxes))?;
    let implicit = center.component_div(&semiaxes).norm_squared() - 1.0;
    if implicit.abs() <= 1e-12 {
        mesh.with_snapped_basepoint()
    } else {
        Ok(mesh)
    }
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let z = 1.0 / 5f64.sqrt();
    let r = 2.0 / 5f64.sqrt();
    let mut v = vec![Vec3::new(0.0, 0.0, 1.0)];
    for k in 0..5 {
        let a = k as f64 * std::f64::consts::TAU / 5.0;
        v.push(Vec3::new(r * a.cos(), r * a.sin(), z));
    }
    for k in 0..5 {
        let a = (k as f64 + 0.5) * std::f64::consts::TAU / 5.0;
        v.push(Vec3::new(r * a.cos(), r * a.sin(), -z));
    }
    v.push(Vec3::new(0.0, 0.0, -1.0));

    let up = |k: usize| 1 + k % 5;
    let lo = |k: usize| 6 + k % 5;
    let mut f = Vec::with_capacity(20);
    for k in 0..5 {
        f.push([0, up(k), up(k + 1)]);
        f.push([up(k), lo(k), up(k + 1)]);
        f.push([up(k + 1), lo(k), lo(k + 1)]);
        f.push([11, lo(k + 1), lo(k)]);
    }
    // Orient outward; the icosahedron is convex and centred at the origin.
    for face in &mut f {
        let [a, b, c] = *face;
        let n = (v[b] - v[a]).cross(&(v[c] - v[a]));
        if n.dot(&(v[a] + v[b] + v[c])) < 0.0 {
            face.swap(1, 2);
        }
    }
    (v, f)
}

fn subdivide(mut vertices: Vec<Vec3>, faces: &[[usize; 3]]) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3 / 2);
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
            vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        out.push([a, ab, ca]);
        out.push([ab, b, bc]);
        out.push([ca, bc, c]);
        out.push([ab, bc, ca]);
    }
    (vertices, out)
}
