use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::mesh::{bbox_diagonal, ORIGIN_TOL};
use super::{GeometryError, TriMesh, Vec3};

/// Writes OFF text. Coordinates use Rust's shortest round-trip formatting,
/// so a subsequent read reproduces them bit for bit.
pub fn write_off<W: Write>(mesh: &TriMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.num_vertices(), mesh.num_faces())?;
    for v in mesh.vertices() {
        writeln!(w, "{:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for [a, b, c] in mesh.faces() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    w.flush()
}

pub fn save_off(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    write_off(mesh, BufWriter::new(File::create(path)?))?;
    Ok(())
}

struct Tokens {
    items: Vec<(usize, String)>,
    pos: usize,
}

impl Tokens {
    fn new(text: &str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| {
                let line = line.split('#').next().unwrap_or("");
                line.split_whitespace().map(move |t| (i + 1, t.to_string()))
            })
            .collect();
        Self { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(0, |t| t.0)
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, GeometryError> {
        let line = self.line();
        let (_, tok) = self.items.get(self.pos).ok_or_else(|| GeometryError::Parse {
            line,
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        tok.parse().map_err(|_| GeometryError::Parse {
            line,
            msg: format!("expected {what}, found {tok:?}"),
        })
    }
}

/// Parses OFF text and validates the mesh. A vertex at the origin becomes
/// the basepoint.
pub fn read_off<R: Read>(mut r: R) -> Result<TriMesh, GeometryError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut t = Tokens::new(&text);
    let header: String = t.next("OFF header")?;
    if header != "OFF" {
        return Err(GeometryError::Parse { line: 1, msg: format!("bad header {header:?}") });
    }
    let nv: usize = t.next("vertex count")?;
    let nf: usize = t.next("face count")?;
    let _ne: usize = t.next("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(Vec3::new(t.next("x")?, t.next("y")?, t.next("z")?));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let line = t.line();
        let k: usize = t.next("face arity")?;
        if k != 3 {
            return Err(GeometryError::Parse { line, msg: format!("only triangles supported, got {k}-gon") });
        }
        faces.push([t.next("index")?, t.next("index")?, t.next("index")?]);
    }
    build(vertices, faces)
}

pub fn load_off(path: impl AsRef<Path>) -> Result<TriMesh, GeometryError> {
    read_off(File::open(path)?)
}

/// Reads `v` and `f` records of a Wavefront OBJ file; everything else is
/// ignored. Face entries may carry `/vt/vn` suffixes and negative indices.
pub fn load_obj(path: impl AsRef<Path>) -> Result<TriMesh, GeometryError> {
    let reader = BufReader::new(File::open(path)?);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let err = |msg: String| GeometryError::Parse { line: i + 1, msg };
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse().map_err(|_| err(format!("bad coordinate {s:?}"))))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|_| err(format!("bad index {s:?}")))?;
                        let n = vertices.len() as i64;
                        let z = if k < 0 { n + k } else { k - 1 };
                        if z < 0 {
                            return Err(err(format!("index {k} out of range")));
                        }
                        Ok(z as usize)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(err(format!("only triangles supported, got {}-gon", idx.len())));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    build(vertices, faces)
}

fn build(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<TriMesh, GeometryError> {
    let diag = bbox_diagonal(&vertices);
    let basepoint = vertices
        .iter()
        .enumerate()
        .filter(|(_, p)| p.norm() <= ORIGIN_TOL * diag)
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i);
    TriMesh::new(vertices, faces, basepoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gen_icosphere;

    #[test]
    fn off_round_trip_is_bit_exact() {
        let m = gen_icosphere(2, Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let mut buf = Vec::new();
        write_off(&m, &mut buf).unwrap();
        let back = read_off(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn triple_edge_is_rejected() {
        // Three triangles fanned around edge (0,1) plus filler faces.
        let text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 -1 0\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
        let err = read_off(text.as_bytes()).unwrap_err();
        assert!(
            matches!(err, GeometryError::NonManifoldEdge { a: 0, b: 1, count: 3 }),
            "{err}"
        );
    }

    #[test]
    fn zero_faces_is_rejected() {
        let text = "OFF\n3 0 0\n0 0 0\n1 0 0\n0 1 0\n";
        assert!(matches!(read_off(text.as_bytes()), Err(GeometryError::NoFaces)));
    }

    #[test]
    fn truncated_file_reports_parse_error() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0\n";
        assert!(matches!(read_off(text.as_bytes()), Err(GeometryError::Parse { .. })));
    }

    #[test]
    fn obj_import_matches_off() {
        let m = gen_icosphere(1, Vec3::zeros(), 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "# test\no sphere").unwrap();
        for v in m.vertices() {
            writeln!(f, "v {:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
        }
        for [a, b, c] in m.faces() {
            writeln!(f, "f {}/1 {} {}", a + 1, b + 1, c + 1).unwrap();
        }
        drop(f);
        assert_eq!(load_obj(&path).unwrap(), m);
    }
}
