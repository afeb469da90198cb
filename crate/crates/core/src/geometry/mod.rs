//! Surface representations: triangle meshes and analytic quadrics, mesh
//! generators, OFF/OBJ interchange and pointwise geometric measurements.

mod icosphere;
mod io;
mod measure;
mod mesh;
mod surface;

pub use icosphere::{gen_ellipsoid, gen_icosphere, unit_icosphere, MAX_LEVEL};
pub use io::{load_obj, load_off, read_off, save_off, write_off};
pub use measure::{
    angle_defects, barycentric_areas, mixed_areas, rescale_to_area, star_shape_check, vertex_geometry,
    vertex_normals, GeometrySample, StarShapeReport,
};
pub use mesh::{triangle_area, TriMesh};
pub use surface::{tangent_basis, ParamSurface, PrincipalFrame};

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("mesh has no faces")]
    NoFaces,
    #[error("face {face} references a vertex out of range")]
    IndexOutOfRange { face: usize },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteVertex { vertex: usize },
    #[error("edge ({a}, {b}) belongs to a single face: mesh is open")]
    OpenEdge { a: usize, b: usize },
    #[error("edge ({a}, {b}) belongs to {count} faces: mesh is non-manifold")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("directed edge ({a}, {b}) appears twice: inconsistent orientation")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("basepoint vertex {vertex} is not at the origin (|y| = {norm:e})")]
    BasepointOffOrigin { vertex: usize, norm: f64 },
    #[error("subdivision level {level} exceeds the maximum of {max}")]
    LevelTooLarge { level: u32, max: u32 },
    #[error("invalid surface parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("mesh has no basepoint at the origin")]
    MissingBasepoint,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
