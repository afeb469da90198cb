use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use grl_core::geometry::{
    gen_ellipsoid, gen_icosphere, load_obj, load_off, rescale_to_area, ParamSurface, TriMesh, Vec3,
};
use grl_core::radial::HemisphereGrid;
use serde_json::{json, Value};

pub const AREA: f64 = 4.0 * PI;

pub fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v = parse_list(s)?;
    match v.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected three comma-separated numbers, got {s:?}")),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number")))
        .collect()
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write plot data as CSV
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Seed for every randomized sweep
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Omit the meta block (timestamps, timings) for byte-identical output
    #[arg(long, global = true)]
    pub no_meta: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sphere,
    Ellipsoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    /// The identity holds up to the tolerance
    Hold,
    /// The identity fails by more than the threshold
    Violated,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long, value_enum, default_value = "sphere", conflicts_with = "mesh")]
    pub shape: Shape,
    /// Center x,y,z (default: on the z-axis, touching the origin)
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub center: Option<Vec3>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, value_parser = parse_vec3, default_value = "1,1,1.5")]
    pub semiaxes: Vec3,
    /// Triangle mesh (.off or .obj) instead of an inline shape
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Keep the inline shape's size instead of rescaling to area 4π
    #[arg(long)]
    pub no_normalize: bool,
    /// Subdivision level for generated meshes
    #[arg(long, default_value_t = 4)]
    pub level: u32,
}

impl SurfaceArgs {
    fn raw(&self) -> anyhow::Result<ParamSurface> {
        Ok(match self.shape {
            Shape::Sphere => {
                let c = self.center.unwrap_or(Vec3::new(0.0, 0.0, self.radius));
                ParamSurface::sphere(c, self.radius)?
            }
            Shape::Ellipsoid => {
                let c = self.center.unwrap_or(Vec3::new(0.0, 0.0, self.semiaxes.z));
                ParamSurface::ellipsoid(c, self.semiaxes)?
            }
        })
    }

    /// The inline shape, rescaled to area 4π unless `--no-normalize`.
    /// Returns the scale factor applied.
    pub fn analytic(&self) -> anyhow::Result<(ParamSurface, f64)> {
        if self.mesh.is_some() {
            bail!("this command needs an analytic surface; --mesh is not accepted");
        }
        let s = self.raw()?;
        Ok(if self.no_normalize { (s, 1.0) } else { s.normalized_to_area(AREA) })
    }

    pub fn is_mesh_file(&self) -> bool {
        self.mesh.is_some()
    }

    /// Mesh from the file, or generated from the inline shape and rescaled
    /// to area 4π unless `--no-normalize`. Generated meshes come with the
    /// analytic surface their vertices lie on.
    pub fn mesh(&self) -> anyhow::Result<MeshSource> {
        if let Some(path) = &self.mesh {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
            let mesh = match ext.as_str() {
                "obj" => load_obj(path),
                _ => load_off(path),
            }
            .with_context(|| format!("loading {}", path.display()))?;
            let info = json!({ "source": path.display().to_string(), "scale": 1.0 });
            return Ok(MeshSource { mesh, info, surface: None });
        }
        let s = self.raw()?;
        let mesh = match s {
            ParamSurface::Sphere { center, radius } => gen_icosphere(self.level, center.into(), radius)?,
            ParamSurface::Ellipsoid { center, semiaxes } => gen_ellipsoid(self.level, center.into(), semiaxes.into())?,
        };
        let (mesh, scale) = if self.no_normalize { (mesh, 1.0) } else { rescale_to_area(&mesh, AREA)? };
        let info = json!({ "source": s, "level": self.level, "scale": scale });
        Ok(MeshSource { mesh, info, surface: Some(s.scaled(scale)) })
    }
}

pub struct MeshSource {
    pub mesh: TriMesh,
    pub info: Value,
    pub surface: Option<ParamSurface>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// ρ = ln(2 sin θ)
    Exact,
    /// Exact solution plus a three-fold bump vanishing at collar and pole
    Perturbed,
    /// ρ = ln(2⟨c,x⟩) with c tilted by --tilt
    Tilted,
    /// ρ ≡ 0
    Zero,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub grid: GridKind,
    /// Read the grid from a JSON file instead
    #[arg(long)]
    pub load: Option<PathBuf>,
    /// Latitude rows (θ_c to π/2 inclusive)
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Longitude columns (default: same as --n)
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub theta_collar: f64,
    #[arg(long, default_value_t = 0.3)]
    pub tilt: f64,
    #[arg(long, default_value_t = 0.2)]
    pub amplitude: f64,
}

impl GridArgs {
    pub fn build(&self, kind: GridKind, n: usize) -> anyhow::Result<HemisphereGrid> {
        let m = self.n_phi.map_or(n, |p| p * n / self.n);
        let tc = self.theta_collar;
        Ok(match kind {
            GridKind::Exact => HemisphereGrid::exact(tc, n, m)?,
            GridKind::Perturbed => HemisphereGrid::perturbed(tc, n, m, self.amplitude)?,
            GridKind::Tilted => HemisphereGrid::tilted(tc, n, m, self.tilt)?,
            GridKind::Zero => HemisphereGrid::from_fn(tc, n, m, |_, _| 0.0)?,
        })
    }

    pub fn grid(&self) -> anyhow::Result<HemisphereGrid> {
        match &self.load {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(HemisphereGrid::from_json(&text)?)
            }
            None => self.build(self.grid, self.n),
        }
    }

    /// The same kind of grid at twice the resolution in both directions.
    pub fn refined(&self) -> anyhow::Result<HemisphereGrid> {
        if self.load.is_some() {
            bail!("--refine needs a generated grid, not --load");
        }
        self.build(self.grid, 2 * self.n)
    }
}

/// Worker cap from `GRL_THREADS`, defaulting to the available cores.
pub fn thread_cap() -> anyhow::Result<usize> {
    match std::env::var("GRL_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => bail!("GRL_THREADS must be a positive integer, got {v:?}"),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
