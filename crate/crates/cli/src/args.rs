use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Mesh generation, DMP auditing and benchmark runs for linear finite
/// elements with anisotropic diffusion.
#[derive(Debug, Parser)]
#[command(name = "dmpmesh", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a benchmark mesh.
    GenMesh(GenMeshArgs),
    /// Audit a mesh against the Delaunay-type and non-obtuse conditions.
    Check(CheckArgs),
    /// Solve the benchmark problem on a mesh.
    Solve(SolveArgs),
    /// Flip edges to remove Delaunay-type violations.
    Swap(SwapArgs),
    /// Benchmark refinement sweep on one mesh family.
    Sweep(SweepArgs),
    /// Plot the region of opposite-angle pairs satisfying the condition.
    Region(RegionArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pattern {
    Nw,
    Ne,
    Fourway,
    Delaunay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Centroid,
    ThreePoint,
}

#[derive(Debug, Args)]
pub struct GenMeshArgs {
    #[arg(long, value_enum)]
    pub pattern: Pattern,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub nx: u32,
    /// Defaults to `nx`.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub ny: Option<u32>,
    /// Interior point position within each cell (fourway only).
    #[arg(long)]
    pub fraction: Option<f64>,
    /// RNG seed (delaunay only).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Point jitter in cell widths (delaunay only).
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Domain as `x0,y0,x1,y1`; the benchmark square by default.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub domain: Option<Vec<f64>>,
    /// Output file; stdout if omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Where the diffusion tensor comes from.
#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct DiffusionArgs {
    /// The benchmark tensor and boundary data.
    #[arg(long, conflicts_with_all = ["d11", "field"])]
    pub benchmark: bool,
    #[arg(long, requires_all = ["d12", "d22"], conflicts_with = "field", allow_negative_numbers = true)]
    pub d11: Option<f64>,
    #[arg(long, requires_all = ["d11", "d22"], allow_negative_numbers = true)]
    pub d12: Option<f64>,
    #[arg(long, requires_all = ["d11", "d12"])]
    pub d22: Option<f64>,
    /// A built-in spatially varying tensor; see `--field list`.
    #[arg(long)]
    pub field: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    /// Angle slack in radians for the condition verdicts.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Quadrature rule for element-averaged tensors.
    #[arg(long, value_enum, default_value_t = Rule::ThreePoint)]
    pub rule: Rule,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, required = true)]
    pub benchmark: bool,
    /// Comma-separated contour levels.
    #[arg(long, value_delimiter = ',', requires = "svg", allow_negative_numbers = true)]
    pub contours: Option<Vec<f64>>,
    /// Where to write the contour plot.
    #[arg(long, requires = "contours")]
    pub svg: Option<PathBuf>,
    /// Conjugate gradient iteration cap (default 20 times the unknowns).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_iter: Option<u32>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SwapArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_passes: u32,
    #[arg(long, value_enum, default_value_t = Rule::ThreePoint)]
    pub rule: Rule,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub pattern: Pattern,
    /// Comma-separated square resolutions, at least four, increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub resolutions: Vec<usize>,
    #[arg(long, required = true)]
    pub benchmark: bool,
    #[arg(long, value_enum, default_value_t = Rule::ThreePoint)]
    pub rule: Rule,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// `det D_K' / det D_K`.
    #[arg(long)]
    pub det_ratio: f64,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
