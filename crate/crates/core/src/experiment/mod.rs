//! The anisotropic benchmark: a strongly anisotropic constant tensor on
//! `[0,16]^2` with piecewise linear boundary data in `[0, 1]`, solved on
//! four mesh families, plus refinement sweeps, condition region maps and
//! contour output.

mod contour;
mod fields;
mod output;
mod region;

use std::fmt;
use std::str::FromStr;
use std::thread;

use crate::dmp::{
    check_m_matrix, edge_condition_report, measure_bounds, BoundsReport, ConditionReport,
    MMatrixReport, Tolerance,
};
use crate::error::{Error, Result};
use crate::fem::{assemble, LinearSystem, ProblemSpec, QuadratureRule};
use crate::geometry2d::{SpdTensor, Vec2};
use crate::mesh::{
    build_connectivity, generate_delaunay_mesh, generate_grid_mesh, DelaunayParams, GridPattern,
    Mesh, Rect, DEFAULT_FOURWAY_FRACTION,
};
use crate::solver::{solve_system, SolveOptions, SystemSolution};

pub use contour::{extract_contours, ContourSet};
pub use fields::{demo_field, DEMO_FIELDS};
pub use output::{contours_svg, parse_solution_csv, solution_csv, SvgCanvas};
pub use region::{sample_feasibility_region, RegionMap};

/// Overshoots and undershoots at or below this count as zero.
pub const BOUNDS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub domain: Rect,
    pub diffusion: SpdTensor,
}

pub fn benchmark_spec() -> BenchmarkSpec {
    BenchmarkSpec {
        domain: Rect::new(0.0, 0.0, 16.0, 16.0),
        diffusion: SpdTensor::new(500.5, 499.5, 500.5).expect("benchmark tensor is SPD"),
    }
}

impl BenchmarkSpec {
    /// Boundary data, continuous along the boundary:
    ///
    /// - `g = 0` on the bottom and right sides;
    /// - `g(0, y) = 0.5 y` for `y < 2`, and 1 above;
    /// - `g(x, 16) = 1` for `x <= 14`, and `8 - 0.5 x` beyond.
    ///
    /// Points off the boundary get 0.
    pub fn g(&self, p: Vec2) -> f64 {
        let d = self.domain;
        let eps = 1e-12 * d.width().max(d.height());
        let (x, y) = (p.x - d.x0, p.y - d.y0);
        if (p.y - d.y0).abs() <= eps || (p.x - d.x1).abs() <= eps {
            0.0
        } else if (p.x - d.x0).abs() <= eps {
            if y < 2.0 {
                0.5 * y
            } else {
                1.0
            }
        } else if (p.y - d.y1).abs() <= eps {
            if x <= 14.0 {
                1.0
            } else {
                8.0 - 0.5 * x
            }
        } else {
            0.0
        }
    }

    pub fn problem(&self) -> ProblemSpec {
        let b = *self;
        ProblemSpec::constant(self.diffusion).dirichlet(move |p| b.g(p))
    }
}

/// A mesh family on a rectangle: one of the structured grid patterns or a
/// seeded jittered Delaunay mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshFamily {
    Grid(GridPattern),
    Delaunay(DelaunayParams),
}

impl MeshFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Grid(p) => p.name(),
            MeshFamily::Delaunay(_) => "delaunay",
        }
    }

    pub fn generate(&self, domain: Rect, nx: usize, ny: usize) -> Result<Mesh> {
        match *self {
            MeshFamily::Grid(p) => generate_grid_mesh(domain, nx, ny, p),
            MeshFamily::Delaunay(params) => generate_delaunay_mesh(domain, nx, ny, params),
        }
    }

    pub fn all() -> [MeshFamily; 4] {
        [
            MeshFamily::Grid(GridPattern::Nw),
            MeshFamily::Grid(GridPattern::Ne),
            MeshFamily::Grid(GridPattern::FourWay(DEFAULT_FOURWAY_FRACTION)),
            MeshFamily::Delaunay(DelaunayParams::default()),
        ]
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `nw`, `ne`, `fourway` or `delaunay` with default parameters.
impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nw" => Ok(MeshFamily::Grid(GridPattern::Nw)),
            "ne" => Ok(MeshFamily::Grid(GridPattern::Ne)),
            "fourway" => Ok(MeshFamily::Grid(GridPattern::FourWay(DEFAULT_FOURWAY_FRACTION))),
            "delaunay" => Ok(MeshFamily::Delaunay(DelaunayParams::default())),
            other => Err(Error::InvalidParameter(format!("unknown mesh pattern '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub family: MeshFamily,
    pub nx: usize,
    pub ny: usize,
    pub mesh: Mesh,
    pub system: LinearSystem,
    pub condition: ConditionReport,
    pub m_matrix: MMatrixReport,
    pub bounds: BoundsReport,
    pub solution: SystemSolution,
}

/// Solver settings for the benchmark runs.
pub fn benchmark_solve_options() -> SolveOptions {
    SolveOptions {
        rel_tol: 1e-12,
        ..SolveOptions::default()
    }
}

/// Audits and solves `spec` on an existing mesh.
pub fn run_on_mesh(
    family: MeshFamily,
    nx: usize,
    ny: usize,
    mesh: Mesh,
    spec: &ProblemSpec,
    rule: &QuadratureRule,
) -> Result<CaseResult> {
    let topo = build_connectivity(&mesh)?;
    let tol = Tolerance::default();
    let condition = edge_condition_report(&mesh, &topo, spec, rule, &tol)?;
    let system = assemble(spec, &mesh, &topo, rule)?;
    let m_matrix = check_m_matrix(&system, &tol);
    let solution = solve_system(&system, benchmark_solve_options())?;
    let bounds = measure_bounds(&solution.u, &system);
    Ok(CaseResult {
        family,
        nx,
        ny,
        mesh,
        system,
        condition,
        m_matrix,
        bounds,
        solution,
    })
}

/// The benchmark on one mesh of `family` at resolution `nx x ny`.
pub fn run_case(family: MeshFamily, nx: usize, ny: usize, rule: &QuadratureRule) -> Result<CaseResult> {
    let bench = benchmark_spec();
    let mesh = family.generate(bench.domain, nx, ny)?;
    run_on_mesh(family, nx, ny, mesh, &bench.problem(), rule)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub pattern: String,
    pub nx: usize,
    pub ny: usize,
    /// Number of triangles.
    pub n: usize,
    pub violations_delaunay: usize,
    pub violations_nonobtuse: usize,
    pub overshoot: f64,
    pub undershoot: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Slope of `log(overshoot)` against `log(N)` over the finest half;
    /// `None` when some value there is zero or the sweep is DMP-clean.
    pub overshoot_exponent: Option<f64>,
    pub undershoot_exponent: Option<f64>,
    /// Every case stayed within the boundary data up to [`BOUNDS_TOL`].
    pub dmp_satisfied: bool,
}

pub const SWEEP_CSV_HEADER: &str =
    "pattern,nx,ny,N,violations_delaunay,violations_nonobtuse,overshoot,undershoot";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.pattern,
                r.nx,
                r.ny,
                r.n,
                r.violations_delaunay,
                r.violations_nonobtuse,
                r.overshoot,
                r.undershoot
            ));
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs the benchmark at square resolutions `n x n` for each `n` in
/// `resolutions` (at least four, strictly increasing), in parallel.
pub fn refinement_sweep(
    family: MeshFamily,
    resolutions: &[usize],
    rule: &QuadratureRule,
) -> Result<SweepResult> {
    if resolutions.len() < 4 || resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least four strictly increasing resolutions, got {resolutions:?}"
        )));
    }
    let results: Vec<Result<SweepRow>> = thread::scope(|s| {
        let handles: Vec<_> = resolutions
            .iter()
            .map(|&n| {
                s.spawn(move || {
                    let c = run_case(family, n, n, rule)?;
                    Ok(SweepRow {
                        pattern: family.name().to_string(),
                        nx: n,
                        ny: n,
                        n: c.mesh.num_triangles(),
                        violations_delaunay: c.condition.violations_delaunay_type,
                        violations_nonobtuse: c.condition.violations_nonobtuse,
                        overshoot: c.bounds.overshoot,
                        undershoot: c.bounds.undershoot,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let dmp_satisfied = rows
        .iter()
        .all(|r| r.overshoot <= BOUNDS_TOL && r.undershoot <= BOUNDS_TOL);
    let finest = &rows[rows.len() / 2..];
    let fit = |f: fn(&SweepRow) -> f64| {
        if dmp_satisfied {
            None
        } else {
            fit_log_slope(&finest.iter().map(|r| (r.n as f64, f(r))).collect::<Vec<_>>())
        }
    };
    Ok(SweepResult {
        overshoot_exponent: fit(|r| r.overshoot),
        undershoot_exponent: fit(|r| r.undershoot),
        dmp_satisfied,
        rows,
    })
}
