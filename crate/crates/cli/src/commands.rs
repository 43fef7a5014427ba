use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use dmp_core::dmp::{check_m_matrix, edge_condition_report, measure_bounds, report_json, Tolerance};
use dmp_core::experiment::{
    benchmark_solve_options, benchmark_spec, contours_svg, demo_field, extract_contours,
    refinement_sweep, sample_feasibility_region, solution_csv, MeshFamily, DEMO_FIELDS,
};
use dmp_core::fem::{assemble, Diffusion, ProblemSpec, QuadratureRule, RuleKind};
use dmp_core::mesh::{
    build_connectivity, read_mesh, write_mesh, DelaunayParams, GridPattern, Mesh, Rect,
    DEFAULT_FOURWAY_FRACTION,
};
use dmp_core::solver::solve_system;
use dmp_core::swap::swap_to_satisfy;
use dmp_core::{Error, SpdTensor};

use crate::args::*;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    NoConvergence(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::NoConvergence(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e.root() {
            Error::NoConvergence { .. } => Failure::NoConvergence(msg),
            Error::InvalidParameter(_) | Error::BadResolution { .. } => Failure::Usage(msg),
            _ => Failure::Validation(msg),
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::GenMesh(a) => gen_mesh(a),
        Command::Check(a) => check(a),
        Command::Solve(a) => solve(a),
        Command::Swap(a) => swap(a),
        Command::Sweep(a) => sweep(a),
        Command::Region(a) => region(a),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Validation(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Validation(format!("cannot write to stdout: {e}"))),
    }
}

fn load_mesh(path: &Path) -> Result<Mesh, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    read_mesh(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn rule(r: Rule) -> QuadratureRule {
    match r {
        Rule::Centroid => RuleKind::Centroid.rule(),
        Rule::ThreePoint => RuleKind::ThreePoint.rule(),
    }
}

fn family(p: Pattern) -> MeshFamily {
    match p {
        Pattern::Nw => MeshFamily::Grid(GridPattern::Nw),
        Pattern::Ne => MeshFamily::Grid(GridPattern::Ne),
        Pattern::Fourway => MeshFamily::Grid(GridPattern::FourWay(DEFAULT_FOURWAY_FRACTION)),
        Pattern::Delaunay => MeshFamily::Delaunay(DelaunayParams::default()),
    }
}

fn print_fields() {
    for (name, summary) in DEMO_FIELDS {
        println!("{name:<10} {summary}");
    }
}

/// The problem selected by the diffusion flags; `None` after `--field list`.
fn problem(d: &DiffusionArgs) -> Result<Option<ProblemSpec>, Failure> {
    if d.benchmark {
        return Ok(Some(benchmark_spec().problem()));
    }
    if let Some(name) = &d.field {
        if name == "list" {
            print_fields();
            return Ok(None);
        }
        return Ok(Some(ProblemSpec::with_diffusion(demo_field(name)?)));
    }
    match (d.d11, d.d12, d.d22) {
        (Some(a), Some(b), Some(c)) => {
            let t = SpdTensor::new(a, b, c).map_err(|e| Failure::Validation(e.to_string()))?;
            Ok(Some(ProblemSpec::with_diffusion(Diffusion::Constant(t))))
        }
        _ => Err(Failure::Usage("give --benchmark, --field, or all of --d11 --d12 --d22".into())),
    }
}

fn gen_mesh(a: GenMeshArgs) -> Outcome {
    let (nx, ny) = (a.nx as usize, a.ny.unwrap_or(a.nx) as usize);
    let domain = match a.domain.as_deref() {
        Some(&[x0, y0, x1, y1]) => Rect::new(x0, y0, x1, y1),
        Some(_) => return Err(Failure::Usage("--domain takes x0,y0,x1,y1".into())),
        None => benchmark_spec().domain,
    };
    if a.fraction.is_some() && a.pattern != Pattern::Fourway {
        return Err(Failure::Usage("--fraction only applies to --pattern fourway".into()));
    }
    if (a.seed.is_some() || a.jitter.is_some()) && a.pattern != Pattern::Delaunay {
        return Err(Failure::Usage("--seed and --jitter only apply to --pattern delaunay".into()));
    }
    let fam = match a.pattern {
        Pattern::Fourway => {
            MeshFamily::Grid(GridPattern::FourWay(a.fraction.unwrap_or(DEFAULT_FOURWAY_FRACTION)))
        }
        Pattern::Delaunay => {
            let d = DelaunayParams::default();
            MeshFamily::Delaunay(DelaunayParams {
                jitter: a.jitter.unwrap_or(d.jitter),
                seed: a.seed.unwrap_or(d.seed),
            })
        }
        p => family(p),
    };
    let m = fam.generate(domain, nx, ny)?;
    eprintln!("{fam} {nx}x{ny}: {} vertices, {} triangles", m.num_vertices(), m.num_triangles());
    emit(a.output.as_deref(), &write_mesh(&m))
}

fn check(a: CheckArgs) -> Outcome {
    let Some(spec) = problem(&a.diffusion)? else {
        return Ok(());
    };
    let m = load_mesh(&a.mesh)?;
    let mut tol = Tolerance::default();
    if let Some(t) = a.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Failure::Usage(format!("--tol must be a nonnegative number, got {t}")));
        }
        tol.angle = t;
        tol.band = tol.band.max(t);
    }
    let rule = rule(a.rule);
    let topo = build_connectivity(&m)?;
    let cond = edge_condition_report(&m, &topo, &spec, &rule, &tol)?;
    let sys = assemble(&spec, &m, &topo, &rule)?;
    let mm = check_m_matrix(&sys, &tol);
    let bounds = if a.diffusion.benchmark {
        let sol = solve_system(&sys, benchmark_solve_options())?;
        Some(measure_bounds(&sol.u, &sys))
    } else {
        None
    };
    eprintln!(
        "{} interior edges: {} Delaunay-type violations, {} obtuse metric angles, M-matrix {}",
        cond.edges.len(),
        cond.violations_delaunay_type,
        cond.violations_nonobtuse,
        if mm.verdict { "yes" } else { "no" }
    );
    let json = report_json(&cond, Some(&mm), bounds.as_ref());
    let mut text = serde_json::to_string_pretty(&json).expect("report serialises");
    text.push('\n');
    emit(a.output.as_deref(), &text)
}

fn solve(a: SolveArgs) -> Outcome {
    let m = load_mesh(&a.mesh)?;
    let spec = benchmark_spec().problem();
    let rule = QuadratureRule::three_point();
    let topo = build_connectivity(&m)?;
    let sys = assemble(&spec, &m, &topo, &rule)?;
    let mut opts = benchmark_solve_options();
    opts.max_iter = a.max_iter.map(|n| n as usize);
    let sol = solve_system(&sys, opts)?;
    let b = measure_bounds(&sol.u, &sys);
    eprintln!(
        "{} iterations, residual {:.2e}, overshoot {:.4e}, undershoot {:.4e}",
        sol.iterations, sol.residual, b.overshoot, b.undershoot
    );
    let flags: Vec<bool> = (0..m.num_vertices()).map(|i| topo.is_boundary_vertex(i)).collect();
    emit(a.output.as_deref(), &solution_csv(&m, &sol.u, &flags))?;
    if let (Some(levels), Some(svg)) = (&a.contours, &a.svg) {
        let set = extract_contours(&m, &sol.u, levels);
        emit(Some(svg), &contours_svg(m.domain(), &set))?;
    }
    Ok(())
}

fn swap(a: SwapArgs) -> Outcome {
    let Some(spec) = problem(&a.diffusion)? else {
        return Ok(());
    };
    let m = load_mesh(&a.mesh)?;
    let out = swap_to_satisfy(&m, &spec, &rule(a.rule), a.max_passes as usize)?;
    eprintln!(
        "{} -> {} violations, {} flips in {} passes",
        out.initial_violations, out.remaining_violations, out.flips, out.passes
    );
    emit(a.output.as_deref(), &write_mesh(&out.mesh))
}

fn sweep(a: SweepArgs) -> Outcome {
    let r = refinement_sweep(family(a.pattern), &a.resolutions, &rule(a.rule))?;
    let fmt = |e: Option<f64>| e.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    if r.dmp_satisfied {
        eprintln!("all cases within the boundary data");
    } else {
        eprintln!(
            "fitted exponents on the finest half: overshoot {}, undershoot {}",
            fmt(r.overshoot_exponent),
            fmt(r.undershoot_exponent)
        );
    }
    emit(a.output.as_deref(), &r.to_csv())
}

fn region(a: RegionArgs) -> Outcome {
    let r = sample_feasibility_region(a.det_ratio, a.grid)?;
    eprintln!("{} of {} cells inside", r.count(), a.grid * a.grid);
    emit(a.output.as_deref(), &r.to_svg())
}
