//! Python bindings: tensors, meshes, condition audits, the benchmark
//! solver, edge swapping, refinement sweeps and region maps.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use dmp_core::dmp::{
    check_m_matrix, check_nonobtuse, edge_condition_report, measure_bounds, report_json, Tolerance,
};
use dmp_core::experiment::{
    benchmark_solve_options, benchmark_spec, contours_svg, demo_field, extract_contours,
    refinement_sweep, sample_feasibility_region, solution_csv, MeshFamily, RegionMap, DEMO_FIELDS,
};
use dmp_core::fem::{assemble, Diffusion, ProblemSpec, QuadratureRule};
use dmp_core::mesh::{
    build_connectivity, generate_delaunay_mesh, generate_grid_mesh, read_mesh, write_mesh,
    DelaunayParams, GridPattern, Mesh, Rect,
};
use dmp_core::solver::solve_system;
use dmp_core::swap::swap_to_satisfy;
use dmp_core::{Error, SpdTensor, Vec2};

create_exception!(pydmp, ConvergenceError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e.root() {
        Error::NoConvergence { .. } => ConvergenceError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, x) in map {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

/// Symmetric positive-definite 2x2 tensor `[[d11, d12], [d12, d22]]`.
#[pyclass(name = "SpdTensor", module = "pydmp", frozen)]
struct PyTensor(SpdTensor);

#[pymethods]
impl PyTensor {
    #[new]
    fn new(d11: f64, d12: f64, d22: f64) -> PyResult<Self> {
        SpdTensor::new(d11, d12, d22).map(PyTensor).map_err(py_err)
    }

    #[getter]
    fn d11(&self) -> f64 {
        self.0.d11()
    }

    #[getter]
    fn d12(&self) -> f64 {
        self.0.d12()
    }

    #[getter]
    fn d22(&self) -> f64 {
        self.0.d22()
    }

    fn det(&self) -> f64 {
        self.0.det()
    }

    fn inverse(&self) -> Self {
        PyTensor(self.0.inverse())
    }

    /// `(lambda_max, lambda_min)`.
    fn eigenvalues(&self) -> (f64, f64) {
        self.0.eigenvalues()
    }

    /// Angle between `u` and `v` in the inner product of this tensor.
    fn metric_angle(&self, u: (f64, f64), v: (f64, f64)) -> PyResult<f64> {
        dmp_core::metric_angle(&self.0, Vec2::new(u.0, u.1), Vec2::new(v.0, v.1))
            .map(|a| a.radians())
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("SpdTensor({}, {}, {})", self.0.d11(), self.0.d12(), self.0.d22())
    }
}

/// Conforming triangle mesh with counterclockwise triangles.
#[pyclass(name = "Mesh", module = "pydmp", frozen)]
struct PyMesh(Mesh);

fn domain_rect(domain: Option<(f64, f64, f64, f64)>) -> Rect {
    domain.map_or(benchmark_spec().domain, |(x0, y0, x1, y1)| Rect::new(x0, y0, x1, y1))
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(vertices: Vec<(f64, f64)>, triangles: Vec<[usize; 3]>) -> PyResult<Self> {
        let v = vertices.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
        Mesh::new(v, triangles).map(PyMesh).map_err(py_err)
    }

    /// Structured mesh; `pattern` is `nw`, `ne` or `fourway`. The domain
    /// defaults to the benchmark square `[0, 16]^2`.
    #[staticmethod]
    #[pyo3(signature = (pattern, nx, ny=None, fraction=None, domain=None))]
    fn grid(
        pattern: &str,
        nx: usize,
        ny: Option<usize>,
        fraction: Option<f64>,
        domain: Option<(f64, f64, f64, f64)>,
    ) -> PyResult<Self> {
        let p = match (pattern, fraction) {
            ("nw", None) => GridPattern::Nw,
            ("ne", None) => GridPattern::Ne,
            ("fourway", f) => GridPattern::FourWay(f.unwrap_or(dmp_core::mesh::DEFAULT_FOURWAY_FRACTION)),
            (_, Some(_)) => return Err(PyValueError::new_err("fraction only applies to 'fourway'")),
            (other, _) => return Err(PyValueError::new_err(format!("unknown grid pattern '{other}'"))),
        };
        generate_grid_mesh(domain_rect(domain), nx, ny.unwrap_or(nx), p)
            .map(PyMesh)
            .map_err(py_err)
    }

    /// Seeded jittered-grid Delaunay mesh.
    #[staticmethod]
    #[pyo3(signature = (nx, ny=None, seed=42, jitter=0.3, domain=None))]
    fn delaunay(
        nx: usize,
        ny: Option<usize>,
        seed: u64,
        jitter: f64,
        domain: Option<(f64, f64, f64, f64)>,
    ) -> PyResult<Self> {
        generate_delaunay_mesh(domain_rect(domain), nx, ny.unwrap_or(nx), DelaunayParams { jitter, seed })
            .map(PyMesh)
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        read_mesh(text).map(PyMesh).map_err(py_err)
    }

    fn to_text(&self) -> String {
        write_mesh(&self.0)
    }

    #[getter]
    fn vertices(&self) -> Vec<(f64, f64)> {
        self.0.vertices().iter().map(|p| (p.x, p.y)).collect()
    }

    #[getter]
    fn triangles(&self) -> Vec<[usize; 3]> {
        self.0.triangles().to_vec()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    #[getter]
    fn num_triangles(&self) -> usize {
        self.0.num_triangles()
    }

    fn __repr__(&self) -> String {
        format!("Mesh({} vertices, {} triangles)", self.0.num_vertices(), self.0.num_triangles())
    }
}

/// Exactly one of a constant tensor, a demo field name or the benchmark.
fn problem(tensor: Option<PyRef<'_, PyTensor>>, field: Option<&str>, benchmark: bool) -> PyResult<ProblemSpec> {
    match (tensor, field, benchmark) {
        (Some(t), None, false) => Ok(ProblemSpec::constant(t.0)),
        (None, Some(f), false) => Ok(ProblemSpec::with_diffusion(demo_field(f).map_err(py_err)?)),
        (None, None, true) => Ok(benchmark_spec().problem()),
        _ => Err(PyValueError::new_err(
            "give exactly one of tensor=, field= or benchmark=True",
        )),
    }
}

/// Condition audit as a dict with the same keys as `dmpmesh check`. With
/// `benchmark=True` the benchmark is also solved and bounds are filled in.
#[pyfunction]
#[pyo3(signature = (mesh, tensor=None, field=None, benchmark=false, tol=None))]
fn audit<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    tensor: Option<PyRef<'_, PyTensor>>,
    field: Option<&str>,
    benchmark: bool,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = problem(tensor, field, benchmark)?;
    let mut t = Tolerance::default();
    if let Some(a) = tol {
        t.angle = a;
        t.band = t.band.max(a);
    }
    let m = &mesh.0;
    let rule = QuadratureRule::three_point();
    let v = py
        .detach(|| -> Result<Value, Error> {
            let topo = build_connectivity(m)?;
            let cond = edge_condition_report(m, &topo, &spec, &rule, &t)?;
            let sys = assemble(&spec, m, &topo, &rule)?;
            let mm = check_m_matrix(&sys, &t);
            let bounds = if benchmark {
                let sol = solve_system(&sys, benchmark_solve_options())?;
                Some(measure_bounds(&sol.u, &sys))
            } else {
                None
            };
            Ok(report_json(&cond, Some(&mm), bounds.as_ref()))
        })
        .map_err(py_err)?;
    to_py(py, &v)
}

/// Element angles above `pi/2` in the metric `D_K^{-1}`, as
/// `(triangle, vertex, angle)` tuples.
#[pyfunction]
#[pyo3(signature = (mesh, tensor=None, field=None, benchmark=false))]
fn obtuse_angles(
    mesh: &PyMesh,
    tensor: Option<PyRef<'_, PyTensor>>,
    field: Option<&str>,
    benchmark: bool,
) -> PyResult<Vec<(usize, usize, f64)>> {
    let spec = problem(tensor, field, benchmark)?;
    let found = check_nonobtuse(&mesh.0, &spec, &QuadratureRule::three_point(), &Tolerance::default())
        .map_err(py_err)?;
    Ok(found.into_iter().map(|a| (a.triangle, a.vertex, a.angle.radians())).collect())
}

/// Benchmark solution on a mesh of `[0, 16]^2`.
#[pyclass(name = "Solution", module = "pydmp", frozen)]
struct PySolution {
    #[pyo3(get)]
    u: Vec<f64>,
    #[pyo3(get)]
    is_boundary: Vec<bool>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    overshoot: f64,
    #[pyo3(get)]
    undershoot: f64,
    mesh: Mesh,
}

#[pymethods]
impl PySolution {
    fn to_csv(&self) -> String {
        solution_csv(&self.mesh, &self.u, &self.is_boundary)
    }

    /// Iso-lines per drawn level as lists of `(x, y)` polylines; levels
    /// outside the range of `u` are dropped.
    fn contours(&self, levels: Vec<f64>) -> Vec<(f64, Vec<Vec<(f64, f64)>>)> {
        let set = extract_contours(&self.mesh, &self.u, &levels);
        set.levels
            .iter()
            .zip(&set.lines)
            .map(|(&c, lines)| {
                (c, lines.iter().map(|l| l.iter().map(|p| (p.x, p.y)).collect()).collect())
            })
            .collect()
    }

    fn contours_svg(&self, levels: Vec<f64>) -> String {
        contours_svg(self.mesh.domain(), &extract_contours(&self.mesh, &self.u, &levels))
    }
}

#[pyfunction]
#[pyo3(signature = (mesh, max_iter=None))]
fn solve_benchmark(py: Python<'_>, mesh: &PyMesh, max_iter: Option<usize>) -> PyResult<PySolution> {
    let m = mesh.0.clone();
    py.detach(move || -> Result<PySolution, Error> {
        let spec = benchmark_spec().problem();
        let topo = build_connectivity(&m)?;
        let sys = assemble(&spec, &m, &topo, &QuadratureRule::three_point())?;
        let mut opts = benchmark_solve_options();
        opts.max_iter = max_iter;
        let sol = solve_system(&sys, opts)?;
        let b = measure_bounds(&sol.u, &sys);
        Ok(PySolution {
            is_boundary: (0..m.num_vertices()).map(|i| topo.is_boundary_vertex(i)).collect(),
            u: sol.u,
            iterations: sol.iterations,
            residual: sol.residual,
            overshoot: b.overshoot,
            undershoot: b.undershoot,
            mesh: m,
        })
    })
    .map_err(py_err)
}

/// Flips edges until no Delaunay-type violation is left or nothing helps.
/// Returns `(mesh, initial_violations, remaining_violations, flips)`.
#[pyfunction]
#[pyo3(signature = (mesh, tensor=None, field=None, benchmark=false, max_passes=50))]
fn swap(
    py: Python<'_>,
    mesh: &PyMesh,
    tensor: Option<PyRef<'_, PyTensor>>,
    field: Option<&str>,
    benchmark: bool,
    max_passes: usize,
) -> PyResult<(PyMesh, usize, usize, usize)> {
    let spec = problem(tensor, field, benchmark)?;
    let m = &mesh.0;
    let out = py
        .detach(|| swap_to_satisfy(m, &spec, &QuadratureRule::three_point(), max_passes))
        .map_err(py_err)?;
    Ok((PyMesh(out.mesh), out.initial_violations, out.remaining_violations, out.flips))
}

/// Benchmark refinement sweep; returns a dict with `rows` (list of dicts),
/// `overshoot_exponent`, `undershoot_exponent` and `dmp_satisfied`.
#[pyfunction]
fn sweep<'py>(py: Python<'py>, pattern: &str, resolutions: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
    let family: MeshFamily = pattern.parse().map_err(py_err)?;
    let r = py
        .detach(|| refinement_sweep(family, &resolutions, &QuadratureRule::three_point()))
        .map_err(py_err)?;
    let rows = PyList::empty(py);
    for row in &r.rows {
        let d = PyDict::new(py);
        d.set_item("pattern", &row.pattern)?;
        d.set_item("nx", row.nx)?;
        d.set_item("ny", row.ny)?;
        d.set_item("N", row.n)?;
        d.set_item("violations_delaunay", row.violations_delaunay)?;
        d.set_item("violations_nonobtuse", row.violations_nonobtuse)?;
        d.set_item("overshoot", row.overshoot)?;
        d.set_item("undershoot", row.undershoot)?;
        rows.append(d)?;
    }
    let out = PyDict::new(py);
    out.set_item("rows", rows)?;
    out.set_item("overshoot_exponent", r.overshoot_exponent)?;
    out.set_item("undershoot_exponent", r.undershoot_exponent)?;
    out.set_item("dmp_satisfied", r.dmp_satisfied)?;
    out.set_item("csv", r.to_csv())?;
    Ok(out)
}

/// Sampled set of opposite-angle pairs `(alpha', alpha)` in `(0, pi)^2`
/// that satisfy the condition for a given determinant ratio.
#[pyclass(name = "RegionMap", module = "pydmp", frozen)]
struct PyRegion(RegionMap);

#[pymethods]
impl PyRegion {
    #[getter]
    fn det_ratio(&self) -> f64 {
        self.0.det_ratio
    }

    #[getter]
    fn grid(&self) -> usize {
        self.0.grid
    }

    /// Cell with `alpha'` index `i` and `alpha` index `j`.
    fn inside(&self, i: usize, j: usize) -> PyResult<bool> {
        if i >= self.0.grid || j >= self.0.grid {
            return Err(PyValueError::new_err("cell index out of range"));
        }
        Ok(self.0.inside(i, j))
    }

    fn count(&self) -> usize {
        self.0.count()
    }

    fn column_heights(&self) -> Vec<usize> {
        self.0.column_heights()
    }

    fn boundary(&self) -> Vec<(f64, f64)> {
        self.0.boundary()
    }

    fn to_svg(&self) -> String {
        self.0.to_svg()
    }
}

#[pyfunction]
#[pyo3(signature = (det_ratio, grid=128))]
fn region(det_ratio: f64, grid: usize) -> PyResult<PyRegion> {
    sample_feasibility_region(det_ratio, grid).map(PyRegion).map_err(py_err)
}

/// Names and summaries of the built-in diffusion fields.
#[pyfunction]
fn fields() -> Vec<(&'static str, &'static str)> {
    DEMO_FIELDS.to_vec()
}

/// Tensor of a built-in field at `(x, y)`.
#[pyfunction]
fn field_at(name: &str, x: f64, y: f64) -> PyResult<PyTensor> {
    let d: Diffusion = demo_field(name).map_err(py_err)?;
    d.at(Vec2::new(x, y)).map(PyTensor).map_err(py_err)
}

#[pymodule]
pub fn pydmp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyMesh>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyRegion>()?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(obtuse_angles, m)?)?;
    m.add_function(wrap_pyfunction!(solve_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(swap, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(region, m)?)?;
    m.add_function(wrap_pyfunction!(fields, m)?)?;
    m.add_function(wrap_pyfunction!(field_at, m)?)?;
    Ok(())
}
