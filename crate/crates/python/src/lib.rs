//! Python bindings. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dsclust_core as core;
use dsclust_core::{
    AffinityMatrix, ClusterConfig, DynamicsConfig, DynamicsKind, Metric, PointCloud, SimplexVector,
    StopCriterion,
};

fn to_py(e: core::Error) -> PyErr {
    if e.is_invalid_input() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn affinity(rows: &[Vec<f64>], repair_diagonal: bool) -> PyResult<AffinityMatrix> {
    if repair_diagonal {
        let mut rows = rows.to_vec();
        for (i, r) in rows.iter_mut().enumerate() {
            if let Some(v) = r.get_mut(i) {
                *v = 0.0;
            }
        }
        AffinityMatrix::from_rows(&rows).map_err(to_py)
    } else {
        AffinityMatrix::from_rows(rows).map_err(to_py)
    }
}

fn rows(m: ndarray::ArrayView2<'_, f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn dynamics_config(
    dynamics: &str,
    kappa: f64,
    precision: f64,
    max_iters: usize,
    stop: &str,
) -> PyResult<DynamicsConfig> {
    let kind = match dynamics {
        "rd" => DynamicsKind::Replicator,
        "exprd" => DynamicsKind::ExponentialReplicator { kappa },
        "inimdyn" => DynamicsKind::InfectionImmunization,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown dynamics {other:?}, expected rd, exprd or inimdyn"
            )))
        }
    };
    let criterion = match stop {
        "distance" => StopCriterion::IterateDistance,
        "payoff" => StopCriterion::PayoffChange,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown stop criterion {other:?}, expected distance or payoff"
            )))
        }
    };
    let cfg = DynamicsConfig {
        kind,
        precision,
        max_iters,
        criterion,
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// One extracted cluster.
#[pyclass(frozen, get_all, module = "dsclust")]
pub struct DominantSet {
    members: Vec<usize>,
    char_vector: Vec<f64>,
    cohesiveness: f64,
    centroid: usize,
    extraction_order: usize,
    iterations: usize,
    converged: bool,
    degenerate: bool,
    is_outlier: bool,
}

impl From<&core::DominantSet> for DominantSet {
    fn from(ds: &core::DominantSet) -> Self {
        Self {
            members: ds.members.clone(),
            char_vector: ds.char_vector.as_slice().to_vec(),
            cohesiveness: ds.cohesiveness,
            centroid: ds.centroid,
            extraction_order: ds.extraction_order,
            iterations: ds.iterations,
            converged: ds.converged,
            degenerate: ds.degenerate,
            is_outlier: ds.is_outlier(),
        }
    }
}

#[pymethods]
impl DominantSet {
    fn __len__(&self) -> usize {
        self.members.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "DominantSet(members={:?}, cohesiveness={})",
            self.members, self.cohesiveness
        )
    }
}

#[pyclass(frozen, get_all, module = "dsclust")]
pub struct ClusteringResult {
    labels: Vec<usize>,
    outliers: Vec<bool>,
    clusters: Vec<Py<DominantSet>>,
    sigma: Option<f64>,
}

#[pymethods]
impl ClusteringResult {
    #[getter]
    fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ClusteringResult(n={}, clusters={})",
            self.labels.len(),
            self.clusters.len()
        )
    }
}

fn wrap_result(
    py: Python<'_>,
    r: core::ClusteringResult,
    sigma: Option<f64>,
) -> PyResult<ClusteringResult> {
    let clusters = r
        .clusters
        .iter()
        .map(|ds| Py::new(py, DominantSet::from(ds)))
        .collect::<PyResult<_>>()?;
    Ok(ClusteringResult {
        labels: r.labels,
        outliers: r.outliers,
        clusters,
        sigma,
    })
}

#[pyclass(frozen, get_all, module = "dsclust")]
pub struct DynamicsResult {
    state: Vec<f64>,
    iterations: usize,
    payoff: f64,
    converged: bool,
    nash_gap: f64,
}

#[pymethods]
impl DynamicsResult {
    fn __repr__(&self) -> String {
        format!(
            "DynamicsResult(payoff={}, iterations={}, converged={})",
            self.payoff, self.iterations, self.converged
        )
    }
}

#[pyfunction]
fn pairwise_distances(points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let cloud = PointCloud::from_rows(&points).map_err(to_py)?;
    Ok(rows(
        core::pairwise_distances(&cloud, Metric::Euclidean).values(),
    ))
}

/// Three times the sample variance of the pairwise distances.
#[pyfunction]
fn sigma_heuristic(points: Vec<Vec<f64>>) -> PyResult<f64> {
    let cloud = PointCloud::from_rows(&points).map_err(to_py)?;
    core::sigma_heuristic(&core::pairwise_distances(&cloud, Metric::Euclidean)).map_err(to_py)
}

/// `exp(-d / sigma)` with a zero diagonal.
#[pyfunction]
fn gaussian_kernel(distances: Vec<Vec<f64>>, sigma: f64) -> PyResult<Vec<Vec<f64>>> {
    let n = distances.len();
    if distances.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("distance matrix must be square"));
    }
    let flat: Vec<f64> = distances.iter().flatten().copied().collect();
    let values = ndarray::Array2::from_shape_vec((n, n), flat)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let dm = core::DistanceMatrix::new(values, Metric::Euclidean).map_err(to_py)?;
    Ok(rows(
        core::gaussian_kernel(&dm, sigma).map_err(to_py)?.values(),
    ))
}

/// Peels dominant sets off an affinity matrix.
#[pyfunction]
#[pyo3(signature = (
    affinity_rows, *, dynamics = "rd", kappa = 1.0, theta = 1e-5, precision = 1e-6,
    max_iters = 1000, stop = "distance", refine = true, repair_diagonal = false
))]
#[allow(clippy::too_many_arguments)]
fn cluster(
    py: Python<'_>,
    affinity_rows: Vec<Vec<f64>>,
    dynamics: &str,
    kappa: f64,
    theta: f64,
    precision: f64,
    max_iters: usize,
    stop: &str,
    refine: bool,
    repair_diagonal: bool,
) -> PyResult<ClusteringResult> {
    let a = affinity(&affinity_rows, repair_diagonal)?;
    let cfg = ClusterConfig {
        dynamics: dynamics_config(dynamics, kappa, precision, max_iters, stop)?,
        theta,
        refine,
    };
    let r = py.detach(|| core::peel_clusters(&a, &cfg)).map_err(to_py)?;
    wrap_result(py, r, None)
}

/// Builds the kernel affinity of a point set and clusters it. `sigma=None`
/// uses the variance heuristic.
#[pyfunction]
#[pyo3(signature = (
    points, sigma = None, *, dynamics = "rd", kappa = 1.0, theta = 1e-5,
    precision = 1e-6, max_iters = 1000, stop = "distance", refine = true
))]
#[allow(clippy::too_many_arguments)]
fn cluster_points(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    sigma: Option<f64>,
    dynamics: &str,
    kappa: f64,
    theta: f64,
    precision: f64,
    max_iters: usize,
    stop: &str,
    refine: bool,
) -> PyResult<ClusteringResult> {
    let cloud = PointCloud::from_rows(&points).map_err(to_py)?;
    let cfg = ClusterConfig {
        dynamics: dynamics_config(dynamics, kappa, precision, max_iters, stop)?,
        theta,
        refine,
    };
    let dm = core::pairwise_distances(&cloud, Metric::Euclidean);
    let sigma = match sigma {
        Some(s) => s,
        None => core::sigma_heuristic(&dm).map_err(to_py)?,
    };
    let a = core::gaussian_kernel(&dm, sigma).map_err(to_py)?;
    let r = py.detach(|| core::peel_clusters(&a, &cfg)).map_err(to_py)?;
    wrap_result(py, r, Some(sigma))
}

/// Runs one dynamics from `x0` (the barycenter when omitted).
#[pyfunction]
#[pyo3(signature = (
    affinity_rows, x0 = None, *, dynamics = "rd", kappa = 1.0, precision = 1e-6,
    max_iters = 1000, stop = "distance"
))]
#[allow(clippy::too_many_arguments)]
fn run_dynamics(
    affinity_rows: Vec<Vec<f64>>,
    x0: Option<Vec<f64>>,
    dynamics: &str,
    kappa: f64,
    precision: f64,
    max_iters: usize,
    stop: &str,
) -> PyResult<DynamicsResult> {
    let a = affinity(&affinity_rows, false)?;
    let cfg = dynamics_config(dynamics, kappa, precision, max_iters, stop)?;
    let x0 = match x0 {
        Some(v) => SimplexVector::new(v),
        None => SimplexVector::barycenter(a.n()),
    }
    .map_err(to_py)?;
    let r = core::run_dynamics(&a, &x0, &cfg).map_err(to_py)?;
    Ok(DynamicsResult {
        state: r.state.into_vec(),
        iterations: r.iterations,
        payoff: r.payoff,
        converged: r.converged,
        nash_gap: r.nash_gap,
    })
}

fn check_state(a: &AffinityMatrix, x: Vec<f64>) -> PyResult<SimplexVector> {
    if x.len() != a.n() {
        return Err(PyValueError::new_err(format!(
            "state has {} entries, matrix has {} rows",
            x.len(),
            a.n()
        )));
    }
    SimplexVector::new(x).map_err(to_py)
}

/// `x'Ax`, the cohesiveness of a characteristic vector.
#[pyfunction]
fn payoff(affinity_rows: Vec<Vec<f64>>, x: Vec<f64>) -> PyResult<f64> {
    let a = affinity(&affinity_rows, false)?;
    let x = check_state(&a, x)?;
    Ok(core::payoff(&a, &x))
}

/// `max_i (Ax)_i - x'Ax`; zero at a Nash equilibrium.
#[pyfunction]
fn nash_gap(affinity_rows: Vec<Vec<f64>>, x: Vec<f64>) -> PyResult<f64> {
    let a = affinity(&affinity_rows, false)?;
    let x = check_state(&a, x)?;
    Ok(core::nash_gap(&a, &x))
}

/// Best point of the simplex grid with resolution `k`. Returns
/// `(x, payoff)`.
#[pyfunction]
#[pyo3(signature = (affinity_rows, k = 20))]
fn grid_simplex_maximizer(affinity_rows: Vec<Vec<f64>>, k: u32) -> PyResult<(Vec<f64>, f64)> {
    let a = affinity(&affinity_rows, false)?;
    let g = core::grid_simplex_maximizer(&a, k).map_err(to_py)?;
    Ok((g.x_best.into_vec(), g.payoff_best))
}

#[pyfunction]
fn maximal_cliques(adjacency: Vec<Vec<f64>>) -> PyResult<Vec<Vec<usize>>> {
    let a = affinity(&adjacency, false)?;
    core::maximal_cliques(&a).map_err(to_py)
}

#[pymodule]
pub fn dsclust(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<DominantSet>()?;
    m.add_class::<ClusteringResult>()?;
    m.add_class::<DynamicsResult>()?;
    m.add_function(wrap_pyfunction!(pairwise_distances, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_heuristic, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_points, m)?)?;
    m.add_function(wrap_pyfunction!(run_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(payoff, m)?)?;
    m.add_function(wrap_pyfunction!(nash_gap, m)?)?;
    m.add_function(wrap_pyfunction!(grid_simplex_maximizer, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_cliques, m)?)?;
    Ok(())
}
