//! Peel-off dominant-set clustering.
//!
//! Each round starts the dynamics from the barycenter of the residual graph,
//! takes the support of the converged state as a cluster, removes those nodes
//! and repeats until every node has been assigned.

use crate::affinity::AffinityMatrix;
use crate::dynamics::{iterate, payoff, DynamicsConfig};
use crate::error::{Error, Result};
use crate::refine::refine;
use crate::simplex::{renormalize, support, SimplexVector, DEFAULT_THETA};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub dynamics: DynamicsConfig,
    /// Support threshold.
    pub theta: f64,
    /// Push converged states to strict local maximizers before reading off
    /// the support (see the `refine` module).
    pub refine: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            dynamics: DynamicsConfig::default(),
            theta: DEFAULT_THETA,
            refine: true,
        }
    }
}

impl ClusterConfig {
    pub fn new(dynamics: DynamicsConfig, theta: f64) -> Self {
        Self {
            dynamics,
            theta,
            refine: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dynamics.validate()?;
        if !(self.theta >= 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1), got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantSet {
    /// Sorted node indices.
    pub members: Vec<usize>,
    /// Converged weights on `members`, renormalized.
    pub char_vector: SimplexVector,
    /// `x'Ax` of the converged state.
    pub cohesiveness: f64,
    /// Member with the largest weight (lowest index on ties).
    pub centroid: usize,
    pub extraction_order: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the dynamics could not produce a support and the node with
    /// the largest weight was emitted on its own.
    pub degenerate: bool,
}

impl DominantSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Singletons with zero cohesiveness.
    pub fn is_outlier(&self) -> bool {
        self.members.len() == 1 && self.cohesiveness == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub labels: Vec<usize>,
    pub outliers: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster id per node; equals the cluster's `extraction_order`.
    pub labels: Vec<usize>,
    pub outliers: Vec<bool>,
    pub clusters: Vec<DominantSet>,
    pub config: ClusterConfig,
}

impl ClusteringResult {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }
}

/// `x'Ax`.
pub fn cohesiveness(a: &AffinityMatrix, x: &SimplexVector) -> f64 {
    payoff(a, x)
}

fn singleton(x: &SimplexVector, iterations: usize, converged: bool) -> DominantSet {
    let node = x.argmax();
    DominantSet {
        members: vec![node],
        char_vector: SimplexVector::vertex(1, 0).expect("dimension 1"),
        cohesiveness: 0.0,
        centroid: node,
        extraction_order: 0,
        iterations,
        converged,
        degenerate: true,
    }
}

/// Extracts one dominant set from `a`, in `a`'s own numbering.
///
/// Dynamics failures (zero payoff, degenerate states) and empty supports do
/// not error: they yield the heaviest node as a degenerate singleton. Hitting
/// `max_iters` is recorded in `converged`.
pub fn extract_dominant_set(a: &AffinityMatrix, cfg: &ClusterConfig) -> Result<DominantSet> {
    cfg.validate()?;
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidInput("empty affinity matrix".into()));
    }
    let x0 = SimplexVector::barycenter(n)?;
    let run = iterate(a, x0, &cfg.dynamics);
    if run.error.is_some() {
        return Ok(singleton(&run.state, run.iterations, false));
    }
    let (state, iterations, converged) = if cfg.refine {
        let r = refine(a, run.state, &cfg.dynamics, cfg.theta, run.converged);
        (r.state, run.iterations + r.iterations, r.converged)
    } else {
        (run.state, run.iterations, run.converged)
    };

    let cohesiveness = payoff(a, &state);
    let members = support(&state, cfg.theta)?.into_indices();
    if members.is_empty() || cohesiveness.is_nan() || cohesiveness <= 0.0 {
        return Ok(singleton(&state, iterations, converged));
    }
    let weights: Vec<f64> = members.iter().map(|&i| state.as_slice()[i]).collect();
    let char_vector = renormalize(&weights)?;
    let centroid = members[char_vector.argmax()];
    Ok(DominantSet {
        members,
        char_vector,
        cohesiveness,
        centroid,
        extraction_order: 0,
        iterations,
        converged,
        degenerate: false,
    })
}

/// Repeatedly extracts dominant sets from the residual graph until every node
/// belongs to a cluster. Each extraction restarts from the residual
/// barycenter.
pub fn peel_clusters(a: &AffinityMatrix, cfg: &ClusterConfig) -> Result<ClusteringResult> {
    cfg.validate()?;
    let n = a.n();
    if n == 0 {
        return Err(Error::InvalidInput("empty affinity matrix".into()));
    }
    // Original index of each residual row.
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut residual = a.clone();
    let mut clusters = Vec::new();

    while !remaining.is_empty() {
        let mut ds = extract_dominant_set(&residual, cfg)?;
        let mut taken = vec![false; remaining.len()];
        for &m in &ds.members {
            taken[m] = true;
        }
        ds.members = ds.members.iter().map(|&m| remaining[m]).collect();
        ds.centroid = remaining[ds.centroid];
        ds.extraction_order = clusters.len();
        clusters.push(ds);

        let keep: Vec<usize> = (0..remaining.len()).filter(|&r| !taken[r]).collect();
        if keep.len() == remaining.len() {
            return Err(Error::Consistency("extraction removed no nodes".into()));
        }
        residual = residual.submatrix(&keep);
        remaining = keep.into_iter().map(|r| remaining[r]).collect();
    }

    let Labels { labels, outliers } = assign_labels(&clusters, n)?;
    Ok(ClusteringResult {
        labels,
        outliers,
        clusters,
        config: *cfg,
    })
}

/// Labels each node with the `extraction_order` of its cluster.
pub fn assign_labels(clusters: &[DominantSet], n: usize) -> Result<Labels> {
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut outliers = vec![false; n];
    for ds in clusters {
        for &m in &ds.members {
            let slot = labels.get_mut(m).ok_or_else(|| {
                Error::Consistency(format!("member {m} out of range for {n} nodes"))
            })?;
            if let Some(prev) = slot {
                return Err(Error::Consistency(format!(
                    "node {m} belongs to clusters {prev} and {}",
                    ds.extraction_order
                )));
            }
            *slot = Some(ds.extraction_order);
            outliers[m] = ds.is_outlier();
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::Consistency(format!("node {i} is unassigned"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Labels { labels, outliers })
}
