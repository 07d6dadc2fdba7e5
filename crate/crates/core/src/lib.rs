//! Dominant-set clustering.
//!
//! Data become an edge-weighted graph without self-loops ([`affinity`]).
//! A cluster is the support of a local maximizer of `x'Ax` over the standard
//! simplex, reached by evolutionary game dynamics ([`dynamics`]). Clusters
//! are peeled off one at a time until every node is grouped
//! ([`clustering`]).
//!
//! ```
//! use dsclust_core::{peel_clusters, AffinityMatrix, ClusterConfig};
//! use ndarray::array;
//!
//! let a = AffinityMatrix::new(array![
//!     [0.0, 1.0, 1.0, 0.0],
//!     [1.0, 0.0, 1.0, 0.0],
//!     [1.0, 1.0, 0.0, 0.1],
//!     [0.0, 0.0, 0.1, 0.0],
//! ])?;
//! let result = peel_clusters(&a, &ClusterConfig::default())?;
//! assert_eq!(result.labels, vec![0, 0, 0, 1]);
//! assert!(result.outliers[3]);
//! # Ok::<(), dsclust_core::Error>(())
//! ```

pub mod affinity;
pub mod clustering;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod oracle;
mod refine;
pub mod simplex;
pub mod synth;

pub use affinity::{
    gaussian_kernel, pairwise_distances, sigma_from_condensed, sigma_heuristic, validate_affinity,
    AffinityDiagnostics, AffinityMatrix, DistanceMatrix, Metric, PointCloud,
};
pub use clustering::{
    assign_labels, cohesiveness, extract_dominant_set, peel_clusters, ClusterConfig,
    ClusteringResult, DominantSet, Labels,
};
pub use dynamics::{
    exp_rd_step, inimdyn_step, nash_gap, payoff, rd_step, run_dynamics, DynamicsConfig,
    DynamicsKind, DynamicsResult, StopCriterion,
};
pub use error::{Error, Result};
pub use oracle::{grid_simplex_maximizer, maximal_cliques, GridSolution};
pub use simplex::{renormalize, support, SimplexVector, Support};
