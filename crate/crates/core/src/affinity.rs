//! Point clouds, distance matrices and affinity (payoff) matrices.
//!
//! An affinity matrix is the weighted adjacency of a graph without
//! self-loops: entries are finite, nonnegative and the diagonal is zero.
//! Symmetry is not required.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// A set of `m` points in `d` dimensions, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Array2<f64>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (m, d) = points.dim();
        if m == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "point cloud must have at least one point and one dimension, got {m}x{d}"
            )));
        }
        if let Some(((i, j), v)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate {v} at point {i}, dimension {j}"
            )));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::InvalidInput(format!(
                "point {i} has {} coordinates, expected {d}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn is_symmetric(self) -> bool {
        match self {
            Metric::Euclidean => true,
        }
    }

    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Full `n x n` matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Array2<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    pub fn new(values: Array2<f64>, metric: Metric) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c {
            return Err(Error::InvalidInput(format!(
                "distance matrix must be square, got {r}x{c}"
            )));
        }
        for ((i, j), &v) in values.indexed_iter() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "distance ({i},{j}) = {v} is not a finite nonnegative number"
                )));
            }
            if i == j && v != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "distance ({i},{i}) = {v}, self-distance must be 0"
                )));
            }
        }
        Ok(Self { values, metric })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    /// Strictly-upper-triangular entries in row-major order (`i < j`).
    pub fn condensed(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.values[[i, j]]);
            }
        }
        out
    }
}

pub fn pairwise_distances(pc: &PointCloud, metric: Metric) -> DistanceMatrix {
    let n = pc.len();
    let pts = pc.points();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        let a = pts.row(i);
        let a = a.as_slice().expect("standard layout");
        for j in i + 1..n {
            let b = pts.row(j);
            let d = metric.eval(a, b.as_slice().expect("standard layout"));
            values[[i, j]] = d;
            values[[j, i]] = if metric.is_symmetric() {
                d
            } else {
                metric.eval(b.as_slice().expect("standard layout"), a)
            };
        }
    }
    DistanceMatrix { values, metric }
}

/// Kernel scale heuristic: three times the unbiased sample variance of the
/// pairwise distances over `i < j`.
///
/// Returns 0 when every pairwise distance is equal (including `n = 2`, where
/// there is a single distance); [`gaussian_kernel`] rejects that value.
pub fn sigma_heuristic(dm: &DistanceMatrix) -> Result<f64> {
    if dm.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: dm.n(),
        });
    }
    sigma_from_condensed(&dm.condensed())
}

/// [`sigma_heuristic`] over an already condensed distance vector.
pub fn sigma_from_condensed(distances: &[f64]) -> Result<f64> {
    match distances.len() {
        0 => Err(Error::InsufficientData { needed: 1, got: 0 }),
        1 => Ok(0.0),
        m => {
            let mean = distances.iter().sum::<f64>() / m as f64;
            let ss: f64 = distances.iter().map(|d| (d - mean) * (d - mean)).sum();
            Ok(3.0 * ss / (m - 1) as f64)
        }
    }
}

/// `a(i,j) = exp(-d(i,j) / sigma)` off the diagonal, zero on it.
pub fn gaussian_kernel(dm: &DistanceMatrix, sigma: f64) -> Result<AffinityMatrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kernel scale sigma must be positive and finite, got {sigma}"
        )));
    }
    let n = dm.n();
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            0.0
        } else {
            (-dm.values[[i, j]] / sigma).exp()
        }
    });
    Ok(AffinityMatrix { values })
}

/// Dense nonnegative similarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    values: Array2<f64>,
}

impl AffinityMatrix {
    /// Validates `values`; any violation reported by [`validate_affinity`]
    /// is an error.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let diag = validate_affinity(values.view());
        if diag.is_valid() {
            Ok(Self { values })
        } else {
            Err(Error::InvalidInput(diag.summary()))
        }
    }

    /// Zeroes the diagonal, then validates the rest.
    pub fn with_zeroed_diagonal(mut values: Array2<f64>) -> Result<Self> {
        if values.is_square() {
            values.diag_mut().fill(0.0);
        }
        Self::new(values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "affinity row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values =
            Array2::from_shape_vec((n, n), flat).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: Array2::zeros((n, n)),
        }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn is_symmetric(&self) -> bool {
        is_symmetric(self.values.view())
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> AffinityMatrix {
        let k = indices.len();
        let values = Array2::from_shape_fn((k, k), |(r, c)| self.values[[indices[r], indices[c]]]);
        AffinityMatrix { values }
    }

    /// `A x`, accumulated row by row in index order.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n());
        self.values
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A' x`.
    pub fn matvec_transposed(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n());
        let mut out = vec![0.0; self.n()];
        for (row, &xi) in self.values.rows().into_iter().zip(x) {
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += a * xi;
            }
        }
        out
    }
}

fn is_symmetric(values: ArrayView2<'_, f64>) -> bool {
    let n = values.nrows();
    values.is_square() && (0..n).all(|i| (i + 1..n).all(|j| values[[i, j]] == values[[j, i]]))
}

/// Findings of [`validate_affinity`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffinityDiagnostics {
    pub shape: (usize, usize),
    pub non_finite: Vec<(usize, usize)>,
    pub negative: Vec<(usize, usize)>,
    pub nonzero_diagonal: Vec<usize>,
    /// Informational only.
    pub asymmetric: bool,
    /// Informational only: every entry is zero.
    pub fully_disconnected: bool,
}

impl AffinityDiagnostics {
    pub fn is_square(&self) -> bool {
        self.shape.0 == self.shape.1
    }

    pub fn is_valid(&self) -> bool {
        self.is_square()
            && self.non_finite.is_empty()
            && self.negative.is_empty()
            && self.nonzero_diagonal.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.is_square() {
            parts.push(format!(
                "matrix is not square ({}x{})",
                self.shape.0, self.shape.1
            ));
        }
        if let Some(&(i, j)) = self.non_finite.first() {
            parts.push(format!(
                "{} non-finite entries, first at ({i},{j})",
                self.non_finite.len()
            ));
        }
        if let Some(&(i, j)) = self.negative.first() {
            parts.push(format!(
                "{} negative entries, first at ({i},{j})",
                self.negative.len()
            ));
        }
        if let Some(&i) = self.nonzero_diagonal.first() {
            parts.push(format!(
                "{} nonzero diagonal entries (self-loops), first at ({i},{i})",
                self.nonzero_diagonal.len()
            ));
        }
        if parts.is_empty() {
            "valid".to_owned()
        } else {
            parts.join("; ")
        }
    }
}

/// Reports every affinity-matrix violation without modifying the input.
pub fn validate_affinity(values: ArrayView2<'_, f64>) -> AffinityDiagnostics {
    let mut diag = AffinityDiagnostics {
        shape: values.dim(),
        fully_disconnected: values.iter().all(|&v| v == 0.0),
        ..Default::default()
    };
    for ((i, j), &v) in values.indexed_iter() {
        if !v.is_finite() {
            diag.non_finite.push((i, j));
        } else if v < 0.0 {
            diag.negative.push((i, j));
        }
        if i == j && v != 0.0 {
            diag.nonzero_diagonal.push(i);
        }
    }
    diag.asymmetric = diag.is_square() && !is_symmetric(values);
    diag
}
