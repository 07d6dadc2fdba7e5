//! Points of the standard simplex and their supports.

use crate::error::{Error, Result};

/// Default support threshold.
pub const DEFAULT_THETA: f64 = 1e-5;

/// Tolerance on `|sum - 1|` for a valid simplex vector.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Negative entries down to this value are rounding noise and get clamped.
pub const NEGATIVE_CLAMP: f64 = -1e-14;

/// A probability vector: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Checks the simplex invariants without rescaling.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter(
                "simplex vector must have at least one entry".into(),
            ));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "entry {i} = {v} is not a finite nonnegative number"
            )));
        }
        let s = accurate_sum(&entries);
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "entries sum to {s}, expected 1"
            )));
        }
        Ok(Self(entries))
    }

    pub fn barycenter(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "barycenter of a zero-dimensional simplex".into(),
            ));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// The pure strategy `e_k`.
    pub fn vertex(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidParameter(format!(
                "vertex {k} out of range for dimension {n}"
            )));
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest entry; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Neumaier-compensated sum.
pub(crate) fn accurate_sum(v: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Projects a nearly-simplex vector back onto the simplex by clamping
/// rounding-level negatives and dividing by the sum.
///
/// A vector whose sum is already within a few ulps of one is returned
/// without division, which makes the operation exactly idempotent.
pub fn renormalize(raw: &[f64]) -> Result<SimplexVector> {
    if raw.is_empty() {
        return Err(Error::DegenerateState("empty state vector".into()));
    }
    let mut v = Vec::with_capacity(raw.len());
    for (i, &x) in raw.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::DegenerateState(format!("entry {i} is {x}")));
        }
        if x < NEGATIVE_CLAMP {
            return Err(Error::DegenerateState(format!(
                "entry {i} = {x} is below the clamp tolerance"
            )));
        }
        v.push(x.max(0.0));
    }
    let s = accurate_sum(&v);
    if s <= 0.0 {
        return Err(Error::DegenerateState("all entries are zero".into()));
    }
    if (s - 1.0).abs() > 4.0 * f64::EPSILON {
        for x in &mut v {
            *x /= s;
        }
    }
    Ok(SimplexVector(v))
}

/// Indices whose weight strictly exceeds a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    indices: Vec<usize>,
    theta: f64,
}

impl Support {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// An empty support means `theta >= max x_i`: the state is degenerate
    /// at this threshold and the caller decides what to do.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// `{ i : x_i > theta }`.
pub fn support(x: &SimplexVector, theta: f64) -> Result<Support> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "support threshold must be finite and nonnegative, got {theta}"
        )));
    }
    let indices = x
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > theta)
        .map(|(i, _)| i)
        .collect();
    Ok(Support { indices, theta })
}
