//! Brute-force references for small inputs: exhaustive grid search of
//! `max x'Ax` over the simplex, and maximal-clique enumeration.
//!
//! These are deliberately independent of the dynamics and are used to
//! cross-check them.

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::simplex::SimplexVector;

pub const MAX_GRID_DIMENSION: usize = 8;
pub const GRID_BUDGET: u128 = 10_000_000;
pub const DEFAULT_GRID_RESOLUTION: u32 = 20;
pub const MAX_CLIQUE_NODES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub x_best: SimplexVector,
    /// `resolution * x_best`, exactly.
    pub counts: Vec<u32>,
    pub payoff_best: f64,
    pub resolution: u32,
}

/// Number of grid points of the simplex in `n` dimensions with denominator
/// `k`: `C(k + n - 1, n - 1)`.
pub fn grid_size(n: usize, k: u32) -> u128 {
    if n == 0 {
        return 0;
    }
    let (top, r) = (k as u128 + n as u128 - 1, n as u128 - 1);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(top - i) / (i + 1);
    }
    acc
}

/// Evaluates `x'Ax` at every point of `simplex ∩ (1/k) Z^n` and returns the
/// best one.
///
/// Points are visited in decreasing lexicographic order of their counts,
/// starting at `e_1`; ties keep the first point visited.
pub fn grid_simplex_maximizer(a: &AffinityMatrix, k: u32) -> Result<GridSolution> {
    let n = a.n();
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid search needs n >= 1 and k >= 1, got n = {n}, k = {k}"
        )));
    }
    if n > MAX_GRID_DIMENSION {
        return Err(Error::BudgetExceeded(format!(
            "grid search supports at most {MAX_GRID_DIMENSION} nodes, got {n}"
        )));
    }
    let points = grid_size(n, k);
    if points > GRID_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{points} grid points for n = {n}, k = {k} exceed the budget of {GRID_BUDGET}"
        )));
    }

    let mut counts = vec![0u32; n];
    counts[0] = k;
    let mut best_counts = counts.clone();
    let mut best = quadratic_form(a, &counts);
    while next_composition(&mut counts) {
        let v = quadratic_form(a, &counts);
        if v > best {
            best = v;
            best_counts.clone_from(&counts);
        }
    }
    let kf = f64::from(k);
    let x_best = SimplexVector::new(best_counts.iter().map(|&c| f64::from(c) / kf).collect())?;
    Ok(GridSolution {
        x_best,
        payoff_best: best / (kf * kf),
        counts: best_counts,
        resolution: k,
    })
}

fn quadratic_form(a: &AffinityMatrix, counts: &[u32]) -> f64 {
    let mut total = 0.0;
    for (i, &ci) in counts.iter().enumerate() {
        if ci == 0 {
            continue;
        }
        let row: f64 = counts
            .iter()
            .enumerate()
            .filter(|(_, &cj)| cj > 0)
            .map(|(j, &cj)| a.get(i, j) * f64::from(cj))
            .sum();
        total += f64::from(ci) * row;
    }
    total
}

/// Advances to the next composition in decreasing lexicographic order.
fn next_composition(c: &mut [u32]) -> bool {
    let last = c.len() - 1;
    let Some(j) = (0..last).rev().find(|&j| c[j] > 0) else {
        return false;
    };
    let tail = c[last];
    c[j] -= 1;
    c[last] = 0;
    c[j + 1] = tail + 1;
    true
}

/// True when every entry is exactly 0 or 1.
pub fn is_binary(a: &AffinityMatrix) -> bool {
    a.values().iter().all(|&v| v == 0.0 || v == 1.0)
}

/// All maximal cliques of a 0/1 symmetric graph, each sorted ascending, the
/// list sorted lexicographically.
pub fn maximal_cliques(adjacency: &AffinityMatrix) -> Result<Vec<Vec<usize>>> {
    let n = adjacency.n();
    if n > MAX_CLIQUE_NODES {
        return Err(Error::BudgetExceeded(format!(
            "clique enumeration supports at most {MAX_CLIQUE_NODES} nodes, got {n}"
        )));
    }
    if !is_binary(adjacency) {
        return Err(Error::InvalidInput(
            "clique enumeration needs a 0/1 adjacency matrix".into(),
        ));
    }
    if !adjacency.is_symmetric() {
        return Err(Error::InvalidInput(
            "clique enumeration needs a symmetric adjacency matrix".into(),
        ));
    }
    let neighbors: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| adjacency.get(i, j) == 1.0)
                .fold(0u32, |m, j| m | 1 << j)
        })
        .collect();

    let mut out = Vec::new();
    let all = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    bron_kerbosch(&neighbors, 0, all, 0, &mut out);
    let mut cliques: Vec<Vec<usize>> = out
        .into_iter()
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect();
    cliques.sort();
    Ok(cliques)
}

fn bron_kerbosch(neighbors: &[u32], r: u32, mut p: u32, mut x: u32, out: &mut Vec<u32>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    // Tomita pivot: the vertex of P ∪ X with the most neighbors in P.
    let pivot = bits(p | x)
        .max_by_key(|&u| ((neighbors[u] & p).count_ones(), std::cmp::Reverse(u)))
        .expect("P is nonempty");
    for v in bits(p & !neighbors[pivot]) {
        bron_kerbosch(
            neighbors,
            r | 1 << v,
            p & neighbors[v],
            x & neighbors[v],
            out,
        );
        p &= !(1 << v);
        x |= 1 << v;
    }
}

fn bits(mut m: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// True when `set` is a clique of `adjacency` that no outside node extends.
pub fn is_maximal_clique(adjacency: &AffinityMatrix, set: &[usize]) -> bool {
    let n = adjacency.n();
    let is_clique = set
        .iter()
        .all(|&i| set.iter().all(|&j| i == j || adjacency.get(i, j) > 0.0));
    is_clique
        && (0..n)
            .filter(|v| !set.contains(v))
            .all(|v| set.iter().any(|&i| adjacency.get(v, i) == 0.0))
}
