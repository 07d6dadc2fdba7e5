//! Post-convergence refinement toward strict local maximizers.
//!
//! Plain dynamics started from the barycenter can stop on equilibria that are
//! not strict local maximizers of `x'Ax`: on 0/1 graphs the path `0-1-2`
//! settles at `(1/4, 1/2, 1/4)`, and any regular graph keeps the barycenter
//! fixed. Their supports are not dominant sets. Two moves repair this:
//!
//! * if a node outside the support earns more than the current payoff, one
//!   infection step lets it in;
//! * if the payoff restricted to the support's face has a direction of
//!   nonnegative curvature, the state slides along it to the face boundary,
//!   which drops at least one node without lowering the payoff.
//!
//! Dynamics are re-run after each move. On generic weighted graphs the
//! curvature on a converged support is strictly negative and nothing changes.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::affinity::AffinityMatrix;
use crate::dynamics::{inimdyn_step_with_tolerance, iterate, DynamicsConfig};
use crate::simplex::{renormalize, SimplexVector};

const MAX_ROUNDS: usize = 64;
const CURVATURE_TOLERANCE: f64 = 1e-9;
const INVASION_TOLERANCE: f64 = 1e-6;

pub(crate) struct Refined {
    pub state: SimplexVector,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn refine(
    a: &AffinityMatrix,
    mut x: SimplexVector,
    cfg: &DynamicsConfig,
    theta: f64,
    mut converged: bool,
) -> Refined {
    let mut iterations = 0;
    for _ in 0..MAX_ROUNDS {
        let xs = x.as_slice();
        let ax = a.matvec(xs);
        let p: f64 = xs.iter().zip(&ax).map(|(u, v)| u * v).sum();
        if p <= 0.0 {
            break;
        }
        let members: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] > theta).collect();

        let invasion_tol = (INVASION_TOLERANCE * p).max(1e-9);
        let invaded = (0..xs.len()).any(|j| xs[j] <= theta && ax[j] - p > invasion_tol);
        let start = if invaded {
            match inimdyn_step_with_tolerance(a, &x, invasion_tol) {
                Ok(next) if next != x => next,
                _ => break,
            }
        } else {
            if members.len() < 2 {
                break;
            }
            let Some(dir) = ascent_direction(a, &members) else {
                break;
            };
            match slide_to_boundary(xs, &ax, &members, &dir) {
                Some(next) => next,
                None => break,
            }
        };

        let run = iterate(a, start, cfg);
        iterations += run.iterations;
        converged = run.converged;
        x = run.state;
        if run.error.is_some() {
            break;
        }
    }
    Refined {
        state: x,
        iterations,
        converged,
    }
}

/// A unit tangent direction of the face spanned by `members` along which
/// `z' A z >= -tol`, or `None` when the restricted payoff is strictly concave
/// on the face.
fn ascent_direction(a: &AffinityMatrix, members: &[usize]) -> Option<Vec<f64>> {
    let k = members.len();
    let sym = DMatrix::from_fn(k, k, |r, c| {
        0.5 * (a.get(members[r], members[c]) + a.get(members[c], members[r]))
    });
    let scale = sym.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = CURVATURE_TOLERANCE * scale;

    // P S P on the tangent space, with the all-ones direction pushed far
    // below any tangent eigenvalue.
    let kf = k as f64;
    let proj = DMatrix::from_fn(k, k, |r, c| f64::from(u8::from(r == c)) - 1.0 / kf);
    let ones = DMatrix::from_element(k, k, 1.0 / kf);
    let shift = kf * scale + 1.0;
    let m = &proj * &sym * &proj - ones * shift;

    let test = -&m - DMatrix::identity(k, k) * tol;
    if Cholesky::new(test).is_some() {
        return None;
    }
    let eig = SymmetricEigen::new(m);
    let (best, &lambda) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| {
                if *v > *acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });
    if lambda < -tol {
        return None;
    }
    let z: Vec<f64> = eig.eigenvectors.column(best).iter().copied().collect();
    // Remove residual drift off the tangent space.
    let mean = z.iter().sum::<f64>() / kf;
    Some(z.into_iter().map(|v| v - mean).collect())
}

/// Moves `x` along `dir` (supported on `members`) until a coordinate hits
/// zero, choosing the sign that does not decrease the payoff to first order.
fn slide_to_boundary(
    xs: &[f64],
    ax: &[f64],
    members: &[usize],
    dir: &[f64],
) -> Option<SimplexVector> {
    let slope: f64 = members.iter().zip(dir).map(|(&i, d)| d * ax[i]).sum();
    let sign = if slope < 0.0 { -1.0 } else { 1.0 };

    let mut hit: Option<(usize, f64)> = None;
    for (r, (&i, &d)) in members.iter().zip(dir).enumerate() {
        let d = sign * d;
        if d < 0.0 {
            let t = xs[i] / -d;
            if hit.is_none_or(|(_, best)| t < best) {
                hit = Some((r, t));
            }
        }
    }
    let (hit_row, t) = hit?;

    let mut next = xs.to_vec();
    for (r, (&i, &d)) in members.iter().zip(dir).enumerate() {
        next[i] = if r == hit_row {
            0.0
        } else {
            (xs[i] + t * sign * d).max(0.0)
        };
    }
    renormalize(&next).ok()
}
