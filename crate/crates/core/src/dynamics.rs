//! Evolutionary game dynamics that locally maximize `x'Ax` over the simplex.
//!
//! Three discrete-time update rules are available:
//!
//! * replicator dynamics, `x_i <- x_i (Ax)_i / x'Ax`;
//! * exponential replicator dynamics, `x_i <- x_i exp(k (Ax)_i) / Z`;
//! * infection-immunization dynamics, which at each step mixes the state with
//!   the most infective pure strategy (or co-strategy) at the share that
//!   maximizes the payoff along the segment.
//!
//! The infection-immunization rule is the selection-function scheme of
//! Rota Bulò, Pelillo and Bomze (2011); the host literature for dominant-set
//! clustering names it without restating the update.

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
use crate::simplex::{renormalize, SimplexVector};

pub const DEFAULT_PRECISION: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_KAPPA: f64 = 1.0;

/// Payoff excesses at or below this (relative to the payoff scale) count as
/// zero in the infection-immunization selection.
const NASH_RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DynamicsKind {
    #[default]
    Replicator,
    ExponentialReplicator {
        kappa: f64,
    },
    InfectionImmunization,
}

impl DynamicsKind {
    pub fn name(&self) -> &'static str {
        match self {
            DynamicsKind::Replicator => "rd",
            DynamicsKind::ExponentialReplicator { .. } => "exprd",
            DynamicsKind::InfectionImmunization => "inimdyn",
        }
    }
}

/// Quantity bounded by `precision` to declare convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// `||x(t+1) - x(t)||_2 < precision`.
    #[default]
    IterateDistance,
    /// `|x(t+1)'Ax(t+1) - x(t)'Ax(t)| < precision`.
    PayoffChange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub kind: DynamicsKind,
    pub precision: f64,
    pub max_iters: usize,
    pub criterion: StopCriterion,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            kind: DynamicsKind::Replicator,
            precision: DEFAULT_PRECISION,
            max_iters: DEFAULT_MAX_ITERS,
            criterion: StopCriterion::IterateDistance,
        }
    }
}

impl DynamicsConfig {
    pub fn new(kind: DynamicsKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn with_precision(mut self, precision: f64) -> Self {
        self.precision = precision;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.precision > 0.0 && self.precision.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "precision must be positive, got {}",
                self.precision
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if let DynamicsKind::ExponentialReplicator { kappa } = self.kind {
            check_kappa(kappa)?;
        }
        Ok(())
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "kappa must be positive and finite, got {kappa}"
        )))
    }
}

fn check_dims(a: &AffinityMatrix, x: &SimplexVector) -> Result<()> {
    if a.n() == x.len() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "state has dimension {} but the affinity matrix is {}x{}",
            x.len(),
            a.n(),
            a.n()
        )))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x'Ax`.
///
/// # Panics
/// If the dimensions disagree.
pub fn payoff(a: &AffinityMatrix, x: &SimplexVector) -> f64 {
    assert_eq!(a.n(), x.len(), "dimension mismatch");
    dot(x.as_slice(), &a.matvec(x.as_slice()))
}

/// `max_i (Ax)_i - x'Ax`: zero exactly at equilibria of the clustering game.
///
/// # Panics
/// If the dimensions disagree.
pub fn nash_gap(a: &AffinityMatrix, x: &SimplexVector) -> f64 {
    assert_eq!(a.n(), x.len(), "dimension mismatch");
    let ax = a.matvec(x.as_slice());
    let p = dot(x.as_slice(), &ax);
    ax.iter().copied().fold(f64::NEG_INFINITY, f64::max) - p
}

pub fn rd_step(a: &AffinityMatrix, x: &SimplexVector) -> Result<SimplexVector> {
    check_dims(a, x)?;
    let ax = a.matvec(x.as_slice());
    let p = dot(x.as_slice(), &ax);
    if p <= 0.0 {
        return Err(Error::ZeroPayoff);
    }
    let next: Vec<f64> = x
        .as_slice()
        .iter()
        .zip(&ax)
        .map(|(xi, axi)| xi * axi / p)
        .collect();
    renormalize(&next)
}

pub fn exp_rd_step(a: &AffinityMatrix, x: &SimplexVector, kappa: f64) -> Result<SimplexVector> {
    check_kappa(kappa)?;
    check_dims(a, x)?;
    let xs = x.as_slice();
    let fitness: Vec<f64> = a.matvec(xs).into_iter().map(|v| kappa * v).collect();
    if fitness.iter().any(|f| !f.is_finite()) {
        return Err(Error::NumericOverflow("exponential replicator fitness"));
    }
    // Shift by the max over the support so the largest weight is exp(0).
    let shift = xs
        .iter()
        .zip(&fitness)
        .filter(|(&xi, _)| xi > 0.0)
        .map(|(_, &f)| f)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = xs
        .iter()
        .zip(&fitness)
        .map(|(&xi, &f)| {
            if xi > 0.0 {
                xi * (f - shift).exp()
            } else {
                0.0
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::NumericOverflow("exponential replicator normalizer"));
    }
    let next: Vec<f64> = weights.iter().map(|w| w / z).collect();
    renormalize(&next)
}

pub fn inimdyn_step(a: &AffinityMatrix, x: &SimplexVector) -> Result<SimplexVector> {
    inimdyn_step_with_tolerance(a, x, 0.0)
}

/// One infection-immunization step. Pure strategies whose payoff excess lies
/// within `tolerance` of zero are treated as neither infective nor immune.
pub(crate) fn inimdyn_step_with_tolerance(
    a: &AffinityMatrix,
    x: &SimplexVector,
    tolerance: f64,
) -> Result<SimplexVector> {
    check_dims(a, x)?;
    let xs = x.as_slice();
    let ax = a.matvec(xs);
    let p = dot(xs, &ax);
    let scale = ax
        .iter()
        .copied()
        .fold(p.abs(), f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = tolerance.max(NASH_RELATIVE_TOLERANCE * scale);

    // (index, |excess|, infective pure strategy?)
    let mut pick: Option<(usize, f64, bool)> = None;
    for (i, (&xi, &axi)) in xs.iter().zip(&ax).enumerate() {
        let excess = axi - p;
        let candidate = if excess > tol {
            Some((excess, true))
        } else if excess < -tol && xi > 0.0 && xi < 1.0 {
            Some((-excess, false))
        } else {
            None
        };
        if let Some((score, pure)) = candidate {
            if pick.is_none_or(|(_, best, _)| score > best) {
                pick = Some((i, score, pure));
            }
        }
    }
    let Some((i, _, pure)) = pick else {
        return Ok(x.clone());
    };

    // (e_i - x)'A(e_i - x)
    let atx_i: f64 = xs.iter().enumerate().map(|(j, &xj)| a.get(j, i) * xj).sum();
    let curvature_pure = a.get(i, i) - ax[i] - atx_i + p;
    let excess = ax[i] - p;

    let next: Vec<f64> = if pure {
        let z_az = curvature_pure;
        let delta = share(excess, z_az);
        xs.iter()
            .enumerate()
            .map(|(j, &xj)| (1.0 - delta) * xj + if j == i { delta } else { 0.0 })
            .collect()
    } else {
        // Co-strategy (x - x_i e_i) / (1 - x_i) = x - c (e_i - x), c = x_i / (1 - x_i).
        let c = xs[i] / (1.0 - xs[i]);
        let gain = -c * excess;
        let z_az = c * c * curvature_pure;
        let delta = share(gain, z_az);
        xs.iter()
            .enumerate()
            .map(|(j, &xj)| {
                if j == i {
                    (1.0 - delta) * xj
                } else {
                    xj * (1.0 + delta * c)
                }
            })
            .collect()
    };
    renormalize(&next)
}

/// Invasion share maximizing the payoff along `x + delta (y - x)`.
fn share(gain: f64, z_az: f64) -> f64 {
    if z_az < 0.0 {
        (gain / -z_az).min(1.0)
    } else {
        1.0
    }
}

fn step(a: &AffinityMatrix, x: &SimplexVector, cfg: &DynamicsConfig) -> Result<SimplexVector> {
    match cfg.kind {
        DynamicsKind::Replicator => rd_step(a, x),
        DynamicsKind::ExponentialReplicator { kappa } => exp_rd_step(a, x, kappa),
        DynamicsKind::InfectionImmunization => inimdyn_step_with_tolerance(a, x, cfg.precision),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsResult {
    pub state: SimplexVector,
    /// Completed steps.
    pub iterations: usize,
    /// `x'Ax` at `state`.
    pub payoff: f64,
    pub converged: bool,
    pub nash_gap: f64,
}

/// Where a run stopped, including the last valid state when a step failed.
pub(crate) struct Trajectory {
    pub state: SimplexVector,
    pub iterations: usize,
    pub converged: bool,
    pub error: Option<Error>,
}

pub(crate) fn iterate(a: &AffinityMatrix, x0: SimplexVector, cfg: &DynamicsConfig) -> Trajectory {
    let mut x = x0;
    let mut last_payoff = match cfg.criterion {
        StopCriterion::PayoffChange => payoff(a, &x),
        StopCriterion::IterateDistance => 0.0,
    };
    for t in 1..=cfg.max_iters {
        let next = match step(a, &x, cfg) {
            Ok(next) => next,
            Err(e) => {
                return Trajectory {
                    state: x,
                    iterations: t - 1,
                    converged: false,
                    error: Some(Error::AtIteration {
                        iteration: t,
                        source: Box::new(e),
                    }),
                }
            }
        };
        let done = match cfg.criterion {
            StopCriterion::IterateDistance => {
                let d2: f64 = next
                    .as_slice()
                    .iter()
                    .zip(x.as_slice())
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum();
                d2.sqrt() < cfg.precision
            }
            StopCriterion::PayoffChange => {
                let p = payoff(a, &next);
                let done = (p - last_payoff).abs() < cfg.precision;
                last_payoff = p;
                done
            }
        };
        x = next;
        if done {
            return Trajectory {
                state: x,
                iterations: t,
                converged: true,
                error: None,
            };
        }
    }
    Trajectory {
        state: x,
        iterations: cfg.max_iters,
        converged: false,
        error: None,
    }
}

/// Iterates the configured dynamics from `x0` until the stop criterion is met
/// or `max_iters` steps have been taken.
pub fn run_dynamics(
    a: &AffinityMatrix,
    x0: &SimplexVector,
    cfg: &DynamicsConfig,
) -> Result<DynamicsResult> {
    cfg.validate()?;
    check_dims(a, x0)?;
    let run = iterate(a, x0.clone(), cfg);
    if let Some(e) = run.error {
        return Err(e);
    }
    let payoff = payoff(a, &run.state);
    let nash_gap = nash_gap(a, &run.state);
    Ok(DynamicsResult {
        state: run.state,
        iterations: run.iterations,
        payoff,
        converged: run.converged,
        nash_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn edge() -> AffinityMatrix {
        AffinityMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    fn sv(v: &[f64]) -> SimplexVector {
        SimplexVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rd_fixed_point_and_single_step() {
        let a = edge();
        assert_eq!(rd_step(&a, &sv(&[0.5, 0.5])).unwrap(), sv(&[0.5, 0.5]));
        // Ax = (0.4, 0.6), x'Ax = 0.48, x' = (0.24, 0.24) / 0.48
        let next = rd_step(&a, &sv(&[0.6, 0.4])).unwrap();
        assert_relative_eq!(next.as_slice()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(next.as_slice()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rd_zero_payoff() {
        let a = AffinityMatrix::zeros(2);
        assert!(matches!(
            rd_step(&a, &sv(&[0.5, 0.5])),
            Err(Error::ZeroPayoff)
        ));
    }

    #[test]
    fn rd_dimension_mismatch() {
        assert!(matches!(
            rd_step(&edge(), &SimplexVector::barycenter(3).unwrap()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn exp_rd_values() {
        let a = edge();
        assert_eq!(
            exp_rd_step(&a, &sv(&[0.5, 0.5]), 1.0).unwrap(),
            sv(&[0.5, 0.5])
        );
        let next = exp_rd_step(&a, &sv(&[0.6, 0.4]), 1.0).unwrap();
        let w0 = 0.6 * 0.4f64.exp();
        let w1 = 0.4 * 0.6f64.exp();
        assert_relative_eq!(next.as_slice()[0], w0 / (w0 + w1), max_relative = 1e-14);
        assert_relative_eq!(
            next.as_slice()[0],
            0.551_186_330_469_544,
            max_relative = 1e-12
        );
    }

    #[test]
    fn exp_rd_vanishing_selection() {
        let a =
            AffinityMatrix::new(array![[0.0, 0.3, 0.9], [0.3, 0.0, 0.1], [0.9, 0.1, 0.0]]).unwrap();
        let x = sv(&[0.2, 0.5, 0.3]);
        let next = exp_rd_step(&a, &x, 1e-8).unwrap();
        let dist = next
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        assert!(dist <= 1e-7);
    }

    #[test]
    fn exp_rd_overflow_and_bad_kappa() {
        let a = AffinityMatrix::new(array![[0.0, f64::MAX], [f64::MAX, 0.0]]).unwrap();
        assert!(matches!(
            exp_rd_step(&a, &sv(&[0.5, 0.5]), 10.0),
            Err(Error::NumericOverflow(_))
        ));
        assert!(exp_rd_step(&edge(), &sv(&[0.5, 0.5]), 0.0).is_err());
    }

    #[test]
    fn exp_rd_large_fitness_is_shifted() {
        let a = AffinityMatrix::new(array![[0.0, 1e3], [1e3, 0.0]]).unwrap();
        let next = exp_rd_step(&a, &sv(&[0.6, 0.4]), 1.0).unwrap();
        assert!(next.as_slice().iter().all(|v| v.is_finite()));
        assert!(next.as_slice()[1] > 0.99);
    }

    #[test]
    fn inimdyn_immune_state_unchanged() {
        let a = edge();
        assert_eq!(inimdyn_step(&a, &sv(&[0.5, 0.5])).unwrap(), sv(&[0.5, 0.5]));
        let tri =
            AffinityMatrix::new(array![[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]).unwrap();
        let b = SimplexVector::barycenter(3).unwrap();
        assert_eq!(inimdyn_step(&tri, &b).unwrap(), b);
    }

    #[test]
    fn inimdyn_edge_step() {
        // excesses (-0.08, 0.12); e_1 infects with share 0.12 / 0.72 = 1/6
        let a = edge();
        let x = sv(&[0.6, 0.4]);
        let next = inimdyn_step(&a, &x).unwrap();
        assert_relative_eq!(next.as_slice()[0], 0.5, epsilon = 1e-15);
        assert!(payoff(&a, &next) > payoff(&a, &x));
    }

    #[test]
    fn inimdyn_immunizes_isolated_node() {
        let a =
            AffinityMatrix::new(array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let x = SimplexVector::barycenter(3).unwrap();
        let next = inimdyn_step(&a, &x).unwrap();
        assert!(next.as_slice()[2] < 1.0 / 3.0);
        assert!(payoff(&a, &next) > payoff(&a, &x));
    }

    #[test]
    fn nash_gap_values() {
        let a = edge();
        assert_eq!(nash_gap(&a, &sv(&[0.5, 0.5])), 0.0);
        assert_relative_eq!(nash_gap(&a, &sv(&[0.6, 0.4])), 0.12, epsilon = 1e-15);
        let b =
            AffinityMatrix::new(array![[0.0, 0.2, 0.7], [0.4, 0.0, 0.1], [0.3, 0.9, 0.0]]).unwrap();
        // at e_2 the gap is the largest weight pointing into column 2
        assert_eq!(nash_gap(&b, &SimplexVector::vertex(3, 2).unwrap()), 0.7);
    }

    #[test]
    fn run_from_fixed_point_converges_in_one_step() {
        let a = edge();
        let x0 = SimplexVector::barycenter(2).unwrap();
        for kind in [
            DynamicsKind::Replicator,
            DynamicsKind::ExponentialReplicator { kappa: 1.0 },
            DynamicsKind::InfectionImmunization,
        ] {
            let r = run_dynamics(&a, &x0, &DynamicsConfig::new(kind)).unwrap();
            assert!(r.converged);
            assert_eq!(r.iterations, 1);
            assert_eq!(r.payoff, 0.5);
            assert_eq!(r.nash_gap, 0.0);
        }
    }

    #[test]
    fn run_with_single_iteration_cap() {
        let a =
            AffinityMatrix::new(array![[0.0, 1.0, 0.2], [1.0, 0.0, 0.1], [0.2, 0.1, 0.0]]).unwrap();
        let cfg = DynamicsConfig::default().with_max_iters(1);
        let r = run_dynamics(&a, &SimplexVector::barycenter(3).unwrap(), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn run_annotates_iteration_on_failure() {
        let a = AffinityMatrix::zeros(3);
        let err = run_dynamics(
            &a,
            &SimplexVector::barycenter(3).unwrap(),
            &DynamicsConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::AtIteration { iteration: 1, .. }));
        assert!(matches!(err.root(), Error::ZeroPayoff));
    }

    #[test]
    fn payoff_change_criterion() {
        let a =
            AffinityMatrix::new(array![[0.0, 1.0, 0.2], [1.0, 0.0, 0.1], [0.2, 0.1, 0.0]]).unwrap();
        let cfg = DynamicsConfig {
            criterion: StopCriterion::PayoffChange,
            precision: 1e-12,
            ..DynamicsConfig::default()
        };
        let r = run_dynamics(&a, &SimplexVector::barycenter(3).unwrap(), &cfg).unwrap();
        assert!(r.converged);
        assert!(r.state.as_slice()[2] < 1e-3);
    }

    #[test]
    fn invalid_configs() {
        let a = edge();
        let x = SimplexVector::barycenter(2).unwrap();
        let bad = [
            DynamicsConfig::default().with_precision(0.0),
            DynamicsConfig::default().with_max_iters(0),
            DynamicsConfig::new(DynamicsKind::ExponentialReplicator { kappa: -1.0 }),
        ];
        for cfg in bad {
            assert!(matches!(
                run_dynamics(&a, &x, &cfg),
                Err(Error::InvalidParameter(_))
            ));
        }
    }
}
