use ndarray::Array2;
use proptest::prelude::*;

use dsclust_core::oracle::{grid_simplex_maximizer, is_maximal_clique, maximal_cliques};
use dsclust_core::{
    exp_rd_step, gaussian_kernel, inimdyn_step, nash_gap, pairwise_distances, payoff,
    peel_clusters, rd_step, renormalize, run_dynamics, support, AffinityMatrix, ClusterConfig,
    DynamicsConfig, DynamicsKind, Metric, PointCloud, SimplexVector,
};

fn symmetric(n: usize, w: &[f64]) -> AffinityMatrix {
    let mut v = Array2::zeros((n, n));
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            v[[i, j]] = w[k];
            v[[j, i]] = w[k];
            k += 1;
        }
    }
    AffinityMatrix::new(v).unwrap()
}

fn affinity(max_n: usize) -> impl Strategy<Value = AffinityMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.0f64..1.0, n * (n - 1) / 2).prop_map(move |w| symmetric(n, &w))
    })
}

fn graph(max_n: usize) -> impl Strategy<Value = AffinityMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::ANY, n * (n - 1) / 2).prop_map(move |e| {
            let w: Vec<f64> = e.iter().map(|&b| f64::from(u8::from(b))).collect();
            symmetric(n, &w)
        })
    })
}

fn with_state(max_n: usize) -> impl Strategy<Value = (AffinityMatrix, SimplexVector)> {
    affinity(max_n).prop_flat_map(|a| {
        let n = a.n();
        (Just(a), prop::collection::vec(0.0f64..1.0, n))
            .prop_filter_map("zero state", |(a, raw)| {
                renormalize(&raw).ok().map(|x| (a, x))
            })
    })
}

fn is_simplex(x: &SimplexVector) -> bool {
    let s: f64 = x.as_slice().iter().sum();
    x.as_slice().iter().all(|&v| v >= 0.0) && (s - 1.0).abs() <= 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distances_form_a_metric(pts in prop::collection::vec(-50.0f64..50.0, 6..=24)) {
        let rows = pts.len() / 3;
        let cloud = PointCloud::new(
            Array2::from_shape_vec((rows, 3), pts[..rows * 3].to_vec()).unwrap()
        ).unwrap();
        let d = pairwise_distances(&cloud, Metric::Euclidean);
        let v = d.values();
        for i in 0..rows {
            prop_assert_eq!(v[[i, i]], 0.0);
            for j in 0..rows {
                prop_assert_eq!(v[[i, j]], v[[j, i]]);
                for k in 0..rows {
                    prop_assert!(v[[i, j]] <= v[[i, k]] + v[[k, j]] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn kernel_is_bounded_and_monotone(
        pts in prop::collection::vec(-10.0f64..10.0, 4..=20),
        sigma in 0.01f64..100.0,
    ) {
        let rows = pts.len() / 2;
        let cloud = PointCloud::new(
            Array2::from_shape_vec((rows, 2), pts[..rows * 2].to_vec()).unwrap()
        ).unwrap();
        let d = pairwise_distances(&cloud, Metric::Euclidean);
        let a = gaussian_kernel(&d, sigma).unwrap();
        prop_assert!(a.is_symmetric());
        let cd = d.condensed();
        let mut ca = Vec::new();
        for i in 0..rows {
            prop_assert_eq!(a.get(i, i), 0.0);
            for j in i + 1..rows {
                ca.push(a.get(i, j));
            }
        }
        for (p, (&dp, &ap)) in cd.iter().zip(&ca).enumerate() {
            prop_assert!((0.0..=1.0).contains(&ap));
            for (&dq, &aq) in cd.iter().zip(&ca).skip(p + 1) {
                if dp < dq {
                    prop_assert!(ap >= aq);
                } else if dq < dp {
                    prop_assert!(aq >= ap);
                }
            }
        }
    }

    #[test]
    fn steps_stay_on_the_simplex((a, x) in with_state(10), kappa in 0.1f64..20.0) {
        prop_assert!(is_simplex(&rd_step(&a, &x).unwrap()));
        prop_assert!(is_simplex(&exp_rd_step(&a, &x, kappa).unwrap()));
        prop_assert!(is_simplex(&inimdyn_step(&a, &x).unwrap()));
    }

    #[test]
    fn payoff_never_decreases((a, x) in with_state(10)) {
        let p = payoff(&a, &x);
        let tol = 1e-12 * p.max(1.0);
        prop_assert!(payoff(&a, &rd_step(&a, &x).unwrap()) >= p - tol);
        prop_assert!(payoff(&a, &inimdyn_step(&a, &x).unwrap()) >= p - tol);
    }

    #[test]
    fn rd_support_never_grows((a, x) in with_state(8), zeros in prop::collection::vec(prop::bool::ANY, 8)) {
        let raw: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(&zeros)
            .map(|(&v, &z)| if z { 0.0 } else { v })
            .collect();
        prop_assume!(raw.iter().any(|&v| v > 0.0));
        let mut x = renormalize(&raw).unwrap();
        let zero_at: Vec<usize> = (0..x.len()).filter(|&i| x.as_slice()[i] == 0.0).collect();
        for _ in 0..20 {
            match rd_step(&a, &x) {
                Ok(next) => x = next,
                Err(_) => break,
            }
            for &i in &zero_at {
                prop_assert_eq!(x.as_slice()[i], 0.0);
            }
        }
    }

    #[test]
    fn nash_gap_is_nonnegative((a, x) in with_state(10)) {
        prop_assert!(nash_gap(&a, &x) >= -1e-12);
    }

    #[test]
    fn converged_runs_are_near_equilibria(a in affinity(8)) {
        let cfg = DynamicsConfig::default().with_precision(1e-9).with_max_iters(50_000);
        let r = run_dynamics(&a, &SimplexVector::barycenter(a.n()).unwrap(), &cfg).unwrap();
        if r.converged {
            let ax = a.matvec(r.state.as_slice());
            for &i in support(&r.state, 1e-5).unwrap().indices() {
                prop_assert!((ax[i] - r.payoff).abs() <= 1e-3, "i={} (Ax)_i={} p={}", i, ax[i], r.payoff);
            }
        }
    }

    #[test]
    fn peeling_partitions_the_nodes(a in affinity(14)) {
        let r = peel_clusters(&a, &ClusterConfig::default()).unwrap();
        let n = a.n();
        prop_assert!(r.num_clusters() <= n);
        let mut seen = vec![0; n];
        for (k, ds) in r.clusters.iter().enumerate() {
            prop_assert!(!ds.is_empty());
            prop_assert_eq!(ds.extraction_order, k);
            prop_assert!(ds.members.contains(&ds.centroid));
            for &m in &ds.members {
                seen[m] += 1;
                prop_assert_eq!(r.labels[m], k);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let again = peel_clusters(&a, &ClusterConfig::default()).unwrap();
        prop_assert_eq!(r.labels, again.labels);
    }

    #[test]
    fn cohesiveness_matches_residual_rerun(a in affinity(10)) {
        let cfg = ClusterConfig::default();
        let r = peel_clusters(&a, &cfg).unwrap();
        let mut remaining: Vec<usize> = (0..a.n()).collect();
        for ds in &r.clusters {
            let local = dsclust_core::extract_dominant_set(&a.submatrix(&remaining), &cfg).unwrap();
            let mapped: Vec<usize> = local.members.iter().map(|&i| remaining[i]).collect();
            prop_assert_eq!(&mapped, &ds.members);
            prop_assert!((local.cohesiveness - ds.cohesiveness).abs() <= 1e-12);
            remaining.retain(|i| !ds.members.contains(i));
        }
        prop_assert!(remaining.is_empty());
    }

    #[test]
    fn graphs_yield_maximal_cliques(a in graph(12)) {
        let r = peel_clusters(&a, &ClusterConfig::default()).unwrap();
        let mut remaining: Vec<usize> = (0..a.n()).collect();
        for ds in &r.clusters {
            let residual = a.submatrix(&remaining);
            let local: Vec<usize> = ds
                .members
                .iter()
                .map(|m| remaining.iter().position(|r| r == m).unwrap())
                .collect();
            if local.len() > 1 {
                prop_assert!(is_maximal_clique(&residual, &local), "{:?}", ds.members);
                prop_assert!(maximal_cliques(&residual).unwrap().contains(&local));
                let k = local.len() as f64;
                prop_assert!((ds.cohesiveness - (1.0 - 1.0 / k)).abs() <= 1e-6);
            }
            remaining.retain(|i| !ds.members.contains(i));
        }
    }

    #[test]
    fn finer_grids_never_lose(a in affinity(5)) {
        let coarse = grid_simplex_maximizer(&a, 6).unwrap();
        let fine = grid_simplex_maximizer(&a, 12).unwrap();
        prop_assert!(fine.payoff_best >= coarse.payoff_best - 1e-12);
    }

}

#[test]
fn clique_face_barycenter_is_fixed() {
    // K4 minus the edge {0,3}: both triangles are maximal cliques
    let a = symmetric(4, &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
    for clique in maximal_cliques(&a).unwrap() {
        let mut x = vec![0.0; 4];
        for &i in &clique {
            x[i] = 1.0 / clique.len() as f64;
        }
        let x = SimplexVector::new(x).unwrap();
        let r = run_dynamics(&a, &x, &DynamicsConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(
            support(&r.state, 1e-5).unwrap().indices(),
            clique.as_slice()
        );
        assert!((r.payoff - 2.0 / 3.0).abs() < 1e-12);
    }
}

#[test]
fn dynamics_agree_on_clear_structure() {
    let a = symmetric(
        5,
        &[0.95, 0.92, 0.05, 0.02, 0.97, 0.08, 0.01, 0.04, 0.03, 0.06],
    );
    let x0 = SimplexVector::barycenter(5).unwrap();
    for kind in [
        DynamicsKind::Replicator,
        DynamicsKind::ExponentialReplicator { kappa: 1.0 },
        DynamicsKind::ExponentialReplicator { kappa: 5.0 },
        DynamicsKind::InfectionImmunization,
    ] {
        let r = run_dynamics(&a, &x0, &DynamicsConfig::new(kind)).unwrap();
        assert!(r.converged, "{kind:?}");
        assert_eq!(
            support(&r.state, 1e-5).unwrap().indices(),
            &[0, 1, 2],
            "{kind:?}"
        );
    }
}
