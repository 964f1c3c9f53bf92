use flock_core::analysis::{
    cluster_count, e_matrix, fluctuation_norm, squared_distance_derivative, velocity_deviation,
};
use flock_core::dynamics::{
    integrate, CouplingMatrix, IntegrationSpec, ModelKind, ModelParams, ParticleEnsemble,
};
use flock_core::graph::{TemporalGraph, WeightedDigraph};
use flock_core::matrix::Matrix;
use proptest::prelude::*;

fn mean(points: &[f64], dim: usize) -> Vec<f64> {
    let n = points.len() / dim;
    (0..dim)
        .map(|c| (0..n).map(|i| points[i * dim + c]).sum::<f64>() / n as f64)
        .collect()
}

fn laplacian_run(g: WeightedDigraph, x: Vec<f64>, dim: usize, horizon: f64, dt: f64) -> Vec<f64> {
    let n = g.n_vertices();
    let ens = ParticleEnsemble::from_positions(n, dim, x).unwrap();
    let traj = integrate(
        &ModelParams::new(ModelKind::Laplacian),
        &ens,
        None,
        Some(&TemporalGraph::fixed(g)),
        &IntegrationSpec::new(horizon, dt, 1),
    )
    .unwrap();
    traj.last().unwrap().positions().to_vec()
}

#[test]
fn rk4_error_ratio_on_k3() {
    let x0 = vec![0.0, 1.0, 5.0];
    let m = 2.0;
    let exact: Vec<f64> = x0.iter().map(|v| m + (v - m) * (-3.0_f64).exp()).collect();
    let err = |dt: f64| {
        let x = laplacian_run(
            WeightedDigraph::complete(3, 1.0).unwrap(),
            x0.clone(),
            1,
            1.0,
            dt,
        );
        x.iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..=20.0).contains(&ratio), "error ratio {ratio}");
}

fn digraph_and_points(dim: usize) -> impl Strategy<Value = (WeightedDigraph, Vec<f64>)> {
    (2usize..8).prop_flat_map(move |n| {
        (
            prop::collection::vec(prop_oneof![Just(0.0), 0.1..3.0f64], n * n),
            prop::collection::vec(-10.0..10.0f64, n * dim),
        )
            .prop_map(move |(w, x)| {
                let mut g = WeightedDigraph::empty(n).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            g.set_weight(i, j, w[i * n + j]);
                        }
                    }
                }
                (g, x)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pair_distances_obey_comparison_inequality((g, x) in digraph_and_points(2)) {
        let n = g.n_vertices();
        let e = e_matrix(&g).unwrap();
        let mut xi = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                xi.push((0..2).map(|c| (x[i * 2 + c] - x[j * 2 + c]).powi(2)).sum::<f64>());
            }
        }
        let bound = e.mul_vec(&xi).unwrap();
        let lhs = squared_distance_derivative(&g, &x, 2).unwrap();
        let scale = 1.0 + xi.iter().sum::<f64>() * 10.0;
        for (p, (l, b)) in lhs.iter().zip(&bound).enumerate() {
            prop_assert!(*l <= b + 1e-9 * scale, "pair {}: {} > {}", p, l, b);
        }
    }

    #[test]
    fn symmetric_consensus_keeps_mean((g, x) in digraph_and_points(1)) {
        let n = g.n_vertices();
        let mut s = WeightedDigraph::empty(n).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                s.set_undirected(i, j, g.weight(i, j));
            }
        }
        let end = laplacian_run(s, x.clone(), 1, 2.0, 0.01);
        prop_assert!((mean(&end, 1)[0] - mean(&x, 1)[0]).abs() < 1e-9);
        prop_assert!(fluctuation_norm(&end, 1) <= fluctuation_norm(&x, 1) * (1.0 + 1e-12));
    }

    #[test]
    fn clusters_match_brute_force(x in prop::collection::vec(0.0..4.0f64, 2..40), d in 0.2..1.5f64) {
        let n = x.len() / 2;
        let x = &x[..2 * n];
        let c = cluster_count(x, 2, d).unwrap();
        let near = |i: usize, j: usize| (x[2 * i] - x[2 * j]).powi(2) + (x[2 * i + 1] - x[2 * j + 1]).powi(2) < d * d;
        // Transitive closure of the proximity relation.
        let mut r = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                r[i][j] = i == j || near(i, j);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(c.labels[i] == c.labels[j], r[i][j]);
            }
        }
        let roots = (0..n).filter(|&i| (0..i).all(|j| !r[i][j])).count();
        prop_assert_eq!(c.count, roots);
    }
}

fn random_ensemble(n: usize, seed: u64) -> ParticleEnsemble {
    use flock_core::rng::{seeded, uniform};
    let mut rng = seeded(seed);
    let x = (0..2 * n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    let v = (0..2 * n).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    ParticleEnsemble::new(n, 2, x, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classical_in_range_keeps_momentum(seed in any::<u64>()) {
        let ens = random_ensemble(8, seed);
        let params = ModelParams::new(ModelKind::ClassicalCs).with_radius(1e6);
        let traj = integrate(&params, &ens, None, None, &IntegrationSpec::new(3.0, 1e-2, 10)).unwrap();
        let m0 = mean(ens.velocities(), 2);
        let mut prev = velocity_deviation(&ens);
        for s in &traj.states {
            let m = mean(s.velocities(), 2);
            prop_assert!((m[0] - m0[0]).abs() < 1e-12 && (m[1] - m0[1]).abs() < 1e-12);
            let dev = velocity_deviation(s);
            prop_assert!(dev <= prev + 1e-12);
            prev = dev;
        }
    }

    #[test]
    fn adaptive_coupling_stays_symmetric_and_bounded(seed in any::<u64>()) {
        let n = 6;
        let ens = random_ensemble(n, seed);
        let k0 = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { ((i + j) as f64 * 0.37).sin() });
        let params = ModelParams::new(ModelKind::AdaptiveCs).with_epsilon(0.5).with_radius(1.0);
        let traj = integrate(
            &params,
            &ens,
            Some(&CouplingMatrix::new(k0).unwrap()),
            None,
            &IntegrationSpec::new(5.0, 1e-2, 50),
        )
        .unwrap();
        for k in traj.couplings.as_ref().unwrap() {
            let (lo, hi) = k.range();
            prop_assert!(lo >= -1.0 - 1e-9 && hi <= 1.0 + 1e-9);
            prop_assert!(k.matrix().max_asymmetry() < 1e-12);
        }
        let last = traj.couplings.unwrap().pop().unwrap();
        let t = 5.0_f64;
        for i in 0..n {
            prop_assert!((last.get(i, i) - (1.0 - (-0.5 * t).exp())).abs() < 1e-8);
        }
    }
}
