use approx::assert_relative_eq;
use flock_core::analysis::{e_matrix, row_dominance_margin};
use flock_core::generators::{
    assumption_b_margin, overlapping_cliques, perturb_weights, three_group_directed, two_leaders,
    AssumptionBParams,
};
use flock_core::graph::{
    edge_sum_form, eigenvalue_comparison_check, has_pairwise_dominance, is_neighbor_connected,
    is_strongly_connected, jacobi_eigenvalues, laplacian, quadratic_form, symmetric_spectrum,
    zero_eigenvalue_multiplicity, WeightedDigraph,
};
use flock_core::matrix::Matrix;
use proptest::prelude::*;

fn digraph(n: usize, weights: &[f64]) -> WeightedDigraph {
    let mut g = WeightedDigraph::empty(n).unwrap();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                g.set_weight(i, j, weights[i * n + j]);
            }
        }
    }
    g
}

/// Weights in {0} ∪ [0.5, 2]; roughly half the edges present.
fn sparse_digraph(max_n: usize) -> impl Strategy<Value = WeightedDigraph> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.5..2.0f64], n * n)
            .prop_map(move |w| digraph(n, &w))
    })
}

fn symmetric_graph(max_n: usize) -> impl Strategy<Value = WeightedDigraph> {
    sparse_digraph(max_n).prop_map(|g| {
        let n = g.n_vertices();
        let mut s = WeightedDigraph::empty(n).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                s.set_undirected(i, j, g.weight(i, j));
            }
        }
        s
    })
}

fn components(g: &WeightedDigraph) -> usize {
    let n = g.n_vertices();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if !seen[v] && (g.has_edge(u, v) || g.has_edge(v, u)) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn neighbor_connected_matches_two_step_products(g in sparse_digraph(7)) {
        let n = g.n_vertices();
        let b = Matrix::from_fn(n, n, |i, j| if g.has_edge(i, j) && g.has_edge(j, i) { 1.0 } else { 0.0 });
        let b2 = b.mul(&b).unwrap();
        let expected = (0..n).all(|i| (0..n).all(|j| i == j || b[(i, j)] > 0.0 || b2[(i, j)] > 0.0));
        prop_assert_eq!(is_neighbor_connected(&g).holds, expected);
        if expected {
            prop_assert!(has_pairwise_dominance(&g));
            prop_assert!(is_strongly_connected(&g).holds || n == 1);
        }
    }

    #[test]
    fn dominance_margin_matches_pairwise_minimum(g in sparse_digraph(7)) {
        let n = g.n_vertices();
        let a = |i: usize, j: usize| g.weight(i, j);
        let mut brute = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let shared: f64 = (0..n).filter(|&m| m != i && m != j).map(|m| a(i, m).min(a(j, m))).sum();
                brute = brute.min(2.0 * (a(i, j) + a(j, i)) + 2.0 * shared);
            }
        }
        let m = row_dominance_margin(&e_matrix(&g).unwrap());
        prop_assert!((m - brute).abs() <= 1e-12 * (1.0 + brute.abs()), "{} vs {}", m, brute);
        if has_pairwise_dominance(&g) {
            prop_assert!(m >= 2.0 * g.min_edge_weight().unwrap() - 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quadratic_form_is_half_edge_sum(
        g in symmetric_graph(8),
        x in prop::collection::vec(-10.0..10.0f64, 8),
    ) {
        let x = &x[..g.n_vertices()];
        let q = quadratic_form(&laplacian(&g), x).unwrap();
        let mut sum = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                sum += 0.5 * g.weight(i, j) * (x[i] - x[j]).powi(2);
            }
        }
        prop_assert!((q - sum).abs() <= 1e-9 * (1.0 + sum));
        prop_assert!((edge_sum_form(&g, x).unwrap() - sum).abs() <= 1e-9 * (1.0 + sum));
        prop_assert!(q >= -1e-12);
    }

    #[test]
    fn laplacian_kernel_counts_components(g in symmetric_graph(8)) {
        let spectrum = symmetric_spectrum(&laplacian(&g)).unwrap();
        prop_assert_eq!(zero_eigenvalue_multiplicity(&spectrum), components(&g));
        let rows = laplacian(&g).row_sums();
        prop_assert!(rows.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn jacobi_agrees_with_nalgebra(n in 1usize..9, entries in prop::collection::vec(-5.0..5.0f64, 64)) {
        let a = Matrix::from_fn(n, n, |i, j| {
            let (r, c) = (i.min(j), i.max(j));
            entries[r * 8 + c]
        });
        let ours = jacobi_eigenvalues(&a).unwrap();
        let na = nalgebra::DMatrix::from_fn(n, n, |i, j| a[(i, j)]);
        let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        let scale = 1.0 + a.frobenius_norm();
        for (p, q) in ours.iter().zip(&theirs) {
            prop_assert!((p - q).abs() <= 1e-9 * scale, "{:?} vs {:?}", ours, theirs);
        }
    }

    #[test]
    fn adding_weight_raises_every_eigenvalue(
        p in symmetric_graph(7),
        extra in prop::collection::vec(0.0..1.0f64, 49),
    ) {
        let n = p.n_vertices();
        let mut q = p.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                q.set_undirected(i, j, p.weight(i, j) + extra[i * 7 + j]);
            }
        }
        let out = eigenvalue_comparison_check(&p, &q).unwrap();
        prop_assert!(out.holds, "{:?}", out);
    }

    #[test]
    fn perturbed_weights_stay_in_band(seed in any::<u64>(), ratio in 2.5..50.0f64) {
        let gamma = 1.0;
        let eps = gamma / ratio;
        let g = overlapping_cliques(60, 30, 45, gamma).unwrap();
        let p = perturb_weights(&g, gamma, eps, seed).unwrap();
        for i in 0..60 {
            for j in (i + 1)..60 {
                prop_assert_eq!(g.has_edge(i, j), p.has_edge(i, j));
                prop_assert_eq!(p.has_edge(i, j), p.has_edge(j, i));
                if g.has_edge(i, j) {
                    let (lo, hi) = (gamma - p.weight(i, j), p.weight(j, i) - gamma);
                    prop_assert!(lo.abs() <= eps + 1e-15 && hi.abs() <= eps + 1e-15);
                    prop_assert!(lo * hi >= 0.0 && lo <= hi);
                    prop_assert!(p.weight(i, j) + p.weight(j, i) >= 2.0 * gamma - 1e-15);
                }
            }
        }
    }
}

#[test]
fn generator_margins_scale_with_weight() {
    for n in [5, 10, 60] {
        for w in [0.25, 1.0, 3.0] {
            let g = two_leaders(n, w).unwrap();
            assert!(is_neighbor_connected(&g).holds);
            assert!(row_dominance_margin(&e_matrix(&g).unwrap()) >= 2.0 * w - 1e-9);
            let t = three_group_directed((n - 2 * (n / 3), n / 3, n / 3), w).unwrap();
            assert!(has_pairwise_dominance(&t));
            assert!(row_dominance_margin(&e_matrix(&t).unwrap()) >= 2.0 * w - 1e-9);
        }
    }
}

#[test]
fn margin_table_rows() {
    let rows = [
        (30, 30, 326.0, 1.2469e-4),
        (30, 45, 365.0, 9.6546e-5),
        (30, 58, 396.0, 1.2901e-4),
        (38, 38, 101.0, 0.0029),
    ];
    for (nm, nmx, ratio, expected) in rows {
        let (delta, s) = assumption_b_margin(60, nm, nmx, ratio);
        assert_relative_eq!(delta, expected, max_relative = 0.01);
        assert!((1..=30).contains(&s));
        let p = AssumptionBParams::new(60, nm, nmx, 1.0, ratio).unwrap();
        assert_eq!(p.delta, delta);
        assert_relative_eq!(p.proof_rate(), delta / (ratio * 60.0), max_relative = 1e-12);
    }
}
