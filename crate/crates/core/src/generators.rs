//! Example graphs and temporal graphs: leader graphs, the three-group directed
//! graph, banded circulants, overlapping cliques, weight perturbations, and
//! the arithmetic behind assumption (B).

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphFactory, TemporalGraph, WeightedDigraph};
use crate::rng::{substream, uniform};

fn require_positive_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!(
            "edge weight must be positive and finite, got {weight}"
        )))
    }
}

/// Star centred at `leader`: the leader is joined both ways to every other
/// vertex, followers are not joined to each other.
pub fn star_with_leader(n: usize, leader: usize, weight: f64) -> Result<WeightedDigraph> {
    leaders_graph(n, &[leader], weight)
}

/// Every leader joined both ways to every follower; no leader-leader or
/// follower-follower edges.
fn leaders_graph(n: usize, leaders: &[usize], weight: f64) -> Result<WeightedDigraph> {
    let mut g = WeightedDigraph::empty(n)?;
    let mut is_leader = vec![false; n];
    for &l in leaders {
        if l >= n {
            return Err(Error::InvalidSize(format!(
                "leader {l} out of range for {n} vertices"
            )));
        }
        is_leader[l] = true;
    }
    for &l in leaders {
        for j in (0..n).filter(|&j| !is_leader[j]) {
            g.set_undirected(l, j, weight);
        }
    }
    Ok(g)
}

/// Single-leader graph with vertex 0 as leader.
pub fn one_leader(n: usize, weight: f64) -> Result<WeightedDigraph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "one-leader graph needs N >= 2, got {n}"
        )));
    }
    require_positive_weight(weight)?;
    leaders_graph(n, &[0], weight)
}

/// Two-leader graph with vertices 0 and N-1 as leaders.
pub fn two_leaders(n: usize, weight: f64) -> Result<WeightedDigraph> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "two-leader graph needs N >= 3, got {n}"
        )));
    }
    require_positive_weight(weight)?;
    leaders_graph(n, &[0, n - 1], weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderMode {
    FixedOne,
    FixedTwo,
    SwitchingOne,
    SwitchingTwo,
    MixedOneTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderSchedule {
    pub mode: LeaderMode,
    pub period: f64,
    pub seed: u64,
}

/// Draws `count` distinct vertices uniformly.
fn draw_leaders(rng: &mut impl Rng, n: usize, count: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    let (picked, _) = all.partial_shuffle(rng, count);
    picked.to_vec()
}

/// Leader graph schedule. Fixed modes give a single piece; switching modes
/// redraw the leader set uniformly at every period from the piece's own
/// random stream; the mixed mode uses one leader on even pieces and two on
/// odd pieces.
pub fn leader_temporal(
    n: usize,
    weight: f64,
    schedule: LeaderSchedule,
    horizon: f64,
) -> Result<TemporalGraph> {
    if !(horizon > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let needs_two = matches!(
        schedule.mode,
        LeaderMode::FixedTwo | LeaderMode::SwitchingTwo | LeaderMode::MixedOneTwo
    );
    if needs_two {
        two_leaders(n, weight)?;
    } else {
        one_leader(n, weight)?;
    }
    match schedule.mode {
        LeaderMode::FixedOne => return Ok(TemporalGraph::fixed(one_leader(n, weight)?)),
        LeaderMode::FixedTwo => return Ok(TemporalGraph::fixed(two_leaders(n, weight)?)),
        _ => {}
    }
    let LeaderSchedule { mode, seed, .. } = schedule;
    let factory: GraphFactory = Arc::new(move |k| {
        let count = match mode {
            LeaderMode::SwitchingTwo => 2,
            LeaderMode::MixedOneTwo if k % 2 == 1 => 2,
            _ => 1,
        };
        let mut rng = substream(seed, k);
        let leaders = draw_leaders(&mut rng, n, count);
        leaders_graph(n, &leaders, weight).expect("leader indices are in range")
    });
    TemporalGraph::periodic(schedule.period, n, factory)
}

/// Three-group graph from a group label per vertex (labels 0, 1, 2): complete
/// in both directions inside each group, and one-way between groups along
/// 0 -> 1 -> 2 -> 0.
pub fn three_group_from_labels(labels: &[u8], weight: f64) -> Result<WeightedDigraph> {
    let n = labels.len();
    for g in 0..3u8 {
        if !labels.contains(&g) {
            return Err(Error::InvalidSize(format!("group {} is empty", g + 1)));
        }
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 2) {
        return Err(Error::InvalidSize(format!(
            "group label {bad} out of range"
        )));
    }
    let mut g = WeightedDigraph::empty(n)?;
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (labels[i], labels[j]);
            if li == lj || lj == (li + 1) % 3 {
                g.set_weight(i, j, weight);
            }
        }
    }
    Ok(g)
}

/// Three contiguous groups of sizes `(n1, n2, n3)`.
pub fn three_group_directed(sizes: (usize, usize, usize), weight: f64) -> Result<WeightedDigraph> {
    let (n1, n2, n3) = sizes;
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::InvalidSize(format!(
            "all groups must be nonempty, got {sizes:?}"
        )));
    }
    require_positive_weight(weight)?;
    let mut labels = vec![0u8; n1];
    labels.extend(std::iter::repeat_n(1u8, n2));
    labels.extend(std::iter::repeat_n(2u8, n3));
    three_group_from_labels(&labels, weight)
}

/// Three-group graph whose partition is redrawn every period: two distinct cut
/// points split a random permutation of the vertices into nonempty groups.
pub fn three_group_temporal(
    n: usize,
    weight: f64,
    period: f64,
    seed: u64,
) -> Result<TemporalGraph> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "three groups need N >= 3, got {n}"
        )));
    }
    require_positive_weight(weight)?;
    let factory: GraphFactory = Arc::new(move |k| {
        let mut rng = substream(seed, k);
        let mut cuts = draw_leaders(&mut rng, n - 1, 2);
        cuts.sort_unstable();
        let (c1, c2) = (cuts[0] + 1, cuts[1] + 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut labels = vec![0u8; n];
        for (pos, &v) in order.iter().enumerate() {
            labels[v] = if pos < c1 {
                0
            } else if pos < c2 {
                1
            } else {
                2
            };
        }
        three_group_from_labels(&labels, weight).expect("cut points give nonempty groups")
    });
    TemporalGraph::periodic(period, n, factory)
}

/// Banded circulant: vertex `i` joined both ways to `i +- 1, ..., i +- k/2`
/// (mod N), so every degree is exactly `k`.
pub fn circulant_regular(n: usize, k: usize, weight: f64) -> Result<WeightedDigraph> {
    if n < 3 || k % 2 != 0 || k == 0 || k >= n {
        return Err(Error::InvalidSize(format!(
            "circulant needs N >= 3 and even 0 < k < N, got N = {n}, k = {k}"
        )));
    }
    require_positive_weight(weight)?;
    let mut g = WeightedDigraph::empty(n)?;
    for i in 0..n {
        for off in 1..=k / 2 {
            g.set_undirected(i, (i + off) % n, weight);
        }
    }
    Ok(g)
}

/// Clique on vertices `0..=N_M` and clique on the last `N_m + 1` vertices,
/// with edges lying in both cliques removed.
///
/// Degrees come out as `N_M` on the first block only, `N_m` on the second
/// block only, and `2N - 2 - N_M - N_m` on the overlap; all must lie in
/// `[N_m, N_M]`.
pub fn overlapping_cliques(
    n: usize,
    n_min: usize,
    n_max: usize,
    weight: f64,
) -> Result<WeightedDigraph> {
    if !(n / 2 <= n_min && n_min <= n_max && n_max < n) {
        return Err(Error::PreconditionViolated(format!(
            "need floor(N/2) <= N_m <= N_M < N, got N = {n}, N_m = {n_min}, N_M = {n_max}"
        )));
    }
    if 3 * n_min > 2 * (n - 1) || n_max > 2 * (n - 1 - n_min) {
        return Err(Error::PreconditionViolated(format!(
            "need (2/3)(N-1) >= N_m and 2(N-1-N_m) >= N_M, got N = {n}, N_m = {n_min}, N_M = {n_max}"
        )));
    }
    require_positive_weight(weight)?;
    let b_start = n - n_min - 1;
    let in_a = |v: usize| v <= n_max;
    let in_b = |v: usize| v >= b_start;
    let mut g = WeightedDigraph::empty(n)?;
    for i in 0..n {
        for j in (i + 1)..n {
            if (in_a(i) && in_a(j)) != (in_b(i) && in_b(j)) {
                g.set_undirected(i, j, weight);
            }
        }
    }
    let degrees: Vec<usize> = (0..n).map(|i| g.neighbor_count(i)).collect();
    if let Some(v) = degrees.iter().position(|&d| d < n_min || d > n_max) {
        return Err(Error::PreconditionViolated(format!(
            "vertex {v} has degree {} outside [{n_min}, {n_max}]",
            degrees[v]
        )));
    }
    Ok(g)
}

/// Replaces each undirected edge's weight pair by
/// `(gamma_m - delta1, gamma_m + delta2)` with `delta1 <= delta2` of equal sign
/// in `[-epsilon, epsilon]`, oriented from the lower to the higher index.
pub fn perturb_weights(
    g: &WeightedDigraph,
    gamma_m: f64,
    epsilon: f64,
    seed: u64,
) -> Result<WeightedDigraph> {
    if !(epsilon >= 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    if let Some((i, j)) = g.first_unreciprocated_edge() {
        return Err(Error::EdgeAsymmetry(i, j));
    }
    let n = g.n_vertices();
    let mut rng = substream(seed, 0);
    let mut out = g.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                continue;
            }
            let u1 = uniform(&mut rng, 0.0, epsilon);
            let u2 = uniform(&mut rng, 0.0, epsilon);
            let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
            let (d1, d2) = if rng.random::<bool>() {
                (lo, hi)
            } else {
                (-hi, -lo)
            };
            out.set_weight(i, j, gamma_m - d1);
            out.set_weight(j, i, gamma_m + d2);
        }
    }
    Ok(out)
}

/// `f(s)` of the sign-group inequality.
pub fn assumption_b_objective(n: usize, n_min: usize, n_max: usize, ratio: f64, s: usize) -> f64 {
    let (nf, nm, nmx, sf) = (n as f64, n_min as f64, n_max as f64, s as f64);
    (ratio - 2.0) / (sf * (ratio - 1.0)) * (nm - sf + 1.0)
        - 2.0 / ((ratio + 1.0) * (ratio + 1.0))
            * (3.0 * sf * sf - (nmx + 2.0 * nm + 1.0) * sf + nf * nmx)
}

/// Minimum of the sign-group objective over integer `s` in `1..=floor(N/2)`,
/// with the first minimizing `s`. A positive value is an admissible margin
/// `delta`.
pub fn assumption_b_margin(n: usize, n_min: usize, n_max: usize, ratio: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 1);
    for s in 1..=(n / 2).max(1) {
        let f = assumption_b_objective(n, n_min, n_max, ratio, s);
        if f < best.0 {
            best = (f, s);
        }
    }
    best
}

/// `n = 2 a_m (N_m + 1) / (N_M + 1 - a_m (N_m + 1))`.
pub fn corollary3_ratio(a_m: f64, n_min: usize, n_max: usize) -> Result<f64> {
    if !(a_m > 0.0 && a_m < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "need 0 < a_m < 1, got {a_m}"
        )));
    }
    let lower = a_m * (n_min as f64 + 1.0);
    let denom = n_max as f64 + 1.0 - lower;
    if denom <= 0.0 {
        return Err(Error::DivisionDegenerate(format!(
            "N_M + 1 - a_m (N_m + 1) = {denom} is not positive"
        )));
    }
    Ok(2.0 * lower / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionBParams {
    pub n: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub gamma_m: f64,
    pub epsilon: f64,
    pub ratio: f64,
    pub delta: f64,
}

impl AssumptionBParams {
    /// Parameters with `epsilon = gamma_m / ratio` and `delta` from
    /// [`assumption_b_margin`].
    pub fn new(n: usize, n_min: usize, n_max: usize, gamma_m: f64, ratio: f64) -> Result<Self> {
        let p = AssumptionBParams {
            n,
            n_min,
            n_max,
            gamma_m,
            epsilon: gamma_m / ratio,
            ratio,
            delta: assumption_b_margin(n, n_min, n_max, ratio).0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.n / 2 <= self.n_min
            && self.n_min <= self.n_max
            && self.n_max < self.n
            && self.gamma_m > 0.0
            && self.epsilon >= 0.0
            && self.ratio > 2.0
            && self.ratio * self.epsilon <= self.gamma_m * (1.0 + 1e-12);
        if ok {
            Ok(())
        } else {
            Err(Error::PreconditionViolated(format!(
                "inadmissible assumption (B) parameters {self:?}"
            )))
        }
    }

    /// Proof-level decay exponent `gamma_m * delta / (n * N)`.
    pub fn proof_rate(&self) -> f64 {
        self.gamma_m * self.delta / (self.ratio * self.n as f64)
    }

    /// Decay exponent as stated in the theorem, `gamma_m * delta / N`.
    pub fn statement_rate(&self) -> f64 {
        self.gamma_m * self.delta / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_assumption_b, is_neighbor_connected, is_strongly_connected};

    #[test]
    fn leader_graphs_match_adjacency() {
        let g = one_leader(5, 1.0).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i != j && (i == 0 || j == 0) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(g.weight(i, j), want, "({i},{j})");
            }
        }
        let g = two_leaders(5, 1.0).unwrap();
        assert_eq!(g.weight(0, 4), 0.0);
        assert_eq!(g.weight(4, 2), 1.0);
        assert_eq!(g.weight(1, 2), 0.0);
        assert_eq!(g.neighbor_count(0), 3);
        assert_eq!(g.neighbor_count(2), 2);

        let k2 = one_leader(2, 2.0).unwrap();
        assert_eq!(k2, WeightedDigraph::complete(2, 2.0).unwrap());
        assert!(one_leader(1, 1.0).is_err());
        assert!(two_leaders(2, 1.0).is_err());
    }

    #[test]
    fn leader_schedules() {
        let fixed = leader_temporal(
            6,
            1.0,
            LeaderSchedule {
                mode: LeaderMode::FixedOne,
                period: 0.01,
                seed: 1,
            },
            1.0,
        )
        .unwrap();
        assert_eq!(fixed.expand(1.0).len(), 1);

        let p = 0.5;
        let sw = leader_temporal(
            6,
            1.0,
            LeaderSchedule {
                mode: LeaderMode::SwitchingOne,
                period: p,
                seed: 1,
            },
            3.0 * p,
        )
        .unwrap();
        let times: Vec<f64> = sw.expand(3.0 * p).iter().map(|(t, _)| *t).collect();
        assert_eq!(times, vec![0.0, p, 2.0 * p]);

        let mixed = leader_temporal(
            8,
            1.0,
            LeaderSchedule {
                mode: LeaderMode::MixedOneTwo,
                period: p,
                seed: 9,
            },
            10.0,
        )
        .unwrap();
        for (k, (_, g)) in mixed.expand(10.0).iter().enumerate() {
            let leaders = (0..8).filter(|&i| g.neighbor_count(i) >= 6).count();
            assert_eq!(leaders, if k % 2 == 0 { 1 } else { 2 });
            assert!(is_neighbor_connected(g).holds);
        }
    }

    #[test]
    fn three_group_smallest_instance() {
        let g = three_group_directed((1, 1, 1), 1.0).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(2, 0));
        assert!(three_group_directed((0, 1, 1), 1.0).is_err());
    }

    #[test]
    fn three_group_block_pattern() {
        let g = three_group_directed((5, 3, 2), 1.0).unwrap();
        let group = |v: usize| {
            if v < 5 {
                0
            } else if v < 8 {
                1
            } else {
                2
            }
        };
        for i in 0..10 {
            for j in 0..10 {
                let want = i != j && (group(i) == group(j) || group(j) == (group(i) + 1) % 3);
                assert_eq!(g.has_edge(i, j), want, "({i},{j})");
            }
        }
        assert!(is_strongly_connected(&g).holds);
    }

    #[test]
    fn three_group_temporal_pieces_are_valid() {
        let tg = three_group_temporal(12, 1.0, 0.1, 4).unwrap();
        for (_, g) in tg.expand(2.0) {
            assert!(is_strongly_connected(&g).holds);
            assert_eq!(g.edge_count() > 0, true);
        }
    }

    #[test]
    fn circulant_degrees() {
        let g = circulant_regular(60, 38, 1.0).unwrap();
        assert!((0..60).all(|i| g.neighbor_count(i) == 38));
        assert!(g.is_symmetric(0.0));
        let c4 = circulant_regular(4, 2, 1.0).unwrap();
        assert_eq!(c4.edge_count(), 8);
        assert!(c4.has_edge(0, 3) && !c4.has_edge(0, 2));
        assert!(circulant_regular(10, 3, 1.0).is_err());
        assert!(circulant_regular(10, 10, 1.0).is_err());
    }

    #[test]
    fn overlapping_cliques_degrees() {
        for (nm, nmx) in [(30, 45), (30, 58)] {
            let g = overlapping_cliques(60, nm, nmx, 1.0).unwrap();
            let cert = check_assumption_b(&g, 1.0, 0.0, 3.0).unwrap();
            let (lo, hi) = cert.measured_degrees.unwrap();
            assert!(lo >= nm && hi <= nmx, "({lo}, {hi})");
        }
        assert!(overlapping_cliques(60, 59, 59, 1.0).is_err());
    }

    #[test]
    fn zero_epsilon_perturbation_is_identity() {
        let g = circulant_regular(10, 6, 0.7).unwrap();
        assert_eq!(perturb_weights(&g, 0.7, 0.0, 3).unwrap(), g);
    }

    #[test]
    fn corollary_ratio_examples() {
        assert!((corollary3_ratio(0.8, 10, 10).unwrap() - 8.0).abs() < 1e-12);
        assert!((corollary3_ratio(0.5, 7, 7).unwrap() - 2.0).abs() < 1e-12);
        assert!((corollary3_ratio(0.9, 38, 38).unwrap() - 18.0).abs() < 1e-9);
        assert!(matches!(
            corollary3_ratio(0.9, 40, 10),
            Err(Error::DivisionDegenerate(_))
        ));
        assert!(corollary3_ratio(1.0, 3, 3).is_err());
    }
}
