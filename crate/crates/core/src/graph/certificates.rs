use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::WeightedDigraph;
use crate::error::{Error, Result};
use crate::generators::assumption_b_margin;

/// Slack used when comparing measured weights against the (B2) bounds.
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    Complete,
    NeighborConnected,
    StronglyConnected,
    AssumptionB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Unordered vertex pair `(i, j)`, `i < j`, that violates the condition.
    Pair(usize, usize),
    /// Directed edge `i -> j` that violates the condition.
    Edge(usize, usize),
    /// Vertex whose degree bound fails.
    Vertex(usize),
    /// Vertex not reachable (or not co-reachable) from vertex 0.
    Unreachable(usize),
    /// Sign-group size `s` at which the margin is non-positive.
    SValue(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityCertificate {
    pub kind: CertificateKind,
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Guaranteed exponential decay exponent, when the certificate implies one.
    pub derived_rate: Option<f64>,
    /// Measured `(N_m, N_M)` neighbour-count bounds (assumption (B) only).
    pub measured_degrees: Option<(usize, usize)>,
}

impl ConnectivityCertificate {
    fn pass(kind: CertificateKind, derived_rate: Option<f64>) -> Self {
        ConnectivityCertificate {
            kind,
            holds: true,
            witness: None,
            derived_rate,
            measured_degrees: None,
        }
    }

    fn fail(kind: CertificateKind, witness: Witness) -> Self {
        ConnectivityCertificate {
            kind,
            holds: false,
            witness: Some(witness),
            derived_rate: None,
            measured_degrees: None,
        }
    }
}

/// All ordered pairs present with symmetric weights. The derived rate is
/// `alpha_m * N`, the decay exponent of the fluctuation norm.
pub fn check_complete(g: &WeightedDigraph) -> ConnectivityCertificate {
    let n = g.n_vertices();
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) || !g.has_edge(j, i) || g.weight(i, j) != g.weight(j, i) {
                return ConnectivityCertificate::fail(
                    CertificateKind::Complete,
                    Witness::Pair(i, j),
                );
            }
        }
    }
    let rate = g.min_edge_weight().map(|w| w * n as f64);
    ConnectivityCertificate::pass(CertificateKind::Complete, rate)
}

#[inline]
fn bidirectional(g: &WeightedDigraph, i: usize, j: usize) -> bool {
    g.has_edge(i, j) && g.has_edge(j, i)
}

/// Every pair of distinct vertices is either joined in both directions or has
/// a common vertex `k` joined in both directions to each of them.
///
/// The derived rate is the weight floor `w_m`.
pub fn is_neighbor_connected(g: &WeightedDigraph) -> ConnectivityCertificate {
    let n = g.n_vertices();
    for i in 0..n {
        for j in (i + 1)..n {
            if bidirectional(g, i, j) {
                continue;
            }
            let shared = (0..n)
                .any(|k| k != i && k != j && bidirectional(g, i, k) && bidirectional(g, j, k));
            if !shared {
                return ConnectivityCertificate::fail(
                    CertificateKind::NeighborConnected,
                    Witness::Pair(i, j),
                );
            }
        }
    }
    ConnectivityCertificate::pass(CertificateKind::NeighborConnected, g.min_edge_weight())
}

/// Weaker pairwise condition under which the row-dominance margin of the
/// pairwise-distance comparison matrix is at least `2 w_m`: each pair is
/// joined in at least one direction or has a common out-neighbour.
pub fn has_pairwise_dominance(g: &WeightedDigraph) -> bool {
    let n = g.n_vertices();
    (0..n).all(|i| {
        ((i + 1)..n).all(|j| {
            g.has_edge(i, j)
                || g.has_edge(j, i)
                || (0..n).any(|k| k != i && k != j && g.has_edge(i, k) && g.has_edge(j, k))
        })
    })
}

fn reachable_from(g: &WeightedDigraph, start: usize, reverse: bool) -> Vec<bool> {
    let n = g.n_vertices();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            let edge = if reverse {
                g.has_edge(v, u)
            } else {
                g.has_edge(u, v)
            };
            if edge && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

pub fn is_strongly_connected(g: &WeightedDigraph) -> ConnectivityCertificate {
    for reverse in [false, true] {
        if let Some(v) = reachable_from(g, 0, reverse).iter().position(|&s| !s) {
            return ConnectivityCertificate::fail(
                CertificateKind::StronglyConnected,
                Witness::Unreachable(v),
            );
        }
    }
    ConnectivityCertificate::pass(CertificateKind::StronglyConnected, None)
}

/// Checks the neighbour-count and weight conditions of assumption (B):
/// symmetric edge set, `floor(N/2) <= N_m <= deg_i <= N_M`, and on every edge
/// a symmetric mean `>= gamma_m` and antisymmetric part within `[-epsilon, epsilon]`.
///
/// When the checks pass, the margin `delta` of the sign-group inequality is
/// evaluated at the measured `(N_m, N_M)`; if positive, `derived_rate` is the
/// exponent `gamma_m * delta / (n * N)`.
pub fn check_assumption_b(
    g: &WeightedDigraph,
    gamma_m: f64,
    epsilon: f64,
    n_ratio: f64,
) -> Result<ConnectivityCertificate> {
    if !(gamma_m > 0.0
        && epsilon >= 0.0
        && n_ratio > 2.0
        && n_ratio * epsilon <= gamma_m * (1.0 + 1e-12))
    {
        return Err(Error::PreconditionViolated(format!(
            "need gamma_m > 0, epsilon >= 0, n > 2, n * epsilon <= gamma_m; got gamma_m = {gamma_m}, epsilon = {epsilon}, n = {n_ratio}"
        )));
    }
    let kind = CertificateKind::AssumptionB;
    let n = g.n_vertices();

    if let Some((i, j)) = g.first_unreciprocated_edge() {
        return Ok(ConnectivityCertificate::fail(kind, Witness::Edge(i, j)));
    }

    let degrees: Vec<usize> = (0..n).map(|i| g.neighbor_count(i)).collect();
    let n_min = degrees.iter().copied().min().unwrap_or(0);
    let n_max = degrees.iter().copied().max().unwrap_or(0);
    let measured = Some((n_min, n_max));
    if n_min < n / 2 {
        let v = degrees.iter().position(|&d| d == n_min).unwrap_or(0);
        let mut cert = ConnectivityCertificate::fail(kind, Witness::Vertex(v));
        cert.measured_degrees = measured;
        return Ok(cert);
    }

    for i in 0..n {
        for j in 0..n {
            if !g.has_edge(i, j) {
                continue;
            }
            let (wij, wji) = (g.weight(i, j), g.weight(j, i));
            let mean = 0.5 * (wij + wji);
            let skew = 0.5 * (wij - wji);
            if mean < gamma_m - WEIGHT_TOL || skew.abs() > epsilon + WEIGHT_TOL {
                let mut cert = ConnectivityCertificate::fail(kind, Witness::Edge(i, j));
                cert.measured_degrees = measured;
                return Ok(cert);
            }
        }
    }

    let mut cert = ConnectivityCertificate::pass(kind, None);
    cert.measured_degrees = measured;
    if n_min >= 1 && n_max < n {
        let (delta, _) = assumption_b_margin(n, n_min, n_max, n_ratio);
        if delta > 0.0 {
            cert.derived_rate = Some(gamma_m * delta / (n_ratio * n as f64));
        }
    }
    Ok(cert)
}
