use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// Complete symmetric graphs with weights `>= alpha_m`: `exp(-alpha_m N t)`.
    CompleteSym,
    /// Neighbour-connected graphs with weight floor `w_m`: `exp(-w_m t)`.
    NeighborConn,
    /// Assumption (B) graphs: `exp(-gamma_m delta t / (n N))`.
    AssumptionB,
}

impl FromStr for EnvelopeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "completesym" => Ok(EnvelopeKind::CompleteSym),
            "neighborconn" => Ok(EnvelopeKind::NeighborConn),
            "assumptionb" => Ok(EnvelopeKind::AssumptionB),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

impl fmt::Display for EnvelopeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvelopeKind::CompleteSym => "complete_sym",
            EnvelopeKind::NeighborConn => "neighbor_conn",
            EnvelopeKind::AssumptionB => "assumption_b",
        })
    }
}

/// Rate parameters; each envelope kind reads only the fields it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub alpha_m: f64,
    pub w_m: f64,
    pub gamma_m: f64,
    pub delta: f64,
    pub ratio: f64,
    pub n_agents: usize,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::PreconditionViolated(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

impl EnvelopeKind {
    /// Decay exponent of the norm bound.
    pub fn exponent(self, p: &EnvelopeParams) -> Result<f64> {
        let n = positive("N", p.n_agents as f64)?;
        match self {
            EnvelopeKind::CompleteSym => Ok(positive("alpha_m", p.alpha_m)? * n),
            EnvelopeKind::NeighborConn => positive("w_m", p.w_m),
            EnvelopeKind::AssumptionB => Ok(positive("gamma_m", p.gamma_m)?
                * positive("delta", p.delta)?
                / (positive("n", p.ratio)? * n)),
        }
    }

    /// The assumption (B) exponent as given in the theorem statement,
    /// `gamma_m delta / N`, without the `1/n` of its proof.
    pub fn statement_exponent(self, p: &EnvelopeParams) -> Result<f64> {
        match self {
            EnvelopeKind::AssumptionB => Ok(positive("gamma_m", p.gamma_m)?
                * positive("delta", p.delta)?
                / positive("N", p.n_agents as f64)?),
            other => other.exponent(p),
        }
    }
}

/// `initial_value * exp(-rate * t)` for the named envelope kind.
pub fn decay_envelope(
    kind: &str,
    params: &EnvelopeParams,
    t: f64,
    initial_value: f64,
) -> Result<f64> {
    let rate = kind.parse::<EnvelopeKind>()?.exponent(params)?;
    Ok(initial_value * (-rate * t).exp())
}

/// Row/column index of the unordered pair `{i, j}`, `i < j`, in
/// lexicographic order.
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[inline]
fn eta(x: f64) -> f64 {
    x.max(0.0)
}

/// Comparison matrix for the squared pairwise distances `xi_ij = |x_i - x_j|^2`
/// under `x' = -L x`, indexed by pairs `i < j` in lexicographic order.
///
/// Diagonal: `-2(a_ij + a_ji) - sum_{l != i,j} (a_il + a_jl)`; for every third
/// vertex `m`, column `{i, m}` gets `eta(a_jm - a_im)` and column `{j, m}` gets
/// `eta(a_im - a_jm)` with `eta` the positive part.
pub fn e_matrix(g: &WeightedDigraph) -> Result<Matrix> {
    let n = g.n_vertices();
    if n < 2 {
        return Err(Error::InvalidSize(
            "the pair matrix needs at least two vertices".into(),
        ));
    }
    let a = |i: usize, j: usize| g.weight(i, j);
    let m_pairs = n * (n - 1) / 2;
    let mut e = Matrix::zeros(m_pairs, m_pairs);
    for i in 0..n {
        for j in (i + 1)..n {
            let row = pair_index(i, j, n);
            let mut diag = -2.0 * (a(i, j) + a(j, i));
            for m in (0..n).filter(|&m| m != i && m != j) {
                diag -= a(i, m) + a(j, m);
                let col_im = pair_index(i.min(m), i.max(m), n);
                let col_jm = pair_index(j.min(m), j.max(m), n);
                e[(row, col_im)] += eta(a(j, m) - a(i, m));
                e[(row, col_jm)] += eta(a(i, m) - a(j, m));
            }
            e[(row, row)] = diag;
        }
    }
    Ok(e)
}

/// `min_row (|e_rr| - sum_{c != r} |e_rc|)`.
pub fn row_dominance_margin(e: &Matrix) -> f64 {
    (0..e.rows())
        .map(|r| {
            let off: f64 = e
                .row(r)
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != r)
                .map(|(_, x)| x.abs())
                .sum();
            e[(r, r)].abs() - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Exact `d/dt |x_i - x_j|^2` for every pair under `x' = -L x`, evaluated
/// directly from the positions (`N x dim`, row-major), in pair order.
pub fn squared_distance_derivative(g: &WeightedDigraph, x: &[f64], dim: usize) -> Result<Vec<f64>> {
    let n = g.n_vertices();
    let mut xdot = vec![0.0; x.len()];
    g.apply_negative_laplacian(x, dim, &mut xdot)?;
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for k in 0..dim {
                acc += 2.0
                    * (x[i * dim + k] - x[j * dim + k])
                    * (xdot[i * dim + k] - xdot[j * dim + k]);
            }
            out.push(acc);
        }
    }
    Ok(out)
}

/// `-(1/2) sum_{(i,j) in E} c_ij` with
/// `c_ij = ((g_ij + g_ji)/2)(y_i - y_j)^2 + ((g_ij - g_ji)/2)(y_i^2 - y_j^2)`
/// over the mean-centred state `y`. Equals `-y^T L y`.
pub fn assumption_b_dissipation(x: &[f64], g: &WeightedDigraph) -> Result<f64> {
    let n = g.n_vertices();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if let Some((i, j)) = g.first_unreciprocated_edge() {
        return Err(Error::EdgeAsymmetry(i, j));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !g.has_edge(i, j) {
                continue;
            }
            let (gij, gji) = (g.weight(i, j), g.weight(j, i));
            let d = y[i] - y[j];
            acc += 0.5 * (gij + gji) * d * d + 0.5 * (gij - gji) * (y[i] * y[i] - y[j] * y[j]);
        }
    }
    Ok(-0.5 * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::one_leader;
    use approx::assert_abs_diff_eq;

    #[test]
    fn envelope_examples() {
        let p = EnvelopeParams {
            alpha_m: 1.0,
            n_agents: 2,
            ..Default::default()
        };
        assert_abs_diff_eq!(
            decay_envelope("CompleteSym", &p, 1.0, 1.0).unwrap(),
            (-2f64).exp(),
            epsilon = 1e-15
        );
        assert_eq!(decay_envelope("complete_sym", &p, 0.0, 3.5).unwrap(), 3.5);
        assert!(matches!(
            decay_envelope("nope", &p, 1.0, 1.0),
            Err(Error::UnknownKind(_))
        ));

        let b = EnvelopeParams {
            gamma_m: 1.0,
            delta: 0.0029,
            ratio: 101.0,
            n_agents: 60,
            ..Default::default()
        };
        let kind = EnvelopeKind::AssumptionB;
        assert_abs_diff_eq!(
            kind.statement_exponent(&b).unwrap(),
            0.0029 / 60.0,
            epsilon = 1e-18
        );
        assert_abs_diff_eq!(kind.exponent(&b).unwrap(), 0.0029 / 6060.0, epsilon = 1e-18);
        let v = (-kind.statement_exponent(&b).unwrap() * 100.0).exp();
        assert_abs_diff_eq!(v, (-0.0029 * 100.0 / 60.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn pair_indexing_is_lexicographic() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_index(i, j, n), k);
                k += 1;
            }
        }
    }

    #[test]
    fn e_matrix_small_cases() {
        let w = 0.8;
        let e = e_matrix(&WeightedDigraph::complete(2, w).unwrap()).unwrap();
        assert_eq!(e.to_rows(), vec![vec![-4.0 * w]]);

        let e = e_matrix(&WeightedDigraph::complete(3, 1.0).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(e[(r, c)], if r == c { -6.0 } else { 0.0 });
            }
        }
        assert_eq!(row_dominance_margin(&e), 6.0);
    }

    #[test]
    fn one_leader_margin_is_two() {
        let e = e_matrix(&one_leader(5, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(row_dominance_margin(&e), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn dissipation_of_consensus_is_zero() {
        let g = one_leader(4, 1.0).unwrap();
        assert_eq!(assumption_b_dissipation(&[3.0; 4], &g).unwrap(), 0.0);
        let mut d = WeightedDigraph::empty(3).unwrap();
        d.set_weight(0, 1, 1.0);
        assert!(matches!(
            assumption_b_dissipation(&[0.0; 3], &d),
            Err(Error::EdgeAsymmetry(0, 1))
        ));
    }
}
