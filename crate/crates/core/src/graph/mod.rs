//! Dense weighted digraphs, their Laplacians, spectra and the connectivity
//! certificates used by the consensus rate bounds.
//!
//! Convention: `weights[(i, j)]` is the weight of the directed edge `i -> j`,
//! which enters the dynamics of vertex `i` as `x_i' = sum_j w_ij (x_j - x_i)`.
//! An edge is present iff its weight is nonzero.

mod certificates;
pub mod io;
mod spectrum;
mod temporal;

pub use certificates::{
    check_assumption_b, check_complete, has_pairwise_dominance, is_neighbor_connected,
    is_strongly_connected, CertificateKind, ConnectivityCertificate, Witness,
};
pub use spectrum::{
    eigenvalue_comparison_check, fiedler_value, jacobi_eigenvalues, symmetric_spectrum,
    zero_eigenvalue_multiplicity, ComparisonOutcome, JACOBI_MAX_SWEEPS, SYMMETRY_TOL,
};
pub use temporal::{GraphFactory, TemporalGraph};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    weights: Matrix,
}

impl WeightedDigraph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(
                "a graph needs at least one vertex".into(),
            ));
        }
        Ok(WeightedDigraph {
            weights: Matrix::zeros(n, n),
        })
    }

    /// Complete graph with every off-diagonal weight equal to `weight`.
    pub fn complete(n: usize, weight: f64) -> Result<Self> {
        let mut g = WeightedDigraph::empty(n)?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.weights[(i, j)] = weight;
                }
            }
        }
        Ok(g)
    }

    pub fn from_matrix(weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::DimensionMismatch {
                expected: weights.rows(),
                got: weights.cols(),
            });
        }
        if weights.rows() == 0 {
            return Err(Error::InvalidSize(
                "a graph needs at least one vertex".into(),
            ));
        }
        if !weights.is_finite() {
            return Err(Error::Parse("graph weights must be finite".into()));
        }
        if let Some(i) = (0..weights.rows()).find(|&i| weights[(i, i)] != 0.0) {
            return Err(Error::PreconditionViolated(format!(
                "diagonal weight at vertex {i} must be zero"
            )));
        }
        Ok(WeightedDigraph { weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        WeightedDigraph::from_matrix(Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Sets the weight of `i -> j`. Self-loops are ignored: they do not enter
    /// the Laplacian and the type keeps a zero diagonal.
    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) {
        if i != j {
            self.weights[(i, j)] = w;
        }
    }

    /// Sets both `i -> j` and `j -> i`.
    pub fn set_undirected(&mut self, i: usize, j: usize, w: f64) {
        self.set_weight(i, j, w);
        self.set_weight(j, i, w);
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.weights[(i, j)].abs() > 0.0
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.weights.is_symmetric(tol)
    }

    /// True when `i -> j` present iff `j -> i` present.
    pub fn has_symmetric_edge_set(&self) -> bool {
        self.first_unreciprocated_edge().is_none()
    }

    pub(crate) fn first_unreciprocated_edge(&self) -> Option<(usize, usize)> {
        let n = self.n_vertices();
        for i in 0..n {
            for j in 0..n {
                if self.has_edge(i, j) && !self.has_edge(j, i) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn out_degree(&self, i: usize) -> f64 {
        self.weights.row(i).iter().sum()
    }

    /// Number of out-neighbours of `i`.
    pub fn neighbor_count(&self, i: usize) -> usize {
        (0..self.n_vertices())
            .filter(|&j| self.has_edge(i, j))
            .count()
    }

    /// Smallest weight among present edges, if any edge exists.
    pub fn min_edge_weight(&self) -> Option<f64> {
        let n = self.n_vertices();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in 0..n {
                if self.has_edge(i, j) {
                    let w = self.weight(i, j);
                    best = Some(best.map_or(w, |b: f64| b.min(w)));
                }
            }
        }
        best
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n_vertices();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.has_edge(i, j)).count())
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> WeightedDigraph {
        WeightedDigraph {
            weights: self.weights.scaled(factor),
        }
    }

    pub fn laplacian(&self) -> LaplacianMatrix {
        laplacian(self)
    }

    /// `x_i' = sum_j w_ij (x_j - x_i)` for a state stored row-major as
    /// `n_vertices x dim`.
    pub fn apply_negative_laplacian(&self, x: &[f64], dim: usize, out: &mut [f64]) -> Result<()> {
        let n = self.n_vertices();
        if x.len() != n * dim || out.len() != n * dim {
            return Err(Error::DimensionMismatch {
                expected: n * dim,
                got: x.len().min(out.len()),
            });
        }
        for i in 0..n {
            let xi = &x[i * dim..(i + 1) * dim];
            let o = &mut out[i * dim..(i + 1) * dim];
            o.fill(0.0);
            for (j, &w) in self.weights.row(i).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let xj = &x[j * dim..(j + 1) * dim];
                for k in 0..dim {
                    o[k] += w * (xj[k] - xi[k]);
                }
            }
        }
        Ok(())
    }
}

/// `L = D - A` with `D` the out-degree matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: Matrix,
}

impl LaplacianMatrix {
    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.entries.row(i).iter().sum())
            .collect()
    }

    /// `x^T L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let lx = self.entries.mul_vec(x)?;
        Ok(x.iter().zip(&lx).map(|(a, b)| a * b).sum())
    }
}

pub fn laplacian(g: &WeightedDigraph) -> LaplacianMatrix {
    let n = g.n_vertices();
    let mut entries = g.weights.scaled(-1.0);
    for i in 0..n {
        entries[(i, i)] = g.out_degree(i);
    }
    LaplacianMatrix { entries }
}

pub fn quadratic_form(l: &LaplacianMatrix, x: &[f64]) -> Result<f64> {
    l.quadratic_form(x)
}

/// `(1/2) sum_{i,j} a_ij (x_i - x_j)^2`, which equals `x^T L x` for symmetric
/// weights.
pub fn edge_sum_form(g: &WeightedDigraph, x: &[f64]) -> Result<f64> {
    let n = g.n_vertices();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = x[i] - x[j];
            acc += g.weight(i, j) * d * d;
        }
    }
    Ok(0.5 * acc)
}
