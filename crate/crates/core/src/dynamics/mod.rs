//! The particle systems and their time integration.
//!
//! State layout: positions and velocities are `N x dim` row-major; the
//! coupling matrix of the adaptive model is `N x N` row-major.

mod field;
mod integrator;

pub use field::{
    neighborhood, rhs_adaptive_cs, rhs_classical_cs, rhs_laplacian, rhs_singular_cs, similarity,
    CsField, Derivatives, LaplacianField, Neighborhood, MIN_SPEED,
};
pub use integrator::{
    integrate, rk4_step, run, IntegrationSpec, Rk4, Sample, TrajectoryRecord, VectorField,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    n: usize,
    dim: usize,
    positions: Vec<f64>,
    velocities: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn new(n: usize, dim: usize, positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::InvalidSize(format!(
                "ensemble needs N, dim >= 1, got N = {n}, dim = {dim}"
            )));
        }
        for len in [positions.len(), velocities.len()] {
            if len != n * dim {
                return Err(Error::DimensionMismatch {
                    expected: n * dim,
                    got: len,
                });
            }
        }
        if let Some(bad) = positions.iter().chain(&velocities).find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(*bad));
        }
        Ok(ParticleEnsemble {
            n,
            dim,
            positions,
            velocities,
        })
    }

    /// Builds from per-particle rows.
    pub fn from_rows(positions: &[Vec<f64>], velocities: &[Vec<f64>]) -> Result<Self> {
        let n = positions.len();
        let dim = positions.first().map_or(0, Vec::len);
        if velocities.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: velocities.len(),
            });
        }
        let flat = |rows: &[Vec<f64>]| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(n * dim);
            for r in rows {
                if r.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: r.len(),
                    });
                }
                out.extend_from_slice(r);
            }
            Ok(out)
        };
        ParticleEnsemble::new(n, dim, flat(positions)?, flat(velocities)?)
    }

    /// Positions only, zero velocities (Laplacian dynamics).
    pub fn from_positions(n: usize, dim: usize, positions: Vec<f64>) -> Result<Self> {
        ParticleEnsemble::new(n, dim, positions, vec![0.0; n * dim])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    kappa: Matrix,
}

impl CouplingMatrix {
    pub fn new(kappa: Matrix) -> Result<Self> {
        if !kappa.is_square() {
            return Err(Error::DimensionMismatch {
                expected: kappa.rows(),
                got: kappa.cols(),
            });
        }
        if !kappa.is_finite() {
            return Err(Error::Parse("coupling entries must be finite".into()));
        }
        Ok(CouplingMatrix { kappa })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        CouplingMatrix {
            kappa: Matrix::from_fn(n, n, |_, _| value),
        }
    }

    pub fn n(&self) -> usize {
        self.kappa.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.kappa[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.kappa
    }

    /// `(min, max)` over all entries.
    pub fn range(&self) -> (f64, f64) {
        self.kappa
            .as_slice()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
                (lo.min(k), hi.max(k))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    AdaptiveCs,
    SingularCs,
    ClassicalCs,
    Laplacian,
}

fn default_kappa() -> f64 {
    1.0
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: ModelKind,
    #[serde(default = "default_kappa")]
    pub kappa_global: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_radius")]
    pub radius_d: f64,
}

impl ModelParams {
    pub fn new(model: ModelKind) -> Self {
        ModelParams {
            model,
            kappa_global: default_kappa(),
            epsilon: 0.0,
            radius_d: default_radius(),
        }
    }

    pub fn with_radius(mut self, d: f64) -> Self {
        self.radius_d = d;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_global = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_d > 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "radius_d must be positive, got {}",
                self.radius_d
            )));
        }
        if !(self.kappa_global >= 0.0 && self.kappa_global.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "kappa_global must be >= 0, got {}",
                self.kappa_global
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}
