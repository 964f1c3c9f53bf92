use super::integrator::VectorField;
use super::{CouplingMatrix, ModelKind, ModelParams, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::graph::{TemporalGraph, WeightedDigraph};
use crate::matrix::Matrix;

/// Velocities shorter than this make the cosine similarity undefined.
pub const MIN_SPEED: f64 = 1e-12;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine of the angle between `vi` and `vj`, clamped to `[-1, 1]`.
pub fn similarity(vi: &[f64], vj: &[f64]) -> Result<f64> {
    if vi.len() != vj.len() {
        return Err(Error::DimensionMismatch {
            expected: vi.len(),
            got: vj.len(),
        });
    }
    let (ni, nj) = (norm(vi), norm(vj));
    for (particle, nrm) in [(0, ni), (1, nj)] {
        if nrm < MIN_SPEED {
            return Err(Error::DegenerateVelocity {
                particle,
                norm: nrm,
                time: f64::NAN,
            });
        }
    }
    let dot: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
    Ok((dot / (ni * nj)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    n: usize,
    psi: Vec<bool>,
    counts: Vec<usize>,
}

impl Neighborhood {
    /// `psi_ij = [|x_i - x_j| < d]`.
    pub fn psi(&self, i: usize, j: usize) -> bool {
        self.psi[i * self.n + j]
    }

    /// `I_i`, the number of particles within distance `d` of `i`, itself included.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn all_connected(&self) -> bool {
        self.psi.iter().all(|&p| p)
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

pub fn neighborhood(positions: &[f64], dim: usize, radius_d: f64) -> Result<Neighborhood> {
    if !(radius_d > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "radius must be positive, got {radius_d}"
        )));
    }
    if dim == 0 || positions.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: positions.len(),
        });
    }
    let n = positions.len() / dim;
    let d2 = radius_d * radius_d;
    let mut psi = vec![false; n * n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            let close = dist2(
                &positions[i * dim..(i + 1) * dim],
                &positions[j * dim..(j + 1) * dim],
            ) < d2;
            psi[i * n + j] = close;
            counts[i] += close as usize;
        }
    }
    Ok(Neighborhood { n, psi, counts })
}

/// Time derivatives of an ensemble (and of the coupling matrix, when adaptive).
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub dx: Vec<f64>,
    pub dv: Vec<f64>,
    pub dkappa: Option<Matrix>,
}

/// Vector field of the Cucker-Smale family on the flat state
/// `[x (N*dim), v (N*dim), kappa (N*N, adaptive only)]`.
#[derive(Debug, Clone)]
pub struct CsField {
    kind: ModelKind,
    params: ModelParams,
    n: usize,
    dim: usize,
    inv_norm: Vec<f64>,
    counts: Vec<f64>,
}

impl CsField {
    pub fn new(params: ModelParams, n: usize, dim: usize) -> Result<Self> {
        if params.model == ModelKind::Laplacian {
            return Err(Error::ConfigInvalid(
                "Laplacian dynamics use LaplacianField".into(),
            ));
        }
        params.validate()?;
        Ok(CsField {
            kind: params.model,
            params,
            n,
            dim,
            inv_norm: vec![0.0; n],
            counts: vec![0.0; n],
        })
    }

    pub fn state_len(&self) -> usize {
        let base = 2 * self.n * self.dim;
        if self.kind == ModelKind::AdaptiveCs {
            base + self.n * self.n
        } else {
            base
        }
    }

    /// Packs an ensemble (and coupling) into the flat state.
    pub fn pack(
        &self,
        ens: &ParticleEnsemble,
        coupling: Option<&CouplingMatrix>,
    ) -> Result<Vec<f64>> {
        if ens.n() != self.n || ens.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.dim,
                got: ens.n() * ens.dim(),
            });
        }
        let mut y = Vec::with_capacity(self.state_len());
        y.extend_from_slice(ens.positions());
        y.extend_from_slice(ens.velocities());
        if self.kind == ModelKind::AdaptiveCs {
            let k = coupling.ok_or_else(|| {
                Error::ConfigInvalid("adaptive model needs an initial coupling matrix".into())
            })?;
            if k.n() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: k.n(),
                });
            }
            y.extend_from_slice(k.matrix().as_slice());
        }
        Ok(y)
    }

    pub fn unpack(&self, y: &[f64]) -> (ParticleEnsemble, Option<CouplingMatrix>) {
        let m = self.n * self.dim;
        let ens = ParticleEnsemble {
            n: self.n,
            dim: self.dim,
            positions: y[..m].to_vec(),
            velocities: y[m..2 * m].to_vec(),
        };
        let coupling = (self.kind == ModelKind::AdaptiveCs).then(|| CouplingMatrix {
            kappa: Matrix::from_vec(self.n, self.n, y[2 * m..].to_vec())
                .expect("state length checked"),
        });
        (ens, coupling)
    }
}

impl VectorField for CsField {
    fn len(&self) -> usize {
        self.state_len()
    }

    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        match self.kind {
            ModelKind::AdaptiveCs => self.eval_dim::<ADAPTIVE>(t, y, dy),
            ModelKind::SingularCs => self.eval_dim::<SINGULAR>(t, y, dy),
            _ => self.eval_dim::<CLASSICAL>(t, y, dy),
        }
    }
}

const ADAPTIVE: u8 = 0;
const SINGULAR: u8 = 1;
const CLASSICAL: u8 = 2;

impl CsField {
    fn eval_dim<const K: u8>(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        match self.dim {
            1 => self.eval_in::<K, 1>(t, y, dy),
            2 => self.eval_in::<K, 2>(t, y, dy),
            3 => self.eval_in::<K, 3>(t, y, dy),
            _ => self.eval_in::<K, 0>(t, y, dy),
        }
    }

    /// Pair loop over `j > i`. `K` selects the model and `D > 0` fixes the
    /// spatial dimension at compile time; `D = 0` reads it from `self`.
    #[inline(always)]
    fn eval_in<const K: u8, const D: usize>(
        &mut self,
        t: f64,
        y: &[f64],
        dy: &mut [f64],
    ) -> Result<()> {
        let n = self.n;
        let dim = if D == 0 { self.dim } else { D };
        let m = n * dim;
        let (x, rest) = y.split_at(m);
        let (v, kappa) = rest.split_at(m);
        let (dx, drest) = dy.split_at_mut(m);
        let (dv, dk) = drest.split_at_mut(m);
        dx.copy_from_slice(v);
        dv.fill(0.0);

        let adaptive = K == ADAPTIVE;
        let needs_cosine = K != CLASSICAL;
        if needs_cosine {
            for i in 0..n {
                let s = norm(&v[i * dim..(i + 1) * dim]);
                if s < MIN_SPEED {
                    return Err(Error::DegenerateVelocity {
                        particle: i,
                        norm: s,
                        time: t,
                    });
                }
                self.inv_norm[i] = 1.0 / s;
            }
        }
        self.counts.fill(1.0);
        let d2 = self.params.radius_d * self.params.radius_d;
        let eps = self.params.epsilon;

        for i in 0..n {
            let xi = &x[i * dim..(i + 1) * dim];
            let vi = &v[i * dim..(i + 1) * dim];
            if adaptive {
                dk[i * n + i] = eps * (1.0 - kappa[i * n + i]);
            }
            for j in (i + 1)..n {
                let xj = &x[j * dim..(j + 1) * dim];
                let vj = &v[j * dim..(j + 1) * dim];
                let a = if needs_cosine {
                    let dot: f64 = vi.iter().zip(vj).map(|(p, q)| p * q).sum();
                    (dot * self.inv_norm[i] * self.inv_norm[j]).clamp(-1.0, 1.0)
                } else {
                    0.0
                };
                if adaptive {
                    dk[i * n + j] = eps * (a - kappa[i * n + j]);
                    dk[j * n + i] = eps * (a - kappa[j * n + i]);
                }
                let r2 = dist2(xi, xj);
                if r2 >= d2 {
                    continue;
                }
                self.counts[i] += 1.0;
                self.counts[j] += 1.0;
                let (wij, wji) = match K {
                    ADAPTIVE => (kappa[i * n + j], kappa[j * n + i]),
                    SINGULAR => (a, a),
                    _ => {
                        let k = 1.0 / (1.0 + r2).sqrt();
                        (k, k)
                    }
                };
                for c in 0..dim {
                    let diff = vj[c] - vi[c];
                    dv[i * dim + c] += wij * diff;
                    dv[j * dim + c] -= wji * diff;
                }
            }
        }

        let strength = if K == CLASSICAL {
            1.0
        } else {
            self.params.kappa_global
        };
        for i in 0..n {
            let scale = strength / self.counts[i];
            for c in 0..dim {
                dv[i * dim + c] *= scale;
            }
        }
        Ok(())
    }
}

fn cs_derivatives(
    params: ModelParams,
    ens: &ParticleEnsemble,
    coupling: Option<&CouplingMatrix>,
) -> Result<Derivatives> {
    let mut field = CsField::new(params, ens.n(), ens.dim())?;
    let y = field.pack(ens, coupling)?;
    let mut dy = vec![0.0; y.len()];
    field.eval(0.0, &y, &mut dy)?;
    let m = ens.n() * ens.dim();
    let dkappa = (params.model == ModelKind::AdaptiveCs)
        .then(|| Matrix::from_vec(ens.n(), ens.n(), dy[2 * m..].to_vec()).expect("length checked"));
    dy.truncate(2 * m);
    let dv = dy.split_off(m);
    Ok(Derivatives { dx: dy, dv, dkappa })
}

pub fn rhs_adaptive_cs(
    ens: &ParticleEnsemble,
    coupling: &CouplingMatrix,
    params: &ModelParams,
) -> Result<Derivatives> {
    let p = ModelParams {
        model: ModelKind::AdaptiveCs,
        ..*params
    };
    cs_derivatives(p, ens, Some(coupling))
}

pub fn rhs_singular_cs(ens: &ParticleEnsemble, params: &ModelParams) -> Result<Derivatives> {
    let p = ModelParams {
        model: ModelKind::SingularCs,
        ..*params
    };
    cs_derivatives(p, ens, None)
}

pub fn rhs_classical_cs(ens: &ParticleEnsemble, params: &ModelParams) -> Result<Derivatives> {
    let p = ModelParams {
        model: ModelKind::ClassicalCs,
        ..*params
    };
    cs_derivatives(p, ens, None)
}

/// `x' = -L x` for an `N x dim` row-major state.
pub fn rhs_laplacian(x: &[f64], dim: usize, g: &WeightedDigraph) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    g.apply_negative_laplacian(x, dim, &mut out)?;
    Ok(out)
}

/// `x' = -L(t) x` driven by a temporal graph. The active piece is cached
/// between evaluations.
#[derive(Debug, Clone)]
pub struct LaplacianField<'a> {
    graph: &'a TemporalGraph,
    dim: usize,
    cached: Option<(u64, WeightedDigraph)>,
}

impl<'a> LaplacianField<'a> {
    pub fn new(graph: &'a TemporalGraph, dim: usize) -> Self {
        LaplacianField {
            graph,
            dim,
            cached: None,
        }
    }

    fn graph_at(&mut self, t: f64) -> &WeightedDigraph {
        let k = self.graph.piece_index(t);
        if self.cached.as_ref().is_none_or(|(ck, _)| *ck != k) {
            self.cached = Some((k, self.graph.piece(k)));
        }
        &self.cached.as_ref().expect("just filled").1
    }
}

impl VectorField for LaplacianField<'_> {
    fn len(&self) -> usize {
        self.graph.n_vertices() * self.dim
    }

    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let dim = self.dim;
        self.graph_at(t).apply_negative_laplacian(y, dim, dy)
    }
}
