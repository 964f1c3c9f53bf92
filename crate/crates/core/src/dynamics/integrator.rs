use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::{CsField, LaplacianField};
use super::{CouplingMatrix, ModelKind, ModelParams, ParticleEnsemble};
use crate::analysis::MetricSeries;
use crate::error::{Error, Result};
use crate::graph::TemporalGraph;

/// Right-hand side `y' = f(t, y)` on a flat state. Takes `&mut self` so
/// implementations can keep scratch buffers.
pub trait VectorField {
    fn len(&self) -> usize;
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

/// Classical fourth-order Runge-Kutta with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Rk4 {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    /// Advances `y` from `t` to `t + h`. Every stage evaluates the field at
    /// its own time and state.
    pub fn step<F: VectorField + ?Sized>(
        &mut self,
        f: &mut F,
        t: f64,
        h: f64,
        y: &mut [f64],
    ) -> Result<()> {
        let half = 0.5 * h;
        f.eval(t, y, &mut self.k1)?;
        for ((s, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *s = yi + half * k;
        }
        f.eval(t + half, &self.tmp, &mut self.k2)?;
        for ((s, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *s = yi + half * k;
        }
        f.eval(t + half, &self.tmp, &mut self.k3)?;
        for ((s, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *s = yi + h * k;
        }
        f.eval(t + h, &self.tmp, &mut self.k4)?;
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
        Ok(())
    }
}

/// One RK4 step without reusing buffers.
pub fn rk4_step<F: VectorField + ?Sized>(f: &mut F, t: f64, h: f64, y: &mut [f64]) -> Result<()> {
    Rk4::new(y.len()).step(f, t, h, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSpec {
    pub horizon: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl IntegrationSpec {
    pub fn new(horizon: f64, dt: f64, sample_every: usize) -> Self {
        IntegrationSpec {
            horizon,
            dt,
            sample_every,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::ConfigInvalid("sample_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on the horizon.
    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-6).ceil().max(1.0) as usize
    }
}

/// Integrates `y` over `spec`, calling `on_sample(t, y, field)` at `t = 0`,
/// every `sample_every` steps, and at the horizon.
fn drive<F, S>(field: &mut F, y: &mut [f64], spec: &IntegrationSpec, mut on_sample: S) -> Result<()>
where
    F: VectorField,
    S: FnMut(f64, &[f64], &mut F) -> Result<()>,
{
    spec.validate()?;
    let steps = spec.n_steps();
    let mut rk = Rk4::new(y.len());
    on_sample(0.0, y, field)?;
    for k in 0..steps {
        let t = k as f64 * spec.dt;
        let last = k + 1 == steps;
        let t_next = if last {
            spec.horizon
        } else {
            (k + 1) as f64 * spec.dt
        };
        rk.step(field, t, t_next - t, y)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(t_next));
        }
        if last || (k + 1) % spec.sample_every == 0 {
            on_sample(t_next, y, field)?;
        }
    }
    Ok(())
}

/// One recorded state handed to a streaming observer.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub t: f64,
    pub ensemble: &'a ParticleEnsemble,
    pub coupling: Option<&'a CouplingMatrix>,
}

/// Integrates a model, streaming samples to `observer` without storing them.
///
/// Laplacian mode takes its state from the ensemble positions and needs
/// `graph`; its samples carry `x' = -L(t) x` as velocities. The other models
/// ignore `graph`; the adaptive model needs `coupling`.
pub fn run<O>(
    params: &ModelParams,
    init: &ParticleEnsemble,
    coupling: Option<&CouplingMatrix>,
    graph: Option<&TemporalGraph>,
    spec: &IntegrationSpec,
    mut observer: O,
) -> Result<()>
where
    O: FnMut(Sample<'_>) -> Result<()>,
{
    let (n, dim) = (init.n(), init.dim());
    match params.model {
        ModelKind::Laplacian => {
            let g = graph
                .ok_or_else(|| Error::ConfigInvalid("Laplacian dynamics need a graph".into()))?;
            if g.n_vertices() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.n_vertices(),
                });
            }
            let mut field = LaplacianField::new(g, dim);
            let mut y = init.positions().to_vec();
            let mut vel = vec![0.0; y.len()];
            drive(&mut field, &mut y, spec, |t, y, f| {
                f.eval(t, y, &mut vel)?;
                let ens = ParticleEnsemble {
                    n,
                    dim,
                    positions: y.to_vec(),
                    velocities: vel.clone(),
                };
                observer(Sample {
                    t,
                    ensemble: &ens,
                    coupling: None,
                })
            })
        }
        _ => {
            let mut field = CsField::new(*params, n, dim)?;
            let mut y = field.pack(init, coupling)?;
            drive(&mut field, &mut y, spec, |t, y, f| {
                let (ens, k) = f.unpack(y);
                observer(Sample {
                    t,
                    ensemble: &ens,
                    coupling: k.as_ref(),
                })
            })
        }
    }
}

/// Time-sampled trajectory. `couplings` is present for the adaptive model.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub sample_times: Vec<f64>,
    pub states: Vec<ParticleEnsemble>,
    pub couplings: Option<Vec<CouplingMatrix>>,
    pub derived: Vec<MetricSeries>,
}

/// Integrates and records every sample.
pub fn integrate(
    params: &ModelParams,
    init: &ParticleEnsemble,
    coupling: Option<&CouplingMatrix>,
    graph: Option<&TemporalGraph>,
    spec: &IntegrationSpec,
) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord::default();
    if params.model == ModelKind::AdaptiveCs {
        rec.couplings = Some(Vec::new());
    }
    run(params, init, coupling, graph, spec, |s| {
        rec.push(s);
        Ok(())
    })?;
    Ok(rec)
}

impl TrajectoryRecord {
    pub fn push(&mut self, s: Sample<'_>) {
        self.sample_times.push(s.t);
        self.states.push(s.ensemble.clone());
        if let (Some(list), Some(k)) = (self.couplings.as_mut(), s.coupling) {
            list.push(k.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.sample_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_times.is_empty()
    }

    pub fn last(&self) -> Option<&ParticleEnsemble> {
        self.states.last()
    }

    /// Index of the sample closest to `t`.
    pub fn index_near(&self, t: f64) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| {
            (self.sample_times[a] - t)
                .abs()
                .total_cmp(&(self.sample_times[b] - t).abs())
        })
    }

    pub fn metric(&self, name: &str) -> Option<&MetricSeries> {
        self.derived.iter().find(|m| m.name == name)
    }

    /// CSV with header `t, x_i_k..., v_i_k..., [kappa_i_j...]`, one row per sample.
    pub fn write_csv<W: Write>(&self, mut out: W, with_kappa: bool) -> std::io::Result<()> {
        let Some(first) = self.states.first() else {
            return writeln!(out, "t");
        };
        let (n, dim) = (first.n(), first.dim());
        let kappa = with_kappa && self.couplings.as_ref().is_some_and(|c| !c.is_empty());
        let mut header = String::from("t");
        for prefix in ["x", "v"] {
            for i in 0..n {
                for k in 0..dim {
                    let _ = write!(header, ",{prefix}_{i}_{k}");
                }
            }
        }
        if kappa {
            for i in 0..n {
                for j in 0..n {
                    let _ = write!(header, ",kappa_{i}_{j}");
                }
            }
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for (s, (t, ens)) in self.sample_times.iter().zip(&self.states).enumerate() {
            line.clear();
            let _ = write!(line, "{t}");
            for v in ens.positions().iter().chain(ens.velocities()) {
                let _ = write!(line, ",{v}");
            }
            if kappa {
                for v in self.couplings.as_ref().expect("checked")[s]
                    .matrix()
                    .as_slice()
                {
                    let _ = write!(line, ",{v}");
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path, with_kappa: bool) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w, with_kappa)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedDigraph;

    struct Decay;

    impl VectorField for Decay {
        fn len(&self) -> usize {
            1
        }

        fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = -y[0];
            Ok(())
        }
    }

    #[test]
    fn rk4_amplification_factor() {
        let h: f64 = 1e-3;
        let mut y = [1.0];
        rk4_step(&mut Decay, 0.0, h, &mut y).unwrap();
        let want = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((y[0] - want).abs() < 1e-15);
    }

    #[test]
    fn sampling_includes_both_ends() {
        let g = TemporalGraph::fixed(WeightedDigraph::complete(2, 1.0).unwrap());
        let init = ParticleEnsemble::from_positions(2, 1, vec![1.0, -1.0]).unwrap();
        let rec = integrate(
            &ModelParams::new(ModelKind::Laplacian),
            &init,
            None,
            Some(&g),
            &IntegrationSpec::new(0.0105, 1e-3, 4),
        )
        .unwrap();
        assert_eq!(rec.sample_times.len(), 4);
        assert_eq!(rec.sample_times[0], 0.0);
        assert_eq!(*rec.sample_times.last().unwrap(), 0.0105);
        assert!(rec.sample_times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn consensus_is_an_equilibrium() {
        let g = TemporalGraph::fixed(WeightedDigraph::complete(3, 1.0).unwrap());
        let init =
            ParticleEnsemble::from_positions(3, 2, vec![0.5, -2.0, 0.5, -2.0, 0.5, -2.0]).unwrap();
        let rec = integrate(
            &ModelParams::new(ModelKind::Laplacian),
            &init,
            None,
            Some(&g),
            &IntegrationSpec::new(1.0, 1e-3, 100),
        )
        .unwrap();
        for s in &rec.states {
            assert_eq!(s.positions(), init.positions());
            assert!(s.velocities().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn errors_carry_time() {
        let init =
            ParticleEnsemble::from_rows(&[vec![0.0], vec![0.1]], &[vec![1.0], vec![-1.0]]).unwrap();
        let p = ModelParams::new(ModelKind::SingularCs);
        let zero =
            ParticleEnsemble::from_rows(&[vec![0.0], vec![0.1]], &[vec![0.0], vec![-1.0]]).unwrap();
        let err =
            integrate(&p, &zero, None, None, &IntegrationSpec::new(1.0, 1e-3, 10)).unwrap_err();
        assert!(matches!(err, Error::DegenerateVelocity { particle: 0, time, .. } if time == 0.0));
        assert!(integrate(&p, &init, None, None, &IntegrationSpec::new(0.0, 1e-3, 1)).is_err());
    }

    #[test]
    fn csv_layout() {
        let init =
            ParticleEnsemble::from_rows(&[vec![0.0], vec![0.5]], &[vec![1.0], vec![2.0]]).unwrap();
        let p = ModelParams::new(ModelKind::AdaptiveCs).with_epsilon(1.0);
        let k = CouplingMatrix::constant(2, 0.5);
        let rec = integrate(
            &p,
            &init,
            Some(&k),
            None,
            &IntegrationSpec::new(0.002, 1e-3, 1),
        )
        .unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x_0_0,x_1_0,v_0_0,v_1_0,kappa_0_0,kappa_0_1,kappa_1_0,kappa_1_1"
        );
        assert_eq!(lines.next().unwrap(), "0,0,0.5,1,2,0.5,0.5,0.5,0.5");
        assert_eq!(lines.count(), 2);
    }
}
