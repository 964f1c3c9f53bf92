use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{GraphSpec, InitialData, ScenarioConfig, SERIES_METRICS};
use super::presets::named_initial_data;
use super::twobody::{run_two_body_batch, two_body_csv, TwoBodySummary};
use super::{cluster_report_state, ClusterStat};
use crate::analysis::{
    centroid, cluster_count, diameter, fluctuation_norm, max_velocity_difference, min_similarity,
    velocity_deviation, MetricSeries, MetricSummary,
};
use crate::dynamics::{
    neighborhood, run, similarity, CouplingMatrix, IntegrationSpec, ModelKind, ParticleEnsemble,
    Sample, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::generators::{
    circulant_regular, leader_temporal, one_leader, overlapping_cliques, perturb_weights,
    three_group_directed, three_group_temporal, two_leaders, LeaderMode, LeaderSchedule,
};
use crate::graph::{io as graph_io, TemporalGraph, WeightedDigraph};
use crate::matrix::Matrix;
use crate::rng::{seeded, uniform};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Builds the initial ensemble and, when the data carry one, the coupling.
pub fn build_initial(cfg: &ScenarioConfig) -> Result<(ParticleEnsemble, Option<CouplingMatrix>)> {
    match &cfg.initial_data {
        InitialData::Explicit {
            positions,
            velocities,
            kappa,
        } => {
            let vel = match velocities {
                Some(v) => v.clone(),
                None => positions.iter().map(|p| vec![0.0; p.len()]).collect(),
            };
            let ens = ParticleEnsemble::from_rows(positions, &vel)?;
            let k = kappa
                .as_ref()
                .map(|k| Matrix::from_rows(k).and_then(CouplingMatrix::new))
                .transpose()?;
            Ok((ens, k))
        }
        InitialData::Named { name, n } => Ok((named_initial_data(name, *n)?, None)),
        InitialData::Seeded {
            n,
            dim,
            position,
            velocity,
            kappa,
        } => {
            let (n, dim) = (*n, *dim);
            let mut rng = seeded(cfg.seed);
            let mut draw = |range: &Option<[f64; 2]>, len: usize| match range {
                Some([lo, hi]) => (0..len).map(|_| uniform(&mut rng, *lo, *hi)).collect(),
                None => vec![0.0; len],
            };
            let x = draw(position, n * dim);
            let v = draw(velocity, n * dim);
            let ens = ParticleEnsemble::new(n, dim, x, v)?;
            let coupling = kappa.map(|[lo, hi]| {
                let mut k = Matrix::identity(n);
                for i in 0..n {
                    for j in (i + 1)..n {
                        let w = uniform(&mut rng, lo, hi);
                        k[(i, j)] = w;
                        k[(j, i)] = w;
                    }
                }
                CouplingMatrix::new(k).expect("square and finite")
            });
            Ok((ens, coupling))
        }
    }
}

/// Builds the temporal graph named by `spec` on `n` vertices. Switching
/// periods default to ten time steps.
pub fn build_graph(spec: &GraphSpec, n: usize, dt: f64, seed: u64) -> Result<TemporalGraph> {
    let weight = spec.f64_or("weight", 1.0)?;
    let period = spec.f64_or("period", 10.0 * dt)?;
    let fixed = |g: Result<WeightedDigraph>| g.map(TemporalGraph::fixed);
    match spec.generator.as_str() {
        "complete" => fixed(WeightedDigraph::complete(n, weight)),
        "one_leader" => fixed(one_leader(n, weight)),
        "two_leaders" => fixed(two_leaders(n, weight)),
        "leader_temporal" => {
            let mode: LeaderMode =
                serde_json::from_value(serde_json::Value::String(spec.str_req("mode")?.into()))
                    .map_err(|e| Error::ConfigInvalid(format!("leader mode: {e}")))?;
            leader_temporal(
                n,
                weight,
                LeaderSchedule { mode, period, seed },
                f64::INFINITY,
            )
        }
        "three_group" => {
            let sizes: [usize; 3] = spec
                .params
                .get("sizes")
                .and_then(|v| serde_json::from_value(v.clone()).ok())
                .ok_or_else(|| {
                    Error::ConfigInvalid("three_group needs `sizes` = [n1, n2, n3]".into())
                })?;
            if sizes.iter().sum::<usize>() != n {
                return Err(Error::ConfigInvalid(format!(
                    "group sizes {sizes:?} do not sum to N = {n}"
                )));
            }
            fixed(three_group_directed((sizes[0], sizes[1], sizes[2]), weight))
        }
        "three_group_temporal" => three_group_temporal(n, weight, period, seed),
        "circulant" => fixed(circulant_regular(n, spec.usize_req("k")?, weight)),
        "overlapping_cliques" => fixed(overlapping_cliques(
            n,
            spec.usize_req("n_min")?,
            spec.usize_req("n_max")?,
            weight,
        )),
        "assumption_b" => {
            let (n_min, n_max) = (spec.usize_req("n_min")?, spec.usize_req("n_max")?);
            let gamma_m = spec.f64_or("gamma_m", 1.0)?;
            let ratio = spec.f64_or("ratio", f64::NAN)?;
            if !(ratio > 2.0) {
                return Err(Error::ConfigInvalid(format!(
                    "assumption_b needs ratio > 2, got {ratio}"
                )));
            }
            let g = if n_min == n_max {
                circulant_regular(n, n_min, gamma_m)?
            } else {
                overlapping_cliques(n, n_min, n_max, gamma_m)?
            };
            fixed(perturb_weights(&g, gamma_m, gamma_m / ratio, seed))
        }
        "file" => {
            let g = graph_io::load_json(Path::new(spec.str_req("path")?))?;
            if g.n_vertices() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.n_vertices(),
                });
            }
            Ok(TemporalGraph::fixed(g))
        }
        other => Err(Error::ConfigInvalid(format!(
            "unknown graph generator `{other}`"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub kind: String,
    pub metric: String,
    /// Constant in front of the exponential: the metric's value at t = 0.
    pub constant: f64,
    pub rate: f64,
    pub statement_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedValues {
    pub t: f64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub seed: u64,
    pub model: ModelKind,
    pub radius_d: f64,
    pub metrics: Vec<MetricSummary>,
    pub at_times: Vec<TimedValues>,
    #[serde(default)]
    pub clusters: Option<Vec<ClusterStat>>,
    #[serde(default)]
    pub envelope: Option<EnvelopeReport>,
}

/// In-memory result of one run: metric series, summary and rendered files.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub series: Vec<MetricSeries>,
    /// Final sampled state.
    pub final_state: ParticleEnsemble,
    pub final_coupling: Option<CouplingMatrix>,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, Vec<u8>)>,
}

impl RunOutcome {
    pub fn series(&self, name: &str) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.name == name)
    }
}

struct Snapshot {
    t: f64,
    ens: ParticleEnsemble,
    coupling: Option<CouplingMatrix>,
}

fn series_value(name: &str, s: &Sample<'_>, x0_mean: &[f64], radius_d: f64) -> Result<Option<f64>> {
    let e = s.ensemble;
    let v = match name {
        "diameter" => diameter(e.positions(), e.dim()),
        "fluctuation_norm" => fluctuation_norm(e.positions(), e.dim()),
        "velocity_fluctuation" => fluctuation_norm(e.velocities(), e.dim()),
        "velocity_deviation" => velocity_deviation(e),
        "max_velocity_difference" => max_velocity_difference(e),
        "min_similarity" => min_similarity(e)?,
        "cluster_count" => cluster_count(e.positions(), e.dim(), radius_d)?.count as f64,
        "kappa_min" | "kappa_max" => match s.coupling {
            None => return Ok(None),
            Some(k) => {
                let (lo, hi) = k.range();
                if name == "kappa_min" {
                    lo
                } else {
                    hi
                }
            }
        },
        "mean_drift" => {
            let c = centroid(e.positions(), e.dim());
            c.iter()
                .zip(x0_mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        }
        other => unreachable!("`{other}` is not a series metric"),
    };
    Ok(Some(v))
}

fn matrix_csv(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<u8> {
    let mut s = String::new();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}", f(i, j));
        }
        s.push('\n');
    }
    s.into_bytes()
}

fn series_csv(s: &MetricSeries) -> Vec<u8> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf).expect("writing to memory");
    buf
}

fn wants(cfg: &ScenarioConfig, out: &str) -> bool {
    cfg.outputs.iter().any(|o| o == out)
}

/// Integrates one resolved (variant-free) config and renders its outputs in
/// memory. File names are prefixed with `label`.
pub fn simulate(cfg: &ScenarioConfig, label: &str) -> Result<RunOutcome> {
    let (init, coupling) = build_initial(cfg)?;
    let graph = match (&cfg.model.model, &cfg.graph_spec) {
        (ModelKind::Laplacian, Some(spec)) => Some(build_graph(spec, init.n(), cfg.dt, cfg.seed)?),
        _ => None,
    };
    let spec = IntegrationSpec::new(cfg.horizon, cfg.dt, cfg.sample_every);
    let radius_d = cfg.model.radius_d;
    let metric_names: Vec<&str> = SERIES_METRICS
        .iter()
        .copied()
        .filter(|m| wants(cfg, m))
        .collect();
    let mut series: Vec<MetricSeries> =
        metric_names.iter().map(|m| MetricSeries::new(*m)).collect();
    let x0_mean = centroid(init.positions(), init.dim());
    let tol = 0.5 * cfg.dt;
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut last: Option<Snapshot> = None;
    let mut traj = wants(cfg, "trajectory").then(|| TrajectoryRecord {
        couplings: (cfg.model.model == ModelKind::AdaptiveCs).then(Vec::new),
        ..Default::default()
    });

    run(
        &cfg.model,
        &init,
        coupling.as_ref(),
        graph.as_ref(),
        &spec,
        |s| {
            for (m, name) in series.iter_mut().zip(&metric_names) {
                if let Some(v) = series_value(name, &s, &x0_mean, radius_d)? {
                    m.push(s.t, v);
                }
            }
            if cfg.snapshot_times.iter().any(|&ts| (ts - s.t).abs() <= tol) {
                snapshots.push(Snapshot {
                    t: s.t,
                    ens: s.ensemble.clone(),
                    coupling: s.coupling.cloned(),
                });
            }
            if let Some(tr) = traj.as_mut() {
                tr.push(s);
            }
            last = Some(Snapshot {
                t: s.t,
                ens: s.ensemble.clone(),
                coupling: s.coupling.cloned(),
            });
            Ok(())
        },
    )?;
    let last = last.expect("run always samples t = 0");
    if let Some(&ts) = cfg
        .snapshot_times
        .iter()
        .find(|&&ts| !snapshots.iter().any(|s| (s.t - ts).abs() <= tol))
    {
        return Err(Error::ConfigInvalid(format!(
            "snapshot time {ts} is not on the sample grid (dt * sample_every = {})",
            cfg.dt * cfg.sample_every as f64
        )));
    }
    series.retain(|s| !s.is_empty());

    let mut envelope = None;
    if let Some(env) = &cfg.envelope {
        let metric = env.metric.name();
        let base = series.iter().find(|s| s.name == metric).expect("validated");
        let c0 = base.initial_value().expect("nonempty");
        let rate = env.kind.exponent(&env.params)?;
        let values = base.times.iter().map(|t| c0 * (-rate * t).exp()).collect();
        let env_series = MetricSeries::from_parts("envelope", base.times.clone(), values)?;
        envelope = Some(EnvelopeReport {
            kind: env.kind.to_string(),
            metric: metric.to_string(),
            constant: c0,
            rate,
            statement_rate: env.kind.statement_exponent(&env.params)?,
        });
        if wants(cfg, "envelope") {
            series.push(env_series);
        }
    }

    let metrics = series
        .iter()
        .map(|s| {
            let rate = envelope
                .as_ref()
                .filter(|e| e.metric == s.name)
                .map(|e| e.rate);
            s.summary(rate)
        })
        .collect();
    let at_times = cfg
        .snapshot_times
        .iter()
        .map(|&t| TimedValues {
            t,
            values: series
                .iter()
                .filter_map(|s| {
                    let k = s.times.iter().position(|&st| (st - t).abs() <= tol)?;
                    Some((s.name.clone(), s.values[k]))
                })
                .collect(),
        })
        .collect();

    let mut files: Vec<(String, Vec<u8>)> = series
        .iter()
        .map(|s| (format!("{label}.{}.csv", s.name), series_csv(s)))
        .collect();
    let clusters = if wants(cfg, "clusters") {
        let report = cluster_report_state(&last.ens, radius_d)?;
        let mut csv = String::from("size,angle_deg\n");
        for c in &report {
            let _ = writeln!(csv, "{},{}", c.size, c.angle_deg);
        }
        files.push((format!("{label}.clusters.csv"), csv.into_bytes()));
        let labels = cluster_count(last.ens.positions(), last.ens.dim(), radius_d)?.labels;
        let mut csv = String::from("i,label\n");
        for (i, l) in labels.iter().enumerate() {
            let _ = writeln!(csv, "{i},{l}");
        }
        files.push((format!("{label}.labels.csv"), csv.into_bytes()));
        Some(report)
    } else {
        None
    };
    if wants(cfg, "angles") {
        if last.ens.dim() != 2 {
            return Err(Error::Requires2D(last.ens.dim()));
        }
        let mut csv = String::from("t");
        for i in 0..last.ens.n() {
            let _ = write!(csv, ",angle_{i}");
        }
        csv.push('\n');
        for s in &snapshots {
            let _ = write!(csv, "{}", s.t);
            for i in 0..s.ens.n() {
                let _ = write!(
                    csv,
                    ",{}",
                    crate::analysis::polar_angle_deg(s.ens.velocity(i))
                );
            }
            csv.push('\n');
        }
        files.push((format!("{label}.angles.csv"), csv.into_bytes()));
    }
    for s in &snapshots {
        let n = s.ens.n();
        let t = s.t;
        if wants(cfg, "kappa_matrix") {
            if let Some(k) = &s.coupling {
                files.push((
                    format!("{label}.kappa_matrix.t{t}.csv"),
                    matrix_csv(n, |i, j| k.get(i, j)),
                ));
            }
        }
        if wants(cfg, "distance_matrix") {
            let e = &s.ens;
            let dist = |i: usize, j: usize| {
                e.position(i)
                    .iter()
                    .zip(e.position(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            };
            files.push((
                format!("{label}.distance_matrix.t{t}.csv"),
                matrix_csv(n, dist),
            ));
        }
        if wants(cfg, "psi_a_matrix") {
            let nb = neighborhood(s.ens.positions(), s.ens.dim(), radius_d)?;
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if nb.psi(i, j) {
                        m[(i, j)] = similarity(s.ens.velocity(i), s.ens.velocity(j))?;
                    }
                }
            }
            files.push((
                format!("{label}.psi_a_matrix.t{t}.csv"),
                matrix_csv(n, |i, j| m[(i, j)]),
            ));
        }
    }
    if let Some(tr) = &traj {
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, true).expect("writing to memory");
        files.push((format!("{label}.trajectory.csv"), buf));
    }

    Ok(RunOutcome {
        summary: RunSummary {
            label: label.to_string(),
            seed: cfg.seed,
            model: cfg.model.model,
            radius_d,
            metrics,
            at_times,
            clusters,
            envelope,
        },
        series,
        final_state: last.ens,
        final_coupling: last.coupling,
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub toolkit_version: String,
    pub seed: u64,
    pub duration_secs: f64,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub toolkit_version: String,
    pub runs: Vec<RunSummary>,
    #[serde(default)]
    pub two_body: Option<TwoBodySummary>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes via a temporary sibling and a rename, so readers never see a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunManifest> {
    run_scenario_with(config, ExecMode::Parallel)
}

/// Validates, runs every variant (fanned out per `mode`), and writes the
/// per-metric CSVs, `summary.json` and finally `manifest.json` into
/// `config.out_dir`.
pub fn run_scenario_with(config: &ScenarioConfig, mode: ExecMode) -> Result<RunManifest> {
    let started = Instant::now();
    config.validate()?;
    let name = config.name.as_str();
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut runs = Vec::new();
    let mut two_body = None;
    if let Some(batch) = &config.two_body {
        let cases = run_two_body_batch(
            batch,
            &config.model,
            config.horizon,
            config.dt,
            config.seed,
            mode,
        )
        .map_err(|e| e.in_scenario(name))?;
        files.push(("twobody.csv".into(), two_body_csv(&cases)));
        two_body = Some(TwoBodySummary::from_cases(&cases));
    } else {
        let resolved = config.resolve_runs()?;
        let outcomes = exec::try_map(mode, resolved, |(label, cfg)| {
            simulate(&cfg, &label).map_err(|e| e.in_scenario(&format!("{name}/{label}")))
        })?;
        for o in outcomes {
            files.extend(o.files);
            runs.push(o.summary);
        }
    }
    let summary = ScenarioSummary {
        scenario: name.to_string(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
        runs,
        two_body,
    };
    files.push((
        "summary.json".into(),
        serde_json::to_vec_pretty(&summary).expect("summary serializes"),
    ));

    let mut digests = Vec::with_capacity(files.len());
    for (file, bytes) in &files {
        write_atomic(&dir.join(file), bytes)?;
        digests.push(FileDigest {
            path: file.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        config: config.clone(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
        seed: config.seed,
        duration_secs: started.elapsed().as_secs_f64(),
        files: digests,
    };
    let text = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join("manifest.json"), &text)?;
    Ok(manifest)
}

/// Recomputes the digests of a finished run directory and compares them with
/// its manifest. Returns the names of mismatching or missing files.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
    Ok(manifest
        .files
        .iter()
        .filter(|f| {
            std::fs::read(dir.join(&f.path))
                .map(|b| sha256_hex(&b) != f.sha256)
                .unwrap_or(true)
        })
        .map(|f| f.path.clone())
        .collect())
}
