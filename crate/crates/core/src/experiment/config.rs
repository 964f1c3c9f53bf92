use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{EnvelopeKind, EnvelopeParams};
use crate::dynamics::{ModelKind, ModelParams};
use crate::error::{Error, Result};

/// Per-sample scalar metrics a scenario can request.
pub const SERIES_METRICS: &[&str] = &[
    "diameter",
    "fluctuation_norm",
    "velocity_fluctuation",
    "velocity_deviation",
    "max_velocity_difference",
    "min_similarity",
    "cluster_count",
    "kappa_min",
    "kappa_max",
    "mean_drift",
];

/// Outputs that are not plain series: snapshots, reports and raw dumps.
pub const OTHER_OUTPUTS: &[&str] = &[
    "envelope",
    "clusters",
    "angles",
    "kappa_matrix",
    "distance_matrix",
    "psi_a_matrix",
    "trajectory",
];

fn default_dt() -> f64 {
    1e-3
}

fn default_sample_every() -> usize {
    100
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Generator name plus its parameter map. Used by Laplacian scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub generator: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

impl GraphSpec {
    pub fn new(generator: &str) -> Self {
        GraphSpec {
            generator: generator.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub(crate) fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| {
                Error::ConfigInvalid(format!("graph param `{key}` must be a number, got {v}"))
            }),
        }
    }

    pub(crate) fn usize_req(&self, key: &str) -> Result<usize> {
        self.params
            .get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| {
                Error::ConfigInvalid(format!(
                    "graph `{}` needs integer param `{key}`",
                    self.generator
                ))
            })
    }

    pub(crate) fn str_req(&self, key: &str) -> Result<&str> {
        self.params.get(key).and_then(Value::as_str).ok_or_else(|| {
            Error::ConfigInvalid(format!(
                "graph `{}` needs string param `{key}`",
                self.generator
            ))
        })
    }
}

/// Initial state. Seeded draws happen in the order positions, velocities,
/// coupling upper triangle, each row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Explicit {
        positions: Vec<Vec<f64>>,
        #[serde(default)]
        velocities: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        kappa: Option<Vec<Vec<f64>>>,
    },
    /// A fixed configuration from the registry in [`super::presets`].
    Named { name: String, n: usize },
    /// Independent uniform draws; a missing range means all zeros (or the
    /// identity for the coupling, which then stays unset).
    Seeded {
        n: usize,
        dim: usize,
        #[serde(default)]
        position: Option<[f64; 2]>,
        #[serde(default)]
        velocity: Option<[f64; 2]>,
        #[serde(default)]
        kappa: Option<[f64; 2]>,
    },
}

impl InitialData {
    pub fn n(&self) -> usize {
        match self {
            InitialData::Explicit { positions, .. } => positions.len(),
            InitialData::Named { n, .. } | InitialData::Seeded { n, .. } => *n,
        }
    }
}

/// Decay envelope drawn next to `metric`, scaled by the metric's value at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub kind: EnvelopeKind,
    pub params: EnvelopeParams,
    #[serde(default = "default_envelope_metric")]
    pub metric: EnvelopeMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMetric {
    Diameter,
    FluctuationNorm,
}

impl EnvelopeMetric {
    pub fn name(self) -> &'static str {
        match self {
            EnvelopeMetric::Diameter => "diameter",
            EnvelopeMetric::FluctuationNorm => "fluctuation_norm",
        }
    }
}

fn default_envelope_metric() -> EnvelopeMetric {
    EnvelopeMetric::Diameter
}

/// One run of a multi-run scenario: the base config with `set` applied as
/// dotted-path overrides and the seed shifted by `seed_offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    #[serde(default)]
    pub seed_offset: u64,
    #[serde(default)]
    pub set: BTreeMap<String, Value>,
}

impl Variant {
    pub fn new(label: impl Into<String>) -> Self {
        Variant {
            label: label.into(),
            seed_offset: 0,
            set: BTreeMap::new(),
        }
    }

    pub fn seed_offset(mut self, offset: u64) -> Self {
        self.seed_offset = offset;
        self
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.set.insert(key.to_string(), value.into());
        self
    }
}

/// Batch check of the two-body classifier against simulation. Instances are
/// drawn until `definite_target` of them get a definite verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyBatch {
    pub definite_target: usize,
    pub kappa_range: [f64; 2],
    pub speed_range: [f64; 2],
    pub max_angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelParams,
    #[serde(default)]
    pub graph_spec: Option<GraphSpec>,
    pub initial_data: InitialData,
    #[serde(rename = "horizon_T")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    pub seed: u64,
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Times at which snapshot outputs are taken and series values reported.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub envelope: Option<EnvelopeSpec>,
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub two_body: Option<TwoBodyBatch>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Sets the field at a dotted path (`model.radius_d`, `graph_spec.params.weight`)
    /// and re-validates the shape of the result.
    pub fn with_override(&self, key: &str, value: Value) -> Result<Self> {
        let mut tree = serde_json::to_value(self).expect("config serializes");
        let mut node = &mut tree;
        let parts: Vec<&str> = key.split('.').collect();
        for (k, part) in parts.iter().enumerate() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            }
            let Value::Object(map) = node else {
                return Err(Error::ConfigInvalid(format!(
                    "`{key}`: `{}` is not an object",
                    parts[..k].join(".")
                )));
            };
            if k + 1 == parts.len() {
                map.insert(part.to_string(), value.clone());
                break;
            }
            node = map.entry(part.to_string()).or_insert(Value::Null);
        }
        let cfg: ScenarioConfig = serde_json::from_value(tree)
            .map_err(|e| Error::ConfigInvalid(format!("override `{key}`: {e}")))?;
        // Unknown fields deserialize silently; catch them by reading the value back.
        let back = serde_json::to_value(&cfg).expect("config serializes");
        let kept = parts
            .iter()
            .try_fold(&back, |node, part| node.get(part))
            .is_some_and(|v| same_value(v, &value));
        if !kept {
            return Err(Error::ConfigInvalid(format!("unknown config key `{key}`")));
        }
        Ok(cfg)
    }

    /// The single-run configs this scenario expands to, labelled. Without
    /// variants this is the config itself under its own name.
    pub fn resolve_runs(&self) -> Result<Vec<(String, ScenarioConfig)>> {
        let mut base = self.clone();
        base.variants.clear();
        if self.variants.is_empty() {
            return Ok(vec![(self.name.clone(), base)]);
        }
        self.variants
            .iter()
            .map(|v| {
                let mut cfg = base.clone();
                for (k, val) in &v.set {
                    cfg = cfg.with_override(k, val.clone())?;
                }
                cfg.seed = self.seed.wrapping_add(v.seed_offset);
                Ok((v.label.clone(), cfg))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.name.is_empty() || !safe_label(&self.name) {
            return bad(format!(
                "scenario name `{}` must be nonempty [A-Za-z0-9_-]",
                self.name
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon_T must be positive, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be >= 1".into());
        }
        for out in &self.outputs {
            if !SERIES_METRICS.contains(&out.as_str()) && !OTHER_OUTPUTS.contains(&out.as_str()) {
                return bad(format!("unknown output `{out}`"));
            }
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.horizon).contains(&t))
        {
            return bad(format!("snapshot time {t} outside [0, {}]", self.horizon));
        }
        if let Some(env) = &self.envelope {
            if !self.outputs.iter().any(|o| o == env.metric.name()) {
                return bad(format!(
                    "envelope metric `{}` is not among the outputs",
                    env.metric.name()
                ));
            }
        }
        let mut labels = std::collections::BTreeSet::new();
        for v in &self.variants {
            if !safe_label(&v.label) || !labels.insert(v.label.as_str()) {
                return bad(format!(
                    "variant label `{}` is empty, duplicated or not [A-Za-z0-9_-]",
                    v.label
                ));
            }
        }
        if self.variants.is_empty() {
            return self.validate_single();
        }
        for (label, cfg) in self.resolve_runs()? {
            cfg.validate_single()
                .map_err(|e| Error::ConfigInvalid(format!("variant `{label}`: {e}")))?;
        }
        Ok(())
    }

    fn validate_single(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(tb) = &self.two_body {
            let ok = tb.definite_target > 0
                && 0.0 < tb.kappa_range[0]
                && tb.kappa_range[0] <= tb.kappa_range[1]
                && 0.0 < tb.speed_range[0]
                && tb.speed_range[0] <= tb.speed_range[1]
                && (0.0..90.0).contains(&tb.max_angle_deg);
            if !ok {
                return Err(Error::ConfigInvalid(format!(
                    "inadmissible two-body batch {tb:?}"
                )));
            }
            if self.model.model != ModelKind::SingularCs {
                return Err(Error::ConfigInvalid(
                    "two-body batches use the singular model".into(),
                ));
            }
            return Ok(());
        }
        let n = self.initial_data.n();
        if n == 0 {
            return Err(Error::ConfigInvalid("initial data has no particles".into()));
        }
        match (&self.model.model, &self.graph_spec) {
            (ModelKind::Laplacian, None) => {
                return Err(Error::ConfigInvalid(
                    "Laplacian scenarios need a graph_spec".into(),
                ));
            }
            (ModelKind::Laplacian, Some(_)) => {}
            (_, Some(_)) => {
                return Err(Error::ConfigInvalid(
                    "graph_spec applies to Laplacian scenarios only".into(),
                ));
            }
            _ => {}
        }
        if let InitialData::Named { name, .. } = &self.initial_data {
            if !super::presets::NAMED_INITIAL_DATA.contains(&name.as_str()) {
                return Err(Error::ConfigInvalid(format!(
                    "unknown named initial data `{name}`"
                )));
            }
        }
        Ok(())
    }
}

fn safe_label(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parses the value half of a `key=value` override: JSON when it parses,
/// otherwise a bare string.
pub fn parse_override_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Equality up to integer/float spelling; objects compare on the keys of `set`.
fn same_value(stored: &Value, set: &Value) -> bool {
    match (stored, set) {
        (Value::Number(a), Value::Number(b)) => a.as_f64() == b.as_f64(),
        (Value::Array(a), Value::Array(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_value(x, y))
        }
        (Value::Object(a), Value::Object(b)) => b
            .iter()
            .all(|(k, v)| a.get(k).is_some_and(|s| same_value(s, v))),
        _ => stored == set,
    }
}
