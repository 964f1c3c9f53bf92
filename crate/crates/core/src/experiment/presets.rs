//! Registry of the built-in scenarios.

use std::path::PathBuf;

use serde_json::json;

use super::config::{
    EnvelopeMetric, EnvelopeSpec, GraphSpec, InitialData, ScenarioConfig, TwoBodyBatch, Variant,
};
use crate::analysis::{EnvelopeKind, EnvelopeParams};
use crate::dynamics::{ModelKind, ModelParams, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::generators::assumption_b_margin;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
}

const REGISTRY: &[PresetInfo] = &[
    PresetInfo {
        name: "fig3a_leaders",
        description: "Laplacian dynamics, N=60, x ~ U[0,100]: fixed/switching one- and two-leader graphs and the mixed schedule, with the w_m envelope",
        anchor: "diameter decay on undirected neighbor-connected graphs",
    },
    PresetInfo {
        name: "fig3b_threegroup",
        description: "Laplacian dynamics, N=60: fixed three-group directed graph and its randomly repartitioned version",
        anchor: "diameter decay on directed graphs",
    },
    PresetInfo {
        name: "fig3c_assumptionB",
        description: "Laplacian dynamics, N=60, perturbed weights on (N_m, N_M) in {(30,30),(30,45),(30,58),(38,38)} with the tabulated (delta, n)",
        anchor: "fluctuation decay under assumption (B)",
    },
    PresetInfo {
        name: "tab_adaptive_cs",
        description: "Adaptive CS, N=60, x=0, v ~ U([-0.01,0.01]^2), kappa symmetric ~ U[-0.5,0.5], d=1, T=300, ten seeds",
        anchor: "cluster sizes and polar angles, adaptive model",
    },
    PresetInfo {
        name: "tab_classical_cs",
        description: "Classical CS on cases 1, 6, 10 of the adaptive table with d in {0.009, 0.01, 0.012}, T=300",
        anchor: "cluster sizes and polar angles, classical model",
    },
    PresetInfo {
        name: "fig_snapshots",
        description: "Case 6 velocity-angle snapshots with coupling and distance matrices, adaptive (d=1) and classical (d=0.009)",
        anchor: "time snapshots of case 6",
    },
    PresetInfo {
        name: "sec53_radius_sweep",
        description: "Singular model, N=50 on an inward-moving semicircle, d = 0.50..0.65: cluster count at t=100, velocity deviation at t=30",
        anchor: "radius sweep of the singular model",
    },
    PresetInfo {
        name: "sec53_asymptotic_graphs",
        description: "psi*a matrices at t=100 for d in {0.56, 0.58, 0.60, 0.65} on the semicircle configuration",
        anchor: "asymptotic graph structures",
    },
    PresetInfo {
        name: "twobody_validation",
        description: "Two-body instances classified analytically and checked by simulation to T=200",
        anchor: "two-particle toy model",
    },
];

/// Names accepted by [`InitialData::Named`].
pub const NAMED_INITIAL_DATA: &[&str] = &["inward_semicircle"];

/// Table of (N_m, N_M, n) rows used by `fig3c_assumptionB`.
pub const ASSUMPTION_B_ROWS: [(usize, usize, f64); 4] = [
    (30, 30, 326.0),
    (30, 45, 365.0),
    (30, 58, 396.0),
    (38, 38, 101.0),
];

/// Sweep radii of `sec53_radius_sweep`, 0.50 to 0.65 in steps of 0.01.
pub fn sec53_radii() -> Vec<f64> {
    (50..=65).map(|k| k as f64 / 100.0).collect()
}

pub fn list_presets() -> Vec<PresetInfo> {
    REGISTRY.to_vec()
}

pub fn named_initial_data(name: &str, n: usize) -> Result<ParticleEnsemble> {
    match name {
        // theta_i = (i-1) pi / (N-1), x = (cos, sin), v = -x/3.
        "inward_semicircle" => {
            if n < 2 {
                return Err(Error::InvalidSize(format!(
                    "semicircle needs N >= 2, got {n}"
                )));
            }
            let mut x = Vec::with_capacity(2 * n);
            let mut v = Vec::with_capacity(2 * n);
            for i in 0..n {
                let th = i as f64 * std::f64::consts::PI / (n - 1) as f64;
                x.extend([th.cos(), th.sin()]);
                v.extend([-th.cos() / 3.0, -th.sin() / 3.0]);
            }
            ParticleEnsemble::new(n, 2, x, v)
        }
        other => Err(Error::ConfigInvalid(format!(
            "unknown named initial data `{other}`"
        ))),
    }
}

fn base(
    name: &str,
    model: ModelParams,
    init: InitialData,
    horizon: f64,
    sample_every: usize,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        model,
        graph_spec: None,
        initial_data: init,
        horizon,
        dt: 1e-3,
        sample_every,
        seed: 0,
        outputs: Vec::new(),
        out_dir: PathBuf::from("runs").join(name),
        snapshot_times: Vec::new(),
        envelope: None,
        variants: Vec::new(),
        two_body: None,
    }
}

fn outputs(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn laplacian_init() -> InitialData {
    InitialData::Seeded {
        n: 60,
        dim: 1,
        position: Some([0.0, 100.0]),
        velocity: None,
        kappa: None,
    }
}

fn table_init() -> InitialData {
    InitialData::Seeded {
        n: 60,
        dim: 2,
        position: None,
        velocity: Some([-0.01, 0.01]),
        kappa: Some([-0.5, 0.5]),
    }
}

/// Adaptive-model rate `epsilon` used by the table presets.
pub const TABLE_EPSILON: f64 = 1.0;

fn adaptive_model() -> ModelParams {
    ModelParams::new(ModelKind::AdaptiveCs)
        .with_epsilon(TABLE_EPSILON)
        .with_radius(1.0)
}

fn unit_envelope(kind: EnvelopeKind, metric: EnvelopeMetric) -> EnvelopeSpec {
    let params = EnvelopeParams {
        alpha_m: 0.0,
        w_m: 1.0,
        gamma_m: 1.0,
        delta: 0.0,
        ratio: 0.0,
        n_agents: 60,
    };
    EnvelopeSpec {
        kind,
        params,
        metric,
    }
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let laplacian = ModelParams::new(ModelKind::Laplacian);
    let cfg = match name {
        "fig3a_leaders" => {
            let mut c = base(name, laplacian, laplacian_init(), 20.0, 10);
            c.graph_spec = Some(
                GraphSpec::new("leader_temporal")
                    .with("mode", "fixed_one")
                    .with("weight", 1.0),
            );
            c.outputs = outputs(&["diameter", "fluctuation_norm", "mean_drift", "envelope"]);
            c.envelope = Some(unit_envelope(
                EnvelopeKind::NeighborConn,
                EnvelopeMetric::Diameter,
            ));
            c.variants = [
                "fixed_one",
                "fixed_two",
                "switching_one",
                "switching_two",
                "mixed_one_two",
            ]
            .iter()
            .map(|m| Variant::new(*m).set("graph_spec.params.mode", *m))
            .collect();
            c
        }
        "fig3b_threegroup" => {
            let mut c = base(name, laplacian, laplacian_init(), 20.0, 10);
            c.graph_spec = Some(
                GraphSpec::new("three_group")
                    .with("sizes", json!([20, 20, 20]))
                    .with("weight", 1.0),
            );
            c.outputs = outputs(&["diameter", "fluctuation_norm", "envelope"]);
            c.envelope = Some(unit_envelope(
                EnvelopeKind::NeighborConn,
                EnvelopeMetric::Diameter,
            ));
            c.variants = vec![
                Variant::new("fixed"),
                Variant::new("temporal").set(
                    "graph_spec",
                    json!({"generator": "three_group_temporal", "params": {"weight": 1.0}}),
                ),
            ];
            c
        }
        "fig3c_assumptionB" => {
            let mut c = base(name, laplacian, laplacian_init(), 100.0, 100);
            c.graph_spec = Some(GraphSpec::new("assumption_b").with("gamma_m", 1.0));
            c.outputs = outputs(&["diameter", "fluctuation_norm", "mean_drift", "envelope"]);
            c.envelope = Some(unit_envelope(
                EnvelopeKind::AssumptionB,
                EnvelopeMetric::FluctuationNorm,
            ));
            c.variants = ASSUMPTION_B_ROWS
                .iter()
                .map(|&(nm, nmx, ratio)| {
                    let (delta, _) = assumption_b_margin(60, nm, nmx, ratio);
                    Variant::new(format!("nm{nm}_nM{nmx}"))
                        .set("graph_spec.params.n_min", nm)
                        .set("graph_spec.params.n_max", nmx)
                        .set("graph_spec.params.ratio", ratio)
                        .set("envelope.params.delta", delta)
                        .set("envelope.params.ratio", ratio)
                })
                .collect();
            c
        }
        "tab_adaptive_cs" => {
            let mut c = base(name, adaptive_model(), table_init(), 300.0, 1000);
            c.outputs = outputs(&[
                "velocity_deviation",
                "cluster_count",
                "kappa_min",
                "kappa_max",
                "clusters",
            ]);
            c.variants = (1..=10)
                .map(|k| Variant::new(format!("case{k}")).seed_offset(k - 1))
                .collect();
            c
        }
        "tab_classical_cs" => {
            let model = ModelParams::new(ModelKind::ClassicalCs).with_radius(0.01);
            let mut c = base(name, model, table_init(), 300.0, 1000);
            c.outputs = outputs(&["velocity_deviation", "cluster_count", "clusters"]);
            c.variants = [1u64, 6, 10]
                .iter()
                .flat_map(|&k| {
                    [(0.009, "0009"), (0.01, "0010"), (0.012, "0012")].map(|(d, tag)| {
                        Variant::new(format!("case{k}_d{tag}"))
                            .seed_offset(k - 1)
                            .set("model.radius_d", d)
                    })
                })
                .collect();
            c
        }
        "fig_snapshots" => {
            let mut c = base(name, adaptive_model(), table_init(), 300.0, 1000);
            c.outputs = outputs(&[
                "cluster_count",
                "angles",
                "kappa_matrix",
                "distance_matrix",
                "clusters",
            ]);
            c.snapshot_times = vec![0.0, 5.0, 10.0, 30.0, 50.0, 80.0, 300.0];
            let classical = ModelParams::new(ModelKind::ClassicalCs).with_radius(0.009);
            c.variants = vec![
                Variant::new("adaptive_case6").seed_offset(5),
                Variant::new("classical_case6_d0009")
                    .seed_offset(5)
                    .set(
                        "model",
                        serde_json::to_value(classical).expect("serializes"),
                    )
                    .set(
                        "snapshot_times",
                        json!([0.0, 2.0, 5.0, 10.0, 20.0, 80.0, 300.0]),
                    ),
            ];
            c
        }
        "sec53_radius_sweep" | "sec53_asymptotic_graphs" => {
            let model = ModelParams::new(ModelKind::SingularCs);
            let init = InitialData::Named {
                name: "inward_semicircle".into(),
                n: 50,
            };
            let mut c = base(name, model, init, 100.0, 100);
            let radii = if name == "sec53_radius_sweep" {
                c.outputs = outputs(&["cluster_count", "velocity_deviation", "clusters"]);
                c.snapshot_times = vec![30.0, 100.0];
                sec53_radii()
            } else {
                c.outputs = outputs(&["cluster_count", "psi_a_matrix", "clusters"]);
                c.snapshot_times = vec![100.0];
                vec![0.56, 0.58, 0.60, 0.65]
            };
            c.variants = radii
                .into_iter()
                .map(|d| {
                    Variant::new(format!("d{:03}", (d * 100.0).round() as u32))
                        .set("model.radius_d", d)
                })
                .collect();
            c
        }
        "twobody_validation" => {
            let init = InitialData::Seeded {
                n: 2,
                dim: 2,
                position: None,
                velocity: None,
                kappa: None,
            };
            let mut c = base(
                name,
                ModelParams::new(ModelKind::SingularCs),
                init,
                200.0,
                1,
            );
            c.two_body = Some(TwoBodyBatch {
                definite_target: 120,
                kappa_range: [0.5, 2.0],
                speed_range: [0.1, 1.0],
                max_angle_deg: 80.0,
            });
            c
        }
        other => return Err(Error::ConfigInvalid(format!("unknown preset `{other}`"))),
    };
    Ok(cfg)
}
