use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::TwoBodyBatch;
use crate::analysis::{two_body_classify, TwoBodyVerdict, Verdict};
use crate::dynamics::{run, IntegrationSpec, ModelKind, ModelParams, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::rng::{substream, uniform};

/// Relative velocity below which a flocking instance counts as aligned.
pub const ALIGNED_TOL: f64 = 1e-4;
/// Largest velocity change tolerated after the pair disconnects.
pub const FROZEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyInstance {
    pub index: u64,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodySim {
    pub max_distance: f64,
    pub final_dv: f64,
    pub crossed_at: Option<f64>,
    /// Largest velocity change after `crossed_at` (0 when never crossed).
    pub drift_after_cross: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyCase {
    pub instance: TwoBodyInstance,
    pub verdict: TwoBodyVerdict,
    pub sim: TwoBodySim,
    pub agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodySummary {
    pub definite: usize,
    pub flocking: usize,
    pub dispersion: usize,
    pub agreements: usize,
}

impl TwoBodySummary {
    pub fn from_cases(cases: &[TwoBodyCase]) -> Self {
        let count = |v: Verdict| cases.iter().filter(|c| c.verdict.verdict == v).count();
        TwoBodySummary {
            definite: cases.len(),
            flocking: count(Verdict::Flocking),
            dispersion: count(Verdict::Dispersion),
            agreements: cases.iter().filter(|c| c.agrees).count(),
        }
    }
}

/// Instance `index` of the stream: `x1 = 0`, `x2` uniform in direction at
/// distance `U[0, d)`, speeds from `speed_range`, velocity directions at most
/// `max_angle_deg` apart, and `kappa` from `kappa_range`.
pub fn draw_instance(
    batch: &TwoBodyBatch,
    radius_d: f64,
    seed: u64,
    index: u64,
) -> TwoBodyInstance {
    let mut rng = substream(seed, index);
    let tau = std::f64::consts::TAU;
    let r = uniform(&mut rng, 0.0, radius_d);
    let phi = uniform(&mut rng, 0.0, tau);
    let alpha = uniform(&mut rng, 0.0, tau);
    let max = batch.max_angle_deg.to_radians();
    let beta = alpha + uniform(&mut rng, -max, max);
    let s1 = uniform(&mut rng, batch.speed_range[0], batch.speed_range[1]);
    let s2 = uniform(&mut rng, batch.speed_range[0], batch.speed_range[1]);
    let kappa = uniform(&mut rng, batch.kappa_range[0], batch.kappa_range[1]);
    TwoBodyInstance {
        index,
        x1: [0.0, 0.0],
        x2: [r * phi.cos(), r * phi.sin()],
        v1: [s1 * alpha.cos(), s1 * alpha.sin()],
        v2: [s2 * beta.cos(), s2 * beta.sin()],
        kappa,
    }
}

pub fn classify_instance(inst: &TwoBodyInstance, radius_d: f64) -> Result<TwoBodyVerdict> {
    two_body_classify(&inst.x1, &inst.x2, &inst.v1, &inst.v2, inst.kappa, radius_d)
}

/// Simulates the singular model on the pair, observing every step.
pub fn simulate_instance(
    inst: &TwoBodyInstance,
    radius_d: f64,
    horizon: f64,
    dt: f64,
) -> Result<TwoBodySim> {
    let params = ModelParams::new(ModelKind::SingularCs)
        .with_kappa(inst.kappa)
        .with_radius(radius_d);
    let ens = ParticleEnsemble::new(
        2,
        2,
        vec![inst.x1[0], inst.x1[1], inst.x2[0], inst.x2[1]],
        vec![inst.v1[0], inst.v1[1], inst.v2[0], inst.v2[1]],
    )?;
    let mut sim = TwoBodySim {
        max_distance: 0.0,
        final_dv: 0.0,
        crossed_at: None,
        drift_after_cross: 0.0,
    };
    let mut frozen: Option<Vec<f64>> = None;
    run(
        &params,
        &ens,
        None,
        None,
        &IntegrationSpec::new(horizon, dt, 1),
        |s| {
            let e = s.ensemble;
            let (p, q) = (e.position(0), e.position(1));
            let dist = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let (a, b) = (e.velocity(0), e.velocity(1));
            sim.max_distance = sim.max_distance.max(dist);
            sim.final_dv = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            match &frozen {
                None if dist >= radius_d => {
                    sim.crossed_at = Some(s.t);
                    frozen = Some(e.velocities().to_vec());
                }
                Some(v0) => {
                    let drift = v0
                        .iter()
                        .zip(e.velocities())
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max);
                    sim.drift_after_cross = sim.drift_after_cross.max(drift);
                }
                None => {}
            }
            Ok(())
        },
    )?;
    Ok(sim)
}

/// Whether a simulation outcome is consistent with a definite verdict.
pub fn agrees(verdict: Verdict, sim: &TwoBodySim, radius_d: f64) -> bool {
    match verdict {
        Verdict::Flocking => sim.max_distance < radius_d && sim.final_dv < ALIGNED_TOL,
        Verdict::Dispersion => sim.crossed_at.is_some() && sim.drift_after_cross <= FROZEN_TOL,
        Verdict::Indeterminate => false,
    }
}

/// Draws instances in index order until `definite_target` of them receive a
/// definite verdict, then simulates those.
pub fn run_two_body_batch(
    batch: &TwoBodyBatch,
    params: &ModelParams,
    horizon: f64,
    dt: f64,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<TwoBodyCase>> {
    let d = params.radius_d;
    let cap = 1000 * batch.definite_target as u64;
    let mut picked = Vec::with_capacity(batch.definite_target);
    let mut index = 0;
    while picked.len() < batch.definite_target {
        if index >= cap {
            return Err(Error::PreconditionViolated(format!(
                "only {} definite two-body verdicts in {cap} draws",
                picked.len()
            )));
        }
        let inst = draw_instance(batch, d, seed, index);
        index += 1;
        // Draws outside the lemma's hypotheses are skipped like indeterminate ones.
        if let Ok(v) = classify_instance(&inst, d) {
            if v.verdict != Verdict::Indeterminate {
                picked.push((inst, v));
            }
        }
    }
    exec::try_map(mode, picked, |(instance, verdict)| {
        let sim = simulate_instance(&instance, d, horizon, dt)?;
        Ok(TwoBodyCase {
            instance,
            verdict,
            sim,
            agrees: agrees(verdict.verdict, &sim, d),
        })
    })
}

pub fn two_body_csv(cases: &[TwoBodyCase]) -> Vec<u8> {
    let mut s = String::from(
        "index,x2_0,x2_1,v1_0,v1_1,v2_0,v2_1,kappa,verdict,lhs,threshold,max_distance,final_dv,crossed_at,agrees\n",
    );
    for c in cases {
        let i = &c.instance;
        let verdict = match c.verdict.verdict {
            Verdict::Flocking => "flocking",
            Verdict::Dispersion => "dispersion",
            Verdict::Indeterminate => "indeterminate",
        };
        let crossed = c.sim.crossed_at.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{verdict},{},{},{},{},{crossed},{}",
            i.index,
            i.x2[0],
            i.x2[1],
            i.v1[0],
            i.v1[1],
            i.v2[0],
            i.v2[1],
            i.kappa,
            c.verdict.lhs_value,
            c.verdict.threshold,
            c.sim.max_distance,
            c.sim.final_dv,
            c.agrees
        );
    }
    s.into_bytes()
}
