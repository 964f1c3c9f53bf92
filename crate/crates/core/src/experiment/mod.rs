//! Declarative scenarios: configs, the preset registry, the runner that
//! writes CSV/JSON outputs with a digest manifest, and cluster reports.
//!
//! Output layout of a run directory:
//!
//! * `<label>.<metric>.csv` with columns `t,value`, one per requested series;
//! * `<label>.clusters.csv` (`size,angle_deg`) and `<label>.labels.csv` (`i,label`);
//! * `<label>.angles.csv` with one row of velocity polar angles per snapshot time;
//! * `<label>.<matrix>.t<time>.csv`, a headerless `N x N` matrix per snapshot;
//! * `summary.json` ([`ScenarioSummary`]) and `manifest.json` ([`RunManifest`]).

mod config;
mod presets;
mod runner;
mod twobody;

pub use config::{
    parse_override_value, EnvelopeMetric, EnvelopeSpec, GraphSpec, InitialData, ScenarioConfig,
    TwoBodyBatch, Variant, OTHER_OUTPUTS, SERIES_METRICS,
};
pub use presets::{
    list_presets, named_initial_data, preset, sec53_radii, PresetInfo, ASSUMPTION_B_ROWS,
    NAMED_INITIAL_DATA, TABLE_EPSILON,
};
pub use runner::{
    build_graph, build_initial, run_scenario, run_scenario_with, sha256_hex, simulate,
    verify_manifest, EnvelopeReport, FileDigest, RunManifest, RunOutcome, RunSummary,
    ScenarioSummary, TimedValues, TOOLKIT_VERSION,
};
pub use twobody::{
    agrees, classify_instance, draw_instance, run_two_body_batch, simulate_instance, TwoBodyCase,
    TwoBodyInstance, TwoBodySim, TwoBodySummary, ALIGNED_TOL, FROZEN_TOL,
};

use serde::{Deserialize, Serialize};

use crate::analysis::{cluster_count, polar_angle_deg};
use crate::dynamics::{ParticleEnsemble, TrajectoryRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterStat {
    pub size: usize,
    /// Polar angle of the cluster's mean velocity, in `[0, 360)`.
    pub angle_deg: f64,
}

/// Proximity clusters of one state, largest first.
pub fn cluster_report_state(ens: &ParticleEnsemble, radius_d: f64) -> Result<Vec<ClusterStat>> {
    if ens.dim() != 2 {
        return Err(Error::Requires2D(ens.dim()));
    }
    let c = cluster_count(ens.positions(), 2, radius_d)?;
    let mut sums = vec![[0.0_f64; 2]; c.count];
    for (i, &l) in c.labels.iter().enumerate() {
        sums[l][0] += ens.velocity(i)[0];
        sums[l][1] += ens.velocity(i)[1];
    }
    let sizes = c.sizes();
    let mut order: Vec<usize> = (0..c.count).collect();
    order.sort_by_key(|&l| (std::cmp::Reverse(sizes[l]), l));
    Ok(order
        .into_iter()
        .map(|l| ClusterStat {
            size: sizes[l],
            angle_deg: polar_angle_deg(&sums[l]),
        })
        .collect())
}

/// [`cluster_report_state`] at the sample nearest `at_time`.
pub fn cluster_report(
    traj: &TrajectoryRecord,
    at_time: f64,
    radius_d: f64,
) -> Result<Vec<ClusterStat>> {
    let k = traj
        .index_near(at_time)
        .ok_or_else(|| Error::PreconditionViolated("empty trajectory".into()))?;
    cluster_report_state(&traj.states[k], radius_d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ens(x: Vec<f64>, v: Vec<f64>) -> ParticleEnsemble {
        ParticleEnsemble::new(x.len() / 2, 2, x, v).unwrap()
    }

    #[test]
    fn single_flock_along_x() {
        let e = ens(
            vec![0.0, 0.0, 0.1, 0.0, 0.0, 0.1],
            vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
        );
        assert_eq!(
            cluster_report_state(&e, 1.0).unwrap(),
            vec![ClusterStat {
                size: 3,
                angle_deg: 0.0
            }]
        );
    }

    #[test]
    fn opposite_groups() {
        let e = ens(
            vec![0.0, 0.0, 0.1, 0.0, 10.0, 0.0, 10.1, 0.0, 10.2, 0.0],
            vec![0.0, -1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        );
        let r = cluster_report_state(&e, 1.0).unwrap();
        assert_eq!(r.iter().map(|c| c.size).collect::<Vec<_>>(), vec![3, 2]);
        assert_eq!(r[0].angle_deg, 90.0);
        assert_eq!(r[1].angle_deg, 270.0);
    }

    #[test]
    fn three_dimensional_rejected() {
        let e = ParticleEnsemble::new(1, 3, vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            cluster_report_state(&e, 1.0),
            Err(Error::Requires2D(3))
        ));
    }
}
