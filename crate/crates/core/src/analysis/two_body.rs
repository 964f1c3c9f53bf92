use serde::{Deserialize, Serialize};

use super::{diameter, max_velocity_difference};
use crate::dynamics::{similarity, TrajectoryRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Flocking,
    Dispersion,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyVerdict {
    pub verdict: Verdict,
    /// Left-hand side of the condition that decided the verdict (the flocking
    /// condition when indeterminate).
    pub lhs_value: f64,
    /// `d^2`.
    pub threshold: f64,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Sufficient conditions for separation or aggregation of two particles under
/// the singular model, given `|x1 - x2| < d` and a positive velocity cosine.
pub fn two_body_classify(
    x1: &[f64],
    x2: &[f64],
    v1: &[f64],
    v2: &[f64],
    kappa: f64,
    radius_d: f64,
) -> Result<TwoBodyVerdict> {
    let dx = sub(x1, x2);
    let dv = sub(v1, v2);
    let r2 = dot(&dx, &dx);
    let d2 = radius_d * radius_d;
    if !(kappa > 0.0 && radius_d > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "need kappa > 0 and d > 0, got {kappa}, {radius_d}"
        )));
    }
    if !(r2 < d2) {
        return Err(Error::PreconditionViolated(
            "particles must start within distance d".into(),
        ));
    }
    let a = similarity(v1, v2)?;
    if !(a > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "velocity cosine must be positive, got {a}"
        )));
    }
    let u0 = dot(&dx, &dv);
    let dv2 = dot(&dv, &dv);

    let (disp_lhs, flock_lhs) = if u0 >= 0.0 {
        (
            r2 + u0 / kappa + dv2 / (2.0 * kappa * kappa),
            r2 + u0 / (kappa * a) + dv2 / (2.0 * (a * kappa).powi(2)),
        )
    } else {
        (
            r2 + u0 / (kappa * a) + dv2 / (2.0 * kappa * kappa),
            r2 + u0 / kappa + dv2 / (2.0 * (a * kappa).powi(2)),
        )
    };
    let (verdict, lhs_value) = if disp_lhs > d2 {
        (Verdict::Dispersion, disp_lhs)
    } else if flock_lhs < d2 {
        (Verdict::Flocking, flock_lhs)
    } else {
        (Verdict::Indeterminate, flock_lhs)
    };
    Ok(TwoBodyVerdict {
        verdict,
        lhs_value,
        threshold: d2,
    })
}

/// Bounded diameter over all samples and small final relative velocities.
pub fn flocking_detector(traj: &TrajectoryRecord, dist_bound: f64, vel_tol: f64) -> bool {
    let Some(last) = traj.last() else {
        return false;
    };
    traj.states
        .iter()
        .all(|s| diameter(s.positions(), s.dim()) <= dist_bound)
        && max_velocity_difference(last) <= vel_tol
}
