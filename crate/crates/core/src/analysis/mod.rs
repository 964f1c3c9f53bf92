//! Metrics on ensembles and trajectories, decay envelopes, the pairwise
//! distance comparison matrix, clustering and the two-body classifier.

mod bounds;
mod clusters;
mod series;
mod two_body;

pub use bounds::{
    assumption_b_dissipation, decay_envelope, e_matrix, pair_index, row_dominance_margin,
    squared_distance_derivative, EnvelopeKind, EnvelopeParams,
};
pub use clusters::{cluster_count, major_clusters, Clusters};
pub use series::{log_slope, MetricSeries, MetricSummary, LOG_FLOOR};
pub use two_body::{flocking_detector, two_body_classify, TwoBodyVerdict, Verdict};

use crate::dynamics::{similarity, ParticleEnsemble};
use crate::error::Result;

fn rows(flat: &[f64], dim: usize) -> impl Iterator<Item = &[f64]> {
    flat.chunks_exact(dim.max(1))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

/// Largest pairwise Euclidean distance among `N x dim` points.
pub fn diameter(points: &[f64], dim: usize) -> f64 {
    let pts: Vec<&[f64]> = rows(points, dim).collect();
    let mut best = 0.0_f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.max(dist(pts[i], pts[j]));
        }
    }
    best
}

/// Componentwise mean of `N x dim` points.
pub fn centroid(points: &[f64], dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    let mut n = 0usize;
    for p in rows(points, dim) {
        for (ck, pk) in c.iter_mut().zip(p) {
            *ck += pk;
        }
        n += 1;
    }
    if n > 0 {
        c.iter_mut().for_each(|x| *x /= n as f64);
    }
    c
}

/// Frobenius norm of the mean-centred state.
pub fn fluctuation_norm(points: &[f64], dim: usize) -> f64 {
    let c = centroid(points, dim);
    rows(points, dim)
        .flat_map(|p| p.iter().zip(&c).map(|(x, m)| (x - m) * (x - m)))
        .sum::<f64>()
        .sqrt()
}

/// `(1/N) sum_i |v_i - v_c|` with `v_c` the mean velocity.
pub fn velocity_deviation(ens: &ParticleEnsemble) -> f64 {
    let c = centroid(ens.velocities(), ens.dim());
    let total: f64 = rows(ens.velocities(), ens.dim()).map(|v| dist(v, &c)).sum();
    total / ens.n() as f64
}

/// Largest pairwise velocity difference.
pub fn max_velocity_difference(ens: &ParticleEnsemble) -> f64 {
    diameter(ens.velocities(), ens.dim())
}

/// Smallest pairwise cosine similarity of velocities.
pub fn min_similarity(ens: &ParticleEnsemble) -> Result<f64> {
    let mut best = 1.0_f64;
    for i in 0..ens.n() {
        for j in (i + 1)..ens.n() {
            best = best.min(similarity(ens.velocity(i), ens.velocity(j))?);
        }
    }
    Ok(best)
}

/// Polar angle of a 2-vector in degrees, in `[0, 360)`.
pub fn polar_angle_deg(v: &[f64]) -> f64 {
    let a = v[1].atan2(v[0]).to_degrees();
    let a = if a < 0.0 { a + 360.0 } else { a };
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Angular distance between two polar angles in degrees, in `[0, 180]`.
pub fn angle_separation_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}
