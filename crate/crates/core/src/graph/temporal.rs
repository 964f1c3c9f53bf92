use std::fmt;
use std::sync::Arc;

use super::WeightedDigraph;
use crate::error::{Error, Result};

/// Builds the graph of switching piece `k`. Must be deterministic in `k`.
pub type GraphFactory = Arc<dyn Fn(u64) -> WeightedDigraph + Send + Sync>;

/// Piecewise-constant graph schedule `G(t)`.
///
/// The graph active at time `t` is the entry with the largest switch time
/// `<= t`. Periodic schedules are generated lazily, one piece per period.
#[derive(Clone)]
pub enum TemporalGraph {
    Schedule(Vec<(f64, WeightedDigraph)>),
    Periodic {
        period: f64,
        n_vertices: usize,
        factory: GraphFactory,
    },
}

/// Relative slack when locating the piece of a time that sits on a switch.
const SWITCH_SLACK: f64 = 1e-9;

impl TemporalGraph {
    pub fn fixed(g: WeightedDigraph) -> Self {
        TemporalGraph::Schedule(vec![(0.0, g)])
    }

    pub fn from_schedule(entries: Vec<(f64, WeightedDigraph)>) -> Result<Self> {
        let Some((t0, g0)) = entries.first() else {
            return Err(Error::InvalidSize(
                "temporal graph schedule is empty".into(),
            ));
        };
        if *t0 != 0.0 {
            return Err(Error::PreconditionViolated(
                "first switch time must be 0".into(),
            ));
        }
        let n = g0.n_vertices();
        for w in entries.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::PreconditionViolated(
                    "switch times must be strictly increasing".into(),
                ));
            }
        }
        if let Some((_, g)) = entries.iter().find(|(_, g)| g.n_vertices() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.n_vertices(),
            });
        }
        Ok(TemporalGraph::Schedule(entries))
    }

    pub fn periodic(period: f64, n_vertices: usize, factory: GraphFactory) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::PreconditionViolated(format!(
                "switching period must be positive, got {period}"
            )));
        }
        Ok(TemporalGraph::Periodic {
            period,
            n_vertices,
            factory,
        })
    }

    pub fn n_vertices(&self) -> usize {
        match self {
            TemporalGraph::Schedule(entries) => entries[0].1.n_vertices(),
            TemporalGraph::Periodic { n_vertices, .. } => *n_vertices,
        }
    }

    /// Index of the piece active at time `t` (`t < 0` maps to piece 0).
    pub fn piece_index(&self, t: f64) -> u64 {
        match self {
            TemporalGraph::Schedule(entries) => {
                let idx =
                    entries.partition_point(|(s, _)| *s <= t + SWITCH_SLACK * s.abs().max(1.0));
                idx.saturating_sub(1) as u64
            }
            TemporalGraph::Periodic { period, .. } => {
                if t <= 0.0 {
                    0
                } else {
                    (t / period + SWITCH_SLACK).floor() as u64
                }
            }
        }
    }

    /// Graph of piece `k`.
    pub fn piece(&self, k: u64) -> WeightedDigraph {
        match self {
            TemporalGraph::Schedule(entries) => {
                let idx = (k as usize).min(entries.len() - 1);
                entries[idx].1.clone()
            }
            TemporalGraph::Periodic { factory, .. } => factory(k),
        }
    }

    pub fn graph_at(&self, t: f64) -> WeightedDigraph {
        self.piece(self.piece_index(t))
    }

    /// Switch times in `[0, horizon)`.
    pub fn switch_times(&self, horizon: f64) -> Vec<f64> {
        match self {
            TemporalGraph::Schedule(entries) => entries
                .iter()
                .map(|(t, _)| *t)
                .filter(|t| *t < horizon)
                .collect(),
            TemporalGraph::Periodic { period, .. } => {
                let mut out = Vec::new();
                let mut k = 0u64;
                loop {
                    let t = k as f64 * period;
                    if t >= horizon * (1.0 - SWITCH_SLACK) {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
                out
            }
        }
    }

    /// Explicit schedule over `[0, horizon)`.
    pub fn expand(&self, horizon: f64) -> Vec<(f64, WeightedDigraph)> {
        match self {
            TemporalGraph::Schedule(entries) => entries
                .iter()
                .filter(|(t, _)| *t < horizon)
                .cloned()
                .collect(),
            TemporalGraph::Periodic { factory, .. } => self
                .switch_times(horizon)
                .into_iter()
                .enumerate()
                .map(|(k, t)| (t, factory(k as u64)))
                .collect(),
        }
    }
}

impl fmt::Debug for TemporalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalGraph::Schedule(entries) => f
                .debug_struct("Schedule")
                .field("pieces", &entries.len())
                .field("n_vertices", &self.n_vertices())
                .finish(),
            TemporalGraph::Periodic {
                period, n_vertices, ..
            } => f
                .debug_struct("Periodic")
                .field("period", period)
                .field("n_vertices", n_vertices)
                .finish(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lookup_uses_last_switch_at_or_before_t() {
        let a = WeightedDigraph::complete(3, 1.0).unwrap();
        let b = WeightedDigraph::complete(3, 2.0).unwrap();
        let tg = TemporalGraph::from_schedule(vec![(0.0, a.clone()), (1.0, b.clone())]).unwrap();
        assert_eq!(tg.graph_at(0.5), a);
        assert_eq!(tg.graph_at(1.0), b);
        assert_eq!(tg.graph_at(7.0), b);
    }

    #[test]
    fn schedule_validation() {
        let a = WeightedDigraph::complete(3, 1.0).unwrap();
        assert!(TemporalGraph::from_schedule(vec![]).is_err());
        assert!(TemporalGraph::from_schedule(vec![(0.5, a.clone())]).is_err());
        assert!(TemporalGraph::from_schedule(vec![(0.0, a.clone()), (0.0, a.clone())]).is_err());
        let small = WeightedDigraph::complete(2, 1.0).unwrap();
        assert!(TemporalGraph::from_schedule(vec![(0.0, a), (1.0, small)]).is_err());
    }

    #[test]
    fn periodic_pieces_land_on_grid_times() {
        let factory: GraphFactory =
            Arc::new(|k| WeightedDigraph::complete(2, 1.0 + k as f64).unwrap());
        let tg = TemporalGraph::periodic(0.01, 2, factory).unwrap();
        // 10 steps of 1e-3 accumulate to slightly less than 0.01 in floating point.
        let t = (0..10).fold(0.0, |acc, _| acc + 1e-3);
        assert_eq!(tg.piece_index(t), 1);
        assert_eq!(tg.piece_index(0.0199), 1);
        assert_eq!(tg.switch_times(0.03).len(), 3);
        assert_eq!(tg.expand(0.03)[2].1.weight(0, 1), 3.0);
    }
}
