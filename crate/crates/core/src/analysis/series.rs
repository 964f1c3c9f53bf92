use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are excluded from log-slope fits.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(name: impl Into<String>) -> Self {
        MetricSeries {
            name: name.into(),
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_parts(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::PreconditionViolated(
                "series times must be strictly increasing".into(),
            ));
        }
        Ok(MetricSeries {
            name: name.into(),
            times,
            values,
        })
    }

    pub fn push(&mut self, t: f64, value: f64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_value(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn final_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn log_slope(&self) -> Option<f64> {
        log_slope(&self.times, &self.values)
    }

    /// True when `values[k] <= initial * exp(-rate * t_k) * (1 + rel_tol)` at
    /// every sample.
    pub fn below_envelope(&self, rate: f64, rel_tol: f64) -> bool {
        let Some(v0) = self.initial_value() else {
            return true;
        };
        self.times
            .iter()
            .zip(&self.values)
            .all(|(&t, &v)| v <= v0 * (-rate * t).exp() * (1.0 + rel_tol))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn summary(&self, envelope_rate: Option<f64>) -> MetricSummary {
        MetricSummary {
            name: self.name.clone(),
            final_value: self.final_value(),
            log_slope: self.log_slope(),
            envelope_rate,
            envelope_satisfied: envelope_rate.map(|r| self.below_envelope(r, 1e-6)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub final_value: Option<f64>,
    pub log_slope: Option<f64>,
    pub envelope_rate: Option<f64>,
    pub envelope_satisfied: Option<bool>,
}

/// Least-squares slope of `ln(value)` against time over the final half of the
/// samples whose value exceeds [`LOG_FLOOR`]. `None` with fewer than two
/// such samples.
pub fn log_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > LOG_FLOOR)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    let tail = &pts[pts.len() / 2..];
    if tail.len() < 2 {
        return None;
    }
    let k = tail.len() as f64;
    let mt = tail.iter().map(|p| p.0).sum::<f64>() / k;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = tail.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = tail.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
