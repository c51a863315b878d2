use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    DivergesToInfinity,
    NotConverged,
}

/// Outcome of the finite-window limit heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub status: Status,
    /// Mean of the last window; present iff converged.
    pub value: Option<f64>,
    pub window: usize,
    pub tol: f64,
}

impl ConvergenceVerdict {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Judges the tail of `values`: converged when the last `window` values
/// span at most `tol`, divergent to infinity when they all exceed
/// `growth_threshold`, undecided otherwise.
pub fn estimate_limit(
    values: &[f64],
    window: usize,
    tol: f64,
    growth_threshold: f64,
) -> Result<ConvergenceVerdict> {
    if window < 2 {
        return Err(Error::Precondition(format!(
            "window must be at least 2, got {window}"
        )));
    }
    if window > values.len() {
        return Err(Error::Range {
            index: window,
            available: values.len(),
        });
    }
    let tail = &values[values.len() - window..];
    let (min, max) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mut verdict = ConvergenceVerdict {
        status: Status::NotConverged,
        value: None,
        window,
        tol,
    };
    if tail.iter().any(|v| v.is_nan()) {
        return Ok(verdict);
    }
    if max - min <= tol {
        verdict.status = Status::Converged;
        verdict.value = Some(crate::summation::sum(tail.iter().copied()) / window as f64);
    } else if min > growth_threshold {
        verdict.status = Status::DivergesToInfinity;
    }
    Ok(verdict)
}

/// Heuristic thresholds, reported alongside every verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictConfig {
    /// Window length; `None` means `ceil(horizon / 10)` (at least 2).
    pub window: Option<usize>,
    /// The tolerance is `rel_tol * (1 + |mean of window|)`.
    pub rel_tol: f64,
    pub growth_threshold: f64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            window: None,
            rel_tol: 1e-4,
            growth_threshold: 1e6,
        }
    }
}

impl VerdictConfig {
    pub fn window_for(&self, len: usize) -> usize {
        let horizon = len.saturating_sub(1);
        self.window.unwrap_or_else(|| horizon.div_ceil(10)).max(2)
    }

    pub fn judge(&self, values: &[f64]) -> Result<ConvergenceVerdict> {
        let window = self.window_for(values.len());
        if window > values.len() {
            return Err(Error::Range {
                index: window,
                available: values.len(),
            });
        }
        let tail = &values[values.len() - window..];
        let mean = crate::summation::sum(tail.iter().copied()) / window as f64;
        let tol = self.rel_tol * (1.0 + mean.abs());
        estimate_limit(values, window, tol, self.growth_threshold)
    }
}
