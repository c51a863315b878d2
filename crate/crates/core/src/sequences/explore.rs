//! Probe of a sparse spike sequence: binomial means for two parameters,
//! sampled where each kernel is centred on a spike or between two spikes.
//! Tabulates behaviour only; draws no conclusion.

use serde::Serialize;

use super::generators::{GeneratorSpec, SpikePositions};
use crate::binomial_kernel::check_probability;
use crate::error::{Error, Result};
use crate::transforms::{self, RealSequence};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikeProbe {
    pub j: usize,
    pub spike_index: u64,
    pub next_spike_index: u64,
    pub p_at_spike: f64,
    pub p_at_mid: f64,
    pub q_at_spike: f64,
    pub q_at_mid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenProblemReport {
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub height: f64,
    pub horizon: usize,
    pub rows: Vec<SpikeProbe>,
    /// max - min of the p-means over the upper half of the probes.
    pub amplitude_p: f64,
    pub amplitude_q: f64,
    /// Predicted peak-height ratio sqrt((1 - q) / (1 - p)) of the kernels.
    pub peak_ratio_prediction: f64,
}

fn amplitude(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// Evaluates the p- and q-binomial means of `spikes(c, height)` at
/// `floor(n_j / r)` and `floor((n_j + n_{j+1}) / (2 r))` for every spike
/// whose indices stay within `horizon`.
pub fn probe_open_problem(
    p: f64,
    q: f64,
    c: f64,
    height: f64,
    horizon: usize,
) -> Result<OpenProblemReport> {
    check_probability(p)?;
    check_probability(q)?;
    if p >= q {
        return Err(Error::Precondition(format!(
            "requires p < q, got p = {p}, q = {q}"
        )));
    }
    let spec = GeneratorSpec::spikes(c, height)?;
    let seq = RealSequence::generated(spec);

    let positions: Vec<u64> = SpikePositions::new(c)
        .take_while(|&n| (n as f64 / p).floor() <= horizon as f64)
        .collect();
    let pairs: Vec<(u64, u64)> = positions
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(a, b)| ((a + b) as f64 / (2.0 * p)).floor() <= horizon as f64)
        .collect();

    let at = |r: f64, x: f64| (x / r).floor() as usize;
    let mut p_idx = Vec::with_capacity(2 * pairs.len());
    let mut q_idx = Vec::with_capacity(2 * pairs.len());
    for &(a, b) in &pairs {
        let mid = 0.5 * (a + b) as f64;
        p_idx.extend([at(p, a as f64), at(p, mid)]);
        q_idx.extend([at(q, a as f64), at(q, mid)]);
    }
    let pv = transforms::binomial_at(&seq, p, &p_idx)?;
    let qv = transforms::binomial_at(&seq, q, &q_idx)?;

    let rows: Vec<SpikeProbe> = pairs
        .iter()
        .enumerate()
        .map(|(j, &(a, b))| SpikeProbe {
            j,
            spike_index: a,
            next_spike_index: b,
            p_at_spike: pv[2 * j],
            p_at_mid: pv[2 * j + 1],
            q_at_spike: qv[2 * j],
            q_at_mid: qv[2 * j + 1],
        })
        .collect();
    let upper = &rows[rows.len() / 2..];
    let amplitude_p = amplitude(upper.iter().flat_map(|r| [r.p_at_spike, r.p_at_mid]));
    let amplitude_q = amplitude(upper.iter().flat_map(|r| [r.q_at_spike, r.q_at_mid]));
    Ok(OpenProblemReport {
        p,
        q,
        c,
        height,
        horizon,
        rows,
        amplitude_p,
        amplitude_q,
        peak_ratio_prediction: ((1.0 - q) / (1.0 - p)).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_height_gives_zero_means() {
        let r = probe_open_problem(0.4, 0.7, 1.0, 0.0, 20_000).unwrap();
        assert!(!r.rows.is_empty());
        assert!(r
            .rows
            .iter()
            .all(|x| x.p_at_spike == 0.0 && x.q_at_mid == 0.0));
        assert_eq!(r.amplitude_p, 0.0);
    }

    #[test]
    fn probes_match_brute_force() {
        let r = probe_open_problem(0.4, 0.7, 1.0, 1.0, 5_000).unwrap();
        let seq = RealSequence::generated(GeneratorSpec::spikes(1.0, 1.0).unwrap());
        let terms = seq.prefix(5_000).unwrap();
        let row = &r.rows[r.rows.len() - 1];
        let n = (row.spike_index as f64 / 0.4).floor() as u64;
        let params = crate::binomial_kernel::PmfParams::new(n, 0.4).unwrap();
        let brute: f64 = (0..=n)
            .map(|i| crate::binomial_kernel::pmf(params, i as i64) * terms[i as usize])
            .sum();
        assert!((brute - row.p_at_spike).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(probe_open_problem(0.7, 0.4, 1.0, 1.0, 100).is_err());
        assert!(probe_open_problem(0.4, 0.7, 0.0, 1.0, 100).is_err());
    }
}
