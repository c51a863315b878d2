use serde::Serialize;

use crate::error::{Error, Result};

/// Named sequence families with on-demand evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// 1, 0, 1, 0, ...
    Alternating01,
    /// a^i, with 0^0 = 1.
    Geometric { a: f64 },
    /// (-1)^i i
    SignedLinear,
    /// Ones on the islets |i - 4^k| < 2^k k, zeros elsewhere.
    Islets,
    /// Zero except at n_1 = 1 < n_2 < ... with gaps ceil(c sqrt(n_j)),
    /// where the value is `height * sqrt(n_j)`.
    Spikes { c: f64, height: f64 },
}

impl GeneratorSpec {
    pub fn geometric(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "geometric ratio must be finite, got {a}"
            )));
        }
        Ok(Self::Geometric { a })
    }

    pub fn spikes(c: f64, height: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "spike spacing C must be positive, got {c}"
            )));
        }
        if !height.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "spike height must be finite, got {height}"
            )));
        }
        Ok(Self::Spikes { c, height })
    }

    /// Term `i` of the sequence.
    pub fn generate(&self, i: u64) -> f64 {
        match *self {
            Self::Alternating01 => {
                if i.is_multiple_of(2) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Geometric { a } => geometric_term(a, i),
            Self::SignedLinear => {
                let v = i as f64;
                if i.is_multiple_of(2) {
                    v
                } else {
                    -v
                }
            }
            Self::Islets => {
                if in_islet(i) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Spikes { c, height } => {
                for pos in SpikePositions::new(c) {
                    if pos == i {
                        return height * (pos as f64).sqrt();
                    }
                    if pos > i {
                        break;
                    }
                }
                0.0
            }
        }
    }

    /// Indices `<= horizon` where the term may be non-zero, for the sparse
    /// families; `None` for dense ones.
    pub fn support_upto(&self, horizon: u64) -> Option<Vec<u64>> {
        match *self {
            Self::Islets => Some(islet_indices(horizon)),
            Self::Spikes { c, .. } => Some(
                SpikePositions::new(c)
                    .take_while(|&n| n <= horizon)
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Whether every term is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        match *self {
            Self::Alternating01 | Self::Islets => true,
            Self::Geometric { a } => a >= 0.0,
            Self::SignedLinear => false,
            Self::Spikes { height, .. } => height >= 0.0,
        }
    }

    /// False for families growing exponentially in magnitude.
    pub fn grows_polynomially(&self) -> bool {
        !matches!(*self, Self::Geometric { a } if a.abs() > 1.0)
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Alternating01 => "alternating01".into(),
            Self::Geometric { a } => format!("geometric(a={a})"),
            Self::SignedLinear => "signed_linear".into(),
            Self::Islets => "islets".into(),
            Self::Spikes { c, height } => format!("spikes(C={c},height={height})"),
        }
    }
}

fn geometric_term(a: f64, i: u64) -> f64 {
    if i <= i32::MAX as u64 {
        a.powi(i as i32)
    } else {
        a.powf(i as f64)
    }
}

/// `|i - 4^k| < 2^k k` for some k. Only k up to `ceil(ceil_log2(i) / 2) + 1`
/// can qualify: past that, `4^k - 2^k k > i`.
fn in_islet(i: u64) -> bool {
    let log2 = if i <= 1 {
        0
    } else {
        64 - (i - 1).leading_zeros()
    };
    let k_max = log2.div_ceil(2) + 1;
    let i = i as i128;
    (0..=k_max).any(|k| {
        let center = 1i128 << (2 * k);
        let half = (1i128 << k) * k as i128;
        (i - center).abs() < half
    })
}

fn islet_indices(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let h = horizon as i128;
    for k in 1u32.. {
        let center = 1i128 << (2 * k);
        let half = (1i128 << k) * k as i128;
        let lo = center - half + 1;
        if lo > h {
            break;
        }
        let hi = (center + half - 1).min(h);
        out.extend((lo.max(0)..=hi).map(|i| i as u64));
    }
    out
}

/// Positions of the spikes, starting at 1.
#[derive(Debug, Clone)]
pub struct SpikePositions {
    next: u64,
    c: f64,
}

impl SpikePositions {
    pub fn new(c: f64) -> Self {
        Self { next: 1, c }
    }
}

impl Iterator for SpikePositions {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next;
        let gap = (self.c * (cur as f64).sqrt()).ceil().max(1.0) as u64;
        self.next = cur.checked_add(gap)?;
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let isl = GeneratorSpec::Islets;
        assert_eq!(isl.generate(16), 1.0);
        assert_eq!(isl.generate(100), 0.0);
        assert_eq!(GeneratorSpec::SignedLinear.generate(5), -5.0);
        assert_eq!(GeneratorSpec::Alternating01.generate(0), 1.0);
        assert_eq!(GeneratorSpec::Alternating01.generate(7), 0.0);
        assert_eq!(GeneratorSpec::geometric(0.0).unwrap().generate(0), 1.0);
        assert_eq!(GeneratorSpec::geometric(-3.0).unwrap().generate(3), -27.0);
    }

    /// Exhaustive check over every k with 4^k <= 4i + 16.
    fn islet_oracle(i: u64) -> bool {
        let mut k = 0u32;
        loop {
            let center = 4f64.powi(k as i32);
            if center > 4.0 * i as f64 + 16.0 {
                return false;
            }
            if (i as f64 - center).abs() < 2f64.powi(k as i32) * k as f64 {
                return true;
            }
            k += 1;
        }
    }

    #[test]
    fn islets_match_exhaustive_search() {
        for i in 0..70_000u64 {
            assert_eq!(in_islet(i), islet_oracle(i), "i = {i}");
        }
    }

    #[test]
    fn islet_support_agrees_with_generator() {
        let sup = islet_indices(5000);
        let dense: Vec<u64> = (0..=5000).filter(|&i| in_islet(i)).collect();
        assert_eq!(sup, dense);
    }

    #[test]
    fn islet_density() {
        for k in 1..=10u32 {
            let n = 1u64 << (2 * k);
            let count = islet_indices(n - 1).len() as u64;
            assert!(count <= 4 * (1u64 << k) * k as u64, "k={k} count={count}");
        }
    }

    #[test]
    fn spikes_follow_their_spacing() {
        let s = GeneratorSpec::spikes(2.0, 0.5).unwrap();
        let pos = s.support_upto(500).unwrap();
        assert_eq!(&pos[..4], &[1, 3, 7, 13]);
        for w in pos.windows(2) {
            assert_eq!(w[1] - w[0], (2.0 * (w[0] as f64).sqrt()).ceil() as u64);
        }
        assert_eq!(s.generate(7), 0.5 * 7f64.sqrt());
        assert_eq!(s.generate(8), 0.0);
        assert!(GeneratorSpec::spikes(0.0, 1.0).is_err());
        assert!(GeneratorSpec::spikes(-1.0, 1.0).is_err());
    }
}
