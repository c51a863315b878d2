//! Cesàro means, p-binomial means, their composition, and the weight
//! representation of the Cesàro mean of binomial means.

use rayon::prelude::*;
use serde::Serialize;

use crate::binomial_kernel::{self, check_probability, PmfParams};
use crate::error::{Error, Result};
use crate::sequences::GeneratorSpec;
use crate::summation::{self, CompensatedSum};

/// Mass bound for the neglected tails in point evaluations.
const NEGLIGIBLE_MASS: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Explicit(Vec<f64>),
    Generator(GeneratorSpec),
}

/// A real sequence indexed from 0, either materialised or generated.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSequence {
    source: Source,
    nonneg: bool,
}

impl RealSequence {
    pub fn explicit(values: Vec<f64>) -> Self {
        Self {
            source: Source::Explicit(values),
            nonneg: false,
        }
    }

    pub fn generated(spec: GeneratorSpec) -> Self {
        Self {
            source: Source::Generator(spec),
            nonneg: false,
        }
    }

    /// Claims every term is `>= 0`; the claim is checked as terms are read.
    pub fn declare_nonnegative(mut self) -> Self {
        self.nonneg = true;
        self
    }

    pub fn is_declared_nonnegative(&self) -> bool {
        self.nonneg
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Number of available terms, `None` if unbounded.
    pub fn len(&self) -> Option<usize> {
        match &self.source {
            Source::Explicit(v) => Some(v.len()),
            Source::Generator(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    fn check_horizon(&self, horizon: usize) -> Result<()> {
        match self.len() {
            Some(len) if horizon >= len => Err(Error::Range {
                index: horizon,
                available: len,
            }),
            _ => Ok(()),
        }
    }

    fn checked(&self, i: usize, v: f64) -> Result<f64> {
        if self.nonneg && v < 0.0 {
            Err(Error::NegativeTerm { index: i, value: v })
        } else {
            Ok(v)
        }
    }

    pub fn term(&self, i: usize) -> Result<f64> {
        let v = match &self.source {
            Source::Explicit(v) => *v.get(i).ok_or(Error::Range {
                index: i,
                available: v.len(),
            })?,
            Source::Generator(g) => g.generate(i as u64),
        };
        self.checked(i, v)
    }

    /// Terms `0..=horizon`.
    pub fn prefix(&self, horizon: usize) -> Result<Vec<f64>> {
        self.check_horizon(horizon)?;
        let vals: Vec<f64> = match &self.source {
            Source::Explicit(v) => v[..=horizon].to_vec(),
            Source::Generator(g) => match g.support_upto(horizon as u64) {
                Some(support) => {
                    let mut out = vec![0.0; horizon + 1];
                    for i in support {
                        out[i as usize] = g.generate(i);
                    }
                    out
                }
                None => (0..=horizon as u64).map(|i| g.generate(i)).collect(),
            },
        };
        for (i, &v) in vals.iter().enumerate() {
            self.checked(i, v)?;
        }
        Ok(vals)
    }

    /// Declared support `(index, value)` up to `horizon`, if the source has one.
    pub fn sparse_terms(&self, horizon: usize) -> Result<Option<Vec<(usize, f64)>>> {
        let Source::Generator(g) = &self.source else {
            return Ok(None);
        };
        let Some(support) = g.support_upto(horizon as u64) else {
            return Ok(None);
        };
        support
            .into_iter()
            .map(|i| {
                let i = i as usize;
                Ok((i, self.checked(i, g.generate(i as u64))?))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Whether tails of a binomial window may be dropped: the terms must not
    /// grow exponentially.
    fn tails_negligible(&self) -> bool {
        match &self.source {
            Source::Explicit(_) => true,
            Source::Generator(g) => g.grows_polynomially(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    Cesaro,
    Binomial { p: f64 },
    Pstar { p: f64 },
}

/// Entries `0..=horizon` of a transformed sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformedPrefix {
    pub kind: TransformKind,
    pub values: Vec<f64>,
}

impl TransformedPrefix {
    pub fn horizon(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

/// Running arithmetic means of `values`.
pub fn running_means(values: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    values
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            acc += v;
            acc.value() / (n + 1) as f64
        })
        .collect()
}

/// `a*_n = (a_0 + ... + a_n) / (n + 1)` for `n <= horizon`.
pub fn cesaro_prefix(a: &RealSequence, horizon: usize) -> Result<TransformedPrefix> {
    let vals = a.prefix(horizon)?;
    Ok(TransformedPrefix {
        kind: TransformKind::Cesaro,
        values: running_means(&vals),
    })
}

/// Binomial means of `values` (all of them), one pmf row per index.
fn binomial_means_dense(values: &[f64], p: f64) -> (Vec<f64>, Vec<f64>) {
    (0..values.len())
        .into_par_iter()
        .map(|n| {
            let row = binomial_kernel::pmf_row(PmfParams::new(n as u64, p).expect("checked p"));
            let mut acc = CompensatedSum::new();
            let mut mag = CompensatedSum::new();
            for (w, &v) in row.mass.iter().zip(&values[..=n]) {
                acc += w * v;
                mag += w * v.abs();
            }
            (acc.value(), mag.value())
        })
        .unzip()
}

fn binomial_means_sparse(terms: &[(usize, f64)], p: f64, horizon: usize) -> (Vec<f64>, Vec<f64>) {
    (0..=horizon)
        .into_par_iter()
        .map(|n| {
            let params = PmfParams::new(n as u64, p).expect("checked p");
            let upto = terms.partition_point(|&(i, _)| i <= n);
            let mut acc = CompensatedSum::new();
            let mut mag = CompensatedSum::new();
            for &(i, v) in &terms[..upto] {
                let w = binomial_kernel::pmf(params, i as i64);
                acc += w * v;
                mag += w * v.abs();
            }
            (acc.value(), mag.value())
        })
        .unzip()
}

/// Binomial means together with `sum_i B_n^i(p) |a_i|`, the magnitude that
/// bounds the rounding error of each entry.
pub fn binomial_prefix_with_magnitude(
    a: &RealSequence,
    p: f64,
    horizon: usize,
) -> Result<(TransformedPrefix, Vec<f64>)> {
    check_probability(p)?;
    a.check_horizon(horizon)?;
    let (values, magnitude) = match a.sparse_terms(horizon)? {
        Some(terms) => binomial_means_sparse(&terms, p, horizon),
        None => binomial_means_dense(&a.prefix(horizon)?, p),
    };
    Ok((
        TransformedPrefix {
            kind: TransformKind::Binomial { p },
            values,
        },
        magnitude,
    ))
}

/// `a^p_n = sum_i B_n^i(p) a_i` for `n <= horizon`.
pub fn binomial_prefix(a: &RealSequence, p: f64, horizon: usize) -> Result<TransformedPrefix> {
    binomial_prefix_with_magnitude(a, p, horizon).map(|(t, _)| t)
}

/// Binomial means at selected indices.
///
/// Each index only visits the terms within the Chernoff radius that leaves
/// at most 1e-18 of the mass outside (when the sequence does not grow
/// exponentially), and only the declared support when there is one.
pub fn binomial_at(a: &RealSequence, p: f64, indices: &[usize]) -> Result<Vec<f64>> {
    check_probability(p)?;
    let Some(&max_index) = indices.iter().max() else {
        return Ok(Vec::new());
    };
    a.check_horizon(max_index)?;
    let truncate = a.tails_negligible();
    let window = |n: usize| {
        let params = PmfParams::new(n as u64, p).expect("checked p");
        let (lo, hi) = match binomial_kernel::negligible_radius(params, NEGLIGIBLE_MASS) {
            Some(r) if truncate => {
                let c = params.mean();
                (
                    ((c - r).ceil().max(0.0)) as usize,
                    ((c + r).floor() as usize).min(n),
                )
            }
            _ => (0, n),
        };
        (params, lo, hi)
    };
    match a.sparse_terms(max_index)? {
        Some(terms) => Ok(indices
            .par_iter()
            .map(|&n| {
                let (params, lo, hi) = window(n);
                let from = terms.partition_point(|&(i, _)| i < lo);
                let to = terms.partition_point(|&(i, _)| i <= hi);
                summation::sum(
                    terms[from..to]
                        .iter()
                        .map(|&(i, v)| binomial_kernel::pmf(params, i as i64) * v),
                )
            })
            .collect()),
        None => indices
            .par_iter()
            .map(|&n| {
                let (params, lo, hi) = window(n);
                let w = binomial_kernel::pmf_window(params, lo as u64, hi as u64);
                let vals = (lo..=hi).map(|i| a.term(i)).collect::<Result<Vec<_>>>()?;
                Ok(summation::dot(&w, &vals))
            })
            .collect(),
    }
}

/// Cesàro means of the binomial means.
pub fn pstar_prefix(a: &RealSequence, p: f64, horizon: usize) -> Result<TransformedPrefix> {
    let bin = binomial_prefix(a, p, horizon)?;
    Ok(TransformedPrefix {
        kind: TransformKind::Pstar { p },
        values: running_means(&bin.values),
    })
}

/// Largest `|(a^p)^q_n - a^{pq}_n|` over `n <= horizon`.
pub fn compose_check(a: &RealSequence, p: f64, q: f64, horizon: usize) -> Result<f64> {
    check_probability(q)?;
    let inner = binomial_prefix(a, p, horizon)?;
    let outer = binomial_prefix(&RealSequence::explicit(inner.values), q, horizon)?;
    let direct = binomial_prefix(a, p * q, horizon)?;
    Ok(outer
        .values
        .iter()
        .zip(&direct.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Weights `w_n^i(p)`, `i = 0..=n`, of the representation
/// `a^{p*}_n = (1 / (n+1)) sum_i w_n^i(p) a_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTable {
    pub n: usize,
    pub p: f64,
    pub weights: Vec<f64>,
}

/// Weight table via the closed form
/// `w_n^i(p) = (1/p) (1 - sum_{j<=i} B_{n+1}^j(p))`, with the complement
/// accumulated as an upper tail from `j = n+1` downwards.
pub fn weights(n: usize, p: f64) -> Result<WeightTable> {
    let row = binomial_kernel::pmf_row(PmfParams::new(n as u64 + 1, p)?);
    let mut weights = vec![0.0; n + 1];
    let mut tail = CompensatedSum::new();
    for i in (0..=n).rev() {
        tail += row.mass[i + 1];
        weights[i] = tail.value().min(1.0) / p;
    }
    // Compensation can break monotonicity by an ulp; restore it.
    for i in (0..n).rev() {
        if weights[i] < weights[i + 1] {
            weights[i] = weights[i + 1];
        }
    }
    Ok(WeightTable { n, p, weights })
}

/// `sqrt(n) ln n` for `n >= 2`, else 1.
pub fn epsilon(n: usize) -> f64 {
    if n >= 2 {
        let x = n as f64;
        x.sqrt() * x.ln()
    } else {
        1.0
    }
}

/// The weighted sum `sum_i w_n^i(p) a_i` split at `floor(pn - eps(n))` and
/// `floor(pn + eps(n))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitSums {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub n: usize,
    pub p: f64,
    /// `floor(pn - eps(n))`, unclamped.
    pub lower_cut: i64,
    /// `floor(pn + eps(n))`, unclamped.
    pub upper_cut: i64,
}

impl SplitSums {
    /// `(x + y + z) / (n + 1)`, which equals `a^{p*}_n`.
    pub fn mean(&self) -> f64 {
        summation::sum([self.x, self.y, self.z]) / (self.n + 1) as f64
    }
}

/// Splits the weighted sum for `a^{p*}_n` into the three index ranges
/// `[0, lo]`, `[lo + 1, hi - 1]`, `[hi, n]`, clamped to `[0, n]`.
pub fn split_xyz(a: &RealSequence, p: f64, n: usize) -> Result<SplitSums> {
    let table = weights(n, p)?;
    let vals = a.prefix(n)?;
    let eps = epsilon(n);
    let pn = p * n as f64;
    let lower_cut = (pn - eps).floor() as i64;
    let upper_cut = (pn + eps).floor() as i64;
    let range_sum = |from: i64, to: i64| {
        let from = from.max(0);
        let to = to.min(n as i64);
        if from > to {
            return 0.0;
        }
        let (from, to) = (from as usize, to as usize);
        summation::dot(&table.weights[from..=to], &vals[from..=to])
    };
    Ok(SplitSums {
        x: range_sum(0, lower_cut),
        y: range_sum(lower_cut + 1, upper_cut - 1),
        z: range_sum(upper_cut, n as i64),
        n,
        p,
        lower_cut,
        upper_cut,
    })
}
