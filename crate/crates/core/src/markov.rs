//! Cesàro limit of the powers of a finite stochastic matrix.
//!
//! The lazy chain `(P + I) / 2` has no eigenvalue on the unit circle other
//! than 1 and its powers are the 1/2-binomial means of the powers of `P`,
//! so they converge to the same limit `A` as the Cesàro averages. The limit
//! is reached by repeated squaring of the lazy chain.

use std::io::Read;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_ROW_TOL: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SQUARINGS: usize = 64;

/// Square matrix with non-negative entries and unit row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
    row_tol: f64,
}

impl StochasticMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn row_tol(&self) -> f64 {
        self.row_tol
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            row_tol: DEFAULT_ROW_TOL,
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries
            .row_iter()
            .map(|r| crate::summation::sum(r.iter().copied()))
            .collect()
    }
}

impl Serialize for StochasticMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Checks a raw square matrix: entries below `-row_tol` or row sums off
/// by more than `row_tol` are rejected; small negatives are clamped to 0
/// and the rows rescaled to sum to 1.
pub fn validate(raw: &[Vec<f64>], row_tol: f64) -> Result<StochasticMatrix> {
    let dim = raw.len();
    if dim == 0 {
        return Err(Error::Input("matrix has no rows".into()));
    }
    if row_tol.is_nan() || row_tol < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "row tolerance must be non-negative, got {row_tol}"
        )));
    }
    let mut entries = DMatrix::zeros(dim, dim);
    for (r, row) in raw.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Validation {
                row: r,
                reason: format!("has {} entries, expected {dim}", row.len()),
            });
        }
        let mut clean = Vec::with_capacity(dim);
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Validation {
                    row: r,
                    reason: format!("entry {c} is not finite"),
                });
            }
            if v < -row_tol {
                return Err(Error::Validation {
                    row: r,
                    reason: format!("entry {c} = {v} is negative"),
                });
            }
            clean.push(v.max(0.0));
        }
        let total = crate::summation::sum(clean.iter().copied());
        if (total - 1.0).abs() > row_tol || total <= 0.0 {
            return Err(Error::Validation {
                row: r,
                reason: format!("sums to {total}, not 1 within {row_tol}"),
            });
        }
        for (c, v) in clean.into_iter().enumerate() {
            entries[(r, c)] = v / total;
        }
    }
    Ok(StochasticMatrix { entries, row_tol })
}

/// `(P + I) / 2`.
pub fn lazy(p: &StochasticMatrix) -> StochasticMatrix {
    let dim = p.dim();
    let mut entries = p.entries.clone();
    for i in 0..dim {
        entries[(i, i)] += 1.0;
    }
    entries *= 0.5;
    StochasticMatrix {
        entries,
        row_tol: p.row_tol,
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    #[serde(rename = "A")]
    pub a: StochasticMatrix,
    /// Number of squarings performed.
    pub iterations: usize,
    /// `max(|AP - A|, |PA - A|)` in the infinity norm.
    pub residual_fix: f64,
    /// `|AA - A|` in the infinity norm.
    pub residual_idem: f64,
}

fn residuals(a: &DMatrix<f64>, p: &DMatrix<f64>) -> (f64, f64) {
    let fix = inf_norm(&(a * p - a)).max(inf_norm(&(p * a - a)));
    let idem = inf_norm(&(a * a - a));
    (fix, idem)
}

/// Squares the lazy chain until two consecutive squarings differ by at
/// most `tol` and `A` is a fixed point of `P` within `tol`.
pub fn limit_matrix(p: &StochasticMatrix, tol: f64, max_squarings: usize) -> Result<LimitReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut m = lazy(p).entries;
    let mut last = f64::INFINITY;
    for k in 1..=max_squarings {
        let next = &m * &m;
        last = inf_norm(&(&next - &m));
        m = next;
        if last <= tol {
            let (fix, idem) = residuals(&m, &p.entries);
            if fix <= tol {
                return Ok(LimitReport {
                    a: StochasticMatrix {
                        entries: m,
                        row_tol: p.row_tol,
                    },
                    iterations: k,
                    residual_fix: fix,
                    residual_idem: idem,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        squarings: max_squarings,
        last_residual: last,
    })
}

/// `(1 / (N + 1)) sum_{i=0}^{N} P^i`, accumulated entrywise with compensation.
pub fn cesaro_matrix(p: &StochasticMatrix, n: usize) -> DMatrix<f64> {
    let dim = p.dim();
    let mut power = DMatrix::<f64>::identity(dim, dim);
    let mut sum = power.clone();
    let mut carry = DMatrix::<f64>::zeros(dim, dim);
    for _ in 0..n {
        power = &power * &p.entries;
        for ((s, c), &x) in sum.iter_mut().zip(carry.iter_mut()).zip(power.iter()) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
    }
    (sum + carry) / (n + 1) as f64
}

/// Reads a header-free CSV matrix, one row per line.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, f)| {
                f.parse::<f64>().map_err(|_| Error::Validation {
                    row: r,
                    reason: format!("entry {c} ({f:?}) is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
