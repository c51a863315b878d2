//! Binomial probability mass function and its shape facts.
//!
//! Single entries are evaluated in log space with Loader's saddle-point
//! form (Stirling-series remainders of the log-gamma function plus a
//! deviance term), which keeps full relative accuracy for `n` up to 10^7
//! and beyond without ever forming a binomial coefficient. Whole rows are
//! produced by a multiplicative recurrence seeded at the mode.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Smallest `n` for which [`center_ratio_bound`] asserts anything.
pub const CENTER_RATIO_MIN_N: u64 = 100;
/// Smallest offset `|beta|` for which [`center_ratio_bound`] asserts anything.
pub const CENTER_RATIO_MIN_OFFSET: u64 = 3;

/// Trial count and success probability of a binomial distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmfParams {
    n: u64,
    p: f64,
}

impl PmfParams {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Expected value `n p`.
    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }
}

/// Rejects anything outside the open interval (0, 1).
pub fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!(
            "probability must lie strictly between 0 and 1, got {p}"
        )))
    }
}

/// One full row `B_n^0(p), ..., B_n^n(p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfRow {
    pub params: PmfParams,
    pub mass: Vec<f64>,
}

impl PmfRow {
    pub fn total(&self) -> f64 {
        crate::summation::sum(self.mass.iter().copied())
    }

    /// Smallest index holding the largest mass.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &m) in self.mass.iter().enumerate() {
            if m > self.mass[best] {
                best = i;
            }
        }
        best
    }

    /// Mass of the entries with `|i - np| >= radius`.
    pub fn tail_mass_outside(&self, radius: f64) -> f64 {
        let center = self.params.mean();
        let mut acc = CompensatedSum::new();
        for (i, &m) in self.mass.iter().enumerate() {
            if (i as f64 - center).abs() >= radius {
                acc += m;
            }
        }
        acc.value()
    }
}

// Stirling-series remainder ln(n!) - (n + 1/2) ln n + n - ln sqrt(2 pi),
// tabulated exactly for small integers.
#[allow(clippy::excessive_precision)]
const SFERR_INT: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_2,
    0.041_340_695_955_409_294_093_822_1,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_567,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_318,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_152,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return SFERR_INT[n as usize];
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return s;
            }
            s = next;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Natural logarithm of `B_n^i(p)`; negative infinity outside the support.
pub fn ln_pmf(params: PmfParams, i: i64) -> f64 {
    let n = params.n;
    let p = params.p;
    if i < 0 || i as u64 > n {
        return f64::NEG_INFINITY;
    }
    let i = i as u64;
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    if i == 0 {
        return nf * (-p).ln_1p();
    }
    if i == n {
        return nf * p.ln();
    }
    let x = i as f64;
    let q = 1.0 - p;
    let lc = stirlerr(n) - stirlerr(i) - stirlerr(n - i) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    let lf = LN_2PI + x.ln() + (-x / nf).ln_1p();
    lc - 0.5 * lf
}

// Below this size the binomial coefficient is an exact f64 and the direct
// product is more accurate than the saddle-point form.
const DIRECT_MAX_N: u64 = 50;

fn binomial_coefficient(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for j in 0..k {
        c = c * (n - j) / (j + 1);
    }
    c as f64
}

/// `B_n^i(p)`; exactly zero for `i` outside `0..=n`.
pub fn pmf(params: PmfParams, i: i64) -> f64 {
    if i < 0 || i as u64 > params.n {
        return 0.0;
    }
    let n = params.n;
    if n <= DIRECT_MAX_N {
        let k = i as u64;
        let direct = binomial_coefficient(n, k)
            * params.p.powi(k as i32)
            * (1.0 - params.p).powi((n - k) as i32);
        if direct >= f64::MIN_POSITIVE {
            return direct;
        }
    }
    ln_pmf(params, i).exp()
}

/// Smallest index maximising the mass.
///
/// This is `floor((n + 1) p)`, except when `(n + 1) p` is an integer: then
/// `(n + 1) p - 1` and `(n + 1) p` tie and the lower one is returned.
/// Products within a few ulps of an integer count as ties, so that decimal
/// inputs such as `p = 0.1` behave like the intended fraction.
pub fn mode_index(params: PmfParams) -> u64 {
    let m = (params.n + 1) as f64 * params.p;
    let r = m.round();
    if r >= 1.0 && (m - r).abs() <= 4.0 * f64::EPSILON * m {
        (r as u64 - 1).min(params.n)
    } else {
        (m.floor() as u64).min(params.n)
    }
}

/// Entries `lo..=hi` (clipped to the support) of the row, by recurrence
/// from the mode (or the window end nearest to it).
pub fn pmf_window(params: PmfParams, lo: u64, hi: u64) -> Vec<f64> {
    let n = params.n;
    let hi = hi.min(n);
    if lo > hi {
        return Vec::new();
    }
    let len = (hi - lo + 1) as usize;
    let mut out = vec![0.0; len];
    let seed = mode_index(params).clamp(lo, hi);
    let odds = params.p / (1.0 - params.p);
    let s = (seed - lo) as usize;
    out[s] = pmf(params, seed as i64);
    // B^i = B^{i-1} * odds * (n - i + 1) / i
    for k in s + 1..len {
        let i = lo + k as u64;
        out[k] = out[k - 1] * (odds * ((n - i + 1) as f64 / i as f64));
    }
    for k in (0..s).rev() {
        let i = lo + k as u64 + 1;
        out[k] = out[k + 1] * ((i as f64 / (n - i + 1) as f64) / odds);
    }
    out
}

/// The whole row `B_n^0(p), ..., B_n^n(p)`.
pub fn pmf_row(params: PmfParams) -> PmfRow {
    PmfRow {
        params,
        mass: pmf_window(params, 0, params.n),
    }
}

/// Mass of all entries with `|i - np| >= radius`.
pub fn tail_mass_outside(params: PmfParams, radius: f64) -> Result<f64> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::ParameterDomain(format!(
            "radius must be non-negative, got {radius}"
        )));
    }
    Ok(pmf_row(params).tail_mass_outside(radius))
}

/// Upper bound `2 exp(-alpha^2 / (3p))` on the mass at distance at least
/// `sqrt(n) alpha` from `np`, valid for `0 < alpha < p sqrt(n)`.
pub fn chernoff_bound(params: PmfParams, alpha: f64) -> Result<f64> {
    let limit = params.p * (params.n as f64).sqrt();
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::ParameterDomain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if alpha >= limit {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} must be below p sqrt(n) = {limit}"
        )));
    }
    Ok(2.0 * (-alpha * alpha / (3.0 * params.p)).exp())
}

/// Radius around `np` outside of which the total mass is provably at most
/// `mass`, or `None` when the Chernoff estimate does not apply (then the
/// whole support must be kept).
pub fn negligible_radius(params: PmfParams, mass: f64) -> Option<f64> {
    let alpha = (3.0 * params.p * (2.0 / mass).ln()).sqrt();
    if alpha.is_finite() && alpha > 0.0 && alpha < params.p * (params.n as f64).sqrt() {
        Some((params.n as f64).sqrt() * alpha)
    } else {
        None
    }
}

/// `B_n^{floor(np)}(p) / B_n^{floor(np) - beta}(p)`.
pub fn center_ratio(params: PmfParams, beta: i64) -> Result<f64> {
    let center = params.mean().floor() as i64;
    let other = center - beta;
    if other < 0 || other as u64 > params.n {
        return Err(Error::OutsideSupport { index: other });
    }
    Ok((ln_pmf(params, center) - ln_pmf(params, other)).exp())
}

/// The bound `exp(beta^2 / (p (1-p) n))` on [`center_ratio`], returned only
/// in the regime where it is asserted: `n >= 100` and `3 <= |beta| <= sqrt(n)`.
pub fn center_ratio_bound(params: PmfParams, beta: i64) -> Option<f64> {
    let b = beta.unsigned_abs();
    let nf = params.n as f64;
    if params.n < CENTER_RATIO_MIN_N || b < CENTER_RATIO_MIN_OFFSET || b as f64 > nf.sqrt() {
        return None;
    }
    let p = params.p;
    Some(((beta * beta) as f64 / (p * (1.0 - p) * nf)).exp())
}

/// `sqrt(2 pi p (1-p) n) B_n^{floor(np)}(p)`, which tends to 1.
pub fn peak_asymptotic_ratio(params: PmfParams) -> Result<f64> {
    if params.n == 0 {
        return Err(Error::Precondition("peak ratio needs n >= 1".into()));
    }
    let p = params.p;
    let nf = params.n as f64;
    let peak = pmf(params, params.mean().floor() as i64);
    Ok((2.0 * std::f64::consts::PI * p * (1.0 - p) * nf).sqrt() * peak)
}
