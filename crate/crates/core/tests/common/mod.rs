//! Exact-arithmetic oracles shared by the integration tests. Probabilities
//! are restricted to tenths so every quantity is a ratio of integers.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact `C(n, i) k^i (10 - k)^(n - i)` for `i = 0..=n`; the row of
/// `Binomial(n, k/10)` is this divided by `10^n`.
pub fn binomial_numerators(n: u64, k: u64) -> Vec<BigInt> {
    let k_big = BigInt::from(k);
    let rest = BigInt::from(10 - k);
    let mut pow_k = vec![BigInt::one()];
    let mut pow_r = vec![BigInt::one()];
    for j in 1..=n as usize {
        pow_k.push(&pow_k[j - 1] * &k_big);
        pow_r.push(&pow_r[j - 1] * &rest);
    }
    let mut c = BigInt::one();
    let mut out = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        out.push(&c * &pow_k[i as usize] * &pow_r[(n - i) as usize]);
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

pub fn pow10(n: u64) -> BigInt {
    num_traits::pow(BigInt::from(10), n as usize)
}

pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    BigRational::new(num.clone(), den.clone())
        .to_f64()
        .expect("finite ratio")
}

/// Exact `B_n^i(k/10)` as f64.
pub fn exact_pmf_row(n: u64, k: u64) -> Vec<f64> {
    let den = pow10(n);
    binomial_numerators(n, k)
        .iter()
        .map(|x| ratio_to_f64(x, &den))
        .collect()
}

/// Weights by their defining double sum
/// `w_n^i(p) = sum_{j=i}^{n} C(j, i) p^i (1-p)^(j-i)`, exactly, for `p = k/10`.
pub fn exact_weights(n: u64, k: u64) -> Vec<f64> {
    let k_big = BigInt::from(k);
    let rest = BigInt::from(10 - k);
    let mut pow_k = vec![BigInt::one()];
    let mut pow_r = vec![BigInt::one()];
    let mut pow_t = vec![BigInt::one()];
    for j in 1..=n as usize {
        pow_k.push(&pow_k[j - 1] * &k_big);
        pow_r.push(&pow_r[j - 1] * &rest);
        pow_t.push(&pow_t[j - 1] * BigInt::from(10));
    }
    let den = &pow_t[n as usize];
    (0..=n)
        .map(|i| {
            // Common denominator 10^n: the j term is C(j,i) k^i (10-k)^(j-i) 10^(n-j).
            let mut total = BigInt::zero();
            let mut c = BigInt::one();
            for j in i..=n {
                total +=
                    &c * &pow_k[i as usize] * &pow_r[(j - i) as usize] * &pow_t[(n - j) as usize];
                c = c * BigInt::from(j + 1) / BigInt::from(j + 1 - i);
            }
            ratio_to_f64(&total, den)
        })
        .collect()
}
