//! Library values checked against exact rational arithmetic.

mod common;

use summakit::binomial_kernel::{self, PmfParams};
use summakit::transforms::{self, RealSequence};

#[test]
fn pmf_rows_match_exact_values() {
    for k in 1..=9u64 {
        let p = k as f64 / 10.0;
        for n in (0..=300u64).step_by(13).chain([1, 2, 299, 300]) {
            let exact = common::exact_pmf_row(n, k);
            let row = binomial_kernel::pmf_row(PmfParams::new(n, p).unwrap());
            for (i, (&got, &want)) in row.mass.iter().zip(&exact).enumerate() {
                if want < 1e-280 {
                    continue;
                }
                let rel = (got - want).abs() / want;
                assert!(
                    rel <= 1e-12,
                    "n={n} p={p} i={i}: {got} vs {want} (rel {rel:e})"
                );
                // Point evaluation takes a different path from the row.
                let point = binomial_kernel::pmf(PmfParams::new(n, p).unwrap(), i as i64);
                assert!(
                    (point - want).abs() / want <= 1e-12,
                    "point n={n} p={p} i={i}"
                );
            }
        }
    }
}

#[test]
fn rows_sum_to_one() {
    for &p in &[0.05, 0.3, 0.5, 0.77, 0.99] {
        for n in [0u64, 1, 7, 100, 1000, 20_000] {
            let t = binomial_kernel::pmf_row(PmfParams::new(n, p).unwrap()).total();
            assert!((t - 1.0).abs() <= 1e-12, "n={n} p={p}: {t}");
        }
    }
}

#[test]
fn row_of_300_peaks_at_the_mode() {
    let row = binomial_kernel::pmf_row(PmfParams::new(300, 0.2).unwrap());
    assert_eq!(row.mass.len(), 301);
    assert_eq!(row.argmax(), 60);
}

#[test]
fn weights_match_exact_double_sum() {
    for (n, k) in [(0u64, 3u64), (1, 5), (10, 1), (37, 9), (120, 4), (300, 3)] {
        let w = transforms::weights(n as usize, k as f64 / 10.0).unwrap();
        let exact = common::exact_weights(n, k);
        for (i, (a, b)) in w.weights.iter().zip(&exact).enumerate() {
            assert!((a - b).abs() <= 1e-12, "n={n} k={k} i={i}: {a} vs {b}");
        }
    }
    let w = transforms::weights(300, 0.3).unwrap();
    assert!((w.weights[120] - 3.50584664546992e-4).abs() <= 1e-15);
}

#[test]
fn pstar_is_the_weighted_mean() {
    let terms: Vec<f64> = (0..=60).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    let a = RealSequence::explicit(terms.clone());
    for k in [2u64, 5, 8] {
        let p = k as f64 / 10.0;
        let ps = transforms::pstar_prefix(&a, p, 60).unwrap();
        for n in [0usize, 1, 10, 33, 60] {
            let w = common::exact_weights(n as u64, k);
            let want: f64 = w.iter().zip(&terms).map(|(w, t)| w * t).sum::<f64>() / (n + 1) as f64;
            assert!((ps.values[n] - want).abs() <= 1e-12, "n={n} p={p}");
        }
    }
}
