//! Empirical check of the implication table between convergence of a
//! sequence, its p- and q-binomial means, and its Cesàro means.

use serde::Serialize;

use super::generators::GeneratorSpec;
use super::verdict::{ConvergenceVerdict, Status, VerdictConfig};
use crate::binomial_kernel::check_probability;
use crate::error::{Error, Result};
use crate::transforms::{self, RealSequence};

/// Agreement required between two converged verdicts, relative to `1 + |v|`.
pub const AGREEMENT_TOL: f64 = 1e-3;

/// Relative rounding-error budget for a binomial mean; beyond it the
/// family's evaluation horizon is cut.
const RELIABILITY: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Sequence,
    BinomialP,
    BinomialQ,
    Cesaro,
}

pub const TRANSFORMS: [Transform; 4] = [
    Transform::Sequence,
    Transform::BinomialP,
    Transform::BinomialQ,
    Transform::Cesaro,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableEntry {
    Implies,
    /// A counterexample with terms in {0, 1} exists.
    NotImplies,
    ImpliesIfNonnegative,
    /// Fails in general; whether non-negativity suffices is open.
    OpenIfNonnegative,
}

/// Row = source transform, column = target transform, for `p < q`.
pub fn table_entry(source: Transform, target: Transform) -> TableEntry {
    use TableEntry::*;
    use Transform::*;
    match (source, target) {
        (Sequence, _) => Implies,
        (_, Sequence) => NotImplies,
        (BinomialP, BinomialP) | (BinomialQ, BinomialQ) | (Cesaro, Cesaro) => Implies,
        (BinomialP, BinomialQ) => OpenIfNonnegative,
        (BinomialQ, BinomialP) => Implies,
        (BinomialP | BinomialQ, Cesaro) => ImpliesIfNonnegative,
        (Cesaro, _) => NotImplies,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    /// Both sides converge to the same value (or both diverge to infinity).
    Consistent,
    /// The source was not judged convergent; nothing to check.
    Vacuous,
    /// The implication needs non-negative terms and the family has signs.
    NotApplicable,
    /// The table asserts no implication here.
    NoClaim,
    /// The open cell: evidence only.
    Open,
    /// Source converged but the target's tail is still moving; the
    /// heuristic cannot separate slow convergence from divergence.
    Unresolved,
    /// Both verdicts are definite and disagree with an asserted implication.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellCheck {
    pub family: String,
    pub source: Transform,
    pub target: Transform,
    pub entry: TableEntry,
    pub source_verdict: ConvergenceVerdict,
    pub target_verdict: ConvergenceVerdict,
    pub status: CellStatus,
}

impl CellCheck {
    pub fn consistent_with_table(&self) -> bool {
        self.status != CellStatus::Contradiction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformVerdict {
    pub transform: Transform,
    pub verdict: ConvergenceVerdict,
    /// Last evaluated value.
    pub last_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEvaluation {
    pub family: GeneratorSpec,
    pub label: String,
    pub nonnegative: bool,
    /// Largest index up to which all four transforms are finite and the
    /// binomial means carry a relative rounding error below 1e-8.
    pub effective_horizon: usize,
    pub verdicts: Vec<TransformVerdict>,
}

impl FamilyEvaluation {
    pub fn verdict(&self, t: Transform) -> &ConvergenceVerdict {
        &self
            .verdicts
            .iter()
            .find(|v| v.transform == t)
            .expect("all transforms evaluated")
            .verdict
    }
}

/// A non-implication of the table observed on a concrete family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub claim: String,
    pub family: String,
    pub witnessed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationReport {
    pub p: f64,
    pub q: f64,
    pub horizon: usize,
    pub verdict_config: VerdictConfig,
    pub agreement_tol: f64,
    pub families: Vec<FamilyEvaluation>,
    pub cells: Vec<CellCheck>,
    pub witnesses: Vec<Witness>,
    pub contradictions: usize,
    pub unresolved: usize,
}

/// A ratio `a` for which `a^n` has convergent p-binomial means and
/// divergent q-binomial means: any `a` in `(1 - 2/p, 1 - 2/q)`. Prefers -3.
pub fn geometric_witness_ratio(p: f64, q: f64) -> f64 {
    let lo = 1.0 - 2.0 / p;
    let hi = 1.0 - 2.0 / q;
    if lo < -3.0 && -3.0 < hi {
        -3.0
    } else {
        0.5 * (lo + hi)
    }
}

/// The family grid evaluated by [`run_table1`].
pub fn table1_families(p: f64, q: f64) -> Vec<GeneratorSpec> {
    let mut fams = vec![
        GeneratorSpec::Alternating01,
        GeneratorSpec::Geometric { a: 0.0 },
        GeneratorSpec::Geometric { a: 0.5 },
        GeneratorSpec::Geometric { a: 1.0 },
        GeneratorSpec::Geometric { a: -0.5 },
        GeneratorSpec::Geometric { a: 1.5 },
        GeneratorSpec::Geometric { a: -3.0 },
    ];
    let w = geometric_witness_ratio(p, q);
    if w != -3.0 {
        fams.push(GeneratorSpec::Geometric { a: w });
    }
    fams.extend([
        GeneratorSpec::SignedLinear,
        GeneratorSpec::Islets,
        GeneratorSpec::Spikes {
            c: 1.0,
            height: 1.0,
        },
    ]);
    fams
}

fn check_pair(p: f64, q: f64) -> Result<()> {
    check_probability(p)?;
    check_probability(q)?;
    if p >= q {
        return Err(Error::Precondition(format!(
            "requires p < q, got p = {p}, q = {q}"
        )));
    }
    Ok(())
}

fn reliable(value: f64, magnitude: f64) -> bool {
    value.is_finite() && 64.0 * f64::EPSILON * magnitude <= RELIABILITY * value.abs().max(1.0)
}

/// All four transforms of one family, cut to the reliable horizon.
pub fn evaluate_family(
    family: GeneratorSpec,
    p: f64,
    q: f64,
    horizon: usize,
    config: &VerdictConfig,
) -> Result<FamilyEvaluation> {
    let seq = RealSequence::generated(family);
    let raw = seq.prefix(horizon)?;
    let cesaro = transforms::running_means(&raw);
    let (bp, mag_p) = transforms::binomial_prefix_with_magnitude(&seq, p, horizon)?;
    let (bq, mag_q) = transforms::binomial_prefix_with_magnitude(&seq, q, horizon)?;
    let bad = (0..=horizon).find(|&n| {
        !raw[n].is_finite()
            || !cesaro[n].is_finite()
            || !reliable(bp.values[n], mag_p[n])
            || !reliable(bq.values[n], mag_q[n])
    });
    let effective_horizon = match bad {
        Some(0) | Some(1) => {
            return Err(Error::Precondition(format!(
                "{} cannot be evaluated reliably beyond index 1",
                family.label()
            )))
        }
        Some(n) => n - 1,
        None => horizon,
    };
    let cut = effective_horizon + 1;
    let series: [(Transform, &[f64]); 4] = [
        (Transform::Sequence, &raw[..cut]),
        (Transform::BinomialP, &bp.values[..cut]),
        (Transform::BinomialQ, &bq.values[..cut]),
        (Transform::Cesaro, &cesaro[..cut]),
    ];
    let verdicts = series
        .iter()
        .map(|&(transform, values)| {
            Ok(TransformVerdict {
                transform,
                verdict: config.judge(values)?,
                last_value: values[values.len() - 1],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyEvaluation {
        family,
        label: family.label(),
        nonnegative: family.is_nonnegative(),
        effective_horizon,
        verdicts,
    })
}

fn converged_value(v: &ConvergenceVerdict) -> Option<f64> {
    match v.status {
        Status::Converged => v.value,
        Status::DivergesToInfinity => Some(f64::INFINITY),
        Status::NotConverged => None,
    }
}

/// Classifies one cell of the table against a pair of verdicts.
pub fn classify(
    entry: TableEntry,
    nonnegative: bool,
    source: &ConvergenceVerdict,
    target: &ConvergenceVerdict,
) -> CellStatus {
    match entry {
        TableEntry::NotImplies => return CellStatus::NoClaim,
        TableEntry::OpenIfNonnegative => return CellStatus::Open,
        TableEntry::ImpliesIfNonnegative if !nonnegative => return CellStatus::NotApplicable,
        _ => {}
    }
    let Some(vs) = converged_value(source) else {
        return CellStatus::Vacuous;
    };
    let Some(vt) = converged_value(target) else {
        return CellStatus::Unresolved;
    };
    let agree = if vs.is_infinite() || vt.is_infinite() {
        vs == vt
    } else {
        (vs - vt).abs() <= AGREEMENT_TOL * (1.0 + vs.abs())
    };
    if agree {
        CellStatus::Consistent
    } else {
        CellStatus::Contradiction
    }
}

/// Evaluates every family of the grid at `horizon` and checks each cell of
/// the table, for `0 < p < q < 1`.
pub fn run_table1(p: f64, q: f64, horizon: usize) -> Result<ImplicationReport> {
    check_pair(p, q)?;
    if horizon < 2 {
        return Err(Error::Precondition(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    let config = VerdictConfig::default();
    let families = table1_families(p, q)
        .into_iter()
        .map(|f| evaluate_family(f, p, q, horizon, &config))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for fam in &families {
        for &source in &TRANSFORMS {
            for &target in &TRANSFORMS {
                let entry = table_entry(source, target);
                let sv = *fam.verdict(source);
                let tv = *fam.verdict(target);
                cells.push(CellCheck {
                    family: fam.label.clone(),
                    source,
                    target,
                    entry,
                    source_verdict: sv,
                    target_verdict: tv,
                    status: classify(entry, fam.nonnegative, &sv, &tv),
                });
            }
        }
    }

    let witnesses = collect_witnesses(&families, p, q, horizon)?;
    let contradictions = cells
        .iter()
        .filter(|c| c.status == CellStatus::Contradiction)
        .count();
    let unresolved = cells
        .iter()
        .filter(|c| c.status == CellStatus::Unresolved)
        .count();
    Ok(ImplicationReport {
        p,
        q,
        horizon,
        verdict_config: config,
        agreement_tol: AGREEMENT_TOL,
        families,
        cells,
        witnesses,
        contradictions,
        unresolved,
    })
}

fn collect_witnesses(
    families: &[FamilyEvaluation],
    p: f64,
    q: f64,
    horizon: usize,
) -> Result<Vec<Witness>> {
    use Transform::*;
    let mut out = Vec::new();
    let find = |spec: GeneratorSpec| families.iter().find(|f| f.family == spec);

    if let Some(f) = find(GeneratorSpec::Alternating01) {
        let seq_conv = f.verdict(Sequence).is_converged();
        let means_conv = [BinomialP, BinomialQ, Cesaro]
            .iter()
            .all(|&t| f.verdict(t).is_converged());
        out.push(Witness {
            claim: "convergent binomial and Cesàro means do not imply a convergent sequence".into(),
            family: f.label.clone(),
            witnessed: !seq_conv && means_conv,
            detail: format!(
                "sequence {:?}; a^p {:?}, a^q {:?}, a* {:?}",
                f.verdict(Sequence).status,
                f.verdict(BinomialP).value,
                f.verdict(BinomialQ).value,
                f.verdict(Cesaro).value
            ),
        });
    }

    if let Some(f) = find(GeneratorSpec::Islets) {
        // Means sampled at the islet centres and half-way between them.
        let seq = RealSequence::generated(GeneratorSpec::Islets);
        let mut probes = Vec::new();
        for r in [p, q] {
            let mut k = 1u32;
            loop {
                let high = ((1u64 << (2 * k)) as f64 / r).floor() as usize;
                if high > horizon {
                    break;
                }
                let low = ((1u64 << (2 * k - 1)) as f64 / r).floor() as usize;
                let v = transforms::binomial_at(&seq, r, &[high, low])?;
                probes.push((r, k, v[0], v[1]));
                k += 1;
            }
        }
        let oscillates = |r: f64| {
            probes
                .iter()
                .rfind(|pr| pr.0 == r)
                .is_some_and(|pr| pr.2 >= 0.7 && pr.3 <= 0.3)
        };
        let cesaro = f.verdict(Cesaro);
        let witnessed = cesaro.is_converged()
            && !f.verdict(BinomialP).is_converged()
            && !f.verdict(BinomialQ).is_converged();
        let probe_text: Vec<String> = probes
            .iter()
            .map(|(r, k, hi, lo)| format!("r={r} k={k}: {hi:.4} at 4^k/r, {lo:.4} at 2^(2k-1)/r"))
            .collect();
        out.push(Witness {
            claim: "convergent Cesàro means do not imply convergent binomial means".into(),
            family: f.label.clone(),
            witnessed,
            detail: format!(
                "a* {:?} (last {:.6}); binomial oscillation at aligned indices: p {}, q {}; {}",
                cesaro.status,
                f.verdicts
                    .iter()
                    .find(|v| v.transform == Cesaro)
                    .map_or(f64::NAN, |v| v.last_value),
                oscillates(p),
                oscillates(q),
                probe_text.join("; ")
            ),
        });
    }

    let a = geometric_witness_ratio(p, q);
    if let Some(f) = find(GeneratorSpec::Geometric { a }) {
        let vp = f.verdict(BinomialP);
        let vq = f.verdict(BinomialQ);
        let p_to_zero = vp.is_converged() && vp.value.is_some_and(|v| v.abs() <= AGREEMENT_TOL);
        out.push(Witness {
            claim: "convergent p-binomial means do not imply convergent q-binomial means (signed terms)"
                .into(),
            family: f.label.clone(),
            witnessed: p_to_zero && !vq.is_converged(),
            detail: format!(
                "a^p {:?} value {:?}; a^q {:?}; closed forms ({})^n and ({})^n; evaluated up to n = {}",
                vp.status,
                vp.value,
                vq.status,
                p * (a - 1.0) + 1.0,
                q * (a - 1.0) + 1.0,
                f.effective_horizon
            ),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(v: f64) -> ConvergenceVerdict {
        ConvergenceVerdict {
            status: Status::Converged,
            value: Some(v),
            window: 10,
            tol: 1e-4,
        }
    }

    fn status(s: Status) -> ConvergenceVerdict {
        ConvergenceVerdict {
            status: s,
            value: None,
            window: 10,
            tol: 1e-4,
        }
    }

    #[test]
    fn table_layout() {
        use TableEntry::*;
        let expected = [
            [Implies, Implies, Implies, Implies],
            [NotImplies, Implies, OpenIfNonnegative, ImpliesIfNonnegative],
            [NotImplies, Implies, Implies, ImpliesIfNonnegative],
            [NotImplies, NotImplies, NotImplies, Implies],
        ];
        for (i, &s) in TRANSFORMS.iter().enumerate() {
            for (j, &t) in TRANSFORMS.iter().enumerate() {
                assert_eq!(table_entry(s, t), expected[i][j], "{s:?} -> {t:?}");
            }
        }
    }

    #[test]
    fn classification() {
        use TableEntry::*;
        assert_eq!(
            classify(Implies, true, &conv(1.0), &conv(1.0005)),
            CellStatus::Consistent
        );
        assert_eq!(
            classify(Implies, true, &conv(1.0), &conv(1.1)),
            CellStatus::Contradiction
        );
        assert_eq!(
            classify(Implies, true, &conv(1.0), &status(Status::NotConverged)),
            CellStatus::Unresolved
        );
        assert_eq!(
            classify(Implies, true, &status(Status::NotConverged), &conv(1.0)),
            CellStatus::Vacuous
        );
        assert_eq!(
            classify(
                Implies,
                true,
                &status(Status::DivergesToInfinity),
                &status(Status::DivergesToInfinity)
            ),
            CellStatus::Consistent
        );
        assert_eq!(
            classify(
                Implies,
                true,
                &status(Status::DivergesToInfinity),
                &conv(3.0)
            ),
            CellStatus::Contradiction
        );
        assert_eq!(
            classify(ImpliesIfNonnegative, false, &conv(0.0), &conv(5.0)),
            CellStatus::NotApplicable
        );
        assert_eq!(
            classify(OpenIfNonnegative, true, &conv(0.0), &conv(5.0)),
            CellStatus::Open
        );
        assert_eq!(
            classify(NotImplies, true, &conv(0.0), &conv(5.0)),
            CellStatus::NoClaim
        );
    }

    #[test]
    fn witness_ratio_lies_in_the_interval() {
        for (p, q) in [(0.25, 0.75), (0.3, 0.6), (0.4, 0.7), (0.1, 0.2), (0.8, 0.9)] {
            let a = geometric_witness_ratio(p, q);
            assert!(1.0 - 2.0 / p < a && a < 1.0 - 2.0 / q, "{p} {q} {a}");
        }
        assert_eq!(geometric_witness_ratio(0.25, 0.75), -3.0);
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(matches!(
            run_table1(0.75, 0.25, 100),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            run_table1(0.5, 0.5, 100),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            run_table1(0.0, 0.5, 100),
            Err(Error::ParameterDomain(_))
        ));
    }

    #[test]
    fn constant_sequence_is_consistent_everywhere() {
        let f = evaluate_family(
            GeneratorSpec::Geometric { a: 1.0 },
            0.3,
            0.6,
            500,
            &VerdictConfig::default(),
        )
        .unwrap();
        for v in &f.verdicts {
            assert_eq!(v.verdict.status, Status::Converged);
            assert!((v.verdict.value.unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
