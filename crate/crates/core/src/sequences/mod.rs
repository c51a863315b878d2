//! Sequence families, the limit heuristic, and the experiments built on them.

mod explore;
mod generators;
mod table1;
mod verdict;

pub use explore::{probe_open_problem, OpenProblemReport, SpikeProbe};
pub use generators::{GeneratorSpec, SpikePositions};
pub use table1::{
    classify, evaluate_family, geometric_witness_ratio, run_table1, table1_families, table_entry,
    CellCheck, CellStatus, FamilyEvaluation, ImplicationReport, TableEntry, Transform,
    TransformVerdict, Witness, AGREEMENT_TOL, TRANSFORMS,
};
pub use verdict::{estimate_limit, ConvergenceVerdict, Status, VerdictConfig};
