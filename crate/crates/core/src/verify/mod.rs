//! Scenario runners that combine the solvers into pass/fail reports.

pub mod neumann;
pub mod oracles;
pub mod report;
pub mod scenario;

pub use neumann::{neumann_trace_limit, neumann_trace_weak, Eigenpair, Extension, Face, TraceLimit, DEFAULT_EPS_CELLS};
pub use oracles::{fix_sign, monotonicity_suite, slater_sum_oracle, MARGIN_FACTOR, RESIDUAL_TOLERANCE};
pub use report::{
    emit_report, format_sig12, parse_report, round12, Check, Environment, Expectation, Outcome, Relation, ReportBundle, ReportFormat,
    VerificationReport, CSV_HEADER, NO_CHECKS,
};
pub use scenario::{
    default_manifest, nondegeneracy_nonlocal, parity_condition_holds, run_manifest, run_scenario, Manifest, Scenario,
    ScenarioKind, MANIFEST_VERSION,
};
