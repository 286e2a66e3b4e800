//! Deterministic scorers for the five metrics, bootstrap intervals and
//! report assembly. Every scorer is a pure function of its inputs.

mod bootstrap;
mod cas;
mod cbst;
mod decision;
pub mod facts;
mod needle;
mod report;
mod reverse;
mod weights;

pub use bootstrap::{bootstrap_ci, mean, percentile_indices, AggregateStat, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
pub use cas::{delta_cas, jaccard, normalized_set, score_cas, CasResult};
pub use cbst::{bsi, score_cbst, CbstResult};
pub use decision::{score_decision_points, DecisionPointResult};
pub use needle::{detect_clue, references, score_needle, NeedleResult};
pub use report::{assemble_report, BootstrapSettings, CaseResult, CaseRow, MetricReport, MetricSection, REPORT_FORMAT_VERSION};
pub use reverse::{
    affect_reference, linguistic, score_reverse, style_realism, ReverseResult, COMPLETENESS_GATE, CONTRADICTION_GATE,
};
pub use weights::{CasWeights, CbstWeights, MetricConfig, ReverseWeights};
