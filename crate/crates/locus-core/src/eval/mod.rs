//! Evaluation metrics and the ablation sweep harness.
//!
//! NER scoring is exact-match, micro-averaged entity F1: a predicted span
//! counts only when (start, end, label) all equal a gold span, and each gold
//! span can be matched at most once. TC reports accuracy with per-label
//! precision/recall.

mod metrics;
mod sweep;
mod table;

pub use metrics::{entity_f1, tc_accuracy, EvalError, EvalReport, PerLabel};
pub use sweep::{
    evaluate_model, run_sweep, sweep_rows, SweepAxis, SweepCell, SweepError, SweepInputs,
    SweepPoint, SweepSpec, SweepTable,
};
pub use table::{render_sweep_table, report_table, ReportTable};
