//! Event detection, main-component attribution statistics, and the
//! Mann-Whitney U test behind the report.

mod events;
mod mwu;
mod report;

pub use events::{detect_events, DetectorConfig, EventFlags, EventKind};
pub use mwu::mann_whitney_u;
pub use report::{
    build_report, main_component_stats, AttributionReport, AttributionRow, DreamStat, ReportMeta,
};
