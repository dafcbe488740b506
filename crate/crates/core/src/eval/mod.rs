//! Error/cost trade-off sweeps and machine checks of the greedy guarantees.

mod audit;
mod plot;
mod sweep;

pub use audit::{
    audit_approximation, audit_embedding, audit_error_bounds, subtree_cost, ApproximationReport, AuditError,
    BoundAudit, BoundRecord, EmbeddingReport, EmbeddingViolation, RootBound, DEFAULT_ETA_GRID,
};
pub use plot::render_svg;
pub use sweep::{best_of, sweep, write_csv, PointResult, SweepError, SweepKind, TradeoffCurve, TradeoffPoint};
