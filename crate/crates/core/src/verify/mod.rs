//! Exhaustive audits, the independence table and constraint search over finite domains.

mod audit;
mod replay;
mod search;
mod table;

pub use audit::{
    allocation_property, audit_mechanism, audit_table, domain_label, AuditReport, AuditWitness, PropertyCode,
    PropertyResult,
};
pub use replay::{closure_search, full_domain_search, replay_proof_a5, ReplayCase, ReplayReport};
pub use search::{
    search_mechanisms, SearchInstance, SearchOptions, SearchOutcome, SearchStats, SearchVerdict, TargetComparison,
};
pub use table::{independence_table, CellDiff, IndependenceTable, TableColumn, EXPECTED_TABLE, TABLE_ROWS};
