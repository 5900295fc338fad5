//! Market documents, allocation labels and report rendering.

mod document;
mod error;
mod labels;
pub mod report;

pub use document::{parse_market, parse_market_file, serialize_market, Format, MarketFile, SCHEMA_VERSION};
pub use error::ParseError;
pub use labels::{parse_allocation, render_allocation, render_allotments, render_cycle, TypeNames};
