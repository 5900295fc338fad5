//! Multiple-type housing markets: top trading cycles mechanisms, efficiency and incentive
//! property checkers, and exhaustive verification tools for small markets.

pub mod error;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod properties;
pub mod verify;

pub use error::{Error, GuardError, MechanismError, ModelError, SeparabilityViolation};
pub use model::*;
