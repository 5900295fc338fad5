//! Mechanisms mapping a reported market to an allocation.

mod bundle;
mod serial;
mod ttc;
mod variants;

use thiserror::Error;

use crate::error::MechanismError;
use crate::model::{Allocation, Guards, Market};

pub use bundle::{bttc, bttc_stepwise, bttc_with_trace, cttc, cttc_with_trace, Bttc, Cttc};
pub use serial::{multiple_serial_ir, serial_dictatorship, MultipleSerialIr, SerialDictatorship};
pub use ttc::{top_trading_cycles, ttc_single_type, CycleLink, Pointee, TradingCycle, TtcOutcome};
pub use variants::{
    bossy_hybrid, house_then_penalized_car, no_trade, y_restricted_unanimity, BossyHybrid, HouseThenPenalizedCar,
    NoTrade, YRestrictedUnanimity,
};

/// A direct mechanism `f: R^N -> X`. Implementations are pure and deterministic.
pub trait Mechanism: Send + Sync {
    fn name(&self) -> String;

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError>;
}

impl<M: Mechanism + ?Sized> Mechanism for &M {
    fn name(&self) -> String {
        (**self).name()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        (**self).allocate(market)
    }
}

impl<M: Mechanism + ?Sized> Mechanism for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        (**self).allocate(market)
    }
}

/// bTTC computed by the object-pointing algorithm; lexicographic markets only.
#[derive(Clone, Copy, Debug, Default)]
pub struct BttcStepwise;

impl Mechanism for BttcStepwise {
    fn name(&self) -> String {
        "bttc-stepwise".into()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        bttc_stepwise(market).map(|(a, _)| a)
    }
}

/// Canonical registry names, with accepted aliases.
pub const MECHANISM_NAMES: &[(&str, &[&str])] = &[
    ("no-trade", &["nt"]),
    ("serial-dictatorship", &["sd"]),
    ("msir", &["multiple-serial-ir"]),
    ("bossy-hybrid", &["ex8"]),
    ("cttc", &[]),
    ("bttc", &[]),
    ("bttc-stepwise", &[]),
    ("y-unanimity", &["y-restricted-unanimity"]),
    ("house-then-car", &["house-then-penalized-car"]),
];

/// Parameters some mechanisms need.
#[derive(Clone, Debug, Default)]
pub struct MechanismOptions {
    /// Picking order (0-based) for serial mechanisms; identity when absent.
    pub order: Option<Vec<usize>>,
    /// Target allocation for the restricted unanimity mechanism.
    pub target: Option<Allocation>,
    pub guards: Guards,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("unknown mechanism `{0}`")]
    Unknown(String),
    #[error("mechanism `{0}` needs a target allocation")]
    MissingTarget(String),
}

pub fn canonical_name(name: &str) -> Option<&'static str> {
    MECHANISM_NAMES
        .iter()
        .find(|(canon, aliases)| *canon == name || aliases.contains(&name))
        .map(|(canon, _)| *canon)
}

/// Builds a mechanism from its registry name. Serial mechanisms need the agent count to
/// default their order, so callers pass `n`.
pub fn by_name(name: &str, n: usize, options: &MechanismOptions) -> Result<Box<dyn Mechanism>, RegistryError> {
    let canon = canonical_name(name).ok_or_else(|| RegistryError::Unknown(name.to_string()))?;
    let order = || options.order.clone().unwrap_or_else(|| (0..n).collect());
    Ok(match canon {
        "no-trade" => Box::new(NoTrade),
        "serial-dictatorship" => Box::new(SerialDictatorship::new(order())),
        "msir" => Box::new(MultipleSerialIr::new(order(), options.guards.max_allocations)),
        "bossy-hybrid" => Box::new(BossyHybrid),
        "cttc" => Box::new(Cttc),
        "bttc" => Box::new(Bttc),
        "bttc-stepwise" => Box::new(BttcStepwise),
        "y-unanimity" => {
            let target = options
                .target
                .clone()
                .ok_or_else(|| RegistryError::MissingTarget(canon.to_string()))?;
            Box::new(YRestrictedUnanimity::new(target))
        }
        "house-then-car" => Box::new(HouseThenPenalizedCar),
        _ => unreachable!("registry names are exhaustive"),
    })
}
