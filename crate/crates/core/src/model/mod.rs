//! Agents, typed objects, bundles, allocations and preference domains.

mod allocation;
mod enumerate;
mod market;
mod preference;
mod shape;

pub use allocation::{permutations, Allocation, AllocationSpace, Bundle, TypedObject};
pub use enumerate::{enumerate_bundles, enumerate_preferences, Guards};
pub use market::{DomainTag, Market, ProfileDomain};
pub use preference::{
    detect_lexicographic, is_monotonic_transform, validate_separable, MarginalPreference, Preference, Structure,
};
pub use shape::MarketShape;
