use std::fmt;

use serde::{Deserialize, Serialize};

use super::Bundle;
use crate::error::ModelError;

/// Largest bundle space we are willing to index with a dense ranking.
pub(crate) const MAX_BUNDLES: usize = 1 << 20;

/// Number of agents `n` and object types `m` of a market.
///
/// Agent `i` owns the object of owner index `i` in every type, so the market is fully
/// described by its shape and a preference profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarketShape {
    n: usize,
    m: usize,
}

impl MarketShape {
    pub fn new(n: usize, m: usize) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewAgents(n));
        }
        if m < 1 {
            return Err(ModelError::NoTypes);
        }
        Ok(Self { n, m })
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn types(&self) -> usize {
        self.m
    }

    /// `n^m`, or `None` if it overflows.
    pub fn bundle_count(&self) -> Option<usize> {
        self.n.checked_pow(u32::try_from(self.m).ok()?)
    }

    /// `(n!)^m`, or `None` if it overflows.
    pub fn allocation_count(&self) -> Option<u128> {
        let fact = (1..=self.n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))?;
        fact.checked_pow(u32::try_from(self.m).ok()?)
    }

    pub(crate) fn dense_bundle_count(&self) -> Result<usize, ModelError> {
        match self.bundle_count() {
            Some(c) if c <= MAX_BUNDLES => Ok(c),
            _ => Err(ModelError::ShapeTooLarge {
                n: self.n,
                m: self.m,
            }),
        }
    }

    /// Position of `bundle` in the type-lexicographic listing of all bundles.
    pub fn bundle_index(&self, bundle: &Bundle) -> usize {
        bundle.owners().iter().fold(0, |acc, &o| acc * self.n + o)
    }

    pub fn bundle_at(&self, mut index: usize) -> Bundle {
        let mut owners = vec![0; self.m];
        for slot in owners.iter_mut().rev() {
            *slot = index % self.n;
            index /= self.n;
        }
        Bundle::from_owners(owners)
    }

    /// Agent `agent`'s full endowment `e_agent`.
    pub fn endowment(&self, agent: usize) -> Bundle {
        Bundle::from_owners(vec![agent; self.m])
    }

    pub fn endowment_index(&self, agent: usize) -> usize {
        self.bundle_index(&self.endowment(agent))
    }

    pub fn check_bundle(&self, bundle: &Bundle) -> Result<(), ModelError> {
        if bundle.types() != self.m || bundle.owners().iter().any(|&o| o >= self.n) {
            return Err(ModelError::InvalidBundle {
                bundle: bundle.owners().to_vec(),
                n: self.n,
                m: self.m,
            });
        }
        Ok(())
    }
}

impl fmt::Display for MarketShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, m={}", self.n, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_shapes() {
        assert_eq!(MarketShape::new(1, 2), Err(ModelError::TooFewAgents(1)));
        assert_eq!(MarketShape::new(2, 0), Err(ModelError::NoTypes));
    }

    #[test]
    fn counts() {
        let s = MarketShape::new(3, 2).unwrap();
        assert_eq!(s.bundle_count(), Some(9));
        assert_eq!(s.allocation_count(), Some(36));
        let s = MarketShape::new(2, 3).unwrap();
        assert_eq!(s.bundle_count(), Some(8));
        assert_eq!(s.allocation_count(), Some(8));
    }

    #[test]
    fn bundle_index_round_trip() {
        let s = MarketShape::new(3, 3).unwrap();
        for idx in 0..27 {
            assert_eq!(s.bundle_index(&s.bundle_at(idx)), idx);
        }
        assert_eq!(s.endowment_index(2), 26);
    }
}
