use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::MarketShape;
use crate::error::{GuardError, ModelError};

/// Object `o^t_owner`: the type-`ty` object initially owned by agent `owner`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypedObject {
    pub ty: usize,
    pub owner: usize,
}

/// One object of each type, identified by the owner index of each component.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bundle(Vec<usize>);

impl Bundle {
    pub fn from_owners(owners: Vec<usize>) -> Self {
        Self(owners)
    }

    pub fn owners(&self) -> &[usize] {
        &self.0
    }

    pub fn owner(&self, ty: usize) -> usize {
        self.0[ty]
    }

    pub fn types(&self) -> usize {
        self.0.len()
    }

    /// Copy of this bundle with the type-`ty` object replaced by owner `owner`'s.
    pub fn with(&self, ty: usize, owner: usize) -> Self {
        let mut owners = self.0.clone();
        owners[ty] = owner;
        Self(owners)
    }

    pub fn objects(&self) -> impl Iterator<Item = TypedObject> + '_ {
        self.0
            .iter()
            .enumerate()
            .map(|(ty, &owner)| TypedObject { ty, owner })
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// Assignment of one bundle to every agent such that each object is used exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation {
    rows: Vec<Bundle>,
}

impl Allocation {
    pub fn new(shape: MarketShape, rows: Vec<Bundle>) -> Result<Self, ModelError> {
        if rows.len() != shape.agents() {
            return Err(ModelError::AllocationRows {
                got: rows.len(),
                expected: shape.agents(),
            });
        }
        for row in &rows {
            shape.check_bundle(row)?;
        }
        let alloc = Self { rows };
        for ty in 0..shape.types() {
            let column = alloc.column(ty);
            if !is_permutation(&column) {
                return Err(ModelError::InfeasibleAllocation { ty, column });
            }
        }
        Ok(alloc)
    }

    /// Builds an allocation from per-type columns: `columns[t][i]` is the owner of agent
    /// `i`'s type-`t` object.
    pub fn from_columns(shape: MarketShape, columns: &[Vec<usize>]) -> Result<Self, ModelError> {
        if columns.len() != shape.types() {
            return Err(ModelError::MarginalCount {
                got: columns.len(),
                expected: shape.types(),
            });
        }
        let rows = (0..shape.agents())
            .map(|i| Bundle(columns.iter().map(|c| c.get(i).copied().unwrap_or(usize::MAX)).collect()))
            .collect();
        Self::new(shape, rows)
    }

    /// The endowment allocation `e`.
    pub fn endowment(shape: MarketShape) -> Self {
        Self {
            rows: (0..shape.agents()).map(|i| shape.endowment(i)).collect(),
        }
    }

    pub fn agents(&self) -> usize {
        self.rows.len()
    }

    pub fn types(&self) -> usize {
        self.rows.first().map_or(0, Bundle::types)
    }

    pub fn allotment(&self, agent: usize) -> &Bundle {
        &self.rows[agent]
    }

    pub fn rows(&self) -> &[Bundle] {
        &self.rows
    }

    pub fn column(&self, ty: usize) -> Vec<usize> {
        self.rows.iter().map(|b| b.owner(ty)).collect()
    }

    /// Whether every type column is a permutation of the owners.
    pub fn is_feasible(&self) -> bool {
        (0..self.types()).all(|t| is_permutation(&self.column(t)))
            && self.rows.iter().all(|r| r.types() == self.types())
    }

    /// Agents `i` and `j` exchange their objects of the listed types.
    pub fn swap_types(&self, i: usize, j: usize, types: &[usize]) -> Self {
        let mut rows = self.rows.clone();
        for &t in types {
            let (a, b) = (rows[i].0[t], rows[j].0[t]);
            rows[i].0[t] = b;
            rows[j].0[t] = a;
        }
        Self { rows }
    }

    /// Agents `i` and `j` exchange their whole allotments.
    pub fn swap_bundles(&self, i: usize, j: usize) -> Self {
        let mut rows = self.rows.clone();
        rows.swap(i, j);
        Self { rows }
    }

    /// Allotment of each member of `cycle` passes to the previous member:
    /// `cycle[l]` receives the allotment of `cycle[l + 1]` (indices mod the length).
    pub fn rotate(&self, cycle: &[usize]) -> Self {
        let mut rows = self.rows.clone();
        for (l, &agent) in cycle.iter().enumerate() {
            rows[agent] = self.rows[cycle[(l + 1) % cycle.len()]].clone();
        }
        Self { rows }
    }

    /// Types whose columns differ between `self` and `other`.
    pub fn differing_types(&self, other: &Self) -> Vec<usize> {
        (0..self.types())
            .filter(|&t| self.column(t) != other.column(t))
            .collect()
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.rows.iter().join(","))
    }
}

fn is_permutation(values: &[usize]) -> bool {
    let mut seen = vec![false; values.len()];
    values.iter().all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// Every feasible allocation of a shape, materialized in canonical order.
///
/// Allocation index is a mixed-radix number over types (type 0 most significant) whose
/// digits are the lexicographic ranks of the per-type column permutations, so index 0 is
/// the endowment allocation.
#[derive(Clone, Debug)]
pub struct AllocationSpace {
    shape: MarketShape,
    perm_rank: HashMap<Vec<usize>, usize>,
    allocations: Vec<Allocation>,
    allotments: Vec<u32>,
}

impl AllocationSpace {
    pub fn new(shape: MarketShape, limit: usize) -> Result<Self, GuardError> {
        let count = shape.allocation_count();
        match count {
            Some(c) if c <= limit as u128 => {}
            _ => {
                return Err(GuardError::new(
                    format!("materialize all allocations at {shape}"),
                    count.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string()),
                    limit,
                ))
            }
        }
        let perms = permutations(shape.agents());
        let perm_rank = perms
            .iter()
            .enumerate()
            .map(|(r, p)| (p.clone(), r))
            .collect();
        let allocations: Vec<Allocation> = (0..shape.types())
            .map(|_| perms.iter())
            .multi_cartesian_product()
            .map(|cols| {
                let cols: Vec<Vec<usize>> = cols.into_iter().cloned().collect();
                Allocation::from_columns(shape, &cols).expect("permutation columns are feasible")
            })
            .collect();
        let allotments = allocations
            .iter()
            .flat_map(|a| a.rows().iter().map(|b| shape.bundle_index(b) as u32))
            .collect();
        Ok(Self {
            shape,
            perm_rank,
            allocations,
            allotments,
        })
    }

    pub fn shape(&self) -> MarketShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.allocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allocations.is_empty()
    }

    pub fn get(&self, index: usize) -> &Allocation {
        &self.allocations[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Allocation> {
        self.allocations.iter()
    }

    pub fn index_of(&self, alloc: &Allocation) -> Option<usize> {
        let radix = self.perm_rank.len();
        (0..self.shape.types()).try_fold(0, |acc, t| {
            self.perm_rank.get(&alloc.column(t)).map(|r| acc * radix + r)
        })
    }

    /// Bundle index of agent `agent`'s allotment in allocation `index`.
    pub fn allotment_index(&self, index: usize, agent: usize) -> usize {
        self.allotments[index * self.shape.agents() + agent] as usize
    }
}
