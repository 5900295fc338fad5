use std::collections::HashSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{Bundle, DomainTag, MarginalPreference, MarketShape, Preference};
use crate::error::GuardError;

/// Upper bounds on the spaces the exhaustive tools are willing to materialize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guards {
    /// Largest `n^m` for which all strict rankings are enumerated.
    pub max_strict_bundles: usize,
    /// Largest `n^m` for which separable linear extensions are enumerated.
    pub max_separable_bundles: usize,
    /// Largest number of preferences per agent a profile domain may hold.
    pub max_preferences: usize,
    /// Largest number of profiles in a profile domain.
    pub max_profiles: usize,
    /// Largest `(n!)^m` for which all allocations are materialized.
    pub max_allocations: usize,
    /// Largest number of profile variables in a mechanism search.
    pub max_search_variables: usize,
    /// Largest number of profile pairs a coalition or monotonicity scan may compare.
    pub max_pair_checks: u64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            max_strict_bundles: 12,
            max_separable_bundles: 9,
            max_preferences: 100_000,
            max_profiles: 2_000_000,
            max_allocations: 20_736,
            max_search_variables: 10_000,
            max_pair_checks: 200_000_000,
        }
    }
}

impl Guards {
    pub fn unlimited() -> Self {
        Self {
            max_strict_bundles: usize::MAX,
            max_separable_bundles: usize::MAX,
            max_preferences: usize::MAX,
            max_profiles: usize::MAX,
            max_allocations: usize::MAX,
            max_search_variables: usize::MAX,
            max_pair_checks: u64::MAX,
        }
    }
}

/// All `n^m` bundles, type 0 most significant.
pub fn enumerate_bundles(shape: MarketShape) -> Vec<Bundle> {
    (0..shape.types())
        .map(|_| 0..shape.agents())
        .multi_cartesian_product()
        .map(Bundle::from_owners)
        .collect()
}

/// Every preference of the domain, in a fixed order.
///
/// Strict rankings come in lexicographic order of bundle indices. Separable and
/// lexicographic preferences iterate marginal combinations lexicographically (type 0 most
/// significant); separable ones then list the linear extensions of the dominance order
/// found by backtracking, always trying the smallest available bundle index first, and
/// lexicographic ones list importance orders lexicographically, dropping repeats. The
/// common-order lexicographic domain fixes the importance order to `0, 1, ..., m-1`.
pub fn enumerate_preferences(
    shape: MarketShape,
    tag: DomainTag,
    guards: &Guards,
) -> Result<Box<dyn Iterator<Item = Preference> + Send>, GuardError> {
    let bundles = shape.bundle_count().unwrap_or(usize::MAX);
    match tag {
        DomainTag::Strict => {
            if bundles > guards.max_strict_bundles {
                return Err(GuardError::new(
                    format!("enumerate strict preferences at {shape}"),
                    format!("{bundles} bundles"),
                    format!("{} bundles", guards.max_strict_bundles),
                ));
            }
            Ok(Box::new((0..bundles).permutations(bundles).map(move |order| {
                Preference::from_indices(shape, order).expect("permutation of bundle indices")
            })))
        }
        DomainTag::Separable => {
            if bundles > guards.max_separable_bundles {
                return Err(GuardError::new(
                    format!("enumerate separable preferences at {shape}"),
                    format!("{bundles} bundles"),
                    format!("{} bundles", guards.max_separable_bundles),
                ));
            }
            let mut out = Vec::new();
            for marginals in marginal_combinations(shape) {
                separable_extensions(shape, &marginals, guards.max_preferences, &mut out)?;
            }
            Ok(Box::new(out.into_iter()))
        }
        DomainTag::Lexicographic | DomainTag::LexCommon => {
            let per_type = (1..=shape.agents() as u128).product::<u128>();
            let orders = if tag == DomainTag::LexCommon {
                1
            } else {
                (1..=shape.types() as u128).product::<u128>()
            };
            let required = u32::try_from(shape.types())
                .ok()
                .and_then(|m| per_type.checked_pow(m))
                .and_then(|c| c.checked_mul(orders));
            if required.is_none_or(|r| r > guards.max_preferences as u128) {
                return Err(GuardError::new(
                    format!("enumerate {tag} preferences at {shape}"),
                    required.map_or_else(|| "more than 2^128".into(), |r| format!("{r} preferences")),
                    format!("{} preferences", guards.max_preferences),
                ));
            }
            shape.dense_bundle_count().map_err(|_| {
                GuardError::new(
                    format!("enumerate {tag} preferences at {shape}"),
                    format!("{bundles} bundles"),
                    format!("{} bundles", super::shape::MAX_BUNDLES),
                )
            })?;
            let importances: Vec<Vec<usize>> = if tag == DomainTag::LexCommon {
                vec![(0..shape.types()).collect()]
            } else {
                (0..shape.types()).permutations(shape.types()).collect()
            };
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for marginals in marginal_combinations(shape) {
                for pi in &importances {
                    let pref = Preference::lexicographic(shape, marginals.clone(), pi.clone())
                        .expect("valid marginals and importance");
                    if seen.insert(pref.order().to_vec()) {
                        out.push(pref);
                    }
                }
            }
            Ok(Box::new(out.into_iter()))
        }
    }
}

fn marginal_combinations(shape: MarketShape) -> impl Iterator<Item = Vec<MarginalPreference>> {
    let n = shape.agents();
    (0..shape.types())
        .map(move |_| (0..n).permutations(n))
        .multi_cartesian_product()
        .map(|rankings| {
            rankings
                .into_iter()
                .enumerate()
                .map(|(t, r)| MarginalPreference::new(t, r).expect("permutation"))
                .collect()
        })
}

fn separable_extensions(
    shape: MarketShape,
    marginals: &[MarginalPreference],
    limit: usize,
    out: &mut Vec<Preference>,
) -> Result<(), GuardError> {
    let total = shape.bundle_count().expect("guarded bundle count");
    let keys: Vec<Vec<usize>> = (0..total)
        .map(|i| {
            let b = shape.bundle_at(i);
            (0..shape.types()).map(|t| marginals[t].rank(b.owner(t))).collect()
        })
        .collect();
    // above[y] lists the bundles that must precede y.
    let above: Vec<Vec<usize>> = (0..total)
        .map(|y| {
            (0..total)
                .filter(|&x| x != y && keys[x].iter().zip(&keys[y]).all(|(a, b)| a <= b))
                .collect()
        })
        .collect();
    let mut blockers: Vec<usize> = above.iter().map(Vec::len).collect();
    let below: Vec<Vec<usize>> = (0..total)
        .map(|x| (0..total).filter(|&y| above[y].contains(&x)).collect())
        .collect();
    let mut placed = vec![false; total];
    let mut order = Vec::with_capacity(total);

    struct Ctx<'a> {
        shape: MarketShape,
        marginals: &'a [MarginalPreference],
        below: &'a [Vec<usize>],
        limit: usize,
    }

    fn extend(
        ctx: &Ctx<'_>,
        blockers: &mut [usize],
        placed: &mut [bool],
        order: &mut Vec<usize>,
        out: &mut Vec<Preference>,
    ) -> Result<(), GuardError> {
        if order.len() == placed.len() {
            if out.len() >= ctx.limit {
                return Err(GuardError::new(
                    format!("enumerate separable preferences at {}", ctx.shape),
                    format!("more than {} preferences", ctx.limit),
                    format!("{} preferences", ctx.limit),
                ));
            }
            let pref = Preference::from_indices(ctx.shape, order.clone())
                .expect("linear extension is a ranking");
            out.push(super::validate_separable(&pref).expect("linear extension of dominance"));
            debug_assert_eq!(out.last().unwrap().marginals(), Some(ctx.marginals));
            return Ok(());
        }
        for idx in 0..placed.len() {
            if placed[idx] || blockers[idx] > 0 {
                continue;
            }
            placed[idx] = true;
            order.push(idx);
            for &y in &ctx.below[idx] {
                blockers[y] -= 1;
            }
            let result = extend(ctx, blockers, placed, order, out);
            for &y in &ctx.below[idx] {
                blockers[y] += 1;
            }
            order.pop();
            placed[idx] = false;
            result?;
        }
        Ok(())
    }

    let ctx = Ctx {
        shape,
        marginals,
        below: &below,
        limit,
    };
    extend(&ctx, &mut blockers, &mut placed, &mut order, out)
}
