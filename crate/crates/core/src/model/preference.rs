use std::sync::Arc;

use itertools::Itertools;

use super::{Bundle, MarketShape, TypedObject};
use crate::error::{ModelError, SeparabilityViolation};

/// Agent's ranking of the type-`ty` objects, best first, by owner index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarginalPreference {
    ty: usize,
    ranking: Vec<usize>,
    rank: Vec<usize>,
}

impl MarginalPreference {
    pub fn new(ty: usize, ranking: Vec<usize>) -> Result<Self, ModelError> {
        let n = ranking.len();
        let mut rank = vec![usize::MAX; n];
        for (pos, &owner) in ranking.iter().enumerate() {
            if owner >= n || rank[owner] != usize::MAX {
                return Err(ModelError::InvalidMarginal { ty, ranking, n });
            }
            rank[owner] = pos;
        }
        Ok(Self { ty, ranking, rank })
    }

    pub fn ty(&self) -> usize {
        self.ty
    }

    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    /// Position of `owner`'s object, 0 = best.
    pub fn rank(&self, owner: usize) -> usize {
        self.rank[owner]
    }

    pub fn top(&self) -> usize {
        self.ranking[0]
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }

    /// Copy with `owner` moved to the bottom of the ranking.
    pub fn with_last(&self, owner: usize) -> Self {
        let mut ranking: Vec<usize> = self.ranking.iter().copied().filter(|&o| o != owner).collect();
        ranking.push(owner);
        Self::new(self.ty, ranking).expect("reordering keeps a permutation")
    }

    /// Whether `self` is a monotonic transformation of `old` at `at`: the lower contour set
    /// of `old` at `at` is contained in that of `self`.
    pub fn is_monotonic_transform_of(&self, old: &Self, at: usize) -> bool {
        old.ranking[old.rank[at]..]
            .iter()
            .all(|&o| self.rank[o] >= self.rank[at])
    }
}

/// Domain-specific structure carried by a preference on top of its full ranking.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    Strict,
    Separable {
        marginals: Vec<MarginalPreference>,
    },
    Lexicographic {
        marginals: Vec<MarginalPreference>,
        importance: Vec<usize>,
    },
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct PreferenceData {
    shape: MarketShape,
    order: Vec<usize>,
    rank: Vec<usize>,
    structure: Structure,
}

/// Strict ranking of all `n^m` bundles, optionally carrying separable or lexicographic
/// structure. Immutable and cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Preference(Arc<PreferenceData>);

impl Preference {
    /// A strict preference from a best-first list of bundles.
    pub fn strict(shape: MarketShape, order: Vec<Bundle>) -> Result<Self, ModelError> {
        for b in &order {
            shape.check_bundle(b)?;
        }
        let total = shape.dense_bundle_count()?;
        let mut seen = vec![false; total];
        let mut indices = Vec::with_capacity(order.len());
        for b in &order {
            let idx = shape.bundle_index(b);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(ModelError::DuplicateBundle(b.clone()));
            }
            indices.push(idx);
        }
        Self::from_indices(shape, indices)
    }

    /// A strict preference from a best-first list of bundle indices.
    pub fn from_indices(shape: MarketShape, order: Vec<usize>) -> Result<Self, ModelError> {
        let total = shape.dense_bundle_count()?;
        if order.len() != total {
            return Err(ModelError::IncompleteRanking {
                got: order.len(),
                expected: total,
            });
        }
        let mut rank = vec![usize::MAX; total];
        for (pos, &idx) in order.iter().enumerate() {
            if idx >= total {
                return Err(ModelError::InvalidBundle {
                    bundle: vec![idx],
                    n: shape.agents(),
                    m: shape.types(),
                });
            }
            if rank[idx] != usize::MAX {
                return Err(ModelError::DuplicateBundle(shape.bundle_at(idx)));
            }
            rank[idx] = pos;
        }
        Ok(Self(Arc::new(PreferenceData {
            shape,
            order,
            rank,
            structure: Structure::Strict,
        })))
    }

    fn with_structure(&self, structure: Structure) -> Self {
        Self(Arc::new(PreferenceData {
            shape: self.0.shape,
            order: self.0.order.clone(),
            rank: self.0.rank.clone(),
            structure,
        }))
    }

    /// Lexicographic preference: bundles sorted by the rank of their `importance[0]`-type
    /// object, ties broken by `importance[1]`, and so on.
    pub fn lexicographic(
        shape: MarketShape,
        marginals: Vec<MarginalPreference>,
        importance: Vec<usize>,
    ) -> Result<Self, ModelError> {
        check_marginals(shape, &marginals)?;
        if importance.len() != shape.types() || !importance.iter().all_unique()
            || importance.iter().any(|&t| t >= shape.types())
        {
            return Err(ModelError::InvalidImportance(importance));
        }
        let total = shape.dense_bundle_count()?;
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by_cached_key(|&idx| {
            let b = shape.bundle_at(idx);
            importance
                .iter()
                .map(|&t| marginals[t].rank(b.owner(t)))
                .collect::<Vec<_>>()
        });
        let base = Self::from_indices(shape, order)?;
        Ok(base.with_structure(Structure::Lexicographic {
            marginals,
            importance,
        }))
    }

    /// Lexicographic preference from its object listing: the objects of the most important
    /// type best first, then those of the next type, and so on.
    pub fn from_object_listing(shape: MarketShape, listing: &[TypedObject]) -> Result<Self, ModelError> {
        let (n, m) = (shape.agents(), shape.types());
        let bad = || ModelError::InvalidImportance(listing.iter().map(|o| o.ty).dedup().collect());
        if listing.len() != n * m {
            return Err(bad());
        }
        let mut importance = Vec::with_capacity(m);
        let mut marginals: Vec<Option<MarginalPreference>> = vec![None; m];
        for chunk in listing.chunks(n) {
            let ty = chunk[0].ty;
            if ty >= m || chunk.iter().any(|o| o.ty != ty) || marginals[ty].is_some() {
                return Err(bad());
            }
            marginals[ty] = Some(MarginalPreference::new(ty, chunk.iter().map(|o| o.owner).collect())?);
            importance.push(ty);
        }
        Self::lexicographic(shape, marginals.into_iter().map(Option::unwrap).collect(), importance)
    }

    /// Separable preference with declared marginals; the ranking must be consistent with
    /// them.
    pub fn separable(
        shape: MarketShape,
        marginals: Vec<MarginalPreference>,
        order: Vec<Bundle>,
    ) -> Result<Self, ModelError> {
        check_marginals(shape, &marginals)?;
        let validated = validate_separable(&Self::strict(shape, order)?)?;
        let derived = validated.marginals().expect("validated preference has marginals");
        if let Some(ty) = (0..shape.types()).find(|&t| derived[t] != marginals[t]) {
            return Err(ModelError::MarginalMismatch { ty });
        }
        Ok(validated)
    }

    pub fn shape(&self) -> MarketShape {
        self.0.shape
    }

    /// Bundle indices, best first.
    pub fn order(&self) -> &[usize] {
        &self.0.order
    }

    pub fn bundles(&self) -> impl Iterator<Item = Bundle> + '_ {
        self.0.order.iter().map(|&i| self.0.shape.bundle_at(i))
    }

    /// Position of bundle index `idx`, 0 = best.
    pub fn rank(&self, idx: usize) -> usize {
        self.0.rank[idx]
    }

    pub fn rank_of(&self, bundle: &Bundle) -> usize {
        self.rank(self.0.shape.bundle_index(bundle))
    }

    /// `a P b`.
    pub fn prefers(&self, a: &Bundle, b: &Bundle) -> bool {
        self.rank_of(a) < self.rank_of(b)
    }

    /// `a R b`.
    pub fn weakly_prefers(&self, a: &Bundle, b: &Bundle) -> bool {
        self.rank_of(a) <= self.rank_of(b)
    }

    pub fn top(&self) -> Bundle {
        self.0.shape.bundle_at(self.0.order[0])
    }

    pub fn structure(&self) -> &Structure {
        &self.0.structure
    }

    pub fn marginals(&self) -> Option<&[MarginalPreference]> {
        match &self.0.structure {
            Structure::Strict => None,
            Structure::Separable { marginals } | Structure::Lexicographic { marginals, .. } => {
                Some(marginals)
            }
        }
    }

    pub fn importance(&self) -> Option<&[usize]> {
        match &self.0.structure {
            Structure::Lexicographic { importance, .. } => Some(importance),
            _ => None,
        }
    }

    /// Same ranking without any structure.
    pub fn as_strict(&self) -> Self {
        self.with_structure(Structure::Strict)
    }

    /// Agents ordered by how this preference ranks their full endowments, best first.
    pub fn restrict_to_endowments(&self) -> Vec<usize> {
        let shape = self.0.shape;
        let mut agents: Vec<usize> = (0..shape.agents()).collect();
        agents.sort_by_key(|&j| self.rank(shape.endowment_index(j)));
        agents
    }

    /// Importance order whose lexicographic ranking equals this preference, if any.
    pub fn detect_lexicographic(&self) -> Option<Vec<usize>> {
        detect_lexicographic(self)
    }
}

fn check_marginals(shape: MarketShape, marginals: &[MarginalPreference]) -> Result<(), ModelError> {
    if marginals.len() != shape.types() {
        return Err(ModelError::MarginalCount {
            got: marginals.len(),
            expected: shape.types(),
        });
    }
    for (t, mp) in marginals.iter().enumerate() {
        if mp.ty != t || mp.ranking.len() != shape.agents() {
            return Err(ModelError::InvalidMarginal {
                ty: t,
                ranking: mp.ranking.clone(),
                n: shape.agents(),
            });
        }
    }
    Ok(())
}

/// Marginals read off single-type deviations from `baseline`.
fn marginals_around(pref: &Preference, baseline: &Bundle) -> Vec<MarginalPreference> {
    let shape = pref.shape();
    (0..shape.types())
        .map(|t| {
            let mut owners: Vec<usize> = (0..shape.agents()).collect();
            owners.sort_by_key(|&o| pref.rank_of(&baseline.with(t, o)));
            MarginalPreference::new(t, owners).expect("sorted owners form a permutation")
        })
        .collect()
}

/// Checks that `pref` is separable and returns it with its marginals attached.
///
/// Marginals are extracted from bundles differing from the top bundle in one type; the
/// dominance condition is then verified over all bundle pairs.
pub fn validate_separable(pref: &Preference) -> Result<Preference, SeparabilityViolation> {
    let shape = pref.shape();
    let marginals = marginals_around(pref, &pref.top());
    let total = pref.order().len();
    let bundles: Vec<Bundle> = (0..total).map(|i| shape.bundle_at(i)).collect();
    let keys: Vec<Vec<usize>> = bundles
        .iter()
        .map(|b| (0..shape.types()).map(|t| marginals[t].rank(b.owner(t))).collect())
        .collect();
    // Walk the ranking best first; a bundle may not dominate anything placed above it.
    for (pos, &y) in pref.order().iter().enumerate() {
        for &x in &pref.order()[pos + 1..] {
            if keys[x].iter().zip(&keys[y]).all(|(a, b)| a <= b) {
                return Err(SeparabilityViolation {
                    dominating: bundles[x].clone(),
                    dominated: bundles[y].clone(),
                });
            }
        }
    }
    debug_assert_eq!(
        marginals,
        marginals_around(pref, &shape.bundle_at(*pref.order().last().unwrap())),
        "separable marginals must not depend on the baseline bundle"
    );
    Ok(match pref.structure() {
        Structure::Strict => pref.with_structure(Structure::Separable { marginals }),
        _ => pref.clone(),
    })
}

/// The importance order whose lexicographic ranking reproduces `pref`, if one exists.
pub fn detect_lexicographic(pref: &Preference) -> Option<Vec<usize>> {
    if let Some(importance) = pref.importance() {
        return Some(importance.to_vec());
    }
    let separable = validate_separable(pref).ok()?;
    let marginals = separable.marginals()?.to_vec();
    let shape = pref.shape();
    (0..shape.types()).permutations(shape.types()).find(|pi| {
        Preference::lexicographic(shape, marginals.clone(), pi.clone())
            .map(|lex| lex.order() == pref.order())
            .unwrap_or(false)
    })
}

/// Whether `new` is a monotonic transformation of `old` at `at`:
/// `L(at, old) ⊆ L(at, new)`.
pub fn is_monotonic_transform(new: &Preference, old: &Preference, at: &Bundle) -> bool {
    let idx = old.shape().bundle_index(at);
    let (r_old, r_new) = (old.rank(idx), new.rank(idx));
    old.order()[r_old..].iter().all(|&y| new.rank(y) >= r_new)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: usize, m: usize) -> MarketShape {
        MarketShape::new(n, m).unwrap()
    }

    fn b(owners: &[usize]) -> Bundle {
        Bundle::from_owners(owners.to_vec())
    }

    fn mp(ty: usize, ranking: &[usize]) -> MarginalPreference {
        MarginalPreference::new(ty, ranking.to_vec()).unwrap()
    }

    #[test]
    fn strict_rejects_duplicates() {
        let s = shape(2, 1);
        let err = Preference::strict(s, vec![b(&[1]), b(&[1])]).unwrap_err();
        assert_eq!(err, ModelError::DuplicateBundle(b(&[1])));
        let err = Preference::strict(s, vec![b(&[1])]).unwrap_err();
        assert!(matches!(err, ModelError::IncompleteRanking { got: 1, expected: 2 }));
    }

    #[test]
    fn non_separable_order_is_rejected_with_pair() {
        // (0,0) > (1,1) > (1,0) > (0,1): (1,0) beats (1,1) on type 1 but sits below it.
        let s = shape(2, 2);
        let p = Preference::strict(s, vec![b(&[0, 0]), b(&[1, 1]), b(&[1, 0]), b(&[0, 1])]).unwrap();
        let err = validate_separable(&p).unwrap_err();
        assert_eq!(err.dominating, b(&[1, 0]));
        assert_eq!(err.dominated, b(&[1, 1]));
    }

    #[test]
    fn lexicographic_is_separable_with_same_marginals() {
        let s = shape(2, 2);
        // H2 > H1, C1 > C2, houses first.
        let marginals = vec![mp(0, &[1, 0]), mp(1, &[0, 1])];
        let lex = Preference::lexicographic(s, marginals.clone(), vec![0, 1]).unwrap();
        let order: Vec<Bundle> = lex.bundles().collect();
        assert_eq!(order, vec![b(&[1, 0]), b(&[1, 1]), b(&[0, 0]), b(&[0, 1])]);
        let sep = validate_separable(&lex.as_strict()).unwrap();
        assert_eq!(sep.marginals().unwrap(), marginals.as_slice());
    }

    #[test]
    fn lexicographic_second_type_first() {
        // marginals (1>0, 0>1), importance (type 1, type 0), sorted by hand.
        let s = shape(2, 2);
        let lex = Preference::lexicographic(s, vec![mp(0, &[1, 0]), mp(1, &[0, 1])], vec![1, 0]).unwrap();
        let order: Vec<Bundle> = lex.bundles().collect();
        assert_eq!(order, vec![b(&[1, 0]), b(&[0, 0]), b(&[1, 1]), b(&[0, 1])]);
        assert_eq!(detect_lexicographic(&lex.as_strict()), Some(vec![1, 0]));
    }

    #[test]
    fn single_type_lexicographic_is_the_marginal() {
        let s = shape(3, 1);
        let lex = Preference::lexicographic(s, vec![mp(0, &[2, 0, 1])], vec![0]).unwrap();
        assert_eq!(lex.order(), &[2, 0, 1]);
    }

    #[test]
    fn three_type_listing_from_the_impossibility_profile() {
        // o_2^1, o_1^1, o_1^3, o_2^3, o_2^2, o_1^2 : type 1, then 3, then 2.
        let s = shape(2, 3);
        let lex = Preference::lexicographic(s, vec![mp(0, &[1, 0]), mp(1, &[1, 0]), mp(2, &[0, 1])], vec![0, 2, 1])
            .unwrap();
        assert!(validate_separable(&lex.as_strict()).is_ok());
        assert_eq!(lex.top(), b(&[1, 1, 0]));
        assert_eq!(detect_lexicographic(&lex.as_strict()), Some(vec![0, 2, 1]));
    }

    #[test]
    fn declared_marginals_must_match() {
        let s = shape(2, 2);
        let lex = Preference::lexicographic(s, vec![mp(0, &[1, 0]), mp(1, &[0, 1])], vec![0, 1]).unwrap();
        let order: Vec<Bundle> = lex.bundles().collect();
        let err = Preference::separable(s, vec![mp(0, &[0, 1]), mp(1, &[0, 1])], order.clone()).unwrap_err();
        assert_eq!(err, ModelError::MarginalMismatch { ty: 0 });
        assert!(Preference::separable(s, vec![mp(0, &[1, 0]), mp(1, &[0, 1])], order).is_ok());
    }

    #[test]
    fn restriction_orders_endowments() {
        let s = shape(3, 2);
        // houses first, H2 > H3 > H1.
        let lex = Preference::lexicographic(s, vec![mp(0, &[1, 2, 0]), mp(1, &[2, 1, 0])], vec![0, 1]).unwrap();
        assert_eq!(lex.restrict_to_endowments(), vec![1, 2, 0]);
    }

    #[test]
    fn monotonic_transform_basics() {
        let s = shape(2, 2);
        let p = Preference::lexicographic(s, vec![mp(0, &[1, 0]), mp(1, &[0, 1])], vec![0, 1]).unwrap();
        let q = Preference::lexicographic(s, vec![mp(0, &[0, 1]), mp(1, &[1, 0])], vec![1, 0]).unwrap();
        for idx in 0..4 {
            let at = s.bundle_at(idx);
            assert!(is_monotonic_transform(&p, &p, &at));
        }
        let bottom = p.bundles().last().unwrap();
        assert!(is_monotonic_transform(&q, &p, &bottom));
    }

    #[test]
    fn marginal_monotonic_transform() {
        let old = mp(0, &[0, 1, 2]);
        assert!(mp(0, &[1, 0, 2]).is_monotonic_transform_of(&old, 1));
        assert!(!mp(0, &[1, 0, 2]).is_monotonic_transform_of(&old, 0));
        assert!(!mp(0, &[0, 2, 1]).is_monotonic_transform_of(&old, 1));
        assert_eq!(old.with_last(0).ranking(), &[1, 2, 0]);
    }
}
