use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Verdict;
use crate::error::{GuardError, MechanismError};
use crate::mechanisms::Mechanism;
use crate::model::{is_monotonic_transform, Allocation, AllocationSpace, Guards, Market, ProfileDomain};

/// A finite profile domain together with every allocation and, for each agent and
/// preference option, the rank of the agent's allotment in each allocation.
#[derive(Debug)]
pub struct DomainModel {
    domain: ProfileDomain,
    space: AllocationSpace,
    ranks: Vec<Vec<Vec<u32>>>,
}

impl DomainModel {
    pub fn new(domain: ProfileDomain, guards: &Guards) -> Result<Self, GuardError> {
        let space = AllocationSpace::new(domain.shape(), guards.max_allocations)?;
        let ranks = (0..domain.shape().agents())
            .map(|i| {
                domain
                    .options(i)
                    .iter()
                    .map(|pref| {
                        (0..space.len())
                            .map(|a| pref.rank(space.allotment_index(a, i)) as u32)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { domain, space, ranks })
    }

    pub fn domain(&self) -> &ProfileDomain {
        &self.domain
    }

    pub fn space(&self) -> &AllocationSpace {
        &self.space
    }

    pub fn agents(&self) -> usize {
        self.domain.shape().agents()
    }

    /// Rank (0 = best) of agent `agent`'s allotment in allocation `alloc` under option
    /// `option`.
    pub fn rank(&self, agent: usize, option: usize, alloc: usize) -> u32 {
        self.ranks[agent][option][alloc]
    }

    pub fn allotment(&self, alloc: usize, agent: usize) -> usize {
        self.space.allotment_index(alloc, agent)
    }
}

/// The allocation index a mechanism selects at every profile of a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeTable {
    pub outcomes: Vec<u32>,
}

impl OutcomeTable {
    /// Runs the mechanism on every profile, in parallel; the table is in profile order.
    pub fn build(mechanism: &dyn Mechanism, model: &DomainModel) -> Result<Self, MechanismError> {
        let outcomes = (0..model.domain.len())
            .into_par_iter()
            .map(|p| {
                let alloc = mechanism.allocate(&model.domain.market(p))?;
                Ok(model.space.index_of(&alloc).expect("mechanism output is feasible") as u32)
            })
            .collect::<Result<Vec<u32>, MechanismError>>()?;
        Ok(Self { outcomes })
    }

    pub fn get(&self, profile: usize) -> usize {
        self.outcomes[profile] as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationKind {
    StrategyProofness,
    GroupStrategyProofness,
    NonBossiness,
    Monotonicity,
}

impl fmt::Display for DeviationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviationKind::StrategyProofness => "strategy-proofness",
            DeviationKind::GroupStrategyProofness => "group strategy-proofness",
            DeviationKind::NonBossiness => "non-bossiness",
            DeviationKind::Monotonicity => "monotonicity",
        })
    }
}

/// A change of reported preferences by `coalition` that breaks an incentive property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationWitness {
    pub property: DeviationKind,
    pub coalition: Vec<usize>,
    pub honest: Market,
    pub reported: Market,
    pub honest_outcome: Allocation,
    pub reported_outcome: Allocation,
}

impl DeviationWitness {
    fn from_profiles(
        property: DeviationKind,
        coalition: Vec<usize>,
        model: &DomainModel,
        table: &OutcomeTable,
        honest: usize,
        reported: usize,
    ) -> Self {
        Self {
            property,
            coalition,
            honest: model.domain.market(honest),
            reported: model.domain.market(reported),
            honest_outcome: model.space.get(table.get(honest)).clone(),
            reported_outcome: model.space.get(table.get(reported)).clone(),
        }
    }

    /// Recomputes both outcomes with `mechanism` and checks the definition of the violated
    /// property, comparing allotments with the honest preferences.
    pub fn certifies(&self, mechanism: &dyn Mechanism) -> bool {
        let (Ok(x), Ok(y)) = (mechanism.allocate(&self.honest), mechanism.allocate(&self.reported)) else {
            return false;
        };
        if x != self.honest_outcome || y != self.reported_outcome {
            return false;
        }
        let n = self.honest.agents();
        let changed: Vec<usize> = (0..n)
            .filter(|&i| self.honest.preference(i).order() != self.reported.preference(i).order())
            .collect();
        if changed.iter().any(|i| !self.coalition.contains(i)) || !self.coalition.iter().all_unique() {
            return false;
        }
        let honest = |i: usize| self.honest.preference(i);
        match self.property {
            DeviationKind::StrategyProofness => {
                let [i] = self.coalition[..] else { return false };
                honest(i).prefers(y.allotment(i), x.allotment(i))
            }
            DeviationKind::GroupStrategyProofness => {
                !self.coalition.is_empty()
                    && self
                        .coalition
                        .iter()
                        .all(|&i| honest(i).weakly_prefers(y.allotment(i), x.allotment(i)))
                    && self
                        .coalition
                        .iter()
                        .any(|&i| honest(i).prefers(y.allotment(i), x.allotment(i)))
            }
            DeviationKind::NonBossiness => {
                let [i] = self.coalition[..] else { return false };
                x.allotment(i) == y.allotment(i) && x != y
            }
            DeviationKind::Monotonicity => {
                let [i] = self.coalition[..] else { return false };
                is_monotonic_transform(self.reported.preference(i), honest(i), x.allotment(i)) && x != y
            }
        }
    }
}

/// Scans profiles in order, and for each profile agents and options in order, returning
/// the first unilateral deviation satisfying `bad`.
fn unilateral_scan(
    model: &DomainModel,
    table: &OutcomeTable,
    kind: DeviationKind,
    bad: impl Fn(usize, usize, usize, usize) -> bool + Sync,
) -> Verdict<DeviationWitness> {
    let domain = &model.domain;
    let found = (0..domain.len()).into_par_iter().find_map_first(|p| {
        let choices = domain.choices(p);
        (0..model.agents()).find_map(|i| {
            (0..domain.options(i).len())
                .filter(|&o| o != choices[i])
                .map(|o| domain.deviate(p, i, o))
                .find(|&q| bad(p, q, i, choices[i]))
                .map(|q| (i, q))
        })
        .map(|(i, q)| (p, i, q))
    });
    match found {
        None => Verdict::Satisfied,
        Some((p, i, q)) => Verdict::Violated(DeviationWitness::from_profiles(kind, vec![i], model, table, p, q)),
    }
}

/// No agent strictly gains by misreporting.
pub fn strategy_proofness(model: &DomainModel, table: &OutcomeTable) -> Verdict<DeviationWitness> {
    unilateral_scan(model, table, DeviationKind::StrategyProofness, |p, q, i, c| {
        model.rank(i, c, table.get(q)) < model.rank(i, c, table.get(p))
    })
}

/// A misreport that leaves the deviator's allotment unchanged leaves the allocation
/// unchanged.
pub fn non_bossiness(model: &DomainModel, table: &OutcomeTable) -> Verdict<DeviationWitness> {
    unilateral_scan(model, table, DeviationKind::NonBossiness, |p, q, i, _| {
        let (x, y) = (table.get(p), table.get(q));
        x != y && model.allotment(x, i) == model.allotment(y, i)
    })
}

/// No coalition can misreport so that every member weakly gains and one strictly gains.
///
/// Coalitions are scanned by size, then lexicographically; within a coalition, honest
/// profiles in index order and, for each, reports in index order.
pub fn group_strategy_proofness(
    model: &DomainModel,
    table: &OutcomeTable,
    guards: &Guards,
) -> Result<Verdict<DeviationWitness>, GuardError> {
    let n = model.agents();
    let domain = &model.domain;
    let coalitions: Vec<Vec<usize>> = (1..=n).flat_map(|k| (0..n).combinations(k)).collect();
    let checks = coalitions.len() as u128 * domain.len() as u128 * model.space.len() as u128;
    if checks > guards.max_pair_checks as u128 {
        return Err(GuardError::new(
            format!("scan coalition deviations at {}", domain.shape()),
            format!("{checks} comparisons"),
            format!("{} comparisons", guards.max_pair_checks),
        ));
    }
    for coalition in coalitions {
        let outside: Vec<usize> = (0..n).filter(|i| !coalition.contains(i)).collect();
        // Group profiles by the reports of agents outside the coalition; for each group
        // keep the distinct outcomes with the first profile reaching each.
        let mut groups: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for q in 0..domain.len() {
            let choices = domain.choices(q);
            let key: Vec<usize> = outside.iter().map(|&i| choices[i]).collect();
            let reach = groups.entry(key).or_default();
            let out = table.get(q);
            if !reach.iter().any(|&(o, _)| o == out) {
                reach.push((out, q));
            }
        }
        let found = (0..domain.len()).into_par_iter().find_map_first(|p| {
            let choices = domain.choices(p);
            let key: Vec<usize> = outside.iter().map(|&i| choices[i]).collect();
            let x = table.get(p);
            groups[&key]
                .iter()
                .filter(|&&(y, _)| {
                    let mut strict = false;
                    for &i in &coalition {
                        let (rx, ry) = (model.rank(i, choices[i], x), model.rank(i, choices[i], y));
                        if ry > rx {
                            return false;
                        }
                        strict |= ry < rx;
                    }
                    strict
                })
                .min_by_key(|&&(_, q)| q)
                .map(|&(_, q)| (p, q))
        });
        if let Some((p, q)) = found {
            return Ok(Verdict::Violated(DeviationWitness::from_profiles(
                DeviationKind::GroupStrategyProofness,
                coalition,
                model,
                table,
                p,
                q,
            )));
        }
    }
    Ok(Verdict::Satisfied)
}

/// The outcome is unchanged under monotonic transformations of preferences at the
/// selected allocation.
///
/// A joint transformation is a chain of unilateral ones, each again monotonic at the same
/// allocation, so scanning unilateral changes decides the property.
pub fn monotonicity(model: &DomainModel, table: &OutcomeTable) -> Verdict<DeviationWitness> {
    let domain = &model.domain;
    let shape = domain.shape();
    // transforms[i][c][b]: options of agent i that are monotonic transformations of option
    // c at bundle b.
    let bundles = shape.bundle_count().expect("allocation space fits");
    let transforms: Vec<Vec<Vec<Vec<usize>>>> = (0..model.agents())
        .map(|i| {
            let opts = domain.options(i);
            opts.par_iter()
                .map(|old| {
                    (0..bundles)
                        .map(|b| {
                            let at = shape.bundle_at(b);
                            (0..opts.len())
                                .filter(|&o| opts[o].order() != old.order() && is_monotonic_transform(&opts[o], old, &at))
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let found = (0..domain.len()).into_par_iter().find_map_first(|p| {
        let choices = domain.choices(p);
        let x = table.get(p);
        (0..model.agents()).find_map(|i| {
            transforms[i][choices[i]][model.allotment(x, i)]
                .iter()
                .map(|&o| domain.deviate(p, i, o))
                .find(|&q| table.get(q) != x)
                .map(|q| (p, i, q))
        })
    });
    match found {
        None => Verdict::Satisfied,
        Some((p, i, q)) => Verdict::Violated(DeviationWitness::from_profiles(
            DeviationKind::Monotonicity,
            vec![i],
            model,
            table,
            p,
            q,
        )),
    }
}

/// Status of an implication checked over a finite domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Implication<W> {
    /// Antecedent and consequent both hold.
    Holds,
    /// The antecedent fails, so the implication is vacuous.
    NotApplicable,
    Violated(W),
}

impl<W> Implication<W> {
    pub fn is_violated(&self) -> bool {
        matches!(self, Implication::Violated(_))
    }
}

/// A unilateral change of the most important marginal after which the deviator keeps its
/// object of that type but the allocation changes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingTypeWitness {
    pub agent: usize,
    pub honest: Market,
    pub reported: Market,
    pub honest_outcome: Allocation,
    pub reported_outcome: Allocation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub strategy_proof: bool,
    pub non_bossy: bool,
    /// Strategy-proofness and non-bossiness imply monotonicity.
    pub sp_nb_monotonic: Implication<DeviationWitness>,
    /// On lexicographic domains, for strategy-proof and non-bossy mechanisms: a change of
    /// only the leading-type marginal that leaves the deviator's leading-type object in
    /// place leaves the allocation in place. `None` outside lexicographic domains.
    pub leading_type_invariance: Option<Implication<LeadingTypeWitness>>,
}

pub fn lemma_checks(model: &DomainModel, table: &OutcomeTable) -> LemmaReport {
    let sp = strategy_proofness(model, table).is_satisfied();
    let nb = non_bossiness(model, table).is_satisfied();
    let sp_nb_monotonic = if sp && nb {
        match monotonicity(model, table) {
            Verdict::Satisfied => Implication::Holds,
            Verdict::Violated(w) => Implication::Violated(w),
        }
    } else {
        Implication::NotApplicable
    };
    let leading_type_invariance = model.domain.tag().is_lexicographic().then(|| {
        if sp && nb {
            match leading_type_violation(model, table) {
                None => Implication::Holds,
                Some(w) => Implication::Violated(w),
            }
        } else {
            Implication::NotApplicable
        }
    });
    LemmaReport {
        strategy_proof: sp,
        non_bossy: nb,
        sp_nb_monotonic,
        leading_type_invariance,
    }
}

fn leading_type_violation(model: &DomainModel, table: &OutcomeTable) -> Option<LeadingTypeWitness> {
    let domain = &model.domain;
    // Options sharing importance order and all marginals but the leading one.
    let key = |pref: &crate::model::Preference| {
        let pi = pref.importance().expect("lexicographic domain").to_vec();
        let marginals = pref.marginals().expect("lexicographic domain");
        let rest: Vec<Vec<usize>> = pi[1..].iter().map(|&t| marginals[t].ranking().to_vec()).collect();
        (pi, rest)
    };
    let partners: Vec<Vec<Vec<usize>>> = (0..model.agents())
        .map(|i| {
            let keys: Vec<_> = domain.options(i).iter().map(key).collect();
            (0..keys.len())
                .map(|c| (0..keys.len()).filter(|&o| o != c && keys[o] == keys[c]).collect())
                .collect()
        })
        .collect();
    let found = (0..domain.len()).into_par_iter().find_map_first(|p| {
        let choices = domain.choices(p);
        let x = table.get(p);
        (0..model.agents()).find_map(|i| {
            let lead = domain.options(i)[choices[i]].importance().unwrap()[0];
            let held = model.space.get(x).allotment(i).owner(lead);
            partners[i][choices[i]]
                .iter()
                .map(|&o| domain.deviate(p, i, o))
                .find(|&q| {
                    let y = table.get(q);
                    y != x && model.space.get(y).allotment(i).owner(lead) == held
                })
                .map(|q| (p, i, q))
        })
    })?;
    let (p, i, q) = found;
    Some(LeadingTypeWitness {
        agent: i,
        honest: domain.market(p),
        reported: domain.market(q),
        honest_outcome: model.space.get(table.get(p)).clone(),
        reported_outcome: model.space.get(table.get(q)).clone(),
    })
}
