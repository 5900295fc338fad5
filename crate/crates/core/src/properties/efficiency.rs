use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::model::{Allocation, Bundle, Market};

/// Outcome of a property check: satisfied, or violated with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Satisfied,
    Violated(W),
}

impl<W> Verdict<W> {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Satisfied => None,
            Verdict::Violated(w) => Some(w),
        }
    }

    pub fn into_witness(self) -> Option<W> {
        match self {
            Verdict::Satisfied => None,
            Verdict::Violated(w) => Some(w),
        }
    }

    fn from_option(w: Option<W>) -> Self {
        w.map_or(Verdict::Satisfied, Verdict::Violated)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImprovementKind {
    Pareto,
    Coordinatewise,
    PairwiseCoordinatewise,
    Pairwise,
    Coalitional,
    TPrimePairwise,
    Unanimity,
}

impl fmt::Display for ImprovementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImprovementKind::Pareto => "Pareto improvement",
            ImprovementKind::Coordinatewise => "single-type Pareto improvement",
            ImprovementKind::PairwiseCoordinatewise => "single-type pairwise swap",
            ImprovementKind::Pairwise => "pairwise bundle swap",
            ImprovementKind::Coalitional => "coalitional bundle rotation",
            ImprovementKind::TPrimePairwise => "pairwise swap of a strict subset of types",
            ImprovementKind::Unanimity => "unanimously best allocation",
        })
    }
}

/// A reallocation showing that an allocation fails an efficiency property.
///
/// `agents` are the participants: the swapping pair, the rotation cycle in order, or the
/// agents strictly better off for Pareto-type and unanimity witnesses. `types` lists the
/// reallocated types for swap witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImprovementWitness {
    pub kind: ImprovementKind,
    pub improved: Allocation,
    pub agents: Vec<usize>,
    pub types: Vec<usize>,
}

impl ImprovementWitness {
    /// Replays the witness against `original` and checks it against the definition of its
    /// kind.
    pub fn certifies(&self, original: &Allocation, market: &Market) -> bool {
        let shape = market.shape();
        if Allocation::new(shape, self.improved.rows().to_vec()).is_err() {
            return false;
        }
        let pref = |i: usize| market.preference(i);
        let strictly = |i: usize| pref(i).prefers(self.improved.allotment(i), original.allotment(i));
        let weakly = |i: usize| pref(i).weakly_prefers(self.improved.allotment(i), original.allotment(i));
        let pareto = (0..shape.agents()).all(weakly) && (0..shape.agents()).any(strictly);
        let gainers: Vec<usize> = (0..shape.agents()).filter(|&i| strictly(i)).collect();
        match self.kind {
            ImprovementKind::Pareto => pareto && self.agents == gainers,
            ImprovementKind::Coordinatewise => {
                pareto && self.agents == gainers && original.differing_types(&self.improved) == self.types
                    && self.types.len() == 1
            }
            ImprovementKind::PairwiseCoordinatewise | ImprovementKind::TPrimePairwise => {
                let [i, j] = self.agents[..] else { return false };
                let subset_ok = match self.kind {
                    ImprovementKind::PairwiseCoordinatewise => self.types.len() == 1,
                    _ => !self.types.is_empty() && self.types.len() < shape.types(),
                };
                subset_ok
                    && i != j
                    && self.types.iter().all(|&t| t < shape.types())
                    && self.improved == original.swap_types(i, j, &self.types)
                    && strictly(i)
                    && strictly(j)
            }
            ImprovementKind::Pairwise => {
                let [i, j] = self.agents[..] else { return false };
                i != j && self.improved == original.swap_bundles(i, j) && strictly(i) && strictly(j)
            }
            ImprovementKind::Coalitional => {
                self.agents.len() >= 2
                    && self.agents.iter().all_unique()
                    && self.improved == original.rotate(&self.agents)
                    && self.agents.iter().all(|&i| strictly(i))
            }
            ImprovementKind::Unanimity => {
                (0..shape.agents()).all(|i| *self.improved.allotment(i) == pref(i).top())
                    && self.improved != *original
                    && self.agents == gainers
            }
        }
    }
}

/// `x_i R_i e_i` for every agent; the witness is the first agent preferring its endowment.
pub fn individual_rationality(alloc: &Allocation, market: &Market) -> Verdict<usize> {
    let shape = market.shape();
    Verdict::from_option(
        (0..shape.agents()).find(|&i| market.preference(i).prefers(&shape.endowment(i), alloc.allotment(i))),
    )
}

pub fn pareto_efficiency(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    let all = vec![true; market.types()];
    Verdict::from_option(pareto_improvement(alloc, market, &all).map(|improved| {
        witness(ImprovementKind::Pareto, alloc, improved, market, Vec::new())
    }))
}

/// No Pareto improvement that reallocates a single type.
pub fn coordinatewise_efficiency(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    let m = market.types();
    Verdict::from_option((0..m).find_map(|t| {
        let mut free = vec![false; m];
        free[t] = true;
        pareto_improvement(alloc, market, &free)
            .map(|improved| witness(ImprovementKind::Coordinatewise, alloc, improved, market, vec![t]))
    }))
}

/// No two agents both strictly gain by swapping their objects of one type.
pub fn pairwise_coordinatewise_efficiency(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    Verdict::from_option(pair_swaps(alloc, market, ImprovementKind::PairwiseCoordinatewise))
}

/// No two agents both strictly gain by swapping their whole allotments.
pub fn pairwise_efficiency(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    let n = market.agents();
    Verdict::from_option((0..n).tuple_combinations().find_map(|(i, j)| {
        let p = |k: usize| market.preference(k);
        (p(i).prefers(alloc.allotment(j), alloc.allotment(i)) && p(j).prefers(alloc.allotment(i), alloc.allotment(j)))
            .then(|| ImprovementWitness {
                kind: ImprovementKind::Pairwise,
                improved: alloc.swap_bundles(i, j),
                agents: vec![i, j],
                types: Vec::new(),
            })
    }))
}

/// No two agents both strictly gain by swapping their objects of a nonempty strict subset
/// of the types. Vacuous when there is a single type.
pub fn tprime_pairwise_efficiency(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    Verdict::from_option(pair_swaps(alloc, market, ImprovementKind::TPrimePairwise))
}

/// No cycle of agents in which every member strictly prefers the allotment of the next
/// member, and would receive it by rotating allotments along the cycle.
///
/// Cycles are scanned by size, then by member set in lexicographic order, each written
/// from its smallest member with the remaining members in lexicographic order of
/// arrangement.
pub fn coalitional_efficiency(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    Verdict::from_option(find_cycle(market.agents(), |from, to| {
        market.preference(from).prefers(alloc.allotment(to), alloc.allotment(from))
    })
    .map(|cycle| ImprovementWitness {
        kind: ImprovementKind::Coalitional,
        improved: alloc.rotate(&cycle),
        agents: cycle,
        types: Vec::new(),
    }))
}

/// The coalitional condition read literally: a cycle in which every member strictly
/// prefers its own allotment to the next member's. Such cycles are not improvements; the
/// scan exists only to compare readings of the definition.
pub fn coalitional_literal_violation(alloc: &Allocation, market: &Market) -> Option<Vec<usize>> {
    find_cycle(market.agents(), |from, to| {
        market.preference(from).prefers(alloc.allotment(from), alloc.allotment(to))
    })
}

/// Satisfied when no unanimously best allocation exists or `alloc` is that allocation.
pub fn unanimity(alloc: &Allocation, market: &Market) -> Verdict<ImprovementWitness> {
    let shape = market.shape();
    let tops: Vec<Bundle> = market.profile().iter().map(|p| p.top()).collect();
    let Ok(best) = Allocation::new(shape, tops) else {
        return Verdict::Satisfied;
    };
    if best == *alloc {
        return Verdict::Satisfied;
    }
    Verdict::Violated(witness(ImprovementKind::Unanimity, alloc, best, market, Vec::new()))
}

fn witness(
    kind: ImprovementKind,
    original: &Allocation,
    improved: Allocation,
    market: &Market,
    types: Vec<usize>,
) -> ImprovementWitness {
    let agents = (0..market.agents())
        .filter(|&i| market.preference(i).prefers(improved.allotment(i), original.allotment(i)))
        .collect();
    ImprovementWitness {
        kind,
        improved,
        agents,
        types,
    }
}

fn pair_swaps(alloc: &Allocation, market: &Market, kind: ImprovementKind) -> Option<ImprovementWitness> {
    let (n, m) = (market.agents(), market.types());
    let subsets: Vec<Vec<usize>> = match kind {
        ImprovementKind::PairwiseCoordinatewise => (0..m).map(|t| vec![t]).collect(),
        _ => (1..(1usize << m) - 1)
            .map(|mask| (0..m).filter(|t| mask >> t & 1 == 1).collect())
            .collect(),
    };
    (0..n).tuple_combinations().find_map(|(i, j)| {
        subsets.iter().find_map(|types| {
            let improved = alloc.swap_types(i, j, types);
            let gains = |k: usize| market.preference(k).prefers(improved.allotment(k), alloc.allotment(k));
            (gains(i) && gains(j)).then(|| ImprovementWitness {
                kind,
                improved,
                agents: vec![i, j],
                types: types.clone(),
            })
        })
    })
}

fn find_cycle(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    (2..=n).find_map(|k| {
        (0..n).combinations(k).find_map(|members| {
            let (&first, rest) = members.split_first().unwrap();
            rest.iter().copied().permutations(k - 1).find_map(|tail| {
                let mut cycle = Vec::with_capacity(k);
                cycle.push(first);
                cycle.extend(tail);
                (0..k)
                    .all(|l| edge(cycle[l], cycle[(l + 1) % k]))
                    .then_some(cycle)
            })
        })
    })
}

/// First Pareto improvement over `alloc` that leaves the types outside `free` untouched,
/// found by depth-first search over agents with each agent's candidate bundles tried best
/// first.
fn pareto_improvement(alloc: &Allocation, market: &Market, free: &[bool]) -> Option<Allocation> {
    struct Search<'a> {
        alloc: &'a Allocation,
        market: &'a Market,
        free: &'a [bool],
        used: Vec<Vec<bool>>,
        rows: Vec<Bundle>,
    }

    impl Search<'_> {
        fn go(&mut self, agent: usize, strict: bool) -> bool {
            let shape = self.market.shape();
            if agent == shape.agents() {
                return strict;
            }
            let pref = self.market.preference(agent);
            let current = self.alloc.allotment(agent);
            let limit = pref.rank_of(current);
            for r in 0..=limit {
                let bundle = shape.bundle_at(pref.order()[r]);
                let fits = bundle.objects().all(|o| {
                    if self.free[o.ty] {
                        !self.used[o.ty][o.owner]
                    } else {
                        o.owner == current.owner(o.ty)
                    }
                });
                if !fits {
                    continue;
                }
                for o in bundle.objects() {
                    self.used[o.ty][o.owner] = true;
                }
                self.rows[agent] = bundle.clone();
                if self.go(agent + 1, strict || r < limit) {
                    return true;
                }
                for o in bundle.objects() {
                    self.used[o.ty][o.owner] = false;
                }
            }
            false
        }
    }

    let shape = market.shape();
    let mut search = Search {
        alloc,
        market,
        free,
        used: vec![vec![false; shape.agents()]; shape.types()],
        rows: vec![Bundle::from_owners(Vec::new()); shape.agents()],
    };
    search
        .go(0, false)
        .then(|| Allocation::new(shape, search.rows).expect("search keeps columns feasible"))
}
