//! Mechanical replay of the two-agent, three-type argument that individual rationality,
//! strategy-proofness and T'-types pairwise efficiency are incompatible.

use super::audit::PropertyCode;
use super::search::{search_mechanisms, SearchInstance, SearchOptions, SearchOutcome};
use crate::error::Error;
use crate::mechanisms::bttc;
use crate::model::{Allocation, AllocationSpace, DomainTag, Guards, Market, MarketShape, Preference, ProfileDomain, TypedObject};
use crate::properties::{individual_rationality, tprime_pairwise_efficiency, ImprovementWitness, Verdict};

/// Object listings (best first) as `(type, owner)` pairs, both 0-based.
const R1: [(usize, usize); 6] = [(0, 1), (0, 0), (2, 0), (2, 1), (1, 1), (1, 0)];
const R2: [(usize, usize); 6] = [(0, 0), (0, 1), (2, 0), (2, 1), (1, 0), (1, 1)];
/// Both misreports share one listing: type 2 first, then type 0, then type 1.
const R_PRIME: [(usize, usize); 6] = [(2, 0), (2, 1), (0, 1), (0, 0), (1, 1), (1, 0)];

/// One branch of the argument: what the honest outcome does with type 2, and what every
/// admissible outcome after the misreport gives the deviator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayCase {
    pub type2_traded: bool,
    pub deviator: usize,
    pub reported: Market,
    /// Honest outcomes at the base profile that fall in this branch.
    pub honest_outcomes: Vec<Allocation>,
    /// Individually rational, T'-types pairwise efficient allocations at the reported
    /// profile.
    pub forced_outcomes: Vec<Allocation>,
    /// Every forced outcome gives the deviator a bundle it strictly prefers, under its true
    /// preference, to every honest outcome of the branch.
    pub deviator_gains: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub market: Market,
    /// Individually rational, T'-types pairwise efficient allocations at the base profile.
    pub admissible: Vec<Allocation>,
    /// Every admissible allocation trades types 0 and 1.
    pub types01_traded: bool,
    pub traded: ReplayCase,
    pub untraded: ReplayCase,
    /// bTTC at the base profile and whether it is T'-types pairwise efficient there.
    pub bttc_outcome: Allocation,
    pub bttc_tprime_efficient: bool,
    /// bTTC at the first agent's misreported profile, with the checker's witness.
    pub bttc_misreport_market: Market,
    pub bttc_misreport_outcome: Allocation,
    pub bttc_misreport_witness: Option<ImprovementWitness>,
    /// Swapping types 0 and 1 at that profile strictly improves both agents.
    pub bttc_misreport_swap01_improves: bool,
    /// Search over the four profiles generated by the two misreports.
    pub closure: SearchOutcome,
}

impl ReplayReport {
    /// Both branches end in a profitable misreport and every base outcome lies in one.
    pub fn contradiction_derived(&self) -> bool {
        !self.admissible.is_empty()
            && self.types01_traded
            && self.traded.deviator_gains
            && self.untraded.deviator_gains
            && self.traded.honest_outcomes.len() + self.untraded.honest_outcomes.len() == self.admissible.len()
    }
}

fn listing(shape: MarketShape, objects: &[(usize, usize)]) -> Preference {
    let objects: Vec<TypedObject> = objects.iter().map(|&(ty, owner)| TypedObject { ty, owner }).collect();
    Preference::from_object_listing(shape, &objects).expect("listing covers every object once")
}

fn market(shape: MarketShape, prefs: [&Preference; 2]) -> Market {
    Market::new(shape, prefs.map(Clone::clone).to_vec(), DomainTag::Lexicographic).expect("lexicographic profile")
}

fn admissible(space: &AllocationSpace, market: &Market) -> Vec<Allocation> {
    space
        .iter()
        .filter(|a| individual_rationality(a, market).is_satisfied() && tprime_pairwise_efficiency(a, market).is_satisfied())
        .cloned()
        .collect()
}

fn case(
    space: &AllocationSpace,
    base: &Market,
    honest: &[Allocation],
    type2_traded: bool,
    deviator: usize,
    reported: Market,
) -> ReplayCase {
    let honest_outcomes: Vec<Allocation> = honest
        .iter()
        .filter(|a| (a.allotment(0).owner(2) != 0) == type2_traded)
        .cloned()
        .collect();
    let forced_outcomes = admissible(space, &reported);
    let truth = base.preference(deviator);
    let deviator_gains = !forced_outcomes.is_empty()
        && forced_outcomes.iter().all(|y| {
            honest_outcomes
                .iter()
                .all(|x| truth.prefers(y.allotment(deviator), x.allotment(deviator)))
        });
    ReplayCase {
        type2_traded,
        deviator,
        reported,
        honest_outcomes,
        forced_outcomes,
        deviator_gains,
    }
}

pub fn replay_proof_a5(guards: &Guards) -> Result<ReplayReport, Error> {
    let shape = MarketShape::new(2, 3)?;
    let space = AllocationSpace::new(shape, guards.max_allocations)?;
    let (r1, r2, r_prime) = (listing(shape, &R1), listing(shape, &R2), listing(shape, &R_PRIME));
    let base = market(shape, [&r1, &r2]);
    let admissible_base = admissible(&space, &base);
    let types01_traded = admissible_base
        .iter()
        .all(|a| a.allotment(0).owner(0) == 1 && a.allotment(0).owner(1) == 1);
    let traded = case(&space, &base, &admissible_base, true, 0, market(shape, [&r_prime, &r2]));
    let untraded = case(&space, &base, &admissible_base, false, 1, market(shape, [&r1, &r_prime]));

    let bttc_outcome = bttc(&base);
    let bttc_tprime_efficient = tprime_pairwise_efficiency(&bttc_outcome, &base).is_satisfied();
    let misreport = market(shape, [&r_prime, &r2]);
    let bttc_misreport_outcome = bttc(&misreport);
    let bttc_misreport_witness = match tprime_pairwise_efficiency(&bttc_misreport_outcome, &misreport) {
        Verdict::Satisfied => None,
        Verdict::Violated(w) => Some(w),
    };
    let swapped = bttc_misreport_outcome.swap_types(0, 1, &[0, 1]);
    let bttc_misreport_swap01_improves = (0..2).all(|i| {
        misreport
            .preference(i)
            .prefers(swapped.allotment(i), bttc_misreport_outcome.allotment(i))
    });

    let closure = closure_search(guards)?;
    Ok(ReplayReport {
        market: base,
        admissible: admissible_base,
        types01_traded,
        traded,
        untraded,
        bttc_outcome,
        bttc_tprime_efficient,
        bttc_misreport_market: misreport,
        bttc_misreport_outcome,
        bttc_misreport_witness,
        bttc_misreport_swap01_improves,
        closure,
    })
}

/// Individual rationality, strategy-proofness and T'-types pairwise efficiency over the
/// profiles {R1, R'1} x {R2, R'2}.
pub fn closure_search(guards: &Guards) -> Result<SearchOutcome, Error> {
    let shape = MarketShape::new(2, 3)?;
    let (r1, r2, r_prime) = (listing(shape, &R1), listing(shape, &R2), listing(shape, &R_PRIME));
    let domain = ProfileDomain::from_options(
        shape,
        DomainTag::Lexicographic,
        vec![vec![r1, r_prime.clone()], vec![r2, r_prime]],
        guards,
    )?;
    let instance = SearchInstance::new(domain, &[PropertyCode::Ir, PropertyCode::Sp, PropertyCode::Tpe], guards)?;
    search_mechanisms(&instance, &SearchOptions::default(), None)
}

/// The same requirements over the whole lexicographic domain at two agents and three
/// types.
pub fn full_domain_search(guards: &Guards, options: &SearchOptions) -> Result<SearchOutcome, Error> {
    let shape = MarketShape::new(2, 3)?;
    let domain = ProfileDomain::full(shape, DomainTag::Lexicographic, guards)?;
    let instance = SearchInstance::new(domain, &[PropertyCode::Ir, PropertyCode::Sp, PropertyCode::Tpe], guards)?;
    search_mechanisms(&instance, options, None)
}
