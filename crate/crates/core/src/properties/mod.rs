//! Allocation-level efficiency and rationality checks, and mechanism-level incentive
//! checks over finite profile domains.

mod efficiency;
mod incentives;

pub use efficiency::{
    coalitional_efficiency, coalitional_literal_violation, coordinatewise_efficiency, individual_rationality,
    pairwise_coordinatewise_efficiency, pairwise_efficiency, pareto_efficiency, tprime_pairwise_efficiency,
    unanimity, ImprovementKind, ImprovementWitness, Verdict,
};
pub use incentives::{
    group_strategy_proofness, lemma_checks, monotonicity, non_bossiness, strategy_proofness, DeviationKind,
    DeviationWitness, DomainModel, Implication, LeadingTypeWitness, LemmaReport, OutcomeTable,
};
