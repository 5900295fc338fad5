use super::ttc::{top_trading_cycles, ttc_single_type, Pointee, TradingCycle};
use super::Mechanism;
use crate::error::MechanismError;
use crate::model::{Allocation, Market, MarginalPreference, TypedObject};

/// Coordinatewise TTC: an independent TTC per type on the marginal preferences.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cttc;

/// Bundle TTC: TTC over whole endowments using each agent's ranking of full endowments.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bttc;

impl Mechanism for Cttc {
    fn name(&self) -> String {
        "cttc".into()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        cttc(market)
    }
}

impl Mechanism for Bttc {
    fn name(&self) -> String {
        "bttc".into()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        Ok(bttc(market))
    }
}

pub fn cttc(market: &Market) -> Result<Allocation, MechanismError> {
    cttc_with_trace(market).map(|(a, _)| a)
}

/// cTTC together with one cycle trace per type.
pub fn cttc_with_trace(market: &Market) -> Result<(Allocation, Vec<Vec<TradingCycle>>), MechanismError> {
    if !market.domain().is_separable() {
        return Err(MechanismError::not_applicable(
            "cttc",
            "preferences must be separable so that marginals exist",
        ));
    }
    let shape = market.shape();
    let agents: Vec<usize> = (0..shape.agents()).collect();
    let mut columns = Vec::with_capacity(shape.types());
    let mut traces = Vec::with_capacity(shape.types());
    for t in 0..shape.types() {
        let marginals: Vec<&MarginalPreference> = market
            .profile()
            .iter()
            .map(|p| &p.marginals().expect("separable domain carries marginals")[t])
            .collect();
        let out = ttc_single_type(&marginals, &agents);
        columns.push(out.assignment);
        traces.push(out.trace);
    }
    Ok((Allocation::from_columns(shape, &columns)?, traces))
}

pub fn bttc(market: &Market) -> Allocation {
    let (alloc, _) = bttc_with_trace(market);
    if market.domain().is_lexicographic() {
        debug_assert_eq!(
            Ok(&alloc),
            bttc_stepwise(market).as_ref().map(|(a, _)| a),
            "restriction and stepwise bTTC disagree"
        );
    }
    alloc
}

/// bTTC through the restriction of each preference to full endowments.
pub fn bttc_with_trace(market: &Market) -> (Allocation, Vec<TradingCycle>) {
    let shape = market.shape();
    let restricted: Vec<Vec<usize>> = market.profile().iter().map(|p| p.restrict_to_endowments()).collect();
    let rankings: Vec<&[usize]> = restricted.iter().map(Vec::as_slice).collect();
    let agents: Vec<usize> = (0..shape.agents()).collect();
    let out = top_trading_cycles(&rankings, &agents, |_, owner| Pointee::Endowment(owner));
    (endowment_swap(market, &out.assignment), out.trace)
}

/// bTTC as an object-pointing algorithm on lexicographic markets: each agent points to
/// its best remaining object, which is always of its most important type, and receives
/// the whole endowment of that object's owner.
pub fn bttc_stepwise(market: &Market) -> Result<(Allocation, Vec<TradingCycle>), MechanismError> {
    if !market.domain().is_lexicographic() {
        return Err(MechanismError::not_applicable(
            "bttc-stepwise",
            "preferences must be lexicographic",
        ));
    }
    let leading: Vec<(usize, &[usize])> = market
        .profile()
        .iter()
        .map(|p| {
            let ty = p.importance().expect("lexicographic domain")[0];
            (ty, p.marginals().expect("lexicographic domain")[ty].ranking())
        })
        .collect();
    let rankings: Vec<&[usize]> = leading.iter().map(|&(_, r)| r).collect();
    let agents: Vec<usize> = (0..market.agents()).collect();
    let out = top_trading_cycles(&rankings, &agents, |agent, owner| {
        Pointee::Object(TypedObject {
            ty: leading[agent].0,
            owner,
        })
    });
    Ok((endowment_swap(market, &out.assignment), out.trace))
}

fn endowment_swap(market: &Market, assignment: &[usize]) -> Allocation {
    let shape = market.shape();
    let rows = assignment.iter().map(|&owner| shape.endowment(owner)).collect();
    Allocation::new(shape, rows).expect("endowment permutation is feasible")
}
