use super::bundle::bttc;
use super::ttc::ttc_single_type;
use super::Mechanism;
use crate::error::MechanismError;
use crate::model::{Allocation, Bundle, Market, MarginalPreference};

/// Always returns the endowment allocation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoTrade;

/// Three agents, two types: agent 1 may swap into the full endowment of the agent it
/// ranks first, with the other two splitting agent 1's objects, whenever that
/// reallocation Pareto dominates bTTC. Otherwise bTTC.
#[derive(Clone, Copy, Debug, Default)]
pub struct BossyHybrid;

/// Returns a fixed target allocation when every agent weakly prefers it to the endowment,
/// and the endowment otherwise.
#[derive(Clone, Debug)]
pub struct YRestrictedUnanimity {
    target: Allocation,
}

/// Two types, houses before cars for everyone: TTC on houses, then TTC on cars after
/// agent 1's own car drops to the bottom of its car ranking if its house changed.
#[derive(Clone, Copy, Debug, Default)]
pub struct HouseThenPenalizedCar;

impl YRestrictedUnanimity {
    pub fn new(target: Allocation) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &Allocation {
        &self.target
    }
}

impl Mechanism for NoTrade {
    fn name(&self) -> String {
        "no-trade".into()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        Ok(no_trade(market))
    }
}

impl Mechanism for BossyHybrid {
    fn name(&self) -> String {
        "bossy-hybrid".into()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        bossy_hybrid(market)
    }
}

impl Mechanism for YRestrictedUnanimity {
    fn name(&self) -> String {
        format!("y-unanimity{}", self.target)
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        y_restricted_unanimity(market, &self.target)
    }
}

impl Mechanism for HouseThenPenalizedCar {
    fn name(&self) -> String {
        "house-then-car".into()
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        house_then_penalized_car(market)
    }
}

pub fn no_trade(market: &Market) -> Allocation {
    Allocation::endowment(market.shape())
}

pub fn bossy_hybrid(market: &Market) -> Result<Allocation, MechanismError> {
    let shape = market.shape();
    if shape.agents() != 3 || shape.types() != 2 {
        return Err(MechanismError::not_applicable(
            "bossy-hybrid",
            format!("defined for n=3, m=2 only, got {shape}"),
        ));
    }
    if !market.domain().is_lexicographic() {
        return Err(MechanismError::not_applicable(
            "bossy-hybrid",
            "preferences must be lexicographic",
        ));
    }
    let fallback = bttc(market);
    let i = market.preference(0).restrict_to_endowments()[0];
    if i == 0 {
        return Ok(fallback);
    }
    let j = 3 - i;
    let mut rows = vec![Bundle::from_owners(Vec::new()); 3];
    rows[0] = shape.endowment(i);
    rows[i] = Bundle::from_owners(vec![0, j]);
    rows[j] = Bundle::from_owners(vec![j, 0]);
    let y = Allocation::new(shape, rows)?;
    let dominates = y != fallback
        && (0..3).all(|k| {
            market
                .preference(k)
                .weakly_prefers(y.allotment(k), fallback.allotment(k))
        });
    Ok(if dominates { y } else { fallback })
}

pub fn y_restricted_unanimity(market: &Market, target: &Allocation) -> Result<Allocation, MechanismError> {
    let shape = market.shape();
    if target.agents() != shape.agents() || target.types() != shape.types() {
        return Err(MechanismError::not_applicable(
            "y-unanimity",
            format!("target {target} does not fit a market with {shape}"),
        ));
    }
    let accepted = (0..shape.agents()).all(|i| {
        market
            .preference(i)
            .weakly_prefers(target.allotment(i), &shape.endowment(i))
    });
    Ok(if accepted {
        target.clone()
    } else {
        Allocation::endowment(shape)
    })
}

pub fn house_then_penalized_car(market: &Market) -> Result<Allocation, MechanismError> {
    let shape = market.shape();
    let houses_first = shape.types() == 2
        && market.domain().is_lexicographic()
        && market.profile().iter().all(|p| p.importance() == Some(&[0, 1]));
    if !houses_first {
        return Err(MechanismError::not_applicable(
            "house-then-car",
            "needs two types and lexicographic preferences ranking type 1 above type 2 for every agent",
        ));
    }
    let agents: Vec<usize> = (0..shape.agents()).collect();
    let marginals = |t: usize| -> Vec<MarginalPreference> {
        market
            .profile()
            .iter()
            .map(|p| p.marginals().expect("lexicographic")[t].clone())
            .collect()
    };
    let houses = marginals(0);
    let house = ttc_single_type(&houses.iter().collect::<Vec<_>>(), &agents).assignment;
    let mut cars = marginals(1);
    if house[0] != 0 {
        cars[0] = cars[0].with_last(0);
    }
    let car = ttc_single_type(&cars.iter().collect::<Vec<_>>(), &agents).assignment;
    Ok(Allocation::from_columns(shape, &[house, car])?)
}
