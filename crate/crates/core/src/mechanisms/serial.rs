use super::Mechanism;
use crate::error::MechanismError;
use crate::model::{Allocation, AllocationSpace, Bundle, Market};

/// Agents pick, in a fixed order, their best bundle from the objects still unassigned.
#[derive(Clone, Debug)]
pub struct SerialDictatorship {
    order: Vec<usize>,
}

/// Agents pick, in a fixed order, their best allotment compatible with an individually
/// rational allocation that extends the earlier picks.
#[derive(Clone, Debug)]
pub struct MultipleSerialIr {
    order: Vec<usize>,
    max_allocations: usize,
}

impl SerialDictatorship {
    pub fn new(order: Vec<usize>) -> Self {
        Self { order }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

impl MultipleSerialIr {
    pub fn new(order: Vec<usize>, max_allocations: usize) -> Self {
        Self { order, max_allocations }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

fn render_order(order: &[usize]) -> String {
    order.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn check_order(name: &str, order: &[usize], n: usize) -> Result<(), MechanismError> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(MechanismError::not_applicable(
            name,
            format!("order ({}) is not a permutation of the {n} agents", render_order(order)),
        ));
    }
    Ok(())
}

impl Mechanism for SerialDictatorship {
    fn name(&self) -> String {
        format!("serial-dictatorship({})", render_order(&self.order))
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        check_order("serial-dictatorship", &self.order, market.agents())?;
        Ok(serial_dictatorship(market, &self.order))
    }
}

impl Mechanism for MultipleSerialIr {
    fn name(&self) -> String {
        format!("msir({})", render_order(&self.order))
    }

    fn allocate(&self, market: &Market) -> Result<Allocation, MechanismError> {
        check_order("msir", &self.order, market.agents())?;
        multiple_serial_ir(market, &self.order, self.max_allocations)
    }
}

/// Serial dictatorship with independent per-type pools: each agent takes the best bundle
/// whose every object is still available.
pub fn serial_dictatorship(market: &Market, order: &[usize]) -> Allocation {
    let shape = market.shape();
    let mut free = vec![vec![true; shape.agents()]; shape.types()];
    let mut rows = vec![Bundle::from_owners(Vec::new()); shape.agents()];
    for &agent in order {
        let pick = market
            .preference(agent)
            .bundles()
            .find(|b| b.objects().all(|o| free[o.ty][o.owner]))
            .expect("one object of each type remains");
        for o in pick.objects() {
            free[o.ty][o.owner] = false;
        }
        rows[agent] = pick;
    }
    Allocation::new(shape, rows).expect("picks use every object once")
}

pub fn multiple_serial_ir(market: &Market, order: &[usize], max_allocations: usize) -> Result<Allocation, MechanismError> {
    let shape = market.shape();
    let space = AllocationSpace::new(shape, max_allocations)?;
    let endowments: Vec<usize> = (0..shape.agents()).map(|i| shape.endowment_index(i)).collect();
    let mut candidates: Vec<usize> = (0..space.len())
        .filter(|&a| {
            (0..shape.agents()).all(|i| {
                let pref = market.preference(i);
                pref.rank(space.allotment_index(a, i)) <= pref.rank(endowments[i])
            })
        })
        .collect();
    for &agent in order {
        let pref = market.preference(agent);
        let best = candidates
            .iter()
            .map(|&a| space.allotment_index(a, agent))
            .min_by_key(|&b| pref.rank(b))
            .expect("the endowment allocation is always individually rational");
        candidates.retain(|&a| space.allotment_index(a, agent) == best);
    }
    debug_assert_eq!(candidates.len(), 1);
    Ok(space.get(candidates[0]).clone())
}
