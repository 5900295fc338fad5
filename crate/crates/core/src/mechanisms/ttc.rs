use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{MarginalPreference, TypedObject};

/// What an agent points at in a trading graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pointee {
    /// A single object; its owner is the next node of the cycle.
    Object(TypedObject),
    /// The whole endowment of an agent.
    Endowment(usize),
}

impl Pointee {
    pub fn owner(&self) -> usize {
        match *self {
            Pointee::Object(o) => o.owner,
            Pointee::Endowment(owner) => owner,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleLink {
    pub agent: usize,
    pub points_to: Pointee,
}

/// A directed cycle executed at step `step` (1-based). Links start at the cycle's smallest
/// agent and follow the pointing direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TradingCycle {
    pub step: usize,
    pub links: Vec<CycleLink>,
}

impl TradingCycle {
    pub fn agents(&self) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().map(|l| l.agent)
    }
}

impl fmt::Display for TradingCycle {
    /// 0-based agents; objects as `t<type>:<owner>` and endowments as `e<owner>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for link in &self.links {
            write!(f, "{}->", link.agent)?;
            match link.points_to {
                Pointee::Object(o) => write!(f, "t{}:{}->", o.ty, o.owner)?,
                Pointee::Endowment(owner) => write!(f, "e{owner}->")?,
            }
        }
        write!(f, "{}", self.links[0].agent)
    }
}

/// Result of a single-item top trading cycles run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtcOutcome {
    /// `assignment[i]` is the owner whose item agent `i` receives; agents outside the run
    /// keep their own.
    pub assignment: Vec<usize>,
    pub trace: Vec<TradingCycle>,
}

/// Gale's top trading cycles where every participant owns exactly one item, labelled by
/// the owner's index.
///
/// `rankings[i]` lists owners best first (non-participants are skipped). Every step, all
/// cycles of the pointing graph are executed together. `pointee` names the node an agent
/// points at, for the trace.
pub fn top_trading_cycles(
    rankings: &[&[usize]],
    participants: &[usize],
    pointee: impl Fn(usize, usize) -> Pointee,
) -> TtcOutcome {
    let n = rankings.len();
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut remaining = vec![false; n];
    for &p in participants {
        remaining[p] = true;
    }
    let mut trace = Vec::new();
    let mut step = 0;
    while remaining.iter().any(|&r| r) {
        step += 1;
        let points = pointing(rankings, &remaining);
        for cycle in cycles(&points, &remaining) {
            let links = cycle
                .iter()
                .map(|&agent| CycleLink {
                    agent,
                    points_to: pointee(agent, points[agent]),
                })
                .collect();
            for &agent in &cycle {
                assignment[agent] = points[agent];
                remaining[agent] = false;
            }
            trace.push(TradingCycle { step, links });
        }
    }
    debug_assert_eq!(assignment, one_cycle_at_a_time(rankings, participants));
    TtcOutcome { assignment, trace }
}

fn pointing(rankings: &[&[usize]], remaining: &[bool]) -> Vec<usize> {
    (0..rankings.len())
        .map(|i| {
            if remaining[i] {
                *rankings[i].iter().find(|&&o| remaining[o]).expect("own item remains")
            } else {
                i
            }
        })
        .collect()
}

/// Cycles of the functional graph `i -> points[i]` over remaining agents, each rotated to
/// start at its smallest agent, listed by that agent.
fn cycles(points: &[usize], remaining: &[bool]) -> Vec<Vec<usize>> {
    let n = points.len();
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut state = vec![0u8; n];
    let mut found = Vec::new();
    for start in 0..n {
        if !remaining[start] || state[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            walk.push(cur);
            cur = points[cur];
        }
        if state[cur] == 1 {
            let pos = walk.iter().position(|&a| a == cur).unwrap();
            let mut cycle = walk[pos..].to_vec();
            let min_pos = cycle.iter().enumerate().min_by_key(|(_, &a)| a).unwrap().0;
            cycle.rotate_left(min_pos);
            found.push(cycle);
        }
        for a in walk {
            state[a] = 2;
        }
    }
    found.sort_by_key(|c| c[0]);
    found
}

/// Reference run that executes only the cycle with the smallest agent each round.
fn one_cycle_at_a_time(rankings: &[&[usize]], participants: &[usize]) -> Vec<usize> {
    let n = rankings.len();
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut remaining = vec![false; n];
    for &p in participants {
        remaining[p] = true;
    }
    while remaining.iter().any(|&r| r) {
        let points = pointing(rankings, &remaining);
        let cycle = cycles(&points, &remaining).swap_remove(0);
        for agent in cycle {
            assignment[agent] = points[agent];
            remaining[agent] = false;
        }
    }
    assignment
}

/// Type-`t` TTC on marginal preferences over the objects of the available owners.
pub fn ttc_single_type(marginals: &[&MarginalPreference], available: &[usize]) -> TtcOutcome {
    let rankings: Vec<&[usize]> = marginals.iter().map(|m| m.ranking()).collect();
    let ty = marginals.first().map_or(0, |m| m.ty());
    top_trading_cycles(&rankings, available, |_, owner| Pointee::Object(TypedObject { ty, owner }))
}
