use std::collections::VecDeque;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::{allocation_property, domain_label, PropertyCode};
use crate::error::{Error, GuardError};
use crate::mechanisms::Mechanism;
use crate::model::{is_monotonic_transform, Guards, ProfileDomain};
use crate::properties::{DomainModel, OutcomeTable, Verdict};

/// Allocation domains are bitsets over the allocation space.
const MAX_SEARCH_ALLOCATIONS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Stop after this many models; 2 separates UNIQUE from MULTIPLE.
    pub model_cap: usize,
    /// Split the first branching variable across worker threads.
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            model_cap: 2,
            parallel: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SearchVerdict {
    Unsat,
    Unique,
    Multiple,
}

impl fmt::Display for SearchVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchVerdict::Unsat => "UNSAT",
            SearchVerdict::Unique => "UNIQUE",
            SearchVerdict::Multiple => "MULTIPLE",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Value assignments tried.
    pub nodes: u64,
    /// Arc revisions that removed at least one value.
    pub propagations: u64,
}

impl std::ops::Add for SearchStats {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            nodes: self.nodes + rhs.nodes,
            propagations: self.propagations + rhs.propagations,
        }
    }
}

/// How a reference mechanism relates to the search result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetComparison {
    pub name: String,
    /// Whether the reference mechanism's outcome table is itself a model.
    pub is_model: bool,
    /// Profiles where the first model found differs from the reference mechanism.
    pub differing_profiles: Vec<usize>,
    /// The verdict is UNIQUE and the model is the reference mechanism.
    pub equals_unique: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub domain: String,
    pub profiles: usize,
    pub allocations: usize,
    pub required: Vec<PropertyCode>,
    pub verdict: SearchVerdict,
    /// Allocation index chosen at every profile, one table per model.
    pub models: Vec<Vec<u32>>,
    pub stats: SearchStats,
    pub target: Option<TargetComparison>,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    other: u32,
    agent: u16,
    own: u32,
    their: u32,
}

/// Mechanisms on a finite profile domain as a constraint problem: one variable per
/// profile, whose value is the allocation selected there.
pub struct SearchInstance {
    model: DomainModel,
    required: Vec<PropertyCode>,
    candidates: Vec<u64>,
    edges: Vec<Vec<Edge>>,
    sp: bool,
    nb: bool,
    gsp: bool,
    mono: bool,
    /// `worse_eq[i][o][a]`: allocations agent `i` ranks no higher than `a` under option `o`.
    worse_eq: Vec<Vec<Vec<u64>>>,
    /// `better_eq[i][o][a]`: allocations agent `i` ranks no lower than `a` under option `o`.
    better_eq: Vec<Vec<Vec<u64>>>,
    /// `nb_ok[i][a]`: allocations that either equal `a` or give agent `i` another allotment.
    nb_ok: Vec<Vec<u64>>,
    /// `transforms[i][c][b][o]`: option `o` is a monotonic transformation of option `c` at
    /// bundle `b` for agent `i`.
    transforms: Vec<Vec<Vec<Vec<bool>>>>,
}

impl SearchInstance {
    pub fn new(domain: ProfileDomain, required: &[PropertyCode], guards: &Guards) -> Result<Self, Error> {
        if domain.len() > guards.max_search_variables {
            return Err(GuardError::new(
                format!("search mechanisms over {}", domain_label(&domain)),
                format!("{} profile variables", domain.len()),
                format!("{} profile variables", guards.max_search_variables),
            )
            .into());
        }
        let model = DomainModel::new(domain, guards)?;
        let space = model.space();
        if space.len() > MAX_SEARCH_ALLOCATIONS {
            return Err(GuardError::new(
                format!("search mechanisms over {}", domain_label(model.domain())),
                format!("{} allocations per profile", space.len()),
                format!("{MAX_SEARCH_ALLOCATIONS} allocations per profile"),
            )
            .into());
        }
        let domain = model.domain();
        let n = model.agents();
        let allocs = space.len();
        let local: Vec<PropertyCode> = required.iter().copied().filter(|c| c.is_allocation_level()).collect();
        let candidates: Vec<u64> = (0..domain.len())
            .into_par_iter()
            .map(|p| {
                let market = domain.market(p);
                (0..allocs).fold(0u64, |mask, a| {
                    let alloc = space.get(a);
                    let ok = local.iter().all(|&c| {
                        matches!(allocation_property(c, alloc, &market), Some(Verdict::Satisfied))
                    });
                    if ok {
                        mask | 1 << a
                    } else {
                        mask
                    }
                })
            })
            .collect();
        let sp = required.contains(&PropertyCode::Sp);
        let nb = required.contains(&PropertyCode::Nb);
        let gsp = required.contains(&PropertyCode::Gsp);
        let mono = required.contains(&PropertyCode::Mono);
        let edges = if sp || nb {
            (0..domain.len())
                .map(|p| {
                    let choices = domain.choices(p);
                    (0..n)
                        .flat_map(|i| {
                            let own = choices[i];
                            (0..domain.options(i).len()).filter(move |&o| o != own).map(move |o| (i, own, o))
                        })
                        .map(|(i, own, o)| Edge {
                            other: domain.deviate(p, i, o) as u32,
                            agent: i as u16,
                            own: own as u32,
                            their: o as u32,
                        })
                        .collect()
                })
                .collect()
        } else {
            vec![Vec::new(); domain.len()]
        };
        let rank_masks = |keep: fn(u32, u32) -> bool| -> Vec<Vec<Vec<u64>>> {
            (0..n)
                .map(|i| {
                    (0..domain.options(i).len())
                        .map(|o| {
                            (0..allocs)
                                .map(|a| {
                                    let ra = model.rank(i, o, a);
                                    (0..allocs)
                                        .filter(|&b| keep(model.rank(i, o, b), ra))
                                        .fold(0u64, |m, b| m | 1 << b)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        let worse_eq = rank_masks(|rb, ra| rb >= ra);
        let better_eq = rank_masks(|rb, ra| rb <= ra);
        let nb_ok = (0..n)
            .map(|i| {
                (0..allocs)
                    .map(|a| {
                        (0..allocs)
                            .filter(|&b| b == a || model.allotment(b, i) != model.allotment(a, i))
                            .fold(0u64, |m, b| m | 1 << b)
                    })
                    .collect()
            })
            .collect();
        let transforms = if mono {
            let shape = domain.shape();
            let bundles = shape.bundle_count().expect("allocation space fits");
            (0..n)
                .map(|i| {
                    let opts = domain.options(i);
                    opts.iter()
                        .map(|old| {
                            (0..bundles)
                                .map(|b| {
                                    let at = shape.bundle_at(b);
                                    opts.iter().map(|new| is_monotonic_transform(new, old, &at)).collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            model,
            required: required.to_vec(),
            candidates,
            edges,
            sp,
            nb,
            gsp,
            mono,
            worse_eq,
            better_eq,
            nb_ok,
            transforms,
        })
    }

    pub fn model(&self) -> &DomainModel {
        &self.model
    }

    pub fn profiles(&self) -> usize {
        self.candidates.len()
    }

    /// Allocations allowed at each profile by the allocation-level requirements.
    pub fn candidates(&self) -> &[u64] {
        &self.candidates
    }

    /// Values at profile `p` compatible with some value in `dq` across edge `e`.
    fn revise(&self, p: usize, e: &Edge, dp: u64, dq: u64) -> u64 {
        let mut keep = 0u64;
        let mut rest = dp;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let i = e.agent as usize;
            let mut compat = u64::MAX;
            if self.sp {
                compat &= self.worse_eq[i][e.own as usize][a] & self.better_eq[i][e.their as usize][a];
            }
            if self.nb {
                compat &= self.nb_ok[i][a];
            }
            if compat & dq != 0 {
                keep |= 1 << a;
            }
        }
        debug_assert_eq!(keep & !dp, 0, "revision of profile {p} only removes values");
        keep
    }

    /// Arc consistency over unilateral-deviation edges. Returns false on a wipeout.
    fn propagate(&self, doms: &mut [u64], seeds: impl IntoIterator<Item = usize>, stats: &mut SearchStats) -> bool {
        if !(self.sp || self.nb) {
            return doms.iter().all(|&d| d != 0);
        }
        let mut queued = vec![false; doms.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in seeds {
            if !queued[s] {
                queued[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(q) = queue.pop_front() {
            queued[q] = false;
            for e in &self.edges[q] {
                // Edges are symmetric: q's neighbour p sees q through the reverse edge.
                let p = e.other as usize;
                let back = Edge {
                    other: q as u32,
                    agent: e.agent,
                    own: e.their,
                    their: e.own,
                };
                let kept = self.revise(p, &back, doms[p], doms[q]);
                if kept != doms[p] {
                    stats.propagations += 1;
                    doms[p] = kept;
                    if kept == 0 {
                        return false;
                    }
                    if !queued[p] {
                        queued[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
        true
    }

    /// Whether honest profile `p` with outcome `a` and report `q` with outcome `b` break
    /// group strategy-proofness or monotonicity.
    fn pair_conflict(&self, p: usize, a: usize, q: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let domain = self.model.domain();
        let (cp, cq) = (domain.choices(p), domain.choices(q));
        let n = self.model.agents();
        if self.gsp {
            let mut blocked = false;
            let mut strict = false;
            for i in 0..n {
                let (ra, rb) = (self.model.rank(i, cp[i], a), self.model.rank(i, cp[i], b));
                if cp[i] != cq[i] && rb > ra {
                    blocked = true;
                    break;
                }
                strict |= rb < ra;
            }
            if !blocked && strict {
                return true;
            }
        }
        if self.mono {
            let transformed =
                (0..n).all(|i| self.transforms[i][cp[i]][self.model.allotment(a, i)][cq[i]]);
            if transformed {
                return true;
            }
        }
        false
    }

    /// Checks the newly fixed profiles against every fixed profile.
    fn lazy_ok(&self, doms: &[u64], fresh: &[usize]) -> bool {
        if !(self.gsp || self.mono) {
            return true;
        }
        let fixed: Vec<(usize, usize)> = doms
            .iter()
            .enumerate()
            .filter(|(_, d)| d.count_ones() == 1)
            .map(|(p, d)| (p, d.trailing_zeros() as usize))
            .collect();
        fresh.iter().all(|&p| {
            let a = doms[p].trailing_zeros() as usize;
            fixed
                .iter()
                .all(|&(q, b)| q == p || (!self.pair_conflict(p, a, q, b) && !self.pair_conflict(q, b, p, a)))
        })
    }

    /// Initial domains after propagation, or `None` if the instance is already infeasible.
    fn root(&self, stats: &mut SearchStats) -> Option<Vec<u64>> {
        let mut doms = self.candidates.clone();
        if doms.contains(&0) {
            return None;
        }
        let all: Vec<usize> = (0..doms.len()).collect();
        if !self.propagate(&mut doms, all.iter().copied(), stats) {
            return None;
        }
        let fixed: Vec<usize> = (0..doms.len()).filter(|&p| doms[p].count_ones() == 1).collect();
        self.lazy_ok(&doms, &fixed).then_some(doms)
    }

    /// Fixes `var` to allocation `value` and propagates; `None` on failure.
    fn assign(&self, doms: &[u64], var: usize, value: usize, stats: &mut SearchStats) -> Option<Vec<u64>> {
        let mut next = doms.to_vec();
        next[var] = 1 << value;
        if !self.propagate(&mut next, [var], stats) {
            return None;
        }
        let fresh: Vec<usize> = (0..next.len())
            .filter(|&p| doms[p].count_ones() > 1 && next[p].count_ones() == 1)
            .collect();
        self.lazy_ok(&next, &fresh).then_some(next)
    }

    /// Whether a complete outcome table satisfies every requirement.
    pub fn accepts(&self, table: &OutcomeTable) -> bool {
        let mut doms: Vec<u64> = table.outcomes.iter().map(|&a| 1u64 << a).collect();
        if doms.iter().zip(&self.candidates).any(|(d, c)| d & c == 0) {
            return false;
        }
        let mut stats = SearchStats::default();
        let all: Vec<usize> = (0..doms.len()).collect();
        self.propagate(&mut doms, all.iter().copied(), &mut stats) && self.lazy_ok(&doms, &all)
    }
}

/// A model with the statistics at the moment it was found.
type Snapshot = (Vec<u32>, SearchStats);

/// Depth-first search recording each model with the statistics at the moment it was found.
struct Dfs<'a> {
    inst: &'a SearchInstance,
    cap: usize,
    stats: SearchStats,
    models: Vec<Snapshot>,
}

impl Dfs<'_> {
    fn run(&mut self, doms: Vec<u64>) {
        if self.models.len() >= self.cap {
            return;
        }
        let Some(var) = doms.iter().position(|d| d.count_ones() > 1) else {
            let model = doms.iter().map(|d| d.trailing_zeros()).collect();
            self.models.push((model, self.stats));
            return;
        };
        let mut rest = doms[var];
        while rest != 0 {
            let value = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            self.stats.nodes += 1;
            if let Some(next) = self.inst.assign(&doms, var, value, &mut self.stats) {
                self.run(next);
            }
            if self.models.len() >= self.cap {
                return;
            }
        }
    }
}

/// Decides whether any mechanism on the instance's domain meets its requirements, and
/// whether it is unique.
///
/// Variables are profiles in index order, values allocations in canonical order. The
/// parallel mode explores the subtrees under the first branching variable concurrently
/// and merges them in value order, so verdict, models and statistics equal the serial run.
pub fn search_mechanisms(
    instance: &SearchInstance,
    options: &SearchOptions,
    target: Option<&dyn Mechanism>,
) -> Result<SearchOutcome, Error> {
    let start = Instant::now();
    let cap = options.model_cap.max(1);
    let mut base = SearchStats::default();
    let mut models: Vec<Vec<u32>> = Vec::new();
    let root = instance.root(&mut base);
    let mut stats = base;
    if let Some(root) = root {
        match root.iter().position(|d| d.count_ones() > 1) {
            None => models.push(root.iter().map(|d| d.trailing_zeros()).collect()),
            Some(var) if options.parallel => {
                let values: Vec<usize> = (0..64).filter(|&v| root[var] >> v & 1 == 1).collect();
                let subtrees: Vec<(Vec<Snapshot>, SearchStats)> = values
                    .par_iter()
                    .map(|&value| {
                        let mut dfs = Dfs {
                            inst: instance,
                            cap,
                            stats: SearchStats { nodes: 1, propagations: 0 },
                            models: Vec::new(),
                        };
                        if let Some(next) = instance.assign(&root, var, value, &mut dfs.stats) {
                            dfs.run(next);
                        }
                        (dfs.models, dfs.stats)
                    })
                    .collect();
                for (found, total) in subtrees {
                    for (model, snapshot) in found {
                        models.push(model);
                        if models.len() >= cap {
                            stats = stats + snapshot;
                            break;
                        }
                    }
                    if models.len() >= cap {
                        break;
                    }
                    stats = stats + total;
                }
            }
            Some(_) => {
                let mut dfs = Dfs {
                    inst: instance,
                    cap,
                    stats: base,
                    models: Vec::new(),
                };
                dfs.run(root);
                stats = dfs.stats;
                if dfs.models.len() >= cap {
                    stats = dfs.models[cap - 1].1;
                }
                models = dfs.models.into_iter().map(|(m, _)| m).collect();
            }
        }
    }
    let verdict = match models.len() {
        0 => SearchVerdict::Unsat,
        1 => SearchVerdict::Unique,
        _ => SearchVerdict::Multiple,
    };
    let target = target
        .map(|mech| -> Result<TargetComparison, Error> {
            let table = OutcomeTable::build(mech, &instance.model)?;
            let differing_profiles: Vec<usize> = models
                .first()
                .map(|m| (0..m.len()).filter(|&p| m[p] != table.outcomes[p]).collect())
                .unwrap_or_default();
            Ok(TargetComparison {
                name: mech.name(),
                is_model: instance.accepts(&table),
                equals_unique: verdict == SearchVerdict::Unique && differing_profiles.is_empty(),
                differing_profiles,
            })
        })
        .transpose()?;
    Ok(SearchOutcome {
        domain: domain_label(instance.model.domain()),
        profiles: instance.profiles(),
        allocations: instance.model.space().len(),
        required: instance.required.clone(),
        verdict,
        models,
        stats,
        target,
        elapsed: start.elapsed(),
    })
}
