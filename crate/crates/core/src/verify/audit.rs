use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::mechanisms::Mechanism;
use crate::model::{Allocation, Guards, Market, ProfileDomain};
use crate::properties::{self, DeviationWitness, DomainModel, ImprovementWitness, OutcomeTable, Verdict};

/// Properties a mechanism can be audited for or a search can require.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyCode {
    Ir,
    Sp,
    Gsp,
    Nb,
    Pe,
    Ce,
    Pce,
    Pe2,
    Coal,
    Tpe,
    Unan,
    Mono,
}

impl PropertyCode {
    pub const ALL: [PropertyCode; 12] = [
        PropertyCode::Ir,
        PropertyCode::Sp,
        PropertyCode::Gsp,
        PropertyCode::Nb,
        PropertyCode::Pe,
        PropertyCode::Ce,
        PropertyCode::Pce,
        PropertyCode::Pe2,
        PropertyCode::Coal,
        PropertyCode::Tpe,
        PropertyCode::Unan,
        PropertyCode::Mono,
    ];

    pub fn code(self) -> &'static str {
        match self {
            PropertyCode::Ir => "ir",
            PropertyCode::Sp => "sp",
            PropertyCode::Gsp => "gsp",
            PropertyCode::Nb => "nb",
            PropertyCode::Pe => "pe",
            PropertyCode::Ce => "ce",
            PropertyCode::Pce => "pce",
            PropertyCode::Pe2 => "pe2",
            PropertyCode::Coal => "coal",
            PropertyCode::Tpe => "tpe",
            PropertyCode::Unan => "unan",
            PropertyCode::Mono => "mono",
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            PropertyCode::Ir => "individual rationality",
            PropertyCode::Sp => "strategy-proofness",
            PropertyCode::Gsp => "group strategy-proofness",
            PropertyCode::Nb => "non-bossiness",
            PropertyCode::Pe => "Pareto efficiency",
            PropertyCode::Ce => "coordinatewise efficiency",
            PropertyCode::Pce => "pairwise coordinatewise efficiency",
            PropertyCode::Pe2 => "pairwise efficiency",
            PropertyCode::Coal => "coalitional efficiency",
            PropertyCode::Tpe => "T'-types pairwise efficiency",
            PropertyCode::Unan => "unanimity",
            PropertyCode::Mono => "monotonicity",
        }
    }

    /// Whether the property is checked allocation by allocation rather than across
    /// profiles.
    pub fn is_allocation_level(self) -> bool {
        !matches!(
            self,
            PropertyCode::Sp | PropertyCode::Gsp | PropertyCode::Nb | PropertyCode::Mono
        )
    }

    /// Parses a comma-separated list of codes, keeping the given order and dropping
    /// repeats.
    pub fn parse_list(list: &str) -> Result<Vec<PropertyCode>, String> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let code: PropertyCode = item.parse()?;
            if !out.contains(&code) {
                out.push(code);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PropertyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PropertyCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.code() == s)
            .ok_or_else(|| format!("unknown property code `{s}`"))
    }
}

/// Evidence for a failed property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditWitness {
    Rationality {
        market: Market,
        allocation: Allocation,
        agent: usize,
    },
    Improvement {
        market: Market,
        allocation: Allocation,
        witness: ImprovementWitness,
    },
    Deviation(DeviationWitness),
}

impl AuditWitness {
    /// Replays the witness: recomputes the mechanism's outcome where needed and checks
    /// the violated definition.
    pub fn certifies(&self, mechanism: &dyn Mechanism) -> bool {
        match self {
            AuditWitness::Rationality {
                market,
                allocation,
                agent,
            } => {
                mechanism.allocate(market).as_ref() == Ok(allocation)
                    && market
                        .preference(*agent)
                        .prefers(&market.shape().endowment(*agent), allocation.allotment(*agent))
            }
            AuditWitness::Improvement {
                market,
                allocation,
                witness,
            } => mechanism.allocate(market).as_ref() == Ok(allocation) && witness.certifies(allocation, market),
            AuditWitness::Deviation(w) => w.certifies(mechanism),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyResult {
    pub property: PropertyCode,
    pub witness: Option<AuditWitness>,
}

impl PropertyResult {
    pub fn satisfied(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub mechanism: String,
    pub domain: String,
    pub profiles: usize,
    pub results: Vec<PropertyResult>,
}

impl AuditReport {
    pub fn get(&self, property: PropertyCode) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.property == property)
    }
}

/// Checks one allocation-level property; `None` for mechanism-level codes.
pub fn allocation_property(
    code: PropertyCode,
    alloc: &Allocation,
    market: &Market,
) -> Option<Verdict<Option<ImprovementWitness>>> {
    let lift = |v: Verdict<ImprovementWitness>| match v {
        Verdict::Satisfied => Verdict::Satisfied,
        Verdict::Violated(w) => Verdict::Violated(Some(w)),
    };
    Some(match code {
        PropertyCode::Ir => match properties::individual_rationality(alloc, market) {
            Verdict::Satisfied => Verdict::Satisfied,
            Verdict::Violated(_) => Verdict::Violated(None),
        },
        PropertyCode::Pe => lift(properties::pareto_efficiency(alloc, market)),
        PropertyCode::Ce => lift(properties::coordinatewise_efficiency(alloc, market)),
        PropertyCode::Pce => lift(properties::pairwise_coordinatewise_efficiency(alloc, market)),
        PropertyCode::Pe2 => lift(properties::pairwise_efficiency(alloc, market)),
        PropertyCode::Coal => lift(properties::coalitional_efficiency(alloc, market)),
        PropertyCode::Tpe => lift(properties::tprime_pairwise_efficiency(alloc, market)),
        PropertyCode::Unan => lift(properties::unanimity(alloc, market)),
        PropertyCode::Sp | PropertyCode::Gsp | PropertyCode::Nb | PropertyCode::Mono => return None,
    })
}

pub fn domain_label(domain: &ProfileDomain) -> String {
    format!("{} {}", domain.tag(), domain.shape())
}

/// Audits a mechanism over every profile of a finite domain.
pub fn audit_mechanism(
    mechanism: &dyn Mechanism,
    domain: &ProfileDomain,
    properties: &[PropertyCode],
    guards: &Guards,
) -> Result<AuditReport, Error> {
    let model = DomainModel::new(domain.clone(), guards)?;
    let table = OutcomeTable::build(mechanism, &model)?;
    audit_table(mechanism.name(), &model, &table, properties, guards)
}

/// Audits a precomputed outcome table.
pub fn audit_table(
    name: String,
    model: &DomainModel,
    table: &OutcomeTable,
    properties: &[PropertyCode],
    guards: &Guards,
) -> Result<AuditReport, Error> {
    let domain = model.domain();
    let mut results = Vec::with_capacity(properties.len());
    for &property in properties {
        let witness = if property.is_allocation_level() {
            (0..domain.len()).into_par_iter().find_map_first(|p| {
                let market = domain.market(p);
                let allocation = model.space().get(table.get(p)).clone();
                match allocation_property(property, &allocation, &market).expect("allocation-level") {
                    Verdict::Satisfied => None,
                    Verdict::Violated(None) => {
                        let agent = properties::individual_rationality(&allocation, &market)
                            .into_witness()
                            .expect("violated");
                        Some(AuditWitness::Rationality {
                            market,
                            allocation,
                            agent,
                        })
                    }
                    Verdict::Violated(Some(witness)) => Some(AuditWitness::Improvement {
                        market,
                        allocation,
                        witness,
                    }),
                }
            })
        } else {
            let verdict = match property {
                PropertyCode::Sp => properties::strategy_proofness(model, table),
                PropertyCode::Nb => properties::non_bossiness(model, table),
                PropertyCode::Gsp => properties::group_strategy_proofness(model, table, guards)?,
                PropertyCode::Mono => properties::monotonicity(model, table),
                _ => unreachable!("mechanism-level codes"),
            };
            verdict.into_witness().map(AuditWitness::Deviation)
        };
        results.push(PropertyResult { property, witness });
    }
    Ok(AuditReport {
        mechanism: name,
        domain: domain_label(domain),
        profiles: domain.len(),
        results,
    })
}
