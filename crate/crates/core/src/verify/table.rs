use std::fmt::Write as _;

use super::audit::{audit_mechanism, AuditReport, PropertyCode};
use crate::error::Error;
use crate::mechanisms::{Bttc, BossyHybrid, Cttc, Mechanism, MultipleSerialIr, NoTrade, SerialDictatorship};
use crate::model::{DomainTag, Guards, MarketShape, ProfileDomain};

pub const TABLE_ROWS: [PropertyCode; 7] = [
    PropertyCode::Ir,
    PropertyCode::Sp,
    PropertyCode::Nb,
    PropertyCode::Gsp,
    PropertyCode::Pe,
    PropertyCode::Ce,
    PropertyCode::Pe2,
];

/// Published satisfaction pattern, columns in table order, rows in [`TABLE_ROWS`] order.
pub const EXPECTED_TABLE: [(&str, [bool; 7]); 6] = [
    ("NT", [true, true, true, true, false, false, false]),
    ("SD", [false, true, true, true, true, true, true]),
    ("MSIR", [true, false, true, false, true, true, true]),
    ("Ex8", [true, true, false, false, false, false, true]),
    ("cTTC", [true, true, true, false, false, true, false]),
    ("bTTC", [true, true, true, true, false, false, true]),
];

#[derive(Clone, Debug)]
pub struct TableColumn {
    pub label: &'static str,
    pub report: AuditReport,
}

impl TableColumn {
    pub fn cell(&self, property: PropertyCode) -> bool {
        self.report.get(property).is_some_and(|r| r.satisfied())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDiff {
    pub column: &'static str,
    pub property: PropertyCode,
    pub expected: bool,
    pub actual: bool,
}

#[derive(Clone, Debug)]
pub struct IndependenceTable {
    pub columns: Vec<TableColumn>,
}

impl IndependenceTable {
    pub fn diffs(&self) -> Vec<CellDiff> {
        let mut out = Vec::new();
        for column in &self.columns {
            let Some((_, expected)) = EXPECTED_TABLE.iter().find(|(l, _)| *l == column.label) else {
                continue;
            };
            for (row, &property) in TABLE_ROWS.iter().enumerate() {
                let actual = column.cell(property);
                if actual != expected[row] {
                    out.push(CellDiff {
                        column: column.label,
                        property,
                        expected: expected[row],
                        actual,
                    });
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = TABLE_ROWS.iter().map(|p| p.full_name().len()).max().unwrap_or(0);
        let _ = write!(out, "{:width$}", "");
        for c in &self.columns {
            let _ = write!(out, "  {:>5}", c.label);
        }
        out.push('\n');
        for &property in &TABLE_ROWS {
            let _ = write!(out, "{:width$}", property.full_name());
            for c in &self.columns {
                let _ = write!(out, "  {:>5}", if c.cell(property) { "+" } else { "-" });
            }
            out.push('\n');
        }
        for c in &self.columns {
            let _ = writeln!(
                out,
                "{}: {} over {} ({} profiles)",
                c.label, c.report.mechanism, c.report.domain, c.report.profiles
            );
        }
        let diffs = self.diffs();
        if diffs.is_empty() {
            out.push_str("diffs against expected table: none\n");
        } else {
            for d in diffs {
                let _ = writeln!(
                    out,
                    "diff: {} {}: expected {}, got {}",
                    d.column,
                    d.property,
                    if d.expected { "+" } else { "-" },
                    if d.actual { "+" } else { "-" }
                );
            }
        }
        out
    }
}

/// Audits the six independence mechanisms. The bossy hybrid is only defined for three
/// agents and two types, so its column always runs on the lexicographic domain there.
pub fn independence_table(shape: MarketShape, tag: DomainTag, guards: &Guards) -> Result<IndependenceTable, Error> {
    let domain = ProfileDomain::full(shape, tag, guards)?;
    let identity: Vec<usize> = (0..shape.agents()).collect();
    let columns: Vec<(&'static str, Box<dyn Mechanism>)> = vec![
        ("NT", Box::new(NoTrade)),
        ("SD", Box::new(SerialDictatorship::new(identity.clone()))),
        ("MSIR", Box::new(MultipleSerialIr::new(identity, guards.max_allocations))),
        ("Ex8", Box::new(BossyHybrid)),
        ("cTTC", Box::new(Cttc)),
        ("bTTC", Box::new(Bttc)),
    ];
    let mut bossy_domain = None;
    let mut out = Vec::with_capacity(columns.len());
    for (label, mech) in columns {
        let report = if label == "Ex8" {
            if bossy_domain.is_none() {
                bossy_domain = Some(ProfileDomain::full(
                    MarketShape::new(3, 2)?,
                    DomainTag::Lexicographic,
                    guards,
                )?);
            }
            audit_mechanism(&mech, bossy_domain.as_ref().expect("built above"), &TABLE_ROWS, guards)?
        } else {
            audit_mechanism(&mech, &domain, &TABLE_ROWS, guards)?
        };
        out.push(TableColumn { label, report });
    }
    Ok(IndependenceTable { columns: out })
}
