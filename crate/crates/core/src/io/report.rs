//! Deterministic text and JSON rendering of audit, search, replay and table reports.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::labels::{render_allocation, TypeNames};
use crate::model::{Allocation, Market, Preference, Structure};
use crate::verify::{
    AuditReport, AuditWitness, IndependenceTable, ReplayCase, ReplayReport, SearchOutcome, SearchVerdict, TABLE_ROWS,
};

/// Report format version, bumped together with the market document schema.
pub const REPORT_VERSION: u32 = 1;

pub fn describe_preference(pref: &Preference, names: &TypeNames) -> String {
    let marginal = |ranking: &[usize], ty: usize| -> String {
        ranking.iter().map(|&o| names.object(ty, o)).collect::<Vec<_>>().join(" > ")
    };
    match pref.structure() {
        Structure::Lexicographic { marginals, importance } => {
            let order: Vec<&str> = importance.iter().map(|&t| names.name(t)).collect();
            let ms: Vec<String> = importance
                .iter()
                .map(|&t| format!("{}: {}", names.name(t), marginal(marginals[t].ranking(), t)))
                .collect();
            format!("lexicographic [{}] {}", order.join(" > "), ms.join("; "))
        }
        Structure::Separable { .. } | Structure::Strict => {
            let kind = if pref.marginals().is_some() { "separable" } else { "strict" };
            let ranking: Vec<String> = pref.bundles().map(|b| names.bundle(&b)).collect();
            format!("{kind} {}", ranking.join(" > "))
        }
    }
}

fn market_lines(out: &mut String, indent: &str, market: &Market, names: &TypeNames) {
    for (i, pref) in market.profile().iter().enumerate() {
        let _ = writeln!(out, "{indent}agent {}: {}", i + 1, describe_preference(pref, names));
    }
}

fn market_json(market: &Market, names: &TypeNames) -> Value {
    Value::Array(
        market
            .profile()
            .iter()
            .map(|p| Value::String(describe_preference(p, names)))
            .collect(),
    )
}

fn one_based(agents: &[usize]) -> Vec<usize> {
    agents.iter().map(|a| a + 1).collect()
}

fn join_agents(agents: &[usize]) -> String {
    one_based(agents).iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn witness_text(out: &mut String, w: &AuditWitness, names: &TypeNames) {
    match w {
        AuditWitness::Rationality {
            market,
            allocation,
            agent,
        } => {
            let _ = writeln!(out, "    agent {} prefers its endowment to its allotment", agent + 1);
            market_lines(out, "    ", market, names);
            let _ = writeln!(out, "    outcome: {}", render_allocation(allocation, names));
        }
        AuditWitness::Improvement {
            market,
            allocation,
            witness,
        } => {
            let _ = write!(out, "    {} by agents {}", witness.kind, join_agents(&witness.agents));
            if !witness.types.is_empty() {
                let types: Vec<&str> = witness.types.iter().map(|&t| names.name(t)).collect();
                let _ = write!(out, " in types {}", types.join(", "));
            }
            out.push('\n');
            market_lines(out, "    ", market, names);
            let _ = writeln!(out, "    outcome:  {}", render_allocation(allocation, names));
            let _ = writeln!(out, "    improved: {}", render_allocation(&witness.improved, names));
        }
        AuditWitness::Deviation(d) => {
            if let [i] = d.coalition[..] {
                let _ = writeln!(out, "    agent {} changes its report", i + 1);
            } else {
                let _ = writeln!(out, "    agents {} change their reports", join_agents(&d.coalition));
            }
            out.push_str("    honest profile:\n");
            market_lines(out, "      ", &d.honest, names);
            out.push_str("    reported profile:\n");
            market_lines(out, "      ", &d.reported, names);
            let _ = writeln!(out, "    honest outcome:   {}", render_allocation(&d.honest_outcome, names));
            let _ = writeln!(out, "    reported outcome: {}", render_allocation(&d.reported_outcome, names));
        }
    }
}

fn witness_json(w: &AuditWitness, names: &TypeNames) -> Value {
    let alloc = |a: &Allocation| Value::String(render_allocation(a, names));
    match w {
        AuditWitness::Rationality {
            market,
            allocation,
            agent,
        } => json!({
            "kind": "individual-rationality",
            "agent": agent + 1,
            "profile": market_json(market, names),
            "outcome": alloc(allocation),
        }),
        AuditWitness::Improvement {
            market,
            allocation,
            witness,
        } => json!({
            "kind": witness.kind,
            "agents": one_based(&witness.agents),
            "types": witness.types.iter().map(|&t| names.name(t)).collect::<Vec<_>>(),
            "profile": market_json(market, names),
            "outcome": alloc(allocation),
            "improved": alloc(&witness.improved),
        }),
        AuditWitness::Deviation(d) => json!({
            "kind": d.property,
            "agents": one_based(&d.coalition),
            "honest_profile": market_json(&d.honest, names),
            "reported_profile": market_json(&d.reported, names),
            "honest_outcome": alloc(&d.honest_outcome),
            "reported_outcome": alloc(&d.reported_outcome),
        }),
    }
}

fn sign(ok: bool) -> &'static str {
    if ok {
        "+"
    } else {
        "-"
    }
}

pub fn audit_text(report: &AuditReport, names: &TypeNames) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mechanism: {}", report.mechanism);
    let _ = writeln!(out, "domain: {} ({} profiles)", report.domain, report.profiles);
    for r in &report.results {
        let _ = writeln!(out, "{} ({}): {}", r.property.full_name(), r.property, sign(r.satisfied()));
        if let Some(w) = &r.witness {
            witness_text(&mut out, w, names);
        }
    }
    out
}

pub fn audit_json(report: &AuditReport, names: &TypeNames) -> Value {
    json!({
        "report_version": REPORT_VERSION,
        "mechanism": report.mechanism,
        "domain": report.domain,
        "profiles": report.profiles,
        "results": report.results.iter().map(|r| json!({
            "property": r.property,
            "name": r.property.full_name(),
            "satisfied": r.satisfied(),
            "witness": r.witness.as_ref().map(|w| witness_json(w, names)),
        })).collect::<Vec<_>>(),
    })
}

/// Headline for a search result; uniqueness and impossibility are claimed only for the
/// domain searched.
pub fn search_headline(outcome: &SearchOutcome) -> String {
    let scope = format!("desk-scale, exhaustive over {} ({} profiles)", outcome.domain, outcome.profiles);
    match (&outcome.verdict, &outcome.target) {
        (SearchVerdict::Unique, Some(t)) if t.equals_unique => format!("UNIQUE, equal to {} ({scope})", t.name),
        (verdict, _) => format!("{verdict} ({scope})"),
    }
}

pub fn search_text(outcome: &SearchOutcome) -> String {
    let mut out = String::new();
    let required: Vec<&str> = outcome.required.iter().map(|p| p.code()).collect();
    let _ = writeln!(out, "{}", search_headline(outcome));
    let _ = writeln!(
        out,
        "requirements: {}",
        if required.is_empty() { "none".to_string() } else { required.join(",") }
    );
    let _ = writeln!(out, "allocations per profile: {}", outcome.allocations);
    let _ = writeln!(out, "models found: {}", outcome.models.len());
    let _ = writeln!(
        out,
        "search: {} nodes, {} propagations",
        outcome.stats.nodes, outcome.stats.propagations
    );
    if let Some(t) = &outcome.target {
        let _ = writeln!(out, "target {}: satisfies requirements: {}", t.name, if t.is_model { "yes" } else { "no" });
        if !outcome.models.is_empty() {
            let _ = writeln!(
                out,
                "target {}: differs from first model at {} of {} profiles",
                t.name,
                t.differing_profiles.len(),
                outcome.profiles
            );
        }
    }
    out
}

pub fn search_json(outcome: &SearchOutcome) -> Value {
    json!({
        "report_version": REPORT_VERSION,
        "domain": outcome.domain,
        "profiles": outcome.profiles,
        "allocations": outcome.allocations,
        "required": outcome.required,
        "verdict": outcome.verdict,
        "headline": search_headline(outcome),
        "models": outcome.models,
        "stats": outcome.stats,
        "target": outcome.target,
    })
}

fn case_text(out: &mut String, title: &str, case: &ReplayCase, names: &TypeNames) {
    let _ = writeln!(out, "{title}");
    let honest: Vec<String> = case.honest_outcomes.iter().map(|a| render_allocation(a, names)).collect();
    let forced: Vec<String> = case.forced_outcomes.iter().map(|a| render_allocation(a, names)).collect();
    let _ = writeln!(out, "  honest outcomes in this case: {}", honest.join(" "));
    let _ = writeln!(out, "  agent {} misreports:", case.deviator + 1);
    market_lines(out, "    ", &case.reported, names);
    let _ = writeln!(out, "  admissible outcomes after the misreport: {}", forced.join(" "));
    let _ = writeln!(
        out,
        "  agent {} strictly gains in every admissible outcome: {}",
        case.deviator + 1,
        if case.deviator_gains { "yes" } else { "no" }
    );
}

pub fn replay_text(report: &ReplayReport, names: &TypeNames) -> String {
    let mut out = String::new();
    out.push_str("base profile:\n");
    market_lines(&mut out, "  ", &report.market, names);
    let admissible: Vec<String> = report.admissible.iter().map(|a| render_allocation(a, names)).collect();
    let _ = writeln!(
        out,
        "individually rational, T'-types pairwise efficient allocations: {}",
        admissible.join(" ")
    );
    let _ = writeln!(
        out,
        "every such allocation trades types {} and {}: {}",
        names.name(0),
        names.name(1),
        if report.types01_traded { "yes" } else { "no" }
    );
    case_text(&mut out, &format!("case: type {} traded", names.name(2)), &report.traded, names);
    case_text(&mut out, &format!("case: type {} not traded", names.name(2)), &report.untraded, names);
    let _ = writeln!(
        out,
        "strategy-proofness is violated in both cases: {}",
        if report.contradiction_derived() { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "bTTC at the base profile: {} (T'-types pairwise efficient: {})",
        render_allocation(&report.bttc_outcome, names),
        if report.bttc_tprime_efficient { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "bTTC after agent 1's misreport: {} (T'-types pairwise efficient: {})",
        render_allocation(&report.bttc_misreport_outcome, names),
        if report.bttc_misreport_witness.is_none() { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "  swapping types {} and {} improves both agents: {}",
        names.name(0),
        names.name(1),
        if report.bttc_misreport_swap01_improves { "yes" } else { "no" }
    );
    let _ = writeln!(out, "closure search, requirements ir,sp,tpe: {}", search_headline(&report.closure));
    out
}

pub fn replay_json(report: &ReplayReport, names: &TypeNames) -> Value {
    let alloc = |a: &Allocation| Value::String(render_allocation(a, names));
    let case = |c: &ReplayCase| {
        json!({
            "type3_traded": c.type2_traded,
            "deviator": c.deviator + 1,
            "reported_profile": market_json(&c.reported, names),
            "honest_outcomes": c.honest_outcomes.iter().map(alloc).collect::<Vec<_>>(),
            "forced_outcomes": c.forced_outcomes.iter().map(alloc).collect::<Vec<_>>(),
            "deviator_gains": c.deviator_gains,
        })
    };
    json!({
        "report_version": REPORT_VERSION,
        "profile": market_json(&report.market, names),
        "admissible": report.admissible.iter().map(alloc).collect::<Vec<_>>(),
        "first_two_types_traded": report.types01_traded,
        "case_traded": case(&report.traded),
        "case_untraded": case(&report.untraded),
        "contradiction": report.contradiction_derived(),
        "bttc_outcome": alloc(&report.bttc_outcome),
        "bttc_tprime_efficient": report.bttc_tprime_efficient,
        "bttc_misreport_outcome": alloc(&report.bttc_misreport_outcome),
        "bttc_misreport_tprime_efficient": report.bttc_misreport_witness.is_none(),
        "bttc_misreport_swap_improves": report.bttc_misreport_swap01_improves,
        "closure": search_json(&report.closure),
    })
}

pub fn table_text(table: &IndependenceTable) -> String {
    table.render()
}

pub fn table_json(table: &IndependenceTable) -> Value {
    json!({
        "report_version": REPORT_VERSION,
        "rows": TABLE_ROWS,
        "columns": table.columns.iter().map(|c| json!({
            "label": c.label,
            "mechanism": c.report.mechanism,
            "domain": c.report.domain,
            "profiles": c.report.profiles,
            "cells": TABLE_ROWS.iter().map(|&p| c.cell(p)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "diffs": table.diffs().iter().map(|d| json!({
            "column": d.column,
            "property": d.property,
            "expected": d.expected,
            "actual": d.actual,
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report is plain data");
    s.push('\n');
    s
}
