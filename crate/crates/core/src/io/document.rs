use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::labels::TypeNames;
use super::ParseError;
use crate::model::{Bundle, DomainTag, MarginalPreference, Market, MarketShape, Preference, Structure};

pub const SCHEMA_VERSION: u32 = 1;

/// Serialization format of a market document.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Toml,
    Json,
}

/// A labelled string, with its byte span when the source format provides one.
trait Label {
    fn text(&self) -> &str;
    fn span(&self) -> Option<Range<usize>>;
}

impl Label for String {
    fn text(&self) -> &str {
        self
    }

    fn span(&self) -> Option<Range<usize>> {
        None
    }
}

impl Label for toml::Spanned<String> {
    fn text(&self) -> &str {
        self.get_ref()
    }

    fn span(&self) -> Option<Range<usize>> {
        Some(toml::Spanned::span(self))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "L: Deserialize<'de>", serialize = "L: Serialize"))]
struct RawDocument<L> {
    schema_version: u32,
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    type_names: Option<Vec<L>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<L>,
    agents: Vec<RawAgent<L>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "L: Deserialize<'de>", serialize = "L: Serialize"))]
struct RawAgent<L> {
    kind: L,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    marginals: Option<Vec<Vec<L>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ranking: Option<Vec<L>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    importance: Option<Vec<L>>,
}

/// A parsed market together with the type names its document used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarketFile {
    pub market: Market,
    pub type_names: TypeNames,
}

/// Line and column (both 1-based) of a byte offset.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Ctx<'a> {
    source: Option<&'a str>,
}

impl Ctx<'_> {
    fn err<L: Label>(&self, at: Option<&L>, field: &str, message: impl Into<String>) -> ParseError {
        let mut e = ParseError::new(message).at_field(field);
        if let (Some(src), Some(span)) = (self.source, at.and_then(Label::span)) {
            let (line, column) = locate(src, span.start);
            e = e.at_line(line, column);
        }
        e
    }
}

pub fn parse_market(text: &str) -> Result<Market, ParseError> {
    parse_market_file(text, Format::Toml).map(|f| f.market)
}

pub fn parse_market_file(text: &str, format: Format) -> Result<MarketFile, ParseError> {
    match format {
        Format::Toml => {
            let raw: RawDocument<toml::Spanned<String>> = toml::from_str(text).map_err(|e| {
                let mut err = ParseError::new(e.message().trim().to_string());
                if let Some(span) = e.span() {
                    let (line, column) = locate(text, span.start);
                    err = err.at_line(line, column);
                }
                err
            })?;
            build(&raw, &Ctx { source: Some(text) })
        }
        Format::Json => {
            let raw: RawDocument<String> = serde_json::from_str(text)
                .map_err(|e| ParseError::new(e.to_string()).at_line(e.line(), e.column()))?;
            build(&raw, &Ctx { source: None })
        }
    }
}

fn build<L: Label>(raw: &RawDocument<L>, ctx: &Ctx<'_>) -> Result<MarketFile, ParseError> {
    if raw.schema_version != SCHEMA_VERSION {
        return Err(ParseError::new(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        ))
        .at_field("schema_version"));
    }
    let shape = MarketShape::new(raw.n, raw.m).map_err(|e| ParseError::new(e.to_string()).at_field("n, m"))?;
    let names = match &raw.type_names {
        None => TypeNames::default_for(raw.m),
        Some(list) => {
            let texts: Vec<String> = list.iter().map(|l| l.text().to_string()).collect();
            TypeNames::new(texts).map_err(|msg| ctx.err(list.first(), "type_names", msg))?
        }
    };
    if names.len() != raw.m {
        return Err(ParseError::new(format!("{} type names for m = {}", names.len(), raw.m)).at_field("type_names"));
    }
    let domain = raw
        .domain
        .as_ref()
        .map(|d| d.text().parse::<DomainTag>().map_err(|msg| ctx.err(Some(d), "domain", msg)))
        .transpose()?;
    if raw.agents.len() != raw.n {
        return Err(ParseError::new(format!("{} agents listed for n = {}", raw.agents.len(), raw.n)).at_field("agents"));
    }
    let mut profile = Vec::with_capacity(raw.n);
    for (i, agent) in raw.agents.iter().enumerate() {
        let field = |f: &str| format!("agents[{i}].{f}");
        let missing =
            |name: &str| ctx.err(Some(&agent.kind), &field(name), format!("`{}` agents need `{name}`", agent.kind.text()));
        let reject = |present: bool, name: &str| {
            if present {
                Err(ctx.err(
                    Some(&agent.kind),
                    &field(name),
                    format!("`{}` agents take no `{name}`", agent.kind.text()),
                ))
            } else {
                Ok(())
            }
        };
        let pref = match agent.kind.text() {
            "strict" => {
                reject(agent.marginals.is_some(), "marginals")?;
                reject(agent.importance.is_some(), "importance")?;
                let ranking = agent.ranking.as_ref().ok_or_else(|| missing("ranking"))?;
                let order = bundles(shape, &names, ranking, &field("ranking"), ctx)?;
                Preference::strict(shape, order).map_err(|e| ctx.err(ranking.first(), &field("ranking"), e.to_string()))?
            }
            "separable" => {
                reject(agent.importance.is_some(), "importance")?;
                let ms = marginal_list(shape, &names, agent.marginals.as_ref().ok_or_else(|| missing("marginals"))?, &field("marginals"), ctx)?;
                let ranking = agent.ranking.as_ref().ok_or_else(|| missing("ranking"))?;
                let order = bundles(shape, &names, ranking, &field("ranking"), ctx)?;
                Preference::separable(shape, ms, order)
                    .map_err(|e| ctx.err(ranking.first(), &field("ranking"), e.to_string()))?
            }
            "lexicographic" => {
                reject(agent.ranking.is_some(), "ranking")?;
                let ms = marginal_list(shape, &names, agent.marginals.as_ref().ok_or_else(|| missing("marginals"))?, &field("marginals"), ctx)?;
                let importance = agent.importance.as_ref().ok_or_else(|| missing("importance"))?;
                let mut pi = Vec::with_capacity(importance.len());
                for l in importance {
                    let t = names
                        .index_of(l.text())
                        .ok_or_else(|| ctx.err(Some(l), &field("importance"), format!("unknown type `{}`", l.text())))?;
                    pi.push(t);
                }
                Preference::lexicographic(shape, ms, pi)
                    .map_err(|e| ctx.err(importance.first(), &field("importance"), e.to_string()))?
            }
            other => {
                return Err(ctx.err(
                    Some(&agent.kind),
                    &field("kind"),
                    format!("unknown kind `{other}` (expected strict, separable or lexicographic)"),
                ))
            }
        };
        profile.push(pref);
    }
    let tag = domain.unwrap_or_else(|| Market::declared_domain(&profile));
    let market = Market::new(shape, profile, tag).map_err(|e| ParseError::new(e.to_string()).at_field("agents"))?;
    Ok(MarketFile {
        market,
        type_names: names,
    })
}

fn bundles<L: Label>(
    shape: MarketShape,
    names: &TypeNames,
    list: &[L],
    field: &str,
    ctx: &Ctx<'_>,
) -> Result<Vec<Bundle>, ParseError> {
    let mut seen = std::collections::HashSet::new();
    list.iter()
        .map(|l| {
            let b = names
                .parse_bundle(shape, l.text())
                .map_err(|msg| ctx.err(Some(l), field, msg))?;
            if !seen.insert(b.clone()) {
                return Err(ctx.err(Some(l), field, format!("duplicate bundle {}", l.text())));
            }
            Ok(b)
        })
        .collect()
}

fn marginal_list<L: Label>(
    shape: MarketShape,
    names: &TypeNames,
    lists: &[Vec<L>],
    field: &str,
    ctx: &Ctx<'_>,
) -> Result<Vec<MarginalPreference>, ParseError> {
    if lists.len() != shape.types() {
        return Err(ParseError::new(format!("{} marginals for m = {}", lists.len(), shape.types())).at_field(field));
    }
    lists
        .iter()
        .enumerate()
        .map(|(t, list)| {
            let field = format!("{field}[{t}]");
            let mut owners = Vec::with_capacity(list.len());
            for l in list {
                let o = names
                    .parse_object(shape, l.text())
                    .map_err(|msg| ctx.err(Some(l), &field, msg))?;
                if o.ty != t {
                    return Err(ctx.err(
                        Some(l),
                        &field,
                        format!("object {} is not of type {}", l.text(), names.name(t)),
                    ));
                }
                owners.push(o.owner);
            }
            MarginalPreference::new(t, owners).map_err(|e| ctx.err(list.first(), &field, e.to_string()))
        })
        .collect()
}

fn raw_document(market: &Market, names: &TypeNames) -> RawDocument<String> {
    let shape = market.shape();
    let marginals = |ms: &[MarginalPreference]| -> Vec<Vec<String>> {
        ms.iter()
            .map(|m| m.ranking().iter().map(|&o| names.object(m.ty(), o)).collect())
            .collect()
    };
    let ranking = |p: &Preference| -> Vec<String> { p.bundles().map(|b| names.bundle(&b)).collect() };
    let agents = market
        .profile()
        .iter()
        .map(|p| match p.structure() {
            Structure::Strict => RawAgent {
                kind: "strict".into(),
                marginals: None,
                ranking: Some(ranking(p)),
                importance: None,
            },
            Structure::Separable { marginals: ms } => RawAgent {
                kind: "separable".into(),
                marginals: Some(marginals(ms)),
                ranking: Some(ranking(p)),
                importance: None,
            },
            Structure::Lexicographic {
                marginals: ms,
                importance,
            } => RawAgent {
                kind: "lexicographic".into(),
                marginals: Some(marginals(ms)),
                ranking: None,
                importance: Some(importance.iter().map(|&t| names.name(t).to_string()).collect()),
            },
        })
        .collect();
    RawDocument {
        schema_version: SCHEMA_VERSION,
        n: shape.agents(),
        m: shape.types(),
        type_names: Some(names.names().to_vec()),
        domain: Some(market.domain().to_string()),
        agents,
    }
}

fn quoted_list(items: &[String]) -> String {
    let inner: Vec<String> = items.iter().map(|s| format!("\"{s}\"")).collect();
    format!("[{}]", inner.join(", "))
}

/// Writes a market document. Output is deterministic and parses back to the same market.
pub fn serialize_market(market: &Market, names: &TypeNames, format: Format) -> String {
    let raw = raw_document(market, names);
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&raw).expect("document is plain data");
            s.push('\n');
            s
        }
        Format::Toml => {
            let mut out = String::new();
            let _ = writeln!(out, "schema_version = {}", raw.schema_version);
            let _ = writeln!(out, "n = {}", raw.n);
            let _ = writeln!(out, "m = {}", raw.m);
            if let Some(names) = &raw.type_names {
                let _ = writeln!(out, "type_names = {}", quoted_list(names));
            }
            if let Some(domain) = &raw.domain {
                let _ = writeln!(out, "domain = \"{domain}\"");
            }
            for agent in &raw.agents {
                out.push_str("\n[[agents]]\n");
                let marginal_lines = |out: &mut String, ms: &[Vec<String>]| {
                    out.push_str("marginals = [\n");
                    for m in ms {
                        let _ = writeln!(out, "  {},", quoted_list(m));
                    }
                    out.push_str("]\n");
                };
                let _ = writeln!(out, "kind = \"{}\"", agent.kind);
                if let Some(ms) = &agent.marginals {
                    marginal_lines(&mut out, ms);
                }
                if let Some(ranking) = &agent.ranking {
                    let _ = writeln!(out, "ranking = {}", quoted_list(ranking));
                }
                if let Some(importance) = &agent.importance {
                    let _ = writeln!(out, "importance = {}", quoted_list(importance));
                }
            }
            out
        }
    }
}
