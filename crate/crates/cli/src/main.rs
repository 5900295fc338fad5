use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use housing::io::report::{self, describe_preference, to_json_text};
use housing::io::{parse_allocation, parse_market_file, render_allocation, render_allotments, render_cycle, Format, TypeNames};
use housing::mechanisms::{self, MechanismOptions, RegistryError, MECHANISM_NAMES};
use housing::verify::{
    audit_mechanism, full_domain_search, independence_table, replay_proof_a5, search_mechanisms, PropertyCode,
    SearchInstance, SearchOptions, SearchVerdict,
};
use housing::{enumerate_preferences, AllocationSpace, DomainTag, Guards, MarketShape, ProfileDomain};
use serde_json::json;

#[derive(Parser)]
#[command(name = "housing", version, about = "Mechanisms and property checks for multiple-type housing markets")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Raise a guard, e.g. `max-profiles=5000000`, or `unlimited`.
    #[arg(long = "guard-override", global = true, value_name = "KEY=VALUE")]
    guard_override: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on a market file.
    Run(RunArgs),
    /// Audit a mechanism over every profile of a domain.
    Audit(AuditArgs),
    /// Reproduce the independence table of the six reference mechanisms.
    Table(TableArgs),
    /// Search for mechanisms on a domain that satisfy a set of properties.
    Search(SearchArgs),
    /// Count (or list) the preferences, profiles and allocations of a domain.
    Enumerate(EnumerateArgs),
    /// Replay the two-agent, three-type impossibility argument.
    #[command(name = "replay-a5")]
    ReplayA5(ReplayArgs),
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// strict, separable, lexicographic or lex-common.
    #[arg(long)]
    domain: String,
}

#[derive(Args)]
struct MechanismArgs {
    #[arg(long)]
    mechanism: String,
    /// Picking order for serial mechanisms, 1-based, e.g. `2,1`.
    #[arg(long)]
    order: Option<String>,
    /// Target allocation for y-unanimity, e.g. `((H2,C2),(H1,C1))`.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    mechanism: MechanismArgs,
    #[arg(long)]
    market: PathBuf,
    /// Read the market file as JSON.
    #[arg(long)]
    json_market: bool,
    /// Print the trading cycles of TTC-based mechanisms.
    #[arg(long)]
    trace: bool,
    /// Expected allocation; exit 1 if the outcome differs.
    #[arg(long)]
    expect: Option<String>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    mechanism: MechanismArgs,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Properties to audit; all when absent.
    #[arg(long)]
    require: Option<String>,
    /// Expected verdicts, e.g. `ir+,sp-`; exit 1 on any mismatch.
    #[arg(long)]
    expect: Option<String>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// `match`: exit 1 unless every cell matches the expected table.
    #[arg(long)]
    expect: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Required properties, e.g. `ir,sp,ce`.
    #[arg(long, default_value = "")]
    require: String,
    /// Mechanism to compare the result with.
    #[arg(long)]
    target: Option<String>,
    /// Picking order for a serial target mechanism, 1-based.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, default_value_t = 2)]
    model_cap: usize,
    /// unsat, unique or multiple; exit 1 on mismatch.
    #[arg(long)]
    expect: Option<String>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Also list every preference.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Also search the whole lexicographic domain at two agents and three types.
    #[arg(long)]
    full: bool,
    /// `contradiction`: exit 1 unless both cases end in a profitable misreport.
    #[arg(long)]
    expect: Option<String>,
}

/// A failure reported on stderr with exit status 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn suggest(word: &str, candidates: &[&str]) -> String {
    let best = candidates
        .iter()
        .map(|c| (strsim::levenshtein(word, c), *c))
        .filter(|(d, _)| *d <= 3)
        .min();
    let mut msg = format!("expected one of: {}", candidates.join(", "));
    if let Some((_, c)) = best {
        msg = format!("did you mean `{c}`? {msg}");
    }
    msg
}

fn parse_domain(name: &str) -> Result<DomainTag, Failure> {
    name.parse().map_err(|_| {
        Failure(format!(
            "unknown domain `{name}`; {}",
            suggest(name, &["strict", "separable", "lexicographic", "lex-common"])
        ))
    })
}

fn parse_properties(list: &str) -> Result<Vec<PropertyCode>, Failure> {
    PropertyCode::parse_list(list).map_err(|_| {
        let codes: Vec<&str> = PropertyCode::ALL.iter().map(|c| c.code()).collect();
        let bad = list
            .split(',')
            .map(str::trim)
            .find(|s| !s.is_empty() && s.parse::<PropertyCode>().is_err())
            .unwrap_or(list);
        Failure(format!("unknown property code `{bad}`; {}", suggest(bad, &codes)))
    })
}

fn parse_order(order: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let order: Vec<usize> = order
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure(format!("bad order `{order}`: expected 1-based agents like `2,1`")))?;
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != (1..=n).collect::<Vec<_>>() {
        return Err(Failure(format!("order must list each of the agents 1..={n} once")));
    }
    Ok(order.into_iter().map(|a| a - 1).collect())
}

fn parse_guards(overrides: &[String]) -> Result<Guards, Failure> {
    let mut guards = Guards::default();
    for item in overrides {
        if item == "unlimited" {
            guards = Guards::unlimited();
            continue;
        }
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure(format!("guard override `{item}` must be KEY=VALUE or `unlimited`")))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| Failure(format!("guard override `{item}` needs a whole number")))?;
        let as_usize = usize::try_from(value).unwrap_or(usize::MAX);
        let keys = [
            "max-strict-bundles",
            "max-separable-bundles",
            "max-preferences",
            "max-profiles",
            "max-allocations",
            "max-search-variables",
            "max-pair-checks",
        ];
        match key.trim() {
            "max-strict-bundles" => guards.max_strict_bundles = as_usize,
            "max-separable-bundles" => guards.max_separable_bundles = as_usize,
            "max-preferences" => guards.max_preferences = as_usize,
            "max-profiles" => guards.max_profiles = as_usize,
            "max-allocations" => guards.max_allocations = as_usize,
            "max-search-variables" => guards.max_search_variables = as_usize,
            "max-pair-checks" => guards.max_pair_checks = value,
            other => return Err(Failure(format!("unknown guard `{other}`; {}", suggest(other, &keys)))),
        }
    }
    Ok(guards)
}

/// `H`, `C` for houses and cars at two types, letters otherwise.
fn names_for(m: usize) -> TypeNames {
    if m == 2 {
        TypeNames::houses_and_cars()
    } else {
        TypeNames::default_for(m)
    }
}

fn build_mechanism(
    args: &MechanismArgs,
    shape: MarketShape,
    names: &TypeNames,
    guards: &Guards,
) -> Result<Box<dyn mechanisms::Mechanism>, Failure> {
    let options = MechanismOptions {
        order: args.order.as_deref().map(|o| parse_order(o, shape.agents())).transpose()?,
        target: args
            .target
            .as_deref()
            .map(|t| parse_allocation(t, shape, names).map_err(Failure))
            .transpose()?,
        guards: *guards,
    };
    mechanisms::by_name(&args.mechanism, shape.agents(), &options).map_err(|e| match e {
        RegistryError::Unknown(name) => {
            let names: Vec<&str> = MECHANISM_NAMES.iter().map(|(c, _)| *c).collect();
            Failure(format!("unknown mechanism `{name}`; {}", suggest(&name, &names)))
        }
        other => Failure(other.to_string()),
    })
}

fn domain_of(shape: &ShapeArgs, guards: &Guards) -> Result<ProfileDomain, Failure> {
    let tag = parse_domain(&shape.domain)?;
    let s = MarketShape::new(shape.n, shape.m)?;
    Ok(ProfileDomain::full(s, tag, guards)?)
}

fn emit(format: OutputFormat, text: String, value: serde_json::Value) {
    match format {
        OutputFormat::Text => print!("{text}"),
        OutputFormat::Json => print!("{}", to_json_text(&value)),
    }
}

fn run(args: &RunArgs, format: OutputFormat, guards: &Guards) -> Outcome {
    let text = std::fs::read_to_string(&args.market)
        .map_err(|e| Failure(format!("cannot read {}: {e}", args.market.display())))?;
    let file_format = if args.json_market { Format::Json } else { Format::Toml };
    let file = parse_market_file(&text, file_format).map_err(|e| Failure(format!("{}: {e}", args.market.display())))?;
    let (market, names) = (&file.market, &file.type_names);
    let mech = build_mechanism(&args.mechanism, market.shape(), names, guards)?;
    let alloc = mech.allocate(market)?;
    let mut trace: Vec<String> = Vec::new();
    if args.trace {
        match mech.name().as_str() {
            "bttc" => {
                let (_, cycles) = mechanisms::bttc_with_trace(market);
                trace = cycles.iter().map(|c| format!("step {}: {}", c.step, render_cycle(c, names))).collect();
            }
            "bttc-stepwise" => {
                let (_, cycles) = mechanisms::bttc_stepwise(market)?;
                trace = cycles.iter().map(|c| format!("step {}: {}", c.step, render_cycle(c, names))).collect();
            }
            "cttc" => {
                let (_, per_type) = mechanisms::cttc_with_trace(market)?;
                for (t, cycles) in per_type.iter().enumerate() {
                    trace.extend(
                        cycles
                            .iter()
                            .map(|c| format!("type {} step {}: {}", names.name(t), c.step, render_cycle(c, names))),
                    );
                }
            }
            _ => {}
        }
    }
    let rendered = render_allocation(&alloc, names);
    let mut out = format!("{}: {rendered}\n{}", mech.name(), render_allotments(&alloc, names));
    for line in &trace {
        out.push_str(line);
        out.push('\n');
    }
    let value = json!({
        "report_version": report::REPORT_VERSION,
        "mechanism": mech.name(),
        "allocation": rendered,
        "trace": trace,
    });
    emit(format, out, value);
    match &args.expect {
        None => Ok(true),
        Some(expected) => {
            let expected = parse_allocation(expected, market.shape(), names).map_err(Failure)?;
            Ok(expected == alloc)
        }
    }
}

fn audit(args: &AuditArgs, format: OutputFormat, guards: &Guards) -> Outcome {
    let domain = domain_of(&args.shape, guards)?;
    let names = names_for(args.shape.m);
    let mech = build_mechanism(&args.mechanism, domain.shape(), &names, guards)?;
    let props = match &args.require {
        Some(list) => parse_properties(list)?,
        None => PropertyCode::ALL.to_vec(),
    };
    let expected: Vec<(PropertyCode, bool)> = match &args.expect {
        None => Vec::new(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (code, holds) = match item.strip_suffix('-') {
                    Some(code) => (code, false),
                    None => (item.strip_suffix('+').unwrap_or(item), true),
                };
                Ok((parse_properties(code)?[0], holds))
            })
            .collect::<Result<_, Failure>>()?,
    };
    let mut props = props;
    for (code, _) in &expected {
        if !props.contains(code) {
            props.push(*code);
        }
    }
    let result = audit_mechanism(&mech, &domain, &props, guards)?;
    emit(format, report::audit_text(&result, &names), report::audit_json(&result, &names));
    Ok(expected
        .iter()
        .all(|(code, holds)| result.get(*code).is_some_and(|r| r.satisfied() == *holds)))
}

fn table(args: &TableArgs, format: OutputFormat, guards: &Guards) -> Outcome {
    let tag = parse_domain(&args.shape.domain)?;
    let shape = MarketShape::new(args.shape.n, args.shape.m)?;
    let table = independence_table(shape, tag, guards)?;
    emit(format, report::table_text(&table), report::table_json(&table));
    match args.expect.as_deref() {
        None => Ok(true),
        Some("match") => Ok(table.diffs().is_empty()),
        Some(other) => Err(Failure(format!("unknown expectation `{other}` for table; expected `match`"))),
    }
}

fn search(args: &SearchArgs, format: OutputFormat, guards: &Guards, parallel: bool) -> Outcome {
    let domain = domain_of(&args.shape, guards)?;
    let required = parse_properties(&args.require)?;
    let expected = args
        .expect
        .as_deref()
        .map(|e| match e.to_ascii_lowercase().as_str() {
            "unsat" => Ok(SearchVerdict::Unsat),
            "unique" => Ok(SearchVerdict::Unique),
            "multiple" => Ok(SearchVerdict::Multiple),
            _ => Err(Failure(format!("unknown verdict `{e}`; {}", suggest(e, &["unsat", "unique", "multiple"])))),
        })
        .transpose()?;
    let names = names_for(args.shape.m);
    let target = args
        .target
        .as_ref()
        .map(|t| {
            let margs = MechanismArgs {
                mechanism: t.clone(),
                order: args.order.clone(),
                target: None,
            };
            build_mechanism(&margs, domain.shape(), &names, guards)
        })
        .transpose()?;
    let instance = SearchInstance::new(domain, &required, guards)?;
    let options = SearchOptions {
        model_cap: args.model_cap,
        parallel,
    };
    let outcome = search_mechanisms(&instance, &options, target.as_deref())?;
    emit(format, report::search_text(&outcome), report::search_json(&outcome));
    Ok(expected.is_none_or(|v| v == outcome.verdict))
}

fn enumerate(args: &EnumerateArgs, format: OutputFormat, guards: &Guards) -> Outcome {
    let tag = parse_domain(&args.shape.domain)?;
    let shape = MarketShape::new(args.shape.n, args.shape.m)?;
    let names = names_for(shape.types());
    let prefs: Vec<_> = enumerate_preferences(shape, tag, guards)?.collect();
    let profiles = (prefs.len() as u128).checked_pow(shape.agents() as u32);
    let allocations = shape.allocation_count();
    let show = |v: Option<u128>| v.map_or_else(|| "more than 2^128".to_string(), |v| v.to_string());
    let mut text = format!(
        "{tag} {shape}\npreferences per agent: {}\nprofiles: {}\nallocations: {}\n",
        prefs.len(),
        show(profiles),
        show(allocations)
    );
    let listed: Vec<String> = if args.list {
        prefs.iter().map(|p| describe_preference(p, &names)).collect()
    } else {
        Vec::new()
    };
    for (k, line) in listed.iter().enumerate() {
        text.push_str(&format!("{:>6}  {line}\n", k + 1));
    }
    if args.list && guards.max_allocations as u128 >= allocations.unwrap_or(u128::MAX) {
        let space = AllocationSpace::new(shape, guards.max_allocations)?;
        text.push_str("allocations:\n");
        for (k, a) in space.iter().enumerate() {
            text.push_str(&format!("{:>6}  {}\n", k + 1, render_allocation(a, &names)));
        }
    }
    let value = json!({
        "report_version": report::REPORT_VERSION,
        "domain": tag.to_string(),
        "n": shape.agents(),
        "m": shape.types(),
        "preferences_per_agent": prefs.len(),
        "profiles": show(profiles),
        "allocations": show(allocations),
        "preferences": listed,
    });
    emit(format, text, value);
    Ok(true)
}

fn replay(args: &ReplayArgs, format: OutputFormat, guards: &Guards, parallel: bool) -> Outcome {
    let names = TypeNames::default_for(3);
    let result = replay_proof_a5(guards)?;
    let mut text = report::replay_text(&result, &names);
    let mut value = report::replay_json(&result, &names);
    if args.full {
        let full = full_domain_search(guards, &SearchOptions { model_cap: 2, parallel })?;
        text.push_str(&format!("full-domain search, requirements ir,sp,tpe: {}\n", report::search_headline(&full)));
        value["full_domain"] = report::search_json(&full);
    }
    emit(format, text, value);
    match args.expect.as_deref() {
        None => Ok(true),
        Some("contradiction") => Ok(result.contradiction_derived()),
        Some(other) => Err(Failure(format!("unknown expectation `{other}` for replay-a5; expected `contradiction`"))),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let guards = parse_guards(&cli.guard_override)?;
    let parallel = cli.jobs != Some(1);
    match &cli.command {
        Command::Run(a) => run(a, cli.format, &guards),
        Command::Audit(a) => audit(a, cli.format, &guards),
        Command::Table(a) => table(a, cli.format, &guards),
        Command::Search(a) => search(a, cli.format, &guards, parallel),
        Command::Enumerate(a) => enumerate(a, cli.format, &guards),
        Command::ReplayA5(a) => replay(a, cli.format, &guards, parallel),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(0) => Err(Failure("--jobs must be at least 1".into())),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("housing: result does not match --expect");
            ExitCode::from(1)
        }
        Err(Failure(msg)) => {
            eprintln!("housing: {msg}");
            ExitCode::from(2)
        }
    }
}
