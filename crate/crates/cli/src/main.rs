//! Batch front end for algebraic-epistemic diagram analysis.
//!
//! Every subcommand reads a diagram document (file path or `-` for
//! stdin), runs one analysis, and writes a deterministic report to
//! stdout or `-o`. Exit codes follow a fixed contract: 0 when the
//! analysis holds, 1 when it comes back negative (a failed check, an
//! uncompletable diagram, differing documents), 2 on usage or input
//! errors.

use std::collections::BTreeMap;
use std::io::{IsTerminal, Read, Write};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};

use aediag::algebra::AlgebraArrow;
use aediag::analysis::{
    apply_leak, classify_events, enumerate_orderings, enumerate_scenarios, restrict_view,
    ChordPolicy, EventClass, LeakRule, Scenario, TagChange,
};
use aediag::diagram::{check_commutes, Diagram, EdgeRef};
use aediag::ifo::{check_ifo, complete_ifo};
use aediag::io::{
    diff_diagrams, document_value, export_dot, parse_arrow_value, parse_document,
    parse_document_value, serialize_document, DotAnnotations,
};
use aediag::lattice::Tag;
use aediag::protocols::{
    cake_matrix_demo, gen_cake, gen_dh2, gen_dh_pairwise, gen_dh_ring, gen_dh_subsets, DhParams,
};
use aediag::Error;

/// Analyze algebraic-epistemic protocol diagrams.
#[derive(Parser)]
#[command(name = "aediag", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a protocol diagram document.
    Gen(GenArgs),
    /// Check commutation and the information-flow condition.
    Check(CheckArgs),
    /// Complete under-informed tags to their least fixpoint.
    Complete(CompleteArgs),
    /// Restrict a diagram to the edges a participant set knows.
    View(ViewArgs),
    /// Grow tags by leak rules and re-complete the diagram.
    Leak(LeakArgs),
    /// Classify edges into primitive, computation, and announcement events.
    Events(EventsArgs),
    /// Enumerate triangulation scenarios of a polygon.
    Triangulate(TriangulateArgs),
    /// Count and list admissible orderings of selection events.
    Orderings(OrderingsArgs),
    /// Export the diagram in Graphviz DOT format.
    Dot(DotArgs),
    /// Compare two documents, or validate a leak report.
    Diff(DiffArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Two-party key exchange.
    Dh2,
    /// Pairwise key exchange between every pair of owners.
    DhPairwise,
    /// Cyclic group key exchange.
    DhRing,
    /// Shared keys for every owner subset of size up to k.
    DhNk,
    /// Commuting matrix-pool protocol.
    Cake,
}

#[derive(Args)]
struct GenArgs {
    /// Protocol family to generate.
    #[arg(value_enum)]
    family: Preset,
    /// Prime modulus.
    #[arg(long, default_value_t = 101)]
    p: u64,
    /// Public root.
    #[arg(long, default_value_t = 2)]
    g: u64,
    /// Owner keys as NAME=EXP pairs, e.g. A=3,B=4.
    #[arg(long, value_delimiter = ',')]
    keys: Vec<String>,
    /// Eavesdroppers appearing in every public tag.
    #[arg(long, value_delimiter = ',', default_value = "E")]
    eve: Vec<String>,
    /// Number of owners, when --keys is not given.
    #[arg(long)]
    n: Option<usize>,
    /// Subset size for dh-nk.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Named parameter preset for cake.
    #[arg(long, value_parser = ["cake-matrix-demo"], default_value = "cake-matrix-demo")]
    preset: String,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Input document, `-` for stdin.
    #[arg(default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct CompleteArgs {
    #[arg(default_value = "-")]
    input: String,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct ViewArgs {
    #[arg(default_value = "-")]
    input: String,
    /// Participants whose view to take, e.g. A,B.
    #[arg(long, value_delimiter = ',', required = true)]
    who: Vec<String>,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LeakEmit {
    /// Full before/after/diff envelope.
    Report,
    /// Only the leaked, re-completed document.
    Diagram,
}

#[derive(Args)]
struct LeakArgs {
    #[arg(default_value = "-")]
    input: String,
    /// Leak rule: `pow:<key>+<adds>` or `tag:{A,B}+<adds>`.
    #[arg(long = "rule")]
    rules: Vec<String>,
    /// JSON file with an array of leak rules.
    #[arg(long)]
    rules_file: Option<String>,
    #[arg(long, value_enum, default_value_t = LeakEmit::Report)]
    emit: LeakEmit,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct EventsArgs {
    #[arg(default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Audience,
    Minimal,
}

#[derive(Args)]
struct TriangulateArgs {
    #[arg(default_value = "-")]
    input: String,
    /// Target edge as SRC:DST.
    #[arg(long, required = true)]
    edge: String,
    /// Tag policy for inserted chords.
    #[arg(long, value_enum, default_value_t = PolicyArg::Audience)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct OrderingsArgs {
    #[arg(default_value = "-")]
    input: String,
    /// Maximum number of orderings to list.
    #[arg(long, default_value_t = 10)]
    limit: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Annotate {
    None,
    /// Color flow violations red.
    Flow,
    /// Color announcements blue and computations green.
    Events,
}

#[derive(Args)]
struct DotArgs {
    #[arg(default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = Annotate::None)]
    annotate: Annotate,
    #[arg(short, long)]
    output: Option<String>,
}

#[derive(Args)]
struct DiffArgs {
    /// Left document, or a leak report when RIGHT is absent.
    #[arg(default_value = "-")]
    left: String,
    /// Right document.
    right: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(short, long)]
    output: Option<String>,
}

/// Analysis verdicts that exit 1 instead of 2.
fn is_negative_verdict(e: &Error) -> bool {
    matches!(e, Error::NoIfoAbove { .. } | Error::NotIfo)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            if let Some(core) = e.downcast_ref::<Error>() {
                if is_negative_verdict(core) {
                    eprintln!("aediag: {core}");
                    return ExitCode::from(1);
                }
            }
            eprintln!("aediag: error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Check(args) => cmd_check(args),
        Command::Complete(args) => cmd_complete(args),
        Command::View(args) => cmd_view(args),
        Command::Leak(args) => cmd_leak(args),
        Command::Events(args) => cmd_events(args),
        Command::Triangulate(args) => cmd_triangulate(args),
        Command::Orderings(args) => cmd_orderings(args),
        Command::Dot(args) => cmd_dot(args),
        Command::Diff(args) => cmd_diff(args),
    }
}

fn read_input(path: &str) -> anyhow::Result<String> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn write_output(output: &Option<String>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) if path != "-" => {
            std::fs::write(path, text).with_context(|| format!("writing {path}"))
        }
        _ => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .context("writing stdout")?;
            Ok(())
        }
    }
}

fn load(path: &str) -> anyhow::Result<(Diagram, BTreeMap<String, String>)> {
    let text = read_input(path)?;
    Ok(parse_document(&text)?)
}

fn json_line(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    text
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn verdict_line(ok: bool) -> String {
    let word = if ok { "ok" } else { "FAIL" };
    if use_color() {
        let code = if ok { "32" } else { "31" };
        format!("\x1b[{code}m{word}\x1b[0m")
    } else {
        word.to_string()
    }
}

/// Renders a path of edges as its node chain, `a -> b -> c`.
fn path_chain(path: &[EdgeRef]) -> String {
    let mut out = String::new();
    for (i, e) in path.iter().enumerate() {
        if i == 0 {
            out.push_str(&e.src);
        }
        out.push_str(" -> ");
        out.push_str(&e.dst);
    }
    out
}

fn default_owner_names() -> Vec<&'static str> {
    // E is reserved for the default eavesdropper.
    vec!["A", "B", "C", "D", "F", "G", "H", "I", "J", "K"]
}

fn gen_params(args: &GenArgs, default_n: usize) -> anyhow::Result<DhParams> {
    let keys: Vec<(String, u64)> = if args.keys.is_empty() {
        let n = args.n.unwrap_or(default_n);
        let names = default_owner_names();
        if n == 0 || n > names.len() {
            bail!("--n must be between 1 and {}", names.len());
        }
        names[..n]
            .iter()
            .enumerate()
            .map(|(i, name)| (name.to_string(), 3 + i as u64))
            .collect()
    } else {
        let mut keys = Vec::new();
        for part in &args.keys {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("--keys entries look like NAME=EXP, got {part:?}"))?;
            let value: u64 = value
                .parse()
                .with_context(|| format!("exponent in {part:?}"))?;
            keys.push((name.to_string(), value));
        }
        if let Some(n) = args.n {
            if n != keys.len() {
                bail!("--n {} disagrees with {} --keys entries", n, keys.len());
            }
        }
        keys
    };
    let mut params = DhParams::new(args.p, args.g, keys);
    params.eavesdroppers = args.eve.clone();
    Ok(params)
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let mut metadata = BTreeMap::new();
    if matches!(args.family, Preset::Cake) {
        let params = cake_matrix_demo()?;
        metadata.insert("preset".to_string(), args.preset.clone());
        let d = gen_cake(&params)?;
        write_output(&args.output, &serialize_document(&d, &metadata))?;
        return Ok(ExitCode::SUCCESS);
    }
    let default_n = if matches!(args.family, Preset::Dh2) {
        2
    } else {
        3
    };
    let params = gen_params(&args, default_n)?;
    let (diagram, family_name) = match args.family {
        Preset::Dh2 => (gen_dh2(&params)?, "dh2"),
        Preset::DhPairwise => (gen_dh_pairwise(&params)?, "dh-pairwise"),
        Preset::DhRing => (gen_dh_ring(&params)?, "dh-ring"),
        Preset::DhNk => {
            metadata.insert("k".to_string(), args.k.to_string());
            (gen_dh_subsets(&params, args.k)?, "dh-nk")
        }
        Preset::Cake => unreachable!("handled above"),
    };
    metadata.insert("g".to_string(), params.g.to_string());
    metadata.insert("p".to_string(), params.p.to_string());
    metadata.insert("preset".to_string(), family_name.to_string());
    for (name, key) in &params.keys {
        metadata.insert(format!("key.{name}"), key.to_string());
    }
    write_output(&args.output, &serialize_document(&diagram, &metadata))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> anyhow::Result<ExitCode> {
    let (diagram, _) = load(&args.input)?;
    let commute = check_commutes(&diagram)?;
    let flow = check_ifo(&diagram)?;
    let ok = commute.ok && flow.ok;
    let text = match args.format {
        Format::Json => json_line(&serde_json::json!({
            "commute": commute,
            "flow": flow,
            "ok": ok,
        })),
        Format::Text => {
            let mut out = String::new();
            for v in &commute.violations {
                out.push_str(&format!(
                    "commute: {} .. {}: {} along {} != {} along {}\n",
                    v.src,
                    v.dst,
                    v.left_arrow,
                    path_chain(&v.left),
                    v.right_arrow,
                    path_chain(&v.right),
                ));
            }
            for v in &flow.violations {
                match v.kind {
                    aediag::ifo::ViolationKind::Algebraic => out.push_str(&format!(
                        "algebraic: edge {} is {} but path {} composes to {}\n",
                        v.edge,
                        v.edge_arrow,
                        path_chain(&v.path),
                        v.path_arrow,
                    )),
                    aediag::ifo::ViolationKind::Epistemic => out.push_str(&format!(
                        "epistemic: edge {} tagged {} but path {} is known to {}\n",
                        v.edge,
                        v.edge_tag,
                        path_chain(&v.path),
                        v.path_tag,
                    )),
                }
            }
            out.push_str(&format!(
                "check: {} ({} commute, {} flow violations)\n",
                verdict_line(ok),
                commute.violations.len(),
                flow.violations.len(),
            ));
            out
        }
    };
    write_output(&args.output, &text)?;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_complete(args: CompleteArgs) -> anyhow::Result<ExitCode> {
    let (diagram, metadata) = load(&args.input)?;
    let completed = complete_ifo(&diagram)?;
    write_output(&args.output, &serialize_document(&completed, &metadata))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_view(args: ViewArgs) -> anyhow::Result<ExitCode> {
    let (diagram, metadata) = load(&args.input)?;
    let who = Tag::from_names(diagram.universe(), &args.who)?;
    let view = restrict_view(&diagram, &who)?;
    write_output(&args.output, &serialize_document(&view, &metadata))?;
    Ok(ExitCode::SUCCESS)
}

/// Resolves a leak-rule key token: an owner name recorded in the
/// document metadata (case-insensitive), or a literal exponent.
fn resolve_key(token: &str, metadata: &BTreeMap<String, String>) -> anyhow::Result<u64> {
    for (key, value) in metadata {
        if let Some(name) = key.strip_prefix("key.") {
            if name.eq_ignore_ascii_case(token) {
                return value
                    .parse()
                    .with_context(|| format!("metadata {key} holds a non-numeric exponent"));
            }
        }
    }
    token
        .parse()
        .map_err(|_| anyhow!("key {token:?} is neither a recorded owner name nor an exponent"))
}

fn parse_rule(
    text: &str,
    diagram: &Diagram,
    metadata: &BTreeMap<String, String>,
) -> anyhow::Result<LeakRule> {
    let (matcher, adds) = text
        .split_once('+')
        .ok_or_else(|| anyhow!("rule {text:?} is missing the +<participants> part"))?;
    let add_names: Vec<&str> = adds.split(',').filter(|s| !s.is_empty()).collect();
    if add_names.is_empty() {
        bail!("rule {text:?} adds no participants");
    }
    let add = Tag::from_names(diagram.universe(), &add_names)?;
    if let Some(token) = matcher.strip_prefix("pow:") {
        let exp = resolve_key(token, metadata)?;
        Ok(LeakRule {
            arrow: Some(AlgebraArrow::Pow(exp)),
            tag_is: None,
            add,
        })
    } else if let Some(body) = matcher.strip_prefix("tag:") {
        let inner = body
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| anyhow!("tag matcher in {text:?} looks like tag:{{A,B}}"))?;
        let names: Vec<&str> = inner.split(',').filter(|s| !s.is_empty()).collect();
        Ok(LeakRule {
            arrow: None,
            tag_is: Some(Tag::from_names(diagram.universe(), &names)?),
            add,
        })
    } else {
        bail!("rule {text:?} must start with pow: or tag:");
    }
}

fn parse_rules_file(path: &str, diagram: &Diagram) -> anyhow::Result<Vec<LeakRule>> {
    let text = read_input(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing rules file {path}"))?;
    let items = value
        .as_array()
        .ok_or_else(|| anyhow!("rules file {path} must hold a JSON array"))?;
    let mut rules = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| anyhow!("rule {i} is not an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "add" | "arrow" | "tag_is") {
                bail!("rule {i} has unknown field {key:?}");
            }
        }
        let add_value = obj
            .get("add")
            .ok_or_else(|| anyhow!("rule {i} is missing \"add\""))?;
        let add_names: Vec<String> =
            serde_json::from_value(add_value.clone()).with_context(|| format!("rule {i} add"))?;
        let add = Tag::from_names(diagram.universe(), &add_names)?;
        let arrow = obj
            .get("arrow")
            .map(|v| parse_arrow_value(v, &format!("rule {i} arrow")))
            .transpose()?;
        let tag_is = obj
            .get("tag_is")
            .map(|v| -> anyhow::Result<Tag> {
                let names: Vec<String> = serde_json::from_value(v.clone())
                    .with_context(|| format!("rule {i} tag_is"))?;
                Ok(Tag::from_names(diagram.universe(), &names)?)
            })
            .transpose()?;
        rules.push(LeakRule { arrow, tag_is, add });
    }
    Ok(rules)
}

fn cmd_leak(args: LeakArgs) -> anyhow::Result<ExitCode> {
    let (diagram, metadata) = load(&args.input)?;
    let mut rules = Vec::new();
    for text in &args.rules {
        rules.push(parse_rule(text, &diagram, &metadata)?);
    }
    if let Some(path) = &args.rules_file {
        rules.extend(parse_rules_file(path, &diagram)?);
    }
    if rules.is_empty() {
        bail!("leak needs at least one --rule or a --rules-file");
    }
    let (leaked, diff) = apply_leak(&diagram, &rules)?;
    let text = match args.emit {
        LeakEmit::Diagram => serialize_document(&leaked, &metadata),
        LeakEmit::Report => json_line(&serde_json::json!({
            "after": document_value(&leaked, &metadata),
            "before": document_value(&diagram, &metadata),
            "diff": diff,
            "kind": "leak-report",
            "version": "1",
        })),
    };
    write_output(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_events(args: EventsArgs) -> anyhow::Result<ExitCode> {
    let (diagram, _) = load(&args.input)?;
    let report = classify_events(&diagram)?;
    let text = match args.format {
        Format::Json => json_line(&serde_json::to_value(&report)?),
        Format::Text => {
            let mut out = String::new();
            let mut counts = (0usize, 0usize, 0usize);
            for e in &report.events {
                match e.class {
                    EventClass::Primitive => {
                        counts.0 += 1;
                        out.push_str(&format!("primitive:    {} {}\n", e.edge, e.explained));
                    }
                    EventClass::Computation => {
                        counts.1 += 1;
                        let routes: Vec<String> =
                            e.routes.iter().map(|r| r.meet.to_string()).collect();
                        out.push_str(&format!(
                            "computation:  {} from {}\n",
                            e.edge,
                            routes.join(" v ")
                        ));
                    }
                    EventClass::Announcement => {
                        counts.2 += 1;
                        out.push_str(&format!(
                            "announcement: {} by {} newly informing {}\n",
                            e.edge, e.explained, e.newly_informed
                        ));
                    }
                }
            }
            out.push_str(&format!(
                "events: {} primitive, {} computation, {} announcement\n",
                counts.0, counts.1, counts.2
            ));
            out
        }
    };
    write_output(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn scenario_value(s: &Scenario, metadata: &BTreeMap<String, String>) -> serde_json::Value {
    let announcements: Vec<&aediag::analysis::ScenarioTriangle> =
        s.triangles.iter().filter(|t| t.is_announcement).collect();
    serde_json::json!({
        "announcements": announcements,
        "chords": s.chords,
        "diagram": document_value(&s.diagram, metadata),
        "inserted": s.inserted,
        "triangles": s.triangles,
    })
}

fn cmd_triangulate(args: TriangulateArgs) -> anyhow::Result<ExitCode> {
    let (diagram, metadata) = load(&args.input)?;
    let (src, dst) = args
        .edge
        .split_once(':')
        .ok_or_else(|| anyhow!("--edge looks like SRC:DST, got {:?}", args.edge))?;
    let policy = match args.policy {
        PolicyArg::Audience => ChordPolicy::Audience,
        PolicyArg::Minimal => ChordPolicy::Minimal,
    };
    let scenarios = enumerate_scenarios(&diagram, src, dst, policy)?;
    let text = match args.format {
        Format::Json => json_line(&serde_json::json!({
            "count": scenarios.len(),
            "policy": policy,
            "scenarios": scenarios
                .iter()
                .map(|s| scenario_value(s, &metadata))
                .collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut out = String::new();
            for (i, s) in scenarios.iter().enumerate() {
                let chords: Vec<String> = s.chords.iter().map(|c| c.to_string()).collect();
                out.push_str(&format!(
                    "scenario {}: chords [{}]\n",
                    i + 1,
                    chords.join(", ")
                ));
                for t in &s.triangles {
                    if t.is_announcement {
                        out.push_str(&format!(
                            "  announcement: {} by {} to {}\n",
                            t.apex, t.announcers, t.audience
                        ));
                    }
                }
            }
            out.push_str(&format!("scenarios: {}\n", scenarios.len()));
            out
        }
    };
    write_output(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_orderings(args: OrderingsArgs) -> anyhow::Result<ExitCode> {
    let (diagram, _) = load(&args.input)?;
    let report = enumerate_orderings(&diagram, args.limit)?;
    let text = match args.format {
        Format::Json => json_line(&serde_json::to_value(&report)?),
        Format::Text => {
            let mut out = String::new();
            for ordering in &report.orderings {
                let steps: Vec<&str> = ordering
                    .iter()
                    .map(|&i| report.events[i].dst.as_str())
                    .collect();
                out.push_str(&steps.join(", "));
                out.push('\n');
            }
            if report.count as usize > report.orderings.len() {
                out.push_str(&format!(
                    "... and {} more\n",
                    report.count - report.orderings.len() as u64
                ));
            }
            out.push_str(&format!("orderings: {}\n", report.count));
            out
        }
    };
    write_output(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dot(args: DotArgs) -> anyhow::Result<ExitCode> {
    let (diagram, _) = load(&args.input)?;
    let text = match args.annotate {
        Annotate::None => export_dot(&diagram, DotAnnotations::None),
        Annotate::Flow => {
            let report = check_ifo(&diagram)?;
            export_dot(&diagram, DotAnnotations::Flow(&report))
        }
        Annotate::Events => {
            let report = classify_events(&diagram)?;
            export_dot(&diagram, DotAnnotations::Events(&report))
        }
    };
    write_output(&args.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn render_changes(label: &str, changes: &[TagChange], out: &mut String) {
    for c in changes {
        out.push_str(&format!("{label} {}: {} => {}\n", c.edge, c.old, c.new));
    }
}

/// Net tag change per (src, dst) edge: member lists before and after.
type NetChanges = BTreeMap<(String, String), (Vec<String>, Vec<String>)>;

/// Extracts the embedded diff of a leak report as net per-edge changes.
fn embedded_net_changes(diff: &serde_json::Value) -> anyhow::Result<NetChanges> {
    let mut net: NetChanges = BTreeMap::new();
    for wave in ["substitutions", "consequences"] {
        let items = diff
            .get(wave)
            .and_then(|v| v.as_array())
            .ok_or_else(|| anyhow!("leak report diff is missing {wave:?}"))?;
        for item in items {
            let edge = (
                item["edge"]["src"]
                    .as_str()
                    .ok_or_else(|| anyhow!("malformed change in {wave}"))?
                    .to_string(),
                item["edge"]["dst"]
                    .as_str()
                    .ok_or_else(|| anyhow!("malformed change in {wave}"))?
                    .to_string(),
            );
            let old: Vec<String> = serde_json::from_value(item["old"].clone())?;
            let new: Vec<String> = serde_json::from_value(item["new"].clone())?;
            match net.entry(edge) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert((old, new));
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    o.get_mut().1 = new;
                }
            }
        }
    }
    Ok(net)
}

fn cmd_diff(args: DiffArgs) -> anyhow::Result<ExitCode> {
    match &args.right {
        Some(right) => {
            let (a, _) = load(&args.left)?;
            let (b, _) = load(right)?;
            let changes = diff_diagrams(&a, &b)?;
            let text = match args.format {
                Format::Json => json_line(&serde_json::json!({ "changes": changes })),
                Format::Text => {
                    let mut out = String::new();
                    render_changes("~", &changes, &mut out);
                    out.push_str(&format!("differences: {}\n", changes.len()));
                    out
                }
            };
            write_output(&args.output, &text)?;
            Ok(if changes.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        None => {
            let text = read_input(&args.left)?;
            let value: serde_json::Value =
                serde_json::from_str(&text).context("parsing leak report")?;
            if value.get("kind").and_then(|k| k.as_str()) != Some("leak-report") {
                bail!("diff needs two documents, or a leak report on one input");
            }
            if value.get("version").and_then(|v| v.as_str()) != Some("1") {
                bail!("unsupported leak report version");
            }
            let (before, _) = parse_document_value(
                value
                    .get("before")
                    .cloned()
                    .ok_or_else(|| anyhow!("leak report is missing \"before\""))?,
            )?;
            let (after, _) = parse_document_value(
                value
                    .get("after")
                    .cloned()
                    .ok_or_else(|| anyhow!("leak report is missing \"after\""))?,
            )?;
            let recomputed = diff_diagrams(&before, &after)?;
            let diff = value
                .get("diff")
                .cloned()
                .ok_or_else(|| anyhow!("leak report is missing \"diff\""))?;
            let embedded = embedded_net_changes(&diff)?;
            let mut consistent = embedded.len() == recomputed.len();
            if consistent {
                for c in &recomputed {
                    let key = (c.edge.src.clone(), c.edge.dst.clone());
                    let matches_embedded = embedded.get(&key).map(|(old, new)| {
                        old == &c
                            .old
                            .members()
                            .iter()
                            .map(|s| s.to_string())
                            .collect::<Vec<_>>()
                            && new
                                == &c
                                    .new
                                    .members()
                                    .iter()
                                    .map(|s| s.to_string())
                                    .collect::<Vec<_>>()
                    });
                    if matches_embedded != Some(true) {
                        consistent = false;
                        break;
                    }
                }
            }
            let text = match args.format {
                Format::Json => {
                    let mut report = serde_json::Map::new();
                    report.insert("consistent".to_string(), serde_json::json!(consistent));
                    report.insert("diff".to_string(), diff.clone());
                    json_line(&serde_json::Value::Object(report))
                }
                Format::Text => {
                    let mut out = String::new();
                    let substitutions = diff.get("substitutions").and_then(|v| v.as_array());
                    let consequences = diff.get("consequences").and_then(|v| v.as_array());
                    if let Some(items) = substitutions {
                        for item in items {
                            out.push_str(&format!(
                                "substitution {} -> {}: {} => {}\n",
                                item["edge"]["src"].as_str().unwrap_or("?"),
                                item["edge"]["dst"].as_str().unwrap_or("?"),
                                render_name_list(&item["old"]),
                                render_name_list(&item["new"]),
                            ));
                        }
                    }
                    if let Some(items) = consequences {
                        for item in items {
                            out.push_str(&format!(
                                "consequence  {} -> {}: {} => {}\n",
                                item["edge"]["src"].as_str().unwrap_or("?"),
                                item["edge"]["dst"].as_str().unwrap_or("?"),
                                render_name_list(&item["old"]),
                                render_name_list(&item["new"]),
                            ));
                        }
                    }
                    out.push_str(&format!(
                        "leak report: {}\n",
                        if consistent {
                            "consistent"
                        } else {
                            "INCONSISTENT"
                        }
                    ));
                    out
                }
            };
            write_output(&args.output, &text)?;
            Ok(if consistent {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn render_name_list(v: &serde_json::Value) -> String {
    let names: Vec<&str> = v
        .as_array()
        .map(|items| items.iter().filter_map(|x| x.as_str()).collect())
        .unwrap_or_default();
    format!("{{{}}}", names.join(","))
}
