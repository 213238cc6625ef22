//! Command-line front end for the plumbing-graph toolkit.
//!
//! Every subcommand reads plain-text graph files, computes with exact
//! integer arithmetic, and prints deterministic output: JSON by default,
//! a terse text rendering behind `--format text`, and Graphviz dot for
//! graph-producing subcommands behind `--format dot`. Exit code 0 means
//! the computation ran (even when a validation report lists problems),
//! 1 a domain error such as an unreadable or malformed input, and 2 a
//! usage error.

use apg::enumerate::{
    collision_report, enumerate_reduced, EnumError, EnumerationBounds, DEFAULT_SAFETY_CAP,
};
use apg::equiv::{decide_equivalence_bounded, EquivalenceVerdict, EquivError};
use apg::forms::{congruence_admissible, recover_triples, ClassicalInvariants, FormsError};
use apg::graph::{GraphError, PlumbingGraph};
use apg::invariants::{graph_rank, invariant_system, InvariantError, InvariantSystem};
use apg::jsonutil::json_int;
use apg::reduce::{reduce, ReduceError};
use apg::topology::{
    betti, euler_characteristic, family_homotopy_cp3, family_s2_bundle_cp2, family_theorem_b,
    mu_trivial_on_ker_p, sphere_bundle_exclusion, TopologyError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

/// Writes to stdout like `print!`, exiting quietly when the consumer has
/// closed the pipe (for example `apg enumerate | head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let mut lock = std::io::stdout().lock();
        if let Err(e) = write!(lock, $($arg)*) {
            handle_write_error(e);
        }
    }};
}

/// Line-terminated variant of [`out!`].
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let mut lock = std::io::stdout().lock();
        if let Err(e) = writeln!(lock, $($arg)*) {
            handle_write_error(e);
        }
    }};
}

fn handle_write_error(e: std::io::Error) -> ! {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        std::process::exit(0);
    }
    eprintln!("error: cannot write output: {e}");
    std::process::exit(1);
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

/// Exact invariants, normalization, and classification for weighted
/// plumbing graphs.
#[derive(Debug, Parser)]
#[command(name = "apg", version, about, max_term_width = 100)]
struct Cli {
    /// Degree parameter for invariant systems; overrides any advisory `k`
    /// line in the input file. Defaults to the advisory line, else 1.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    k: Option<u32>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Largest lattice rank to enumerate.
    #[arg(long, default_value_t = 2)]
    rank_max: usize,

    /// Largest absolute vertex weight.
    #[arg(long, default_value_t = 3)]
    alpha_max: i64,

    /// Cap on the total of all bundle labels per graph.
    #[arg(long, default_value_t = 0)]
    label_max: u32,

    /// Hard limit on enumeration steps.
    #[arg(long, default_value_t = DEFAULT_SAFETY_CAP)]
    cap: u64,

    /// Compute invariant fingerprints on a worker pool.
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a graph file and report structural diagnostics per component.
    Validate { file: PathBuf },
    /// Print the invariant system of a graph.
    Invariants { file: PathBuf },
    /// Print the lattice rank of a graph's invariant system.
    Rank { file: PathBuf },
    /// Normalize a graph by the rewriting moves and print the result with
    /// a replayable trace.
    Reduce { file: PathBuf },
    /// Print the canonical encoding of a graph's reduced representative.
    Canonical { file: PathBuf },
    /// Decide whether two graphs have equivalent invariant systems.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        /// Cap on witness-matrix entries for the bounded searches.
        #[arg(long)]
        bound: Option<i64>,
    },
    /// Check the mod-48 realizability congruence (degree 1 only).
    Admissible { file: PathBuf },
    /// Print the Betti numbers and Euler characteristic.
    Betti { file: PathBuf },
    /// Run the sphere-bundle obstruction checks.
    Obstructions { file: PathBuf },
    /// List one representative per reduced class within bounds.
    Enumerate {
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Group enumerated classes sharing an invariant fingerprint and
    /// decide equivalence within each group.
    Collisions {
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Recover weight triples from a classical invariant quadruple.
    RecoverTriples {
        /// Comma-separated weight triple; its invariants are computed
        /// first, then inverted.
        #[arg(long, conflicts_with = "invariants")]
        triple: Option<String>,
        /// Comma-separated quadruple D,R2,I,J.
        #[arg(long)]
        invariants: Option<String>,
        /// Comma-separated linear-form coefficients pinning the degenerate
        /// one-parameter case.
        #[arg(long)]
        hint: Option<String>,
    },
    /// Build a named graph family and print it with its invariant system.
    Family {
        #[command(subcommand)]
        family: FamilyCommand,
    },
    /// Print a graph in Graphviz dot syntax.
    ExportDot { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum FamilyCommand {
    /// Star graph: a hub dot with single-vertex and triple branches.
    #[command(name = "theorem-b")]
    TheoremB {
        /// Total branch count.
        #[arg(long)]
        branches: usize,
        /// Number of single-vertex branches; the rest are triples.
        #[arg(long)]
        singles: usize,
        /// Comma-separated weights, one per branch.
        #[arg(long)]
        alphas: String,
    },
    /// Triple graph with weights ((2i+1)(i+1), (2i+1)i, i(i+1)/2).
    #[command(name = "hcp3")]
    Hcp3 {
        #[arg(long)]
        index: u64,
    },
    /// Triple graph (alpha, -1, -1).
    #[command(name = "s2cp2")]
    S2cp2 {
        /// Weight of the first vertex.
        #[arg(long)]
        alpha: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read_graph(path: &Path) -> Result<PlumbingGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(PlumbingGraph::parse(&text)?)
}

fn effective_k(cli_k: Option<u32>, g: &PlumbingGraph) -> u32 {
    cli_k.or_else(|| g.advisory_k()).unwrap_or(1)
}

fn parse_int_list(label: &str, raw: &str, expect: Option<usize>) -> Result<Vec<BigInt>, CliError> {
    let parts: Vec<BigInt> = raw
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<BigInt>()
                .map_err(|_| CliError::Usage(format!("{label}: `{p}` is not an integer")))
        })
        .collect::<Result<_, _>>()?;
    if let Some(n) = expect {
        if parts.len() != n {
            return Err(CliError::Usage(format!(
                "{label}: expected {n} comma-separated integers, got {}",
                parts.len()
            )));
        }
    }
    Ok(parts)
}

fn emit_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("valid json"));
}

fn no_dot(format: Format) -> Result<(), CliError> {
    if format == Format::Dot {
        Err(CliError::Usage(
            "dot output is only available for graph-producing subcommands".into(),
        ))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { file } => {
            no_dot(cli.format)?;
            cmd_validate(&file, cli.format)
        }
        Command::Invariants { file } => {
            no_dot(cli.format)?;
            cmd_invariants(&file, cli.k, cli.format)
        }
        Command::Rank { file } => {
            no_dot(cli.format)?;
            cmd_rank(&file, cli.format)
        }
        Command::Reduce { file } => cmd_reduce(&file, cli.format),
        Command::Canonical { file } => {
            no_dot(cli.format)?;
            cmd_canonical(&file, cli.format)
        }
        Command::Equiv { left, right, bound } => {
            no_dot(cli.format)?;
            cmd_equiv(&left, &right, bound, cli.k, cli.format)
        }
        Command::Admissible { file } => {
            no_dot(cli.format)?;
            cmd_admissible(&file, cli.k, cli.format)
        }
        Command::Betti { file } => {
            no_dot(cli.format)?;
            cmd_betti(&file, cli.k, cli.format)
        }
        Command::Obstructions { file } => {
            no_dot(cli.format)?;
            cmd_obstructions(&file, cli.k, cli.format)
        }
        Command::Enumerate { bounds } => {
            no_dot(cli.format)?;
            cmd_enumerate(&bounds, cli.k, cli.format)
        }
        Command::Collisions { bounds } => {
            no_dot(cli.format)?;
            cmd_collisions(&bounds, cli.k, cli.format)
        }
        Command::RecoverTriples {
            triple,
            invariants,
            hint,
        } => {
            no_dot(cli.format)?;
            cmd_recover_triples(triple, invariants, hint, cli.format)
        }
        Command::Family { family } => cmd_family(family, cli.k, cli.format),
        Command::ExportDot { file } => {
            let g = read_graph(&file)?;
            out!("{}", g.export_dot());
            Ok(())
        }
    }
}

fn cmd_validate(file: &Path, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let report = g.validate();
    match format {
        Format::Json => {
            let components: Vec<Value> = report
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "index": i + 1,
                        "u_ids": c.u_ids,
                        "v_ids": c.v_ids,
                        "edge_count": c.edge_count,
                        "simply_connected": c.simply_connected,
                        "spin": c.spin,
                    })
                })
                .collect();
            emit_json(&json!({
                "components": components,
                "is_forest": report.is_forest,
                "spin": report.spin,
            }));
        }
        _ => {
            for (i, c) in report.components.iter().enumerate() {
                if c.simply_connected {
                    outln!("component {}: ok", i + 1);
                } else {
                    outln!("component {}: not simply-connected", i + 1);
                }
            }
            outln!("forest: {}", report.is_forest);
            outln!("spin: {}", report.spin);
        }
    }
    Ok(())
}

fn render_system_text(s: &InvariantSystem) -> String {
    let mut out = String::new();
    writeln!(out, "k = {}", s.k).unwrap();
    writeln!(out, "rank = {}", s.rank()).unwrap();
    for (&(a, b, c), v) in &s.mu {
        writeln!(out, "mu[{a},{b},{c}] = {v}").unwrap();
    }
    let w: Vec<String> = s.w.iter().map(|b| b.to_string()).collect();
    writeln!(out, "w = [{}]", w.join(", ")).unwrap();
    let p: Vec<String> = s.p.iter().map(|v| v.to_string()).collect();
    writeln!(out, "p = [{}]", p.join(", ")).unwrap();
    out
}

fn cmd_invariants(file: &Path, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let k = effective_k(cli_k, &g);
    let s = invariant_system(&g, k)?;
    match format {
        Format::Json => emit_json(&s.to_json()),
        _ => out!("{}", render_system_text(&s)),
    }
    Ok(())
}

fn cmd_rank(file: &Path, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let rank = graph_rank(&g);
    match format {
        Format::Json => emit_json(&json!({ "rank": rank })),
        _ => outln!("rank = {rank}"),
    }
    Ok(())
}

fn cmd_reduce(file: &Path, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let (reduced, trace) = reduce(&g)?;
    match format {
        Format::Json => emit_json(&json!({
            "reduced": reduced.serialize(),
            "rank": graph_rank(&reduced),
            "trace": trace.to_json(),
        })),
        Format::Dot => out!("{}", reduced.export_dot()),
        Format::Text => {
            for (i, step) in trace.steps.iter().enumerate() {
                outln!("{}. {}", i + 1, step.mv.kind());
            }
            out!("{}", reduced.serialize());
        }
    }
    Ok(())
}

fn cmd_canonical(file: &Path, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let (reduced, _) = reduce(&g)?;
    let class = reduced.canonical_reduced_class()?;
    match format {
        Format::Json => emit_json(&json!({
            "components": class.components,
            "encoding": class.canonical_encoding,
        })),
        _ => outln!("{}", class.canonical_encoding),
    }
    Ok(())
}

fn cmd_equiv(
    left: &Path,
    right: &Path,
    bound: Option<i64>,
    cli_k: Option<u32>,
    format: Format,
) -> Result<(), CliError> {
    let ga = read_graph(left)?;
    let gb = read_graph(right)?;
    let ka = effective_k(cli_k, &ga);
    let kb = effective_k(cli_k, &gb);
    if ka != kb {
        return Err(CliError::Domain(format!(
            "degree parameters differ: {ka} vs {kb}; pass --k to fix one"
        )));
    }
    let sa = invariant_system(&ga, ka)?;
    let sb = invariant_system(&gb, kb)?;
    let verdict = decide_equivalence_bounded(&sa, &sb, bound)?;
    match format {
        Format::Json => emit_json(&verdict.to_json()),
        _ => match &verdict {
            EquivalenceVerdict::Equivalent { .. } => outln!("equivalent"),
            EquivalenceVerdict::Inequivalent { .. } => outln!("inequivalent"),
            EquivalenceVerdict::Unknown { searched } => {
                outln!("unknown");
                outln!("searched: {searched}");
            }
        },
    }
    Ok(())
}

fn cmd_admissible(file: &Path, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let k = effective_k(cli_k, &g);
    let s = invariant_system(&g, k)?;
    let verdict = congruence_admissible(&s)?;
    match format {
        Format::Json => emit_json(&verdict.to_json()),
        _ => {
            if verdict.admissible {
                outln!(
                    "admissible ({})",
                    if verdict.exhaustive { "exhaustive" } else { "sampled" }
                );
            } else {
                let w = verdict
                    .counterexample
                    .as_ref()
                    .map(|w| {
                        w.iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    })
                    .unwrap_or_default();
                outln!("not admissible, counterexample W = [{w}]");
            }
        }
    }
    Ok(())
}

fn cmd_betti(file: &Path, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let k = effective_k(cli_k, &g);
    let bv = betti(&g, k)?;
    let euler = euler_characteristic(&bv);
    match format {
        Format::Json => emit_json(&json!({ "betti": bv.to_json(), "euler": euler })),
        _ => {
            let b: Vec<String> = bv.b.iter().map(|v| v.to_string()).collect();
            outln!("b = [{}]", b.join(", "));
            outln!("euler = {euler}");
        }
    }
    Ok(())
}

fn cmd_obstructions(file: &Path, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let g = read_graph(file)?;
    let k = effective_k(cli_k, &g);
    let s = invariant_system(&g, k)?;
    let bv = betti(&g, k)?;
    let report = sphere_bundle_exclusion(&s, &bv)?;
    match format {
        Format::Json => emit_json(&json!({
            "k": k,
            "betti": bv.to_json(),
            "mu_trivial_on_ker_p": mu_trivial_on_ker_p(&s),
            "sphere_bundle": report.to_json(),
        })),
        _ => {
            outln!("euler = {}", report.euler);
            outln!("fired items: {:?}", report.fired_items());
            outln!("mu trivial on ker p: {}", mu_trivial_on_ker_p(&s));
        }
    }
    Ok(())
}

fn bounds_from_args(args: &BoundsArgs, cli_k: Option<u32>) -> EnumerationBounds {
    let mut b = EnumerationBounds::new(
        args.rank_max,
        args.alpha_max,
        args.label_max,
        cli_k.unwrap_or(1),
    );
    b.safety_cap = args.cap;
    b
}

fn bounds_json(b: &EnumerationBounds) -> Value {
    json!({
        "rank_max": b.rank_max,
        "alpha_max": b.alpha_max,
        "label_sum_max": b.label_sum_max,
        "k": b.k,
        "safety_cap": b.safety_cap,
    })
}

fn cmd_enumerate(args: &BoundsArgs, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let b = bounds_from_args(args, cli_k);
    let classes = enumerate_reduced(&b, args.parallel)?;
    match format {
        Format::Json => emit_json(&json!({
            "bounds": bounds_json(&b),
            "count": classes.len(),
            "classes": classes.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })),
        _ => {
            for c in &classes {
                outln!("{}", c.encoding);
            }
            outln!("count = {}", classes.len());
        }
    }
    Ok(())
}

fn cmd_collisions(args: &BoundsArgs, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let b = bounds_from_args(args, cli_k);
    let groups = collision_report(&b, args.parallel)?;
    match format {
        Format::Json => emit_json(&json!({
            "bounds": bounds_json(&b),
            "groups": groups.iter().map(|g| g.to_json()).collect::<Vec<_>>(),
        })),
        _ => {
            for (i, g) in groups.iter().enumerate() {
                outln!("group {}:", i + 1);
                for m in &g.members {
                    outln!("  {}", m.encoding);
                }
            }
            outln!("groups = {}", groups.len());
        }
    }
    Ok(())
}

fn cmd_recover_triples(
    triple: Option<String>,
    invariants: Option<String>,
    hint: Option<String>,
    format: Format,
) -> Result<(), CliError> {
    let hint_vals = hint
        .as_deref()
        .map(|h| parse_int_list("--hint", h, Some(2)))
        .transpose()?;
    let (ci, hint_vals) = match (triple, invariants) {
        (Some(t), None) => {
            let a = parse_int_list("--triple", &t, Some(3))?;
            let fp = apg::forms::BinaryFormPair::from_triple(&a[0], &a[1], &a[2]);
            let hint_vals =
                hint_vals.unwrap_or_else(|| vec![fp.p[0].clone(), fp.p[1].clone()]);
            (
                ClassicalInvariants::from_triple(&a[0], &a[1], &a[2]),
                Some(hint_vals),
            )
        }
        (None, Some(q)) => {
            let v = parse_int_list("--invariants", &q, Some(4))?;
            (
                ClassicalInvariants {
                    d: v[0].clone(),
                    r_squared: v[1].clone(),
                    i: v[2].clone(),
                    j: v[3].clone(),
                },
                hint_vals,
            )
        }
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --triple or --invariants".into(),
            ))
        }
    };
    let hint_ref = hint_vals.as_ref().map(|h| (&h[0], &h[1]));
    let orbits = recover_triples(&ci, hint_ref);
    match format {
        Format::Json => emit_json(&json!({
            "invariants": ci.to_json(),
            "orbits": orbits
                .iter()
                .map(|o| o.iter().map(json_int).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })),
        _ => {
            for o in &orbits {
                outln!("{} {} {}", o[0], o[1], o[2]);
            }
        }
    }
    Ok(())
}

fn cmd_family(family: FamilyCommand, cli_k: Option<u32>, format: Format) -> Result<(), CliError> {
    let (g, extra): (PlumbingGraph, Option<Value>) = match family {
        FamilyCommand::TheoremB {
            branches,
            singles,
            alphas,
        } => {
            let a = parse_int_list("--alphas", &alphas, Some(branches))?;
            (family_theorem_b(branches, singles, &a)?, None)
        }
        FamilyCommand::Hcp3 { index } => {
            let data = family_homotopy_cp3(index);
            let extra = json!({
                "e1": data.e1.iter().map(json_int).collect::<Vec<_>>(),
                "e2": data.e2.iter().map(json_int).collect::<Vec<_>>(),
                "mu_e1_cubed": json_int(&data.mu_e1_cubed),
                "mu_e2_cubed": json_int(&data.mu_e2_cubed),
                "p_e1": json_int(&data.p_e1),
                "p_e2": json_int(&data.p_e2),
            });
            (data.graph, Some(extra))
        }
        FamilyCommand::S2cp2 { alpha } => {
            let a = parse_int_list("--alpha", &alpha, Some(1))?;
            (family_s2_bundle_cp2(&a[0]), None)
        }
    };
    let k = cli_k.unwrap_or(1);
    match format {
        Format::Json => {
            let s = invariant_system(&g, k)?;
            let mut out = json!({
                "graph": g.serialize(),
                "system": s.to_json(),
            });
            if let Some(extra) = extra {
                out["distinguished_vectors"] = extra;
            }
            emit_json(&out);
        }
        Format::Dot => out!("{}", g.export_dot()),
        Format::Text => out!("{}", g.serialize()),
    }
    Ok(())
}
