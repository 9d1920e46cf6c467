//! `hyperkey`: build, run and audit secret-key schemes from the shell.
//!
//! Exit status is 0 when every verdict passes, 1 when an audit or packing
//! verification fails, and 2 for configuration, input and cap errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyperkey::audit::{exhaustive_audit, monte_carlo_audit, rank_audit, AuditReport};
use hyperkey::capacity::{
    capacity_kmt, closed_form_uniform, csk_brute_force_with_cap, singleton_info,
    DEFAULT_PARTITION_CAP,
};
use hyperkey::hypergraph::{complete_uniform, cycle_star, is_cycle_inducing, Hypergraph, Vertex};
use hyperkey::packing::{
    anchor_request, hollow_kite, verify_packing_plan, CycleCache, CycleSource, EdgeReuseTable,
    PackingPlan, ResolveOptions,
};
use hyperkey::protocol::{run_3unif_pipeline, run_kmt_pipeline, Pipeline};
use hyperkey::report::{audit_text, PackingSection, Params, Transcript};
use hyperkey::source::DEFAULT_ENUM_CAP_BITS;
use hyperkey::Error;

#[derive(Parser)]
#[command(
    name = "hyperkey",
    version,
    about = "Perfect secret keys on hypergraphical sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Secret-key capacity by brute force over partitions.
    Capacity(CapacityArgs),
    /// Build and verify a packing without running a protocol.
    Pack(PackArgs),
    /// Build the scheme and key, audit them, and write a transcript.
    Run(RunArgs),
    /// Re-audit a transcript written by `run`.
    Audit(AuditArgs),
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Built-in family: `kmt M T`, `kite R` or `cycle-star M`.
    #[arg(long, num_args = 2..=3, value_names = ["FAMILY", "ARGS"], conflicts_with = "input")]
    gen: Option<Vec<String>>,
    /// Hypergraph file in `.hg` format.
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PackingArgs {
    /// Anchor vertices as a comma list, or `all`.
    #[arg(long)]
    anchors: Option<String>,
    /// Copy counts, one per anchor or a single value for all.
    #[arg(long)]
    copies: Option<String>,
    /// walecki | figure | bipartite | search | file:PATH | auto, one per
    /// anchor or a single value for all.
    #[arg(long)]
    cycles: Option<String>,
    /// File caching double-cover search results between runs.
    #[arg(long, value_name = "PATH")]
    cycle_cache: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct AuditOpts {
    /// rank | exhaustive | mc | exhaustive-if-possible
    #[arg(long, default_value = "exhaustive-if-possible")]
    audit: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_ENUM_CAP_BITS)]
    max_enum_bits: usize,
    #[arg(long, default_value_t = DEFAULT_PARTITION_CAP)]
    max_partition_m: u32,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = DEFAULT_PARTITION_CAP)]
    max_partition_m: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PackArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    packing: PackingArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    packing: PackingArgs,
    #[command(flatten)]
    audit: AuditOpts,
    /// Transcript path; a `.json` extension selects JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    /// Transcript written by `run`.
    #[arg(long, value_name = "PATH")]
    transcript: PathBuf,
    #[command(flatten)]
    audit: AuditOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a command stopped.
enum Failure {
    Config(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Config(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

enum Family {
    Kmt(u32, u32),
    Kite(u32),
    CycleStar(u32),
    File,
}

fn load_source(src: &SourceArgs) -> Result<(Hypergraph, Family), Failure> {
    match (&src.gen, &src.input) {
        (Some(g), None) => {
            let nums: Vec<u32> = g[1..]
                .iter()
                .map(|x| {
                    x.parse()
                        .map_err(|_| config(format!("--gen: {x:?} is not a non-negative integer")))
                })
                .collect::<Result<_, _>>()?;
            match (g[0].as_str(), nums.as_slice()) {
                ("kmt", &[m, t]) => Ok((complete_uniform(m, t as usize)?, Family::Kmt(m, t))),
                ("kite", &[r]) => Ok((hollow_kite(r)?, Family::Kite(r))),
                ("cycle-star", &[m]) => Ok((cycle_star(m)?, Family::CycleStar(m))),
                _ => Err(config(
                    "--gen expects `kmt M T`, `kite R` or `cycle-star M`",
                )),
            }
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
            let h = text
                .parse()
                .map_err(|e: Error| config(format!("{}: {e}", path.display())))?;
            Ok((h, Family::File))
        }
        _ => Err(config("give exactly one of --gen or --in")),
    }
}

fn write_out(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| config(format!("cannot write {}: {e}", path.display())))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn cmd_capacity(a: CapacityArgs) -> CmdResult {
    let (h, _) = load_source(&a.source)?;
    let (csk, minimizer) = csk_brute_force_with_cap(&h, a.max_partition_m)?;
    let singleton = singleton_info(&h)?;
    let type_s = singleton == csk;
    let closed = closed_form_uniform(&h).ok();
    let mut s = format!("C_SK = {csk}, type_S = {type_s}\n");
    let _ = writeln!(s, "I_singletons = {singleton}");
    let _ = writeln!(s, "minimizer = {minimizer}");
    if let Some(c) = closed {
        let _ = writeln!(s, "closed_form = {c}");
    }
    if let Some(out) = &a.out {
        let body = if is_json(out) {
            let v = serde_json::json!({
                "c_sk": csk,
                "type_s": type_s,
                "i_singletons": singleton,
                "minimizer": minimizer.to_string(),
                "closed_form": closed,
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&v).expect("serializable")
            )
        } else {
            s.clone()
        };
        write_out(out, &body)?;
    }
    Ok(s)
}

fn split_list(s: &str) -> Vec<&str> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .collect()
}

/// One value per anchor from a comma list or a single shared value.
fn per_anchor<'a>(flag: &str, raw: &'a str, anchors: usize) -> Result<Vec<&'a str>, Failure> {
    let items = split_list(raw);
    match items.len() {
        1 => Ok(vec![items[0]; anchors]),
        k if k == anchors => Ok(items),
        k => Err(config(format!(
            "{flag} lists {k} values for {anchors} anchors"
        ))),
    }
}

struct Built {
    pipeline: Pipeline,
    kind: &'static str,
    notes: Vec<String>,
    reuse: Option<Vec<u32>>,
}

fn build(h: &Hypergraph, family: &Family, p: &PackingArgs) -> Result<Built, Failure> {
    let explicit = p.anchors.is_some() || p.cycles.is_some() || p.copies.is_some();
    let kmt = match family {
        Family::Kmt(m, t) => Some((*m, *t)),
        Family::File => h
            .uniformity()
            .map(|t| (h.m(), t as u32))
            .filter(|&(m, t)| complete_uniform(m, t as usize).is_ok_and(|k| k == *h)),
        _ => None,
    };
    if let (Some((m, t)), false) = (kmt, explicit) {
        return Ok(Built {
            pipeline: run_kmt_pipeline(m, t)?,
            kind: "kmt",
            notes: vec![format!(
                "star packing of K_{{{m},{t}}}; reference vertex is the smallest other vertex"
            )],
            reuse: None,
        });
    }
    if h.uniformity() != Some(3) {
        return Err(config(
            "no pipeline applies: need a complete t-uniform hypergraph or a 3-uniform one",
        ));
    }
    let anchors: Vec<Vertex> = match (p.anchors.as_deref(), family) {
        (Some("all"), _) => h.vertices().collect(),
        (Some(list), _) => split_list(list)
            .iter()
            .map(|x| {
                x.parse()
                    .map_err(|_| config(format!("--anchors: bad vertex {x:?}")))
            })
            .collect::<Result<_, _>>()?,
        (None, Family::Kite(r)) => (1..=2 * r + 1).collect(),
        (None, Family::CycleStar(m)) => vec![*m],
        (None, _) => match is_cycle_inducing(h)? {
            Some(a) => vec![a],
            None => h.vertices().collect(),
        },
    };
    if anchors.is_empty() {
        return Err(config("--anchors is empty"));
    }
    let sources: Vec<CycleSource> = match &p.cycles {
        Some(raw) => per_anchor("--cycles", raw, anchors.len())?
            .into_iter()
            .map(str::parse)
            .collect::<Result<_, _>>()?,
        None => vec![CycleSource::Auto; anchors.len()],
    };
    let copies: Vec<Option<u32>> = match &p.copies {
        Some(raw) => per_anchor("--copies", raw, anchors.len())?
            .into_iter()
            .map(|x| match x.parse::<u32>() {
                Ok(k) if k > 0 => Ok(Some(k)),
                _ => Err(config(format!("--copies: {x:?} is not a positive integer"))),
            })
            .collect::<Result<_, _>>()?,
        None => vec![None; anchors.len()],
    };
    let cache_path = p.cycle_cache.clone();
    let mut opts = ResolveOptions {
        cache: match &cache_path {
            Some(path) => Some(CycleCache::load(path)?),
            None => None,
        },
        ..ResolveOptions::default()
    };
    let before = opts.cache.clone();
    let mut requests = Vec::new();
    let mut notes = Vec::new();
    for ((&a, src), &k) in anchors.iter().zip(&sources).zip(&copies) {
        let (req, n) = anchor_request(h, a, src, k, &mut opts)?;
        requests.push(req);
        notes.extend(n);
    }
    if let (Some(path), Some(cache)) = (&cache_path, &opts.cache) {
        if before.as_ref() != Some(cache) {
            cache.save(path)?;
        }
    }
    let table = EdgeReuseTable::new(
        h,
        &requests
            .iter()
            .map(|r| (r.anchor, r.packing.copies))
            .collect(),
    );
    Ok(Built {
        pipeline: run_3unif_pipeline(h, &requests)?,
        kind: "3unif",
        notes,
        reuse: Some(table.reuse),
    })
}

fn pack_text(plan: &PackingPlan, kind: &str, notes: &[String], reuse: &[u32]) -> (String, bool) {
    let verdict = verify_packing_plan(plan);
    let mut s = format!(
        "pipeline {kind}\nn {}\nparts {}\n",
        plan.n,
        plan.parts.len()
    );
    for note in notes {
        let _ = writeln!(s, "note {note}");
    }
    let mut all_inducing = true;
    for (l, part) in plan.parts.iter().enumerate() {
        let mut line = format!("part anchor={}", part.label.anchor);
        if let Some(c) = part.label.cycle {
            let _ = write!(line, " cycle={c}");
            let inducing = is_cycle_inducing(&plan.part_hypergraph(l)).ok().flatten()
                == Some(part.label.anchor);
            all_inducing &= inducing;
            let _ = write!(line, " cycle_inducing={inducing}");
        }
        let _ = writeln!(s, "{line} size={}", part.copies.len());
    }
    let t: Vec<String> = reuse.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(s, "reuse {}", t.join(" "));
    let _ = writeln!(s, "verified {}", verdict.valid);
    let _ = writeln!(s, "exact_cover {}", verdict.exact_cover);
    if let Some(d) = &verdict.diagnostic {
        let _ = writeln!(s, "diagnostic {d}");
    }
    (s, verdict.valid && all_inducing)
}

fn copies_per_edge(plan: &PackingPlan) -> Vec<u32> {
    let mut used = vec![0u32; plan.hypergraph.edge_count()];
    for part in &plan.parts {
        for c in &part.copies {
            used[c.edge] += 1;
        }
    }
    used
}

fn cmd_pack(a: PackArgs) -> CmdResult {
    let (h, family) = load_source(&a.source)?;
    let built = build(&h, &family, &a.packing)?;
    let plan = &built.pipeline.plan;
    let reuse = built.reuse.clone().unwrap_or_else(|| copies_per_edge(plan));
    let (text, ok) = pack_text(plan, built.kind, &built.notes, &reuse);
    if let Some(out) = &a.out {
        let body = if is_json(out) {
            let v = serde_json::json!({
                "pipeline": built.kind,
                "n": plan.n,
                "notes": built.notes,
                "parts": plan.parts,
                "reuse": reuse,
                "verified": verify_packing_plan(plan).valid,
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&v).expect("serializable")
            )
        } else {
            text.clone()
        };
        write_out(out, &body)?;
    }
    if ok {
        Ok(text)
    } else {
        Err(Failure::Verdict(text))
    }
}

fn audit_pair(
    scheme: &hyperkey::protocol::LinearScheme,
    key: &hyperkey::protocol::KeySpec,
    o: &AuditOpts,
) -> Result<AuditReport, Failure> {
    let mut report = match o.audit.as_str() {
        "rank" => rank_audit(scheme, key)?,
        "exhaustive" => exhaustive_audit(scheme, key, o.max_enum_bits)?,
        "mc" => monte_carlo_audit(scheme, key, o.samples, o.seed)?,
        "exhaustive-if-possible" => {
            if scheme.width() <= o.max_enum_bits {
                exhaustive_audit(scheme, key, o.max_enum_bits)?
            } else {
                AuditReport::combine_rank_mc(
                    rank_audit(scheme, key)?,
                    monte_carlo_audit(scheme, key, o.samples, o.seed)?,
                )
            }
        }
        other => {
            return Err(config(format!(
            "--audit: unknown method {other:?} (rank | exhaustive | mc | exhaustive-if-possible)"
        )))
        }
    };
    let h = scheme.hypergraph();
    match csk_brute_force_with_cap(h, o.max_partition_m) {
        Ok((c, _)) => report.set_capacity(c),
        Err(Error::CapExceeded { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let (h, family) = load_source(&a.source)?;
    let built = build(&h, &family, &a.packing)?;
    let Pipeline { scheme, key, plan } = built.pipeline;
    let mut notes = built.notes;
    let mut report = audit_pair(&scheme, &key, &a.audit)?;
    if report.capacity.is_none() {
        if let Family::Kmt(m, t) = family {
            report.set_capacity(capacity_kmt(m, t)?);
            notes.push("capacity from the closed form; m exceeds --max-partition-m".into());
        } else {
            notes.push("capacity not computed; m exceeds --max-partition-m".into());
        }
    }
    let transcript = Transcript {
        hypergraph: h,
        params: Params {
            n: plan.n,
            pipeline: built.kind.into(),
            notes,
        },
        packing: Some(PackingSection {
            parts: plan.parts,
            reuse: built.reuse,
        }),
        scheme,
        key,
        audit: Some(report.clone()),
    };
    let text = match &a.out {
        Some(out) => {
            let body = if is_json(out) {
                transcript.to_json()
            } else {
                transcript.to_text()
            };
            write_out(out, &body)?;
            format!("[audit]\n{}", audit_text(&report))
        }
        None => transcript.to_text(),
    };
    if report.passed() {
        Ok(text)
    } else {
        Err(Failure::Verdict(text))
    }
}

fn cmd_audit(a: AuditArgs) -> CmdResult {
    let path = &a.transcript;
    let text = fs::read_to_string(path)
        .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    let t = if is_json(path) {
        Transcript::from_json(&text)
    } else {
        Transcript::parse(&text)
    }
    .map_err(|e| config(format!("{}: {e}", path.display())))?;
    let report = audit_pair(&t.scheme, &t.key, &a.audit)?;
    let out = format!("[audit]\n{}", audit_text(&report));
    if let Some(p) = &a.out {
        let body = if is_json(p) {
            format!(
                "{}\n",
                serde_json::to_string_pretty(&report).expect("serializable")
            )
        } else {
            out.clone()
        };
        write_out(p, &body)?;
    }
    if report.passed() {
        Ok(out)
    } else {
        Err(Failure::Verdict(out))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Pack(a) => cmd_pack(a),
        Command::Run(a) => cmd_run(a),
        Command::Audit(a) => cmd_audit(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verdict(text)) => {
            print!("{text}");
            eprintln!("error: verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
