//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 domain error (invalid knowledge base, failed
//! operation), 2 I/O or usage error.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use horizon_core::FusionRule;

use crate::api;
use crate::bench::{self, BenchConfig, FrameShape, OpCounts};
use crate::engine::{EngineError, LogRecord, NodeId, Session};
use crate::kb::{KbError, KnowledgeBase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "horizon", version, about = "Evidential reasoning over frames of discernment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Dempster,
    Smets,
    Dependent,
}

impl From<RuleArg> for FusionRule {
    fn from(r: RuleArg) -> FusionRule {
        match r {
            RuleArg::Dempster => FusionRule::Dempster,
            RuleArg::Smets => FusionRule::Smets,
            RuleArg::Dependent => FusionRule::Dependent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a knowledge-base file.
    Validate { kb: PathBuf },
    /// Run a script of evidence and operations, then print the conclusion.
    ///
    /// The script is a JSON array of session-log records. Evidence the
    /// script leaves unconsumed is fused with --rule on --target; a single
    /// leftover node is reported as is.
    Fuse {
        kb: PathBuf,
        script: PathBuf,
        #[arg(long, value_enum, default_value = "dempster")]
        rule: RuleArg,
        /// Confidence-based discounting before fusion (session default: on).
        #[arg(long, value_enum)]
        auto_discount: Option<Toggle>,
        /// Frame to fuse on; defaults to the frame of the first leftover node.
        #[arg(long)]
        target: Option<String>,
        /// Also print the influence ranking.
        #[arg(long)]
        explain: bool,
        /// Full-precision JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Time a seeded synthetic workload.
    Bench {
        #[arg(long, default_value_t = 35)]
        boes: usize,
        /// Frame sizes as count:min-max:mean.
        #[arg(long, default_value_t = FrameShape::default())]
        frames: FrameShape,
        /// Operation counts as discounts,translations,fusions.
        #[arg(long, default_value_t = OpCounts::default())]
        ops: OpCounts,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Serve the HTTP API for a session over a knowledge base.
    Serve {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, env = "HORIZON_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_IO
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Validate { kb } => validate(&kb, out, err),
        Command::Fuse {
            kb,
            script,
            rule,
            auto_discount,
            target,
            explain,
            json,
        } => {
            let opts = FuseOptions {
                rule: rule.into(),
                auto_discount: auto_discount.map(|t| matches!(t, Toggle::On)),
                target,
                explain,
                json,
            };
            fuse(&kb, &script, &opts, out, err)
        }
        Command::Bench {
            boes,
            frames,
            ops,
            seed,
        } => bench_cmd(
            &BenchConfig {
                boes,
                frames,
                ops,
                seed,
            },
            out,
            err,
        ),
        Command::Serve { kb, port, host } => serve(&kb, SocketAddr::new(host, port), out, err),
    }
}

fn kb_exit(path: &Path, e: &KbError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {}: {e}", path.display());
    match e {
        KbError::Io(_) => EXIT_IO,
        _ => EXIT_DOMAIN,
    }
}

fn engine_exit(e: &EngineError, err: &mut dyn Write) -> i32 {
    let (_, code) = api::error_code(e);
    let _ = writeln!(err, "error[{code}]: {e}");
    EXIT_DOMAIN
}

fn validate(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match KnowledgeBase::load_path(path) {
        Ok(kb) => {
            let _ = writeln!(
                out,
                "ok: {}: {} frames, {} relations, {} static BOEs",
                path.display(),
                kb.gallery.frames().len(),
                kb.gallery.relations().len(),
                kb.static_boes.len()
            );
            EXIT_OK
        }
        Err(e) => kb_exit(path, &e, err),
    }
}

struct FuseOptions {
    rule: FusionRule,
    auto_discount: Option<bool>,
    target: Option<String>,
    explain: bool,
    json: bool,
}

/// Nodes the script created that nothing else consumed.
fn leftovers(session: &Session, first_script_node: u64) -> Vec<NodeId> {
    let consumed: std::collections::BTreeSet<NodeId> = session.nodes().flat_map(|n| n.inputs.clone()).collect();
    session
        .nodes()
        .filter(|n| n.id.0 >= first_script_node && !n.disabled && !consumed.contains(&n.id))
        .map(|n| n.id)
        .collect()
}

fn fuse(kb_path: &Path, script_path: &Path, opts: &FuseOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let kb = match KnowledgeBase::load_path(kb_path) {
        Ok(kb) => kb,
        Err(e) => return kb_exit(kb_path, &e, err),
    };
    let text = match std::fs::read_to_string(script_path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", script_path.display());
            return EXIT_IO;
        }
    };
    let script: Vec<LogRecord> = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", script_path.display());
            return EXIT_IO;
        }
    };
    let mut session = Session::new(kb);
    let first_script_node = session.node_count() as u64 + 1;
    let result = (|| -> Result<(Session, NodeId, String), EngineError> {
        if let Some(on) = opts.auto_discount {
            session.set_auto_discount(on)?;
        }
        for record in script {
            session.apply(record)?;
        }
        let left = leftovers(&session, first_script_node);
        let node = match left[..] {
            [] => {
                return Err(horizon_core::Error::TooFewInputs { needed: 1, got: 0 }.into());
            }
            [only] => only,
            _ => {
                let target = match &opts.target {
                    Some(t) => t.clone(),
                    None => session.node(left[0])?.boe.frame_id.clone(),
                };
                session.run_fusion(&left, opts.rule, &target, None)?
            }
        };
        let heading = format!(
            "auto-discount {}",
            if session.auto_discount().enabled { "on" } else { "off" }
        );
        Ok((session, node, heading))
    })();
    let (session, node, heading) = match result {
        Ok(r) => r,
        Err(e) => return engine_exit(&e, err),
    };
    let report = if opts.json {
        render_json(&session, node, opts.explain)
    } else {
        render_table(&session, node, &heading, opts.explain)
    };
    match report {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => engine_exit(&e, err),
    }
}

fn render_json(session: &Session, node: NodeId, explain: bool) -> Result<String, EngineError> {
    let mut doc = serde_json::Map::new();
    let conclusion = api::conclusion_out(session, node)?;
    doc.insert("conclusion".into(), serde_json::to_value(conclusion).expect("serializes"));
    if explain {
        let explanation = api::explanation_out(session, node)?;
        doc.insert("explanation".into(), serde_json::to_value(explanation).expect("serializes"));
    }
    doc.insert("node".into(), serde_json::to_value(api::node_out(session, node)?).expect("serializes"));
    let mut text = serde_json::to_string_pretty(&doc).expect("serializes");
    text.push('\n');
    Ok(text)
}

fn render_table(session: &Session, node: NodeId, heading: &str, explain: bool) -> Result<String, EngineError> {
    use std::fmt::Write as _;
    let c = session.conclusion_of(node)?;
    let n = session.node(node)?;
    let frame = session.kb().gallery.frame(&c.frame_id)?;
    let mut s = String::new();
    let how = match &n.op {
        crate::engine::NodeOp::Fused { rule, .. } => format!("{} fusion", rule.as_str()),
        _ => "single node".to_string(),
    };
    let _ = writeln!(s, "conclusion {node} on frame {} ({how}, {heading})", c.frame_id);
    let labels: Vec<String> = c.report.rows.iter().map(|r| frame.describe(&r.statement)).collect();
    let width = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0).max("statement".len());
    let _ = writeln!(s, "{:<width$}  {:>8}  {:>11}  {:>8}", "statement", "support", "uncertainty", "against");
    for (row, label) in c.report.rows.iter().zip(&labels) {
        let _ = writeln!(
            s,
            "{:<width$}  {:>8.4}  {:>11.4}  {:>8.4}",
            label, row.support, row.uncertainty, row.against
        );
    }
    let _ = writeln!(s, "conflict {:.4}", c.report.conflict);
    let _ = writeln!(s, "unknown {:.4}", c.report.unknown_mass);
    if c.inconclusive {
        let _ = writeln!(s, "inconclusive: leading statement is within {} of the runner-up", session.inconclusive_margin());
    }
    if explain {
        let e = session.explanation_of(node)?;
        let method = match e.report.method {
            horizon_core::InfluenceMethod::Standalone => "information of each source",
            horizon_core::InfluenceMethod::LeaveOneOut => "change when left out",
        };
        let exact = if e.report.exact { "" } else { ", restricted lattice" };
        let _ = writeln!(s, "\ninfluence ({method}{exact})");
        for (rank, entry) in e.report.entries.iter().enumerate() {
            let id: NodeId = entry.boe_id.parse().expect("session BOE ids are node ids");
            let name = &session.node(id)?.boe.source.name;
            let _ = writeln!(
                s,
                "{:>3}. {:<6} {:<30} {:>10.4} bits  {:>6.1}%",
                rank + 1,
                entry.boe_id,
                name,
                entry.influence,
                100.0 * entry.share
            );
        }
        let _ = writeln!(s, "\n{}", e.text);
    }
    Ok(s)
}

fn bench_cmd(cfg: &BenchConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match bench::run(cfg) {
        Ok(r) => r,
        Err(e) => return engine_exit(&e, err),
    };
    let sizes = &report.frame_sizes;
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64;
    let _ = writeln!(
        out,
        "workload: {} BOEs, {} frames ({}-{} propositions, mean {:.1}), ops {}, seed {}",
        cfg.boes,
        sizes.len(),
        sizes.iter().min().unwrap_or(&0),
        sizes.iter().max().unwrap_or(&0),
        mean,
        cfg.ops,
        cfg.seed
    );
    let _ = writeln!(out, "workload digest: {}", report.workload_digest);
    let _ = writeln!(out, "result digest:   {}", report.result_digest);
    for (phase, t) in &report.phases {
        let _ = writeln!(out, "{phase:<10} {:>12.3} ms", t.as_secs_f64() * 1e3);
    }
    let _ = writeln!(out, "{:<10} {:>12.3} ms", "total", report.total.as_secs_f64() * 1e3);
    let _ = writeln!(out, "nodes: {}", report.nodes);
    EXIT_OK
}

fn serve(kb_path: &Path, addr: SocketAddr, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let kb = match KnowledgeBase::load_path(kb_path) {
        Ok(kb) => kb,
        Err(e) => return kb_exit(kb_path, &e, err),
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start runtime: {e}");
            return EXIT_IO;
        }
    };
    runtime.block_on(async {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::AddrInUse => {
                let _ = writeln!(err, "error: address {addr} is already in use");
                return EXIT_IO;
            }
            Err(e) => {
                let _ = writeln!(err, "error: cannot listen on {addr}: {e}");
                return EXIT_IO;
            }
        };
        let local = listener.local_addr().unwrap_or(addr);
        let _ = writeln!(out, "listening on http://{local}/api/v1");
        let _ = out.flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match api::serve(listener, api::shared(Session::new(kb)), shutdown).await {
            Ok(()) => {
                let _ = writeln!(out, "shut down");
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_IO
            }
        }
    })
}
