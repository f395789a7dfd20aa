//! `otr`: translate policy networks into oblique trees and programs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use otr_core::emitter::{self, EmitOptions, PidRender};
use otr_core::envs::{self, EnvId, Policy};
use otr_core::netio::{load_network, NetworkSpec};
use otr_core::pidpolicy::load_pid_policy;
use otr_core::rng::InputBox;
use otr_core::translator::{self, TranslateOptions, DEFAULT_NODE_BUDGET};
use otr_core::tree::{self, load_trace, load_tree, ObliqueTree};

const EXIT_PIPELINE: u8 = 1;
const EXIT_NOT_EQUIVALENT: u8 = 3;

#[derive(Parser)]
#[command(name = "otr", version, about = "Compile ReLU policy networks into oblique decision trees and programs")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Maximum worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log format on stderr. The level comes from OTR_LOG (default info).
    #[arg(long, global = true, value_enum, default_value_t = LogFormat::Text)]
    log: LogFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Network -> equivalent oblique tree.
    Translate(TranslateArgs),
    /// Compare a tree with its network on sampled inputs (exit 3 on mismatch).
    Verify(VerifyArgs),
    /// Remove paths not seen in a trace, or all but the k most visited.
    Prune(PruneArgs),
    /// Render a tree (or a PID policy) as a program.
    Emit(EmitArgs),
    /// Roll a policy out in an environment.
    Eval(EvalArgs),
    /// Record the activation patterns a network visits in an environment.
    Trace(TraceArgs),
    /// Size, depth and sparsity of a tree, with an optional dominance report.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Trace,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    mode: Mode,
    /// Required with --mode trace.
    #[arg(long, required_if_eq("mode", "trace"))]
    trace: Option<PathBuf>,
    /// Largest number of hidden-level paths a full tree may have.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    tree: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Input box: `lo:hi` for every dimension or `lo:hi,lo:hi,...` per dimension.
    #[arg(long = "box", default_value = "-1:1", allow_hyphen_values = true)]
    input_box: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    /// Tree to prune.
    #[arg(long, required_unless_present = "net", conflicts_with = "net")]
    tree: Option<PathBuf>,
    /// Build the tree from this network along the trace instead.
    #[arg(long)]
    net: Option<PathBuf>,
    #[arg(long)]
    trace: PathBuf,
    /// Keep only the k most visited patterns.
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long, required_unless_present = "pid", conflicts_with = "pid")]
    tree: Option<PathBuf>,
    /// PID policy file; its θ tree is rendered with P/I/D blocks.
    #[arg(long)]
    pid: Option<PathBuf>,
    /// Comma-separated input names (default x1,x2,...).
    #[arg(long, value_delimiter = ',')]
    names: Option<Vec<String>>,
    #[arg(long, default_value_t = emitter::DEFAULT_PRECISION)]
    precision: usize,
    /// Hide terms whose coefficient magnitude is at most this.
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    /// Zero coefficients with magnitude at most this before rendering.
    #[arg(long)]
    zero_out: Option<f64>,
    /// Re-parse the output and compare it with the tree on sampled inputs.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    #[arg(long, group = "policy", required = true)]
    net: Option<PathBuf>,
    #[arg(long, group = "policy")]
    tree: Option<PathBuf>,
    #[arg(long, group = "policy")]
    pid: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    tree: PathBuf,
    /// Coefficients at or below this magnitude count as zero.
    #[arg(long, default_value_t = tree::DEFAULT_SPARSE_EPS)]
    sparse_eps: f64,
    /// Add a dominance report over this box (`lo:hi` or `lo:hi,...`).
    #[arg(long = "box", allow_hyphen_values = true)]
    input_box: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long, value_delimiter = ',')]
    names: Option<Vec<String>>,
}

fn parse_box(spec: &str, dim: usize) -> Result<InputBox> {
    let parse_one = |s: &str| -> Result<(f64, f64)> {
        let (lo, hi) = s.split_once(':').with_context(|| format!("box interval {s:?} is not lo:hi"))?;
        let lo: f64 = lo.trim().parse().with_context(|| format!("bad number {lo:?} in --box"))?;
        let hi: f64 = hi.trim().parse().with_context(|| format!("bad number {hi:?} in --box"))?;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            bail!("box interval {s:?} must satisfy lo <= hi");
        }
        Ok((lo, hi))
    };
    let parts: Vec<&str> = spec.split(',').collect();
    let bounds = match parts.len() {
        1 => vec![parse_one(parts[0])?; dim],
        n if n == dim => parts.iter().map(|p| parse_one(p)).collect::<Result<_>>()?,
        n => bail!("--box has {n} intervals but the input has {dim} dimensions"),
    };
    Ok(InputBox::new(bounds))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn tree_text(t: &ObliqueTree) -> String {
    t.to_json_string() + "\n"
}

fn translate(a: &TranslateArgs) -> Result<()> {
    let net = load_network(&a.net)?;
    let trace = a.trace.as_ref().map(load_trace).transpose()?;
    let opts = match (a.mode, &trace) {
        (Mode::Full, _) => TranslateOptions::full(),
        (Mode::Trace, Some(t)) => TranslateOptions::trace_driven(t),
        (Mode::Trace, None) => unreachable!("clap requires --trace"),
    }
    .with_budget(a.budget);
    let t = translator::translate(&net, &opts)?;
    let s = tree::stats(&t, tree::DEFAULT_SPARSE_EPS);
    info!("translated {} hidden neurons into {} leaves", t.hidden_neurons, s.leaves);
    write_output(a.out.as_deref(), &tree_text(&t))
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<bool> {
    let net = load_network(&a.net)?;
    let t = load_tree(&a.tree)?;
    let b = parse_box(&a.input_box, net.input_dim())?;
    let report = translator::verify_equivalence(&net, &t, &b, a.samples, seed)?;
    info!(
        "verified {} samples: max relative difference {:e}, {} label disagreements",
        report.samples, report.max_rel_diff, report.label_disagreements
    );
    write_output(a.out.as_deref(), &json(&report)?)?;
    Ok(report.pass)
}

fn prune(a: &PruneArgs) -> Result<()> {
    let trace = load_trace(&a.trace)?;
    let base = match (&a.tree, &a.net) {
        (Some(p), _) => load_tree(p)?,
        (None, Some(n)) => translator::translate(&load_network(n)?, &TranslateOptions::trace_driven(&trace))?,
        (None, None) => unreachable!("clap requires --tree or --net"),
    };
    let pruned = match a.topk {
        Some(k) => tree::prune_topk(&base, &trace, k)?,
        None => tree::prune_unvisited(&base, &trace)?,
    };
    let s = tree::stats(&pruned, tree::DEFAULT_SPARSE_EPS);
    info!("kept {} leaves, {} pruned markers", s.leaves, s.pruned_leaves);
    write_output(a.out.as_deref(), &tree_text(&pruned))
}

fn emit(a: &EmitArgs, seed: u64) -> Result<()> {
    let (mut t, pid) = match (&a.tree, &a.pid) {
        (Some(p), _) => (load_tree(p)?, None),
        (None, Some(p)) => {
            let pol = load_pid_policy(p)?;
            let Some(theta) = pol.theta_tree() else {
                bail!("{} has a network θ source; only θ trees can be rendered", p.display());
            };
            let render = PidRender {
                action_dim: pol.action_dim(),
                state_dim: pol.state_dim(),
            };
            (theta.clone(), Some(render))
        }
        (None, None) => unreachable!("clap requires --tree or --pid"),
    };
    let samples = InputBox::cube(t.input_dim, -1.0, 1.0).samples(1000, seed);
    if let Some(eps) = a.zero_out {
        let (z, rep) = emitter::zero_out(&t, eps, &samples)?;
        info!(
            "zeroed {} coefficients; max output change {:e} on {} samples",
            rep.zeroed, rep.max_output_change, rep.samples
        );
        t = z;
    }
    let opts = EmitOptions {
        names: a.names.clone(),
        precision: a.precision,
        drop_threshold: a.drop,
        pid,
    };
    let prog = emitter::emit_program(&t, &opts)?;
    if a.check {
        let parsed = emitter::parse_program(&prog.source, &prog.names).context("emitted program failed to re-parse")?;
        let tol = 10f64.powi(1 - a.precision as i32);
        let mut worst: f64 = 0.0;
        for x in &samples {
            let got = parsed.evaluate(x)?;
            match (t.predict(x)?, got) {
                (otr_core::Prediction::Values(want), emitter::ProgramValue::Values(v)) => {
                    for (w, g) in want.iter().zip(&v) {
                        worst = worst.max((w - g).abs() / w.abs().max(1.0));
                    }
                }
                (otr_core::Prediction::Label(w), emitter::ProgramValue::Label(g)) if w == g => {}
                (otr_core::Prediction::Pruned { .. }, emitter::ProgramValue::Pruned) => {}
                (w, g) => bail!("re-parsed program disagrees at {x:?}: tree {w:?}, program {g:?}"),
            }
        }
        if a.drop == 0.0 && a.zero_out.is_none() && worst > tol {
            bail!("re-parsed program differs from the tree by {worst:e} (tolerance {tol:e})");
        }
        info!("program re-parsed; largest relative difference {worst:e} on {} samples", samples.len());
    }
    write_output(a.out.as_deref(), &prog.source)
}

fn eval(a: &EvalArgs, seed: u64) -> Result<()> {
    let env: EnvId = a.env.parse()?;
    let (net, t, pid);
    let policy = if let Some(p) = &a.net {
        net = load_network(p)?;
        Policy::Network(&net)
    } else if let Some(p) = &a.tree {
        t = load_tree(p)?;
        Policy::Tree(&t)
    } else if let Some(p) = &a.pid {
        pid = load_pid_policy(p)?;
        Policy::Pid(&pid)
    } else {
        unreachable!("clap requires one policy")
    };
    let mut r = envs::rollout(policy, env, a.episodes, seed)?;
    info!("{} episodes on {}: mean reward {:.3} (std {:.3})", a.episodes, env, r.mean, r.std);
    r.trace = None;
    write_output(a.out.as_deref(), &json(&r)?)
}

fn trace(a: &TraceArgs, seed: u64) -> Result<()> {
    let env: EnvId = a.env.parse()?;
    let net: NetworkSpec = load_network(&a.net)?;
    let tr = envs::collect_trace(&net, env, a.episodes, seed)?;
    info!(
        "{} visits, {} distinct patterns (log2 = {:.2})",
        tr.total_visits(),
        tr.distinct(),
        tr.effective_depth()
    );
    write_output(a.out.as_deref(), &(tr.to_json_string() + "\n"))
}

fn stats(a: &StatsArgs) -> Result<()> {
    let t = load_tree(&a.tree)?;
    let s = tree::stats(&t, a.sparse_eps);
    let mut doc = serde_json::json!({ "stats": s });
    if let Some(spec) = &a.input_box {
        let b = parse_box(spec, t.input_dim)?;
        let names = a.names.clone().unwrap_or_else(|| emitter::default_names(t.input_dim));
        doc["dominance"] = serde_json::to_value(emitter::dominance_report(&t, &b, &names, a.tau)?)?;
    }
    write_output(None, &json(&doc)?)
}

fn init_logging(format: LogFormat) {
    let mut b = env_logger::Builder::from_env(env_logger::Env::new().filter_or("OTR_LOG", "info"));
    if let LogFormat::Json = format {
        b.format(|buf, rec| {
            let line = serde_json::json!({
                "level": rec.level().to_string().to_lowercase(),
                "target": rec.target(),
                "message": rec.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    b.target(env_logger::Target::Stderr).init();
}

fn run(cli: &Cli) -> Result<Option<u8>> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Translate(a) => translate(a)?,
        Command::Verify(a) => {
            if !verify(a, cli.seed)? {
                return Ok(Some(EXIT_NOT_EQUIVALENT));
            }
        }
        Command::Prune(a) => prune(a)?,
        Command::Emit(a) => emit(a, cli.seed)?,
        Command::Eval(a) => eval(a, cli.seed)?,
        Command::Trace(a) => trace(a, cli.seed)?,
        Command::Stats(a) => stats(a)?,
    }
    Ok(None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.log);
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(code)) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PIPELINE)
        }
    }
}
