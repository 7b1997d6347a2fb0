//! `blindctl`: evaluate, optimize and verify blind controllers from the
//! command line.

mod format;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blindctl::io;
use blindctl::mdp::occupancy_residual;
use blindctl::oracles::sqrtsum::decide_with_precision;
use blindctl::oracles::tractable::convexity_probe;
use blindctl::oracles::verify::DEFAULT_TOLERANCE;
use blindctl::rational::{format_rational, parse_rational};
use blindctl::{
    blind_cost, is_tractable_case, occupancy, optimize_blind, solve_tractable, sqrtsum_to_blind,
    stableset_to_blind, verify_instance, Error, Method, OptimizeConfig, Rational, ReductionMeta,
    Verdict,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use format::{g15, g15_list};

const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_INCONSISTENT: u8 = 4;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "blindctl", version, about = "Stochastic blind controllers for discounted MDPs")]
struct Cli {
    /// Emit a JSON report instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Seed for the multistart optimizer
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report (or, for reduce-*, the bundle) to this file instead of stdout
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(alias = "frank_wolfe", alias = "fw")]
    FrankWolfe,
    #[value(alias = "projected_gradient", alias = "pg")]
    ProjectedGradient,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::FrankWolfe => Method::FrankWolfe,
            MethodArg::ProjectedGradient => Method::ProjectedGradient,
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a rational number"))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact cost, occupancy and residual of a controller
    Evaluate {
        /// MDP file (a reduction bundle also works)
        mdp: PathBuf,
        /// Controller file (`pi: ...`)
        controller: PathBuf,
    },
    /// Multistart local search for a good blind controller
    Optimize {
        mdp: PathBuf,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
        max_iters: u64,
        #[arg(long, default_value_t = 1e-9, value_parser = positive_f64)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::FrankWolfe)]
        method: MethodArg,
    },
    /// Build the blind MDP whose optimum encodes the stability number of a cubic graph
    ReduceStableset {
        /// Graph file (`p edge n m` / `e u v`)
        graph: PathBuf,
        /// Independent-set size to ask about
        #[arg(long)]
        j: usize,
        #[arg(long, default_value = "9/10", value_parser = rational_arg)]
        gamma: Rational,
    },
    /// Build the blind MDP whose optimum encodes a sum of square roots
    ReduceSqrtsum {
        /// Instance file (`c: ...` / `d: ...`)
        instance: PathBuf,
    },
    /// Compare the optimizer with the exact oracle on a reduction bundle
    Verify {
        bundle: PathBuf,
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        restarts: u64,
        /// Agreement tolerance between optimizer and oracle
        #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = positive_f64)]
        tol: f64,
    },
    /// Detect the symmetric class and solve it exactly
    Tractable { mdp: PathBuf },
    /// Decide sum_i sqrt(c_i) <= d exactly (exit 0 for YES, 1 for NO)
    DecideSqrtsum { instance: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn input_error(path: &Path, e: Error) -> Failure {
    Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> blindctl::Result<T>) -> Result<T, Failure> {
    parse(&read(path)?).map_err(|e| input_error(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display())))
}

/// What a command prints, and the exit code it asks for.
struct Outcome {
    text: String,
    json: Value,
    code: u8,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Self {
        Outcome { text, json, code: 0 }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "YES"
    } else {
        "NO"
    }
}

fn evaluate(mdp: &Path, controller: &Path) -> Result<Outcome, Failure> {
    let m = load(mdp, io::parse_any_mdp)?;
    let pi = load(controller, io::parse_controller)?;
    let cost = blind_cost(&m, &pi).map_err(|e| input_error(controller, e))?;
    let x = occupancy(&m, &pi).map_err(|e| input_error(mdp, e))?;
    let residual = occupancy_residual(&m, &pi, &x).map_err(|e| input_error(mdp, e))?;
    let text = format!(
        "cost: {}\noccupancy: {}\nresidual: {}\n",
        g15(cost),
        g15_list(x.as_slice()),
        g15(residual)
    );
    let json = json!({
        "command": "evaluate",
        "cost": cost,
        "occupancy": x.as_slice(),
        "residual": residual,
    });
    Ok(Outcome::ok(text, json))
}

fn optimize(mdp: &Path, cfg: OptimizeConfig) -> Result<Outcome, Failure> {
    let m = load(mdp, io::parse_any_mdp)?;
    let r = optimize_blind(&m, &cfg).map_err(|e| input_error(mdp, e))?;
    let text = format!(
        "value: {}\npi: {}\nconverged: {}\niterations: {}\nrestart: {}\nmethod: {}\nrestarts: {}\nseed: {}\n",
        g15(r.value),
        g15_list(r.pi.as_slice()),
        r.converged,
        r.iterations_used,
        r.restart_index,
        cfg.method.as_str(),
        cfg.restarts,
        cfg.seed
    );
    let json = json!({
        "command": "optimize",
        "value": r.value,
        "pi": r.pi.as_slice(),
        "converged": r.converged,
        "iterations": r.iterations_used,
        "restart_index": r.restart_index,
        "method": cfg.method.as_str(),
        "restarts": cfg.restarts,
        "seed": cfg.seed,
    });
    Ok(Outcome::ok(text, json))
}

fn precondition(path: &Path, e: Error) -> Failure {
    match e {
        Error::NotCubic { .. } | Error::TargetOutOfRange { .. } => {
            Failure::new(EXIT_PRECONDITION, format!("{}: {e}", path.display()))
        }
        Error::TrivialSqrtSum { .. } => Failure::new(
            EXIT_PRECONDITION,
            format!(
                "{}: {e}\nhint: run `blindctl decide-sqrtsum {}` instead",
                path.display(),
                path.display()
            ),
        ),
        other => input_error(path, other),
    }
}

fn reduction_outcome(
    inst: &blindctl::ReductionInstance,
    output: Option<&Path>,
) -> Result<Outcome, Failure> {
    let bundle = io::serialize_bundle(inst);
    let gamma = match &inst.meta {
        ReductionMeta::StableSet { gamma, .. } | ReductionMeta::SqrtSum { gamma, .. } => gamma,
    };
    let mut text = format!(
        "kind: {}\nstates: {}\nactions: {}\ngamma: {}\ntarget: {}\n",
        inst.kind().as_str(),
        inst.mdp.n(),
        inst.mdp.k(),
        format_rational(gamma),
        format_rational(&inst.target)
    );
    let mut json = json!({
        "command": format!("reduce-{}", inst.kind().as_str().replace('_', "")),
        "kind": inst.kind().as_str(),
        "states": inst.mdp.n(),
        "actions": inst.mdp.k(),
        "gamma": format_rational(gamma),
        "target": format_rational(&inst.target),
    });
    if let ReductionMeta::SqrtSum { epsilon, .. } = &inst.meta {
        let _ = writeln!(text, "epsilon: {}", format_rational(epsilon));
        json["epsilon"] = json!(format_rational(epsilon));
    }
    match output {
        Some(path) => {
            write(path, &bundle)?;
            let _ = writeln!(text, "bundle: {}", path.display());
            json["bundle"] = json!(path.display().to_string());
        }
        None => {
            text = bundle;
            json["bundle"] = json!(text);
        }
    }
    Ok(Outcome::ok(text, json))
}

fn reduce_stableset(
    graph: &Path,
    j: usize,
    gamma: &Rational,
    output: Option<&Path>,
) -> Result<Outcome, Failure> {
    let g = load(graph, io::parse_graph)?;
    let inst = stableset_to_blind(&g, j, gamma).map_err(|e| precondition(graph, e))?;
    reduction_outcome(&inst, output)
}

fn reduce_sqrtsum(instance: &Path, output: Option<&Path>) -> Result<Outcome, Failure> {
    let q = load(instance, io::parse_sqrtsum)?;
    let inst = sqrtsum_to_blind(&q).map_err(|e| precondition(instance, e))?;
    reduction_outcome(&inst, output)
}

fn verify(bundle: &Path, cfg: OptimizeConfig, tol: f64) -> Result<Outcome, Failure> {
    let inst = load(bundle, io::parse_bundle)?;
    let id = bundle
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let r = verify_instance(&inst, &id, &cfg, tol).map_err(|e| match e {
        Error::SearchBudget { .. } => Failure::new(EXIT_PRECONDITION, format!("{}: {e}", bundle.display())),
        other => input_error(bundle, other),
    })?;
    let text = io::serialize_report(&r);
    let json = json!({
        "command": "verify",
        "id": r.id,
        "kind": r.kind.as_str(),
        "verdict": r.verdict.as_str(),
        "oracle_value": r.oracle_value,
        "oracle_exact": r.oracle_exact.as_ref().map(format_rational),
        "optimizer_value": r.optimizer_value,
        "gap": r.gap,
        "tolerance": r.tolerance,
        "target": format_rational(&r.target),
        "decision": yes_no(r.decision),
        "witness": r.witness,
        "flags": r.flags,
    });
    let code = if r.verdict == Verdict::Inconsistent {
        EXIT_INCONSISTENT
    } else {
        0
    };
    Ok(Outcome { text, json, code })
}

fn tractable(mdp: &Path, seed: u64) -> Result<Outcome, Failure> {
    let m = load(mdp, io::parse_any_mdp)?;
    let form = is_tractable_case(&m);
    let mut json = json!({
        "command": "tractable",
        "tractable": form.is_tractable,
        "symmetric_ok": form.symmetric_ok,
        "cost_ok": form.cost_ok,
        "kappa": form.kappa,
    });
    let mut text = String::new();
    if let Some(reason) = form.reason() {
        let _ = writeln!(text, "not tractable: {reason}");
        json["reason"] = json!(reason);
    } else {
        let sol = solve_tractable(&m).map_err(|e| input_error(mdp, e))?;
        let probe = convexity_probe(&m, 100, seed).map_err(|e| input_error(mdp, e))?;
        let _ = writeln!(text, "tractable: yes");
        let _ = writeln!(text, "kappa: {}", g15(form.kappa.unwrap_or(f64::NAN)));
        let _ = writeln!(text, "a_star: {}", sol.action + 1);
        let _ = writeln!(text, "value: {}", g15(sol.value));
        let _ = writeln!(text, "vertex_values: {}", g15_list(&sol.vertex_values));
        let _ = writeln!(
            text,
            "convexity: {} violations in {} trials",
            probe.violations, probe.trials
        );
        json["a_star"] = json!(sol.action + 1);
        json["value"] = json!(sol.value);
        json["vertex_values"] = json!(sol.vertex_values);
        json["convexity_trials"] = json!(probe.trials);
        json["convexity_violations"] = json!(probe.violations);
    }
    if form.reason().is_some() {
        let _ = writeln!(text, "symmetric_ok: {}", form.symmetric_ok);
        let _ = writeln!(text, "cost_ok: {}", form.cost_ok);
    }
    Ok(Outcome::ok(text, json))
}

fn decide(instance: &Path) -> Result<Outcome, Failure> {
    let q = load(instance, io::parse_sqrtsum)?;
    let (yes, bits) = decide_with_precision(&q);
    let json = json!({
        "command": "decide-sqrtsum",
        "decision": yes_no(yes),
        "c": q.c,
        "d": q.d,
        "precision_bits": bits,
    });
    Ok(Outcome {
        text: format!("{}\n", yes_no(yes)),
        json,
        code: if yes { 0 } else { EXIT_NO },
    })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let out = cli.output.as_deref();
    let config = |restarts: u64, max_iters: u64, tol: f64, method: Method| OptimizeConfig {
        restarts: restarts as usize,
        max_iters: max_iters as usize,
        tol,
        seed: cli.seed,
        method,
    };
    match &cli.command {
        Command::Evaluate { mdp, controller } => evaluate(mdp, controller),
        Command::Optimize {
            mdp,
            restarts,
            max_iters,
            tol,
            method,
        } => optimize(mdp, config(*restarts, *max_iters, *tol, (*method).into())),
        Command::ReduceStableset { graph, j, gamma } => reduce_stableset(graph, *j, gamma, out),
        Command::ReduceSqrtsum { instance } => reduce_sqrtsum(instance, out),
        Command::Verify {
            bundle,
            restarts,
            tol,
        } => {
            let d = OptimizeConfig::default();
            verify(bundle, config(*restarts, d.max_iters as u64, d.tol, d.method), *tol)
        }
        Command::Tractable { mdp } => tractable(mdp, cli.seed),
        Command::DecideSqrtsum { instance } => decide(instance),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("BLINDCTL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::new(EXIT_USAGE, format!("BLINDCTL_THREADS=`{v}` is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let json = cli.json;
    let report_path = match cli.command {
        Command::ReduceStableset { .. } | Command::ReduceSqrtsum { .. } => None,
        _ => cli.output.clone(),
    };
    let result = configure_threads().and_then(|_| run(cli)).and_then(|o| {
        let mut text = if json {
            serde_json::to_string_pretty(&o.json).expect("JSON values serialize")
        } else {
            o.text
        };
        if json {
            text.push('\n');
        }
        match &report_path {
            Some(path) => write(path, &text)?,
            None => print!("{text}"),
        }
        Ok(o.code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
