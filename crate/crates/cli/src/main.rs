use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diqkd::behavior::Behavior;
use diqkd::certify::{local_analysis, GuessingProblem, Level};
use diqkd::keyrate::{maximize_key, FixedParams, Objective, Search};
use diqkd::schemes::{behavior, target_state};
use diqkd_cli::reproduce::{self, Options, Target};
use diqkd_cli::{exit, rows_to_csv, write_outputs, CliError, CliResult, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "diqkd", version, about = "Heralded single-photon DIQKD toolkit")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, env = "DIQKD_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "DIQKD_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, env = "DIQKD_WORKERS")]
    workers: Option<usize>,
    /// Output directory; nothing is written outside it.
    #[arg(long, global = true, env = "DIQKD_OUT")]
    out: Option<PathBuf>,
    /// Hierarchy level: 1, 1+AB or 2.
    #[arg(long, global = true, env = "DIQKD_LEVEL")]
    level: Option<Level>,
    /// Overrides the solver feasibility and gap tolerances.
    #[arg(long, global = true, env = "DIQKD_TOL")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the configured scheme and write its behavior.
    Simulate,
    /// Locality verdict, white-noise weight and guessing bound of a behavior file.
    Certify {
        /// Behavior in JSON or long CSV form.
        behavior: PathBuf,
    },
    /// Maximize the key rate at the configured efficiencies.
    Optimize,
    /// Recompute a table or figure and compare with reference values.
    Reproduce {
        /// table1, fig1, fig3, appendixC or amplifier.
        target: Target,
    },
}

fn settings(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.budget.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.budget.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(l) = cli.level {
        cfg.level = l;
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.feasibility = t;
        cfg.tolerances.gap = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn to_json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

fn simulate(cfg: &RunConfig) -> CliResult<i32> {
    let res = behavior(&cfg.scheme)?;
    let v = target_state(cfg.scheme.t);
    let rho = &res.leading_state;
    let fidelity: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| v[i] * v[j] * rho[(i, j)].re).sum();
    let summary = serde_json::json!({
        "scheme": cfg.scheme.scheme,
        "p_herald": res.p_herald,
        "leading_coefficient": res.leading_coeff,
        "leading_fidelity": fidelity,
    });
    write_outputs(
        &cfg.out,
        &[("behavior.json".into(), res.behavior.to_json()?), ("summary.json".into(), to_json(&summary)?)],
    )?;
    println!("p_herald = {:e}, leading fidelity = {fidelity:.6}", res.p_herald);
    Ok(exit::PASS)
}

fn certify(cfg: &RunConfig, path: &Path) -> CliResult<i32> {
    let b = Behavior::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let local = local_analysis(&b, &cfg.tolerances)?;
    let w = local.signed_w.max(0.0);
    let guess = GuessingProblem::new(&b.scenario, cfg.x_star, cfg.level)?.solve(&b, cfg.eps, &cfg.tolerances)?;
    let cert = serde_json::json!({
        "local": w <= 1e-9,
        "w_star": w,
        "signed_w": local.signed_w,
        "G": guess.value,
        "certificate": guess,
    });
    write_outputs(&cfg.out, &[("certificate.json".into(), to_json(&cert)?)])?;
    println!("{}; w* = {w:.6}; G = {:.6}", if w <= 1e-9 { "local" } else { "nonlocal" }, guess.value);
    Ok(exit::PASS)
}

fn optimize(cfg: &RunConfig) -> CliResult<i32> {
    let s = &cfg.scheme;
    let fixed = FixedParams {
        scheme: s.scheme,
        eta_l: cfg.eta_l.unwrap_or(s.eta_d),
        eta_t: s.eta_t,
        p: s.p,
        pbar: s.pbar,
        free_pbar: false,
    };
    let mut search = Search::new(fixed, Objective::KeyRate);
    search.level = cfg.level;
    let rep = maximize_key(&search, &cfg.budget, None)?;
    write_outputs(&cfg.out, &[("report.json".into(), to_json(&rep)?)])?;
    println!("G = {:.6}, H = {:.6}, r = {:.6}, K = {:.6e} bit/s", rep.g, rep.h, rep.r_down, rep.k);
    Ok(exit::PASS)
}

fn reproduce_target(cfg: &RunConfig, target: Target) -> CliResult<i32> {
    let opts = Options { budget: cfg.budget, level: cfg.level };
    let outcome = reproduce::run(target, &opts)?;
    let mut files = outcome.files.clone();
    files.push((format!("{}_acceptance.csv", target.name()), rows_to_csv(&outcome.rows)?));
    write_outputs(&cfg.out, &files)?;
    for r in &outcome.rows {
        println!(
            "{} {:<44} computed {:<14.6} expected {:<8} tol {:<12} {}",
            r.target,
            r.quantity,
            r.computed,
            r.paper,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if outcome.passed() { exit::PASS } else { exit::ACCEPTANCE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings(&cli).and_then(|cfg| match &cli.command {
        Command::Simulate => simulate(&cfg),
        Command::Certify { behavior } => certify(&cfg, behavior),
        Command::Optimize => optimize(&cfg),
        Command::Reproduce { target } => reproduce_target(&cfg, *target),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
