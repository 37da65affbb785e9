//! `freeact` — reproducible command runs over the freeact library.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage or
//! configuration error, 3 resource or search budget exhausted.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use freeact::cli::{
    cmd_build, cmd_counterexample, cmd_orbits, cmd_spectra, cmd_verify, exit_code_for, Report,
    RunConfig,
};
use freeact::structures::OracleKind;
use freeact::Error;

#[derive(Parser)]
#[command(name = "freeact", version, about = "Free pairs of partial automorphisms over finite windows, with spectral certificates")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Oracle kind: pureset | dlo | randomgraph | equivtower
    #[arg(long, global = true)]
    oracle: Option<String>,

    /// RNG seed for the oracle stream
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Window level (meaning is oracle-specific)
    #[arg(long, global = true)]
    level: Option<u32>,

    /// Back-and-forth rounds for the builder
    #[arg(long, global = true)]
    rounds: Option<usize>,

    /// Reduced-word length for fixed-point certification
    #[arg(long, global = true)]
    cert_depth: Option<usize>,

    /// Maximal ball radius for spectra / Schreier checks
    #[arg(long, global = true)]
    rmax: Option<usize>,

    /// Residual tolerance for eigenvalue iteration
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Sample count for displacement spot checks
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Output path for the persisted pair (build)
    #[arg(long, global = true)]
    out: Option<String>,

    /// Path to a persisted FREEPAIR/1 file (verify, spectra)
    #[arg(long, global = true)]
    pair: Option<String>,

    /// Configuration file (key=value lines); flags override its values
    #[arg(long, global = true)]
    config: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit class counts for arities 1..=4 over the empty base
    Orbits,
    /// Build a free pair, certify it, and optionally persist it
    Build,
    /// Reload a persisted pair and re-run every certification
    Verify,
    /// Kesten table, displacement bounds and orbit-ball agreement
    Spectra,
    /// The equivalence-tower counterexample with a random-graph control
    Counterexample,
}

fn resolve_config(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config file {path}: {e}")))?;
            RunConfig::parse(&text)?
        }
        None => {
            let kind = match &args.oracle {
                Some(s) => OracleKind::parse(s)?,
                None => OracleKind::RandomGraph,
            };
            RunConfig::default_for(kind)
        }
    };
    if let Some(s) = &args.oracle {
        let kind = OracleKind::parse(s)?;
        if kind != cfg.oracle {
            cfg.oracle = kind;
            if args.level.is_none() {
                cfg.level = RunConfig::default_for(kind).level;
            }
        }
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.level {
        if v == 0 {
            return Err(Error::Config("level must be positive".into()));
        }
        cfg.level = v;
    }
    if let Some(v) = args.rounds {
        cfg.rounds = v;
    }
    if let Some(v) = args.cert_depth {
        if v == 0 {
            return Err(Error::Config("cert-depth must be positive".into()));
        }
        cfg.cert_depth = v;
    }
    if let Some(v) = args.rmax {
        if v == 0 {
            return Err(Error::Config("rmax must be positive".into()));
        }
        cfg.r_max = v;
    }
    if let Some(v) = args.tol {
        if !(v > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        cfg.tol = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = &args.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = &args.pair {
        cfg.pair = Some(v.clone());
    }
    Ok(cfg)
}

fn run(args: &Args) -> Result<Report, Error> {
    let cfg = resolve_config(args)?;
    match args.command {
        Command::Orbits => cmd_orbits(&cfg),
        Command::Build => cmd_build(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Spectra => cmd_spectra(&cfg),
        Command::Counterexample => cmd_counterexample(&cfg),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => {
            print!("{}", report.to_text());
            if report.passed() {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
