use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use msparity::harness::sweep::{parse_n_list, parse_real_list};
use msparity::harness::{
    parse_csv, run_suite, run_sweep, simulate, to_csv, to_json, to_svg, ConfigSource, PlotAxis, ScenarioConfig,
    Suite, SweepConfig, SUITES,
};
use msparity::{Error, Result};

#[derive(Parser)]
#[command(name = "msparity", version, about = "Qubit entanglement through a collectively measured mesoscopic system")]
struct Cli {
    /// Seed for randomized suites (and the scenario's `seed` key).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write a JSON report.
    Simulate(SimulateArgs),
    /// Sweep the fidelity bound over N and polarization.
    Bound(BoundArgs),
    /// Run a verification suite (`all` runs every suite).
    Verify { suite: String },
    /// Draw a bound CSV as an SVG chart.
    Plot {
        csv: PathBuf,
        /// Horizontal axis.
        #[arg(long, value_enum, default_value = "n")]
        x: XAxis,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum XAxis {
    N,
    Polarization,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    circuit: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    polarization: Option<String>,
    #[arg(long)]
    measurement: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long = "t-m")]
    t_m: Option<String>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    v_even: Option<String>,
    #[arg(long)]
    v_odd: Option<String>,
    #[arg(long)]
    postselect: Option<String>,
    #[arg(long)]
    disentangle: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// MS sizes: `1..100`, `1-100` or `1,2,50`.
    #[arg(long, default_value = "1..100")]
    n: String,
    /// Comma-separated epsilon values.
    #[arg(long, conflicts_with = "polarization")]
    epsilon: Option<String>,
    /// Comma-separated polarizations `1 - epsilon` (default 0.1,0.3,0.5,0.7).
    #[arg(long)]
    polarization: Option<String>,
}

fn scenario(args: &SimulateArgs, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut src = match &args.config {
        Some(p) => ConfigSource::load(p)?,
        None => ConfigSource::default(),
    };
    let flags = [
        ("circuit", &args.circuit),
        ("n", &args.n),
        ("epsilon", &args.epsilon),
        ("polarization", &args.polarization),
        ("measurement", &args.measurement),
        ("theta", &args.theta),
        ("g", &args.g),
        ("t_m", &args.t_m),
        ("backend", &args.backend),
        ("v_even", &args.v_even),
        ("v_odd", &args.v_odd),
        ("postselect", &args.postselect),
    ];
    let mut overrides = ConfigSource::default();
    for (k, v) in flags {
        if let Some(v) = v {
            overrides.set(k, v)?;
        }
    }
    if args.disentangle {
        overrides.set("disentangle", "true")?;
    }
    if let Some(s) = seed {
        overrides.set("seed", &s.to_string())?;
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("`--set {kv}` is not KEY=VALUE")))?;
        overrides.set(k.trim(), v.trim())?;
    }
    // `epsilon` and `polarization` both given as overrides must agree
    if let (Some(e), Some(p)) = (&args.epsilon, &args.polarization) {
        msparity::harness::config::resolve_epsilon(Some(e), Some(p))?;
    }
    src.overlay(&overrides)?;
    ScenarioConfig::from_source(&src)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn expect_format(given: Option<Format>, allowed: &[Format], default: Format, cmd: &str) -> Result<Format> {
    let f = given.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(Error::Config(format!("`{cmd}` cannot write that format")));
    }
    Ok(f)
}

/// Returns whether every check passed.
fn execute(cli: &Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate(args) => {
            expect_format(cli.format, &[Format::Json], Format::Json, "simulate")?;
            let report = simulate(&scenario(args, cli.seed)?)?;
            emit(out, &to_json(&report)?)?;
            Ok(true)
        }
        Command::Bound(args) => {
            let format = expect_format(cli.format, &[Format::Csv, Format::Json, Format::Svg], Format::Csv, "bound")?;
            let ns = parse_n_list(&args.n)?;
            let cfg = match (&args.epsilon, &args.polarization) {
                (Some(e), _) => SweepConfig::new(ns, Some(parse_real_list(e)?), None)?,
                (None, Some(p)) => SweepConfig::new(ns, None, Some(parse_real_list(p)?))?,
                (None, None) => SweepConfig::new(ns, None, Some(vec![0.1, 0.3, 0.5, 0.7]))?,
            };
            let rows = run_sweep(&cfg)?;
            let text = match format {
                Format::Csv => to_csv(&rows),
                Format::Json => to_json(&rows)?,
                Format::Svg => to_svg(&rows, PlotAxis::N)?,
            };
            emit(out, &text)?;
            Ok(true)
        }
        Command::Verify { suite } => {
            expect_format(cli.format, &[Format::Json], Format::Json, "verify")?;
            let suites: Vec<Suite> = if suite == "all" { SUITES.to_vec() } else { vec![suite.parse()?] };
            let seed = cli.seed.unwrap_or(0);
            let reports = suites.into_iter().map(|s| run_suite(s, seed)).collect::<Result<Vec<_>>>()?;
            for r in &reports {
                eprintln!("{}: {}", r.suite, if r.passed { "pass" } else { "FAIL" });
            }
            let passed = reports.iter().all(|r| r.passed);
            let text = if reports.len() == 1 { to_json(&reports[0])? } else { to_json(&reports)? };
            emit(out, &text)?;
            Ok(passed)
        }
        Command::Plot { csv, x } => {
            expect_format(cli.format, &[Format::Svg], Format::Svg, "plot")?;
            let rows = parse_csv(&std::fs::read_to_string(csv)?)?;
            let axis = match x {
                XAxis::N => PlotAxis::N,
                XAxis::Polarization => PlotAxis::Polarization,
            };
            emit(out, &to_svg(&rows, axis)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
