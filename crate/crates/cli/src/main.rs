use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lqp_core::criteria::regimes::Family;
use lqp_core::criteria::Flavor;
use lqp_core::lab::runs::{LabCheck, LabSettings};
use lqp_core::rational::{self, Rational};
use lqp_core::report::{self, AnalysisConfig, Report, TableSweep};

/// Variable read for the worker-pool size.
const THREADS_ENV: &str = "LQP_THREADS";

#[derive(Parser)]
#[command(name = "lqp", version, about = "Vanishing criteria for reduced L_{q,p}-cohomology of twisted cylinders")]
struct Cli {
    /// Print every numeric default as TOML and exit.
    #[arg(long)]
    show_defaults: bool,

    /// Write the JSON report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide every query of a TOML config.
    Analyze { config: PathBuf },
    /// Reproduce the vanishing table of a warping family.
    Table(TableArgs),
    /// Run a numerical check on the discrete cylinder.
    Lab(LabArgs),
    /// Built-in geometries.
    Presets {
        #[command(subcommand)]
        preset: PresetCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exp,
    Power,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FlavorArg {
    Absolute,
    Relative,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckTarget {
    Golden,
}

#[derive(Args)]
struct TableArgs {
    family: FamilyArg,
    /// Cross-section dimensions.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5, 6])]
    ns: Vec<u32>,
    /// Exponents p, as integers, fractions or decimals.
    #[arg(long = "p", value_delimiter = ',', value_parser = parse_rational)]
    ps: Vec<Rational>,
    /// Rates; every pair s1 <= s2 from this list is swept.
    #[arg(long = "s", value_delimiter = ',', value_parser = parse_rational)]
    rates: Vec<Rational>,
    #[arg(long = "flavor", value_delimiter = ',')]
    flavors: Vec<FlavorArg>,
    /// Compare the table with the shipped golden file.
    #[arg(long)]
    check: Option<CheckTarget>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Homotopy,
    Ineq,
    Norms,
    Ddzero,
    All,
}

#[derive(Args)]
struct LabArgs {
    check: CheckArg,
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lab settings from the `[lab]` table of a config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PresetCommand {
    /// Cartan–Hadamard manifold of dimension m, sectional curvature <= -1.
    CartanHadamard {
        #[arg(long)]
        m: u32,
        #[arg(long, value_parser = parse_rational)]
        p: Rational,
        #[arg(long, value_parser = parse_rational)]
        q: Rational,
    },
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn sweep(args: &TableArgs) -> TableSweep {
    let defaults = TableSweep::default();
    let mut rates = if args.rates.is_empty() { defaults.rates } else { args.rates.clone() };
    rates.sort();
    rates.dedup();
    TableSweep {
        ns: args.ns.clone(),
        ps: if args.ps.is_empty() { defaults.ps } else { args.ps.clone() },
        rates,
        flavors: if args.flavors.is_empty() {
            defaults.flavors
        } else {
            args.flavors
                .iter()
                .map(|f| match f {
                    FlavorArg::Absolute => Flavor::Absolute,
                    FlavorArg::Relative => Flavor::RelativeToBase,
                })
                .collect()
        },
    }
}

fn lab(args: &LabArgs) -> Result<Report> {
    let mut settings = match &args.config {
        Some(path) => AnalysisConfig::load(path).with_context(|| format!("reading {}", path.display()))?.lab,
        None => LabSettings::default(),
    };
    if let Some(g) = &args.grids {
        settings.grids = g.clone();
    }
    if args.count.is_some() {
        settings.count = args.count;
    }
    if let Some(s) = args.seed {
        settings.seed = s;
    }
    let checks: Vec<LabCheck> = match args.check {
        CheckArg::Homotopy => vec![LabCheck::Homotopy],
        CheckArg::Ineq => vec![LabCheck::Ineq],
        CheckArg::Norms => vec![LabCheck::Norms],
        CheckArg::Ddzero => vec![LabCheck::Ddzero],
        CheckArg::All => LabCheck::ALL.to_vec(),
    };
    Ok(report::run_lab(&checks, &settings)?)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV} must be a thread count, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn write(report: &Report, path: Option<&Path>) -> Result<()> {
    let json = report.to_json();
    match path {
        Some(p) => std::fs::write(p, json).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    if cli.show_defaults {
        print!("{}", report::defaults_toml());
        return Ok(0);
    }
    let Some(command) = cli.command else {
        anyhow::bail!("no subcommand given; see --help");
    };
    configure_threads()?;
    let mut output = cli.output;
    let report = match command {
        Command::Analyze { config } => {
            let cfg = AnalysisConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            if output.is_none() {
                output = cfg.output.path.clone();
            }
            report::run_analyze(&cfg)?
        }
        Command::Table(args) => {
            let family = match args.family {
                FamilyArg::Exp => Family::Exp,
                FamilyArg::Power => Family::Power,
            };
            report::run_table(family, &sweep(&args), args.check.is_some())?
        }
        Command::Lab(args) => lab(&args)?,
        Command::Presets { preset: PresetCommand::CartanHadamard { m, p, q } } => report::run_preset(m, p, q),
    };
    write(&report, output.as_deref())?;
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
