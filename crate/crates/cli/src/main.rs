use clap::{Args, Parser, Subcommand, ValueEnum};
use exindep::coefficients::audit;
use exindep::experiments::report::{emit_audit, emit_experiment, num, to_json, write_csv};
use exindep::experiments::{bound_audit_run, run_max_experiment, ExperimentConfig, ExperimentKind, Reference, SystemGenSpec, XGrid};
use exindep::gaussian::GaussianConfig;
use exindep::gumbel::{clique_constants, common_neighbour_constants, norm_constants, NormConstants};
use exindep::prob::SystemDocument;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "exindep", version, about = "Bound audits and extremal-independence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit every bound on a corpus of random event systems.
    AuditBounds {
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON generator spec; the mixed default corpus when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Directory for audit.csv and audit_summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit one event system given as a JSON document.
    AuditSystem {
        file: PathBuf,
    },
    /// Monte Carlo maxima of a random-structure statistic.
    Simulate(SimulateArgs),
    /// Print normalizing constants as CSV.
    GumbelConsts(ConstsArgs),
    /// Gaussian-vector diagnostics and simulation.
    Gaussian {
        #[command(subcommand)]
        command: GaussianCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    GraphMaxdeg,
    HypergraphMaxdeg,
    HypergraphCodegree,
    CliqueExt,
    CommonNeighbours,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::GraphMaxdeg => ExperimentKind::GraphMaxdeg,
            Kind::HypergraphMaxdeg => ExperimentKind::HypergraphMaxdeg,
            Kind::HypergraphCodegree => ExperimentKind::HypergraphCodegree,
            Kind::CliqueExt => ExperimentKind::CliqueExt,
            Kind::CommonNeighbours => ExperimentKind::CommonNeighbours,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RefArg {
    Indep,
    Gumbel,
}

#[derive(Args)]
struct SimulateArgs {
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    s: usize,
    #[arg(long, default_value_t = 2)]
    h: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "ref", value_enum, default_value_t = RefArg::Indep)]
    reference: RefArg,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    grid_start: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    grid_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    /// Cap on set inspections per trial.
    #[arg(long)]
    budget: Option<u64>,
    /// Directory for trials.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstsFamily {
    Binomial,
    Clique,
    CommonNeighbour,
}

#[derive(Args)]
struct ConstsArgs {
    #[arg(long, value_enum, default_value_t = ConstsFamily::Binomial)]
    family: ConstsFamily,
    /// Number of variables (binomial family).
    #[arg(long)]
    d: Option<u64>,
    /// Binomial trial count (binomial family).
    #[arg(long = "big-n", visible_alias = "N")]
    big_n: Option<u64>,
    /// Vertex count (clique and common-neighbour families).
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 3)]
    k: u64,
    #[arg(long, default_value_t = 2)]
    h: u64,
}

#[derive(Subcommand)]
enum GaussianCommand {
    /// Condition diagnostics as a one-row CSV.
    CheckConditions {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical and independent-copy CDF of the maximum as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn read(path: &Path) -> Result<String, Box<dyn std::error::Error>> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

/// Writes to `out` when given, else to stdout.
fn emit(out: Option<&Path>, body: &[u8]) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, body)?
        }
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn audit_bounds(count: u64, seed: u64, spec: Option<&Path>, out: Option<&Path>) -> CliResult {
    let spec = match spec {
        Some(p) => serde_json::from_str(&read(p)?)?,
        None => SystemGenSpec::default(),
    };
    let summary = bound_audit_run(&spec, count, seed)?;
    if let Some(dir) = out {
        emit_audit(&summary, dir)?;
    }
    print!("{}", to_json(&summary)?);
    if summary.violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} systems violate a required bound", summary.violations.len());
        Ok(ExitCode::from(2))
    }
}

fn audit_system(file: &Path) -> CliResult {
    let (system, dep) = SystemDocument::from_json(&read(file)?)?.build()?;
    let a = audit(&system, &dep)?;
    print!("{}", to_json(&a)?);
    Ok(if a.all_required_pass() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn simulate(a: &SimulateArgs) -> CliResult {
    let mut cfg = ExperimentConfig::new(a.kind.into(), a.n, a.p, a.trials, a.seed);
    cfg.k = a.k;
    cfg.s = a.s;
    cfg.h = a.h;
    cfg.budget = a.budget;
    cfg.reference = match a.reference {
        RefArg::Indep => Reference::Indep,
        RefArg::Gumbel => Reference::Gumbel,
    };
    cfg.grid = XGrid {
        start: a.grid_start,
        stop: a.grid_stop,
        step: a.grid_step,
    };
    let r = run_max_experiment(&cfg)?;
    if let Some(dir) = &a.out {
        emit_experiment(&r, dir)?;
    }
    print!("{}", to_json(&r)?);
    Ok(ExitCode::SUCCESS)
}

fn gumbel_consts(a: &ConstsArgs) -> CliResult {
    let need = |v: Option<u64>, flag: &str| v.ok_or_else(|| format!("--{flag} is required for this family"));
    let (c, k, h): (NormConstants, String, String) = match a.family {
        ConstsFamily::Binomial => (norm_constants(need(a.d, "d")?, need(a.big_n, "big-n")?, a.p)?, String::new(), String::new()),
        ConstsFamily::Clique => (clique_constants(need(a.n, "n")?, a.p, a.k)?, a.k.to_string(), String::new()),
        ConstsFamily::CommonNeighbour => {
            (common_neighbour_constants(need(a.n, "n")?, a.p, a.h)?, String::new(), a.h.to_string())
        }
    };
    let row = vec![c.family.name().to_string(), num(c.d), c.n_trials.to_string(), num(a.p), k, h, num(c.a), num(c.b)];
    let mut buf = Vec::new();
    write_csv(&mut buf, &["family", "d", "N", "p", "k", "h", "a", "b"], std::iter::once(row))?;
    std::io::stdout().write_all(&buf)?;
    Ok(ExitCode::SUCCESS)
}

fn gaussian(cmd: &GaussianCommand) -> CliResult {
    let mut buf = Vec::new();
    let out = match cmd {
        GaussianCommand::CheckConditions { config, out } => {
            let r = GaussianConfig::from_json(&read(config)?)?.check()?;
            let header = ["g1", "g2", "g3", "g3_sufficient", "g4", "rho", "eps", "raised"];
            let row = vec![
                num(r.g1),
                num(r.g2),
                num(r.g3),
                num(r.g3_sufficient),
                num(r.g4),
                num(r.rho),
                num(r.eps),
                r.raised().join(";"),
            ];
            write_csv(&mut buf, &header, std::iter::once(row))?;
            out
        }
        GaussianCommand::Simulate { config, out } => {
            let points = GaussianConfig::from_json(&read(config)?)?.simulate()?;
            let rows = points.iter().map(|p| vec![num(p.level), num(p.empirical), num(p.independent)]);
            write_csv(&mut buf, &["level", "empirical", "independent"], rows)?;
            out
        }
    };
    emit(out.as_deref(), &buf)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::AuditBounds { count, seed, spec, out } => audit_bounds(*count, *seed, spec.as_deref(), out.as_deref()),
        Command::AuditSystem { file } => audit_system(file),
        Command::Simulate(a) => simulate(a),
        Command::GumbelConsts(a) => gumbel_consts(a),
        Command::Gaussian { command } => gaussian(command),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
