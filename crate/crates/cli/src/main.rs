//! Command line planner and experiment harness. Data goes to stdout (or
//! `--out`), diagnostics to stderr.
//!
//! Exit codes: 0 solved/valid, 1 usage or I/O errors, 2 infeasible or
//! rule violations, 3 search budget exhausted.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rwca_core::{
    builtin_cost239, encode_rwa, encode_rwca, export_lp, generate_star_instance,
    solve_exact, solve_heuristic, validate, Coupling, GeneratorSpec, Instance, Mode, NodeId,
    SolutionDoc, SolveConfig, Status, Topology,
};

mod sweep;

const TOPOLOGY_DIR_ENV: &str = "RWCA_TOPOLOGY_DIR";

#[derive(Parser)]
#[command(
    name = "rwca",
    version,
    about = "Wavelength planning for optical networks, with and without in-network computing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Provision a demand file and report the resulting lightpaths.
    Solve(SolveArgs),
    /// Generate a star demand file: random source pairs toward one destination.
    Generate(GenerateArgs),
    /// Solve every destination in both modes and emit a CSV comparison.
    BenchSweep(SweepArgs),
    /// Export the MILP encoding in LP text format for an external solver.
    ExportLp(ExportArgs),
    /// Check a solution document against every provisioning rule.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bypass,
    Occin,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bypass => Mode::Bypass,
            ModeArg::Occin => Mode::Occin,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CouplingArg {
    /// All segments of a computing demand share one wavelength.
    Demand,
    /// Each segment chooses its wavelength independently.
    Segment,
}

impl From<CouplingArg> for Coupling {
    fn from(c: CouplingArg) -> Coupling {
        match c {
            CouplingArg::Demand => Coupling::PerDemand,
            CouplingArg::Segment => Coupling::PerSegment,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum SolverArg {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    /// Topology file path or builtin:cost239.
    #[arg(long)]
    topology: String,
    /// Demand file path.
    #[arg(long)]
    demands: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "exact")]
    solver: SolverArg,
    #[arg(long, value_enum, default_value = "demand")]
    coupling: CouplingArg,
    /// Override the wavelength budget of the demand file.
    #[arg(long)]
    max_wavelengths: Option<usize>,
    /// Sequential search and zeroed wall times: byte-identical reruns.
    #[arg(long)]
    deterministic: bool,
    /// Abort the exact search after this many nodes (0 = unlimited).
    #[arg(long, default_value_t = 0)]
    node_limit: u64,
    /// Abort the exact search after this many seconds (0 = unlimited).
    #[arg(long, default_value_t = 0.0)]
    time_limit: f64,
    #[arg(long, value_enum, default_value = "json")]
    output: OutputArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "builtin:cost239")]
    topology: String,
    /// Destination node, 1-based.
    #[arg(long)]
    dest: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "builtin:cost239")]
    topology: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "demand")]
    coupling: CouplingArg,
    #[arg(long, value_enum, default_value = "exact")]
    solver: SolverArg,
    /// fresh derives an independent seed per destination; fixed reuses the
    /// base seed everywhere.
    #[arg(long, value_enum, default_value = "fresh")]
    pairing: PairingArg,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum PairingArg {
    Fresh,
    Fixed,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    topology: String,
    #[arg(long)]
    demands: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "demand")]
    coupling: CouplingArg,
    #[arg(long)]
    max_wavelengths: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    topology: String,
    #[arg(long)]
    demands: PathBuf,
    /// Solution document (JSON) to check.
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "demand")]
    coupling: CouplingArg,
    #[arg(long)]
    max_wavelengths: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the error path too
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args),
        Command::BenchSweep(args) => cmd_bench_sweep(args),
        Command::ExportLp(args) => cmd_export_lp(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

/// Resolves `builtin:cost239`, a literal path, or a name under
/// `$RWCA_TOPOLOGY_DIR`.
fn load_topology(spec: &str) -> Result<Topology> {
    if let Some(builtin) = spec.strip_prefix("builtin:") {
        return match builtin {
            "cost239" => Ok(builtin_cost239()),
            other => bail!("unknown builtin topology {other:?}"),
        };
    }
    let direct = Path::new(spec);
    let path = if direct.exists() {
        direct.to_path_buf()
    } else if let Ok(dir) = std::env::var(TOPOLOGY_DIR_ENV) {
        let candidate = Path::new(&dir).join(spec);
        if candidate.exists() {
            candidate
        } else {
            direct.to_path_buf()
        }
    } else {
        direct.to_path_buf()
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading topology {}", path.display()))?;
    Topology::parse(&text).with_context(|| format!("parsing topology {}", path.display()))
}

fn load_instance(topology: &Topology, demands: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(demands)
        .with_context(|| format!("reading demands {}", demands.display()))?;
    Instance::parse(&text, topology)
        .with_context(|| format!("parsing demands {}", demands.display()))
}

fn emit(out: &Option<PathBuf>, data: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, data)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn build_config(
    mode: ModeArg,
    coupling: CouplingArg,
    max_wavelengths: Option<usize>,
    deterministic: bool,
    node_limit: u64,
    time_limit: f64,
) -> Result<SolveConfig> {
    if max_wavelengths == Some(0) {
        bail!("--max-wavelengths must be at least 1");
    }
    let mut cfg = SolveConfig::new(mode.into()).with_coupling(coupling.into());
    cfg.max_wavelengths = max_wavelengths;
    cfg.deterministic = deterministic;
    cfg.node_limit = node_limit;
    cfg.time_limit = time_limit;
    Ok(cfg)
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let topology = load_topology(&args.topology)?;
    let instance = load_instance(&topology, &args.demands)?;
    let cfg = build_config(
        args.mode,
        args.coupling,
        args.max_wavelengths,
        args.deterministic,
        args.node_limit,
        args.time_limit,
    )?;
    let solution = match args.solver {
        SolverArg::Exact => solve_exact(&instance, &cfg),
        SolverArg::Heuristic => solve_heuristic(&instance, &cfg),
    };
    let doc = solution.to_doc(&instance, &cfg);
    let rendered = match args.output {
        OutputArg::Json => doc.to_json(),
        OutputArg::Csv => solution_csv(&doc),
    };
    emit(&args.out, &rendered)?;
    Ok(match solution.status {
        Status::Optimal | Status::Feasible => 0,
        Status::Infeasible => 2,
        Status::LimitReached => 3,
    })
}

fn solution_csv(doc: &SolutionDoc) -> String {
    let mut out = String::from(
        "kind,index,computing_node,segment,route,lambda,status,wavelength_count,\
         wavelength_link_units\n",
    );
    let status = format!("{:?}", doc.status).to_lowercase();
    for served in &doc.assignments {
        for (si, lp) in served.segments.iter().enumerate() {
            let route = lp
                .route
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join("-");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                served.demand.kind,
                served.demand.index,
                served.computing_node.map(|v| v.to_string()).unwrap_or_default(),
                si,
                route,
                lp.lambda,
                status,
                doc.metrics.wavelength_count,
                doc.metrics.wavelength_link_units,
            ));
        }
    }
    out
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let topology = load_topology(&args.topology)?;
    if args.dest == 0 || args.dest > topology.node_count() {
        bail!(
            "destination {} out of range 1..={}",
            args.dest,
            topology.node_count()
        );
    }
    let spec = GeneratorSpec { destination: NodeId(args.dest - 1), seed: args.seed };
    let instance = generate_star_instance(&topology, &spec)?;
    let mut text = format!(
        "# generated: topology={} dest={} seed={}\n",
        topology.name(),
        args.dest,
        args.seed
    );
    text.push_str(&instance.serialize());
    emit(&args.out, &text)?;
    Ok(0)
}

fn cmd_bench_sweep(args: SweepArgs) -> Result<u8> {
    let topology = load_topology(&args.topology)?;
    let report = sweep::run(
        &topology,
        args.seed,
        args.coupling.into(),
        args.solver,
        args.pairing,
        args.deterministic,
    )?;
    emit(&args.out, &report)?;
    Ok(0)
}

fn cmd_export_lp(args: ExportArgs) -> Result<u8> {
    let topology = load_topology(&args.topology)?;
    let instance = load_instance(&topology, &args.demands)?;
    if args.max_wavelengths == Some(0) {
        bail!("--max-wavelengths must be at least 1");
    }
    let budget = args.max_wavelengths.unwrap_or(instance.max_wavelengths);
    let model = match Mode::from(args.mode) {
        Mode::Bypass => encode_rwa(&instance.decomposed(), budget)?,
        Mode::Occin => encode_rwca(&instance, budget, args.coupling.into())?,
    };
    emit(&args.out, &export_lp(&model))?;
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<u8> {
    let topology = load_topology(&args.topology)?;
    let instance = load_instance(&topology, &args.demands)?;
    let cfg = build_config(args.mode, args.coupling, args.max_wavelengths, false, 0, 0.0)?;
    let text = std::fs::read_to_string(&args.solution)
        .with_context(|| format!("reading solution {}", args.solution.display()))?;
    let doc = SolutionDoc::from_json(&text)
        .with_context(|| format!("parsing solution {}", args.solution.display()))?;
    let report = validate(&doc, &instance, &cfg);
    let mut rendered =
        serde_json::to_string_pretty(&report).context("serializing report")?;
    rendered.push('\n');
    print!("{rendered}");
    Ok(if report.ok { 0 } else { 2 })
}
