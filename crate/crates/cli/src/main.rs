mod commands;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ftqc", version, about = "Fault-tolerant quantum computation experiments")]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps and Monte Carlo (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (default: $FTQC_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report file stem (default: the subcommand path joined by '-').
    #[arg(long, global = true)]
    name: Option<String>,
    /// Print the report and CSV schemas and exit.
    #[arg(long)]
    help_schema: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Build or check a quantum code.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Verify or measure a fault-tolerant gadget.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// Compile a circuit to r levels of concatenation.
    Compile(CompileArgs),
    /// Threshold formulas and Monte Carlo sparseness.
    #[command(subcommand)]
    Threshold(ThresholdCmd),
    /// Route a circuit onto a line of qupits.
    Route(RouteArgs),
    /// Eigenvalue check behind the universality argument.
    Univcheck(UnivArgs),
    /// Replay the argv recorded in a report.
    Rerun {
        report: PathBuf,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CodeCmd {
    /// Write the code descriptor and its parameters.
    Build(CodeArgs),
    /// Check the code invariants and single-error correction.
    Check(CodeArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GadgetCmd {
    /// Noiseless logical correctness on every basis input.
    Verify(GadgetArgs),
    /// Exhaustive single-fault spread measurement.
    Spread(SpreadArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ThresholdCmd {
    Analytic(AnalyticArgs),
    Mc(McArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKindArg {
    Steane,
    Poly,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct CodeArgs {
    /// Code family.
    #[arg(long, visible_alias = "code", value_enum, default_value_t = CodeKindArg::Steane)]
    pub kind: CodeKindArg,
    /// Field size for polynomial codes.
    #[arg(long, default_value_t = 5)]
    pub p: u32,
    /// Degree for polynomial codes.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Load a code descriptor instead.
    #[arg(long)]
    pub code_file: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GadgetArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// cnot, h, not, phase, cphase, gcnot, gnot:C, mul:C, prot:C, fourier, toffoli, ec.
    #[arg(long)]
    pub gadget: String,
}

#[derive(Args, Debug, Serialize)]
pub struct SpreadArgs {
    #[command(flatten)]
    pub gadget: GadgetArgs,
    /// Run error correction on the code inputs first.
    #[arg(long)]
    pub preceding_ec: bool,
    /// Also measure the gadget routed on a line.
    #[arg(long)]
    pub routed: bool,
    /// Largest affected set searched for.
    #[arg(long, default_value_t = 4)]
    pub max_affected: usize,
    /// Fail (exit 1) when the spread exceeds this.
    #[arg(long)]
    pub max_l: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EcArg {
    Gadget,
    Ideal,
    Off,
}

#[derive(Args, Debug, Serialize)]
pub struct CompileArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Circuit text file.
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = EcArg::Gadget)]
    pub ec: EcArg,
    /// Omit the encoding and decoding stages.
    #[arg(long)]
    pub no_boundary: bool,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_locations: usize,
    /// Propagate every sparse fault path through the working periods (r = 1, ideal EC).
    #[arg(long)]
    pub verify_propagation: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyticArgs {
    /// Locations per rectangle.
    #[arg(long = "A")]
    pub a: u64,
    /// Faults tolerated per rectangle.
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    /// Physical rate for delta and the sparse bound.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Starting rate of the effective-rate recursion (default: eta).
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    Iid,
    Burst,
}

#[derive(Args, Debug, Serialize)]
pub struct McArgs {
    #[arg(long = "A")]
    pub a: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Iid)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 2.0)]
    pub mean_burst: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct RouteArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Slot at each line position, comma separated (default: identity).
    #[arg(long, value_delimiter = ',')]
    pub layout: Option<Vec<usize>>,
    /// Check equivalence on random inputs (at most 12 qupits).
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct UnivArgs {
    #[arg(long, default_value_t = 5)]
    pub p: u32,
    #[arg(long, default_value_t = 0)]
    pub i: u32,
    #[arg(long, default_value_t = 1000)]
    pub n_max: u32,
}

impl Cmd {
    fn path(&self) -> &'static str {
        match self {
            Cmd::Code(CodeCmd::Build(_)) => "code build",
            Cmd::Code(CodeCmd::Check(_)) => "code check",
            Cmd::Gadget(GadgetCmd::Verify(_)) => "gadget verify",
            Cmd::Gadget(GadgetCmd::Spread(_)) => "gadget spread",
            Cmd::Compile(_) => "compile",
            Cmd::Threshold(ThresholdCmd::Analytic(_)) => "threshold analytic",
            Cmd::Threshold(ThresholdCmd::Mc(_)) => "threshold mc",
            Cmd::Route(_) => "route",
            Cmd::Univcheck(_) => "univcheck",
            Cmd::Rerun { .. } => "rerun",
        }
    }
}

fn run(argv: Vec<String>, depth: usize) -> ExitCode {
    let cli = match Cli::try_parse_from(std::iter::once("ftqc".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.help_schema {
        print!("{}", report::SCHEMA_HELP);
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.cmd else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    if let Cmd::Rerun { report } = &cmd {
        if depth > 0 {
            eprintln!("error: a report cannot replay another rerun");
            return ExitCode::from(2);
        }
        return match commands::argv_of(report) {
            Ok(mut a) => {
                if let Some(o) = &cli.out {
                    a.extend(["--out".to_string(), o.display().to_string()]);
                }
                if let Some(n) = &cli.name {
                    a.extend(["--name".to_string(), n.clone()]);
                }
                run(a, depth + 1)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        };
    }
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("warning: --jobs ignored: {e}");
        }
    }
    let dir = cli.out.clone().or_else(|| std::env::var_os("FTQC_OUT_DIR").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let path = cmd.path();
    let stem = cli.name.clone().unwrap_or_else(|| path.replace(' ', "-"));
    let config = serde_json::to_value(&cmd).expect("config serializes");
    let start = std::time::Instant::now();
    let outcome = match commands::execute(&cmd, cli.seed, &dir, &stem) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match report::emit(&dir, &stem, path, &argv, &config, cli.seed, &outcome, ms) {
        Ok((text, _)) => {
            use std::io::Write;
            // A closed stdout (e.g. piped into head) does not affect the files written.
            let _ = writeln!(std::io::stdout(), "{text}");
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("check failed; see the report");
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    run(std::env::args().skip(1).collect(), 0)
}
