use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use eigenop_core::dynamics::construct_supercyclic;
use eigenop_core::verify::{self, lemma};
use eigenop_core::{classify_op, orbit, Budget, EigenOp, LemmaReport, Seminorm};
use eigenop_lab::error::{exit, CliError, CliResult};
use eigenop_lab::output::{self, Format};
use eigenop_lab::{input, selftest};
use serde_json::json;

const BUDGET_ENV: &str = "EIGENOP_LAB_BUDGET";

/// Experiments with extended eigenoperators L = R_λ φ(D) of the
/// differentiation operator.
#[derive(Parser, Debug)]
#[command(name = "eigenop-lab", version)]
struct Cli {
    /// Print the output schema (JSON fields, CSV columns) and exit.
    #[arg(long, global = true)]
    schema: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct Common {
    /// Output file; stdout when omitted. A `<out>.meta.json` sidecar is
    /// written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
}

#[derive(Args, Debug)]
struct OpArg {
    /// Operator JSON file (or inline JSON): {"lambda": [re, im], "phi": {...}}.
    #[arg(long)]
    op: Option<String>,
}

impl OpArg {
    fn load(&self) -> CliResult<EigenOp> {
        let arg = self.op.as_deref().ok_or_else(|| CliError::Usage("--op is required".into()))?;
        input::op(arg)
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct VerifyParams {
    #[arg(long, default_value_t = 5)]
    n_max: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Radius M of ρ_M (iteracionpolinomio, modulo1_estimate).
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Iterate index n (infinf, modulo1_estimate).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Lowest vanishing order m of the samples (infinf); defaults to n·d + 1.
    #[arg(long)]
    m: Option<usize>,
    /// Largest monomial degree (modulo1_estimate).
    #[arg(long, default_value_t = 256)]
    s_max: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// HC / SC / HC∞ / SC∞ verdicts with citations.
    Classify {
        #[command(flatten)]
        op: OpArg,
        #[command(flatten)]
        common: Common,
    },
    /// Iterates L^n f with seminorm values and target distances.
    Orbit {
        #[command(flatten)]
        op: OpArg,
        /// Start vector: a series array or any JSON object with a `vector`.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        /// Comma-separated seminorms, e.g. `rho:1,sup_disk:2`.
        #[arg(long, default_value = "rho:1")]
        seminorm: String,
        /// JSON list of targets ({"id", "series"} objects or bare series).
        #[arg(long)]
        targets: Option<String>,
        /// Rescale each iterate toward the first target.
        #[arg(long)]
        projective: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Builds an approximate supercyclic vector for the given targets.
    Construct {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        targets: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value = "rho:1")]
        seminorm: String,
        #[command(flatten)]
        common: Common,
    },
    /// Numerical check of one estimate; exit 1 on any violation.
    Verify {
        /// iteracionpolinomio | infinf | supsup | modulo1_estimate
        lemma: Option<String>,
        #[command(flatten)]
        op: OpArg,
        #[command(flatten)]
        params: VerifyParams,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the invariant suite of every module.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Orbit { .. } => "orbit",
            Command::Construct { .. } => "construct",
            Command::Verify { .. } => "verify",
            Command::Selftest { .. } => "selftest",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Classify { common, .. }
            | Command::Orbit { common, .. }
            | Command::Construct { common, .. }
            | Command::Verify { common, .. }
            | Command::Selftest { common, .. } => common,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Verify { params, .. } => Some(params.seed),
            Command::Selftest { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Rendered output plus the exit status it implies.
struct Outcome {
    body: String,
    status: i32,
}

fn render<T: serde::Serialize>(
    format: Format,
    value: &T,
    csv: impl FnOnce(&T) -> CliResult<String>,
    status: i32,
) -> CliResult<Outcome> {
    let body = match format {
        Format::Json => output::json(value)?,
        Format::Csv => csv(value)?,
    };
    Ok(Outcome { body, status })
}

fn run_verify(name: &str, op: &OpArg, p: &VerifyParams) -> CliResult<LemmaReport> {
    let op = op.load()?;
    let VerifyParams { n_max, samples, seed, radius, n, m, s_max } = *p;
    let report = match name {
        lemma::ITERACIONPOLINOMIO => verify::verify_iteracionpolinomio(&op, radius, n_max, samples, seed)?,
        lemma::INFINF => {
            if !op.phi().is_polynomial() {
                return Err(eigenop_core::Error::Precondition("infinf needs a polynomial symbol".into()).into());
            }
            let d = op.degree();
            verify::verify_infinf(n, d, op.lambda(), samples, m.unwrap_or(n * d + 1), seed)?
        }
        lemma::SUPSUP => verify::verify_supsup(&op, n_max, samples, seed)?,
        lemma::MODULO1_ESTIMATE => verify::verify_modulo1_estimate(&op, radius, n, s_max)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown lemma `{other}`; expected one of {}",
                lemma::ALL.join(", ")
            )))
        }
    };
    Ok(report)
}

fn execute(command: &Command) -> CliResult<Outcome> {
    let format = command.common().format;
    match command {
        Command::Classify { op, .. } => {
            let k = classify_op(&op.load()?);
            render(format, &k, output::classify_csv, exit::OK)
        }
        Command::Orbit { op, start, n_max, seminorm, targets, projective, .. } => {
            let op = op.load()?;
            let start = input::start(start.as_deref().ok_or_else(|| CliError::Usage("--start is required".into()))?)?;
            let seminorms = input::seminorms(seminorm)?;
            let targets = targets.as_deref().map(input::targets).transpose()?.unwrap_or_default();
            if *projective && targets.is_empty() {
                return Err(CliError::Usage("--projective needs at least one target".into()));
            }
            let record = orbit(&op, &start, *n_max, &seminorms, &targets, *projective)?;
            render(format, &record, output::orbit_csv, exit::OK)
        }
        Command::Construct { op, targets, tol, seminorm, .. } => {
            let op = op.load()?;
            let targets = input::targets(targets.as_deref().ok_or_else(|| CliError::Usage("--targets is required".into()))?)?;
            let seminorm: Seminorm = input::seminorm(seminorm)?;
            let report = construct_supercyclic(&op, &targets, *tol, seminorm)?;
            render(format, &report, output::construct_csv, exit::OK)
        }
        Command::Verify { lemma, op, params, .. } => {
            let name = lemma.as_deref().ok_or_else(|| CliError::Usage("verify needs a lemma name".into()))?;
            let report = run_verify(name, op, params)?;
            let status = if report.passed() { exit::OK } else { exit::FAILED };
            render(format, &report, output::verify_csv, status)
        }
        Command::Selftest { seed, .. } => {
            let report = selftest::run(*seed);
            let status = if report.passed { exit::OK } else { exit::FAILED };
            render(format, &report, output::selftest_csv, status)
        }
    }
}

fn write_out(path: &Path, body: &str, meta: serde_json::Value) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("cannot write `{}`: {e}", path.display()));
    std::fs::write(path, body).map_err(io)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".meta.json");
    std::fs::write(&sidecar, output::json(&meta)?).map_err(io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string().trim_end().to_string())),
    };

    if let Ok(text) = std::env::var(BUDGET_ENV) {
        match Budget::parse(&text) {
            Ok(b) => {
                b.install();
            }
            Err(e) => return fail(&CliError::Usage(format!("{BUDGET_ENV}: {e}"))),
        }
    }

    let Some(command) = cli.command else {
        if cli.schema {
            print!("{}", output::json(&output::all_schemas()).expect("schema serializes"));
            return ExitCode::SUCCESS;
        }
        return fail(&CliError::Usage("a subcommand is required; see --help".into()));
    };

    if cli.schema {
        print!("{}", output::json(&output::schema(command.name())).expect("schema serializes"));
        return ExitCode::SUCCESS;
    }

    let outcome = match execute(&command) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };

    let common = command.common();
    match &common.out {
        None => print!("{}", outcome.body),
        Some(path) => {
            let unix_time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let meta = json!({
                "command": command.name(),
                "format": common.format.name(),
                "seed": command.seed(),
                "version": env!("CARGO_PKG_VERSION"),
                "exit_code": outcome.status,
                "unix_time": unix_time,
            });
            if let Err(e) = write_out(path, &outcome.body, meta) {
                return fail(&e);
            }
        }
    }
    ExitCode::from(outcome.status as u8)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.envelope());
    ExitCode::from(e.exit_code() as u8)
}
