use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermoconvex_cli::config::{Format, RawConfig, RunConfig};
use thermoconvex_cli::error::{CliError, EXIT_PASS, EXIT_VIOLATION};
use thermoconvex_cli::eval::{self, Output, Quantity};
use thermoconvex_cli::{list, run_check};

/// Environment variable read when `--threads` is absent.
const THREADS_ENV: &str = "THERMOCONVEX_THREADS";

#[derive(Parser)]
#[command(name = "thermoconvex", version, about = "Certify convexity and stability of thermodynamic potentials")]
struct Cli {
    /// Worker threads for probe evaluation.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Report format for `check`; `json` also switches `eval` and `list` output.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured check suites and write reports.
    Check {
        #[arg(long, value_name = "PATH", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Use a named preset instead of a config file.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Evaluate a named field at one point.
    Eval {
        /// Quantity name; see `list`.
        quantity: String,
        /// EOS as `family:key=value,...`.
        #[arg(long, conflicts_with_all = ["config", "preset"])]
        eos: Option<String>,
        #[arg(long, value_name = "PATH", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Space dimension for the density fields.
        #[arg(long)]
        dim: Option<usize>,
        /// Point as `k=v,...` or comma-separated values.
        #[arg(long, conflicts_with = "state", required_unless_present = "state")]
        at: Option<String>,
        /// A named state from the config or preset.
        #[arg(long)]
        state: Option<String>,
        /// value, gradient, hessian, hessian-eigenvalues or all.
        #[arg(long, default_value = "value")]
        what: String,
    },
    /// Print the catalog of EOS families, chains, suites and presets.
    List,
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={s:?} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load(config: Option<&Path>, preset: Option<&str>) -> Result<RunConfig, CliError> {
    match (config, preset) {
        (Some(p), _) => RunConfig::load(p),
        (None, Some(name)) => RawConfig {
            preset: Some(name.to_string()),
            ..Default::default()
        }
        .resolve(),
        (None, None) => Err(CliError::Usage("either --config or --preset is required".into())),
    }
}

fn check(cfg: RunConfig, out: Option<PathBuf>, format: Option<Format>) -> Result<i32, CliError> {
    let format = format.or(cfg.output.format).unwrap_or_default();
    let dir = out
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("thermoconvex-report"));
    let report = run_check(&cfg)?;
    std::fs::create_dir_all(&dir)?;
    if format.json() {
        std::fs::write(dir.join("report.json"), report.to_json())?;
    }
    if format.csv() {
        std::fs::write(dir.join("margins.csv"), report.to_csv())?;
    }
    std::fs::write(dir.join("timings.json"), report.timings_json())?;
    print!("{}", report.summary());
    println!("reports in {}", dir.display());
    Ok(if report.verdict.passed { EXIT_PASS } else { EXIT_VIOLATION })
}

#[allow(clippy::too_many_arguments)]
fn eval_cmd(
    quantity: &str,
    eos: Option<&str>,
    config: Option<&Path>,
    preset: Option<&str>,
    dim: Option<usize>,
    at: Option<&str>,
    state: Option<&str>,
    what: &str,
    json: bool,
) -> Result<i32, CliError> {
    let q = Quantity::from_name(quantity).ok_or_else(|| CliError::Usage(format!("unknown quantity {quantity:?}")))?;
    let output = Output::from_name(what).ok_or_else(|| CliError::Usage(format!("unknown output {what:?}")))?;
    let cfg = match eos {
        Some(_) => None,
        None => Some(load(config, preset)?),
    };
    let eos_cfg = match (eos, &cfg) {
        (Some(spec), _) => eval::parse_eos(spec)?,
        (None, Some(c)) => c.eos.clone(),
        (None, None) => unreachable!("config loaded above"),
    };
    let d = dim.or(cfg.as_ref().map(|c| c.dimension)).unwrap_or(3);
    if !(1..=3).contains(&d) {
        return Err(CliError::Usage(format!("dimension {d} must be 1, 2 or 3")));
    }
    let model = eos_cfg.build().map_err(|e| CliError::Usage(format!("eos: {e}")))?;
    let point = match (at, state) {
        (Some(at), _) => eval::parse_point(at, &q.variables(d))?,
        (None, Some(name)) => {
            let s = cfg
                .as_ref()
                .and_then(|c| c.state(name))
                .ok_or_else(|| CliError::Usage(format!("no named state {name:?}")))?;
            if s.velocity.len() != d {
                return Err(CliError::Usage(format!("state {name:?} has dimension {}", s.velocity.len())));
            }
            eval::state_point(model.as_ref(), q, s)?
        }
        (None, None) => return Err(CliError::Usage("either --at or --state is required".into())),
    };
    let r = eval::evaluate(&model, q, quantity, d, &point)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&r).expect("result serializes"));
    } else {
        print!("{}", r.render(output));
    }
    Ok(EXIT_PASS)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads(cli.threads)?;
    let json = cli.format == Some(Format::Json);
    match cli.command {
        Command::Check { config, preset, out } => check(load(config.as_deref(), preset.as_deref())?, out, cli.format),
        Command::Eval {
            quantity,
            eos,
            config,
            preset,
            dim,
            at,
            state,
            what,
        } => eval_cmd(
            &quantity,
            eos.as_deref(),
            config.as_deref(),
            preset.as_deref(),
            dim,
            at.as_deref(),
            state.as_deref(),
            &what,
            json,
        ),
        Command::List => {
            let c = list::catalog();
            if json {
                println!("{}", serde_json::to_string_pretty(&c).expect("catalog serializes"));
            } else {
                print!("{}", c.render());
            }
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
