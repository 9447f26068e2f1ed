//! Command-line front end for the discordlab demos and scenario files.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! breaks down numerically, 2 for usage, configuration and parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use discordlab_core::scenario_file::parse_scenario;
use discordlab_core::scenarios::{parse_tol_override, run_demo, run_scenario_file, DemoOutput, RunSettings, Tolerances, DEFAULT_SEED, DEMOS};
use discordlab_core::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "discordlab", version, about = "Quantum discord and Markovian classicality experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in demo (or `all`) or a scenario file.
    Run(RunArgs),
    /// List the built-in demos.
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["demo", "scenario"])))]
pub struct RunArgs {
    /// Demo name, or `all` for the full suite.
    #[arg(long)]
    pub demo: Option<String>,
    /// Path to a scenario JSON document.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory; each run writes into its own subdirectory.
    #[arg(long, default_value = "discordlab-out")]
    pub out: PathBuf,
    #[arg(long, env = "DISCORDLAB_SEED")]
    pub seed: Option<u64>,
    /// Number of time points for time-series runs.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub grid: Option<u64>,
    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol_arg)]
    pub tol: Vec<(String, f64)>,
    /// Print verdicts as JSON instead of one line per check.
    #[arg(long)]
    pub json: bool,
    /// Show entropic values in bits on the summary lines; files stay in nats.
    #[arg(long, conflicts_with = "json")]
    pub bits: bool,
    /// Progress messages on stderr.
    #[arg(short, long)]
    pub verbose: bool,
}

fn parse_tol_arg(s: &str) -> Result<(String, f64), String> {
    parse_tol_override(s).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Core(Error::StepFailure { .. } | Error::ZeroProbability(_) | Error::NegativeEigenvalue(_)) => EXIT_FAIL,
            _ => EXIT_USAGE,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Parse `args` (program name first) and execute; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return EXIT_PASS;
        }
    };
    let result = match cli.command {
        Command::List { json } => list(json, out),
        Command::Run(args) => execute(&args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "discordlab: {e}");
            e.exit_code()
        }
    }
}

fn list(json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = if json {
        serde_json::to_string_pretty(&DEMOS).expect("demo table serializes") + "\n"
    } else {
        let width = DEMOS.iter().map(|d| d.name.len()).max().unwrap_or(0);
        DEMOS.iter().map(|d| format!("{:width$}  {}\n", d.name, d.summary)).collect()
    };
    out.write_all(text.as_bytes()).map_err(io_err("writing listing"))?;
    Ok(EXIT_PASS)
}

fn settings(args: &RunArgs, file_seed: Option<u64>) -> Result<RunSettings, CliError> {
    let (tolerances, overrides) = Tolerances::with_overrides(&args.tol)?;
    Ok(RunSettings {
        seed: args.seed.or(file_seed).unwrap_or(DEFAULT_SEED),
        tolerances,
        overrides,
        time_points: args.grid.map(|n| n as usize),
    })
}

fn write_outputs(dir: &Path, output: &DemoOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    let verdict = dir.join("verdict.json");
    fs::write(&verdict, output.result.to_json()).map_err(io_err(format!("writing {}", verdict.display())))?;
    for a in &output.attachments {
        let path = dir.join(&a.file_name);
        fs::write(&path, &a.contents).map_err(io_err(format!("writing {}", path.display())))?;
    }
    Ok(())
}

fn execute(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let mut outputs: Vec<(String, DemoOutput)> = Vec::new();
    if let Some(demo) = &args.demo {
        let names: Vec<&str> = if demo == "all" {
            DEMOS.iter().map(|d| d.name).collect()
        } else if DEMOS.iter().any(|d| d.name == demo) {
            vec![demo.as_str()]
        } else {
            return Err(CliError::Config(format!(
                "unknown demo '{demo}' (known: all, {})",
                DEMOS.iter().map(|d| d.name).collect::<Vec<_>>().join(", ")
            )));
        };
        let settings = settings(args, None)?;
        for name in names {
            if args.verbose {
                let _ = writeln!(err, "running {name} (seed {})", settings.seed);
            }
            outputs.push((name.to_string(), run_demo(name, &settings)?));
        }
    } else if let Some(path) = &args.scenario {
        let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
        let file = parse_scenario(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let settings = settings(args, file.seed)?;
        if args.verbose {
            let _ = writeln!(err, "running {} from {} (seed {})", file.model(), path.display(), settings.seed);
        }
        let stem = path.file_stem().map_or_else(|| "scenario".to_string(), |s| s.to_string_lossy().into_owned());
        outputs.push((stem, run_scenario_file(&file, &settings)?));
    }

    for (dir, output) in &outputs {
        write_outputs(&args.out.join(dir), output)?;
    }
    let passed = outputs.iter().all(|(_, o)| o.result.passed);
    let report = if args.json {
        let results: Vec<_> = outputs.iter().map(|(_, o)| &o.result).collect();
        serde_json::to_string_pretty(&results).expect("results serialize") + "\n"
    } else {
        let mut text = String::new();
        for (_, o) in &outputs {
            for line in o.result.summary_lines_in(args.bits) {
                text.push_str(&line);
                text.push('\n');
            }
        }
        let total: usize = outputs.iter().map(|(_, o)| o.result.checks.len()).sum();
        let ok: usize = outputs.iter().map(|(_, o)| o.result.checks.iter().filter(|c| c.passed).count()).sum();
        text.push_str(&format!("{ok}/{total} checks passed\n"));
        text
    };
    out.write_all(report.as_bytes()).map_err(io_err("writing report"))?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}
