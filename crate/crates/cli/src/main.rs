//! `seqshare`: evaluate sequential-sharing scenarios, run the optimiser and
//! regenerate the result tables.

mod config;
mod error;
mod output;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use seqshare_core::bell::{builtin, lhv_bound_exact, Inequality};
use seqshare_core::optimize::{init_threads_from_env, max_bobs, sharing_margin, Execution};
use seqshare_core::robustness::{threshold, SettingsPolicy, ThresholdKind};
use seqshare_core::seqchain::{preset, value_vector};
use seqshare_core::states::StateSpec;

use config::RunConfig;
use error::CliError;
use record::{BoundRow, MaxBobsRow, Payload, ReplayResult, RunRecord, Tables};

#[derive(Parser)]
#[command(
    name = "seqshare",
    version,
    about = "Sequential sharing of Bell nonlocality with unsharp measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(clap::Args)]
struct Flags {
    /// TOML file supplying any of the options below; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in functional name.
    #[arg(long, global = true)]
    inequality: Option<String>,
    /// Custom functional in TOML form (replaces --inequality).
    #[arg(long, global = true)]
    functional_file: Option<PathBuf>,
    /// singlet, schmidt:<alpha> or werner:<w>.
    #[arg(long, global = true)]
    state: Option<StateSpec>,
    #[arg(long, global = true)]
    bobs: Option<usize>,
    /// Largest Bob count tried by `maxbobs`.
    #[arg(long, global = true)]
    k_max: Option<usize>,
    /// RNG seed; drawn from entropy and printed when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Simplex objective-spread tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Threshold parameter for `robustness`.
    #[arg(long, global = true, value_parser = parse_kind)]
    kind: Option<ThresholdKind>,
    /// Settings policy for thresholds: free or singlet.
    #[arg(long, global = true, value_parser = parse_policy)]
    settings: Option<SettingsPolicy>,
    /// Run restarts on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    out: Format,
    /// Write output here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the classical bound of every built-in (and custom) functional.
    Bounds,
    /// Evaluate a stored scenario with published settings.
    Replay { preset: Option<String> },
    /// Evaluate the explicit scenario in the config file.
    Eval,
    /// Best simultaneous violation margin for a given number of Bobs.
    Share,
    /// Largest number of Bobs that can all violate.
    Maxbobs,
    /// Minimum concurrence or Werner weight for two-Bob sharing.
    Robustness,
    /// Regenerate the maximum-Bob and threshold tables.
    Tables,
    /// Re-execute a JSON run record and check the payload is reproduced.
    Rerun { record: PathBuf },
}

fn parse_kind(s: &str) -> Result<ThresholdKind, String> {
    s.parse().map_err(|e: seqshare_core::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<SettingsPolicy, String> {
    s.parse().map_err(|e: seqshare_core::Error| e.to_string())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Replay { .. } => "replay",
            Command::Eval => "eval",
            Command::Share => "share",
            Command::Maxbobs => "maxbobs",
            Command::Robustness => "robustness",
            Command::Tables => "tables",
            Command::Rerun { .. } => "rerun",
        }
    }
}

impl Flags {
    fn as_config(&self) -> RunConfig {
        RunConfig {
            inequality: self.inequality.clone(),
            functional_file: self.functional_file.clone(),
            state: self.state,
            bobs: self.bobs,
            k_max: self.k_max,
            seed: self.seed,
            restarts: self.restarts,
            tol: self.tol,
            max_iters: self.max_iters,
            execution: self.sequential.then_some(Execution::Sequential),
            kind: self.kind,
            settings: self.settings,
            ..Default::default()
        }
    }
}

fn fraction(q: Rational64) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn bounds(cfg: &RunConfig) -> Result<Payload, CliError> {
    let mut functionals: Vec<_> = Inequality::ALL.iter().map(|&i| builtin(i)).collect();
    if cfg.functional_file.is_some() {
        functionals.push(cfg.functional()?);
    }
    let mut rows = Vec::new();
    for f in functionals {
        let exact = lhv_bound_exact(&f)?;
        rows.push(BoundRow {
            functional: f.name.clone(),
            enumerated: fraction(exact),
            declared: fraction(f.classical_bound),
            ok: exact == f.classical_bound,
        });
    }
    Ok(Payload::Bounds(rows))
}

fn replay(cfg: &RunConfig) -> Result<Payload, CliError> {
    let name = cfg
        .preset
        .as_deref()
        .ok_or_else(|| CliError::Input("a preset name is required".into()))?;
    let p = preset(name)?;
    let values = value_vector(&p.scenario)?;
    let within_tolerance = values
        .values
        .iter()
        .zip(&p.expected)
        .map(|(v, e)| (v - e).abs() <= p.tolerance)
        .collect();
    Ok(Payload::Replay(ReplayResult {
        preset: p.name,
        values,
        expected: p.expected,
        tolerance: p.tolerance,
        within_tolerance,
    }))
}

fn robustness(cfg: &RunConfig) -> Result<Payload, CliError> {
    let kind = cfg
        .kind
        .ok_or_else(|| CliError::Input("--kind concurrence|werner is required".into()))?;
    let policy = cfg.settings.unwrap_or_default();
    Ok(Payload::Robustness(threshold(
        &cfg.functional()?,
        kind,
        policy,
        &cfg.optimizer(),
    )?))
}

fn tables(cfg: &RunConfig) -> Result<Payload, CliError> {
    let opt = cfg.optimizer();
    let k_max = cfg.k_max.unwrap_or(4);
    let mut rows = Vec::new();
    for which in Inequality::ALL {
        let result = max_bobs(StateSpec::Singlet, &builtin(which), &opt, k_max)?;
        eprintln!("{:7} max Bobs {}", which.name(), result.max_bobs);
        rows.push(MaxBobsRow {
            functional: which.name().into(),
            result,
        });
    }
    let policy = cfg.settings.unwrap_or_default();
    let mut thresholds = Vec::new();
    for kind in [ThresholdKind::Concurrence, ThresholdKind::WernerW] {
        for which in Inequality::TWO_BOB {
            let r = threshold(&builtin(which), kind, policy, &opt)?;
            eprintln!("{:7} {} {:.4}", which.name(), kind.name(), r.threshold);
            thresholds.push(r);
        }
    }
    Ok(Payload::Tables(Tables {
        max_bobs: rows,
        thresholds,
    }))
}

fn execute(command: &str, cfg: &RunConfig) -> Result<Payload, CliError> {
    let opt = cfg.optimizer();
    match command {
        "bounds" => bounds(cfg),
        "replay" => replay(cfg),
        "eval" => Ok(Payload::Eval(value_vector(&cfg.scenario()?)?)),
        "share" => Ok(Payload::Share(sharing_margin(
            cfg.state(),
            &cfg.functional()?,
            cfg.bobs.unwrap_or(2),
            &opt,
        )?)),
        "maxbobs" => Ok(Payload::MaxBobs(max_bobs(
            cfg.state(),
            &cfg.functional()?,
            &opt,
            cfg.k_max.unwrap_or(4),
        )?)),
        "robustness" => robustness(cfg),
        "tables" => tables(cfg),
        other => Err(CliError::Input(format!("cannot execute `{other}`"))),
    }
}

/// Consistency checks that turn a successful computation into exit code 3.
fn check(payload: &Payload) -> Result<(), CliError> {
    match payload {
        Payload::Bounds(rows) if rows.iter().any(|r| !r.ok) => {
            let bad: Vec<_> = rows
                .iter()
                .filter(|r| !r.ok)
                .map(|r| r.functional.as_str())
                .collect();
            Err(CliError::Numerical(format!(
                "bound mismatch for {}",
                bad.join(", ")
            )))
        }
        Payload::Replay(r) if r.within_tolerance.iter().any(|ok| !ok) => Err(CliError::Numerical(
            format!("{} deviates from its stored values", r.preset),
        )),
        _ => Ok(()),
    }
}

fn emit(record: &RunRecord, format: Format, dest: Option<&PathBuf>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => {
            serde_json::to_string_pretty(record).map_err(|e| CliError::Input(e.to_string()))? + "\n"
        }
        Format::Csv => output::csv(&output::table(record))?,
        Format::Table => output::pretty(&output::table(record)),
    };
    match dest {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads_from_env()?;
    if let Command::Rerun { record } = &cli.command {
        let text = std::fs::read_to_string(record)?;
        let old: RunRecord =
            serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))?;
        let start = Instant::now();
        let payload = execute(&old.command, &old.config)?;
        let new = RunRecord {
            wall_time_s: start.elapsed().as_secs_f64(),
            payload,
            ..old.clone()
        };
        emit(&new, cli.flags.out, cli.flags.output.as_ref())?;
        if new.payload != old.payload {
            return Err(CliError::Numerical(
                "re-run payload differs from the record".into(),
            ));
        }
        return Ok(());
    }

    let file = match &cli.flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = cli.flags.as_config().over(file);
    if let Command::Replay { preset: Some(p) } = &cli.command {
        cfg.preset = Some(p.clone());
    }
    if cfg.seed.is_none() {
        // TOML integers are signed 64-bit, so keep echoed seeds loadable from config files
        let seed: u64 = rand::random::<u64>() >> 1;
        eprintln!("seed: {seed} (drawn from entropy; pass --seed {seed} to reproduce)");
        cfg.seed = Some(seed);
    }
    let cfg = cfg.with_optimizer_defaults();
    cfg.optimizer().validate()?;

    let start = Instant::now();
    let payload = execute(cli.command.name(), &cfg)?;
    let record = RunRecord {
        command: cli.command.name().into(),
        seed: cfg.seed.unwrap_or_default(),
        config: cfg,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        payload,
    };
    emit(&record, cli.flags.out, cli.flags.output.as_ref())?;
    check(&record.payload)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqshare: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
