use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pathminer::conformance::{evaluate, AlignOptions};
use pathminer::decision::{mine_place, ClassifierKind, MineOptions, DEFAULT_TEST_FRACTION};
use pathminer::discovery::{mine_alpha, mine_dfm};
use pathminer::io::{
    parse_patient_csv, read_net_json, read_xes, write_dot, write_net_json, write_patient_csv,
    write_xes_string,
};
use pathminer::model::{EventLog, Phenotype};
use pathminer::petri::{build_dejure, simulate, PetriNet, SimulationConfig};
use pathminer::stats::{compare_cohorts, Axis, CohortReport, DEFAULT_ALPHA};
use pathminer::transform::transform_log;

/// Process mining on longitudinal patient records.
#[derive(Debug, Parser)]
#[command(name = "pathminer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn a patient CSV into an XES event log.
    Transform {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Discover a Petri net from an XES log.
    Discover {
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Dfg)]
        algorithm: Algorithm,
        /// Share of directly-follows frequency to keep (dfg only).
        #[arg(long, default_value_t = 1.0)]
        paths: f64,
        #[arg(long, value_enum, default_value_t = NetFormat::Json)]
        format: NetFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Align a log against a net and report conformance metrics as JSON.
    Conform {
        log: PathBuf,
        net: PathBuf,
        /// Abort an alignment after this many search states.
        #[arg(long)]
        state_cap: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the reference treatment-path model.
    Dejure {
        #[arg(long, value_enum, default_value_t = NetFormat::Json)]
        format: NetFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare activity counts across comorbidity and phenotype cohorts.
    Cohorts {
        log: PathBuf,
        #[arg(long, default_value = "diabetes")]
        axis: String,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Directory receiving kruskal.csv and one Dunn matrix per
        /// significant activity.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Mine the choices made at a decision place.
    Decide {
        log: PathBuf,
        net: PathBuf,
        #[arg(long)]
        place: String,
        /// Only cases of this phenotype (hfref, hfmref, hfpef).
        #[arg(long)]
        filter: Option<String>,
        /// Comma-separated classifier kinds.
        #[arg(long, value_delimiter = ',')]
        classifiers: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Holdout fraction.
        #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
        split: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate a synthetic patient CSV on the reference model.
    Simulate {
        /// JSON simulation config; unset fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        patients: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algorithm {
    Dfg,
    Alpha,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NetFormat {
    Json,
    Dot,
}

/// Failure caused by the user's input rather than by the tool.
#[derive(Debug)]
struct InputError(anyhow::Error);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InputError {}

fn input<E: Into<anyhow::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(InputError(e.into()))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)
}

fn load_log(path: &Path) -> Result<EventLog> {
    let bytes = read_file(path)?;
    read_xes(&bytes)
        .with_context(|| format!("invalid event log {}", path.display()))
        .map_err(input)
}

fn load_net(path: &Path) -> Result<PetriNet> {
    let bytes = read_file(path)?;
    read_net_json(&bytes)
        .with_context(|| format!("invalid net {}", path.display()))
        .map_err(input)
}

fn emit(output: Option<&Path>, content: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, content).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn render_net(net: &PetriNet, format: NetFormat) -> String {
    match format {
        NetFormat::Json => write_net_json(net),
        NetFormat::Dot => write_dot(net),
    }
}

fn file_stem(activity: &str) -> String {
    activity
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn write_cohorts(report: &CohortReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join("kruskal.csv");
    fs::write(&path, report.kruskal_csv()).with_context(|| format!("cannot write {}", path.display()))?;
    for a in &report.activities {
        if let Some(matrix) = &a.dunn {
            let path = dir.join(format!("dunn_{}.csv", file_stem(&a.activity)));
            fs::write(&path, CohortReport::dunn_csv(matrix))
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    Ok(())
}

/// Reads a simulation config over the defaults. Top-level fields replace
/// their default; `choices` and `attributes` are merged per place and per
/// attribute.
fn load_config(bytes: &[u8]) -> Result<SimulationConfig> {
    let mut merged = serde_json::to_value(SimulationConfig::default())?;
    let user: serde_json::Value = serde_json::from_slice(bytes)?;
    let serde_json::Value::Object(fields) = user else {
        anyhow::bail!("expected a JSON object");
    };
    for (key, value) in fields {
        match (merged.get_mut(&key), value) {
            (Some(serde_json::Value::Object(base)), serde_json::Value::Object(over))
                if key == "choices" || key == "attributes" =>
            {
                base.extend(over);
            }
            (_, value) => {
                merged[key] = value;
            }
        }
    }
    Ok(serde_json::from_value(merged)?)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Transform { input: path, output } => {
            let rows = parse_patient_csv(read_file(&path)?.as_slice())
                .with_context(|| format!("invalid patient data {}", path.display()))
                .map_err(input)?;
            let log = transform_log(&rows).map_err(input)?;
            emit(output.as_deref(), write_xes_string(&log).as_bytes())
        }
        Command::Discover { log, algorithm, paths, format, output } => {
            let log = load_log(&log)?;
            let net = match algorithm {
                Algorithm::Dfg => mine_dfm(&log, paths).map_err(input)?,
                Algorithm::Alpha => {
                    let net = mine_alpha(&log);
                    if let Err(e) = net.check_connected() {
                        eprintln!("warning: {e}");
                    }
                    net
                }
            };
            emit(output.as_deref(), render_net(&net, format).as_bytes())
        }
        Command::Conform { log, net, state_cap, output } => {
            let log = load_log(&log)?;
            let net = load_net(&net)?;
            let mut opts = AlignOptions::default();
            if let Some(cap) = state_cap {
                opts.state_cap = cap;
            }
            let report = evaluate(&net, &log, opts)?;
            emit(output.as_deref(), report.to_json().as_bytes())
        }
        Command::Dejure { format, output } => emit(output.as_deref(), render_net(&build_dejure(), format).as_bytes()),
        Command::Cohorts { log, axis, alpha, output_dir } => {
            let axis: Axis = axis.parse().map_err(input)?;
            let log = load_log(&log)?;
            let report = compare_cohorts(&log, axis, alpha).map_err(input)?;
            write_cohorts(&report, &output_dir)?;
            emit(None, report.summary().as_bytes())
        }
        Command::Decide { log, net, place, filter, classifiers, seed, split, output } => {
            let filter = filter
                .map(|f| f.parse::<Phenotype>())
                .transpose()
                .map_err(input)?;
            let kinds = match classifiers {
                Some(list) => list
                    .iter()
                    .map(|k| k.trim().parse::<ClassifierKind>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(input)?,
                None => ClassifierKind::ALL.to_vec(),
            };
            let log = load_log(&log)?;
            let net = load_net(&net)?;
            let opts = MineOptions { kinds, filter, test_fraction: split, seed };
            let report = mine_place(&net, &log, &place, &opts).map_err(|e| match e {
                pathminer::decision::DecisionError::Conformance(_) => anyhow::Error::new(e),
                other => input(other),
            })?;
            emit(output.as_deref(), report.to_json().as_bytes())
        }
        Command::Simulate { config, patients, seed, output } => {
            let mut cfg = match config {
                Some(path) => load_config(&read_file(&path)?)
                    .with_context(|| format!("invalid simulation config {}", path.display()))
                    .map_err(input)?,
                None => SimulationConfig::default(),
            };
            if let Some(n) = patients {
                cfg.patients = n;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate().map_err(input)?;
            let rows = simulate(&cfg)?;
            let mut buf = Vec::new();
            write_patient_csv(&rows, &mut buf)?;
            emit(output.as_deref(), &buf)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("PATHMINER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| input(anyhow::anyhow!("PATHMINER_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("cannot configure the thread pool")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<InputError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
