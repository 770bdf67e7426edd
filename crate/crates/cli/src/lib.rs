//! `twdp` command-line front end.
//!
//! Exit status is the only success channel: 0 on success, 1 when a
//! validation run fails its tolerances, 2 on usage or input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use twdp::estimators::{ensemble_correlations, envelope_picks, histogram, level_crossing_rate, AnchorPolicy};
use twdp::harness::{builtin_scenarios, correlation_scenario, run_validation, Oracle, CORRELATION_TOL};
use twdp::io::table::{correlation_table, histogram_table, lcr_table};
use twdp::io::{parse_config, write_trace, Table};
use twdp::params::{validate_scenario, ChannelParams, ScenarioConfig, ValidatedScenario};
use twdp::sos::{generate_ensemble, generate_trials};
use twdp::theory::{
    envelope_pdf_reference, rayleigh_lcr_oracle, CorrelationKind, CorrelationSeries, LagGrid, Model,
    TwdpCorrelations,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "twdp", version, about = "Sum-of-sinusoids TWDP fading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML scenario document; missing keys take the defaults
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (directory for `gen`); stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the number of trials
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Rxx,
    Ryy,
    Rxy,
    Ryx,
    Rzz,
    Rsq,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModelArg {
    Reference,
    Simulator,
}

#[derive(Args, Debug, Clone)]
struct SeriesArgs {
    #[arg(long, value_enum, default_value_t = Kind::Rxx)]
    kind: Kind,
    #[arg(long, value_enum, default_value_t = ModelArg::Simulator)]
    model: ModelArg,
    /// Largest normalized lag f_D·τ
    #[arg(long, default_value_t = 10.0)]
    max_fd_tau: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one binary trace file per trial into the --out directory
    Gen {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form correlation series
    Theory {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Empirical correlation series with the closed form alongside
    Acf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Envelope histogram with the reference density alongside
    Pdf {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Upper edge of the histogram; defaults to max(3, largest pick)
        #[arg(long)]
        z_max: Option<f64>,
    },
    /// Normalized level-crossing rates
    Lcr {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0])]
        thresholds: Vec<f64>,
    },
    /// Run the validation scenarios (builtin, or one built from --config)
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn load_scenario(common: &Common) -> Result<ValidatedScenario> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text)?.config().clone()
        }
        None => ScenarioConfig::standard(ChannelParams::rayleigh(1.0)?),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(m) = common.trials {
        cfg.n_trials = m;
    }
    let s = validate_scenario(cfg)?;
    info!("resolved scenario: {}", serde_json::to_string(s.config())?);
    Ok(s)
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn emit_table(common: &Common, table: &Table) -> Result<()> {
    let text = match common.format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json()?,
    };
    emit(common, &text)
}

fn kinds_of(kind: Kind) -> Vec<CorrelationKind> {
    match kind {
        Kind::Rxx => vec![CorrelationKind::Rxx],
        Kind::Ryy => vec![CorrelationKind::Ryy],
        Kind::Rxy => vec![CorrelationKind::Rxy],
        Kind::Ryx => vec![CorrelationKind::Ryx],
        Kind::Rzz => vec![CorrelationKind::RzzReal, CorrelationKind::RzzImag],
        Kind::Rsq => vec![CorrelationKind::Rsq],
    }
}

fn model_of(arg: ModelArg, s: &ValidatedScenario) -> Model {
    match arg {
        ModelArg::Reference => Model::Reference,
        ModelArg::Simulator => Model::Simulator {
            n_sinusoids: s.config().n_sinusoids,
        },
    }
}

fn series_grid(s: &ValidatedScenario, max_fd_tau: f64) -> Result<LagGrid> {
    let cfg = s.config();
    let max_lag = (max_fd_tau / cfg.fd_ts()).round() as usize;
    Ok(LagGrid::from_sample_lags(max_lag, 1, cfg.sample_period_s, cfg.doppler_hz)?)
}

/// One table from one or two (real, imaginary) series pairs. A second
/// series gets an `_im` column next to its real part.
fn series_table(values: &[CorrelationSeries], oracle: Option<&[CorrelationSeries]>) -> Result<Table> {
    let mut table = correlation_table(&values[0], oracle.map(|o| &o[0]))?;
    if values.len() == 2 {
        table.columns.push("value_im".into());
        for (row, v) in table.rows.iter_mut().zip(&values[1].values) {
            row.push(*v);
        }
        if let Some(o) = oracle {
            table.columns.push("oracle_value_im".into());
            for (row, v) in table.rows.iter_mut().zip(&o[1].values) {
                row.push(*v);
            }
        }
    }
    Ok(table)
}

fn cmd_gen(common: &Common) -> Result<i32> {
    let s = load_scenario(common)?;
    let Some(dir) = &common.out else {
        bail!("gen needs --out DIR");
    };
    fs::create_dir_all(dir)?;
    let n = s.config().n_trials;
    // Bounded memory: generate and write a block at a time.
    let mut start = 0;
    while start < n {
        let end = (start + 256).min(n);
        for trace in generate_trials(&s, start..end)? {
            let path = trace_path(dir, trace.trial_index);
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_trace(&trace, &s, std::io::BufWriter::new(file))?;
        }
        start = end;
    }
    info!("wrote {n} traces to {}", dir.display());
    Ok(EXIT_OK)
}

pub fn trace_path(dir: &Path, trial: usize) -> PathBuf {
    dir.join(format!("trial_{trial:06}.twdptrc"))
}

fn cmd_theory(common: &Common, args: &SeriesArgs) -> Result<i32> {
    let s = load_scenario(common)?;
    let grid = series_grid(&s, args.max_fd_tau)?;
    let t = TwdpCorrelations::new(s.params(), s.rates(), s.config().doppler_hz);
    let model = model_of(args.model, &s);
    let series: Vec<CorrelationSeries> = kinds_of(args.kind).into_iter().map(|k| t.series(k, model, &grid)).collect();
    emit_table(common, &series_table(&series, None)?)?;
    Ok(EXIT_OK)
}

fn cmd_acf(common: &Common, args: &SeriesArgs) -> Result<i32> {
    let s = load_scenario(common)?;
    let grid = series_grid(&s, args.max_fd_tau)?;
    let ens = generate_ensemble(&s)?;
    let kinds = kinds_of(args.kind);
    let est = ensemble_correlations(&ens, &kinds, &grid, &AnchorPolicy::default())?;
    let empirical: Vec<CorrelationSeries> = est.into_iter().map(|e| e.series).collect();
    let t = TwdpCorrelations::new(s.params(), s.rates(), s.config().doppler_hz);
    let model = model_of(args.model, &s);
    let oracle: Vec<CorrelationSeries> = kinds.iter().map(|&k| t.series(k, model, &grid)).collect();
    emit_table(common, &series_table(&empirical, Some(&oracle))?)?;
    Ok(EXIT_OK)
}

fn cmd_pdf(common: &Common, bins: usize, z_max: Option<f64>) -> Result<i32> {
    let s = load_scenario(common)?;
    let ens = generate_ensemble(&s)?;
    let picks = envelope_picks(&ens);
    let top = z_max.unwrap_or_else(|| picks.iter().copied().fold(3.0, f64::max));
    let h = histogram(&picks, bins, (0.0, top))?;
    let oracle = if s.params().diffuse_power() > 0.0 {
        Some(
            h.bin_centres()
                .iter()
                .map(|&z| envelope_pdf_reference(s.params(), z))
                .collect::<Result<Vec<f64>, _>>()?,
        )
    } else {
        None
    };
    info!("{} envelope picks", h.n_samples);
    emit_table(common, &histogram_table(&h, oracle)?)?;
    Ok(EXIT_OK)
}

fn cmd_lcr(common: &Common, thresholds: &[f64]) -> Result<i32> {
    let s = load_scenario(common)?;
    let ens = generate_ensemble(&s)?;
    let curve = level_crossing_rate(&ens, thresholds)?;
    let oracle = s
        .params()
        .is_rayleigh()
        .then(|| thresholds.iter().map(|&r| rayleigh_lcr_oracle(r)).collect());
    emit_table(common, &lcr_table(&curve, oracle)?)?;
    Ok(EXIT_OK)
}

fn cmd_validate(common: &Common) -> Result<i32> {
    let mut scenarios = match &common.config {
        Some(_) => {
            let s = load_scenario(common)?;
            let (k, g) = s.params().k_gamma();
            let mut vs = correlation_scenario(k, g, Oracle::SimulatorFormula, CORRELATION_TOL);
            vs.name = "configured correlation scenario".into();
            vs.scenario = s.config().clone();
            vec![vs]
        }
        None => builtin_scenarios(),
    };
    if let Some(m) = common.trials {
        for vs in &mut scenarios {
            vs.scenario.n_trials = m;
        }
    }
    let seed = common.seed.unwrap_or(0);
    for vs in &scenarios {
        info!("scenario {:?}: {}", vs.name, serde_json::to_string(&vs.scenario)?);
    }
    let report = run_validation(&scenarios, seed)?;
    for r in &report.records {
        info!(
            "{} {} / {}: max {:.4} rms {:.4} (tol {} / {}) {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.scenario,
            r.statistic,
            r.max_abs_dev,
            r.rms_dev,
            r.tolerance.max_abs,
            r.tolerance.rms,
            r.n_trials
        );
    }
    let mut text = report.to_json();
    text.push('\n');
    emit(common, &text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Gen { common } => cmd_gen(common),
        Command::Theory { common, series } => cmd_theory(common, series),
        Command::Acf { common, series } => cmd_acf(common, series),
        Command::Pdf { common, bins, z_max } => cmd_pdf(common, *bins, *z_max),
        Command::Lcr { common, thresholds } => cmd_lcr(common, thresholds),
        Command::Validate { common } => cmd_validate(common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
