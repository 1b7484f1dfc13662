//! Command-line front end: sequence simulation, estimation, Monte Carlo
//! risk tables, limiting-constant estimation, asymptotic risk expansion,
//! and the two-panel risk-ratio figure.

mod config;
mod error;
mod output;
mod svg;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use taustep_core::functional::functional_by_name;
use taustep_core::limit::{GridSpec, estimate_limit_constants};
use taustep_core::mc::{RiskTable, StudyConfig, run_study};
use taustep_core::model::{ModelParams, SequenceSample, generate_sequence};
use taustep_core::risk::{AsymptoticInputs, risk_expansion, zeta3};
use taustep_core::rng::RngStream;
use taustep_core::sequence::{bayes_posterior, estimate_all, CumulativeStats};

use config::ConfigFile;
use error::{CliError, Result, io_err};
use output::{emit, fmt_f64, risk_table_csv};

/// Seed of record; reproduces the qualitative findings of the bundled
/// risk-ratio study out of the box.
const DEFAULT_SEED: u64 = 27;

#[derive(Parser)]
#[command(
    name = "taustep",
    version,
    about = "Change-point estimation toolkit: MLE vs generalized-Bayes risk studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sequence from the change-in-mean model as one-column CSV
    SimulateSequence(SimulateArgs),
    /// Estimate (tau, theta, L) from a one-column CSV of observations
    Estimate(EstimateArgs),
    /// Monte Carlo risk table over a (theta, tau) grid
    RiskTable(RiskTableArgs),
    /// Estimate the limiting efficiency constants by simulation
    LimitConstants(LimitConstantsArgs),
    /// Closed-form asymptotic risk expansion and its ratio limit
    AsymptoticRisk(AsymptoticRiskArgs),
    /// Run the reference study and emit risk_table.csv + two SVG panels
    ReproduceFigure1(Figure1Args),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Config file with `key = value` lines mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sequence length
    #[arg(long)]
    n: Option<usize>,
    /// Mean level before the change
    #[arg(long)]
    theta: Option<f64>,
    /// Change-point index (1-based)
    #[arg(long)]
    tau: Option<usize>,
    /// Noise level
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replication index selecting the RNG stream
    #[arg(long)]
    replication: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EstimateArgs {
    /// One real per line; optional header line `x`
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value = "theta-tau")]
    functional: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RiskTableArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Signal level; repeatable or comma-separated
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Change point; repeatable, comma-separated, or an inclusive range a..b
    #[arg(long)]
    tau: Option<Vec<String>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    functional: Option<String>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct LimitConstantsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Jump size; moments rescale exactly by 1/delta^4
    #[arg(long)]
    delta: Option<f64>,
    /// Grid step of the discretized path
    #[arg(long = "grid-step")]
    grid_step: Option<f64>,
    /// Grid truncation T (grid covers [-T, T])
    #[arg(long)]
    truncation: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct AsymptoticRiskArgs {
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    i1: f64,
    #[arg(long, default_value_t = 1.0)]
    i2: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long = "dl-dtheta1", default_value_t = 0.0)]
    dl_dtheta1: f64,
    #[arg(long = "dl-dtheta2", default_value_t = 0.0)]
    dl_dtheta2: f64,
    #[arg(long = "dl-dtau", default_value_t = 0.0)]
    dl_dtau: f64,
    #[arg(long = "d2l-dtheta1", default_value_t = 0.0)]
    d2l_dtheta1: f64,
    #[arg(long = "d2l-dtheta2", default_value_t = 0.0)]
    d2l_dtheta2: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Figure1Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory for risk_table.csv, kappa.svg, kappa_tilde.svg
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            let wrapped = CliError::Usage(err.kind().to_string());
            eprintln!("{}", wrapped.to_stderr_json());
            std::process::exit(2);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("{}", err.to_stderr_json());
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateSequence(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::RiskTable(args) => cmd_risk_table(args),
        Command::LimitConstants(args) => cmd_limit_constants(args),
        Command::AsymptoticRisk(args) => cmd_asymptotic_risk(args),
        Command::ReproduceFigure1(args) => cmd_reproduce_figure1(args),
    }
}

fn load_config(path: Option<&PathBuf>, allowed: &[&str]) -> Result<Option<ConfigFile>> {
    path.map(|p| ConfigFile::load(p, allowed)).transpose()
}

// ---------------------------------------------------------------------
// simulate-sequence
// ---------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let cfg = load_config(
        args.config.as_ref(),
        &["n", "theta", "tau", "eps", "seed", "replication", "out"],
    )?;
    let get = |cli: Option<usize>, key: &str| -> Result<Option<usize>> {
        Ok(cli.or(cfg.as_ref().and_then(|c| c.get_usize(key).transpose()).transpose()?))
    };
    let n = get(args.n, "n")?.unwrap_or(20);
    let tau = get(args.tau, "tau")?.unwrap_or(10);
    let theta = args
        .theta
        .or(cfg.as_ref().and_then(|c| c.get_f64("theta").transpose()).transpose()?)
        .unwrap_or(1.0);
    let eps = args
        .eps
        .or(cfg.as_ref().and_then(|c| c.get_f64("eps").transpose()).transpose()?)
        .unwrap_or(1.0);
    let seed = args
        .seed
        .or(cfg.as_ref().and_then(|c| c.get_u64("seed").transpose()).transpose()?)
        .unwrap_or(DEFAULT_SEED);
    let replication = args
        .replication
        .or(cfg.as_ref().and_then(|c| c.get_u64("replication").transpose()).transpose()?)
        .unwrap_or(0);
    let out = args.out.or(cfg.as_ref().and_then(|c| c.get_string("out").map(PathBuf::from)));

    let params = ModelParams::new(theta, tau, eps, n)?;
    let sample = generate_sequence(&params, RngStream::new(seed, replication));
    let mut body = String::from("x\n");
    for v in sample.x() {
        body.push_str(&fmt_f64(*v));
        body.push('\n');
    }
    emit(out.as_deref(), &body)
}

// ---------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    eps: f64,
    functional: String,
    tau_mle: usize,
    theta_mle: f64,
    l_mle: f64,
    tau_bayes: f64,
    theta_bayes: f64,
    l_bayes: f64,
    weights: Vec<f64>,
    notes: Vec<String>,
}

fn read_observation_column(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(io_err(format!("reading {}", path.display())))?;
    let display = path.display().to_string();
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if idx == 0 && line.eq_ignore_ascii_case("x") {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| CliError::Parse {
            path: display.clone(),
            line: idx + 1,
            message: format!("cannot parse {line:?} as a real number"),
        })?;
        if !value.is_finite() {
            return Err(CliError::Numeric(format!(
                "{display}:{}: non-finite observation {line:?}",
                idx + 1
            )));
        }
        values.push(value);
    }
    if values.len() < 2 {
        return Err(CliError::Usage(format!(
            "{display}: need at least 2 observations, got {}",
            values.len()
        )));
    }
    Ok(values)
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let x = read_observation_column(&args.input)?;
    let functional = functional_by_name(&args.functional)?;
    let n = x.len();
    let params = ModelParams::new(0.0, 1, args.eps, n)?;
    let sample = SequenceSample::from_observations(x.clone(), params)?;
    let est = estimate_all(&sample, functional)?;
    let posterior = bayes_posterior(&CumulativeStats::from_observations(&x, args.eps)?);
    let report = EstimateReport {
        n,
        eps: args.eps,
        functional: args.functional.clone(),
        tau_mle: est.tau_mle,
        theta_mle: est.theta_mle,
        l_mle: est.l_mle,
        tau_bayes: est.tau_bayes,
        theta_bayes: est.theta_bayes,
        l_bayes: est.l_bayes,
        weights: posterior.weights().to_vec(),
        notes: vec!["tau_bayes is the raw posterior mean (not rounded)".into()],
    };
    emit_json(args.out.as_deref(), &report)
}

// ---------------------------------------------------------------------
// risk-table
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct RiskTableReport<'a> {
    config: &'a StudyConfig,
    notes: Vec<String>,
    cells: &'a [taustep_core::mc::RiskCell],
}

fn resolve_study_config(args: &RiskTableArgs, cfg: Option<&ConfigFile>) -> Result<StudyConfig> {
    let defaults = StudyConfig::figure1(DEFAULT_SEED, 10_000);
    let n = args
        .n
        .or(cfg.as_ref().and_then(|c| c.get_usize("n").transpose()).transpose()?)
        .unwrap_or(defaults.n);
    let eps = args
        .eps
        .or(cfg.as_ref().and_then(|c| c.get_f64("eps").transpose()).transpose()?)
        .unwrap_or(defaults.eps);
    let theta_values = match &args.theta {
        Some(v) if !v.is_empty() => v.clone(),
        _ => cfg
            .as_ref()
            .and_then(|c| c.get_f64_list("theta").transpose())
            .transpose()?
            .unwrap_or(defaults.theta_values),
    };
    let tau_values = match &args.tau {
        Some(v) if !v.is_empty() => config::parse_tau_flags(v)?,
        _ => cfg
            .as_ref()
            .and_then(|c| c.get_tau_list("tau").transpose())
            .transpose()?
            .unwrap_or(defaults.tau_values),
    };
    let reps = args
        .reps
        .or(cfg.as_ref().and_then(|c| c.get_usize("reps").transpose()).transpose()?)
        .unwrap_or(defaults.reps);
    let seed = args
        .seed
        .or(cfg.as_ref().and_then(|c| c.get_u64("seed").transpose()).transpose()?)
        .unwrap_or(defaults.seed);
    let functional_name = args
        .functional
        .clone()
        .or(cfg.as_ref().and_then(|c| c.get_string("functional")))
        .unwrap_or(defaults.functional_name);
    Ok(StudyConfig { n, eps, theta_values, tau_values, reps, seed, functional_name })
}

fn study_notes(config: &StudyConfig) -> Vec<String> {
    let mut notes =
        vec!["tau_bayes enters kappa as the raw posterior mean (not rounded)".to_owned()];
    if config.theta_values.contains(&0.0) {
        notes.push(
            "theta = 0 cells have no real change: tau is unidentifiable there and the \
             risk ratios compare estimators of an undefined change point"
                .to_owned(),
        );
    }
    notes
}

fn cmd_risk_table(args: RiskTableArgs) -> Result<()> {
    let cfg = load_config(
        args.config.as_ref(),
        &["n", "eps", "theta", "tau", "reps", "seed", "functional", "format", "out"],
    )?;
    let format = args.format.unwrap_or(match cfg.as_ref().and_then(|c| c.get_string("format")) {
        Some(s) if s == "json" => OutputFormat::Json,
        Some(s) if s == "csv" => OutputFormat::Csv,
        Some(s) => return Err(CliError::Usage(format!("unknown format {s:?}"))),
        None => OutputFormat::Csv,
    });
    let out = args
        .out
        .clone()
        .or(cfg.as_ref().and_then(|c| c.get_string("out").map(PathBuf::from)));
    let config = resolve_study_config(&args, cfg.as_ref())?;
    let notes = study_notes(&config);
    for note in &notes {
        eprintln!("note: {note}");
    }
    let table = run_study(&config)?;
    let out = out.as_deref();
    match format {
        OutputFormat::Csv => emit(out, &risk_table_csv(&table)),
        OutputFormat::Json => {
            emit_json(out, &RiskTableReport { config: &table.config, notes, cells: &table.cells })
        }
    }
}

// ---------------------------------------------------------------------
// limit-constants
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct LimitConstantsReport {
    delta: f64,
    grid_step: f64,
    truncation: f64,
    reps: usize,
    seed: u64,
    e_umle2: f64,
    e_umle2_se: f64,
    e_ub2: f64,
    e_ub2_se: f64,
    kappa0_hat: f64,
    kappa0_se: f64,
    mean_umle: f64,
    mean_umle_se: f64,
    mean_ub: f64,
    mean_ub_se: f64,
    tail_exceed_fraction: f64,
    targets: LimitTargets,
}

#[derive(Serialize)]
struct LimitTargets {
    e_umle2: f64,
    e_ub2: f64,
    kappa0: f64,
}

fn cmd_limit_constants(args: LimitConstantsArgs) -> Result<()> {
    let cfg = load_config(
        args.config.as_ref(),
        &["delta", "grid-step", "truncation", "reps", "seed", "out"],
    )?;
    let delta = args
        .delta
        .or(cfg.as_ref().and_then(|c| c.get_f64("delta").transpose()).transpose()?)
        .unwrap_or(1.0);
    let grid_step = args
        .grid_step
        .or(cfg.as_ref().and_then(|c| c.get_f64("grid-step").transpose()).transpose()?)
        .unwrap_or(0.01);
    let truncation = args
        .truncation
        .or(cfg.as_ref().and_then(|c| c.get_f64("truncation").transpose()).transpose()?)
        .unwrap_or(200.0);
    let reps = args
        .reps
        .or(cfg.as_ref().and_then(|c| c.get_usize("reps").transpose()).transpose()?)
        .unwrap_or(200_000);
    let seed = args
        .seed
        .or(cfg.as_ref().and_then(|c| c.get_u64("seed").transpose()).transpose()?)
        .unwrap_or(DEFAULT_SEED);
    let out = args.out.or(cfg.as_ref().and_then(|c| c.get_string("out").map(PathBuf::from)));

    let grid = GridSpec::new(grid_step, truncation)?;
    let constants = estimate_limit_constants(delta, &grid, reps, seed)?;
    let d4 = delta.powi(4);
    let report = LimitConstantsReport {
        delta,
        grid_step,
        truncation,
        reps,
        seed,
        e_umle2: constants.e_umle2,
        e_umle2_se: constants.e_umle2_se,
        e_ub2: constants.e_ub2,
        e_ub2_se: constants.e_ub2_se,
        kappa0_hat: constants.kappa0_hat,
        kappa0_se: constants.kappa0_se,
        mean_umle: constants.mean_umle,
        mean_umle_se: constants.mean_umle_se,
        mean_ub: constants.mean_ub,
        mean_ub_se: constants.mean_ub_se,
        tail_exceed_fraction: constants.tail_exceed_fraction,
        targets: LimitTargets {
            e_umle2: 26.0 / d4,
            e_ub2: 16.0 * zeta3() / d4,
            kappa0: 8.0 * zeta3() / 13.0,
        },
    };
    emit_json(out.as_deref(), &report)
}

// ---------------------------------------------------------------------
// asymptotic-risk
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct AsymptoticRiskReport {
    inputs: AsymptoticInputs,
    first_order: f64,
    second_order_mle: f64,
    second_order_bayes: f64,
    ratio_limit: f64,
    risk_mle_at_eps: f64,
    risk_bayes_at_eps: f64,
}

fn cmd_asymptotic_risk(args: AsymptoticRiskArgs) -> Result<()> {
    let mut inputs = AsymptoticInputs::new(args.eps, args.i1, args.i2, args.delta);
    inputs.dl_dtheta1 = args.dl_dtheta1;
    inputs.dl_dtheta2 = args.dl_dtheta2;
    inputs.dl_dtau = args.dl_dtau;
    inputs.d2l_dtheta1 = args.d2l_dtheta1;
    inputs.d2l_dtheta2 = args.d2l_dtheta2;
    let expansion = risk_expansion(&inputs)?;
    let report = AsymptoticRiskReport {
        inputs,
        first_order: expansion.first_order,
        second_order_mle: expansion.second_order_mle,
        second_order_bayes: expansion.second_order_bayes,
        ratio_limit: expansion.ratio_limit,
        risk_mle_at_eps: expansion.risk_mle_at(args.eps),
        risk_bayes_at_eps: expansion.risk_bayes_at(args.eps),
    };
    emit_json(args.out.as_deref(), &report)
}

// ---------------------------------------------------------------------
// reproduce-figure1
// ---------------------------------------------------------------------

fn cmd_reproduce_figure1(args: Figure1Args) -> Result<()> {
    let cfg = load_config(args.config.as_ref(), &["seed", "reps", "out"])?;
    let seed = args
        .seed
        .or(cfg.as_ref().and_then(|c| c.get_u64("seed").transpose()).transpose()?)
        .unwrap_or(DEFAULT_SEED);
    let reps = args
        .reps
        .or(cfg.as_ref().and_then(|c| c.get_usize("reps").transpose()).transpose()?)
        .unwrap_or(10_000);
    let out_dir = args
        .out
        .or(cfg.as_ref().and_then(|c| c.get_string("out").map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from("."));

    std::fs::create_dir_all(&out_dir)
        .map_err(io_err(format!("creating {}", out_dir.display())))?;

    let config = StudyConfig::figure1(seed, reps);
    for note in study_notes(&config) {
        eprintln!("note: {note}");
    }
    let table = run_study(&config)?;

    std::fs::write(out_dir.join("risk_table.csv"), risk_table_csv(&table))
        .map_err(io_err("writing risk_table.csv"))?;

    let kappa_chart = ratio_chart(
        &table,
        |cell| cell.kappa,
        "Empirical risk ratio kappa(tau, theta/eps)",
        "kappa = MSE(tau_bayes) / MSE(tau_mle)",
        Some((8.0 * zeta3() / 13.0, "0.7397".to_owned())),
    );
    std::fs::write(out_dir.join("kappa.svg"), svg::render(&kappa_chart))
        .map_err(io_err("writing kappa.svg"))?;

    let kappa_tilde_chart = ratio_chart(
        &table,
        |cell| cell.kappa_tilde,
        "Empirical risk ratio kappa_tilde(tau, theta/eps)",
        "kappa_tilde = MSE(L_bayes) / MSE(L_mle)",
        None,
    );
    std::fs::write(out_dir.join("kappa_tilde.svg"), svg::render(&kappa_tilde_chart))
        .map_err(io_err("writing kappa_tilde.svg"))?;

    Ok(())
}

fn ratio_chart(
    table: &RiskTable,
    value: impl Fn(&taustep_core::mc::RiskCell) -> f64,
    title: &str,
    y_label: &str,
    reference: Option<(f64, String)>,
) -> svg::Chart {
    let mut series = Vec::new();
    for &theta in &table.config.theta_values {
        let snr = theta / table.config.eps;
        let points: Vec<(f64, f64)> = table
            .cells
            .iter()
            .filter(|c| c.theta == theta)
            .map(|c| (c.tau as f64, value(c)))
            .collect();
        series.push(svg::Series { label: format!("theta/eps = {snr}"), points });
    }
    svg::Chart {
        title: title.to_owned(),
        x_label: "change point tau".to_owned(),
        y_label: y_label.to_owned(),
        series,
        reference,
    }
}

// ---------------------------------------------------------------------

fn emit_json<T: Serialize>(out: Option<&Path>, report: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Numeric(format!("serializing report: {e}")))?;
    body.push('\n');
    emit(out, &body)
}
