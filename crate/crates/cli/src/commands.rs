//! Argument definitions and subcommand implementations.

use std::path::{Path, PathBuf};

use bbmflow_core::dynamics::EvolveParams;
use bbmflow_core::random_fields::{
    default_q_grid, norms, pushforward, sample_gaussian, subgaussian_fit_values, Ensemble,
    MeasureSpec, MomentReport, Multiplier,
};
use bbmflow_core::spectral::SobolevIndex;
use bbmflow_core::transport::{
    brute_force_ot, cost_matrix, exact_ot, sinkhorn_ot, synchronized_bound, Coupling,
    Diagnostics, DistanceReport, OtMethod,
};
use bbmflow_core::verification::{self, Scenario, Table, VerifyConfig, VerifyReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ensemble_file::{read_ensemble, write_ensemble};
use crate::error::CliError;
use crate::output::{emit, to_csv, to_json, Format};

#[derive(Debug, Parser)]
#[command(name = "bbmflow", version, about = "Sample, evolve and compare ensembles under the BBM flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a Gaussian ensemble and write it as an ensemble file.
    Sample(SampleArgs),
    /// Push every sample of an ensemble through the flow.
    Evolve(EvolveArgs),
    /// Wasserstein distance between two ensembles of equal size.
    Distance(DistanceArgs),
    /// Run a verification scenario; exits 1 when a check fails.
    Verify(Box<VerifyArgs>),
    /// Summarize norms and moment growth of an ensemble.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    GaussianL2,
    GaussianPerturbed,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub measure: MeasureKind,
    /// Covariance multiplier: one value, or `modes + 1` comma-separated values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub v: Vec<f64>,
    #[arg(long)]
    pub modes: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = EvolveParams::DEFAULT_DT)]
    pub dt: f64,
    /// Galerkin truncation; defaults to the ensemble's modes.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Drop the quadratic term.
    #[arg(long)]
    pub linear: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Sync,
    Sinkhorn,
    Brute,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    /// Sinkhorn regularization as a fraction of the median cost.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Sinkhorn L1 marginal tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Omit the coupling from the report (`brute` never reports one).
    #[arg(long)]
    pub no_coupling: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub scenario: ScenarioArg,
    /// Start from a full JSON config instead of the scenario defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub holdout: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reference_seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub v_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long)]
    pub null_replicates: Option<usize>,
    #[arg(long)]
    pub scalar_count: Option<usize>,
    #[arg(long)]
    pub dt_bias_check: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Table emitted with `--format csv`; defaults to the V-grid or q-grid.
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Growth,
    Difference,
    Continuity,
    Stability,
    Invariance,
    Moments,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Growth => Scenario::Growth,
            ScenarioArg::Difference => Scenario::Difference,
            ScenarioArg::Continuity => Scenario::Continuity,
            ScenarioArg::Stability => Scenario::Stability,
            ScenarioArg::Invariance => Scenario::Invariance,
            ScenarioArg::Moments => Scenario::Moments,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Sobolev index of the norms.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a subcommand produced, for the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Verified { pass: bool },
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Evolve(a) => evolve(a),
        Command::Distance(a) => distance(a),
        Command::Verify(a) => verify(*a),
        Command::Report(a) => report(a),
    }
}

fn measure_spec(kind: MeasureKind, v: &[f64], modes: usize) -> Result<MeasureSpec, CliError> {
    match (kind, v) {
        (MeasureKind::GaussianL2, []) => Ok(MeasureSpec::gaussian(modes)),
        (MeasureKind::GaussianL2, _) => Err(CliError::Usage("--v only applies to gaussian-perturbed".into())),
        (MeasureKind::GaussianPerturbed, []) => {
            Err(CliError::Usage("gaussian-perturbed needs --v".into()))
        }
        (MeasureKind::GaussianPerturbed, [c]) => Ok(MeasureSpec::perturbed(modes, *c)),
        (MeasureKind::GaussianPerturbed, table) => Ok(MeasureSpec::GaussianPerturbed {
            modes,
            v: Multiplier::Table(table.to_vec()),
        }),
    }
}

fn sample(a: SampleArgs) -> Result<Outcome, CliError> {
    let spec = measure_spec(a.measure, &a.v, a.modes)?;
    let e = sample_gaussian(&spec, a.seed, a.count)?;
    write_ensemble(&e, &a.out)?;
    Ok(Outcome::Done)
}

fn evolve(a: EvolveArgs) -> Result<Outcome, CliError> {
    let e = read_ensemble(&a.input)?;
    let trunc = a.trunc.unwrap_or(e.max_mode());
    if trunc > e.max_mode() {
        return Err(CliError::Incompatible(format!(
            "truncation {trunc} exceeds ensemble modes {}",
            e.max_mode()
        )));
    }
    let mut params = EvolveParams::new(a.dt, trunc);
    if a.linear {
        params = params.linear();
    }
    write_ensemble(&pushforward(&e, a.t, &params)?, &a.out)?;
    Ok(Outcome::Done)
}

fn compatible(a: &Ensemble, b: &Ensemble) -> Result<(), CliError> {
    if a.max_mode() != b.max_mode() {
        return Err(CliError::Incompatible(format!(
            "modes differ: {} vs {}",
            a.max_mode(),
            b.max_mode()
        )));
    }
    if a.len() != b.len() {
        return Err(CliError::Incompatible(format!("counts differ: {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

fn distance(a: DistanceArgs) -> Result<Outcome, CliError> {
    let ea = read_ensemble(&a.a)?;
    let eb = read_ensemble(&a.b)?;
    compatible(&ea, &eb)?;
    let s = SobolevIndex::new(a.s)?;
    let rep = match a.method {
        MethodArg::Sync => synchronized_bound(&ea, &eb, s, a.p)?,
        method => {
            let c = cost_matrix(&ea, &eb, s, a.p)?;
            match method {
                MethodArg::Exact => exact_ot(&c),
                MethodArg::Sinkhorn => sinkhorn_ot(&c, a.epsilon * c.median(), a.tol)?,
                _ => DistanceReport {
                    value: brute_force_ot(&c)?,
                    method: OtMethod::Brute,
                    s_prime: a.s,
                    p: a.p,
                    coupling: Coupling::Permutation(Vec::new()),
                    diagnostics: Diagnostics::default(),
                },
            }
        }
    };
    let mut json = serde_json::to_value(&rep).expect("reports serialize");
    if a.no_coupling || a.method == MethodArg::Brute {
        if let Some(obj) = json.as_object_mut() {
            obj.remove("coupling");
        }
    }
    emit(&to_json(&json), a.out.as_deref())?;
    Ok(Outcome::Done)
}

fn load_config(path: &Path) -> Result<VerifyConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Scenario defaults (or a config file), then flag overrides.
pub fn resolve_config(a: &VerifyArgs) -> Result<VerifyConfig, CliError> {
    let scenario = Scenario::from(a.scenario);
    let mut cfg = match &a.config {
        Some(path) => {
            let cfg = load_config(path)?;
            if cfg.scenario != scenario {
                return Err(CliError::Usage(format!(
                    "config file is for scenario '{}'",
                    cfg.scenario.name()
                )));
            }
            cfg
        }
        None => VerifyConfig::for_scenario(scenario),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = &a.$field {
                cfg.$field = v.clone();
            }
        )*};
    }
    set!(s, sigma, p, p1, p2, t, horizons, modes, count, holdout, seed, dt, v_grid, epsilons);
    set!(null_replicates, scalar_count);
    if a.reference_seed.is_some() {
        cfg.reference_seed = a.reference_seed;
    }
    cfg.dt_bias_check |= a.dt_bias_check;
    cfg.validate()?;
    Ok(cfg)
}

fn csv_table<'a>(report: &'a VerifyReport, name: Option<&str>) -> Result<&'a Table, CliError> {
    let pick = match name {
        Some(n) => n,
        None => ["v_grid", "q_grid"]
            .into_iter()
            .find(|n| report.tables.contains_key(*n))
            .or_else(|| report.tables.keys().next().map(String::as_str))
            .ok_or_else(|| CliError::Usage("report has no tables".into()))?,
    };
    report.tables.get(pick).ok_or_else(|| {
        let known: Vec<&str> = report.tables.keys().map(String::as_str).collect();
        CliError::Usage(format!("no table '{pick}' (available: {})", known.join(", ")))
    })
}

fn verify(a: VerifyArgs) -> Result<Outcome, CliError> {
    let cfg = resolve_config(&a)?;
    let report = verification::run(&cfg)?;
    let bytes = match a.format {
        Format::Json => to_json(&report),
        Format::Csv => to_csv(csv_table(&report, a.table.as_deref())?),
    };
    emit(&bytes, a.out.as_deref())?;
    Ok(Outcome::Verified { pass: report.pass })
}

#[derive(Debug, Serialize)]
pub struct EnsembleSummary {
    pub schema: u32,
    pub modes: usize,
    pub count: usize,
    pub seed: u64,
    pub time: f64,
    pub measure: MeasureSpec,
    pub s: f64,
    pub norm_mean: f64,
    pub norm_sd: f64,
    pub norm_min: f64,
    pub norm_max: f64,
    pub moments: MomentReport,
}

fn summarize(e: &Ensemble, s: SobolevIndex) -> Result<EnsembleSummary, CliError> {
    let ns = norms(e, s);
    let k = ns.len() as f64;
    let mean = ns.iter().sum::<f64>() / k;
    let var = if ns.len() > 1 {
        ns.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(EnsembleSummary {
        schema: verification::REPORT_SCHEMA,
        modes: e.max_mode(),
        count: e.len(),
        seed: e.seed(),
        time: e.time(),
        measure: e.spec().clone(),
        s: s.value(),
        norm_mean: mean,
        norm_sd: var.sqrt(),
        norm_min: ns.iter().copied().fold(f64::INFINITY, f64::min),
        norm_max: ns.iter().copied().fold(0.0, f64::max),
        moments: subgaussian_fit_values(&ns, &default_q_grid(ns.len()))?,
    })
}

fn report(a: ReportArgs) -> Result<Outcome, CliError> {
    let e = read_ensemble(&a.input)?;
    let summary = summarize(&e, SobolevIndex::new(a.s)?)?;
    let bytes = match a.format {
        Format::Json => to_json(&summary),
        Format::Csv => {
            let mut t = Table::new(&["q", "norm", "ratio"]);
            for (&q, &n) in summary.moments.q_grid.iter().zip(&summary.moments.norms) {
                t.push(vec![Some(q), Some(n), Some(n / q.sqrt())]);
            }
            to_csv(&t)
        }
    };
    emit(&bytes, a.out.as_deref())?;
    Ok(Outcome::Done)
}
