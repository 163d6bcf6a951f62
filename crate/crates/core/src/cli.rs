//! The `bvs` command-line front end.
//!
//! Each subcommand renders its whole report into a string first, so a
//! failure never leaves a half-written file behind. Reals are printed with
//! 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{threshold_delta_ip, threshold_delta_mix};
use crate::bayes_factor::{log_bayes_factor, log_bf_approx, BfMethod, BfMode, LogBayesFactor, Regime};
use crate::error::{Error, ErrorKind, Result};
use crate::error_analysis::{error_curves, JRule};
use crate::posterior::enumerate_posterior_with_cap;
use crate::prior::ModelPrior;
use crate::quadrature::QuadratureSpec;
use crate::regression::{compute_bj0, load_dataset, ModelSubset};
use crate::sim::{run_consistency_experiment, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "bvs", version, about = "Bayesian variable selection for the normal linear model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Relative tolerance of the adaptive quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub quad_tol: f64,

    /// Maximum number of panel doublings.
    #[arg(long, global = true, default_value_t = 20)]
    pub quad_max_refine: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bayes factor of one subset against the intercept-only model.
    Bf(BfArgs),
    /// Exhaustive posterior over all subsets.
    Posterior(PosteriorArgs),
    /// Type I error and power curves of the Bayes-factor decision rule.
    Errors(ErrorsArgs),
    /// Simulated posterior consistency over a grid of sample sizes.
    Consistency(ConsistencyArgs),
    /// Inconsistency thresholds for a dimension growing like n / r.
    Thresholds(ThresholdsArgs),
}

#[derive(Debug, Args)]
pub struct BfArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated 1-based regressor indices; empty for the null model.
    #[arg(long, default_value = "")]
    pub subset: String,
    #[arg(long, default_value = "ip")]
    pub method: String,
    /// Use the large-sample approximation for this regime instead.
    #[arg(long)]
    pub approx: Option<String>,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "ip")]
    pub method: String,
    /// bernoulli:<theta>, hu or uniform.
    #[arg(long, default_value = "hu")]
    pub prior: String,
    /// Report only the best `m` models (all by default).
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long, default_value_t = crate::posterior::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct ErrorsArgs {
    /// One method or a comma-separated list.
    #[arg(long, default_value = "gn,mix,ip")]
    pub method: String,
    #[arg(long, default_value_t = 15)]
    pub n_min: usize,
    #[arg(long, default_value_t = 99)]
    pub n_max: usize,
    #[arg(long, default_value_t = 3)]
    pub n_step: usize,
    /// j = ceil(n / ratio).
    #[arg(long, conflicts_with = "j_fixed")]
    pub j_ratio: Option<f64>,
    #[arg(long)]
    pub j_fixed: Option<usize>,
    /// Pseudo-distance of the alternative.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "50,100,200,400")]
    pub n_grid: String,
    #[arg(long = "true", default_value = "1,2")]
    pub true_indices: String,
    /// Intercept first.
    #[arg(long, default_value = "0,1,1", allow_hyphen_values = true)]
    pub beta: String,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub corr: f64,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "ip")]
    pub method: String,
    #[arg(long, default_value = "hu")]
    pub prior: String,
    /// Multiplier on n^b when sizing the candidate set.
    #[arg(long, default_value_t = 1.0)]
    pub k_scale: f64,
    #[arg(long, default_value_t = crate::posterior::DEFAULT_ENUMERATION_CAP)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    /// `start:stop:step` or a comma-separated list; every r must be >= 1.
    #[arg(long, default_value = "1,1.5,2,3,5,10")]
    pub r_grid: String,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Data => EXIT_DATA,
        ErrorKind::Numerical => EXIT_NUMERICAL,
        ErrorKind::Domain | ErrorKind::Capacity => EXIT_USAGE,
    }
}

/// Runs the parsed command and returns the rendered report.
pub fn execute(cli: &Cli) -> Result<String> {
    let quad = QuadratureSpec { rel_tol: cli.quad_tol, max_refinements: cli.quad_max_refine, ..Default::default() };
    quad.validate()?;
    match &cli.command {
        Command::Bf(a) => cmd_bf(a, cli.format, &quad),
        Command::Posterior(a) => cmd_posterior(a, cli.format, &quad),
        Command::Errors(a) => cmd_errors(a, cli.format, &quad),
        Command::Consistency(a) => cmd_consistency(a, cli.format, &quad),
        Command::Thresholds(a) => cmd_thresholds(a, cli.format),
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data always serialises");
    s.push('\n');
    s
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::domain(format!("cannot parse `{t}` in {what}"))))
        .collect()
}

/// `start:stop:step` (inclusive) or a comma-separated list.
fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let num = |t: &str| -> Result<f64> {
                t.trim().parse().map_err(|_| Error::domain(format!("cannot parse `{t}` in {what}")))
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0 && start <= stop) {
                return Err(Error::domain(format!("{what} `{s}` needs start <= stop and a positive step")));
            }
            let count = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [_] => parse_list(s, what)?,
        _ => return Err(Error::domain(format!("{what} `{s}` is neither start:stop:step nor a list"))),
    };
    if values.is_empty() {
        return Err(Error::domain(format!("{what} is empty")));
    }
    Ok(values)
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    parse_grid(s, "the sample-size grid")?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::domain(format!("sample size {v} is not a positive integer")))
            }
        })
        .collect()
}

fn cmd_bf(a: &BfArgs, format: Format, quad: &QuadratureSpec) -> Result<String> {
    let method: BfMethod = a.method.parse()?;
    let regime = a.approx.as_deref().map(str::parse::<Regime>).transpose()?;
    let data = load_dataset(&a.data)?;
    let subset: ModelSubset = a.subset.parse()?;
    subset.check_within(data.k())?;
    let fit = compute_bj0(&data, &subset)?;
    let (n, j) = (data.n(), subset.dim());
    let lbf = match regime {
        Some(r) => log_bf_approx(method, r, n, j, fit.b_j0)?,
        // M_0 against itself: exactly 1, as in the posterior table.
        None if subset.is_null() => LogBayesFactor { log_value: 0.0, method, mode: BfMode::Exact, n, j, b_j0: 1.0 },
        None => log_bayes_factor(method, n, j, fit.b_j0, quad)?,
    };
    let bf = (lbf.log_value.abs() < 700.0).then(|| lbf.log_value.exp());
    Ok(match format {
        Format::Csv => csv_rows(
            &["n", "j", "b_j0", "log_bf", "bf", "method", "mode"],
            [vec![
                n.to_string(),
                j.to_string(),
                real(fit.b_j0),
                real(lbf.log_value),
                bf.map(real).unwrap_or_default(),
                method.to_string(),
                lbf.mode.to_string(),
            ]],
        )?,
        Format::Json => {
            #[derive(Serialize)]
            struct Report {
                n: usize,
                j: usize,
                subset: Vec<usize>,
                b_j0: f64,
                log_bf: f64,
                bf: Option<f64>,
                method: String,
                mode: String,
            }
            json(&Report {
                n,
                j,
                subset: subset.indices().to_vec(),
                b_j0: fit.b_j0,
                log_bf: lbf.log_value,
                bf,
                method: method.to_string(),
                mode: lbf.mode.to_string(),
            })
        }
    })
}

fn cmd_posterior(a: &PosteriorArgs, format: Format, quad: &QuadratureSpec) -> Result<String> {
    let method: BfMethod = a.method.parse()?;
    let prior: ModelPrior = a.prior.parse()?;
    let data = load_dataset(&a.data)?;
    let table = enumerate_posterior_with_cap(&data, method, prior, quad, a.cap)?;
    let top = a.top.unwrap_or(table.len());
    Ok(match format {
        Format::Json => {
            let mut s = if a.top.is_some() { table.to_json_top(top) } else { table.to_json() };
            s.push('\n');
            s
        }
        Format::Csv => {
            let models = table.top_models(top).into_iter().enumerate().map(|(i, (s, p))| {
                let e = &table.entries()[s.mask() as usize];
                vec![(i + 1).to_string(), s.to_string(), s.dim().to_string(), real(e.log_unnormalized), real(p)]
            });
            let mut out = csv_rows(&["rank", "indices", "dim", "log_unnormalized", "posterior"], models)?;
            out.push('\n');
            let incl = table
                .inclusion_probabilities()
                .into_iter()
                .enumerate()
                .map(|(i, p)| vec![(i + 1).to_string(), data.names()[i].clone(), real(p)]);
            out.push_str(&csv_rows(&["regressor", "name", "inclusion"], incl)?);
            out
        }
    })
}

fn cmd_errors(a: &ErrorsArgs, format: Format, quad: &QuadratureSpec) -> Result<String> {
    let methods: Vec<BfMethod> = parse_list(&a.method, "the method list")?;
    if methods.is_empty() {
        return Err(Error::domain("no method given"));
    }
    if a.n_step == 0 || a.n_min > a.n_max {
        return Err(Error::domain("the n range needs n-min <= n-max and a positive step"));
    }
    let rule = match (a.j_ratio, a.j_fixed) {
        (_, Some(j)) => JRule::Fixed(j),
        (Some(r), None) if r > 0.0 && r.is_finite() => JRule::Ratio(r),
        (Some(r), None) => return Err(Error::domain(format!("j ratio must be positive, got {r}"))),
        (None, None) => JRule::Ratio(3.0),
    };
    let grid: Vec<usize> = (a.n_min..=a.n_max).step_by(a.n_step).collect();
    let mut points = Vec::new();
    for m in methods {
        points.extend(error_curves(m, &grid, rule, a.delta, quad)?);
    }
    Ok(match format {
        Format::Json => json(&points),
        Format::Csv => csv_rows(
            &["n", "j", "method", "b_star", "type1", "power", "delta"],
            points.iter().map(|p| {
                vec![
                    p.n.to_string(),
                    p.j.to_string(),
                    p.method.to_string(),
                    real(p.b_star),
                    real(p.type1),
                    real(p.power),
                    real(p.delta),
                ]
            }),
        )?,
    })
}

fn cmd_consistency(a: &ConsistencyArgs, format: Format, quad: &QuadratureSpec) -> Result<String> {
    let config = ExperimentConfig {
        b: a.b,
        n_grid: parse_sizes(&a.n_grid)?,
        true_indices: parse_list(&a.true_indices, "the true-model indices")?,
        beta: parse_list(&a.beta, "the coefficients")?,
        sigma: a.sigma,
        covariate_corr: a.corr,
        replications: a.reps,
        seed: a.seed,
        method: a.method.parse()?,
        prior: a.prior.parse()?,
        enumeration_cap: a.cap,
        k_scale: a.k_scale,
        quad: *quad,
    };
    let result = run_consistency_experiment(&config)?;
    Ok(match format {
        Format::Json => json(&result),
        Format::Csv => csv_rows(
            &["n", "k", "replicate", "true_posterior", "modal_is_true", "modal_indices"],
            result.records.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.k.to_string(),
                    r.replicate.to_string(),
                    real(r.true_posterior),
                    r.modal_is_true.to_string(),
                    r.modal.to_string(),
                ]
            }),
        )?,
    })
}

fn cmd_thresholds(a: &ThresholdsArgs, format: Format) -> Result<String> {
    let grid = parse_grid(&a.r_grid, "the r grid")?;
    if let Some(r) = grid.iter().find(|r| !(**r >= 1.0 && r.is_finite())) {
        return Err(Error::domain(format!("thresholds need r >= 1, got {r}")));
    }
    #[derive(Serialize)]
    struct Row {
        r: f64,
        delta_mix: Option<f64>,
        delta_ip: f64,
    }
    let rows = grid
        .iter()
        .map(|&r| {
            let delta_mix = if r > 1.0 { Some(threshold_delta_mix(r)?) } else { None };
            Ok(Row { r, delta_mix, delta_ip: threshold_delta_ip(r)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = String::from("r,delta_mix,delta_ip\n");
            for row in &rows {
                let mix = row.delta_mix.map(real).unwrap_or_default();
                writeln!(out, "{},{},{}", row.r, mix, real(row.delta_ip)).expect("writing to a string");
            }
            out
        }
    })
}
