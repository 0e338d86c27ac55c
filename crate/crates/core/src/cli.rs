//! Command-line surface. Every command resolves its configuration, runs one
//! pipeline and emits a [`Report`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::analysis::{
    asymptotic_density_c1, asymptotic_density_c2, cd_median, confidence_curve, extract_interval,
    fit_smoothed_density, log_density_distances, ConfidenceInterval,
};
use crate::ar1::{FitResult, TimeSeries};
use crate::bayes::{
    flat_prior_cd, proposition1_check, spike_from_cd, spike_prior_cd, Prop1Config, Prop1Density,
    FLAT_PRIOR_LOWER,
};
use crate::bootstrap::{bootstrap_cd, make_plan};
use crate::error::{Error, Result};
use crate::exec::default_parallelism;
use crate::grid::PhiGrid;
use crate::io::{num, read_series, write_limit_sample, ColumnSelector, Format, Report};
use crate::mc::{
    c_at_one, estimate_cd, simulate_df_distribution, simulate_near_unit_limit, EmpiricalCd,
    McConfig,
};

pub const DEFAULT_GRID_INTERVALS: usize = 400;
pub const DEFAULT_REPS: usize = 10_000;
pub const PRECISE_REPS: usize = 100_000;
pub const DEFAULT_DF_N: usize = 1000;
pub const LEVELS: [f64; 2] = [0.90, 0.95];

#[derive(Debug, Parser)]
#[command(
    name = "ar1cd",
    version,
    about = "Confidence distributions for the AR(1) coefficient"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input CSV with the observed series.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Column to read: 1-based index or header name (default 1).
    #[arg(long, global = true)]
    pub column: Option<String>,
    /// Subtract the sample mean before fitting.
    #[arg(long, global = true)]
    pub demean: bool,
    /// Lower end of the phi grid.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi_min: Option<f64>,
    /// Number of grid steps n_phi; the grid has n_phi + 1 points.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Monte Carlo or bootstrap replicates.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Sample size of each simulated series.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Seed for every random draw (required by simulating commands).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Innovation variance: `known:<v>` or `mle`.
    #[arg(long, global = true)]
    pub sigma2: Option<Sigma2Arg>,
    /// Spike at the unit root: `auto`, `b:<v>` or `none`.
    #[arg(long, global = true)]
    pub spike: Option<SpikeArg>,
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: Format,
    /// Use 10^5 replicates by default instead of 10^4.
    #[arg(long, global = true)]
    pub precise: bool,
    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub max_parallel: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Simulated confidence distribution for a given phi_obs.
    Cd(PhiObsArgs),
    /// Simulated confidence curve, median and intervals.
    Curve(PhiObsArgs),
    /// Probit-smoothed empirical density next to c1 and c2.
    Density(PhiObsArgs),
    /// Dickey-Fuller (or local-to-unity) quantile table.
    Df(DfArgs),
    /// Residual-bootstrap confidence distribution of an observed series.
    Bootstrap(BootstrapArgs),
    /// Flat-prior (integrated likelihood) distribution.
    BayesFlat,
    /// Flat prior with a spike at the unit root.
    BayesSpike,
    /// Monte Carlo check of the implied-prior limit.
    Prop1(Prop1Args),
    /// MLE, bootstrap, flat-prior and spike-prior analysis with intervals.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PhiObsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub phi_obs: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DfArgs {
    /// Report the large-sample C(1) for this phi_obs (needs --sample-size).
    #[arg(long, allow_hyphen_values = true)]
    pub phi_obs: Option<f64>,
    /// Sample size behind --phi-obs.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Simulate at phi = exp(c/n) instead of the unit root.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Write the sorted draws here, one per line.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BootstrapArgs {
    /// Write the resampling index matrix (n rows, N columns) here.
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityArg {
    /// Closed-form normal density with variance (1 - phi_obs^2)/n.
    C2,
    /// Probit-smoothed simulated density.
    Emp,
}

#[derive(Debug, Clone, Args)]
pub struct Prop1Args {
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub phi0: f64,
    /// Generating variance when --sigma2 is `mle`.
    #[arg(long, default_value_t = 1.0)]
    pub true_sigma2: f64,
    /// Replicates behind each smoothed density.
    #[arg(long, default_value_t = 1000)]
    pub inner_reps: usize,
    #[arg(long, value_enum, default_value_t = DensityArg::Emp)]
    pub density: DensityArg,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Write all curves here in long format (method, phi, cd, cc).
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sigma2Arg {
    Known(f64),
    Mle,
}

impl FromStr for Sigma2Arg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mle" {
            return Ok(Sigma2Arg::Mle);
        }
        let v = s
            .strip_prefix("known:")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
            .ok_or_else(|| {
                Error::invalid(format!("--sigma2 expects known:<v> or mle, got {s:?}"))
            })?;
        Ok(Sigma2Arg::Known(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpikeArg {
    Auto,
    B(f64),
    None,
}

impl FromStr for SpikeArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SpikeArg::Auto),
            "none" => Ok(SpikeArg::None),
            _ => s
                .strip_prefix("b:")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|b| (0.0..1.0).contains(b))
                .map(SpikeArg::B)
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "--spike expects auto, none or b:<v> with 0 <= v < 1, got {s:?}"
                    ))
                }),
        }
    }
}

/// Fully resolved configuration, echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<ColumnSelector>,
    pub demean: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_min: Option<f64>,
    pub grid_points: usize,
    pub reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<Sigma2Arg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spike: Option<SpikeArg>,
    pub format: Format,
    pub precise: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_obs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<Value>,
}

struct Ctx {
    common: CommonArgs,
    max_parallel: usize,
}

impl Ctx {
    fn reps(&self, default: usize) -> usize {
        self.common.reps.unwrap_or(if self.common.precise {
            PRECISE_REPS.max(default)
        } else {
            default
        })
    }

    fn grid_points(&self) -> usize {
        self.common.grid_points.unwrap_or(DEFAULT_GRID_INTERVALS)
    }

    fn seed(&self) -> Result<u64> {
        self.common
            .seed
            .ok_or_else(|| Error::invalid("--seed is required for this command"))
    }

    fn n(&self) -> Result<usize> {
        self.common
            .n
            .ok_or_else(|| Error::invalid("--n (sample size) is required for this command"))
    }

    fn column(&self) -> Result<ColumnSelector> {
        self.common
            .column
            .as_deref()
            .map_or(Ok(ColumnSelector::default()), str::parse)
    }

    fn series(&self) -> Result<TimeSeries> {
        let path = self
            .common
            .input
            .as_ref()
            .ok_or_else(|| Error::invalid("--input is required for this command"))?;
        read_series(path, &self.column()?, self.common.demean)
    }

    fn grid_to_one(&self, default_lo: f64) -> Result<PhiGrid> {
        PhiGrid::to_unit_root(
            self.common.phi_min.unwrap_or(default_lo),
            self.grid_points(),
        )
    }

    fn around(&self, phi_obs: f64) -> Result<PhiGrid> {
        match self.common.phi_min {
            Some(lo) => PhiGrid::to_unit_root(lo, self.grid_points()),
            None => PhiGrid::around(phi_obs, self.grid_points()),
        }
    }

    fn config(&self, command: &'static str, reps: usize) -> Result<AnalysisConfig> {
        let c = &self.common;
        Ok(AnalysisConfig {
            command,
            input: c.input.clone(),
            column: c.input.as_ref().map(|_| self.column()).transpose()?,
            demean: c.demean,
            phi_min: c.phi_min,
            grid_points: self.grid_points(),
            reps,
            n: c.n,
            seed: c.seed,
            sigma2: c.sigma2,
            spike: c.spike,
            format: c.format,
            precise: c.precise,
            phi_obs: None,
            extra: None,
        })
    }
}

fn add_intervals(
    report: &mut Report,
    prefix: &str,
    cd: &EmpiricalCd,
) -> Result<Vec<ConfidenceInterval>> {
    let mut out = Vec::new();
    for level in LEVELS {
        let key = format!("{prefix}interval_{:.0}", level * 100.0);
        match extract_interval(cd, level) {
            Ok(ci) => {
                report.summary(&key, ci)?;
                out.push(ci);
            }
            Err(e) => report.summary(&key, e.to_string())?,
        }
    }
    match cd_median(cd) {
        Ok(m) => report.summary(&format!("{prefix}median"), m)?,
        Err(e) => report.summary(&format!("{prefix}median"), e.to_string())?,
    }
    Ok(out)
}

fn simulated(ctx: &Ctx, phi_obs: f64) -> Result<(EmpiricalCd, AnalysisConfig)> {
    let reps = ctx.reps(DEFAULT_REPS);
    let cfg = McConfig::new(reps, ctx.n()?, ctx.seed()?)?.with_max_parallel(ctx.max_parallel);
    let grid = ctx.around(phi_obs)?;
    let cd = estimate_cd(phi_obs, &grid, &cfg)?;
    Ok((cd, ctx.config("", reps)?))
}

fn cmd_cd(ctx: &Ctx, args: &PhiObsArgs) -> Result<Report> {
    let (cd, mut config) = simulated(ctx, args.phi_obs)?;
    config.command = "cd";
    config.phi_obs = Some(args.phi_obs);
    let mut rep = Report::new(&config, &["phi", "value"])?;
    rep.summary("c_at_upper_end", cd.at_upper_end())?;
    rep.summary("discarded", cd.discarded)?;
    rep.push_columns(&[cd.grid.points(), &cd.values]);
    Ok(rep)
}

fn cmd_curve(ctx: &Ctx, args: &PhiObsArgs) -> Result<Report> {
    let (cd, mut config) = simulated(ctx, args.phi_obs)?;
    config.command = "curve";
    config.phi_obs = Some(args.phi_obs);
    let cc = confidence_curve(&cd);
    let mut rep = Report::new(&config, &["phi", "value"])?;
    rep.summary("c_at_upper_end", cd.at_upper_end())?;
    rep.summary("curve_argmin", cc.argmin())?;
    add_intervals(&mut rep, "", &cd)?;
    rep.push_columns(&[cc.grid.points(), &cc.values]);
    Ok(rep)
}

fn cmd_density(ctx: &Ctx, args: &PhiObsArgs) -> Result<Report> {
    let (cd, mut config) = simulated(ctx, args.phi_obs)?;
    config.command = "density";
    config.phi_obs = Some(args.phi_obs);
    let n = ctx.n()?;
    let fit = fit_smoothed_density(&cd)?;
    let mut rep = Report::new(&config, &["phi", "c_emp", "c1", "c2"])?;
    rep.summary("probit_a", fit.a)?;
    rep.summary("probit_b", fit.b)?;
    rep.summary("selected_range", fit.selected_range)?;
    rep.summary("nonpositive_slope", fit.nonpositive_slope)?;
    if let Ok((d1, d2)) = log_density_distances(&cd, &fit, n) {
        rep.summary("sup_log_distance_c1", d1)?;
        rep.summary("sup_log_distance_c2", d2)?;
    }
    for &phi in cd.grid.points().iter().filter(|&&p| fit.contains(p)) {
        rep.push_row(vec![
            num(phi),
            num(fit.density(phi)),
            asymptotic_density_c1(phi, args.phi_obs, n).map_or(Value::Null, num),
            asymptotic_density_c2(phi, args.phi_obs, n).map_or(Value::Null, num),
        ]);
    }
    Ok(rep)
}

fn cmd_df(ctx: &Ctx, args: &DfArgs) -> Result<Report> {
    let reps = ctx.reps(DEFAULT_REPS);
    let inner_n = ctx.common.n.unwrap_or(DEFAULT_DF_N);
    let cfg = McConfig::new(reps, inner_n, ctx.seed()?)?.with_max_parallel(ctx.max_parallel);
    let sample = match args.c {
        Some(c) => simulate_near_unit_limit(c, &cfg)?,
        None => simulate_df_distribution(&cfg)?,
    };
    let mut config = ctx.config("df", reps)?;
    config.n = Some(inner_n);
    config.phi_obs = args.phi_obs;
    config.extra = Some(serde_json::json!({ "c": args.c, "sample_size": args.sample_size }));
    let mut rep = Report::new(&config, &["prob", "quantile"])?;
    rep.summary("kind", sample.kind)?;
    rep.summary("mean", sample.mean())?;
    for c in [5.0, 10.0] {
        rep.summary(
            &format!("one_minus_f_at_minus_{c}"),
            1.0 - crate::mc::df_cdf(&sample, -c),
        )?;
    }
    if let Some(phi_obs) = args.phi_obs {
        let m = args
            .sample_size
            .ok_or_else(|| Error::invalid("--phi-obs needs --sample-size"))?;
        rep.summary("c_at_one", c_at_one(phi_obs, m, &sample))?;
    }
    for p in [
        0.01, 0.025, 0.05, 0.10, 0.25, 0.5, 0.75, 0.90, 0.95, 0.975, 0.99,
    ] {
        rep.push_row(vec![num(p), num(sample.quantile(p))]);
    }
    if let Some(path) = &args.dump {
        write_limit_sample(&sample, BufWriter::new(File::create(path)?))?;
    }
    Ok(rep)
}

fn cmd_bootstrap(ctx: &Ctx, args: &BootstrapArgs) -> Result<Report> {
    let series = ctx.series()?;
    let fit = FitResult::new(&series)?;
    let reps = ctx.reps(DEFAULT_REPS);
    let plan = make_plan(series.len(), reps, ctx.seed()?)?;
    if let Some(path) = &args.plan_out {
        plan.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let grid = ctx.around(fit.phi_hat)?;
    let cd = bootstrap_cd(&series, &grid, &plan, ctx.max_parallel)?;
    let cc = confidence_curve(&cd);
    let mut rep = Report::new(&ctx.config("bootstrap", reps)?, &["phi", "cd", "cc"])?;
    rep.summary("phi_hat", fit.phi_hat)?;
    rep.summary("sigma2_hat", fit.sigma2_hat)?;
    rep.summary("c_at_one", cd.at_upper_end())?;
    rep.summary("cc_at_one", cc.at_upper_end())?;
    rep.summary("unit_root_p_value", 1.0 - cd.at_upper_end())?;
    rep.summary("degenerate_resamples", cd.discarded)?;
    add_intervals(&mut rep, "", &cd)?;
    rep.push_columns(&[grid.points(), &cd.values, &cc.values]);
    Ok(rep)
}

fn curve_report(command: &'static str, ctx: &Ctx, reps: usize, cd: &EmpiricalCd) -> Result<Report> {
    let cc = confidence_curve(cd);
    let mut rep = Report::new(&ctx.config(command, reps)?, &["phi", "cd", "cc"])?;
    add_intervals(&mut rep, "", cd)?;
    rep.push_columns(&[cd.grid.points(), &cd.values, &cc.values]);
    Ok(rep)
}

fn bootstrap_c_at_one(ctx: &Ctx, series: &TimeSeries, phi_hat: f64) -> Result<EmpiricalCd> {
    let plan = make_plan(series.len(), ctx.reps(DEFAULT_REPS), ctx.seed()?)?;
    bootstrap_cd(series, &ctx.around(phi_hat)?, &plan, ctx.max_parallel)
}

fn resolve_spike(ctx: &Ctx, boot: Option<&EmpiricalCd>) -> Result<Option<f64>> {
    match ctx.common.spike.unwrap_or(SpikeArg::Auto) {
        SpikeArg::None => Ok(None),
        SpikeArg::B(b) => Ok(Some(b)),
        SpikeArg::Auto => {
            let cd = boot.ok_or_else(|| Error::invalid("automatic spike needs a bootstrap run"))?;
            Ok(Some(spike_from_cd(cd.at_upper_end())))
        }
    }
}

fn cmd_bayes_flat(ctx: &Ctx) -> Result<Report> {
    let series = ctx.series()?;
    let fit = FitResult::new(&series)?;
    let grid = ctx.grid_to_one(FLAT_PRIOR_LOWER)?;
    let cd = flat_prior_cd(&series, &grid)?;
    let mut rep = curve_report("bayes-flat", ctx, 0, &cd)?;
    rep.summary("phi_hat", fit.phi_hat)?;
    rep.summary("sigma2_hat", fit.sigma2_hat)?;
    Ok(rep)
}

fn cmd_bayes_spike(ctx: &Ctx) -> Result<Report> {
    let series = ctx.series()?;
    let fit = FitResult::new(&series)?;
    let boot = match ctx.common.spike.unwrap_or(SpikeArg::Auto) {
        SpikeArg::Auto => Some(bootstrap_c_at_one(ctx, &series, fit.phi_hat)?),
        _ => None,
    };
    let b = resolve_spike(ctx, boot.as_ref())?.unwrap_or(0.0);
    let grid = ctx.grid_to_one(FLAT_PRIOR_LOWER)?;
    let spike = spike_prior_cd(&series, &grid, b)?;
    let reps = boot.as_ref().map_or(0, |_| ctx.reps(DEFAULT_REPS));
    let mut rep = curve_report("bayes-spike", ctx, reps, &spike.cd)?;
    rep.summary("phi_hat", fit.phi_hat)?;
    rep.summary("spike_b", b)?;
    Ok(rep)
}

fn cmd_prop1(ctx: &Ctx, args: &Prop1Args) -> Result<Report> {
    let n = ctx.common.n.unwrap_or(400);
    let reps = ctx.common.reps.unwrap_or(1000);
    let (sigma2, estimate) = match ctx.common.sigma2.unwrap_or(Sigma2Arg::Known(1.0)) {
        Sigma2Arg::Known(v) => (v, false),
        Sigma2Arg::Mle => (args.true_sigma2, true),
    };
    let mut cfg = Prop1Config::new(args.phi0, sigma2, n, reps, ctx.seed()?)?;
    cfg.estimate_sigma2 = estimate;
    cfg.max_parallel = ctx.max_parallel;
    cfg.density = match args.density {
        DensityArg::C2 => Prop1Density::ClosedFormC2,
        DensityArg::Emp => Prop1Density::Smoothed {
            inner_reps: args.inner_reps,
            inner_intervals: 60,
        },
    };
    if let Some(lo) = ctx.common.phi_min {
        cfg.grid = PhiGrid::new(lo, cfg.grid.last(), ctx.common.grid_points.unwrap_or(40))?;
    } else if let Some(gp) = ctx.common.grid_points {
        cfg.grid = PhiGrid::new(cfg.grid.first(), cfg.grid.last(), gp)?;
    }
    let report = proposition1_check(&cfg)?;
    let mut config = ctx.config("prop1", reps)?;
    config.n = Some(n);
    config.extra = Some(serde_json::to_value(&cfg)?);
    let mut rep = Report::new(&config, &["phi", "mean", "sd", "predicted_sd", "delta_sd"])?;
    rep.summary("expected_level", report.expected_level)?;
    rep.summary("mean_level", report.mean_level)?;
    rep.summary("level_deviation", report.level_deviation)?;
    rep.summary("spread", report.spread)?;
    rep.summary("used", report.used)?;
    rep.summary("skipped", report.skipped)?;
    let nan = vec![f64::NAN; report.grid.len()];
    rep.push_columns(&[
        report.grid.points(),
        &report.mean_curve,
        &report.sd_curve,
        &report.predicted_sd,
        report.delta_sd.as_deref().unwrap_or(&nan),
    ]);
    Ok(rep)
}

fn cmd_analyze(ctx: &Ctx, args: &AnalyzeArgs) -> Result<Report> {
    let series = ctx.series()?;
    let fit = FitResult::new(&series)?;
    let reps = ctx.reps(DEFAULT_REPS);
    let boot = bootstrap_c_at_one(ctx, &series, fit.phi_hat)?;
    let boot_cc = confidence_curve(&boot);
    let bayes_grid = PhiGrid::to_unit_root(FLAT_PRIOR_LOWER, ctx.grid_points())?;
    let flat = flat_prior_cd(&series, &bayes_grid)?;
    let b = resolve_spike(ctx, Some(&boot))?;
    let spike = b
        .map(|b| spike_prior_cd(&series, &bayes_grid, b))
        .transpose()?;

    let mut rep = Report::new(
        &ctx.config("analyze", reps)?,
        &["method", "level", "lo", "hi", "hi_clipped"],
    )?;
    rep.summary("n", series.len())?;
    rep.summary("phi_hat", fit.phi_hat)?;
    rep.summary("sigma2_hat", fit.sigma2_hat)?;
    rep.summary("c_at_one", boot.at_upper_end())?;
    rep.summary("cc_at_one", boot_cc.at_upper_end())?;
    rep.summary("spike_b", b)?;

    let mut methods: Vec<(&str, &EmpiricalCd)> = vec![("bootstrap", &boot), ("flat-prior", &flat)];
    if let Some(s) = &spike {
        methods.push(("spike-prior", &s.cd));
    }
    for (name, cd) in &methods {
        if let Ok(m) = cd_median(cd) {
            rep.summary(&format!("{name}_median"), m)?;
        }
        for level in LEVELS {
            let row = match extract_interval(cd, level) {
                Ok(ci) => vec![
                    Value::from(*name),
                    num(level),
                    num(ci.lo),
                    num(ci.hi),
                    Value::from(ci.hi_clipped),
                ],
                Err(e) => {
                    log::warn!("{name} {level}: {e}");
                    vec![
                        Value::from(*name),
                        num(level),
                        Value::Null,
                        Value::Null,
                        Value::Null,
                    ]
                }
            };
            rep.push_row(row);
        }
    }

    if let Some(path) = &args.curves {
        let mut curves = Report::new(
            &ctx.config("analyze", reps)?,
            &["method", "phi", "cd", "cc"],
        )?;
        for (name, cd) in &methods {
            let cc = confidence_curve(cd);
            for ((&phi, &c), &v) in cd.grid.points().iter().zip(&cd.values).zip(&cc.values) {
                curves.push_row(vec![Value::from(*name), num(phi), num(c), num(v)]);
            }
        }
        curves.write(Format::Csv, BufWriter::new(File::create(path)?))?;
    }
    Ok(rep)
}

/// Runs a parsed command and returns its report without writing it.
pub fn execute(cli: &Cli) -> Result<Report> {
    let ctx = Ctx {
        common: cli.common.clone(),
        max_parallel: cli
            .common
            .max_parallel
            .unwrap_or_else(default_parallelism)
            .max(1),
    };
    match &cli.command {
        Command::Cd(a) => cmd_cd(&ctx, a),
        Command::Curve(a) => cmd_curve(&ctx, a),
        Command::Density(a) => cmd_density(&ctx, a),
        Command::Df(a) => cmd_df(&ctx, a),
        Command::Bootstrap(a) => cmd_bootstrap(&ctx, a),
        Command::BayesFlat => cmd_bayes_flat(&ctx),
        Command::BayesSpike => cmd_bayes_spike(&ctx),
        Command::Prop1(a) => cmd_prop1(&ctx, a),
        Command::Analyze(a) => cmd_analyze(&ctx, a),
    }
}

/// Exit code for an error: 2 for input problems, 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        2
    } else {
        3
    }
}

/// Parses `args`, runs the command and writes the report. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = execute(&cli).and_then(|report| {
        match &cli.common.output {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                report.write(cli.common.format, &mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = std::io::stdout();
                report.write(cli.common.format, stdout.lock())?;
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
