use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use fracbm::ensemble::{map_replicates, Ensemble};
use fracbm::experiments::{parse_suite, run_experiment, ExperimentOptions, ExperimentRecord, Outcome};
use fracbm::fbmintegrate::{
    backward_integral, covariation, extended_forward_with, forward_integral, riemann_stieltjes_with,
    symmetric_integral, EpsilonSchedule, ExtendedForwardConfig, IntegralKind, IntegralResult, DEFAULT_TOLERANCE,
    RS_LEVELS, RS_TOLERANCE,
};
use fracbm::fraccalc::{cauchy_repeated_integral, fractional_derivative, fractional_integral, DifferintegralSpec, Side};
use fracbm::gaussianpaths::{
    BmGenerator, CholeskyFactor, CirculantEmbedding, Generator, GridSpec, MovingAverage, MovingAverageConfig,
    PathGenerator, SamplePath,
};
use fracbm::io::{read_series_csv, write_grid_function_csv, write_path_csv, Series};
use fracbm::itocalc::{
    constant, deterministic, endpoint_comparison, isometry_check, ito_integral, ito_integral_qv, path_value,
    AdaptedIntegrand, EndpointComparison, IsometryCheck,
};
use fracbm::par::Execution;
use fracbm::pathstats::{
    empirical_acf, holder_exponent, p_variation, quadratic_variation, rescaled_range_hurst, variation_index,
    HurstEstimate, VariationEstimate,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::{to_json, RunDir, VerdictEntry};

/// Outcome of a command that ran to completion.
pub enum Status {
    Success,
    VerificationFailed,
}

fn read_series(path: &Path) -> Result<Series> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_series_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn path_generator(cfg: &RunConfig) -> Result<Box<dyn PathGenerator>> {
    let grid = GridSpec::new(cfg.tmax, cfg.steps)?;
    Ok(match cfg.generator()? {
        Generator::BmIncrements => Box::new(BmGenerator { grid }),
        Generator::FbmCholesky => Box::new(CholeskyFactor::new(grid, cfg.hurst)?),
        Generator::FbmMovingAverage => {
            let ma = MovingAverageConfig {
                truncation: cfg.truncation.unwrap_or(50.0 * cfg.tmax),
                kernel_mesh: cfg.kernel_mesh,
            };
            Box::new(MovingAverage::new(grid, cfg.hurst, ma)?)
        }
        Generator::FbmCirculant => Box::new(CirculantEmbedding::new(grid, cfg.hurst)?),
        Generator::External => unreachable!("rejected by RunConfig::generator"),
    })
}

fn sample_paths(cfg: &RunConfig) -> Result<Vec<SamplePath>> {
    let gen = path_generator(cfg)?;
    Ok(map_replicates(gen.as_ref(), cfg.seed, cfg.paths, Execution::Parallel, |p| Ok(p.clone()))?)
}

fn path_csv(path: &SamplePath) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_path_csv(&mut buf, path)?;
    Ok(buf)
}

pub fn generate(cfg: &RunConfig) -> Result<Status> {
    let mut run = RunDir::new(&cfg.out);
    let paths = sample_paths(cfg)?;
    for p in &paths {
        run.add(format!("path_{:04}.csv", p.seed.stream), path_csv(p)?);
    }
    run.finish("generate", cfg, Vec::new())?;
    println!("wrote {} path(s) to {}", paths.len(), cfg.out.display());
    Ok(Status::Success)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FracOp {
    Integral,
    Derivative,
    /// Repeated integral of integer order `--order`
    Cauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Args)]
pub struct FracintArgs {
    /// Two-column t,value CSV on a uniform grid
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "integral")]
    pub op: FracOp,
    /// Order α of the integral or derivative
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "left")]
    pub side: SideArg,
    /// Order m of the repeated integral
    #[arg(long, default_value_t = 2)]
    pub order: u32,
}

pub fn fracint(cfg: &RunConfig, args: &FracintArgs) -> Result<Status> {
    let f = read_series(&args.input)?.to_grid_function()?;
    let side = match args.side {
        SideArg::Left => Side::LeftSided,
        SideArg::Right => Side::RightSided,
    };
    let out = match args.op {
        FracOp::Integral => fractional_integral(&f, &DifferintegralSpec::integral(args.alpha, side))?,
        FracOp::Derivative => fractional_derivative(&f, &DifferintegralSpec::derivative(args.alpha, side))?,
        FracOp::Cauchy => cauchy_repeated_integral(&f, args.order)?,
    };
    let mut buf = Vec::new();
    write_grid_function_csv(&mut buf, &out)?;
    let mut run = RunDir::new(&cfg.out);
    run.add("fracint.csv", buf);
    run.finish("fracint", cfg, Vec::new())?;
    println!("wrote {}", cfg.out.join("fracint.csv").display());
    Ok(Status::Success)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItoIntegrand {
    /// f = 1
    One,
    /// f = t
    T,
    /// f = B(t)
    Path,
}

#[derive(Debug, Clone, Args)]
pub struct ItoArgs {
    #[arg(long, value_enum, default_value = "path")]
    pub integrand: ItoIntegrand,
    /// Integrate along this path CSV instead of running a Brownian ensemble
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Serialize)]
struct ItoPathRecord {
    integrand: ItoIntegrand,
    value: f64,
    quadratic_variation: f64,
    quadratic_variation_target: f64,
}

#[derive(Serialize)]
struct ItoEnsembleRecord {
    integrand: ItoIntegrand,
    replicates: usize,
    root_seed: u64,
    isometry: IsometryCheck,
    endpoint: EndpointComparison,
}

pub fn ito(cfg: &RunConfig, args: &ItoArgs) -> Result<Status> {
    let integrand: Box<dyn AdaptedIntegrand> = match args.integrand {
        ItoIntegrand::One => Box::new(constant(1.0)),
        ItoIntegrand::T => Box::new(deterministic(|t: f64| t)),
        ItoIntegrand::Path => Box::new(path_value()),
    };
    let json = match &args.input {
        Some(input) => {
            let p = read_series(input)?.to_path()?;
            if p.hurst != 0.5 {
                bail!("Itô integration needs a Brownian path, {} has hurst {}", input.display(), p.hurst);
            }
            let qv = ito_integral_qv(integrand.as_ref(), &p)?;
            to_json(&ItoPathRecord {
                integrand: args.integrand,
                value: ito_integral(integrand.as_ref(), &p, None)?,
                quadratic_variation: qv.qv,
                quadratic_variation_target: qv.target,
            })?
        }
        None => {
            let gen = BmGenerator {
                grid: GridSpec::new(cfg.tmax, cfg.steps)?,
            };
            let replicates = cfg.replicates.unwrap_or(1000);
            let ens = Ensemble::new(&gen, cfg.seed, replicates);
            to_json(&ItoEnsembleRecord {
                integrand: args.integrand,
                replicates,
                root_seed: cfg.seed,
                isometry: isometry_check(integrand.as_ref(), &ens)?,
                endpoint: endpoint_comparison(&ens)?,
            })?
        }
    };
    print!("{}", String::from_utf8_lossy(&json));
    let mut run = RunDir::new(&cfg.out);
    run.add("ito.json", json);
    run.finish("ito", cfg, Vec::new())?;
    Ok(Status::Success)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Symmetric,
    Forward,
    Backward,
    Covariation,
    RiemannStieltjes,
    ExtendedForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmIntegrand {
    /// f = 1
    One,
    /// f = t
    T,
    /// f = cos(3t)
    Cos,
    /// f = the driving path itself
    Path,
}

#[derive(Debug, Clone, Args)]
pub struct FbmIntegrateArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "path")]
    pub integrand: FbmIntegrand,
    /// Driving path CSV; without it `--paths` paths are generated
    #[arg(long)]
    pub input: Option<PathBuf>,
}

pub const LEDGER: &str = "results.jsonl";

#[derive(Serialize)]
struct LedgerEntry<'a> {
    kind: IntegralKind,
    integrand: FbmIntegrand,
    hurst: f64,
    steps: usize,
    tmax: f64,
    generator: &'static str,
    seed: u64,
    stream: u64,
    result: &'a IntegralResult,
}

fn integrate(cfg: &RunConfig, kind: KindArg, f: &SamplePath, g: &SamplePath) -> Result<IntegralResult> {
    let eps = || -> Result<EpsilonSchedule> {
        Ok(EpsilonSchedule::from_multiples(
            g.grid,
            &cfg.eps_multiples,
            cfg.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        )?)
    };
    Ok(match kind {
        KindArg::Symmetric => symmetric_integral(f, g, &eps()?)?,
        KindArg::Forward => forward_integral(f, g, &eps()?)?,
        KindArg::Backward => backward_integral(f, g, &eps()?)?,
        KindArg::Covariation => covariation(f, g, &eps()?)?,
        KindArg::RiemannStieltjes => riemann_stieltjes_with(f, g, RS_LEVELS, cfg.tolerance.unwrap_or(RS_TOLERANCE))?,
        KindArg::ExtendedForward => {
            let defaults = ExtendedForwardConfig::default();
            let ext = ExtendedForwardConfig {
                tolerance: cfg.tolerance.unwrap_or(defaults.tolerance),
                ..defaults
            };
            extended_forward_with(f, g, cfg.eps_levels, &ext)?
        }
    })
}

pub fn fbm_integrate(cfg: &RunConfig, args: &FbmIntegrateArgs) -> Result<Status> {
    let drivers = match &args.input {
        Some(input) => vec![read_series(input)?.to_path()?],
        None => sample_paths(cfg)?,
    };
    let mut ledger = Vec::new();
    for g in &drivers {
        let f = match args.integrand {
            FbmIntegrand::One => SamplePath::deterministic(g.grid, |_| 1.0)?,
            FbmIntegrand::T => SamplePath::deterministic(g.grid, |t| t)?,
            FbmIntegrand::Cos => SamplePath::deterministic(g.grid, |t| (3.0 * t).cos())?,
            FbmIntegrand::Path => g.clone(),
        };
        let result = integrate(cfg, args.kind, &f, g)?;
        println!(
            "stream {}: {:?} = {:.10} (converged: {})",
            g.seed.stream, result.kind, result.value, result.converged
        );
        let entry = LedgerEntry {
            kind: result.kind,
            integrand: args.integrand,
            hurst: g.hurst,
            steps: g.grid.n_steps,
            tmax: g.grid.t_max,
            generator: g.generator.as_str(),
            seed: g.seed.root,
            stream: g.seed.stream,
            result: &result,
        };
        ledger.extend(serde_json::to_vec(&entry)?);
        ledger.push(b'\n');
    }
    let mut run = RunDir::new(&cfg.out);
    run.append(LEDGER, ledger);
    run.finish("fbm-integrate", cfg, Vec::new())?;
    Ok(Status::Success)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    /// Quadratic variation on the sample grid
    Qv,
    /// p-variation along dyadic coarsenings
    Pvar,
    /// Rescaled-range Hurst estimate from the increments
    Rs,
    /// Variation-index Hurst estimate
    Vi,
    /// Hölder exponent from increment suprema
    Holder,
    /// Empirical increment autocorrelation
    Acf,
}

impl Estimator {
    fn name(self) -> &'static str {
        match self {
            Estimator::Qv => "quadratic-variation",
            Estimator::Pvar => "p-variation",
            Estimator::Rs => "rescaled-range",
            Estimator::Vi => "variation-index",
            Estimator::Holder => "holder",
            Estimator::Acf => "autocorrelation",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Two-column t,value path CSV
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "qv,rs,vi,holder,acf")]
    pub estimators: Vec<Estimator>,
    /// Exponent of the p-variation estimator
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Dyadic levels of the p-variation estimator
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Largest lag of the autocorrelation estimator
    #[arg(long, default_value_t = 10)]
    pub max_lag: usize,
}

#[derive(Serialize, Default)]
struct StatsRecord {
    input: String,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadratic_variation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_variation: Option<VariationEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rescaled_range: Option<HurstEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variation_index: Option<HurstEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    holder: Option<HurstEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acf: Option<Vec<f64>>,
}

pub fn stats(cfg: &RunConfig, args: &StatsArgs) -> Result<Status> {
    let p = read_series(&args.input)?.to_path()?;
    let mut rec = StatsRecord {
        input: args.input.display().to_string(),
        samples: p.len(),
        ..Default::default()
    };
    for e in &args.estimators {
        let ctx = || format!("{} estimator", e.name());
        match e {
            Estimator::Qv => rec.quadratic_variation = Some(quadratic_variation(&p)),
            Estimator::Pvar => rec.p_variation = Some(p_variation(&p, args.p, args.levels).with_context(ctx)?),
            Estimator::Rs => rec.rescaled_range = Some(rescaled_range_hurst(&p.increments()).with_context(ctx)?),
            Estimator::Vi => rec.variation_index = Some(variation_index(&p).with_context(ctx)?),
            Estimator::Holder => rec.holder = Some(holder_exponent(&p).with_context(ctx)?),
            Estimator::Acf => rec.acf = Some(empirical_acf(&p, args.max_lag).with_context(ctx)?),
        }
    }
    let json = to_json(&rec)?;
    print!("{}", String::from_utf8_lossy(&json));
    let mut run = RunDir::new(&cfg.out);
    run.add("stats.json", json);
    run.finish("stats", cfg, Vec::new())?;
    Ok(Status::Success)
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Comma-separated experiment ids (E1..E12) or `all`
    #[arg(long, default_value = "all")]
    pub suite: String,
}

/// One row per check; an experiment that errored gets a single row.
fn summary_csv(records: &[ExperimentRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "check", "target", "estimate", "tolerance", "comparison", "verdict"])?;
    for r in records {
        if r.verdict == Outcome::Error {
            let msg = r.error.clone().unwrap_or_default();
            w.write_record([r.id.as_str(), &msg, "", "", "", "", "error"])?;
            continue;
        }
        for c in &r.checks {
            let comparison = serde_json::to_value(c.comparison)?;
            w.write_record([
                r.id.clone(),
                c.name.clone(),
                format!("{:e}", c.target),
                format!("{:e}", c.estimate),
                format!("{:e}", c.tolerance),
                comparison.as_str().unwrap_or_default().to_string(),
                if c.passed { "pass" } else { "fail" }.to_string(),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

pub fn verify(cfg: &RunConfig, args: &VerifyArgs) -> Result<Status> {
    let suite = parse_suite(&args.suite)?;
    let opts = ExperimentOptions {
        root: cfg.seed,
        replicates: cfg.replicates,
        exec: Execution::Parallel,
    };
    let mut records = Vec::new();
    for id in suite {
        let r = run_experiment(id, &opts)?;
        println!("{:<4} {:<5} {}", r.id, r.verdict.as_str(), r.title);
        records.push(r);
    }
    let mut run = RunDir::new(&cfg.out);
    for r in &records {
        run.add(format!("{}.json", r.id), to_json(r)?);
    }
    run.add("summary.csv", summary_csv(&records)?);
    let verdicts = records
        .iter()
        .map(|r| VerdictEntry {
            experiment: r.id.clone(),
            verdict: r.verdict.as_str().to_string(),
        })
        .collect();
    run.finish("verify", cfg, verdicts)?;
    if records.iter().all(ExperimentRecord::passed) {
        Ok(Status::Success)
    } else {
        Ok(Status::VerificationFailed)
    }
}

/// Rejects configurations before any work starts.
pub fn check_config(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.out.as_os_str().is_empty() {
        bail!("output directory must not be empty");
    }
    Ok(())
}
