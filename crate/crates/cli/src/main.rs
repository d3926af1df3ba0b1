use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use landweber::config::{parse_pairs, Experiment, ExperimentConfig};
use landweber::deconv::{write_snapshots, DeconvProblem, Method};
use landweber::mimo::lsq::run_lsq_convergence;
use landweber::mimo::ser::{run_ser_sweep, write_ser_table};
use landweber::schedule::{grid_max_polynomial, write_schedule};
use landweber::{convergence_bound, Error, InertialSchedule};

const MANIFEST: &str = "manifest.txt";
const FAILED_MARKER: &str = ".failed";

/// Landweber iteration with Chebyshev inertial factors: deconvolution,
/// least-squares and MIMO detection experiments.
#[derive(Parser)]
#[command(name = "landweber", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deconvolve a blurred signal with plain and Chebyshev Landweber.
    Deconv(Common),
    /// Mean squared error curves and contraction rates for random least squares.
    Lsq(Common),
    /// Symbol error rate sweep for projected Landweber detectors against MMSE.
    Ser(Common),
    /// Print the Chebyshev factors and U(T) for given spectral bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long = "l-min")]
        l_min: Option<f64>,
        #[arg(long = "l-max")]
        l_max: Option<f64>,
        #[arg(long = "T", short = 'T')]
        period: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; a manifest from an earlier run works too.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trial loops, 0 for all logical processors.
    #[arg(long)]
    parallel: Option<usize>,
    /// Override any config key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_set)]
    set: Vec<(String, String)>,
}

fn parse_set(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = self.set.clone();
        if let Some(p) = &self.out {
            o.push(("out".into(), p.display().to_string()));
        }
        if let Some(s) = self.seed {
            o.push(("seed".into(), s.to_string()));
        }
        if let Some(p) = self.parallel {
            o.push(("parallel".into(), p.to_string()));
        }
        o
    }

    fn resolve(&self, experiment: Experiment, extra: Vec<(String, String)>) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        let mut overrides = self.overrides();
        overrides.extend(extra);
        Ok(ExperimentConfig::resolve(experiment, &file, &overrides)?)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let (common, experiment, extra) = match &cli.command {
        Command::Deconv(c) => (c, Experiment::Deconv, Vec::new()),
        Command::Lsq(c) => (c, Experiment::Lsq, Vec::new()),
        Command::Ser(c) => (c, Experiment::Ser, Vec::new()),
        Command::Bounds {
            common,
            l_min,
            l_max,
            period,
        } => {
            let mut extra = Vec::new();
            if let Some(v) = l_min {
                extra.push(("l_min".to_string(), v.to_string()));
            }
            if let Some(v) = l_max {
                extra.push(("l_max".to_string(), v.to_string()));
            }
            if let Some(v) = period {
                extra.push(("T".to_string(), v.to_string()));
            }
            (common, Experiment::Bounds, extra)
        }
    };

    let cfg = match common.resolve(experiment, extra) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let out = cfg.out_dir();
    if let Err(e) = prepare_out(&out, &cfg) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.parallel()).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };

    let started = Instant::now();
    let result = pool.install(|| match experiment {
        Experiment::Deconv => deconv(&cfg, &out),
        Experiment::Lsq => lsq(&cfg, &out),
        Experiment::Ser => ser(&cfg, &out),
        Experiment::Bounds => bounds(&cfg, &out),
    });
    log::info!("{experiment} finished in {:.2?}", started.elapsed());

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let marker = out.join(FAILED_MARKER);
            if let Err(io) = fs::write(&marker, format!("{e:#}\n")) {
                eprintln!("could not write {}: {io}", marker.display());
            }
            let code = match e.downcast_ref::<Error>() {
                Some(Error::Config(_) | Error::InvalidArgument(_)) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn prepare_out(out: &Path, cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let marker = out.join(FAILED_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    fs::write(out.join(MANIFEST), cfg.manifest())?;
    Ok(())
}

fn deconv(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let dc = cfg.deconv()?;
    let problem = DeconvProblem::standard(dc.grid)?;
    let check = problem.check_bounds(dc.omega, &dc.bounds);
    println!(
        "spectrum of omega*G*G: [{:e}, {}], assumed [{}, {}]",
        check.actual_min,
        check.actual_max,
        dc.bounds.l_min(),
        dc.bounds.l_max()
    );

    let result = problem.run(&dc)?;
    result.write_error_curves(&out.join("error_curves.csv"))?;
    write_snapshots(&out.join("snapshots.csv"), &problem, &result)?;

    for run in &result.runs {
        let last = run.errors.last().copied().unwrap_or(f64::NAN);
        match run.first_below(0.1) {
            Some(k) => println!("{:>9}: error <= 0.1 at k = {k}, final {last:.6}", run.method.label()),
            None => println!("{:>9}: error stays above 0.1, final {last:.6}", run.method.label()),
        }
    }
    if let Some(plain) = result.get(Method::Plain) {
        log::debug!("plain max imaginary part {:e}", plain.max_imag);
    }
    Ok(())
}

fn lsq(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let lc = cfg.lsq()?;
    let result = run_lsq_convergence(&lc)?;
    result.write_curves(&out.join("lsq_curves.csv"))?;
    result.write_rates(&out.join("lsq_rates.csv"))?;

    println!("mean rho(A) = {:.6}", result.mean_rho());
    for &t in &result.rate_periods {
        if let Some(u) = result.mean_u(t) {
            println!("T = {t:>2}: mean U(T) = {u:.6}");
        }
    }
    for (t, count) in result.rate_violations() {
        if t >= 2 && count > 0 {
            println!("T = {t}: U(T) >= rho(A) on {count} of {} instances", result.rates.len());
        }
    }
    Ok(())
}

fn ser(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sc = cfg.ser()?;
    let points = run_ser_sweep(&sc)?;
    write_ser_table(&out.join("ser.csv"), &points)?;
    for p in &points {
        println!(
            "{:>5} dB {:>10}: SER {:.3e} ({} errors / {} symbols)",
            p.snr_db,
            p.detector.to_string(),
            p.ser(),
            p.errors,
            p.symbols
        );
    }
    Ok(())
}

fn bounds(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let req = cfg.bounds()?;
    let schedule = InertialSchedule::chebyshev_ordered(&req.bounds, req.period, req.order)?;
    let u = convergence_bound(&req.bounds, req.period)?;
    write_schedule(&out.join("schedule.csv"), &schedule)?;

    println!("U({}) = {}", req.period, u.value);
    if u.degenerate {
        println!("bounds coincide: the schedule is exact after one period");
    }
    for (k, w) in schedule.factors().iter().enumerate() {
        println!("omega_{k} = {w}");
    }
    if req.grid_points > 0 {
        let beta = grid_max_polynomial(&schedule, &req.bounds, req.grid_points);
        println!("max |beta_T| on {} grid points = {beta}", req.grid_points);
    }
    Ok(())
}
