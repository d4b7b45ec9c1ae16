use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use burkelab_core::harness::{
    list_experiments, parse_config, parse_param, results_to_csv, results_to_json, run_experiment, run_suite, write_results, ExperimentConfig,
    ExperimentResult, OutputFormat, ParamValue, DEFAULT_SEED,
};
use burkelab_core::queuesim::simulate_tandem;
use burkelab_core::sampler::{derive_stream, sample_brownian_grid, sample_poisson_path};
use burkelab_core::shape::{estimate_brownian_shape, estimate_poisson_shape, gamma_closed_form};
use burkelab_core::spectra::sample_gue_spectrum;
use burkelab_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "burkelab", version, about = "Monte Carlo verification of queueing, path-transform and random-matrix identities")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample count (sets the `samples` parameter).
    #[arg(long, global = true)]
    samples: Option<f64>,
    /// Grid step (sets the `dt` parameter).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Observation window length (sets the `window` parameter).
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Parameter override `key=value` or `key=v1,v2,…`; repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Flat `key=value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List registered experiments with their defaults.
    List,
    /// Run one experiment; exit status 0 iff every check passes.
    Verify {
        /// Experiment identifier (see `list`); may also come from the config file.
        theorem_id: Option<String>,
    },
    /// Run every experiment at its defaults.
    Report,
    /// Estimate a last-passage shape function; CSV `x,estimate,stderr,reference`.
    Shape {
        #[arg(long, value_enum, default_value = "poisson")]
        kind: ShapeKind,
        /// Comma-separated evaluation points.
        #[arg(long, default_value = "4")]
        x: String,
        /// Number of paths in the chain.
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Draw random objects as CSV.
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
        /// Dimension for `gue`.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Rate for `poisson`, drift for `brownian`.
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Arrival rate for `tandem`.
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Comma-separated service rates for `tandem`.
        #[arg(long, default_value = "1,1.5,2")]
        mu: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeKind {
    Poisson,
    Brownian,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    /// GUE spectra: `sample,index,eigenvalue`.
    Gue,
    /// Poisson counting path: `jump_time,jump_size`.
    Poisson,
    /// Brownian motion on a grid: `t,value`.
    Brownian,
    /// Tandem queue event log: `time,stage,event_type`.
    Tandem,
}

/// Bad input: exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn is_usage(err: &anyhow::Error) -> bool {
    if err.is::<Usage>() {
        return true;
    }
    matches!(
        err.downcast_ref::<Error>(),
        Some(Error::UnknownExperiment(_) | Error::InvalidParameter(_) | Error::Unstable { .. } | Error::Domain(_) | Error::TooLarge(_))
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::List => {
            list(g)?;
            Ok(true)
        }
        Command::Verify { theorem_id } => {
            let config = build_config(g, theorem_id.as_deref())?;
            let result = run_experiment(&config)?;
            if config.output.is_none() {
                emit(g, &[result.clone()], config.format)?;
            }
            summarise(&[result.clone()]);
            Ok(result.passed)
        }
        Command::Report => {
            if !g.params.is_empty() || g.samples.is_some() || g.dt.is_some() || g.window.is_some() {
                return Err(usage("`report` runs every experiment at its defaults; use `verify` to override parameters"));
            }
            let config = build_config(g, Some("report"))?;
            if !config.params.is_empty() {
                return Err(usage("`report` ignores experiment parameters; remove them from the config file"));
            }
            let results = run_suite(config.master_seed)?;
            match &config.output {
                Some(path) => write_results(&results, path, config.format)?,
                None => emit(g, &results, config.format)?,
            }
            summarise(&results);
            Ok(results.iter().all(|r| r.passed))
        }
        Command::Shape { kind, x, n } => {
            shape(g, *kind, x, *n)?;
            Ok(true)
        }
        Command::Sample { kind, n, rate, lambda, mu } => {
            sample(g, *kind, *n, *rate, *lambda, mu)?;
            Ok(true)
        }
    }
}

fn build_config(g: &GlobalOpts, theorem_id: Option<&str>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new(theorem_id.unwrap_or_default());
    if let Some(path) = &g.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let pairs = parse_config(&text)?;
        config.apply_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        if let Some(id) = theorem_id {
            config.theorem_id = id.to_owned();
        }
    }
    if config.theorem_id.is_empty() {
        return Err(usage("no experiment given; pass an identifier or set theorem_id in the config file"));
    }
    if let Some(seed) = g.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &g.out {
        config.output = Some(out.clone());
    }
    if let Some(f) = g.format {
        config.format = f.into();
    }
    for (key, v) in [("samples", g.samples), ("dt", g.dt), ("window", g.window)] {
        if let Some(v) = v {
            config.params.insert(key.to_owned(), ParamValue::Scalar(v));
        }
    }
    for p in &g.params {
        let (k, v) = parse_param(p)?;
        config.params.insert(k, v);
    }
    Ok(config)
}

fn output(g: &GlobalOpts) -> Result<Box<dyn Write>> {
    Ok(match &g.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(g: &GlobalOpts, results: &[ExperimentResult], format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Json => results_to_json(results)?,
        OutputFormat::Csv => results_to_csv(results)?,
    };
    output(g)?.write_all(text.as_bytes())?;
    Ok(())
}

fn summarise(results: &[ExperimentResult]) {
    for r in results {
        eprintln!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.theorem_id);
        for f in r.failed_reports() {
            eprintln!("  failed: {} = {} (threshold {})", f.statistic_name, f.value, f.threshold);
        }
    }
}

fn list(g: &GlobalOpts) -> Result<()> {
    let mut w = output(g)?;
    for e in list_experiments() {
        writeln!(w, "{:<18} {}", e.id, e.citation)?;
        let defaults: Vec<String> = e.default_params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(w, "{:<18} defaults: {}", "", defaults.join(" "))?;
    }
    Ok(())
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| usage(format!("{what}: `{p}` is not a number"))))
        .collect()
}

fn shape(g: &GlobalOpts, kind: ShapeKind, x: &str, n: usize) -> Result<()> {
    if !g.params.is_empty() || g.window.is_some() {
        return Err(usage("`shape` takes --x, --n, --samples (replicates), --dt and --seed"));
    }
    let xs = parse_list(x, "--x")?;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let replicates = g.samples.map_or(Ok(20), |s| as_count(s, "--samples"))?;
    let (est, reference): (_, fn(f64) -> f64) = match kind {
        ShapeKind::Poisson => (estimate_poisson_shape(&xs, n, replicates, seed)?, gamma_closed_form),
        ShapeKind::Brownian => (estimate_brownian_shape(&xs, n, g.dt.unwrap_or(1e-2), replicates, seed)?, |x: f64| 2.0 * x.sqrt()),
    };
    let mut w = output(g)?;
    writeln!(w, "x,estimate,stderr,reference")?;
    for ((x, e), s) in est.x_values.iter().zip(&est.estimates).zip(&est.stderr) {
        writeln!(w, "{x},{e},{s},{}", reference(*x))?;
    }
    Ok(())
}

fn as_count(x: f64, what: &str) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(usage(format!("{what} must be a positive integer, got {x}")))
    }
}

fn sample(g: &GlobalOpts, kind: SampleKind, n: usize, rate: f64, lambda: f64, mu: &str) -> Result<()> {
    if !g.params.is_empty() || g.config.is_some() || g.format.is_some() {
        bail!(usage("`sample` takes only its own flags and --seed, --samples, --dt, --window, --out"));
    }
    let mut rng = derive_stream(g.seed.unwrap_or(DEFAULT_SEED), 0).rng();
    let window = g.window.unwrap_or(10.0);
    let mut w = output(g)?;
    match kind {
        SampleKind::Gue => {
            let count = g.samples.map_or(Ok(1), |s| as_count(s, "--samples"))?;
            writeln!(w, "sample,index,eigenvalue")?;
            for k in 0..count {
                let s = sample_gue_spectrum(n, 1.0, &mut rng)?;
                for (i, x) in s.eigenvalues().iter().enumerate() {
                    writeln!(w, "{k},{i},{x}")?;
                }
            }
        }
        SampleKind::Poisson => sample_poisson_path(rate, (0.0, window), &mut rng)?.write_csv(w)?,
        SampleKind::Brownian => {
            let dt = g.dt.unwrap_or(1e-2);
            let steps = (window / dt).round() as usize;
            sample_brownian_grid(rate, dt, steps, &mut rng)?.write_csv(w)?
        }
        SampleKind::Tandem => simulate_tandem(lambda, &parse_list(mu, "--mu")?, (0.0, window), &mut rng)?.write_event_log(w)?,
    }
    Ok(())
}
