//! Experiment registry: each entry binds an identifier to a parameterised
//! run producing [`TestReport`]s. Results serialise as
//!
//! ```text
//! {"theorem_id": .., "params": {..}, "seed": .., "reports": [..], "passed": ..}
//! ```
//!
//! and plot data as CSV with header `theorem_id,statistic,value,p_value,passed`.
//! Nothing time-dependent is recorded, so equal seeds give byte-identical
//! output.

mod experiments;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::salted_seed;
use crate::stattest::TestReport;

pub const DEFAULT_SEED: u64 = 20_020_101;

/// A numeric parameter: one number or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    List(Vec<f64>),
}

impl ParamValue {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            ParamValue::Scalar(x) => std::slice::from_ref(x),
            ParamValue::List(v) => v,
        }
    }
}

impl FromStr for ParamValue {
    type Err = Error;

    /// `0.5` or a comma-separated list `1,1.5,2`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::param(format!("`{s}` is not a number or a comma-separated list of numbers"))))
            .collect::<Result<_>>()?;
        match parts.as_slice() {
            [x] => Ok(ParamValue::Scalar(*x)),
            _ => Ok(ParamValue::List(parts)),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.as_slice().iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Resolved parameters of one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(BTreeMap<String, ParamValue>);

impl Params {
    pub fn iter(&self) -> impl Iterator<Item = (&String, &ParamValue)> {
        self.0.iter()
    }

    fn value(&self, key: &str) -> Result<&ParamValue> {
        self.0.get(key).ok_or_else(|| Error::param(format!("missing parameter `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.value(key)? {
            ParamValue::Scalar(x) => Ok(*x),
            ParamValue::List(_) => Err(Error::param(format!("parameter `{key}` takes a single value"))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        Ok(self.value(key)?.as_slice().to_vec())
    }

    /// A non-negative integer; `1e5` is accepted.
    pub fn count(&self, key: &str) -> Result<usize> {
        let x = self.f64(key)?;
        as_count(key, x)
    }

    pub fn counts(&self, key: &str) -> Result<Vec<usize>> {
        self.list(key)?.into_iter().map(|x| as_count(key, x)).collect()
    }
}

fn as_count(key: &str, x: f64) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
        Ok(x as usize)
    } else {
        Err(Error::param(format!("parameter `{key}` must be a non-negative integer, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::param(format!("unknown format `{other}` (expected json or csv)"))),
        }
    }
}

/// What to run and where to put the result.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub theorem_id: String,
    /// Overrides of the registered defaults.
    pub params: BTreeMap<String, ParamValue>,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(theorem_id: impl Into<String>) -> Self {
        Self {
            theorem_id: theorem_id.into(),
            params: BTreeMap::new(),
            master_seed: DEFAULT_SEED,
            output: None,
            format: OutputFormat::Json,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_param(mut self, key: &str, value: ParamValue) -> Self {
        self.params.insert(key.to_owned(), value);
        self
    }

    /// Applies `key = value` pairs. `theorem_id`, `seed`, `output` and
    /// `format` set the corresponding fields; every other key is a
    /// parameter override.
    pub fn apply_pairs<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        for (k, v) in pairs {
            match k {
                "theorem_id" | "theorem" | "id" => self.theorem_id = v.to_owned(),
                "seed" | "master_seed" => {
                    self.master_seed = v.parse().map_err(|_| Error::param(format!("seed must be an unsigned integer, got `{v}`")))?
                }
                "output" | "out" => self.output = Some(PathBuf::from(v)),
                "format" => self.format = v.parse()?,
                _ => {
                    self.params.insert(k.to_owned(), v.parse()?);
                }
            }
        }
        Ok(())
    }
}

/// Parses a flat `key = value` file. Blank lines and lines starting with `#`
/// are skipped; a repeated key keeps its last value.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::param(format!("config line {}: expected key=value, got `{line}`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::param(format!("config line {}: empty key", i + 1)));
        }
        out.push((k.to_owned(), v.to_owned()));
    }
    Ok(out)
}

/// Parses `key=value` as given on the command line.
pub fn parse_param(s: &str) -> Result<(String, ParamValue)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::param(format!("expected key=value, got `{s}`")))?;
    Ok((k.trim().to_owned(), v.trim().parse()?))
}

type RunFn = fn(&str, &Params, u64) -> Result<Vec<TestReport>>;

/// One registered experiment.
#[derive(Clone, Copy)]
pub struct ExperimentSpec {
    pub id: &'static str,
    /// The statement under test, in words.
    pub citation: &'static str,
    defaults: &'static [(&'static str, &'static [f64])],
    run: RunFn,
}

impl fmt::Debug for ExperimentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExperimentSpec").field("id", &self.id).field("citation", &self.citation).finish()
    }
}

impl ExperimentSpec {
    pub fn default_params(&self) -> Params {
        Params(
            self.defaults
                .iter()
                .map(|(k, v)| {
                    let value = match v {
                        [x] => ParamValue::Scalar(*x),
                        _ => ParamValue::List(v.to_vec()),
                    };
                    ((*k).to_owned(), value)
                })
                .collect(),
        )
    }

    /// Defaults overlaid with `overrides`; unknown keys are refused.
    pub fn resolve(&self, overrides: &BTreeMap<String, ParamValue>) -> Result<Params> {
        let mut p = self.default_params();
        for (k, v) in overrides {
            match p.0.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => {
                    let known: Vec<&str> = self.defaults.iter().map(|(k, _)| *k).collect();
                    return Err(Error::param(format!("`{}` has no parameter `{k}` (known: {})", self.id, known.join(", "))));
                }
            }
        }
        Ok(p)
    }
}

/// Every registered experiment, in a fixed order.
pub fn list_experiments() -> &'static [ExperimentSpec] {
    experiments::REGISTRY
}

pub fn find_experiment(id: &str) -> Result<&'static ExperimentSpec> {
    list_experiments()
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownExperiment(id.to_owned()))
}

/// Outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub theorem_id: String,
    pub params: Params,
    /// Master seed; the experiment draws from `salted_seed(seed, theorem_id)`.
    pub seed: u64,
    pub reports: Vec<TestReport>,
    pub passed: bool,
}

impl ExperimentResult {
    pub fn failed_reports(&self) -> impl Iterator<Item = &TestReport> {
        self.reports.iter().filter(|r| !r.passed)
    }
}

/// Runs one experiment and, when `config.output` is set, writes the result
/// in `config.format`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let spec = find_experiment(&config.theorem_id)?;
    let params = spec.resolve(&config.params)?;
    let reports = (spec.run)(spec.id, &params, salted_seed(config.master_seed, spec.id))?;
    let result = ExperimentResult {
        theorem_id: spec.id.to_owned(),
        params,
        seed: config.master_seed,
        passed: !reports.is_empty() && reports.iter().all(|r| r.passed),
        reports,
    };
    if let Some(path) = &config.output {
        write_results(std::slice::from_ref(&result), path, config.format)?;
    }
    Ok(result)
}

/// Every registered experiment at its defaults, in registry order.
pub fn run_suite(master_seed: u64) -> Result<Vec<ExperimentResult>> {
    list_experiments()
        .iter()
        .map(|e| run_experiment(&ExperimentConfig::new(e.id).with_seed(master_seed)))
        .collect()
}

/// Pretty JSON: one object for a single result, an array otherwise.
pub fn results_to_json(results: &[ExperimentResult]) -> Result<String> {
    let mut s = match results {
        [one] => serde_json::to_string_pretty(one)?,
        many => serde_json::to_string_pretty(many)?,
    };
    s.push('\n');
    Ok(s)
}

/// Plot data as CSV, one row per report.
pub fn results_to_csv(results: &[ExperimentResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theorem_id", "statistic", "value", "p_value", "passed"])?;
    for res in results {
        for r in &res.reports {
            w.write_record([
                r.theorem_id.clone(),
                r.statistic_name.clone(),
                r.value.to_string(),
                r.p_value.map(|p| p.to_string()).unwrap_or_default(),
                r.passed.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes the CSV plot data to `path`, replacing any previous content.
pub fn export_plotdata(results: &[ExperimentResult], path: &FsPath) -> Result<()> {
    fs::write(path, results_to_csv(results)?)?;
    Ok(())
}

pub fn write_results(results: &[ExperimentResult], path: &FsPath, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => fs::write(path, results_to_json(results)?)?,
        OutputFormat::Csv => export_plotdata(results, path)?,
    }
    Ok(())
}
