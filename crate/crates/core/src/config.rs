//! Flat `key = value` experiment configuration.
//!
//! Every experiment has a fixed schema of keys with defaults. A configuration
//! is resolved from an optional file plus overrides (overrides win); unknown
//! keys and unparsable values are rejected together, naming every offending
//! key. The resolved form is written back out as a manifest that can be fed
//! to `--config` to reproduce a run.
//!
//! File syntax: one `key = value` per line, `#` starts a comment, lists are
//! comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::deconv::{DeconvConfig, GridSpec};
use crate::error::{Error, Result};
use crate::mimo::lsq::{InitialIterate, LsqConfig};
use crate::mimo::ser::{SerConfig, StepRule};
use crate::mimo::AlphaSchedule;
use crate::schedule::FactorOrder;
use crate::solver::ProjectionOrder;
use crate::spectral::SpectralBounds;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Deconv,
    Lsq,
    Ser,
    Bounds,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Deconv => "deconv",
            Self::Lsq => "lsq",
            Self::Ser => "ser",
            Self::Bounds => "bounds",
        }
    }

    fn schema(self) -> &'static [Key] {
        match self {
            Self::Deconv => DECONV_KEYS,
            Self::Lsq => LSQ_KEYS,
            Self::Ser => SER_KEYS,
            Self::Bounds => BOUNDS_KEYS,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deconv" => Ok(Self::Deconv),
            "lsq" => Ok(Self::Lsq),
            "ser" => Ok(Self::Ser),
            "bounds" => Ok(Self::Bounds),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Usize,
    U64,
    F64,
    UsizeList,
    F64List,
    Choice(&'static [&'static str]),
    Text,
}

struct Key {
    name: &'static str,
    default: &'static str,
    kind: Kind,
}

const fn key(name: &'static str, default: &'static str, kind: Kind) -> Key {
    Key { name, default, kind }
}

/// Keys accepted by every experiment.
const COMMON_KEYS: &[Key] = &[
    key("out", "out", Kind::Text),
    key("seed", "1", Kind::U64),
    // 0 = one thread per logical processor
    key("parallel", "0", Kind::Usize),
];

const DECONV_KEYS: &[Key] = &[
    key("lo", "-8.192", Kind::F64),
    key("hi", "8.192", Kind::F64),
    key("bins", "16384", Kind::Usize),
    key("omega", "0.3", Kind::F64),
    key("l_min", "0.1", Kind::F64),
    key("l_max", "0.9", Kind::F64),
    key("periods", "1,2,8", Kind::UsizeList),
    key("iters", "200", Kind::Usize),
    key("snapshot_every", "30", Kind::Usize),
    key("snapshot_period", "8", Kind::Usize),
];

const LSQ_KEYS: &[Key] = &[
    key("n", "32", Kind::Usize),
    key("sigma", "0.0001", Kind::F64),
    key("trials", "100", Kind::Usize),
    key("iters", "50", Kind::Usize),
    key("periods", "2,8", Kind::UsizeList),
    key("rate_periods", "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16", Kind::UsizeList),
    key("init", "zero", Kind::Choice(&["zero", "truth"])),
    // 0 = automatic (1 up to 1000 iterations, else 10)
    key("record_every", "0", Kind::Usize),
];

const SER_KEYS: &[Key] = &[
    key("n", "32", Kind::Usize),
    key("snr_db", "0,2,4,6,8,10,12", Kind::F64List),
    key("iters", "100", Kind::Usize),
    key("periods", "4,8,16", Kind::UsizeList),
    key("min_errors", "100", Kind::U64),
    key("max_trials", "10000", Kind::Usize),
    key("batch", "100", Kind::Usize),
    key("floor_ratio", "0.1", Kind::F64),
    key("step", "omega-opt", Kind::Choice(&["omega-opt", "inverse-lmax"])),
    key("alpha_early", "0.5", Kind::F64),
    key("alpha_late", "0.25", Kind::F64),
    key("alpha_switch", "20", Kind::Usize),
    key("order", "project-then-combine", Kind::Choice(&["project-then-combine", "combine-then-project"])),
];

const BOUNDS_KEYS: &[Key] = &[
    key("l_min", "0.1", Kind::F64),
    key("l_max", "0.9", Kind::F64),
    key("T", "8", Kind::Usize),
    key("order", "natural", Kind::Choice(&["natural", "reversed"])),
    key("grid_points", "10000", Kind::Usize),
];

fn check_value(kind: Kind, value: &str) -> std::result::Result<(), String> {
    fn list(v: &str) -> Vec<&str> {
        v.split(',').map(str::trim).collect()
    }
    let ok = match kind {
        Kind::Usize => value.parse::<usize>().is_ok(),
        Kind::U64 => value.parse::<u64>().is_ok(),
        Kind::F64 => value.parse::<f64>().is_ok_and(f64::is_finite),
        Kind::UsizeList => !value.is_empty() && list(value).iter().all(|v| v.parse::<usize>().is_ok()),
        Kind::F64List => !value.is_empty() && list(value).iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite)),
        Kind::Choice(options) => options.contains(&value),
        Kind::Text => !value.is_empty(),
    };
    if ok {
        Ok(())
    } else {
        Err(match kind {
            Kind::Choice(options) => format!("expected one of {}", options.join("|")),
            Kind::UsizeList => "expected a comma-separated list of non-negative integers".into(),
            Kind::F64List => "expected a comma-separated list of finite numbers".into(),
            Kind::Usize | Kind::U64 => "expected a non-negative integer".into(),
            Kind::F64 => "expected a finite number".into(),
            Kind::Text => "expected a non-empty value".into(),
        })
    }
}

/// Parses `key = value` lines. Later duplicates replace earlier ones.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// A validated, fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    experiment: Experiment,
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Resolves defaults ← `file` ← `overrides`. The meta keys `experiment` and
    /// `version` written into manifests are accepted; `experiment` must match.
    pub fn resolve(experiment: Experiment, file: &[(String, String)], overrides: &[(String, String)]) -> Result<Self> {
        let schema: Vec<&Key> = COMMON_KEYS.iter().chain(experiment.schema()).collect();
        let mut values: BTreeMap<String, String> =
            schema.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();

        let mut problems = Vec::new();
        for (k, v) in file.iter().chain(overrides) {
            match k.as_str() {
                "experiment" => {
                    if v != experiment.as_str() {
                        problems.push(format!("experiment: file is for '{v}', not '{experiment}'"));
                    }
                }
                "version" => {
                    if v != TOOL_VERSION {
                        log::warn!("config written by version {v}, running {TOOL_VERSION}");
                    }
                }
                _ => match schema.iter().find(|s| s.name == k) {
                    None => problems.push(format!("{k}: unknown key for '{experiment}'")),
                    Some(s) => match check_value(s.kind, v) {
                        Ok(()) => {
                            values.insert(k.clone(), v.clone());
                        }
                        Err(why) => problems.push(format!("{k} = '{v}': {why}")),
                    },
                },
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems.join("; ")));
        }
        Ok(Self { experiment, values })
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key '{key}' not in schema"))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> T
    where
        T::Err: fmt::Debug,
    {
        self.get(key).parse().expect("validated at resolve time")
    }

    fn list<T: FromStr>(&self, key: &str) -> Vec<T>
    where
        T::Err: fmt::Debug,
    {
        self.get(key)
            .split(',')
            .map(|v| v.trim().parse().expect("validated at resolve time"))
            .collect()
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out"))
    }

    pub fn seed(&self) -> u64 {
        self.parsed("seed")
    }

    pub fn parallel(&self) -> usize {
        self.parsed("parallel")
    }

    pub fn deconv(&self) -> Result<DeconvConfig> {
        self.expect(Experiment::Deconv)?;
        Ok(DeconvConfig {
            grid: GridSpec::new(self.parsed("lo"), self.parsed("hi"), self.parsed("bins"))?,
            omega: self.parsed("omega"),
            bounds: SpectralBounds::user(self.parsed("l_min"), self.parsed("l_max"))?,
            periods: self.list("periods"),
            iters: self.parsed("iters"),
            snapshot_every: self.parsed("snapshot_every"),
            snapshot_period: self.parsed("snapshot_period"),
        })
    }

    pub fn lsq(&self) -> Result<LsqConfig> {
        self.expect(Experiment::Lsq)?;
        let record_every: usize = self.parsed("record_every");
        Ok(LsqConfig {
            n: self.parsed("n"),
            sigma: self.parsed("sigma"),
            trials: self.parsed("trials"),
            iters: self.parsed("iters"),
            periods: self.list("periods"),
            rate_periods: self.list("rate_periods"),
            seed: self.seed(),
            init: self.get("init").parse::<InitialIterate>()?,
            record_every: (record_every > 0).then_some(record_every),
        })
    }

    pub fn ser(&self) -> Result<SerConfig> {
        self.expect(Experiment::Ser)?;
        Ok(SerConfig {
            n: self.parsed("n"),
            snr_db: self.list("snr_db"),
            iters: self.parsed("iters"),
            periods: self.list("periods"),
            min_errors: self.parsed("min_errors"),
            max_trials: self.parsed("max_trials"),
            batch: self.parsed("batch"),
            seed: self.seed(),
            floor_ratio: self.parsed("floor_ratio"),
            step: self.get("step").parse::<StepRule>()?,
            alpha: AlphaSchedule {
                early: self.parsed("alpha_early"),
                late: self.parsed("alpha_late"),
                switch_at: self.parsed("alpha_switch"),
            },
            order: self.get("order").parse::<ProjectionOrder>()?,
        })
    }

    pub fn bounds(&self) -> Result<BoundsRequest> {
        self.expect(Experiment::Bounds)?;
        Ok(BoundsRequest {
            bounds: SpectralBounds::user(self.parsed("l_min"), self.parsed("l_max"))?,
            period: self.parsed("T"),
            order: self.get("order").parse::<FactorOrder>()?,
            grid_points: self.parsed("grid_points"),
        })
    }

    fn expect(&self, e: Experiment) -> Result<()> {
        if self.experiment == e {
            Ok(())
        } else {
            Err(Error::Config(format!("config is for '{}', not '{e}'", self.experiment)))
        }
    }

    /// `experiment`, `version`, then every resolved key in sorted order.
    pub fn manifest(&self) -> String {
        let mut s = format!("experiment = {}\nversion = {TOOL_VERSION}\n", self.experiment);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRequest {
    pub bounds: SpectralBounds,
    pub period: usize,
    pub order: FactorOrder,
    pub grid_points: usize,
}
