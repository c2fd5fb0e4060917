//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::domains::{DomainSpec, Domain};
use crate::error::{Error, Result};
use crate::infogeo::{ScoreMethod, Verdict};
use crate::kernels::{KernelSpec, DEFAULT_SERIES_TRUNCATION};
use crate::maps::MapSpec;

use super::sample::SampleSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    KernelTable,
    MetricTable,
    FisherVsBergman,
    TransformationCheck,
    IsometryCheck,
    PushforwardCheck,
    DeficiencySweep,
    ScoreSweep,
    FactorizationCheck,
    RatioCheck,
    Verdict,
}

impl Experiment {
    pub const ALL: [Experiment; 11] = [
        Experiment::KernelTable,
        Experiment::MetricTable,
        Experiment::FisherVsBergman,
        Experiment::TransformationCheck,
        Experiment::IsometryCheck,
        Experiment::PushforwardCheck,
        Experiment::DeficiencySweep,
        Experiment::ScoreSweep,
        Experiment::FactorizationCheck,
        Experiment::RatioCheck,
        Experiment::Verdict,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::KernelTable => "kernel-table",
            Experiment::MetricTable => "metric-table",
            Experiment::FisherVsBergman => "fisher-vs-bergman",
            Experiment::TransformationCheck => "transformation-check",
            Experiment::IsometryCheck => "isometry-check",
            Experiment::PushforwardCheck => "pushforward-check",
            Experiment::DeficiencySweep => "deficiency-sweep",
            Experiment::ScoreSweep => "score-sweep",
            Experiment::FactorizationCheck => "factorization-check",
            Experiment::RatioCheck => "ratio-check",
            Experiment::Verdict => "verdict",
        }
    }

    pub fn needs_map(&self) -> bool {
        !matches!(
            self,
            Experiment::KernelTable | Experiment::MetricTable | Experiment::FisherVsBergman
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                Error::Parse(format!("unknown experiment `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// Default tolerance for every named check.
pub const DEFAULT_TOLERANCES: [(&str, f64); 13] = [
    ("kernel", 1e-6),
    ("reproducing", 1e-6),
    ("metric", 1e-5),
    ("fisher", 1e-3),
    ("transform", 1e-8),
    ("isometry", 1e-8),
    ("pushforward", 1e-5),
    ("suff", 1e-3),
    ("score", 1e-4),
    ("ratio", 1e-4),
    ("mono", 1e-4),
    ("factorization", 1e-7),
    ("witness", 1e-2),
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub domain1: Option<DomainSpec>,
    pub domain2: Option<DomainSpec>,
    pub kernel1: Option<KernelSpec>,
    pub kernel2: Option<KernelSpec>,
    pub map: Option<MapSpec>,
    pub resolution: usize,
    pub degree: usize,
    pub truncation: usize,
    pub sample: Option<SampleSpec>,
    pub zeta_sample: Option<SampleSpec>,
    pub scores: ScoreMethod,
    pub lambda: f64,
    /// Explicit `tol.<name>` overrides.
    pub tolerances: BTreeMap<String, f64>,
    pub expected: Option<Verdict>,
    pub output_dir: PathBuf,
    /// The parsed `key = value` pairs, for the report.
    pub echo: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            domain1: None,
            domain2: None,
            kernel1: None,
            kernel2: None,
            map: None,
            resolution: 64,
            degree: 12,
            truncation: DEFAULT_SERIES_TRUNCATION,
            sample: None,
            zeta_sample: None,
            scores: ScoreMethod::default(),
            lambda: 1.0,
            tolerances: BTreeMap::new(),
            expected: None,
            output_dir: output_dir.into(),
            echo: Vec::new(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if cfg.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output_dir = parent.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    /// Parses the flat config format. Errors name the offending line and key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut echo = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {line_no}: expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if let Some((first, _)) = entries.get(&key) {
                return Err(Error::Parse(format!("line {line_no}: key `{key}` already set on line {first}")));
            }
            echo.push((key.clone(), value.clone()));
            entries.insert(key, (line_no, value));
        }

        let field = |key: &str| entries.get(key).map(|(l, v)| (*l, v.as_str()));
        let wrap = |line: usize, key: &str, e: Error| -> Error {
            let msg = match e {
                Error::Parse(m) => m,
                other => other.to_string(),
            };
            Error::Parse(format!("line {line}, field `{key}`: {msg}"))
        };
        fn parse_with<T>(
            field: Option<(usize, &str)>,
            key: &str,
            wrap: &dyn Fn(usize, &str, Error) -> Error,
            f: impl Fn(&str) -> Result<T>,
        ) -> Result<Option<T>> {
            field.map(|(line, v)| f(v).map_err(|e| wrap(line, key, e))).transpose()
        }
        let number = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::Parse(format!("`{v}` is not a number")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| Error::Parse(format!("`{v}` is not a non-negative integer")))
        };

        let experiment = parse_with(field("experiment"), "experiment", &wrap, |v| v.parse())?
            .ok_or_else(|| Error::Parse("missing required key `experiment`".into()))?;
        let output_dir = field("output_dir").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("."));
        let mut cfg = Self::new(experiment, output_dir);
        cfg.echo = echo;
        cfg.domain1 = parse_with(field("domain1"), "domain1", &wrap, |v| v.parse())?;
        cfg.domain2 = parse_with(field("domain2"), "domain2", &wrap, |v| v.parse())?;
        cfg.kernel1 = parse_with(field("kernel1"), "kernel1", &wrap, |v| v.parse())?;
        cfg.kernel2 = parse_with(field("kernel2"), "kernel2", &wrap, |v| v.parse())?;
        cfg.map = parse_with(field("map"), "map", &wrap, |v| v.parse())?;
        if let Some(v) = parse_with(field("resolution"), "resolution", &wrap, count)? {
            cfg.resolution = v;
        }
        if let Some(v) = parse_with(field("degree"), "degree", &wrap, count)? {
            cfg.degree = v;
        }
        if let Some(v) = parse_with(field("J"), "J", &wrap, count)? {
            cfg.truncation = v;
        }
        cfg.sample = parse_with(field("sample"), "sample", &wrap, |v| v.parse())?;
        cfg.zeta_sample = parse_with(field("zeta_sample"), "zeta_sample", &wrap, |v| v.parse())?;
        if let Some(v) = parse_with(field("scores"), "scores", &wrap, |v| match v {
            "stencil" => Ok(ScoreMethod::default()),
            "analytic" => Ok(ScoreMethod::Analytic),
            other => Err(Error::Parse(format!("`{other}` is not one of stencil, analytic"))),
        })? {
            cfg.scores = v;
        }
        if let Some(v) = parse_with(field("lambda"), "lambda", &wrap, number)? {
            if !(v > 0.0) {
                return Err(wrap(entries["lambda"].0, "lambda", Error::Parse(format!("λ must be positive, got {v}"))));
            }
            cfg.lambda = v;
        }
        cfg.expected = parse_with(field("expected"), "expected", &wrap, |v| v.parse())?;

        let known = [
            "experiment", "domain1", "domain2", "kernel1", "kernel2", "map", "resolution", "degree", "J",
            "sample", "zeta_sample", "scores", "lambda", "expected", "output_dir",
        ];
        for (key, (line, value)) in &entries {
            if let Some(name) = key.strip_prefix("tol.") {
                if !DEFAULT_TOLERANCES.iter().any(|(n, _)| *n == name) {
                    return Err(wrap(*line, key, Error::Parse(format!("unknown tolerance `{name}`"))));
                }
                let v = number(value).map_err(|e| wrap(*line, key, e))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(wrap(*line, key, Error::Parse(format!("tolerance must be positive, got {v}"))));
                }
                cfg.tolerances.insert(name.to_string(), v);
            } else if !known.contains(&key.as_str()) {
                return Err(wrap(*line, key, Error::Parse("unknown key".into())));
            }
        }
        Ok(cfg)
    }

    /// Effective tolerance: an override, else the method-aware default.
    pub fn tolerance(&self, name: &str) -> f64 {
        if let Some(v) = self.tolerances.get(name) {
            return *v;
        }
        if name == "score" && self.scores == ScoreMethod::Analytic {
            return 1e-6;
        }
        DEFAULT_TOLERANCES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("no default for tolerance `{name}`"))
    }

    /// Kernel strategy for a domain when none is configured.
    pub fn default_kernel(&self, domain: &Domain) -> KernelSpec {
        match domain.spec() {
            DomainSpec::Annulus { .. } => KernelSpec::AnnulusSeries {
                truncation: self.truncation,
            },
            DomainSpec::Ellipse { .. } => KernelSpec::Orthonormalized {
                degree: self.degree,
                resolution: self.resolution,
            },
            _ => KernelSpec::ClosedForm,
        }
    }
}
