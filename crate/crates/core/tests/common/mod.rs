//! Shared pieces of the oracle and acceptance targets.

#![allow(dead_code)]

use std::path::PathBuf;

use blab::cli::SampleSpec;
use blab::infogeo::{deficiency, ratio_invariance, score_equality_gap, ScoreMethod, StatModel, Tolerances};
use blab::kernels::{make_kernel, KernelModel, KernelSpec};
use blab::maps::{make_map, ProperMap};
use blab::domains::{Domain, DomainSpec};
use blab::Point;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Kernel used for a domain throughout the acceptance suite.
pub fn kernel_for(domain: &Domain) -> KernelModel {
    let spec = match domain.spec() {
        DomainSpec::Annulus { .. } => KernelSpec::AnnulusSeries { truncation: 40 },
        _ => KernelSpec::ClosedForm,
    };
    make_kernel(domain, spec).expect("registered domains have kernels")
}

pub fn points(spec: &str, domain: &Domain) -> Vec<Point> {
    spec.parse::<SampleSpec>().unwrap().resolve(domain).unwrap()
}

/// One map of the equivalence-chain comparison with its fixed samples.
pub struct ChainCase {
    pub map: &'static str,
    pub injective: bool,
    pub sample: &'static str,
    pub xis: &'static str,
}

pub const CHAIN_CASES: [ChainCase; 3] = [
    ChainCase {
        map: "identity",
        injective: true,
        sample: "polar:r=0.3|0.5|0.7,k=4,phase=0.3",
        xis: "0.2+0.1i; -0.4+0.3i; 0.5i",
    },
    ChainCase {
        map: "mobius:a=0.3",
        injective: true,
        sample: "polar:r=0.3|0.5|0.7,k=4,phase=0.3",
        xis: "0.2+0.1i; -0.4+0.3i; 0.5i",
    },
    ChainCase {
        map: "powerann:r=0.5,m=2",
        injective: false,
        sample: "polar:r=0.58|0.65|0.72|0.8,k=4,phase=0.3",
        xis: "0.7; -0.3+0.6i; 0.85i",
    },
];

impl ChainCase {
    pub fn map(&self) -> ProperMap {
        make_map(&self.map.parse().unwrap()).unwrap()
    }

    pub fn model(&self, f: &ProperMap) -> StatModel {
        StatModel::new(kernel_for(f.source()))
    }

    pub fn sample(&self, f: &ProperMap) -> Vec<Point> {
        points(self.sample, f.source())
    }

    /// Score-test target points: images of the sample off the exclusion tube.
    pub fn zetas(&self, f: &ProperMap) -> Vec<Point> {
        self.sample(f).iter().map(|z| f.eval(z).unwrap()).filter(|p| !f.is_excluded(p)).collect()
    }
}

/// Largest statistic of each test over a case's samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainStats {
    pub deficiency: f64,
    pub score: f64,
    pub ratio: f64,
}

pub fn chain_stats(case: &ChainCase, resolution: usize) -> ChainStats {
    let f = case.map();
    let model = case.model(&f);
    let sample = case.sample(&f);
    let (rule1, rule2) = (f.source_rule(resolution).unwrap(), f.target_rule(resolution).unwrap());
    let method = ScoreMethod::Analytic;
    let tol = Tolerances::default();
    let deficiency = sample
        .iter()
        .map(|z| deficiency(&f, &model, z, &rule1, &rule2, &method, &tol).unwrap().gap_norm)
        .fold(0.0, f64::max);
    let zetas = case.zetas(&f);
    let score = sample
        .iter()
        .flat_map(|z| zetas.iter().map(move |zeta| (z, zeta)))
        .map(|(z, zeta)| score_equality_gap(&f, &model, z, zeta, &method).unwrap())
        .fold(0.0, f64::max);
    let ratio = points(case.xis, f.source())
        .iter()
        .map(|xi| ratio_invariance(&f, &model, &sample, xi).unwrap().0)
        .fold(0.0, f64::max);
    ChainStats {
        deficiency,
        score,
        ratio,
    }
}

/// Classification thresholds recorded by the oracle run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub deficiency: f64,
    pub score: f64,
    pub ratio: f64,
}

pub const THRESHOLDS_FILE: &str = "thresholds.txt";

pub fn load_thresholds() -> Thresholds {
    let text = std::fs::read_to_string(fixture(THRESHOLDS_FILE)).expect("thresholds fixture is committed");
    let get = |key: &str| -> f64 {
        text.lines()
            .filter_map(|l| l.split('#').next())
            .filter_map(|l| l.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .and_then(|(_, v)| v.trim().parse().ok())
            .unwrap_or_else(|| panic!("thresholds fixture lacks `{key}`"))
    };
    Thresholds {
        deficiency: get("deficiency"),
        score: get("score"),
        ratio: get("ratio"),
    }
}
