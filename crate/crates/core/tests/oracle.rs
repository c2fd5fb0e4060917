//! Double-resolution oracle for the classification thresholds.
//!
//! `cargo test --test oracle -- --ignored` rewrites `fixtures/thresholds.txt`.
//! Each threshold sits at the geometric mean of the sufficient-map noise
//! floor (worst of res 64 and res 128) and a tenth of the smallest
//! insufficient-map statistic, so both sides keep the same log margin.

mod common;

use std::fmt::Write as _;

use common::{chain_stats, fixture, load_thresholds, ChainStats, CHAIN_CASES, THRESHOLDS_FILE};

const WORKING_RESOLUTION: usize = 64;
const ORACLE_RESOLUTION: usize = 128;
/// Floor for statistics that vanish identically on sufficient maps.
const NOISE_FLOOR: f64 = 1e-12;

fn threshold(noise: f64, signal: f64) -> f64 {
    (noise.max(NOISE_FLOOR) * signal / 10.0).sqrt()
}

#[test]
#[ignore = "slow; regenerates a committed fixture"]
fn regenerate_thresholds() {
    let mut noise = [0.0f64; 3];
    let mut signal = [f64::INFINITY; 3];
    let mut out = String::from("# classification thresholds from the double-resolution oracle\n");
    for case in &CHAIN_CASES {
        for res in [WORKING_RESOLUTION, ORACLE_RESOLUTION] {
            let ChainStats { deficiency, score, ratio } = chain_stats(case, res);
            let stats = [deficiency, score, ratio];
            writeln!(out, "# {} res {res}: deficiency {deficiency:e}, score {score:e}, ratio {ratio:e}", case.map).unwrap();
            for k in 0..3 {
                if case.injective {
                    noise[k] = noise[k].max(stats[k]);
                } else {
                    signal[k] = signal[k].min(stats[k]);
                }
            }
        }
    }
    for (k, name) in ["deficiency", "score", "ratio"].iter().enumerate() {
        assert!(signal[k] > 100.0 * noise[k].max(NOISE_FLOOR), "{name}: no separation");
        writeln!(out, "{name} = {:e}", threshold(noise[k], signal[k])).unwrap();
    }
    std::fs::write(fixture(THRESHOLDS_FILE), out).unwrap();
}

#[test]
fn recorded_thresholds_are_usable() {
    let t = load_thresholds();
    for v in [t.deficiency, t.score, t.ratio] {
        assert!(v.is_finite() && v > 0.0);
    }
}
