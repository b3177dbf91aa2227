//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use nsrand_core::game::{make_pr_v, product_behavior, Behavior, NoisyPRParams};
use nsrand_core::ks::KsSet;
use nsrand_core::rational::Rational;

pub fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub fn bundled_ks(name: &str) -> KsSet {
    let text = std::fs::read_to_string(data_path(&format!("ks/{name}.json"))).expect("bundled KS set");
    KsSet::from_json(&text).expect("valid KS set")
}

/// `n` independent copies of the noisy PR box.
pub fn pr_product(v: Rational, n: usize) -> Behavior {
    product_behavior(&make_pr_v(&NoisyPRParams::new(v).expect("v in [0, 1]")), n).expect("small n")
}
