//! Lossless-mode cost-reduction comparison across transform schemes: detail
//! streams quantized at step 1.0 and entropy coded, everything else at the
//! raw bit budget, total gathering energy against raw forwarding.
//!
//!     cargo run --release --example lossless_comparison -- [trials] [fixed-radius]

use treewave::experiment::{run_lossless, Correlation, ExperimentConfig};
use treewave::topology::RadioModel;
use treewave::zoo::Scheme;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: usize = args.get(1).map_or(5, |s| s.parse().unwrap());
    let radio = match args.get(2) {
        Some(r) => RadioModel::FixedRange {
            radius: r.parse().unwrap(),
        },
        None => RadioModel::VariableRange,
    };
    let schemes = vec![
        Scheme::HaarBroadcast,
        Scheme::Haar,
        Scheme::Lifting53,
        Scheme::TdpcmDecoding,
        Scheme::TdpcmOnehop,
    ];

    println!("{trials} trials, 50 nodes, radio {radio:?}\n");
    println!("{:16} {:>12} {:>12}", "scheme", "high corr", "low corr");
    let mut by_scheme = std::collections::BTreeMap::new();
    for corr in [Correlation::High, Correlation::Low] {
        let config = ExperimentConfig {
            schemes: schemes.clone(),
            radio,
            correlation: corr,
            trials,
            ..ExperimentConfig::default()
        };
        let table = run_lossless(&config).expect("run");
        for s in &table.summaries {
            by_scheme
                .entry(s.scheme.clone())
                .or_insert_with(Vec::new)
                .push(s.mean_ratio);
        }
    }
    for &scheme in &schemes {
        let ratios = &by_scheme[scheme.name()];
        println!(
            "{:16} {:>11.2}% {:>11.2}%",
            scheme.name(),
            100.0 * ratios[0],
            100.0 * ratios[1]
        );
    }
    println!("\n(mean cost-reduction ratio (C_r - C_t)/C_r; higher is better)");
}
