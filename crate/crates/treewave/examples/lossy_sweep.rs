//! Lossy cost-distortion sweep: vary the quantizer step on the detail
//! streams and report (total cost, SNR) points, comparing the Haar-like
//! transform with and without broadcast exploitation on a fixed-radius net.
//!
//!     cargo run --release --example lossy_sweep -- [trials]

use treewave::experiment::{run_lossy, ExperimentConfig};
use treewave::topology::RadioModel;
use treewave::zoo::Scheme;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: usize = args.get(1).map_or(2, |s| s.parse().unwrap());
    let config = ExperimentConfig {
        schemes: vec![Scheme::Haar, Scheme::HaarBroadcast],
        radio: RadioModel::FixedRange { radius: 200.0 },
        steps: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
        trials,
        ..ExperimentConfig::default()
    };
    let table = run_lossy(&config).expect("run");

    println!(
        "{:>6} {:>16} {:>12} {:>9}",
        "step", "scheme", "cost (mJ)", "snr (dB)"
    );
    for s in &table.summaries {
        println!(
            "{:>6} {:>16} {:>12.3} {:>9.2}",
            s.delta,
            s.scheme,
            1e3 * s.mean_ct,
            s.mean_snr.unwrap()
        );
    }
    println!("\ncost falls and distortion grows with the step; the broadcast");
    println!("variant buys its SNR at lower cost wherever overheard data");
    println!("replaces raw forwarding.");
}
