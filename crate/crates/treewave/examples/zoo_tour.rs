//! Build every transform scheme on one network and inspect invertibility,
//! critical sampling, coefficient classes, and raw-forwarding hops.
//!
//!     cargo run --example zoo_tour -- [nodes] [seed]

use treewave::datagen::spatial_covariance;
use treewave::lifting::UpdateDesign;
use treewave::scheduling::{derive_causal_sets, prune_for_decodability};
use treewave::transform::CoeffClass;
use treewave::zoo::{build_scheme, BuildOptions, EdgeWeights, Scheme};
use treewave::{Network, RadioModel, Schedule};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nodes: usize = args.get(1).map_or(30, |s| s.parse().unwrap());
    let seed: u64 = args.get(2).map_or(11, |s| s.parse().unwrap());

    let net =
        Network::generate_connected(nodes, 600.0, RadioModel::FixedRange { radius: 200.0 }, seed)
            .unwrap();
    let schedule = Schedule::assign(&net);
    let causal = prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
    let cov = spatial_covariance(&net, 0.99, 359.0, 600.0, 600, 2500.0);
    let weights = EdgeWeights::uniform(1.0);
    let opts = BuildOptions {
        design: UpdateDesign::Ortho,
        extra_levels: 2,
        weights: &weights,
        covariance: Some(&cov),
    };

    println!(
        "{:16} {:>6} {:>9} {:>5} {:>7} {:>7} {:>9} {:>9}",
        "scheme", "invert", "critical", "raw", "smooth", "detail", "raw-hops", "|det-1|"
    );
    for &scheme in Scheme::all() {
        let t = build_scheme(scheme, &net, &schedule, &causal, &opts).unwrap();
        let report = t.verify_invertibility();
        let mut counts = [0usize; 3];
        for n in net.nodes() {
            match t.class(n) {
                CoeffClass::Raw => counts[0] += 1,
                CoeffClass::Smooth(_) => counts[1] += 1,
                CoeffClass::Detail(_) => counts[2] += 1,
            }
        }
        let raw_hops: u32 = net.nodes().map(|n| t.raw_hops(n)).sum();
        let worst_det = report
            .dets
            .iter()
            .map(|(_, d)| (d - 1.0).abs())
            .fold(0.0f64, f64::max);
        println!(
            "{:16} {:>6} {:>9} {:>5} {:>7} {:>7} {:>9} {:>9.1e}",
            scheme.name(),
            report.ok,
            t.verify_critical_sampling(),
            counts[0],
            counts[1],
            counts[2],
            raw_hops,
            worst_det
        );
    }
}
