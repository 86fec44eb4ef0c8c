//! Transmission scheduling and causal broadcast neighborhoods: assign slots
//! (descendants before ancestors), filter overheard links by causality, then
//! prune for step-by-step decodability.
//!
//!     cargo run --example schedule_and_causal -- [nodes] [seed] [radius]

use treewave::{derive_causal_sets, prune_for_decodability, Network, RadioModel, Schedule};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nodes: usize = args.get(1).map_or(40, |s| s.parse().unwrap());
    let seed: u64 = args.get(2).map_or(3, |s| s.parse().unwrap());
    let radius: f64 = args.get(3).map_or(180.0, |s| s.parse().unwrap());

    let net = Network::generate_connected(nodes, 600.0, RadioModel::FixedRange { radius }, seed)
        .expect("connected network");
    let schedule = Schedule::assign(&net);

    println!(
        "slot order (first 10): {:?}",
        &schedule.order()[..10.min(nodes)]
    );

    let raw = net.broadcast_links().len();
    let causal = derive_causal_sets(&net, &schedule);
    let pruned = prune_for_decodability(&causal, &net, &schedule);
    println!(
        "broadcast links: {raw} raw -> {} causal -> {} decodable",
        causal.total_links(),
        pruned.total_links()
    );

    for n in net.nodes() {
        let sources = pruned.causal(n);
        if sources.is_empty() {
            continue;
        }
        // Every surviving source transmits before n and is reprocessed after.
        for &m in sources {
            assert!(schedule.slot(m) < schedule.slot(n));
            assert!(schedule.parent_slot(&net, m) > schedule.slot(n));
        }
        println!(
            "node {n} (slot {}): uses broadcast from {:?}, extended set {:?}",
            schedule.slot(n),
            sources,
            pruned.extended(n)
        );
    }
}
