//! Generate a random sensor network: uniform placement, shortest-path tree
//! toward the central sink, pre-order renumbering, and broadcast links.
//!
//!     cargo run --example build_network -- [nodes] [seed] [fixed-radius]

use treewave::{Network, RadioModel};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nodes: usize = args.get(1).map_or(50, |s| s.parse().unwrap());
    let seed: u64 = args.get(2).map_or(7, |s| s.parse().unwrap());
    let radio = match args.get(3) {
        Some(r) => RadioModel::FixedRange {
            radius: r.parse().unwrap(),
        },
        None => RadioModel::VariableRange,
    };

    let net = Network::generate_connected(nodes, 600.0, radio, seed).expect("connected network");

    let max_depth = net.nodes().map(|n| net.depth(n)).max().unwrap();
    let leaves = net.nodes().filter(|&n| net.is_leaf(n)).count();
    let mean_link: f64 = net
        .nodes()
        .map(|n| net.position(n).dist(&net.position(net.parent(n))))
        .sum::<f64>()
        / nodes as f64;

    println!("{nodes} nodes, radio {radio:?}");
    println!(
        "tree: {} sink children, depth up to {max_depth}, {leaves} leaves, mean link {mean_link:.1} m",
        net.children(net.sink()).len()
    );
    println!("broadcast links: {}", net.broadcast_links().len());

    // Pre-order property: descendants of each node form a contiguous block.
    for n in net.nodes().take(5) {
        let d: Vec<usize> = net.descendants(n).map(|m| m.0).collect();
        println!("node {n}: depth {}, descendants {d:?}", net.depth(n));
    }

    let doc = serde_json::to_string_pretty(&net.to_json()).unwrap();
    println!("--- JSON fixture (first 300 bytes) ---");
    println!("{}", &doc[..doc.len().min(300)]);
}
