//! Round-trip exactness of arbitrary unidirectional transforms: random
//! orthogonal local matrices plus dense broadcast matrices over the pruned
//! causal sets, encoded forward in slot order and decoded in reverse.
//!
//!     cargo run --example transform_roundtrip -- [networks] [epochs]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treewave::scheduling::{derive_causal_sets, prune_for_decodability};
use treewave::zoo::build_random;
use treewave::{Network, RadioModel, Schedule};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let networks: u64 = args.get(1).map_or(20, |s| s.parse().unwrap());
    let epochs: usize = args.get(2).map_or(50, |s| s.parse().unwrap());

    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..networks {
        let net =
            Network::generate_connected(50, 600.0, RadioModel::FixedRange { radius: 170.0 }, seed)
                .unwrap();
        let schedule = Schedule::assign(&net);
        let causal = prune_for_decodability(&derive_causal_sets(&net, &schedule), &net, &schedule);
        let links = causal.total_links();
        let t = build_random(net, schedule, causal, seed ^ 0xfeed).unwrap();

        let mut net_worst: f64 = 0.0;
        for _ in 0..epochs {
            let x: Vec<f64> = (0..50).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let y = t.encode_epoch(&x).unwrap();
            let back = t.decode_epoch(&y.values).unwrap();
            let scale = x.iter().fold(1e-300f64, |a, v| a.max(v.abs()));
            for i in 0..50 {
                net_worst = net_worst.max((back[i] - x[i]).abs() / scale);
            }
        }
        worst = worst.max(net_worst);
        println!(
            "network {seed}: {links} broadcast sources used, worst relative error {net_worst:.2e}"
        );
    }
    println!("\noverall worst relative round-trip error: {worst:.2e}");
    assert!(worst < 1e-9);
}
