//! Dead-zone quantization and adaptive arithmetic coding of a detail stream:
//! coded rate versus empirical entropy across quantizer steps.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use treewave::codec::{ac_decode, ac_encode, dequantize, empirical_entropy, quantize, HEADER_BITS};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let normal = Normal::new(0.0, 25.0).unwrap();
    let details: Vec<f64> = (0..2000).map(|_| normal.sample(&mut rng)).collect();

    println!(
        "{:>6} {:>10} {:>12} {:>12} {:>10}",
        "step", "symbols", "entropy b/s", "coded b/s", "max err"
    );
    for step in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let q = quantize(&details, step).unwrap();
        let coded = ac_encode(&q).unwrap();
        let back = ac_decode(&coded).unwrap();
        assert_eq!(back, q, "lossless round trip");
        let recon = dequantize(&q, step).unwrap();
        let max_err = details
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_err <= step);
        let distinct = {
            let mut s = q.clone();
            s.sort_unstable();
            s.dedup();
            s.len()
        };
        println!(
            "{:>6} {:>10} {:>12.3} {:>12.3} {:>10.3}",
            step,
            distinct,
            empirical_entropy(&q),
            (coded.len_bits() - HEADER_BITS) as f64 / q.len() as f64,
            max_err
        );
    }
    println!("\nheader is {HEADER_BITS} bits: alphabet bounds and symbol count");
}
