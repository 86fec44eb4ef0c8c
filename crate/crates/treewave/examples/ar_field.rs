//! Synthesize correlated 2D fields from the second-order AR model and check
//! their autocorrelation against theory. Optionally dumps the field as
//! little-endian doubles behind a 16-byte header.
//!
//!     cargo run --example ar_field -- [size] [seed] [dump-path]

use treewave::datagen::{
    ar2_field, ar2_line, empirical_acf, theoretical_acf, write_field, ArFieldSpec,
};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let size: usize = args.get(1).map_or(200, |s| s.parse().unwrap());
    let seed: u64 = args.get(2).map_or(5, |s| s.parse().unwrap());

    for (label, omega) in [
        ("high correlation (pole near DC)", 359.0),
        ("low correlation (oscillatory)", 99.0),
    ] {
        println!("== {label}: rho 0.99, pole angle {omega} deg");
        let line = ar2_line(0.99, omega, 100_000, seed).unwrap();
        let theory = theoretical_acf(0.99, omega, 3);
        for lag in 1..=3 {
            println!(
                "  lag {lag}: empirical {:+.4}, theory {:+.4}",
                empirical_acf(&line, lag),
                theory[lag]
            );
        }
        let spec = ArFieldSpec {
            rho: 0.99,
            omega0_deg: omega,
            size,
            seed,
        };
        let field = ar2_field(&spec).unwrap();
        println!("  {size}x{size} field std dev: {:.1}", field.std_dev());
    }

    if let Some(path) = args.get(3) {
        let spec = ArFieldSpec {
            rho: 0.99,
            omega0_deg: 359.0,
            size,
            seed,
        };
        let field = ar2_field(&spec).unwrap();
        write_field(std::path::Path::new(path), &field).unwrap();
        println!("dumped high-correlation field to {path}");
    }
}
