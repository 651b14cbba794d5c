//! Simultaneous block triangularization of a commuting pair, hidden behind
//! a random change of basis.
//!
//! `cargo run --example normal_form`

use nalgebra::DMatrix;
use orbita::linalg::{simultaneous_block_triangularize, LinearGroupSpec, LinearTolerances, NormalFormOptions};
use orbita::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn run_example() -> orbita::Result<()> {
    // two blocks: a 2×2 Jordan-type block at 3 and a scalar 5
    let k1 = DMatrix::from_row_slice(3, 3, &[c(3.0), c(0.0), c(0.0), c(1.0), c(3.0), c(0.0), c(0.0), c(0.0), c(5.0)]);
    let k2 = DMatrix::from_row_slice(3, 3, &[c(2.0), c(0.0), c(0.0), c(0.5), c(2.0), c(0.0), c(0.0), c(0.0), c(-1.0)]);
    let q = DMatrix::from_row_slice(3, 3, &[c(1.0), c(0.3), c(-0.2), c(0.1), c(1.0), c(0.4), c(-0.5), c(0.2), c(1.0)]);
    let q_inv = q.clone().try_inverse().expect("invertible");
    let gens = vec![&q * &k1 * &q_inv, &q * &k2 * &q_inv];

    let spec = LinearGroupSpec::new(3, gens, 2, LinearTolerances::default())?;
    let bs = simultaneous_block_triangularize(&spec, &NormalFormOptions::default())?;
    println!("block sizes η = {:?}, r = {}", bs.eta, bs.r);
    for (g, eig) in bs.block_eigenvalues.iter().enumerate() {
        let eig: Vec<String> = eig.iter().map(|z| format!("{:.3}", z.re)).collect();
        println!("generator {g}: block eigenvalues {}", eig.join(", "));
    }
    println!("off-pattern residuals {:?}", bs.pattern_residuals);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
