//! Sampled relative-minimality test for diag(2,3) on the unit polydisc
//! around (1, 1).
//!
//! `cargo run --example minimality`

use nalgebra::{DMatrix, DVector};
use orbita::group::{GroupSpec, GroupTolerances};
use orbita::jet::JetMap;
use orbita::orbit::{relative_minimality_experiment, Polydisc};
use orbita::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn run_example() -> orbita::Result<()> {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)]));
    let spec = GroupSpec::new(vec![JetMap::linear(&a, 3)?], None, GroupTolerances::default())?;
    let x = vec![c(1.0), c(1.0)];
    let region = Polydisc::unit(&x);
    // (1, 0) lies on an invariant hyperplane, outside U
    let extra = vec![vec![c(1.0), c(0.0)]];
    for k in 4..=6 {
        let rep = relative_minimality_experiment(&spec, &x, k, &region, 1e-8, true, &extra)?;
        let worst = rep.candidates.iter().map(|c| c.distance).fold(0.0, f64::max);
        println!(
            "K = {k}: δ = {:.4}, worst candidate distance {:.4}, {} candidates, {} excluded, pass {}",
            rep.baseline,
            worst,
            rep.candidates.len(),
            rep.excluded.len(),
            rep.pass
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
