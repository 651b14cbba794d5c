//! Where points sit relative to V, the hyperplanes H_k, and the rank
//! strata Ω_n, Ω̃_n, U.
//!
//! `cargo run --example strata`

use nalgebra::{DMatrix, DVector};
use orbita::group::{GroupSpec, GroupTolerances};
use orbita::jet::JetMap;
use orbita::linalg::{linear_dominance, simultaneous_block_triangularize};
use orbita::orbit::classify_point;
use orbita::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn run_example() -> orbita::Result<()> {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)]));
    let spec = GroupSpec::new(vec![JetMap::linear(&a, 3)?], None, GroupTolerances::default())?;
    let lin = spec.linear_part(6)?;
    let bs = simultaneous_block_triangularize(&lin, &Default::default())?;

    let probes = vec![vec![c(1.0), c(1.0)], vec![c(1.0), c(0.0)], vec![c(0.0), c(-2.0)], vec![c(0.0), c(0.0)]];
    for p in &probes {
        let e = classify_point(&spec, p, 6, 1e-9, Some(&bs), &[1, 2])?;
        println!(
            "({}, {}): r = {}, r~ = {}, U_k {:?}, in U {}, stratum {:?}",
            p[0].re, p[1].re, e.r, e.r_tilde, e.in_u_k, e.in_u, e.stratum
        );
    }
    let rep = linear_dominance(&lin, &bs, &probes);
    println!("linear group dominant: {}, diagnostics: {:?}", rep.dominant, rep.diagnostics);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
