//! Composition, powers and formal inverses of truncated polynomial maps.
//!
//! `cargo run --example jet_algebra`

use orbita::jet::JetMap;
use orbita::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn run_example() -> orbita::Result<()> {
    // h(z, w) = (2z, 4w + z²)
    let h = JetMap::from_terms(2, 8, [(0, vec![1, 0], c(2.0)), (1, vec![0, 1], c(4.0)), (1, vec![2, 0], c(1.0))])?;
    for k in 1..=4u32 {
        let hk = h.power(k)?;
        println!("h^{k}: z^2 coefficient of w-component = {}", hk.coefficient(1, &[2, 0]).re);
    }

    let inv = h.formal_inverse(1e-12)?;
    let round_trip = h.compose(&inv)?.distance(&JetMap::identity(2, 8)?)?;
    println!("h∘h⁻¹ differs from the identity by {round_trip:.1e}");
    println!("D₀(h∘h) = {}", h.compose(&h)?.jacobian_at_zero());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
