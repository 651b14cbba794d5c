//! Ranks of the sampled orbit and the kernel test at a point, for a
//! linear group and for the resonant map (2z, 4w + z²).
//!
//! `cargo run --example dominance`

use nalgebra::{DMatrix, DVector};
use orbita::group::{dominance_report, GroupSpec, GroupTolerances};
use orbita::jet::JetMap;
use orbita::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn run_example() -> orbita::Result<()> {
    let x = vec![c(1.0), c(1.0)];

    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)]));
    let linear = GroupSpec::new(vec![JetMap::linear(&a, 4)?], None, GroupTolerances::default())?;
    let rep = dominance_report(&linear, &x, 6)?;
    println!("diag(2,3): r = {}, r~ = {}, kernels {:?}, dominant {}", rep.r.rank, rep.r_tilde.rank, rep.kernel.verdict, rep.dominant_at_x);

    let h = JetMap::from_terms(2, 8, [(0, vec![1, 0], c(2.0)), (1, vec![0, 1], c(4.0)), (1, vec![2, 0], c(1.0))])?;
    let resonant = GroupSpec::new(vec![h], None, GroupTolerances::default())?;
    let rep = dominance_report(&resonant, &x, 3)?;
    println!("resonant: kernels {:?}", rep.kernel.verdict);
    if let Some(w) = &rep.kernel.witness {
        let coeffs: Vec<String> = w.coefficients.iter().map(|z| format!("{:.3}", z.re)).collect();
        println!("  witness over words {:?}: [{}], image norm {:.6}", w.side, coeffs.join(", "), w.image_norm);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
