//! The linearizing map φ_x for an affine group after moving its fixed
//! point to the origin, and its orbit checks.
//!
//! `cargo run --example linearize`

use nalgebra::{DMatrix, DVector};
use orbita::group::{build_sampled_operators, normalize_fixed_point, GroupPresentation, GroupTolerances};
use orbita::jet::{JetMap, PolyMap};
use orbita::linearization::{affine_baseline_check, build_phi_x, pushforward_orbit_check, verify_orbit_bijection};
use orbita::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn run_example() -> orbita::Result<()> {
    // f(x) = A(x − p) + p with A = diag(2, 3), p = (1, 0)
    let a = JetMap::linear(&DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)])), 1)?;
    let f = PolyMap::with_constant(&a, &[c(-1.0), c(0.0)])?;
    let pres = GroupPresentation {
        n: 2,
        degree: 4,
        generators: vec![f],
        inverses: None,
        fixed_point: None,
        tol: GroupTolerances::default(),
    };
    let normalized = normalize_fixed_point(&pres)?;
    println!("fixed point {:?}", normalized.fixed_point);

    let spec = &normalized.spec;
    let x = vec![c(1.0), c(1.0)];
    let ops = build_sampled_operators(spec, &x, 6)?;
    let map = build_phi_x(&ops, spec.tolerances())?;
    println!("M = {}", map.matrix);
    println!("basis words {:?}, held-out residual {:.1e}", map.basis_words, map.well_definedness_residual);

    let bij = verify_orbit_bijection(&map, spec, &x, 6)?;
    println!("orbit bijection: max error {:.1e}, injectivity violations {}", bij.max_error, bij.injectivity_violations);
    let push = pushforward_orbit_check(&map, spec, &[c(5.0), c(7.0)], 6)?;
    println!("push-forward at (5,7): max error {:.1e}", push.max_error);

    let base = affine_baseline_check(&pres, 6, 1)?;
    println!("affine baseline: conjugation error {:.1e}, ‖M − I‖ {:.1e}, pass {}", base.conjugation_error, base.identity_defect, base.pass);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
