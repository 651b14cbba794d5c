//! Cover radius of orbit samples on the unit disc around 1: a group whose
//! orbits are dense in C, against the scalar group generated by 2.
//!
//! `cargo run --example density`

use nalgebra::DMatrix;
use orbita::group::{GroupSpec, GroupTolerances};
use orbita::jet::JetMap;
use orbita::orbit::{density_experiment, Polydisc};
use orbita::C64;

fn scalar(z: C64) -> orbita::Result<JetMap> {
    JetMap::linear(&DMatrix::from_element(1, 1, z), 2)
}

pub fn run_example() -> orbita::Result<()> {
    let x = vec![C64::new(1.0, 0.0)];
    let region = Polydisc::unit(&x);
    let dense = GroupSpec::new(
        vec![scalar(C64::from_polar(1.1, 1.0))?, scalar(C64::from_polar(0.85, 2.3))?],
        None,
        GroupTolerances::default(),
    )?;
    let two = GroupSpec::new(vec![scalar(C64::new(2.0, 0.0))?], None, GroupTolerances::default())?;
    for (name, spec) in [("dense", &dense), ("2·I", &two)] {
        let rep = density_experiment(spec, &x, &[3, 4, 5, 6], &region, 0.1)?;
        let eps: Vec<String> = rep.table.iter().map(|r| format!("{:.3}", r.eps_cover)).collect();
        println!("{name}: ε_cover over K = 3..6: {} ({:?})", eps.join(", "), rep.trend);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
