#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use orbita::group::{GroupSpec, GroupTolerances};
use orbita::jet::JetMap;
use orbita::C64;
use rand::Rng;

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn v(xs: &[f64]) -> Vec<C64> {
    xs.iter().map(|&x| c(x)).collect()
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

pub fn random_complex<R: Rng>(rng: &mut R, scale: f64) -> C64 {
    C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Complex number with modulus in `[lo, hi]` and random argument.
pub fn random_unitish<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.gen_range(lo..hi), rng.gen_range(-3.1..3.1))
}

pub fn diag_jet(entries: &[C64], d: usize) -> JetMap {
    JetMap::linear(&DMatrix::from_diagonal(&DVector::from_row_slice(entries)), d).unwrap()
}

/// `φ(z, w) = (z + a w², w + b z²)`.
pub fn shear(a: C64, b: C64, d: usize) -> JetMap {
    JetMap::from_terms(
        2,
        d,
        [(0, vec![1, 0], c(1.0)), (0, vec![0, 2], a), (1, vec![0, 1], c(1.0)), (1, vec![2, 0], b)],
    )
    .unwrap()
}

/// A commuting pair `φ D₁ φ⁻¹`, `φ D₂ φ⁻¹` with diagonal `D_i`.
pub fn commuting_pair<R: Rng>(rng: &mut R, d: usize) -> (JetMap, JetMap) {
    let phi = shear(random_complex(rng, 0.5), random_complex(rng, 0.5), d);
    let phi_inv = phi.formal_inverse(1e-12).unwrap();
    let mut conj = || {
        let dm = diag_jet(&[random_unitish(rng, 0.7, 1.4), random_unitish(rng, 0.7, 1.4)], d);
        phi.compose(&dm).unwrap().compose(&phi_inv).unwrap()
    };
    (conj(), conj())
}

pub fn resonant() -> JetMap {
    JetMap::from_terms(2, 8, [(0, vec![1, 0], c(2.0)), (1, vec![0, 1], c(4.0)), (1, vec![2, 0], c(1.0))]).unwrap()
}

pub fn spec(gens: Vec<JetMap>) -> GroupSpec {
    GroupSpec::new(gens, None, GroupTolerances::default()).unwrap()
}

pub fn max_coefficient_gap(a: &JetMap, b: &JetMap) -> f64 {
    a.sub(b).unwrap().max_coefficient()
}

/// Lower-triangular nilpotent block with ones on the subdiagonal.
pub fn shift_block(s: usize) -> DMatrix<C64> {
    DMatrix::from_fn(s, s, |i, j| if i == j + 1 { c(1.0) } else { c(0.0) })
}

/// One generator of a planted block-triangular group: block `k` is
/// `λ_k I + Σ_j coeffs_k[j] N_k^(j+1)` with the shared nilpotent `N_k`.
pub fn planted_generator(eta: &[usize], nilpotents: &[DMatrix<C64>], lambdas: &[C64], coeffs: &[Vec<C64>]) -> DMatrix<C64> {
    let n: usize = eta.iter().sum();
    let mut out = DMatrix::zeros(n, n);
    let mut off = 0;
    for (k, &s) in eta.iter().enumerate() {
        let mut block = DMatrix::identity(s, s) * lambdas[k];
        let mut power = DMatrix::identity(s, s);
        for &a in &coeffs[k] {
            power = &power * &nilpotents[k];
            block += &power * a;
        }
        out.view_mut((off, off), (s, s)).copy_from(&block);
        off += s;
    }
    out
}

/// Every partition of `n`, parts in nonincreasing order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            prefix.push(p);
            go(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Well-conditioned random change of basis `I + 0.3 R`.
pub fn random_basis<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| random_complex(rng, 0.3))
}

/// Strips the timestamp line from a pretty-printed report.
pub fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

/// Planted two-generator group in `K*_{η,r}` behind a random basis change,
/// with cyclic nilpotent parts so the group is dominant.
pub struct Planted {
    pub eta: Vec<usize>,
    pub q: DMatrix<C64>,
    pub lambdas: Vec<Vec<C64>>,
    pub gens: Vec<DMatrix<C64>>,
}

pub fn planted<R: Rng>(r: &mut R, eta: &[usize]) -> Planted {
    let nil: Vec<_> = eta.iter().map(|&s| shift_block(s)).collect();
    // first generator separates every block; the second may repeat a value exactly
    let lambdas: Vec<Vec<C64>> = (0..2)
        .map(|g| {
            let mut ls: Vec<C64> = Vec::new();
            while ls.len() < eta.len() {
                if g == 1 && !ls.is_empty() && r.gen_bool(0.3) {
                    ls.push(ls[ls.len() - 1]);
                    continue;
                }
                let z = random_unitish(r, 0.6, 1.8);
                if ls.iter().all(|w| (z - w).norm() > 0.4) {
                    ls.push(z);
                }
            }
            ls
        })
        .collect();
    let q = random_basis(r, eta.iter().sum());
    let q_inv = q.clone().try_inverse().unwrap();
    let gens = (0..2)
        .map(|g| {
            let coeffs: Vec<Vec<C64>> = eta
                .iter()
                .map(|&s| {
                    (1..s)
                        .map(|j| if g == 0 && j == 1 { c(1.0) } else { random_complex(r, 0.5) })
                        .collect()
                })
                .collect();
            &q * planted_generator(eta, &nil, &lambdas[g], &coeffs) * &q_inv
        })
        .collect();
    Planted {
        eta: eta.to_vec(),
        q,
        lambdas,
        gens,
    }
}
