//! The linear map `φ_x` with `φ_x(f(x)) = D₀f·x`, built from sampled
//! orbit data, and the checks of its orbit-conjugation properties.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{
    build_sampled_operators, dominance_from_operators, normalize_fixed_point, GroupPresentation,
    GroupSpec, GroupTolerances, SampledOperators,
};
use crate::linalg;
use crate::orbit::OrbitSample;
use crate::word::Word;
use crate::C64;

/// Round-off allowed on the basis words themselves.
pub const BASIS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct LinearizationMap {
    #[serde(with = "crate::serde_util::matrix")]
    pub matrix: DMatrix<C64>,
    #[serde(with = "crate::serde_util::cvec")]
    pub base_point: Vec<C64>,
    pub basis_words: Vec<Word>,
    /// Max of `‖M w(x) − D₀w·x‖` over the basis words.
    pub basis_residual: f64,
    /// Max over held-out words of `‖M w(x) − D₀w·x‖ / (1 + ‖D₀w·x‖)`.
    pub well_definedness_residual: f64,
    pub worst_word: Option<Word>,
    /// Condition number of `[w₁(x) … w_n(x)]`.
    pub condition_number: f64,
}

impl LinearizationMap {
    pub fn apply(&self, y: &[C64]) -> Vec<C64> {
        linalg::apply(&self.matrix, y)
    }

    /// Distance of `M` from the identity, Frobenius norm.
    pub fn identity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        linalg::frobenius(&(&self.matrix - DMatrix::identity(n, n)))
    }
}

/// Greedy Gram-volume selection of `n` basis words, then `M = D W⁻¹`.
pub fn build_phi_x(ops: &SampledOperators, tol: &GroupTolerances) -> Result<LinearizationMap> {
    let n = ops.base_point.len();
    let dom = dominance_from_operators(ops, tol, None);
    if !dom.dominant_at_x {
        return Err(Error::NotDominantAtPoint {
            reason: format!(
                "r = {}, r~ = {}, kernels {:?}",
                dom.r.rank, dom.r_tilde.rank, dom.kernel.verdict
            ),
        });
    }
    let points: Vec<Vec<C64>> = (0..ops.len()).map(|j| ops.orbit_point(j)).collect();
    let (basis, _) = linalg::greedy_volume_selection(&points, n);
    build_phi_x_with_basis(ops, &basis, tol)
}

/// `M = D W⁻¹` for an explicit choice of basis word indices, validated on
/// every other word. No dominance check.
pub fn build_phi_x_with_basis(ops: &SampledOperators, basis: &[usize], tol: &GroupTolerances) -> Result<LinearizationMap> {
    let n = ops.base_point.len();
    if basis.len() != n || basis.iter().any(|&j| j >= ops.len()) {
        return Err(Error::Contract(format!("need {n} valid basis indices")));
    }
    let w = DMatrix::from_fn(n, n, |i, k| ops.m_phi_x[(i, basis[k])]);
    let d = DMatrix::from_fn(n, n, |i, k| ops.linear_orbit_point(basis[k])[i]);
    let condition_number = linalg::condition_number(&w);
    let w_inv = w
        .clone()
        .try_inverse()
        .filter(|_| condition_number.is_finite() && condition_number < 1.0 / tol.inv)
        .ok_or_else(|| Error::Contract("basis words are linearly dependent".into()))?;
    let m = &d * w_inv;
    let sv = linalg::singular_values(&m);
    if sv.last().map_or(true, |&s| s <= tol.inv) {
        return Err(Error::Contract("linearization matrix is singular".into()));
    }

    let residual = |j: usize| {
        let lhs = linalg::apply(&m, &ops.orbit_point(j));
        let rhs = ops.linear_orbit_point(j);
        (linalg::distance(&lhs, &rhs), linalg::norm(&rhs))
    };
    let basis_residual = basis.iter().map(|&j| residual(j).0).fold(0.0, f64::max);
    let mut worst: Option<(usize, f64)> = None;
    for j in (0..ops.len()).filter(|j| !basis.contains(j)) {
        let (e, scale) = residual(j);
        let rel = e / (1.0 + scale);
        if worst.map_or(true, |(_, b)| rel > b) {
            worst = Some((j, rel));
        }
    }
    let well_definedness_residual = worst.map_or(0.0, |(_, r)| r);
    let worst_word = worst.map(|(j, _)| ops.words[j].clone());
    if well_definedness_residual > tol.residual {
        let word = worst_word.clone().expect("held-out word exists");
        return Err(Error::IllDefinedLinearization {
            word: word.0,
            residual: well_definedness_residual,
            tol: tol.residual,
        });
    }
    Ok(LinearizationMap {
        matrix: m,
        base_point: ops.base_point.clone(),
        basis_words: basis.iter().map(|&j| ops.words[j].clone()).collect(),
        basis_residual,
        well_definedness_residual,
        worst_word,
        condition_number,
    })
}

/// Rows `(word, w(x), M w(x), D₀w·x)` as CSV, complex entries interleaved.
pub fn triples_csv(map: &LinearizationMap, ops: &SampledOperators) -> String {
    let n = ops.base_point.len();
    let mut out = String::from("word");
    for label in ["orbit", "mapped", "linear"] {
        for i in 0..n {
            out.push_str(&format!(",{label}_re{i},{label}_im{i}"));
        }
    }
    out.push('\n');
    for j in 0..ops.len() {
        let p = ops.orbit_point(j);
        let mapped = map.apply(&p);
        let lin = ops.linear_orbit_point(j);
        out.push_str(&ops.words[j].tag());
        for z in p.iter().chain(&mapped).chain(&lin) {
            out.push_str(&format!(",{:e},{:e}", z.re, z.im));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingError {
    pub word: Word,
    pub error: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCheckReport {
    #[serde(with = "crate::serde_util::cvec")]
    pub point: Vec<C64>,
    pub budget: u32,
    pub words: usize,
    /// Max of `‖M w(y) − D₀w·(M y)‖`.
    pub max_error: f64,
    /// Max of the same error divided by `1 + ‖D₀w·(M y)‖`.
    pub max_relative_error: f64,
    pub worst: Option<PairingError>,
    /// Pairs of distinct orbit points whose images coincide.
    pub injectivity_violations: usize,
}

impl OrbitCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_relative_error <= tol && self.injectivity_violations == 0
    }
}

/// Compares `M w(y)` with `D₀w·(M y)` over every budget word.
pub fn pushforward_orbit_check(map: &LinearizationMap, spec: &GroupSpec, y: &[C64], budget: u32) -> Result<OrbitCheckReport> {
    let words = spec.words(budget)?;
    let z = map.apply(y);
    let rows: Vec<(Vec<C64>, Vec<C64>)> = words
        .par_iter()
        .map(|w| {
            let lhs = map.apply(&spec.evaluate_word(w, y)?);
            let rhs = linalg::apply(&spec.realize_word(w)?.jacobian_at_zero(), &z);
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let mut max_error = 0.0_f64;
    let mut max_relative_error = 0.0_f64;
    let mut worst: Option<PairingError> = None;
    for (w, (lhs, rhs)) in words.iter().zip(&rows) {
        let error = linalg::distance(lhs, rhs);
        let relative_error = error / (1.0 + linalg::norm(rhs));
        max_error = max_error.max(error);
        if worst.as_ref().map_or(true, |p| relative_error > p.relative_error) {
            worst = Some(PairingError {
                word: w.clone(),
                error,
                relative_error,
            });
        }
        max_relative_error = max_relative_error.max(relative_error);
    }
    let sep = spec.tolerances().residual;
    let mut injectivity_violations = 0;
    let orbit: Vec<Vec<C64>> = rows.iter().map(|(l, _)| l.clone()).collect();
    let pre: Vec<Vec<C64>> = words
        .iter()
        .map(|w| spec.evaluate_word(w, y))
        .collect::<Result<_>>()?;
    for a in 0..pre.len() {
        for b in a + 1..pre.len() {
            let scale = 1.0 + linalg::norm(&pre[a]).max(linalg::norm(&pre[b]));
            if linalg::distance(&pre[a], &pre[b]) > sep * scale
                && linalg::distance(&orbit[a], &orbit[b]) <= crate::orbit::DEDUP_RADIUS * scale
            {
                injectivity_violations += 1;
            }
        }
    }
    Ok(OrbitCheckReport {
        point: y.to_vec(),
        budget,
        words: words.len(),
        max_error,
        max_relative_error,
        worst,
        injectivity_violations,
    })
}

/// `φ_x(G(x)) = L_G(x)` on the sampled orbit.
pub fn verify_orbit_bijection(map: &LinearizationMap, spec: &GroupSpec, x: &[C64], budget: u32) -> Result<OrbitCheckReport> {
    pushforward_orbit_check(map, spec, x, budget)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureCandidate {
    #[serde(with = "crate::serde_util::cvec")]
    pub point: Vec<C64>,
    /// Distance to the orbit sample.
    pub distance: f64,
    pub in_scope: bool,
    /// Distance of `M y` to the sampled linear orbit.
    pub mapped_distance: f64,
    pub bound: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub eps: f64,
    pub operator_norm: f64,
    pub candidates: Vec<ClosureCandidate>,
    pub violations: usize,
    pub out_of_scope: usize,
}

/// For candidates within `eps` of the orbit sample, checks that `M y` lies
/// within `‖M‖ eps + tol (1 + ‖M y‖)` of the sampled linear orbit.
pub fn closure_compatibility_check(
    map: &LinearizationMap,
    spec: &GroupSpec,
    sample: &OrbitSample,
    candidates: &[Vec<C64>],
    eps: f64,
    tol: f64,
) -> Result<ClosureReport> {
    let x = &sample.base_point;
    let linear: Vec<Vec<C64>> = sample
        .words
        .iter()
        .map(|w| Ok(linalg::apply(&spec.realize_word(w)?.jacobian_at_zero(), &map.apply(x))))
        .collect::<Result<_>>()?;
    let op = linalg::operator_norm(&map.matrix);
    let nearest = |cloud: &[Vec<C64>], y: &[C64]| cloud.iter().map(|p| linalg::distance(p, y)).fold(f64::INFINITY, f64::min);
    let rows: Vec<ClosureCandidate> = candidates
        .iter()
        .map(|y| {
            let distance = nearest(&sample.points, y);
            let z = map.apply(y);
            let mapped_distance = nearest(&linear, &z);
            let in_scope = distance <= eps;
            let bound = op * eps + tol * (1.0 + linalg::norm(&z));
            ClosureCandidate {
                point: y.clone(),
                distance,
                in_scope,
                mapped_distance,
                bound,
                violation: in_scope && mapped_distance > bound,
            }
        })
        .collect();
    Ok(ClosureReport {
        eps,
        operator_norm: op,
        violations: rows.iter().filter(|c| c.violation).count(),
        out_of_scope: rows.iter().filter(|c| !c.in_scope).count(),
        candidates: rows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AffineBaselineReport {
    #[serde(with = "crate::serde_util::cvec")]
    pub fixed_point: Vec<C64>,
    pub budget: u32,
    pub points: usize,
    /// Max relative gap between raw iteration and `T ∘ L_G ∘ T⁻¹`.
    pub conjugation_error: f64,
    /// `‖M − I‖` for the map built on the normalized group.
    pub identity_defect: f64,
    pub pass: bool,
}

/// Tolerance of the affine baseline.
pub const AFFINE_TOL: f64 = 1e-10;

/// For affine generators with a common fixed point `p`: checks
/// `w(x) = D₀w (x − p) + p` at ten random points by iterating the raw
/// generators, and that the linearization of the normalized group is the
/// identity.
pub fn affine_baseline_check(pres: &GroupPresentation, budget: u32, seed: u64) -> Result<AffineBaselineReport> {
    if pres.generators.iter().any(|g| g.total_degree() > 1) {
        return Err(Error::Contract("affine baseline needs generators of degree ≤ 1".into()));
    }
    let normalized = normalize_fixed_point(pres)?;
    let spec = &normalized.spec;
    let p = &normalized.fixed_point;
    let n = pres.n;
    let raw_inverses: Vec<_> = match &pres.inverses {
        Some(inv) => inv.clone(),
        None => spec
            .generators()
            .iter()
            .map(|g| {
                let inv = g.formal_inverse(pres.tol.inv)?;
                let shifted = crate::jet::PolyMap::from_jet(&inv);
                shifted.conjugate_by_translation(&p.iter().map(|z| -z).collect::<Vec<_>>())
            })
            .collect::<Result<_>>()?,
    };
    let words = spec.words(budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<C64>> = (0..10)
        .map(|_| (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let mut conjugation_error = 0.0_f64;
    for w in &words {
        let a = spec.realize_word(w)?.jacobian_at_zero();
        for x in &xs {
            let mut y = x.clone();
            for (i, &k) in w.exponents().iter().enumerate() {
                let g = if k >= 0 { &pres.generators[i] } else { &raw_inverses[i] };
                for _ in 0..k.unsigned_abs() {
                    y = g.evaluate(&y)?;
                }
            }
            let shifted: Vec<C64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            let expected: Vec<C64> = linalg::apply(&a, &shifted).iter().zip(p).map(|(a, b)| a + b).collect();
            let err = linalg::distance(&y, &expected) / (1.0 + linalg::norm(&expected));
            conjugation_error = conjugation_error.max(err);
        }
    }

    let bs_spec = spec.linear_part(budget)?;
    let bs = linalg::simultaneous_block_triangularize(&bs_spec, &Default::default())?;
    let (_, v0) = linalg::canonical_u0(&bs);
    let nv = linalg::norm(&v0);
    let x0: Vec<C64> = v0.iter().map(|z| z / nv).collect();
    let ops = build_sampled_operators(spec, &x0, budget)?;
    let map = build_phi_x(&ops, &pres.tol)?;
    let identity_defect = map.identity_defect();
    Ok(AffineBaselineReport {
        fixed_point: p.clone(),
        budget,
        points: xs.len(),
        conjugation_error,
        identity_defect,
        pass: conjugation_error <= AFFINE_TOL && identity_defect <= AFFINE_TOL,
    })
}
