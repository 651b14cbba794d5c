//! Finitely generated abelian groups of polynomial automorphisms, their
//! words, and the sampled evaluation (`Φ_x`) and derivative (`φ`) operators.
//!
//! The infinite-dimensional span of the group is replaced by the span of
//! the words `g_1^{k_1} ∘ … ∘ g_m^{k_m}` with `|k_i| ≤ K`. Every verdict in
//! this module is therefore a verdict "at budget K".

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{JetMap, PolyMap};
use crate::linalg::{self, LinearGroupSpec, LinearTolerances, RankInfo};
use crate::word::{enumerate_words, Word};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroupTolerances {
    /// Commutator defect allowed, relative to the product of the largest
    /// coefficients of the pair (floored at 1).
    pub comm: f64,
    /// Relative smallest singular value of an invertible linear part.
    pub inv: f64,
    /// Residual accepted for a common fixed point.
    pub fixed_point: f64,
    /// Relative rank threshold.
    pub rank: f64,
    /// Null spaces agree when every principal angle has cosine ≥ `1 − kernel_cos`.
    pub kernel_cos: f64,
    /// Residual accepted by the linearization checks.
    pub residual: f64,
}

impl Default for GroupTolerances {
    fn default() -> Self {
        GroupTolerances {
            comm: 1e-10,
            inv: 1e-12,
            fixed_point: 1e-8,
            rank: 1e-9,
            kernel_cos: 1e-7,
            residual: 1e-8,
        }
    }
}

impl GroupTolerances {
    pub fn angle(&self) -> f64 {
        (1.0 - self.kernel_cos).acos()
    }

    pub fn linear(&self) -> LinearTolerances {
        LinearTolerances {
            comm: self.comm,
            inv: self.inv,
            rank: self.rank,
            ..LinearTolerances::default()
        }
    }
}

/// Default word budget: 6 for a single generator, 3 otherwise.
pub fn default_budget(generators: usize) -> u32 {
    if generators <= 1 {
        6
    } else {
        3
    }
}

/// Generators as given by the user, possibly fixing a point other than 0.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub n: usize,
    pub degree: usize,
    pub generators: Vec<PolyMap>,
    pub inverses: Option<Vec<PolyMap>>,
    pub fixed_point: Option<Vec<C64>>,
    pub tol: GroupTolerances,
}

/// Outcome of [`normalize_fixed_point`].
#[derive(Debug)]
pub struct Normalized {
    pub spec: GroupSpec,
    /// The common fixed point that was moved to the origin.
    pub fixed_point: Vec<C64>,
    pub residuals: Vec<f64>,
}

/// Conjugates every generator by the translation taking the common fixed
/// point to 0. When no fixed point is supplied it is searched for with a
/// damped Gauss–Newton iteration from the origin.
pub fn normalize_fixed_point(pres: &GroupPresentation) -> Result<Normalized> {
    let n = pres.n;
    if pres.generators.iter().any(|g| g.dim() != n) {
        return Err(Error::Contract("generator dimension differs from n".into()));
    }
    let p = match &pres.fixed_point {
        Some(p) => {
            if p.len() != n {
                return Err(Error::Contract("fixed point has wrong dimension".into()));
            }
            p.clone()
        }
        None => find_common_fixed_point(&pres.generators)?,
    };
    let residuals: Vec<f64> = pres
        .generators
        .iter()
        .map(|g| g.evaluate(&p).map(|gp| linalg::distance(&gp, &p)))
        .collect::<Result<_>>()?;
    let scale = 1.0 + linalg::norm(&p);
    if residuals.iter().any(|&r| r > pres.tol.fixed_point * scale) {
        return Err(Error::NoCommonFixedPoint { residuals });
    }
    let at_origin = p.iter().all(|z| *z == C64::new(0.0, 0.0));
    let to_jet = |g: &PolyMap| -> Result<JetMap> {
        let moved = if at_origin {
            g.clone()
        } else {
            g.conjugate_by_translation(&p)?
        };
        moved.to_jet(pres.degree, pres.tol.fixed_point * scale)
    };
    let generators = pres.generators.iter().map(to_jet).collect::<Result<Vec<_>>>()?;
    let inverses = match &pres.inverses {
        Some(inv) => Some(inv.iter().map(to_jet).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    Ok(Normalized {
        spec: GroupSpec::new(generators, inverses, pres.tol)?,
        fixed_point: p,
        residuals,
    })
}

fn stacked_residual(gens: &[PolyMap], x: &[C64]) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(gens.len() * x.len());
    for g in gens {
        let gx = g.evaluate(x)?;
        out.extend(gx.iter().zip(x).map(|(a, b)| a - b));
    }
    Ok(out)
}

fn find_common_fixed_point(gens: &[PolyMap]) -> Result<Vec<C64>> {
    let n = gens.first().map_or(0, |g| g.dim());
    let mut x = vec![C64::new(0.0, 0.0); n];
    if gens.is_empty() {
        return Ok(x);
    }
    let mut f = stacked_residual(gens, &x)?;
    let mut fnorm = linalg::norm(&f);
    for _ in 0..50 {
        if fnorm <= 1e-15 {
            break;
        }
        let mut jac = DMatrix::zeros(gens.len() * n, n);
        for (i, g) in gens.iter().enumerate() {
            let j = g.jacobian_at(&x) - DMatrix::identity(n, n);
            jac.view_mut((i * n, 0), (n, n)).copy_from(&j);
        }
        let neg: Vec<C64> = f.iter().map(|z| -z).collect();
        let (step, _) = linalg::least_squares(&jac, &neg, 1e-12)?;
        let mut t = 1.0;
        let mut improved = false;
        while t >= 1e-4 {
            let trial: Vec<C64> = x.iter().zip(&step).map(|(a, s)| a + s * t).collect();
            let ft = stacked_residual(gens, &trial)?;
            let nt = linalg::norm(&ft);
            if nt < fnorm {
                x = trial;
                f = ft;
                fnorm = nt;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(x)
}

/// A group normalized so that every generator fixes the origin.
///
/// Word jets are memoized by multi-exponent; each entry is a pure function
/// of its key, so concurrent fills agree.
pub struct GroupSpec {
    n: usize,
    d: usize,
    generators: Vec<JetMap>,
    inverses: Vec<JetMap>,
    tol: GroupTolerances,
    powers: Mutex<HashMap<(usize, i32), Arc<JetMap>>>,
    words: Mutex<HashMap<Word, Arc<JetMap>>>,
}

impl std::fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroupSpec")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("generators", &self.generators)
            .finish()
    }
}

impl Clone for GroupSpec {
    fn clone(&self) -> Self {
        GroupSpec {
            n: self.n,
            d: self.d,
            generators: self.generators.clone(),
            inverses: self.inverses.clone(),
            tol: self.tol,
            powers: Mutex::new(HashMap::new()),
            words: Mutex::new(HashMap::new()),
        }
    }
}

impl GroupSpec {
    /// Validates invertibility and pairwise commutation. Missing inverses
    /// are computed as formal inverses.
    pub fn new(generators: Vec<JetMap>, inverses: Option<Vec<JetMap>>, tol: GroupTolerances) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::Contract("a group needs at least one generator".into()))?;
        let (n, d) = (first.dim(), first.degree());
        if generators.iter().any(|g| g.dim() != n || g.degree() != d) {
            return Err(Error::Contract("generators disagree on dimension or degree".into()));
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                let (a, b) = (&generators[i], &generators[j]);
                let defect = a.commutator_defect(b)?;
                let scale = (a.max_coefficient() * b.max_coefficient()).max(1.0);
                if defect > tol.comm * scale {
                    return Err(Error::NotAbelian {
                        i,
                        j,
                        defect,
                        tol: tol.comm * scale,
                    });
                }
            }
        }
        let inverses = match inverses {
            Some(inv) => {
                if inv.len() != generators.len() {
                    return Err(Error::Contract("one inverse per generator required".into()));
                }
                let id = JetMap::identity(n, d)?;
                for (g, h) in generators.iter().zip(&inv) {
                    let err = g.compose(h)?.distance(&id)?;
                    if err > 1e-10 * g.max_coefficient().max(1.0) {
                        return Err(Error::Contract(format!(
                            "supplied inverse is off by {err:e}"
                        )));
                    }
                }
                inv
            }
            None => generators
                .iter()
                .map(|g| g.formal_inverse(tol.inv))
                .collect::<Result<_>>()?,
        };
        Ok(GroupSpec {
            n,
            d,
            generators,
            inverses,
            tol,
            powers: Mutex::new(HashMap::new()),
            words: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn generators(&self) -> &[JetMap] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn tolerances(&self) -> &GroupTolerances {
        &self.tol
    }

    /// Same group with one generator replaced.
    pub fn with_generator(&self, i: usize, g: JetMap) -> Result<GroupSpec> {
        let mut gens = self.generators.clone();
        gens[i] = g;
        GroupSpec::new(gens, None, self.tol)
    }

    pub fn words(&self, budget: u32) -> Result<Vec<Word>> {
        enumerate_words(self.generators.len(), budget)
    }

    /// The linearized group `L_G` generated by the Jacobians at 0.
    pub fn linear_part(&self, budget: u32) -> Result<LinearGroupSpec> {
        LinearGroupSpec::new(
            self.n,
            self.generators.iter().map(|g| g.jacobian_at_zero()).collect(),
            budget,
            self.tol.linear(),
        )
    }

    fn power(&self, i: usize, e: i32) -> Result<Arc<JetMap>> {
        if let Some(p) = self.powers.lock().expect("memo poisoned").get(&(i, e)) {
            return Ok(p.clone());
        }
        let base = if e >= 0 { &self.generators[i] } else { &self.inverses[i] };
        let value = Arc::new(base.power(e.unsigned_abs())?);
        let mut memo = self.powers.lock().expect("memo poisoned");
        Ok(memo.entry((i, e)).or_insert(value).clone())
    }

    /// Jet of `g_1^{k_1} ∘ … ∘ g_m^{k_m}`.
    pub fn realize_word(&self, word: &Word) -> Result<Arc<JetMap>> {
        if word.len() != self.generators.len() {
            return Err(Error::Contract(format!(
                "word has {} exponents, group has {} generators",
                word.len(),
                self.generators.len()
            )));
        }
        if let Some(w) = self.words.lock().expect("memo poisoned").get(word) {
            return Ok(w.clone());
        }
        let mut acc = JetMap::identity(self.n, self.d)?;
        for (i, &k) in word.exponents().iter().enumerate() {
            if k != 0 {
                let p = self.power(i, k)?;
                acc = acc.compose(&p)?;
            }
        }
        let value = Arc::new(acc);
        let mut memo = self.words.lock().expect("memo poisoned");
        Ok(memo.entry(word.clone()).or_insert(value).clone())
    }

    /// Distance between the word composed left-to-right and right-to-left;
    /// zero up to round-off for a commuting family.
    pub fn word_order_defect(&self, word: &Word) -> Result<f64> {
        let forward = self.realize_word(word)?;
        let mut reverse = JetMap::identity(self.n, self.d)?;
        for (i, &k) in word.exponents().iter().enumerate().rev() {
            if k != 0 {
                let p = self.power(i, k)?;
                reverse = reverse.compose(&p)?;
            }
        }
        forward.distance(&reverse)
    }

    pub fn evaluate_word(&self, word: &Word, x: &[C64]) -> Result<Vec<C64>> {
        self.realize_word(word)?.evaluate(x)
    }
}

/// `Φ_x` and `φ` restricted to the span of a word list.
#[derive(Clone, Debug)]
pub struct SampledOperators {
    pub words: Vec<Word>,
    pub base_point: Vec<C64>,
    /// `n × s`; column `j` is `w_j(x)`.
    pub m_phi_x: DMatrix<C64>,
    /// `n² × s`; column `j` is the column-major vectorization of `D₀w_j`.
    pub m_dphi: DMatrix<C64>,
    pub jacobians: Vec<DMatrix<C64>>,
    /// Largest top-degree coefficient over all realized words.
    pub truncation_indicator: f64,
}

impl SampledOperators {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn orbit_point(&self, j: usize) -> Vec<C64> {
        self.m_phi_x.column(j).iter().copied().collect()
    }

    /// `D₀w_j · x`.
    pub fn linear_orbit_point(&self, j: usize) -> Vec<C64> {
        linalg::apply(&self.jacobians[j], &self.base_point)
    }
}

pub fn build_sampled_operators(spec: &GroupSpec, x: &[C64], budget: u32) -> Result<SampledOperators> {
    let words = spec.words(budget)?;
    build_sampled_operators_for_words(spec, x, words)
}

/// Same as [`build_sampled_operators`] over an explicit word list.
pub fn build_sampled_operators_for_words(spec: &GroupSpec, x: &[C64], words: Vec<Word>) -> Result<SampledOperators> {
    if x.len() != spec.n {
        return Err(Error::Contract("base point dimension does not match the group".into()));
    }
    if words.is_empty() {
        return Err(Error::Contract("empty word list".into()));
    }
    let columns: Vec<(Vec<C64>, DMatrix<C64>, f64)> = words
        .par_iter()
        .map(|w| {
            let jet = spec.realize_word(w)?;
            Ok((jet.evaluate(x)?, jet.jacobian_at_zero(), jet.top_degree_weight()))
        })
        .collect::<Result<_>>()?;
    let n = spec.n;
    let s = words.len();
    let m_phi_x = DMatrix::from_fn(n, s, |i, j| columns[j].0[i]);
    let m_dphi = DMatrix::from_fn(n * n, s, |i, j| columns[j].1[(i % n, i / n)]);
    let truncation_indicator = columns.iter().fold(0.0, |m, c| f64::max(m, c.2));
    Ok(SampledOperators {
        words,
        base_point: x.to_vec(),
        m_phi_x,
        m_dphi,
        jacobians: columns.into_iter().map(|c| c.1).collect(),
        truncation_indicator,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSide {
    /// `α ∈ ker φ` with `Φ_x(α) ≠ 0`.
    KernelOfDerivative,
    /// `α ∈ ker Φ_x` with `φ(α) ≠ 0`.
    KernelOfEvaluation,
}

/// A coefficient vector over the sampled words separating the two kernels.
#[derive(Clone, Debug, Serialize)]
pub struct KernelWitness {
    pub side: WitnessSide,
    /// Scaled so the last coefficient that is not negligible equals 1.
    #[serde(with = "crate::serde_util::cvec")]
    pub coefficients: Vec<C64>,
    /// Norm of the image of `coefficients` under the operator that does
    /// not annihilate it.
    pub image_norm: f64,
    /// Same image norm for the unit-norm version of the witness.
    pub unit_image_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub verdict: KernelVerdict,
    pub null_dim_evaluation: usize,
    pub null_dim_derivative: usize,
    pub max_principal_angle: f64,
    pub angle_tolerance: f64,
    pub witness: Option<KernelWitness>,
}

/// Compares `ker Φ_x` with `ker φ` on the sampled span.
///
/// Both operators are rescaled by the same positive diagonal on the word
/// coordinates (which maps null spaces to null spaces) before the null
/// spaces are extracted at relative tolerance `tol`.
pub fn kernel_consistency(ops: &SampledOperators, tol: f64, kernel_cos: f64) -> KernelReport {
    let s = ops.len();
    let scale: Vec<f64> = (0..s)
        .map(|j| {
            let a = ops.m_phi_x.column(j).norm();
            let b = ops.m_dphi.column(j).norm();
            let m = a.max(b);
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let rescale = |m: &DMatrix<C64>| {
        let mut out = m.clone();
        for (j, &c) in scale.iter().enumerate() {
            out.column_mut(j).scale_mut(c);
        }
        out
    };
    let phi_x = rescale(&ops.m_phi_x);
    let dphi = rescale(&ops.m_dphi);
    let null_eval = linalg::null_space(&phi_x, tol);
    let null_deriv = linalg::null_space(&dphi, tol);
    let angle = linalg::max_principal_angle(&null_eval, &null_deriv);
    let angle_tolerance = (1.0 - kernel_cos).acos();
    let consistent = null_eval.ncols() == null_deriv.ncols() && angle <= angle_tolerance;

    let witness = if consistent {
        None
    } else {
        let a = best_separator(&null_deriv, &phi_x);
        let b = best_separator(&null_eval, &dphi);
        let rel_a = a.as_ref().map_or(0.0, |(_, v)| v / linalg::operator_norm(&phi_x).max(f64::MIN_POSITIVE));
        let rel_b = b.as_ref().map_or(0.0, |(_, v)| v / linalg::operator_norm(&dphi).max(f64::MIN_POSITIVE));
        let (side, alpha_scaled, op) = if rel_a >= rel_b {
            (WitnessSide::KernelOfDerivative, a.map(|x| x.0), &ops.m_phi_x)
        } else {
            (WitnessSide::KernelOfEvaluation, b.map(|x| x.0), &ops.m_dphi)
        };
        alpha_scaled.map(|alpha_scaled| {
            let alpha: Vec<C64> = alpha_scaled.iter().zip(&scale).map(|(a, c)| a * *c).collect();
            let unit = linalg::norm(&alpha);
            let unit_alpha: Vec<C64> = alpha.iter().map(|a| a / unit).collect();
            let unit_image_norm = linalg::norm(&linalg::apply(op, &unit_alpha));
            let peak = alpha.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = alpha
                .iter()
                .rev()
                .find(|z| z.norm() > 1e-6 * peak)
                .copied()
                .unwrap_or(C64::new(1.0, 0.0));
            let coefficients: Vec<C64> = alpha.iter().map(|a| a / lead).collect();
            let image_norm = linalg::norm(&linalg::apply(op, &coefficients));
            KernelWitness {
                side,
                coefficients,
                image_norm,
                unit_image_norm,
            }
        })
    };
    KernelReport {
        verdict: if consistent {
            KernelVerdict::Consistent
        } else {
            KernelVerdict::Inconsistent
        },
        null_dim_evaluation: null_eval.ncols(),
        null_dim_derivative: null_deriv.ncols(),
        max_principal_angle: angle,
        angle_tolerance,
        witness,
    }
}

/// Unit vector in the span of `basis` maximizing `‖op α‖`, with that norm.
fn best_separator(basis: &DMatrix<C64>, op: &DMatrix<C64>) -> Option<(Vec<C64>, f64)> {
    if basis.ncols() == 0 {
        return None;
    }
    let image = op * basis;
    let svd = image.clone().svd(false, true);
    let v_t = svd.v_t?;
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, -1.0), |best, (i, s)| if s > best.1 { (i, s) } else { best });
    let coeffs: Vec<C64> = (0..basis.ncols()).map(|k| v_t[(idx, k)].conj()).collect();
    let alpha = basis * nalgebra::DVector::from_vec(coeffs);
    Some((alpha.iter().copied().collect(), sigma))
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    #[serde(with = "crate::serde_util::cvec")]
    pub point: Vec<C64>,
    pub budget: Option<u32>,
    pub words: usize,
    /// `r(x) = dim E(x)`.
    pub r: RankInfo,
    /// `r̃_x = dim Ẽ(x)`.
    pub r_tilde: RankInfo,
    pub kernel: KernelReport,
    pub dominant_at_x: bool,
    pub truncation_indicator: f64,
}

/// Ranks of the sampled orbit and linear orbit at `x`, plus the kernel
/// verdict; `x` witnesses dominance when both ranks are `n` and the
/// kernels agree.
pub fn dominance_report(spec: &GroupSpec, x: &[C64], budget: u32) -> Result<DominanceReport> {
    let ops = build_sampled_operators(spec, x, budget)?;
    Ok(dominance_from_operators(&ops, &spec.tol, Some(budget)))
}

pub fn dominance_from_operators(ops: &SampledOperators, tol: &GroupTolerances, budget: Option<u32>) -> DominanceReport {
    let n = ops.base_point.len();
    let r = linalg::matrix_rank(&ops.m_phi_x, tol.rank);
    let linear_points: Vec<Vec<C64>> = (0..ops.len()).map(|j| ops.linear_orbit_point(j)).collect();
    let lin = DMatrix::from_fn(n, ops.len(), |i, j| linear_points[j][i]);
    let r_tilde = linalg::matrix_rank(&lin, tol.rank);
    let kernel = kernel_consistency(ops, tol.rank, tol.kernel_cos);
    let dominant_at_x = r.rank == n && r_tilde.rank == n && kernel.verdict == KernelVerdict::Consistent;
    DominanceReport {
        point: ops.base_point.clone(),
        budget,
        words: ops.len(),
        r,
        r_tilde,
        kernel,
        dominant_at_x,
        truncation_indicator: ops.truncation_indicator,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn v(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| c(x)).collect()
    }

    fn resonant() -> JetMap {
        JetMap::from_terms(2, 8, [(0, vec![1, 0], c(2.0)), (1, vec![0, 1], c(4.0)), (1, vec![2, 0], c(1.0))]).unwrap()
    }

    fn diag(xs: &[f64], d: usize) -> JetMap {
        JetMap::linear(&DMatrix::from_diagonal(&DVector::from_vec(v(xs))), d).unwrap()
    }

    fn spec(gens: Vec<JetMap>) -> GroupSpec {
        GroupSpec::new(gens, None, GroupTolerances::default()).unwrap()
    }

    #[test]
    fn realize_examples() {
        let g = spec(vec![resonant()]);
        assert_eq!(*g.realize_word(&Word(vec![0])).unwrap(), JetMap::identity(2, 8).unwrap());
        let h3 = g.realize_word(&Word(vec![3])).unwrap();
        assert_eq!(h3.coefficient(0, &[1, 0]), c(8.0));
        assert_eq!(h3.coefficient(1, &[0, 1]), c(64.0));
        assert_eq!(h3.coefficient(1, &[2, 0]), c(48.0));

        let two = spec(vec![resonant(), resonant()]);
        let w = two.realize_word(&Word(vec![1, -1])).unwrap();
        assert!(w.distance(&JetMap::identity(2, 8).unwrap()).unwrap() < 1e-12);
        assert!(two.realize_word(&Word(vec![1])).is_err());
    }

    #[test]
    fn sampled_operator_examples() {
        let id = spec(vec![JetMap::identity(2, 4).unwrap()]);
        let ops = build_sampled_operators_for_words(&id, &v(&[0.5, 2.0]), vec![Word(vec![0])]).unwrap();
        assert_eq!(ops.orbit_point(0), v(&[0.5, 2.0]));
        assert_eq!(ops.m_dphi.column(0).iter().copied().collect::<Vec<_>>(), v(&[1.0, 0.0, 0.0, 1.0]));

        let d = spec(vec![diag(&[2.0, 3.0], 4)]);
        let ops = build_sampled_operators(&d, &v(&[1.0, 1.0]), 1).unwrap();
        let col = |k: i32| ops.words.iter().position(|w| w.0 == vec![k]).unwrap();
        assert!(linalg::distance(&ops.orbit_point(col(-1)), &v(&[0.5, 1.0 / 3.0])) < 1e-15);
        assert_eq!(ops.orbit_point(col(0)), v(&[1.0, 1.0]));
        assert_eq!(ops.orbit_point(col(1)), v(&[2.0, 3.0]));

        let h = spec(vec![resonant()]);
        let ops = build_sampled_operators(&h, &v(&[1.0, 1.0]), 2).unwrap();
        let j = ops.words.iter().position(|w| w.0 == vec![2]).unwrap();
        assert_eq!(ops.orbit_point(j), v(&[4.0, 24.0]));
    }

    #[test]
    fn kernel_examples() {
        let d = spec(vec![diag(&[2.0, 3.0], 4)]);
        let ops = build_sampled_operators(&d, &v(&[1.0, 1.0]), 1).unwrap();
        let rep = kernel_consistency(&ops, 1e-9, 1e-7);
        assert_eq!(rep.verdict, KernelVerdict::Consistent);
        assert_eq!(rep.null_dim_evaluation, 1);

        let h = spec(vec![resonant()]);
        let words = vec![Word(vec![0]), Word(vec![1]), Word(vec![2])];
        let ops = build_sampled_operators_for_words(&h, &v(&[1.0, 1.0]), words).unwrap();
        let rep = kernel_consistency(&ops, 1e-9, 1e-7);
        assert_eq!(rep.verdict, KernelVerdict::Inconsistent);
        let w = rep.witness.unwrap();
        assert_eq!(w.side, WitnessSide::KernelOfDerivative);
        assert!(linalg::distance(&w.coefficients, &v(&[8.0, -6.0, 1.0])) < 1e-9);
        assert!((w.image_norm - 2.0).abs() < 1e-9);

        let id = spec(vec![JetMap::identity(2, 3).unwrap()]);
        let ops = build_sampled_operators_for_words(&id, &v(&[1.0, 2.0]), vec![Word(vec![0])]).unwrap();
        assert_eq!(kernel_consistency(&ops, 1e-9, 1e-7).verdict, KernelVerdict::Consistent);
    }

    #[test]
    fn dominance_examples() {
        let d = spec(vec![diag(&[2.0, 3.0], 4)]);
        let rep = dominance_report(&d, &v(&[1.0, 1.0]), 3).unwrap();
        assert_eq!((rep.r.rank, rep.r_tilde.rank), (2, 2));
        assert!(rep.dominant_at_x);

        let h = spec(vec![resonant()]);
        let rep = dominance_report(&h, &v(&[1.0, 1.0]), 3).unwrap();
        assert_eq!((rep.r.rank, rep.r_tilde.rank), (2, 2));
        assert_eq!(rep.kernel.verdict, KernelVerdict::Inconsistent);
        assert!(!rep.dominant_at_x);

        let rep = dominance_report(&d, &v(&[0.0, 0.0]), 2).unwrap();
        assert_eq!(rep.r.rank, 0);
        assert!(!rep.dominant_at_x);
    }

    #[test]
    fn normalization_examples() {
        let f = PolyMap::from_terms(1, [(0, vec![1], c(2.0)), (0, vec![0], c(-1.0))]).unwrap();
        let pres = GroupPresentation {
            n: 1,
            degree: 4,
            generators: vec![f.clone()],
            inverses: None,
            fixed_point: None,
            tol: GroupTolerances::default(),
        };
        let norm = normalize_fixed_point(&pres).unwrap();
        assert!((norm.fixed_point[0] - c(1.0)).norm() < 1e-12);
        assert!(norm.spec.generators()[0].distance(&diag(&[2.0], 4)).unwrap() < 1e-12);

        // already at the origin: unchanged
        let lin = PolyMap::from_jet(&diag(&[2.0, 3.0], 4));
        let pres0 = GroupPresentation {
            n: 2,
            degree: 4,
            generators: vec![lin],
            inverses: None,
            fixed_point: Some(v(&[0.0, 0.0])),
            tol: GroupTolerances::default(),
        };
        let norm0 = normalize_fixed_point(&pres0).unwrap();
        assert_eq!(norm0.spec.generators()[0], diag(&[2.0, 3.0], 4));

        // 2x - 1 fixes 1, 3x - 6 fixes 3
        let g = PolyMap::from_terms(1, [(0, vec![1], c(3.0)), (0, vec![0], c(-6.0))]).unwrap();
        let bad = GroupPresentation {
            generators: vec![f, g],
            ..pres
        };
        assert!(matches!(normalize_fixed_point(&bad), Err(Error::NoCommonFixedPoint { .. })));
    }

    #[test]
    fn non_commuting_generators_rejected() {
        let f = diag(&[2.0, 1.0], 3);
        let g = JetMap::from_terms(2, 3, [(0, vec![1, 0], c(1.0)), (0, vec![0, 1], c(1.0)), (1, vec![0, 1], c(1.0))]).unwrap();
        assert!(matches!(GroupSpec::new(vec![f, g], None, GroupTolerances::default()), Err(Error::NotAbelian { .. })));
    }
}
