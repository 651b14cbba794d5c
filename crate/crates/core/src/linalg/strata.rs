//! Abelian linear groups: the span `vect(L)`, the canonical vector `u₀`,
//! the strata `V` / `H_k`, span transitions and dominance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::normal_form::BlockStructure;
use super::{apply, frobenius, least_squares, matrix_rank, norm, vectorize, RankInfo};
use crate::error::{Error, Result};
use crate::word::{enumerate_words, Word};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearTolerances {
    /// `‖AB − BA‖_F ≤ comm · ‖A‖_F ‖B‖_F`.
    pub comm: f64,
    /// Smallest singular value must exceed `inv · σ_max`.
    pub inv: f64,
    /// Relative rank threshold.
    pub rank: f64,
    /// Pivot threshold when orthonormalizing the word span.
    pub span: f64,
    /// Acceptable residual of a span transition, relative to `max(1, ‖v‖)`.
    pub solve: f64,
}

impl Default for LinearTolerances {
    fn default() -> Self {
        LinearTolerances {
            comm: 1e-10,
            inv: 1e-12,
            rank: 1e-9,
            span: 1e-10,
            solve: 1e-9,
        }
    }
}

/// A finitely generated abelian subgroup of `GL(n, C)` together with an
/// orthonormal basis of the span of its words up to a budget.
#[derive(Clone, Debug)]
pub struct LinearGroupSpec {
    n: usize,
    generators: Vec<DMatrix<C64>>,
    inverses: Vec<DMatrix<C64>>,
    budget: u32,
    span_basis: Vec<DMatrix<C64>>,
    tol: LinearTolerances,
}

impl LinearGroupSpec {
    pub fn new(n: usize, generators: Vec<DMatrix<C64>>, budget: u32, tol: LinearTolerances) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("dimension must be positive".into()));
        }
        let mut inverses = Vec::with_capacity(generators.len());
        for a in &generators {
            if a.shape() != (n, n) {
                return Err(Error::Contract(format!("generator has shape {:?}, expected {n}x{n}", a.shape())));
            }
            let sv = super::singular_values(a);
            let (hi, lo) = (sv[0], sv[n - 1]);
            if hi == 0.0 || lo <= tol.inv * hi {
                return Err(Error::NotAnAutomorphismGerm { sigma_min: lo });
            }
            inverses.push(a.clone().try_inverse().ok_or(Error::NotAnAutomorphismGerm { sigma_min: lo })?);
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                let (a, b) = (&generators[i], &generators[j]);
                let defect = frobenius(&(a * b - b * a)) / (frobenius(a) * frobenius(b));
                if defect > tol.comm {
                    return Err(Error::NotAbelian {
                        i,
                        j,
                        defect,
                        tol: tol.comm,
                    });
                }
            }
        }
        let mut spec = LinearGroupSpec {
            n,
            generators,
            inverses,
            budget,
            span_basis: Vec::new(),
            tol,
        };
        spec.span_basis = spec.compute_span_basis()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[DMatrix<C64>] {
        &self.generators
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn tolerances(&self) -> &LinearTolerances {
        &self.tol
    }

    pub fn words(&self) -> Result<Vec<Word>> {
        enumerate_words(self.generators.len(), self.budget)
    }

    /// Orthonormal (Frobenius) basis of the span of all budget words.
    pub fn span_basis(&self) -> &[DMatrix<C64>] {
        &self.span_basis
    }

    pub fn span_dim(&self) -> usize {
        self.span_basis.len()
    }

    /// The matrix `A_1^{k_1} ⋯ A_m^{k_m}`.
    pub fn word_matrix(&self, word: &Word) -> DMatrix<C64> {
        let mut out = DMatrix::identity(self.n, self.n);
        for (i, &k) in word.exponents().iter().enumerate() {
            let base = if k >= 0 { &self.generators[i] } else { &self.inverses[i] };
            out = out * matrix_power(base, k.unsigned_abs());
        }
        out
    }

    fn compute_span_basis(&self) -> Result<Vec<DMatrix<C64>>> {
        let words = self.words()?;
        let n2 = self.n * self.n;
        let mut stacked = DMatrix::zeros(n2, words.len());
        for (j, w) in words.iter().enumerate() {
            let m = self.word_matrix(w);
            let scale = frobenius(&m);
            let v = vectorize(&m);
            for (i, z) in v.iter().enumerate() {
                stacked[(i, j)] = z / C64::new(scale, 0.0);
            }
        }
        let qr = stacked.col_piv_qr();
        let r = qr.r();
        let q = qr.q();
        let lead = r[(0, 0)].norm();
        let rank = (0..r.nrows().min(r.ncols()))
            .take_while(|&i| r[(i, i)].norm() > self.tol.span * lead)
            .count();
        Ok((0..rank)
            .map(|j| DMatrix::from_column_slice(self.n, self.n, q.column(j).as_slice()))
            .collect())
    }
}

fn matrix_power(a: &DMatrix<C64>, e: u32) -> DMatrix<C64> {
    let mut result = DMatrix::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `(ũ₀, v₀)`: the vector with a one at the leading coordinate of every
/// block, in normal and in original coordinates.
pub fn canonical_u0(bs: &BlockStructure) -> (Vec<C64>, Vec<C64>) {
    let mut u = vec![C64::new(0.0, 0.0); bs.n];
    for off in bs.offsets() {
        u[off] = C64::new(1.0, 0.0);
    }
    let v = bs.from_normal(&u);
    (u, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    /// Every block's leading coordinate is nonzero.
    InV,
    /// Block `k` (1-based) is the first whose leading coordinate vanishes.
    InH(usize),
}

/// Locates `u` (original coordinates) relative to `V` and the invariant
/// hyperplanes `H_k`. Leading coordinates are compared to
/// `tol · max_i |ũ_i|`; the zero vector lies in `H_1`.
pub fn classify_stratum(u: &[C64], bs: &BlockStructure, tol: f64) -> Stratum {
    let normal = bs.to_normal(u);
    let scale = normal.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Stratum::InH(1);
    }
    for (k, off) in bs.offsets().into_iter().enumerate() {
        if normal[off].norm() <= tol * scale {
            return Stratum::InH(k + 1);
        }
    }
    Stratum::InV
}

/// `B ∈ vect(L)` with `B u = v`.
#[derive(Clone, Debug, Serialize)]
pub struct Transition {
    #[serde(with = "crate::serde_util::matrix")]
    pub matrix: DMatrix<C64>,
    /// Coordinates of `B` in the orthonormal span basis.
    #[serde(with = "crate::serde_util::cvec")]
    pub coefficients: Vec<C64>,
    pub residual: f64,
}

/// Least-squares solve of `(Σ c_j B_j) u = v` over the span basis.
pub fn solve_transition(spec: &LinearGroupSpec, u: &[C64], v: &[C64]) -> Result<Transition> {
    if u.len() != spec.n || v.len() != spec.n {
        return Err(Error::Contract("vector dimension does not match the group".into()));
    }
    let images: Vec<Vec<C64>> = spec.span_basis.iter().map(|b| apply(b, u)).collect();
    let m = DMatrix::from_fn(spec.n, images.len(), |i, j| images[j][i]);
    let (coefficients, _) = least_squares(&m, v, spec.tol.rank)?;
    let mut b = DMatrix::zeros(spec.n, spec.n);
    for (c, basis) in coefficients.iter().zip(&spec.span_basis) {
        b += basis * *c;
    }
    let bu = apply(&b, u);
    let residual = super::distance(&bu, v);
    if residual > spec.tol.solve * norm(v).max(1.0) {
        return Err(Error::NotInOrbitSpan { residual });
    }
    Ok(Transition {
        matrix: b,
        coefficients,
        residual,
    })
}

/// Rank of `vect(L) u`.
fn orbit_span_rank(spec: &LinearGroupSpec, u: &[C64]) -> RankInfo {
    let images: Vec<Vec<C64>> = spec.span_basis.iter().map(|b| apply(b, u)).collect();
    let m = DMatrix::from_fn(spec.n, images.len(), |i, j| images[j][i]);
    matrix_rank(&m, spec.tol.rank)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeVerdict {
    pub stratum: Stratum,
    pub rank: usize,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearDominanceReport {
    pub dominant: bool,
    pub budget: u32,
    #[serde(with = "crate::serde_util::cvec")]
    pub witness: Vec<C64>,
    pub witness_rank: RankInfo,
    pub probes: Vec<ProbeVerdict>,
    /// One line per probe whose rank contradicts its stratum.
    pub diagnostics: Vec<String>,
}

/// Dominance of a linear group, decided at `v₀` and cross-checked against
/// the strata of the supplied probes: on a dominant group, probes in `V`
/// must reach rank `n`, and probes on any `H_k` never do.
pub fn linear_dominance(spec: &LinearGroupSpec, bs: &BlockStructure, probes: &[Vec<C64>]) -> LinearDominanceReport {
    let (_, v0) = canonical_u0(bs);
    let witness_rank = orbit_span_rank(spec, &v0);
    let dominant = witness_rank.rank == spec.n;
    let mut diagnostics = Vec::new();
    let probes = probes
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let stratum = classify_stratum(u, bs, spec.tol.rank);
            let rank = orbit_span_rank(spec, u).rank;
            let consistent = match stratum {
                Stratum::InV => !dominant || rank == spec.n,
                Stratum::InH(_) => rank < spec.n,
            };
            if !consistent {
                diagnostics.push(format!(
                    "InconsistentStratification: probe {i} is {stratum:?} but its orbit span has rank {rank}"
                ));
            }
            ProbeVerdict {
                stratum,
                rank,
                consistent,
            }
        })
        .collect();
    LinearDominanceReport {
        dominant,
        budget: spec.budget,
        witness: v0,
        witness_rank,
        probes,
        diagnostics,
    }
}

/// `Ψ_x : B ↦ B x` on the span basis.
#[derive(Clone, Debug, Serialize)]
pub struct PsiReport {
    #[serde(with = "crate::serde_util::matrix")]
    pub matrix: DMatrix<C64>,
    pub span_dim: usize,
    pub rank: RankInfo,
    pub injective: bool,
}

pub fn psi_x_matrix(spec: &LinearGroupSpec, x: &[C64]) -> Result<PsiReport> {
    if x.len() != spec.n {
        return Err(Error::Contract("point dimension does not match the group".into()));
    }
    let images: Vec<Vec<C64>> = spec.span_basis.iter().map(|b| apply(b, x)).collect();
    let matrix = DMatrix::from_fn(spec.n, images.len(), |i, j| images[j][i]);
    let rank = matrix_rank(&matrix, spec.tol.rank);
    let span_dim = spec.span_dim();
    Ok(PsiReport {
        injective: rank.rank == span_dim,
        matrix,
        span_dim,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{simultaneous_block_triangularize, NormalFormOptions};
    use nalgebra::DVector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn v(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| c(x)).collect()
    }

    fn diag(xs: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_vec(v(xs)))
    }

    fn group(gens: Vec<DMatrix<C64>>, budget: u32) -> LinearGroupSpec {
        LinearGroupSpec::new(gens[0].nrows(), gens, budget, LinearTolerances::default()).unwrap()
    }

    #[test]
    fn span_of_diagonal_group() {
        let g = group(vec![diag(&[2.0, 3.0])], 3);
        assert_eq!(g.span_dim(), 2);
        let scalar = group(vec![diag(&[2.0, 2.0])], 3);
        assert_eq!(scalar.span_dim(), 1);
    }

    #[test]
    fn rejects_non_commuting() {
        let a = diag(&[2.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        let err = LinearGroupSpec::new(2, vec![a, b], 1, LinearTolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotAbelian { i: 0, j: 1, .. }));
    }

    #[test]
    fn u0_examples() {
        let g = group(vec![diag(&[2.0, 3.0])], 1);
        let bs = simultaneous_block_triangularize(&g, &NormalFormOptions::default()).unwrap();
        assert_eq!(canonical_u0(&bs).0, v(&[1.0, 1.0]));

        let a = DMatrix::from_row_slice(3, 3, &[c(1.0), c(0.0), c(0.0), c(1.0), c(1.0), c(0.0), c(0.0), c(0.0), c(4.0)]);
        let g = group(vec![a], 1);
        let bs = simultaneous_block_triangularize(&g, &NormalFormOptions::default()).unwrap();
        assert_eq!(bs.eta, vec![2, 1]);
        assert_eq!(canonical_u0(&bs).0, v(&[1.0, 0.0, 1.0]));

        let j = DMatrix::from_row_slice(2, 2, &[c(2.0), c(0.0), c(1.0), c(2.0)]);
        let bs = simultaneous_block_triangularize(&group(vec![j], 1), &NormalFormOptions::default()).unwrap();
        assert_eq!(canonical_u0(&bs).0, v(&[1.0, 0.0]));
    }

    #[test]
    fn stratum_examples() {
        let g = group(vec![diag(&[2.0, 3.0])], 1);
        let bs = simultaneous_block_triangularize(&g, &NormalFormOptions::default()).unwrap();
        let in_normal = |u: &[f64]| bs.from_normal(&v(u));
        assert_eq!(classify_stratum(&in_normal(&[1.0, 1.0]), &bs, 1e-9), Stratum::InV);
        assert_eq!(classify_stratum(&in_normal(&[0.0, 1.0]), &bs, 1e-9), Stratum::InH(1));
        assert_eq!(classify_stratum(&in_normal(&[1.0, 0.0]), &bs, 1e-9), Stratum::InH(2));

        let a = DMatrix::from_row_slice(3, 3, &[c(1.0), c(0.0), c(0.0), c(1.0), c(1.0), c(0.0), c(0.0), c(0.0), c(4.0)]);
        let g = group(vec![a], 1);
        let bs = simultaneous_block_triangularize(&g, &NormalFormOptions::default()).unwrap();
        let u = bs.from_normal(&v(&[0.0, 5.0, 1.0]));
        assert_eq!(classify_stratum(&u, &bs, 1e-9), Stratum::InH(1));
    }

    #[test]
    fn transition_examples() {
        let g = group(vec![diag(&[2.0, 3.0])], 1);
        let u = v(&[1.0, 1.0]);
        let t = solve_transition(&g, &u, &u).unwrap();
        assert!((t.matrix.clone() - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert!(t.residual < 1e-12);

        let t = solve_transition(&g, &u, &v(&[2.0, 3.0])).unwrap();
        assert!((t.matrix.clone() - diag(&[2.0, 3.0])).norm() < 1e-12);

        let t = solve_transition(&g, &u, &v(&[1.0, 0.0])).unwrap();
        assert!((t.matrix.clone() - diag(&[1.0, 0.0])).norm() < 1e-12);

        // scalar group: (1, 0) is not reachable from (1, 1)
        let s = group(vec![diag(&[2.0, 2.0])], 2);
        assert!(matches!(solve_transition(&s, &u, &v(&[1.0, 0.0])), Err(Error::NotInOrbitSpan { .. })));
    }

    #[test]
    fn dominance_examples() {
        let g = group(vec![diag(&[2.0, 3.0])], 1);
        let bs = simultaneous_block_triangularize(&g, &NormalFormOptions::default()).unwrap();
        let report = linear_dominance(&g, &bs, &[v(&[1.0, 1.0]), v(&[1.0, 0.0]), v(&[0.0, 3.0])]);
        assert!(report.dominant);
        assert_eq!(report.probes.iter().map(|p| p.rank).collect::<Vec<_>>(), vec![2, 1, 1]);
        assert!(report.diagnostics.is_empty());

        let s = group(vec![diag(&[2.0, 2.0])], 2);
        let bs = simultaneous_block_triangularize(&s, &NormalFormOptions::default()).unwrap();
        let report = linear_dominance(&s, &bs, &[v(&[0.3, -1.0])]);
        assert!(!report.dominant);
        assert_eq!(report.witness_rank.rank, 1);
    }

    #[test]
    fn psi_examples() {
        let id = group(vec![DMatrix::identity(2, 2)], 2);
        let psi = psi_x_matrix(&id, &v(&[1.0, 0.0])).unwrap();
        assert_eq!(psi.span_dim, 1);
        assert!(psi.injective);

        let g = group(vec![diag(&[2.0, 3.0])], 1);
        assert!(psi_x_matrix(&g, &v(&[1.0, 1.0])).unwrap().injective);
        let p = psi_x_matrix(&g, &v(&[1.0, 0.0])).unwrap();
        assert!(!p.injective);
        assert_eq!(p.rank.rank, 1);
    }
}
