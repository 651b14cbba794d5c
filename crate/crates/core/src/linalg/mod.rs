//! Dense complex linear algebra for the linearized group `L_G`.

mod normal_form;
mod strata;

pub use normal_form::{
    simultaneous_block_triangularize, BlockStructure, ClusterTolerance, NormalFormOptions,
};
pub use strata::{
    canonical_u0, classify_stratum, linear_dominance, psi_x_matrix, solve_transition,
    LinearDominanceReport, LinearGroupSpec, LinearTolerances, ProbeVerdict, PsiReport, Stratum,
    Transition,
};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// Default relative rank threshold.
pub const RANK_TOL: f64 = 1e-9;

/// Numerical rank together with the singular values that decided it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Smallest singular value counted in the rank.
    pub smallest_kept: Option<f64>,
    /// Largest singular value below the threshold.
    pub largest_dropped: Option<f64>,
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Rank of a matrix: singular values above `tol · σ_max`.
pub fn matrix_rank(m: &DMatrix<C64>, tol: f64) -> RankInfo {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let threshold = tol * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > threshold).count()
    };
    RankInfo {
        rank,
        smallest_kept: rank.checked_sub(1).map(|i| sv[i]),
        largest_dropped: sv.get(rank).copied(),
        singular_values: sv,
        threshold,
    }
}

/// Stacks vectors as the columns of a matrix.
pub fn columns(vectors: &[Vec<C64>]) -> Result<DMatrix<C64>> {
    let n = vectors
        .first()
        .ok_or_else(|| Error::Contract("empty vector list".into()))?
        .len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Contract("vectors have different dimensions".into()));
    }
    Ok(DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i]))
}

/// Dimension of the span of `vectors`, relative tolerance `tol`.
pub fn numerical_rank(vectors: &[Vec<C64>], tol: f64) -> Result<RankInfo> {
    Ok(matrix_rank(&columns(vectors)?, tol))
}

/// Hermitian inner product `⟨u, v⟩ = Σ u_i conj(v_i)`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj())
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn distance(u: &[C64], v: &[C64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Determinant of the Hermitian Gram matrix `G_ij = ⟨v_i, v_j⟩`.
pub fn gram_determinant(vectors: &[Vec<C64>]) -> Result<C64> {
    let r = vectors.len();
    if let Some(n) = vectors.first().map(|v| v.len()) {
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Contract("vectors have different dimensions".into()));
        }
        if r > n {
            return Err(Error::Contract(format!(
                "Gram determinant of {r} vectors in dimension {n}"
            )));
        }
    }
    let g = DMatrix::from_fn(r, r, |i, j| inner(&vectors[i], &vectors[j]));
    Ok(g.determinant())
}

pub fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `σ_max / σ_min`, infinite for singular input.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

pub fn apply(m: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    (m * DVector::from_column_slice(x)).iter().copied().collect()
}

/// Column-major vectorization.
pub fn vectorize(m: &DMatrix<C64>) -> Vec<C64> {
    m.iter().copied().collect()
}

/// Greedy volume maximization: picks up to `k` of the unit-normalized
/// `vectors`, each step taking the one that maximizes the Gram determinant
/// with those already chosen (first index wins ties). Returns the chosen
/// indices and the final Gram determinant of the normalized set.
pub fn greedy_volume_selection(vectors: &[Vec<C64>], k: usize) -> (Vec<usize>, f64) {
    let units: Vec<Option<Vec<C64>>> = vectors
        .iter()
        .map(|v| {
            let nv = norm(v);
            (nv > 0.0).then(|| v.iter().map(|z| z / nv).collect())
        })
        .collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut current: Vec<Vec<C64>> = Vec::new();
    let mut det = 1.0;
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (j, u) in units.iter().enumerate() {
            let Some(u) = u else { continue };
            if chosen.contains(&j) {
                continue;
            }
            current.push(u.clone());
            let g = gram_determinant(&current).map(|z| z.re).unwrap_or(0.0);
            current.pop();
            if best.map_or(true, |(_, b)| g > b) {
                best = Some((j, g));
            }
        }
        match best {
            Some((j, g)) => {
                chosen.push(j);
                current.push(units[j].clone().expect("nonzero vector"));
                det = g;
            }
            None => {
                det = 0.0;
                break;
            }
        }
    }
    (chosen, det)
}

/// Orthonormal basis (as columns) of the null space of `m`, at relative
/// tolerance `tol`.
pub fn null_space(m: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to at least square so the SVD returns a full right basis
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let mut null_idx: Vec<usize> = (0..sv.len()).filter(|&i| smax == 0.0 || sv[i] <= tol * smax).collect();
    // deterministic order: by singular value, then index
    null_idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]).then(a.cmp(&b)));
    DMatrix::from_fn(cols, null_idx.len(), |i, j| v_t[(null_idx[j], i)].conj())
}

/// The `k` right singular vectors with the smallest singular values, as
/// orthonormal columns.
pub fn smallest_right_singular_vectors(m: &DMatrix<C64>, k: usize) -> (DMatrix<C64>, Vec<f64>) {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]).then(a.cmp(&b)));
    let chosen = &idx[..k];
    let vecs = DMatrix::from_fn(cols, k, |i, j| v_t[(chosen[j], i)].conj());
    let mut sorted: Vec<f64> = idx.iter().map(|&i| sv[i]).collect();
    sorted.reverse();
    (vecs, sorted)
}

/// Largest principal angle between the column spans of two orthonormal
/// bases. Subspaces of different dimension are at angle `π/2`.
pub fn max_principal_angle(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual = b - a * (a.adjoint() * b);
    let s = operator_norm(&residual).min(1.0);
    s.asin()
}

/// Least-squares solution of `a x = b` with pseudo-inverse cutoff
/// `tol · σ_max`, and the residual norm `‖a x − b‖`.
pub fn least_squares(a: &DMatrix<C64>, b: &[C64], tol: f64) -> Result<(Vec<C64>, f64)> {
    if a.nrows() != b.len() {
        return Err(Error::Contract("right-hand side has wrong length".into()));
    }
    let rhs = DVector::from_column_slice(b);
    let smax = operator_norm(a);
    if smax == 0.0 {
        return Ok((vec![C64::new(0.0, 0.0); a.ncols()], rhs.norm()));
    }
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&rhs, tol * smax)
        .map_err(|e| Error::Contract(e.to_string()))?;
    let residual = (a * &x - rhs).norm();
    Ok((x.iter().copied().collect(), residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], RANK_TOL).unwrap().rank, 2);
        let orbit = [v(&[1.0, 1.0]), v(&[2.0, 4.0]), v(&[4.0, 16.0])];
        assert_eq!(numerical_rank(&orbit, RANK_TOL).unwrap().rank, 2);
        let zero = numerical_rank(&[v(&[0.0, 0.0])], RANK_TOL).unwrap();
        assert_eq!(zero.rank, 0);
        assert!(numerical_rank(&[], RANK_TOL).is_err());
    }

    #[test]
    fn rank_reports_bracketing_values() {
        let info = numerical_rank(&[v(&[1.0, 0.0]), v(&[2.0, 0.0])], RANK_TOL).unwrap();
        assert_eq!(info.rank, 1);
        assert!(info.smallest_kept.unwrap() > 1.0);
        assert!(info.largest_dropped.unwrap() < 1e-12);
    }

    #[test]
    fn gram_examples() {
        let g = gram_determinant(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert!((g - C64::new(1.0, 0.0)).norm() < 1e-15);
        let g = gram_determinant(&[v(&[1.0, 1.0]), v(&[2.0, 4.0])]).unwrap();
        assert!((g - C64::new(4.0, 0.0)).norm() < 1e-12);
        let g = gram_determinant(&[v(&[1.0, 0.0]), v(&[2.0, 0.0])]).unwrap();
        assert!(g.norm() < 1e-15);
        assert!(gram_determinant(&[v(&[1.0]), v(&[2.0])]).is_err());
    }

    #[test]
    fn hermitian_gram_sees_complex_independence() {
        // (1, i) is isotropic for the bilinear form but not for the Hermitian one
        let u = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
        let g = gram_determinant(&[u]).unwrap();
        assert!((g.re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = columns(&[v(&[1.0, 1.0]), v(&[2.0, 4.0]), v(&[4.0, 16.0])]).unwrap();
        let ns = null_space(&m, RANK_TOL);
        assert_eq!(ns.shape(), (3, 1));
        let img = &m * &ns;
        assert!(img.norm() < 1e-12);
        // proportional to (8, -6, 1)
        let ratio = ns[(0, 0)] / ns[(2, 0)];
        assert!((ratio - C64::new(8.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn principal_angles() {
        let e1 = DMatrix::from_column_slice(2, 1, &v(&[1.0, 0.0]));
        let e2 = DMatrix::from_column_slice(2, 1, &v(&[0.0, 1.0]));
        assert!(max_principal_angle(&e1, &e1) < 1e-15);
        assert!((max_principal_angle(&e1, &e2) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn least_squares_exact_and_residual() {
        let a = columns(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let (x, r) = least_squares(&a, &v(&[3.0, 4.0]), 1e-12).unwrap();
        assert_eq!(x, v(&[3.0, 4.0]));
        assert!(r < 1e-15);
        let a = columns(&[v(&[1.0, 0.0])]).unwrap();
        let (_, r) = least_squares(&a, &v(&[0.0, 1.0]), 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }
}
