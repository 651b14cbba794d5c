//! Simultaneous block-triangular normal form of a commuting matrix family.
//!
//! The result conjugates every generator into `K_{η,r}`: block diagonal,
//! each block lower triangular with a single eigenvalue. Blocks are the
//! joint generalized eigenspaces; inside a block a joint flag is built
//! from repeated common-eigenvector extraction.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::strata::LinearGroupSpec;
use super::{frobenius, smallest_right_singular_vectors, condition_number};
use crate::error::{Error, Result};
use crate::C64;

/// Radius used to merge eigenvalues into one cluster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterTolerance {
    /// `‖A‖_F · max(1e-8, (1e-11)^(1/s))` where `s` is the dimension of the
    /// subspace being split; a defective eigenvalue of multiplicity `s`
    /// scatters by roughly the `s`-th root of the rounding error.
    Adaptive,
    /// `c · ‖A‖_F`.
    Relative(f64),
}

impl ClusterTolerance {
    fn radius(self, norm: f64, dim: usize) -> f64 {
        match self {
            ClusterTolerance::Adaptive => norm * f64::max(1e-8, 1e-11f64.powf(1.0 / dim as f64)),
            ClusterTolerance::Relative(c) => c * norm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalFormOptions {
    pub cluster: ClusterTolerance,
    /// Off-pattern entries of `P⁻¹AP` must stay below `pattern_tol · ‖A‖_F`.
    pub pattern_tol: f64,
}

impl Default for NormalFormOptions {
    fn default() -> Self {
        NormalFormOptions {
            cluster: ClusterTolerance::Adaptive,
            pattern_tol: 1e-8,
        }
    }
}

/// `(η, r, P)` with per-generator block eigenvalues and residual diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct BlockStructure {
    pub n: usize,
    pub r: usize,
    pub eta: Vec<usize>,
    #[serde(with = "crate::serde_util::matrix")]
    pub p: DMatrix<C64>,
    #[serde(skip)]
    pub p_inv: DMatrix<C64>,
    /// `block_eigenvalues[g][k]`: eigenvalue of generator `g` on block `k`.
    #[serde(with = "crate::serde_util::cvec_list")]
    pub block_eigenvalues: Vec<Vec<C64>>,
    /// Off-pattern residual of `P⁻¹AP` divided by `‖A‖_F`, per generator.
    pub pattern_residuals: Vec<f64>,
    /// Largest deviation of a block diagonal entry from its block eigenvalue,
    /// divided by `‖A‖_F`, per generator.
    pub diagonal_spread: Vec<f64>,
    /// `‖A − P (P⁻¹AP) P⁻¹‖_F / ‖A‖_F`, per generator.
    pub reconstruction_residuals: Vec<f64>,
    pub condition_number: f64,
}

impl BlockStructure {
    /// Starting coordinate of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.eta
            .iter()
            .scan(0, |acc, &nk| {
                let start = *acc;
                *acc += nk;
                Some(start)
            })
            .collect()
    }

    /// Coordinates in the normal basis, `P⁻¹ u`.
    pub fn to_normal(&self, u: &[C64]) -> Vec<C64> {
        super::apply(&self.p_inv, u)
    }

    pub fn from_normal(&self, u: &[C64]) -> Vec<C64> {
        super::apply(&self.p, u)
    }

    pub fn conjugate(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        &self.p_inv * a * &self.p
    }

    /// Largest off-pattern entry of `P⁻¹AP` (outside the lower-triangular
    /// diagonal blocks), absolute.
    pub fn off_pattern(&self, a: &DMatrix<C64>) -> f64 {
        let t = self.conjugate(a);
        let block_of = self.block_index();
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let in_pattern = block_of[i] == block_of[j] && i >= j;
                if !in_pattern {
                    worst = worst.max(t[(i, j)].norm());
                }
            }
        }
        worst
    }

    fn block_index(&self) -> Vec<usize> {
        self.eta
            .iter()
            .enumerate()
            .flat_map(|(k, &nk)| std::iter::repeat(k).take(nk))
            .collect()
    }
}

/// Conjugates the generators of `spec` into a common `K_{η,r}` pattern.
pub fn simultaneous_block_triangularize(
    spec: &LinearGroupSpec,
    opts: &NormalFormOptions,
) -> Result<BlockStructure> {
    triangularize_matrices(spec.dim(), spec.generators(), opts)
}

pub(crate) fn triangularize_matrices(
    n: usize,
    generators: &[DMatrix<C64>],
    opts: &NormalFormOptions,
) -> Result<BlockStructure> {
    // 1. joint generalized eigenspaces, as orthonormal bases
    let mut subspaces: Vec<DMatrix<C64>> = vec![DMatrix::identity(n, n)];
    for (g, a) in generators.iter().enumerate() {
        let norm = frobenius(a);
        let mut refined = Vec::new();
        for s in &subspaces {
            let restricted = s.adjoint() * a * s;
            let dim = restricted.nrows();
            let tol = opts.cluster.radius(norm, dim);
            let eig = eigenvalues(&restricted);
            let clusters = cluster(&eig, tol);
            if clusters.len() > 1 {
                let gap = min_cross_gap(&eig, &clusters);
                if gap <= 10.0 * tol {
                    return Err(Error::IllConditionedSpectrum { generator: g, gap });
                }
            }
            if clusters.len() == 1 {
                refined.push(s.clone());
                continue;
            }
            for members in &clusters {
                let m = members.len();
                let mu = members.iter().map(|&i| eig[i]).sum::<C64>() / C64::new(m as f64, 0.0);
                let shifted = &restricted - DMatrix::identity(dim, dim) * mu;
                let mut power = shifted.clone();
                for _ in 1..m {
                    power = &power * &shifted;
                }
                let (w, _) = smallest_right_singular_vectors(&power, m);
                refined.push(s * w);
            }
        }
        subspaces = refined;
    }

    // 2. joint flag inside each block, reversed to lower-triangular order
    let mut blocks: Vec<(Vec<C64>, DMatrix<C64>)> = subspaces
        .iter()
        .map(|s| {
            let restricted: Vec<DMatrix<C64>> = generators.iter().map(|a| s.adjoint() * a * s).collect();
            let m = s.ncols();
            let mus: Vec<C64> = restricted
                .iter()
                .map(|r| r.trace() / C64::new(m as f64, 0.0))
                .collect();
            let z = joint_flag(&restricted);
            let reversed = DMatrix::from_fn(m, m, |i, j| z[(i, m - 1 - j)]);
            (mus, s * reversed)
        })
        .collect();

    // 3. lexicographic block order on eigenvalue tuples
    let scales: Vec<f64> = generators.iter().map(|a| 1e-6 * frobenius(a).max(1.0)).collect();
    insertion_sort_by(&mut blocks, |x, y| compare_tuples(&x.0, &y.0, &scales));

    let eta: Vec<usize> = blocks.iter().map(|b| b.1.ncols()).collect();
    let mut p = DMatrix::zeros(n, n);
    let mut col = 0;
    for (_, basis) in &blocks {
        p.view_mut((0, col), (n, basis.ncols())).copy_from(basis);
        col += basis.ncols();
    }
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Contract("block basis is singular".into()))?;
    let block_eigenvalues: Vec<Vec<C64>> = (0..generators.len())
        .map(|g| blocks.iter().map(|b| b.0[g]).collect())
        .collect();

    let mut bs = BlockStructure {
        n,
        r: eta.len(),
        eta,
        condition_number: condition_number(&p),
        p,
        p_inv,
        block_eigenvalues,
        pattern_residuals: Vec::new(),
        diagonal_spread: Vec::new(),
        reconstruction_residuals: Vec::new(),
    };
    let block_of = bs.block_index();
    for (g, a) in generators.iter().enumerate() {
        let norm = frobenius(a).max(f64::MIN_POSITIVE);
        let t = bs.conjugate(a);
        let off = bs.off_pattern(a) / norm;
        let spread = (0..n)
            .map(|i| (t[(i, i)] - bs.block_eigenvalues[g][block_of[i]]).norm())
            .fold(0.0, f64::max)
            / norm;
        let recon = frobenius(&(a - &bs.p * &t * &bs.p_inv)) / norm;
        if off > opts.pattern_tol {
            return Err(Error::NormalFormResidual {
                generator: g,
                residual: off,
            });
        }
        bs.pattern_residuals.push(off);
        bs.diagonal_spread.push(spread);
        bs.reconstruction_residuals.push(recon);
    }
    Ok(bs)
}

fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = m.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// Single-linkage clusters at radius `tol`, ordered by their mean.
fn cluster(eig: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = eig.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eig[i] - eig[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    let mean = |g: &Vec<usize>| g.iter().map(|&i| eig[i]).sum::<C64>() / C64::new(g.len() as f64, 0.0);
    groups.sort_by(|a, b| {
        let (x, y) = (mean(a), mean(b));
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    groups
}

fn min_cross_gap(eig: &[C64], clusters: &[Vec<usize>]) -> f64 {
    let mut gap = f64::INFINITY;
    for (a, ca) in clusters.iter().enumerate() {
        for cb in &clusters[a + 1..] {
            for &i in ca {
                for &j in cb {
                    gap = gap.min((eig[i] - eig[j]).norm());
                }
            }
        }
    }
    gap
}

/// Unitary `Z` with `Z^H R Z` upper triangular for every (commuting,
/// single-eigenvalue) `R` in `mats`.
fn joint_flag(mats: &[DMatrix<C64>]) -> DMatrix<C64> {
    let m = mats.first().map_or(0, |a| a.nrows());
    if m <= 1 || mats.is_empty() {
        return DMatrix::identity(m.max(1), m.max(1));
    }
    let mut stacked = DMatrix::zeros(m * mats.len(), m);
    for (g, r) in mats.iter().enumerate() {
        let mu = r.trace() / C64::new(m as f64, 0.0);
        let shifted = r - DMatrix::identity(m, m) * mu;
        stacked.view_mut((g * m, 0), (m, m)).copy_from(&shifted);
    }
    let (v, _) = smallest_right_singular_vectors(&stacked, 1);
    let q = complete_basis(&v);
    let sub: Vec<DMatrix<C64>> = mats
        .iter()
        .map(|r| {
            let t = q.adjoint() * r * &q;
            t.view((1, 1), (m - 1, m - 1)).into_owned()
        })
        .collect();
    let inner = joint_flag(&sub);
    let mut lift = DMatrix::identity(m, m);
    lift.view_mut((1, 1), (m - 1, m - 1)).copy_from(&inner);
    q * lift
}

/// Unitary matrix whose first column is the unit vector `v`.
fn complete_basis(v: &DMatrix<C64>) -> DMatrix<C64> {
    let m = v.nrows();
    // Gram–Schmidt of v against the standard basis, skipping dependent vectors
    let mut cols: Vec<DMatrix<C64>> = vec![v.clone() / C64::new(v.norm(), 0.0)];
    let mut candidates: Vec<usize> = (0..m).collect();
    // least aligned standard vectors first, for stability
    candidates.sort_by(|&a, &b| v[(a, 0)].norm().total_cmp(&v[(b, 0)].norm()).then(a.cmp(&b)));
    for e in candidates {
        if cols.len() == m {
            break;
        }
        let mut w = DMatrix::zeros(m, 1);
        w[(e, 0)] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = (c.adjoint() * &w)[(0, 0)];
                w -= c * proj;
            }
        }
        let nw = w.norm();
        if nw > 1e-6 {
            cols.push(w / C64::new(nw, 0.0));
        }
    }
    let mut q = DMatrix::zeros(m, m);
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, &c.column(0));
    }
    q
}

fn compare_tuples(a: &[C64], b: &[C64], scales: &[f64]) -> Ordering {
    for ((x, y), &tol) in a.iter().zip(b).zip(scales) {
        if (x.re - y.re).abs() > tol {
            return x.re.total_cmp(&y.re);
        }
        if (x.im - y.im).abs() > tol {
            return x.im.total_cmp(&y.im);
        }
    }
    Ordering::Equal
}

fn insertion_sort_by<T, F: Fn(&T, &T) -> Ordering>(v: &mut [T], cmp: F) {
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && cmp(&v[j - 1], &v[j]) == Ordering::Greater {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
}
