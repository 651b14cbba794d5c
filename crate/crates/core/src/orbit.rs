//! Orbit sampling, strata of the nonlinear and linear ranks, and the
//! bounded-budget experiments for relative minimality and density.
//!
//! Closures are never computed: every statement about `closure(G(x))` is
//! made on a budget-`K` sample and compared against the baseline obtained
//! from the same sample at budget `K − 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{build_sampled_operators, dominance_report, GroupSpec};
use crate::linalg::{self, classify_stratum, BlockStructure, Stratum};
use crate::linearization::LinearizationMap;
use crate::word::Word;
use crate::C64;

/// Radius under which two orbit points are considered the same.
pub const DEDUP_RADIUS: f64 = 1e-12;

/// Safety factor applied to the truncation baseline in the minimality test.
pub const MINIMALITY_SAFETY: f64 = 4.0;

#[derive(Clone, Debug, Serialize)]
pub struct OrbitSample {
    #[serde(with = "crate::serde_util::cvec")]
    pub base_point: Vec<C64>,
    pub budget: u32,
    pub words: Vec<Word>,
    #[serde(with = "crate::serde_util::cvec_list")]
    pub points: Vec<Vec<C64>>,
    pub dedup_radius: f64,
}

impl OrbitSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points inside `region`.
    pub fn restrict(&self, region: &Polydisc) -> Vec<Vec<C64>> {
        self.points.iter().filter(|p| region.contains(p)).cloned().collect()
    }

    /// Index of and distance to the nearest sample point.
    pub fn nearest(&self, y: &[C64]) -> Option<(usize, f64)> {
        nearest(&self.points, y)
    }

    /// CSV rows: word tag, then real and imaginary parts interleaved.
    pub fn to_csv(&self) -> String {
        let n = self.base_point.len();
        let mut out = String::from("word");
        for i in 0..n {
            out.push_str(&format!(",re{i},im{i}"));
        }
        out.push('\n');
        for (w, p) in self.words.iter().zip(&self.points) {
            out.push_str(&w.tag());
            for z in p {
                out.push_str(&format!(",{:e},{:e}", z.re, z.im));
            }
            out.push('\n');
        }
        out
    }
}

fn nearest(points: &[Vec<C64>], y: &[C64]) -> Option<(usize, f64)> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, linalg::distance(p, y)))
        .fold(None, |best, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
}

/// `{ y : |y_i − c_i| ≤ radius for every i }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polydisc {
    #[serde(with = "crate::serde_util::cvec")]
    pub center: Vec<C64>,
    pub radius: f64,
}

impl Polydisc {
    pub fn new(center: Vec<C64>, radius: f64) -> Self {
        Polydisc { center, radius }
    }

    /// Unit polydisc around `x`.
    pub fn unit(x: &[C64]) -> Self {
        Polydisc::new(x.to_vec(), 1.0)
    }

    pub fn contains(&self, y: &[C64]) -> bool {
        y.len() == self.center.len()
            && y.iter()
                .zip(&self.center)
                .all(|(a, c)| (a - c).norm() <= self.radius * (1.0 + 1e-12))
    }
}

/// Evaluates every budget word at `x`, keeping the first occurrence of
/// points closer than [`DEDUP_RADIUS`].
pub fn sample_orbit(spec: &GroupSpec, x: &[C64], budget: u32) -> Result<OrbitSample> {
    let words = spec.words(budget)?;
    let values: Vec<Vec<C64>> = words
        .par_iter()
        .map(|w| spec.evaluate_word(w, x))
        .collect::<Result<_>>()?;
    let mut kept_words = Vec::new();
    let mut points: Vec<Vec<C64>> = Vec::new();
    for (w, p) in words.into_iter().zip(values) {
        if points.iter().all(|q| linalg::distance(q, &p) > DEDUP_RADIUS) {
            kept_words.push(w);
            points.push(p);
        }
    }
    Ok(OrbitSample {
        base_point: x.to_vec(),
        budget,
        words: kept_words,
        points,
        dedup_radius: DEDUP_RADIUS,
    })
}

/// Per-point stratum record.
#[derive(Clone, Debug, Serialize)]
pub struct StratumEntry {
    #[serde(with = "crate::serde_util::cvec")]
    pub point: Vec<C64>,
    /// `r(x)`: rank of the sampled orbit.
    pub r: usize,
    /// `r̃_x`: rank of the sampled linear orbit.
    pub r_tilde: usize,
    /// Gram determinant of the unit-normalized orbit vectors picked by
    /// greedy volume maximization, `min(r, n)` of them.
    pub gram_determinant: f64,
    pub gram_words: Vec<Word>,
    pub in_omega_n: bool,
    pub in_omega_tilde_n: bool,
    /// `(k, r(x) ≥ k)` for each requested `k`.
    pub in_u_k: Vec<(usize, bool)>,
    pub in_u: bool,
    pub stratum: Option<Stratum>,
    /// Singular values bracketing the rank threshold of `r(x)`.
    pub r_bracket: (Option<f64>, Option<f64>),
}

pub fn classify_point(
    spec: &GroupSpec,
    x: &[C64],
    budget: u32,
    tol: f64,
    bs: Option<&BlockStructure>,
    ks: &[usize],
) -> Result<StratumEntry> {
    let n = spec.dim();
    let ops = build_sampled_operators(spec, x, budget)?;
    let r = linalg::matrix_rank(&ops.m_phi_x, tol);
    let linear_points: Vec<Vec<C64>> = (0..ops.len()).map(|j| ops.linear_orbit_point(j)).collect();
    let r_tilde = linalg::numerical_rank(&linear_points, tol)?;
    let orbit_points: Vec<Vec<C64>> = (0..ops.len()).map(|j| ops.orbit_point(j)).collect();
    let (chosen, gram) = if r.rank == 0 {
        (Vec::new(), 0.0)
    } else {
        linalg::greedy_volume_selection(&orbit_points, r.rank.min(n))
    };
    let in_omega_n = r.rank == n;
    let in_omega_tilde_n = r_tilde.rank == n;
    Ok(StratumEntry {
        point: x.to_vec(),
        r: r.rank,
        r_tilde: r_tilde.rank,
        gram_determinant: gram,
        gram_words: chosen.iter().map(|&j| ops.words[j].clone()).collect(),
        in_omega_n,
        in_omega_tilde_n,
        in_u_k: ks.iter().map(|&k| (k, r.rank >= k)).collect(),
        in_u: in_omega_n && in_omega_tilde_n,
        stratum: bs.map(|bs| classify_stratum(x, bs, tol)),
        r_bracket: (r.smallest_kept, r.largest_dropped),
    })
}

/// Gram determinant of the unit-normalized vectors `w(z)` for fixed words.
pub fn gram_at(spec: &GroupSpec, words: &[Word], z: &[C64]) -> Result<f64> {
    let vecs: Vec<Vec<C64>> = words
        .iter()
        .map(|w| {
            let v = spec.evaluate_word(w, z)?;
            let nv = linalg::norm(&v);
            Ok(if nv > 0.0 { v.iter().map(|c| c / nv).collect() } else { v })
        })
        .collect::<Result<_>>()?;
    Ok(linalg::gram_determinant(&vecs)?.re)
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaMismatch {
    pub probe: usize,
    pub in_omega_n: bool,
    pub image_in_omega_tilde_n: bool,
    pub r_bracket: (Option<f64>, Option<f64>),
    pub r_tilde_bracket: (Option<f64>, Option<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaImageReport {
    pub checked: usize,
    pub in_omega_n: usize,
    pub mismatches: Vec<OmegaMismatch>,
}

/// Checks that `φ_x` carries `Ω_n` onto `Ω̃_n` on each probe.
pub fn omega_image_check(
    map: &LinearizationMap,
    probes: &[Vec<C64>],
    spec: &GroupSpec,
    budget: u32,
    tol: f64,
) -> Result<OmegaImageReport> {
    let n = spec.dim();
    let words = spec.words(budget)?;
    let jacobians: Vec<_> = words
        .iter()
        .map(|w| spec.realize_word(w).map(|j| j.jacobian_at_zero()))
        .collect::<Result<_>>()?;
    let results: Vec<(bool, bool, linalg::RankInfo, linalg::RankInfo)> = probes
        .par_iter()
        .map(|y| {
            let orbit: Vec<Vec<C64>> = words
                .iter()
                .map(|w| spec.evaluate_word(w, y))
                .collect::<Result<_>>()?;
            let r = linalg::numerical_rank(&orbit, tol)?;
            let z = linalg::apply(&map.matrix, y);
            let lin: Vec<Vec<C64>> = jacobians.iter().map(|j| linalg::apply(j, &z)).collect();
            let rt = linalg::numerical_rank(&lin, tol)?;
            Ok((r.rank == n, rt.rank == n, r, rt))
        })
        .collect::<Result<_>>()?;
    let mut mismatches = Vec::new();
    for (i, (a, b, r, rt)) in results.iter().enumerate() {
        if a != b {
            mismatches.push(OmegaMismatch {
                probe: i,
                in_omega_n: *a,
                image_in_omega_tilde_n: *b,
                r_bracket: (r.smallest_kept, r.largest_dropped),
                r_tilde_bracket: (rt.smallest_kept, rt.largest_dropped),
            });
        }
    }
    Ok(OmegaImageReport {
        checked: probes.len(),
        in_omega_n: results.iter().filter(|r| r.0).count(),
        mismatches,
    })
}

/// Symmetric Hausdorff distance between two point clouds.
pub fn hausdorff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    let directed = |from: &[Vec<C64>], to: &[Vec<C64>]| {
        from.iter()
            .map(|p| nearest(to, p).map_or(f64::INFINITY, |(_, d)| d))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Hausdorff distance between the parts of two samples inside `region`.
pub fn closure_distance(a: &OrbitSample, b: &OrbitSample, region: &Polydisc) -> Result<f64> {
    let ra = a.restrict(region);
    let rb = b.restrict(region);
    if ra.is_empty() || rb.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(hausdorff(&ra, &rb))
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityCandidate {
    pub word: Word,
    #[serde(with = "crate::serde_util::cvec")]
    pub point: Vec<C64>,
    /// Budget of the candidate's own sample: `K + max|k_i|` of its word, so
    /// that its words cover every budget-`K` word of `x`.
    pub candidate_budget: u32,
    pub distance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExcludedCandidate {
    #[serde(with = "crate::serde_util::cvec")]
    pub point: Vec<C64>,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityReport {
    pub budget: u32,
    pub region: Polydisc,
    /// Hausdorff distance between the budget-K and budget-(K−1) samples of
    /// `G(x)` inside the region.
    pub baseline: f64,
    pub threshold: f64,
    pub candidates: Vec<MinimalityCandidate>,
    pub excluded: Vec<ExcludedCandidate>,
    pub pass: bool,
}

/// Sampled relative-minimality test in `U`.
///
/// Candidates are the orbit points of `x` inside `region ∩ U`, plus the
/// `extra` points, which are classified first (outside `U` they are
/// excluded) and then snapped to the nearest orbit point. Each candidate
/// `y = w(x)` is sampled at budget `K + max|k_i(w)|`, and that sample must
/// lie within `4 δ(K) + tol` of the sample of `G(x)` inside the region.
pub fn relative_minimality_experiment(
    spec: &GroupSpec,
    x: &[C64],
    budget: u32,
    region: &Polydisc,
    tol: f64,
    include_orbit_points: bool,
    extra: &[Vec<C64>],
) -> Result<MinimalityReport> {
    if budget == 0 {
        return Err(Error::Contract("minimality needs a budget of at least 1".into()));
    }
    let dom = dominance_report(spec, x, budget)?;
    if !dom.dominant_at_x {
        return Err(Error::NotDominantAtPoint {
            reason: format!(
                "r = {}, r~ = {}, kernels {:?}",
                dom.r.rank, dom.r_tilde.rank, dom.kernel.verdict
            ),
        });
    }
    let sample = sample_orbit(spec, x, budget)?;

    let mut picked: Vec<usize> = Vec::new();
    let mut excluded = Vec::new();
    let in_u = |y: &[C64]| classify_point(spec, y, budget, spec.tolerances().rank, None, &[]).map(|e| e.in_u);
    if include_orbit_points {
        for (i, p) in sample.points.iter().enumerate() {
            if !region.contains(p) {
                continue;
            }
            if in_u(p)? {
                picked.push(i);
            } else {
                excluded.push(ExcludedCandidate {
                    point: p.clone(),
                    reason: "orbit point outside U".into(),
                });
            }
        }
    }
    for y in extra {
        if !in_u(y)? {
            excluded.push(ExcludedCandidate {
                point: y.clone(),
                reason: "outside U".into(),
            });
            continue;
        }
        match sample.nearest(y) {
            Some((i, _)) if region.contains(&sample.points[i]) => {
                if !picked.contains(&i) {
                    picked.push(i);
                }
            }
            _ => excluded.push(ExcludedCandidate {
                point: y.clone(),
                reason: "nearest orbit point lies outside the region".into(),
            }),
        }
    }
    if picked.is_empty() {
        return Err(Error::InconclusiveExperiment("no candidates in U ∩ region".into()));
    }
    let coarse = sample_orbit(spec, x, budget - 1)?;
    let baseline = match closure_distance(&sample, &coarse, region) {
        Err(Error::EmptyRegion) => {
            return Err(Error::InconclusiveExperiment(format!(
                "budget {} sample has no points in the region",
                budget - 1
            )))
        }
        other => other?,
    };
    let threshold = MINIMALITY_SAFETY * baseline + tol;
    let candidates: Vec<MinimalityCandidate> = picked
        .par_iter()
        .map(|&i| {
            let y = &sample.points[i];
            let candidate_budget = budget + sample.words[i].budget();
            let other = sample_orbit(spec, y, candidate_budget)?;
            let distance = closure_distance(&sample, &other, region)?;
            Ok(MinimalityCandidate {
                word: sample.words[i].clone(),
                point: y.clone(),
                candidate_budget,
                distance,
                pass: distance <= threshold,
            })
        })
        .collect::<Result<_>>()?;
    let pass = candidates.iter().all(|c| c.pass);
    Ok(MinimalityReport {
        budget,
        region: region.clone(),
        baseline,
        threshold,
        candidates,
        excluded,
        pass,
    })
}

/// Grid on a polydisc: in each coordinate, real and imaginary parts stepped
/// by `step` across the bounding square, kept when inside the disc.
pub fn polydisc_grid(region: &Polydisc, step: f64) -> Result<Vec<Vec<C64>>> {
    if step <= 0.0 {
        return Err(Error::Contract("grid step must be positive".into()));
    }
    let per_axis = (2.0 * region.radius / step).floor() as usize + 1;
    let per_coord: Vec<Vec<C64>> = region
        .center
        .iter()
        .map(|c| {
            let mut pts = Vec::new();
            for a in 0..per_axis {
                for b in 0..per_axis {
                    let z = C64::new(
                        c.re - region.radius + a as f64 * step,
                        c.im - region.radius + b as f64 * step,
                    );
                    if (z - c).norm() <= region.radius * (1.0 + 1e-12) {
                        pts.push(z);
                    }
                }
            }
            pts
        })
        .collect();
    let total = per_coord.iter().fold(1usize, |acc, p| acc.saturating_mul(p.len()));
    if total > 1_000_000 {
        return Err(Error::BudgetExceeded {
            words: total,
            limit: 1_000_000,
        });
    }
    let mut grid: Vec<Vec<C64>> = vec![Vec::new()];
    for coord in &per_coord {
        grid = grid
            .iter()
            .flat_map(|prefix| {
                coord.iter().map(move |z| {
                    let mut p = prefix.clone();
                    p.push(*z);
                    p
                })
            })
            .collect();
    }
    Ok(grid)
}

/// Largest distance from a grid point to its nearest sample point.
pub fn cover_radius(grid: &[Vec<C64>], points: &[Vec<C64>]) -> f64 {
    let dists: Vec<f64> = grid
        .par_iter()
        .map(|g| nearest(points, g).map_or(f64::INFINITY, |(_, d)| d))
        .collect();
    dists.into_iter().fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub budget: u32,
    pub sample_size: usize,
    pub eps_cover: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityTrend {
    /// Strictly decreasing over at least three budget increments.
    ConsistentWithDensity,
    /// Last value within 5% of the first.
    Flat,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub region: Polydisc,
    pub grid_step: f64,
    pub grid_points: usize,
    pub table: Vec<DensityRow>,
    pub strictly_decreasing: bool,
    /// `|ε_last − ε_first| / ε_first`.
    pub relative_change: f64,
    pub trend: DensityTrend,
}

/// Cover radius of the orbit sample over a polydisc grid, for each budget.
pub fn density_experiment(
    spec: &GroupSpec,
    x: &[C64],
    budgets: &[u32],
    region: &Polydisc,
    grid_step: f64,
) -> Result<DensityReport> {
    let grid = polydisc_grid(region, grid_step)?;
    let table = budgets
        .iter()
        .map(|&k| {
            let sample = sample_orbit(spec, x, k)?;
            Ok(DensityRow {
                budget: k,
                sample_size: sample.len(),
                eps_cover: cover_radius(&grid, &sample.points),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_density(region.clone(), grid_step, grid.len(), table))
}

fn summarize_density(region: Polydisc, grid_step: f64, grid_points: usize, table: Vec<DensityRow>) -> DensityReport {
    let strictly_decreasing = table.windows(2).all(|w| w[1].eps_cover < w[0].eps_cover);
    let relative_change = match (table.first(), table.last()) {
        (Some(a), Some(b)) if a.eps_cover > 0.0 => (b.eps_cover - a.eps_cover).abs() / a.eps_cover,
        _ => 0.0,
    };
    let trend = if strictly_decreasing && table.len() >= 4 {
        DensityTrend::ConsistentWithDensity
    } else if relative_change <= 0.05 {
        DensityTrend::Flat
    } else {
        DensityTrend::Inconclusive
    };
    DensityReport {
        region,
        grid_step,
        grid_points,
        table,
        strictly_decreasing,
        relative_change,
        trend,
    }
}
