//! Truncated polynomial maps of `C^n` fixing the origin.
//!
//! A [`JetMap`] stores, per output component, a sparse table from monomial
//! multi-indices to complex coefficients. Every stored monomial has total
//! degree between 1 and the truncation degree `d`, so `f(0) = 0` holds by
//! construction. Arithmetic is carried out on dense coefficient vectors
//! indexed by a cached [`Basis`] and converted back to the sparse form.
//!
//! [`PolyMap`] is the untruncated counterpart that may carry a constant
//! term. It is only used before a group is normalized to fix the origin.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Coefficients with modulus below this are not stored.
pub const DEDUP_EPS: f64 = 1e-14;

/// Default truncation degree for scenarios that do not set one.
pub const DEFAULT_DEGREE: usize = 8;

/// Exponent vector of a monomial `x^α`.
///
/// Ordered graded-lexicographically: lower total degree first, then
/// larger leading exponents first (`z` before `w`, `z²` before `zw`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn constant(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    /// The monomial `x_j`.
    pub fn var(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn eval(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (xi, &e) in x.iter().zip(&self.0) {
            if e > 0 {
                acc *= xi.powu(e);
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dense monomial basis of `C[x_1..x_n]` up to degree `d`, constant included
/// at index 0, with a precomputed truncated multiplication table.
#[derive(Debug)]
pub struct Basis {
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// `products[i]` lists `(j, k)` with `mono[i] * mono[j] = mono[k]`, degree ≤ d.
    products: Vec<Vec<(usize, usize)>>,
    /// For every non-constant monomial: (index of the monomial divided by
    /// its first variable, that variable).
    pred: Vec<(usize, usize)>,
}

impl Basis {
    fn build(n: usize, d: usize) -> Basis {
        let mut monomials = Vec::new();
        for deg in 0..=d {
            let mut layer = Vec::new();
            let mut cur = vec![0u32; n];
            enumerate_degree(n, deg as u32, 0, &mut cur, &mut layer);
            layer.sort();
            monomials.extend(layer);
        }
        let index: HashMap<Monomial, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = vec![Vec::new(); monomials.len()];
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if (a.degree() + b.degree()) as usize <= d {
                    let sum: Vec<u32> = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                    products[i].push((j, index[&Monomial(sum)]));
                }
            }
        }
        let pred = monomials
            .iter()
            .map(|m| match m.0.iter().position(|&e| e > 0) {
                Some(v) => {
                    let mut e = m.0.clone();
                    e[v] -= 1;
                    (index[&Monomial(e)], v)
                }
                None => (0, 0),
            })
            .collect();
        Basis {
            monomials,
            index,
            products,
            pred,
        }
    }

    /// Shared basis for `(n, d)`; built once per process.
    pub fn get(n: usize, d: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry((n, d))
            .or_insert_with(|| Arc::new(Basis::build(n, d)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    fn mul(&self, a: &[C64], b: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        for (i, &ai) in a.iter().enumerate() {
            if ai.re == 0.0 && ai.im == 0.0 {
                continue;
            }
            for &(j, k) in &self.products[i] {
                out[k] += ai * b[j];
            }
        }
        out
    }

    fn to_dense(&self, table: &BTreeMap<Monomial, C64>) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.len()];
        for (m, c) in table {
            if let Some(&i) = self.index.get(m) {
                v[i] = *c;
            }
        }
        v
    }

    fn to_sparse(&self, v: &[C64], min_degree: u32) -> BTreeMap<Monomial, C64> {
        v.iter()
            .zip(&self.monomials)
            .filter(|(c, m)| m.degree() >= min_degree && c.norm() >= DEDUP_EPS)
            .map(|(c, m)| (m.clone(), *c))
            .collect()
    }

    /// Substitutes dense polynomials `subs[j]` for `x_j` into the sparse
    /// components, truncating at degree `d`.
    fn substitute(&self, components: &[BTreeMap<Monomial, C64>], subs: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let mut needed = vec![false; self.len()];
        for table in components {
            for m in table.keys() {
                if let Some(&i) = self.index.get(m) {
                    let mut k = i;
                    while k != 0 && !needed[k] {
                        needed[k] = true;
                        k = self.pred[k].0;
                    }
                }
            }
        }
        let mut powers: Vec<Option<Vec<C64>>> = vec![None; self.len()];
        let mut one = vec![C64::new(0.0, 0.0); self.len()];
        one[0] = C64::new(1.0, 0.0);
        powers[0] = Some(one);
        // graded order guarantees predecessors come first
        for k in 1..self.len() {
            if needed[k] {
                let (p, v) = self.pred[k];
                let prev = powers[p].as_ref().expect("predecessor computed");
                powers[k] = Some(self.mul(prev, &subs[v]));
            }
        }
        components
            .iter()
            .map(|table| {
                let mut acc = vec![C64::new(0.0, 0.0); self.len()];
                for (m, c) in table {
                    let Some(&i) = self.index.get(m) else { continue };
                    let p = powers[i].as_ref().expect("power computed");
                    for (a, b) in acc.iter_mut().zip(p) {
                        *a += c * b;
                    }
                }
                acc
            })
            .collect()
    }
}

fn enumerate_degree(n: usize, remaining: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(Monomial(cur.clone()));
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        enumerate_degree(n, remaining - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

/// One serialized coefficient of a polynomial map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub component: usize,
    pub monomial: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// A polynomial self-map of `C^n` truncated at degree `d`, with no constant term.
#[derive(Clone, PartialEq)]
pub struct JetMap {
    n: usize,
    d: usize,
    components: Vec<BTreeMap<Monomial, C64>>,
}

impl fmt::Debug for JetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetMap(n={}, d={}) [", self.n, self.d)?;
        for (i, table) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            let terms: Vec<String> = table
                .iter()
                .map(|(m, c)| format!("({}{:+}i)x^{:?}", c.re, c.im, m.0))
                .collect();
            write!(f, "{}", terms.join(" + "))?;
        }
        write!(f, "]")
    }
}

impl JetMap {
    fn empty(n: usize, d: usize) -> Result<JetMap> {
        if n == 0 || d == 0 {
            return Err(Error::Contract(format!(
                "jet dimension and degree must be positive (n={n}, d={d})"
            )));
        }
        Ok(JetMap {
            n,
            d,
            components: vec![BTreeMap::new(); n],
        })
    }

    /// Builds a jet from `(component, exponents, coefficient)` terms.
    /// Repeated monomials are summed; terms above degree `d` are dropped.
    pub fn from_terms<I>(n: usize, d: usize, terms: I) -> Result<JetMap>
    where
        I: IntoIterator<Item = (usize, Vec<u32>, C64)>,
    {
        let mut jet = JetMap::empty(n, d)?;
        for (comp, exps, c) in terms {
            if comp >= n {
                return Err(Error::Contract(format!("component {comp} out of range for n={n}")));
            }
            if exps.len() != n {
                return Err(Error::Contract(format!(
                    "monomial {exps:?} has {} exponents, expected {n}",
                    exps.len()
                )));
            }
            let m = Monomial(exps);
            match m.degree() {
                0 => {
                    return Err(Error::Contract(format!(
                        "constant term in component {comp}: jets must fix the origin"
                    )))
                }
                deg if deg as usize > d => continue,
                _ => {}
            }
            *jet.components[comp].entry(m).or_insert(C64::new(0.0, 0.0)) += c;
        }
        for table in &mut jet.components {
            table.retain(|_, c| c.norm() >= DEDUP_EPS);
        }
        Ok(jet)
    }

    pub fn from_records(n: usize, d: usize, records: &[TermRecord]) -> Result<JetMap> {
        JetMap::from_terms(
            n,
            d,
            records
                .iter()
                .map(|r| (r.component, r.monomial.clone(), C64::new(r.re, r.im))),
        )
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(i, table)| {
                table.iter().map(move |(m, c)| TermRecord {
                    component: i,
                    monomial: m.0.clone(),
                    re: c.re,
                    im: c.im,
                })
            })
            .collect()
    }

    pub fn identity(n: usize, d: usize) -> Result<JetMap> {
        JetMap::linear(&DMatrix::identity(n, n), d)
    }

    /// The linear map `x ↦ A x`.
    pub fn linear(a: &DMatrix<C64>, d: usize) -> Result<JetMap> {
        if !a.is_square() {
            return Err(Error::Contract("linear jet needs a square matrix".into()));
        }
        let n = a.nrows();
        let terms = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, Monomial::var(n, j).0, a[(i, j)]));
        JetMap::from_terms(n, d, terms)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn component(&self, i: usize) -> &BTreeMap<Monomial, C64> {
        &self.components[i]
    }

    pub fn coefficient(&self, i: usize, exps: &[u32]) -> C64 {
        self.components[i]
            .get(&Monomial(exps.to_vec()))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Largest total degree carrying a stored coefficient (0 for the zero map).
    pub fn effective_degree(&self) -> usize {
        self.components
            .iter()
            .flat_map(|t| t.keys())
            .map(|m| m.degree() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient modulus over all stored terms.
    pub fn max_coefficient(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|t| t.values())
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest coefficient modulus at the truncation degree. A nonzero value
    /// signals that compositions may have lost terms above `d`.
    pub fn top_degree_weight(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|t| t.iter())
            .filter(|(m, _)| m.degree() as usize == self.d)
            .fold(0.0, |acc, (_, c)| acc.max(c.norm()))
    }

    pub fn evaluate(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "point has dimension {}, jet has {}",
                x.len(),
                self.n
            )));
        }
        Ok(self
            .components
            .iter()
            .map(|table| table.iter().fold(C64::new(0.0, 0.0), |acc, (m, c)| acc + c * m.eval(x)))
            .collect())
    }

    /// `D_0 f`: entry `(i, j)` is the coefficient of `x_j` in component `i`.
    pub fn jacobian_at_zero(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.coefficient(i, &Monomial::var(self.n, j).0))
    }

    fn check_compatible(&self, other: &JetMap) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::Contract(format!(
                "incompatible jets: (n={}, d={}) vs (n={}, d={})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    /// Jet of `self ∘ other`, truncated at `d`.
    pub fn compose(&self, other: &JetMap) -> Result<JetMap> {
        self.check_compatible(other)?;
        let basis = Basis::get(self.n, self.d);
        let subs: Vec<Vec<C64>> = other.components.iter().map(|t| basis.to_dense(t)).collect();
        let dense = basis.substitute(&self.components, &subs);
        Ok(JetMap {
            n: self.n,
            d: self.d,
            components: dense.iter().map(|v| basis.to_sparse(v, 1)).collect(),
        })
    }

    pub fn add(&self, other: &JetMap) -> Result<JetMap> {
        self.combine(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &JetMap) -> Result<JetMap> {
        self.combine(other, C64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &JetMap, s: C64) -> Result<JetMap> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (table, rhs) in out.components.iter_mut().zip(&other.components) {
            for (m, c) in rhs {
                *table.entry(m.clone()).or_insert(C64::new(0.0, 0.0)) += s * c;
            }
            table.retain(|_, c| c.norm() >= DEDUP_EPS);
        }
        Ok(out)
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn distance(&self, other: &JetMap) -> Result<f64> {
        Ok(self.sub(other)?.max_coefficient())
    }

    /// Compositional inverse, solved one homogeneous degree at a time.
    ///
    /// Writing `f = A + N` with `N` the nonlinear part, the inverse satisfies
    /// `g = A⁻¹ (id − N∘g)`. The degree-`k` part of the right-hand side only
    /// involves parts of `g` of degree below `k`, so each pass of the
    /// recursion fixes one more degree; `d − 1` passes are exact.
    pub fn formal_inverse(&self, tau_inv: f64) -> Result<JetMap> {
        let a = self.jacobian_at_zero();
        let sv = a.clone().singular_values();
        let sigma_max = sv.max();
        let sigma_min = sv.min();
        if sigma_max == 0.0 || sigma_min <= tau_inv * sigma_max {
            return Err(Error::NotAnAutomorphismGerm { sigma_min });
        }
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or(Error::NotAnAutomorphismGerm { sigma_min })?;
        let nonlinear = self.sub(&JetMap::linear(&a, self.d)?)?;
        let a_inv_jet = JetMap::linear(&a_inv, self.d)?;
        let id = JetMap::identity(self.n, self.d)?;
        let mut g = a_inv_jet.clone();
        if nonlinear.max_coefficient() == 0.0 {
            return Ok(g);
        }
        for _ in 1..self.d {
            let rhs = id.sub(&nonlinear.compose(&g)?)?;
            g = a_inv_jet.compose(&rhs)?;
        }
        Ok(g)
    }

    /// Largest coefficient of `f∘g − g∘f`; zero when the pair commutes at
    /// truncation order.
    pub fn commutator_defect(&self, other: &JetMap) -> Result<f64> {
        self.compose(other)?.distance(&other.compose(self)?)
    }

    /// `f^e` for `e ≥ 0`, by repeated squaring.
    pub fn power(&self, e: u32) -> Result<JetMap> {
        let mut result = JetMap::identity(self.n, self.d)?;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(result)
    }
}

/// Polynomial self-map of `C^n`, constant term allowed, not truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    n: usize,
    components: Vec<BTreeMap<Monomial, C64>>,
}

impl PolyMap {
    pub fn from_terms<I>(n: usize, terms: I) -> Result<PolyMap>
    where
        I: IntoIterator<Item = (usize, Vec<u32>, C64)>,
    {
        if n == 0 {
            return Err(Error::Contract("dimension must be positive".into()));
        }
        let mut components = vec![BTreeMap::new(); n];
        for (comp, exps, c) in terms {
            if comp >= n || exps.len() != n {
                return Err(Error::Contract(format!(
                    "term for component {comp} with monomial {exps:?} does not fit n={n}"
                )));
            }
            *components[comp]
                .entry(Monomial(exps))
                .or_insert(C64::new(0.0, 0.0)) += c;
        }
        for table in &mut components {
            table.retain(|_, c: &mut C64| c.norm() >= DEDUP_EPS);
        }
        Ok(PolyMap { n, components })
    }

    /// Jet terms plus a constant vector.
    pub fn with_constant(jet: &JetMap, constant: &[C64]) -> Result<PolyMap> {
        if constant.len() != jet.n {
            return Err(Error::Contract("constant has wrong dimension".into()));
        }
        let mut components = jet.components.clone();
        for (table, c) in components.iter_mut().zip(constant) {
            if c.norm() >= DEDUP_EPS {
                table.insert(Monomial::constant(jet.n), *c);
            }
        }
        Ok(PolyMap {
            n: jet.n,
            components,
        })
    }

    pub fn from_jet(jet: &JetMap) -> PolyMap {
        PolyMap {
            n: jet.n,
            components: jet.components.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn total_degree(&self) -> usize {
        self.components
            .iter()
            .flat_map(|t| t.keys())
            .map(|m| m.degree() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn constant_term(&self) -> Vec<C64> {
        let zero = Monomial::constant(self.n);
        self.components
            .iter()
            .map(|t| t.get(&zero).copied().unwrap_or(C64::new(0.0, 0.0)))
            .collect()
    }

    pub fn evaluate(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "point has dimension {}, map has {}",
                x.len(),
                self.n
            )));
        }
        Ok(self
            .components
            .iter()
            .map(|table| table.iter().fold(C64::new(0.0, 0.0), |acc, (m, c)| acc + c * m.eval(x)))
            .collect())
    }

    /// Jacobian matrix at an arbitrary point.
    pub fn jacobian_at(&self, x: &[C64]) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.components[i]
                .iter()
                .filter(|(m, _)| m.0[j] > 0)
                .fold(C64::new(0.0, 0.0), |acc, (m, c)| {
                    let mut e = m.0.clone();
                    let k = e[j];
                    e[j] -= 1;
                    acc + c * (k as f64) * Monomial(e).eval(x)
                })
        })
    }

    /// `y ↦ f(y + p) − p`, the conjugate by the translation `y ↦ y + p`.
    pub fn conjugate_by_translation(&self, p: &[C64]) -> Result<PolyMap> {
        if p.len() != self.n {
            return Err(Error::Contract("translation has wrong dimension".into()));
        }
        let deg = self.total_degree().max(1);
        let basis = Basis::get(self.n, deg);
        let subs: Vec<Vec<C64>> = (0..self.n)
            .map(|j| {
                let mut v = vec![C64::new(0.0, 0.0); basis.len()];
                v[0] = p[j];
                v[basis.index[&Monomial::var(self.n, j)]] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        let mut dense = basis.substitute(&self.components, &subs);
        for (v, pj) in dense.iter_mut().zip(p) {
            v[0] -= pj;
        }
        Ok(PolyMap {
            n: self.n,
            components: dense.iter().map(|v| basis.to_sparse(v, 0)).collect(),
        })
    }

    /// Truncates to a jet. Fails when the constant term is above `tol`.
    pub fn to_jet(&self, d: usize, tol: f64) -> Result<JetMap> {
        let c = DVector::from_vec(self.constant_term());
        if c.norm() > tol {
            return Err(Error::Contract(format!(
                "map does not fix the origin (|f(0)| = {:e})",
                c.norm()
            )));
        }
        JetMap::from_terms(
            self.n,
            d,
            self.components.iter().enumerate().flat_map(|(i, t)| {
                t.iter()
                    .filter(|(m, _)| m.degree() > 0)
                    .map(move |(m, c)| (i, m.0.clone(), *c))
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// h(z, w) = (2z, 4w + z²)
    fn resonant(d: usize) -> JetMap {
        JetMap::from_terms(
            2,
            d,
            [
                (0, vec![1, 0], c(2.0)),
                (1, vec![0, 1], c(4.0)),
                (1, vec![2, 0], c(1.0)),
            ],
        )
        .unwrap()
    }

    fn shear(d: usize) -> JetMap {
        JetMap::from_terms(
            2,
            d,
            [
                (0, vec![1, 0], c(1.0)),
                (1, vec![0, 1], c(1.0)),
                (1, vec![2, 0], c(1.0)),
            ],
        )
        .unwrap()
    }

    fn diag(a: f64, b: f64, d: usize) -> JetMap {
        JetMap::linear(&DMatrix::from_diagonal(&DVector::from_vec(vec![c(a), c(b)])), d).unwrap()
    }

    #[test]
    fn graded_order() {
        let b = Basis::get(2, 2);
        let exps: Vec<Vec<u32>> = b.monomials.iter().map(|m| m.0.clone()).collect();
        assert_eq!(
            exps,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn evaluate_examples() {
        let id = JetMap::identity(2, 3).unwrap();
        assert_eq!(id.evaluate(&[c(3.0), c(-1.0)]).unwrap(), vec![c(3.0), c(-1.0)]);
        assert_eq!(resonant(4).evaluate(&[c(1.0), c(1.0)]).unwrap(), vec![c(2.0), c(5.0)]);
        assert_eq!(diag(2.0, 3.0, 4).evaluate(&[c(1.0), c(1.0)]).unwrap(), vec![c(2.0), c(3.0)]);
        assert!(id.evaluate(&[c(1.0)]).is_err());
        assert_eq!(resonant(4).evaluate(&[c(0.0), c(0.0)]).unwrap(), vec![c(0.0), c(0.0)]);
    }

    #[test]
    fn compose_examples() {
        let h = resonant(4);
        let hh = h.compose(&h).unwrap();
        assert_eq!(hh.coefficient(0, &[1, 0]), c(4.0));
        assert_eq!(hh.coefficient(1, &[0, 1]), c(16.0));
        assert_eq!(hh.coefficient(1, &[2, 0]), c(8.0));
        assert_eq!(hh.component(1).len(), 2);

        let f = shear(4);
        let g = diag(2.0, 4.0, 4);
        let fg = f.compose(&g).unwrap();
        let gf = g.compose(&f).unwrap();
        assert_eq!(fg, gf);
        assert_eq!(fg.coefficient(1, &[2, 0]), c(4.0));
        assert_eq!(f.compose(&JetMap::identity(2, 4).unwrap()).unwrap(), f);
    }

    #[test]
    fn constant_terms_rejected() {
        assert!(JetMap::from_terms(2, 3, [(0, vec![0, 0], c(1.0))]).is_err());
        assert!(JetMap::from_terms(2, 3, [(2, vec![1, 0], c(1.0))]).is_err());
        assert!(JetMap::from_terms(0, 3, Vec::<(usize, Vec<u32>, C64)>::new()).is_err());
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(JetMap::identity(3, 2).unwrap().jacobian_at_zero(), DMatrix::identity(3, 3));
        let j = resonant(3).jacobian_at_zero();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(4.0)]));
        assert_eq!(shear(3).jacobian_at_zero(), DMatrix::identity(2, 2));
    }

    #[test]
    fn inverse_examples() {
        let id = JetMap::identity(2, 5).unwrap();
        assert_eq!(id.formal_inverse(1e-12).unwrap(), id);

        let s_inv = shear(5).formal_inverse(1e-12).unwrap();
        assert_eq!(s_inv.coefficient(1, &[2, 0]), c(-1.0));
        assert_eq!(s_inv.component(1).len(), 2);
        assert!(shear(5).compose(&s_inv).unwrap().distance(&id).unwrap() < 1e-12);

        let d_inv = diag(2.0, 3.0, 5).formal_inverse(1e-12).unwrap();
        assert!(d_inv.distance(&diag(0.5, 1.0 / 3.0, 5)).unwrap() < 1e-15);

        let singular = diag(1.0, 0.0, 3);
        assert!(matches!(
            singular.formal_inverse(1e-12),
            Err(Error::NotAnAutomorphismGerm { .. })
        ));
    }

    #[test]
    fn commutator_examples() {
        let h = resonant(4);
        assert_eq!(h.commutator_defect(&h).unwrap(), 0.0);
        assert_eq!(shear(4).commutator_defect(&diag(2.0, 4.0, 4)).unwrap(), 0.0);
        let f = diag(2.0, 1.0, 3);
        let g = JetMap::from_terms(
            2,
            3,
            [(0, vec![1, 0], c(1.0)), (0, vec![0, 1], c(1.0)), (1, vec![0, 1], c(1.0))],
        )
        .unwrap();
        assert!(f.commutator_defect(&g).unwrap() > 0.5);
    }

    #[test]
    fn resonant_power_closed_form() {
        // c_k = k 4^(k-1), checked by iterating the composition one step at a time
        let h = resonant(6);
        let mut iter = JetMap::identity(2, 6).unwrap();
        for k in 1..=6u32 {
            iter = h.compose(&iter).unwrap();
            let ck = k as f64 * 4f64.powi(k as i32 - 1);
            assert_eq!(iter.coefficient(1, &[2, 0]), c(ck));
            assert_eq!(h.power(k).unwrap(), iter);
        }
    }

    #[test]
    fn translation_conjugate() {
        // f(x) = 2(x - 1) + 1 fixes 1; conjugate is 2x
        let f = PolyMap::from_terms(1, [(0, vec![1], c(2.0)), (0, vec![0], c(-1.0))]).unwrap();
        let g = f.conjugate_by_translation(&[c(1.0)]).unwrap();
        let jet = g.to_jet(3, 1e-12).unwrap();
        assert_eq!(jet, JetMap::linear(&DMatrix::from_element(1, 1, c(2.0)), 3).unwrap());
        assert!(f.to_jet(3, 1e-12).is_err());
    }

    #[test]
    fn jacobian_at_point() {
        let p = PolyMap::from_jet(&resonant(3));
        let j = p.jacobian_at(&[c(3.0), c(1.0)]);
        assert_eq!(j[(1, 0)], c(6.0));
        assert_eq!(j[(1, 1)], c(4.0));
        assert_eq!(j[(0, 1)], c(0.0));
    }
}
