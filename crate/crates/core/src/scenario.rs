//! Scenario files: one JSON document describing a group, the points to
//! study, budgets, tolerances and the commands to run.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{default_budget, normalize_fixed_point, GroupPresentation, GroupTolerances, Normalized};
use crate::jet::{JetMap, PolyMap, TermRecord, DEFAULT_DEGREE};
use crate::linalg::NormalFormOptions;
use crate::orbit::Polydisc;
use crate::C64;

/// A generator: either a bare list of terms (no constant) or an object
/// with `terms` and an optional `constant`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorRecord {
    Terms(Vec<TermRecord>),
    Affine {
        terms: Vec<TermRecord>,
        #[serde(default, with = "crate::serde_util::cvec_opt")]
        constant: Option<Vec<C64>>,
    },
}

impl GeneratorRecord {
    pub fn terms(&self) -> &[TermRecord] {
        match self {
            GeneratorRecord::Terms(t) | GeneratorRecord::Affine { terms: t, .. } => t,
        }
    }

    pub fn constant(&self) -> Option<&[C64]> {
        match self {
            GeneratorRecord::Affine { constant: Some(c), .. } => Some(c),
            _ => None,
        }
    }

    fn to_poly(&self, n: usize) -> Result<PolyMap> {
        let degree = self.terms().iter().map(|t| t.monomial.iter().sum::<u32>() as usize).max().unwrap_or(1).max(1);
        let jet = JetMap::from_records(n, degree, self.terms())?;
        match self.constant() {
            Some(c) => PolyMap::with_constant(&jet, c),
            None => Ok(PolyMap::from_jet(&jet)),
        }
    }
}

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

fn default_grid_step() -> f64 {
    0.25
}

fn default_density_budgets() -> Vec<u32> {
    vec![3, 4, 5, 6]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    #[serde(default = "default_degree")]
    pub degree: usize,
    pub generators: Vec<GeneratorRecord>,
    #[serde(default)]
    pub inverses: Option<Vec<GeneratorRecord>>,
    #[serde(default, with = "crate::serde_util::cvec_opt")]
    pub fixed_point: Option<Vec<C64>>,
    /// Word budget; defaults to 6 for one generator and 3 otherwise.
    #[serde(default)]
    pub budget: Option<u32>,
    #[serde(with = "crate::serde_util::cvec_list")]
    pub base_points: Vec<Vec<C64>>,
    #[serde(default, with = "crate::serde_util::cvec_list")]
    pub probes: Vec<Vec<C64>>,
    /// Extra probes drawn uniformly from `[-1, 1]²` per coordinate.
    #[serde(default)]
    pub probe_count: usize,
    #[serde(default)]
    pub tolerances: GroupTolerances,
    #[serde(default)]
    pub normal_form: NormalFormOptions,
    /// Defaults to the unit polydisc around the first base point.
    #[serde(default)]
    pub region: Option<Polydisc>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default = "default_density_budgets")]
    pub density_budgets: Vec<u32>,
    /// Budgets for the minimality experiment; defaults to `[budget]`.
    #[serde(default)]
    pub minimality_budgets: Vec<u32>,
    /// Extra candidate points for the minimality experiment.
    #[serde(default, with = "crate::serde_util::cvec_list")]
    pub candidates: Vec<Vec<C64>>,
    /// Commands executed by `run`.
    #[serde(default)]
    pub commands: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.generators.is_empty() {
            return bad("generator list is empty".into());
        }
        if self.degree == 0 {
            return bad("degree must be positive".into());
        }
        for (i, g) in self.generators.iter().chain(self.inverses.iter().flatten()).enumerate() {
            for t in g.terms() {
                if t.component >= self.n || t.monomial.len() != self.n {
                    return bad(format!("generator {i}: term does not fit dimension {}", self.n));
                }
            }
            if g.constant().is_some_and(|c| c.len() != self.n) {
                return bad(format!("generator {i}: constant has wrong length"));
            }
        }
        if let Some(inv) = &self.inverses {
            if inv.len() != self.generators.len() {
                return bad("inverses and generators differ in number".into());
            }
        }
        let points = self.base_points.iter().chain(&self.probes).chain(&self.candidates);
        if points.chain(self.fixed_point.iter()).any(|p| p.len() != self.n) {
            return bad("a point has the wrong dimension".into());
        }
        if self.base_points.is_empty() {
            return bad("no base points".into());
        }
        if let Some(r) = &self.region {
            if r.center.len() != self.n || r.radius <= 0.0 {
                return bad("region must have dimension n and positive radius".into());
            }
        }
        if self.grid_step <= 0.0 {
            return bad("grid_step must be positive".into());
        }
        Ok(())
    }

    /// Compact JSON of the parsed scenario, fields in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    /// Hex SHA-256 of [`Scenario::canonical_json`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn budget(&self) -> u32 {
        self.budget.unwrap_or_else(|| default_budget(self.generators.len()))
    }

    pub fn minimality_budgets(&self) -> Vec<u32> {
        if self.minimality_budgets.is_empty() {
            vec![self.budget()]
        } else {
            self.minimality_budgets.clone()
        }
    }

    pub fn presentation(&self) -> Result<GroupPresentation> {
        let generators = self.generators.iter().map(|g| g.to_poly(self.n)).collect::<Result<_>>()?;
        let inverses = match &self.inverses {
            Some(inv) => Some(inv.iter().map(|g| g.to_poly(self.n)).collect::<Result<_>>()?),
            None => None,
        };
        Ok(GroupPresentation {
            n: self.n,
            degree: self.degree,
            generators,
            inverses,
            fixed_point: self.fixed_point.clone(),
            tol: self.tolerances,
        })
    }

    /// Normalized group plus every scenario point shifted to normalized
    /// coordinates.
    pub fn prepare(&self, seed: u64) -> Result<Prepared> {
        let pres = self.presentation()?;
        let normalized = normalize_fixed_point(&pres)?;
        let p = normalized.fixed_point.clone();
        let shift = |x: &Vec<C64>| -> Vec<C64> { x.iter().zip(&p).map(|(a, b)| a - b).collect() };
        let base_points: Vec<Vec<C64>> = self.base_points.iter().map(shift).collect();
        let mut probes: Vec<Vec<C64>> = self.probes.iter().map(shift).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..self.probe_count {
            probes.push(
                (0..self.n)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            );
        }
        let region = match &self.region {
            Some(r) => Polydisc::new(shift(&r.center), r.radius),
            None => Polydisc::unit(&base_points[0]),
        };
        Ok(Prepared {
            presentation: pres,
            normalized,
            base_points,
            probes,
            candidates: self.candidates.iter().map(shift).collect(),
            region,
        })
    }
}

pub struct Prepared {
    pub presentation: GroupPresentation,
    pub normalized: Normalized,
    pub base_points: Vec<Vec<C64>>,
    pub probes: Vec<Vec<C64>>,
    pub candidates: Vec<Vec<C64>>,
    pub region: Polydisc,
}

impl Prepared {
    /// True when every generator has degree at most one.
    pub fn is_affine(&self) -> bool {
        self.presentation.generators.iter().all(|g| g.total_degree() <= 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG: &str = r#"{
        "n": 2,
        "generators": [[
            {"component": 0, "monomial": [1, 0], "re": 2.0, "im": 0.0},
            {"component": 1, "monomial": [0, 1], "re": 3.0, "im": 0.0}
        ]],
        "base_points": [[{"re": 1.0, "im": 0.0}, {"re": 1.0, "im": 0.0}]]
    }"#;

    #[test]
    fn parses_and_hashes() {
        let s = Scenario::from_json(DIAG).unwrap();
        assert_eq!(s.budget(), 6);
        assert_eq!(s.degree, DEFAULT_DEGREE);
        let h = s.hash();
        assert_eq!(h.len(), 64);
        let again = Scenario::from_json(&s.canonical_json()).unwrap();
        assert_eq!(again.hash(), h);
    }

    #[test]
    fn rejects_empty_generators() {
        let text = r#"{"n": 1, "generators": [], "base_points": [[{"re": 1.0, "im": 0.0}]]}"#;
        assert!(matches!(Scenario::from_json(text), Err(Error::Scenario(_))));
    }

    #[test]
    fn affine_generator_is_shifted() {
        let text = r#"{
            "n": 1,
            "generators": [{"terms": [{"component": 0, "monomial": [1], "re": 2.0, "im": 0.0}],
                            "constant": [{"re": -1.0, "im": 0.0}]}],
            "base_points": [[{"re": 2.0, "im": 0.0}]]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        let prep = s.prepare(0).unwrap();
        assert!(prep.is_affine());
        assert!((prep.normalized.fixed_point[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((prep.base_points[0][0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
