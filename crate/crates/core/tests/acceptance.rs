//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any of them fails.

mod common;

use std::path::Path;
use std::time::Instant;

use common::*;
use orbita::cli::main_with_args;
use orbita::group::{build_sampled_operators, build_sampled_operators_for_words, kernel_consistency, GroupSpec, KernelVerdict};
use orbita::jet::JetMap;
use orbita::linalg::{
    self, classify_stratum, linear_dominance, simultaneous_block_triangularize, LinearGroupSpec, LinearTolerances,
    NormalFormOptions, Stratum,
};
use orbita::linearization::{build_phi_x, pushforward_orbit_check};
use orbita::orbit::{classify_point, density_experiment, relative_minimality_experiment};
use orbita::scenario::{Prepared, Scenario};
use orbita::word::Word;
use orbita::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

const FIXTURES: [&str; 9] = [
    "linear_diag",
    "linear_diag_pair",
    "jordan",
    "resonant",
    "affine",
    "identity",
    "dense_plane",
    "scalar_two",
    "mixed_fixed_points",
];

fn prepared(name: &str) -> (Scenario, Prepared) {
    let s = Scenario::load(&fixture(name)).unwrap();
    let p = s.prepare(s.seed).unwrap();
    (s, p)
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut morph, mut round) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (f, g) = commuting_pair(&mut rng, 6);
        let lhs = f.compose(&g).unwrap().jacobian_at_zero();
        let rhs = f.jacobian_at_zero() * g.jacobian_at_zero();
        morph = morph.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
        let inv = f.formal_inverse(1e-12).unwrap();
        let id = JetMap::identity(2, 6).unwrap();
        round = round.max(max_coefficient_gap(&f.compose(&inv).unwrap(), &id));
        round = round.max(max_coefficient_gap(&inv.compose(&f).unwrap(), &id));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        morph <= 1e-12 && round <= 1e-10 && secs < 10.0,
        format!("morphism {morph:.2e}, round-trip {round:.2e}, {secs:.2}s"),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let all: Vec<Vec<usize>> = (1..=4).flat_map(partitions).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut wrong_eta, mut worst) = (0, 0.0f64);
    for i in 0..100 {
        let eta = &all[i % all.len()];
        let p = planted(&mut rng, eta);
        let n = eta.iter().sum();
        let lin = LinearGroupSpec::new(n, p.gens.clone(), 2, LinearTolerances::default()).unwrap();
        let bs = match simultaneous_block_triangularize(&lin, &NormalFormOptions::default()) {
            Ok(bs) => bs,
            Err(e) => return Err(format!("case {i} ({eta:?}): {e}")),
        };
        // match recovered blocks to planted blocks by eigenvalue tuple
        let mut used = vec![false; eta.len()];
        let matched = bs.eta.len() == eta.len()
            && bs.eta.iter().enumerate().all(|(k, &size)| {
                let hit = (0..eta.len()).find(|&b| {
                    !used[b]
                        && eta[b] == size
                        && (0..2).all(|g| (bs.block_eigenvalues[g][k] - p.lambdas[g][b]).norm() < 1e-6)
                });
                hit.map(|b| used[b] = true).is_some()
            });
        if !matched {
            wrong_eta += 1;
        }
        for a in &p.gens {
            worst = worst.max(bs.off_pattern(a) / linalg::frobenius(a));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        wrong_eta == 0 && worst <= 1e-8 && secs < 30.0,
        format!("{wrong_eta} wrong η, worst off-pattern {worst:.2e}·‖A‖, {secs:.2}s"),
    )
}

fn criterion_3() -> Verdict {
    let all: Vec<Vec<usize>> = (1..=4).flat_map(partitions).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut probes, mut bad) = (0usize, 0usize);
    for eta in &all {
        let p = planted(&mut rng, eta);
        let n: usize = eta.iter().sum();
        let lin = LinearGroupSpec::new(n, p.gens.clone(), 2, LinearTolerances::default()).unwrap();
        let bs = simultaneous_block_triangularize(&lin, &NormalFormOptions::default()).unwrap();
        let offsets: Vec<usize> = eta.iter().scan(0, |acc, &s| { let o = *acc; *acc += s; Some(o) }).collect();
        let mut sample = |hole: Option<usize>| -> Vec<Vec<C64>> {
            (0..100)
                .map(|_| {
                    let mut u: Vec<C64> = (0..n).map(|_| random_complex(&mut rng, 1.0)).collect();
                    for (k, &o) in offsets.iter().enumerate() {
                        u[o] = if Some(k) == hole { c(0.0) } else { random_unitish(&mut rng, 0.3, 1.0) };
                    }
                    linalg::apply(&p.q, &u)
                })
                .collect()
        };
        let mut batches = vec![(None, sample(None))];
        for k in 0..eta.len() {
            batches.push((Some(k), sample(Some(k))));
        }
        for (hole, us) in batches {
            let rep = linear_dominance(&lin, &bs, &us);
            if !rep.dominant {
                return Err(format!("planted group {eta:?} is not dominant"));
            }
            for (u, pv) in us.iter().zip(&rep.probes) {
                probes += 1;
                let in_v = classify_stratum(u, &bs, 1e-9) == Stratum::InV;
                let rank_ok = if hole.is_none() { pv.rank == n } else { pv.rank < n };
                if in_v != hole.is_none() || !rank_ok || !pv.consistent {
                    bad += 1;
                }
            }
        }
    }
    check(bad == 0, format!("{probes} probes over {} partitions, {bad} misclassified", all.len()))
}

fn criterion_4() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["linear_diag", "linear_diag_pair", "jordan", "scalar_two", "dense_plane", "affine"] {
        let (_, p) = prepared(name);
        let spec = &p.normalized.spec;
        for x in &p.base_points {
            let ops = build_sampled_operators(spec, x, 6).unwrap();
            let map = match build_phi_x(&ops, spec.tolerances()) {
                Ok(m) => m,
                Err(e) => return Err(format!("{name}: {e}")),
            };
            let defect = map.identity_defect();
            let residual = pushforward_orbit_check(&map, spec, x, 6).unwrap().max_error;
            ok &= defect <= 1e-10 && residual <= 1e-8;
            details.push(format!("{name} ‖M−I‖ {defect:.1e} residual {residual:.1e}"));
        }
    }
    // the identity group has r(x) = 1 < n, so it is refused rather than linearized
    let (_, p) = prepared("identity");
    let ops = build_sampled_operators(&p.normalized.spec, &p.base_points[0], 6).unwrap();
    let refused = matches!(build_phi_x(&ops, p.normalized.spec.tolerances()), Err(Error::NotDominantAtPoint { .. }));
    ok &= refused;
    details.push(format!("identity refused {refused}"));
    check(ok, details.join("; "))
}

fn criterion_5() -> Verdict {
    let h = resonant();
    // c_k = k·4^(k−1) for the z² coefficient of the second component of h^k
    let mut power = JetMap::identity(2, 8).unwrap();
    for k in 1..=6u32 {
        power = h.compose(&power).unwrap();
        let ck = power.coefficient(1, &[2, 0]);
        let expected = f64::from(k) * 4f64.powi(k as i32 - 1);
        if (ck - c(expected)).norm() > 1e-9 * expected {
            return Err(format!("c_{k} = {ck}, expected {expected}"));
        }
    }
    let spec = spec(vec![h]);
    let words = vec![Word(vec![0]), Word(vec![1]), Word(vec![2])];
    let ops = build_sampled_operators_for_words(&spec, &v(&[1.0, 1.0]), words).unwrap();
    let rep = kernel_consistency(&ops, spec.tolerances().rank, spec.tolerances().kernel_cos);
    let norm = rep.witness.as_ref().map_or(f64::NAN, |w| w.image_norm);
    let dir = tempfile::tempdir().unwrap();
    let code = main_with_args([
        "orbita".as_ref(),
        "linearize".as_ref(),
        "--scenario".as_ref(),
        fixture("resonant").as_os_str(),
        "--out".as_ref(),
        dir.path().as_os_str(),
    ]);
    check(
        rep.verdict == KernelVerdict::Inconsistent && (norm - 2.0).abs() <= 1e-9 && code == 4,
        format!("verdict {:?}, witness image norm {norm:.12}, linearize exit {code}", rep.verdict),
    )
}

fn random_word<R: Rng>(rng: &mut R, m: usize) -> Word {
    Word((0..m).map(|_| rng.gen_range(-3..=3)).collect())
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut checked, mut violations) = (0, 0);
    for name in FIXTURES {
        let s = Scenario::load(&fixture(name)).unwrap();
        // no common fixed point, so there is no group to sample
        let Ok(p) = s.prepare(s.seed) else { continue };
        let spec: &GroupSpec = &p.normalized.spec;
        let budget = s.budget().min(3);
        for x in &p.base_points {
            let rx = classify_point(spec, x, budget, spec.tolerances().rank, None, &[]).unwrap().r;
            for _ in 0..50 {
                let w = random_word(&mut rng, spec.generator_count());
                let y = spec.evaluate_word(&w, x).unwrap();
                let ry = classify_point(spec, &y, budget, spec.tolerances().rank, None, &[]).unwrap().r;
                checked += 1;
                if rx != ry {
                    violations += 1;
                }
            }
        }
    }
    check(violations == 0, format!("{checked} word images, {violations} violations"))
}

fn criterion_7() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["linear_diag", "affine", "linear_diag_pair", "scalar_two", "dense_plane"] {
        let (_, p) = prepared(name);
        let spec = &p.normalized.spec;
        let x = &p.base_points[0];
        let mut margins = Vec::new();
        for k in 4..=6 {
            let rep = relative_minimality_experiment(spec, x, k, &p.region, 1e-8, true, &[]).unwrap();
            let worst = rep.candidates.iter().map(|c| c.distance).fold(0.0, f64::max);
            ok &= rep.pass;
            margins.push(format!("{worst:.3}/{:.3}", rep.threshold));
            // a point on an invariant hyperplane, outside U
            let mut h = x.clone();
            h[0] = c(0.0);
            let counter = relative_minimality_experiment(spec, x, k, &p.region, 1e-8, false, &[h]);
            match counter {
                Ok(r) if r.pass => {
                    ok = false;
                    margins.push("counterexample passed".into());
                }
                Ok(_) | Err(Error::InconclusiveExperiment(_)) => {}
                Err(e) => return Err(format!("{name}: {e}")),
            }
        }
        details.push(format!("{name} [{}]", margins.join(" ")));
    }
    check(ok, details.join("; "))
}

fn criterion_8() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, dense) in [("dense_plane", true), ("scalar_two", false)] {
        let (s, p) = prepared(name);
        let rep = density_experiment(&p.normalized.spec, &p.base_points[0], &[3, 4, 5, 6], &p.region, s.grid_step).unwrap();
        let eps: Vec<String> = rep.table.iter().map(|r| format!("{:.3}", r.eps_cover)).collect();
        ok &= if dense { rep.strictly_decreasing } else { rep.relative_change <= 0.05 };
        details.push(format!("{name} ε_cover [{}]", eps.join(", ")));
    }
    check(ok, details.join("; "))
}

fn run_suite(out: &Path, jobs: &str) {
    for name in FIXTURES {
        let path = fixture(name);
        let dir = out.join(name);
        main_with_args([
            "orbita".as_ref(),
            "run".as_ref(),
            "--scenario".as_ref(),
            path.as_os_str(),
            "--out".as_ref(),
            dir.as_os_str(),
            "--jobs".as_ref(),
            jobs.as_ref(),
        ]);
    }
}

fn collect(root: &Path) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for fixture_dir in std::fs::read_dir(root).unwrap() {
        let fixture_dir = fixture_dir.unwrap().path();
        for f in std::fs::read_dir(&fixture_dir).unwrap() {
            let f = f.unwrap().path();
            let rel = f.strip_prefix(root).unwrap().display().to_string();
            files.push((rel, without_timestamp(&std::fs::read_to_string(&f).unwrap())));
        }
    }
    files.sort();
    files
}

fn criterion_9() -> Verdict {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_suite(a.path(), "1");
    run_suite(b.path(), "8");
    let fa = collect(a.path());
    let fb = collect(b.path());
    let differing: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    check(
        fa.len() == fb.len() && !fa.is_empty() && differing.is_empty(),
        format!("{} files vs {}, differing {differing:?}", fa.len(), fb.len()),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (i, f) in criteria {
        match f() {
            Ok(d) => println!("criterion {i}: PASS {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {i}: FAIL {d}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
