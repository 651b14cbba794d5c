//! Scenario-driven command line: each command reads one scenario file and
//! writes a JSON report (plus CSV point clouds) into an output directory.
//!
//! Exit codes: 0 success, 1 schema or other error, 2 non-commuting
//! generators, 3 ill-conditioned spectrum or normal-form residual,
//! 4 linearization refused, 5 inconclusive experiment.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{build_sampled_operators, dominance_report, GroupTolerances};
use crate::linalg::{self, linear_dominance, simultaneous_block_triangularize, BlockStructure};
use crate::linearization::{
    affine_baseline_check, build_phi_x, closure_compatibility_check, pushforward_orbit_check, triples_csv,
    verify_orbit_bijection,
};
use crate::orbit::{classify_point, density_experiment, omega_image_check, relative_minimality_experiment, sample_orbit};
use crate::scenario::{Prepared, Scenario};
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Distance used to decide whether a closure candidate is near the sample.
const CLOSURE_EPS: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "orbita", version, about = "Linearization and orbit experiments for abelian groups of polynomial automorphisms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simultaneous block triangularization of the linear parts.
    NormalForm(CommonArgs),
    /// Ranks and kernel consistency at each base point.
    Dominance(CommonArgs),
    /// Build the linearizing map and check its properties.
    Linearize(CommonArgs),
    /// Orbit samples and rank invariance.
    Orbit(CommonArgs),
    /// Relative minimality experiment.
    Minimality(CommonArgs),
    /// Cover-radius trend over budgets.
    Density(CommonArgs),
    /// Every command listed in the scenario (all of them when empty).
    Run(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "orbita-out")]
    pub out: PathBuf,
    /// Worker threads for data-parallel sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub budget_override: Option<u32>,
    /// Seed for random probes; overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    NormalForm,
    Dominance,
    Linearize,
    Orbit,
    Minimality,
    Density,
}

impl CommandKind {
    pub const ALL: [CommandKind; 6] = [
        CommandKind::NormalForm,
        CommandKind::Dominance,
        CommandKind::Linearize,
        CommandKind::Orbit,
        CommandKind::Minimality,
        CommandKind::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::NormalForm => "normal-form",
            CommandKind::Dominance => "dominance",
            CommandKind::Linearize => "linearize",
            CommandKind::Orbit => "orbit",
            CommandKind::Minimality => "minimality",
            CommandKind::Density => "density",
        }
    }

    pub fn parse(s: &str) -> Option<CommandKind> {
        CommandKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Per-run settings shared by all commands.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub budget_override: Option<u32>,
    pub seed: Option<u64>,
}

/// A finished command: report body, CSV artifacts and exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: CommandKind,
    pub report: Value,
    pub artifacts: Vec<(String, String)>,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    tool_version: &'a str,
    command: &'a str,
    scenario: &'a str,
    scenario_hash: String,
    budget: u32,
    density_budgets: &'a [u32],
    minimality_budgets: Vec<u32>,
    tolerances: GroupTolerances,
    seed: u64,
    status: &'a str,
    exit_code: i32,
    error: Option<String>,
    timestamp: String,
    result: &'a Value,
}

/// Exit code for an error raised by `kind`.
pub fn exit_code(err: &Error, kind: CommandKind) -> i32 {
    match err {
        Error::NotAbelian { .. } => 2,
        Error::IllConditionedSpectrum { .. } | Error::NormalFormResidual { .. } => 3,
        Error::IllDefinedLinearization { .. } => 4,
        Error::NotDominantAtPoint { .. } if kind == CommandKind::Linearize => 4,
        Error::InconclusiveExperiment(_) => 5,
        _ => 1,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn cvec(v: &[C64]) -> Value {
    to_value(&crate::serde_util::vec_to_records(v))
}

fn error_value(e: &Error) -> Value {
    json!({ "error": e.to_string() })
}

/// Runs one command on an already loaded scenario.
pub fn execute(kind: CommandKind, scenario: &Scenario, opts: &RunOptions) -> Outcome {
    let seed = opts.seed.unwrap_or(scenario.seed);
    let budget = opts.budget_override.unwrap_or_else(|| scenario.budget());
    let prepared = match scenario.prepare(seed) {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                command: kind,
                report: error_value(&e),
                artifacts: Vec::new(),
                exit_code: exit_code(&e, kind),
            }
        }
    };
    let minimality_budgets = match opts.budget_override {
        Some(k) => vec![k],
        None => scenario.minimality_budgets(),
    };
    let ctx = Ctx {
        scenario,
        prep: &prepared,
        budget,
        seed,
        minimality_budgets,
    };
    let res = match kind {
        CommandKind::NormalForm => cmd_normal_form(&ctx),
        CommandKind::Dominance => cmd_dominance(&ctx),
        CommandKind::Linearize => cmd_linearize(&ctx),
        CommandKind::Orbit => cmd_orbit(&ctx),
        CommandKind::Minimality => cmd_minimality(&ctx),
        CommandKind::Density => cmd_density(&ctx),
    };
    let fixed_point = cvec(&prepared.normalized.fixed_point);
    match res {
        Ok((mut report, artifacts, code)) => {
            if let Value::Object(map) = &mut report {
                map.insert("fixed_point".into(), fixed_point);
            }
            Outcome {
                command: kind,
                report,
                artifacts,
                exit_code: code,
            }
        }
        Err(e) => Outcome {
            command: kind,
            report: error_value(&e),
            artifacts: Vec::new(),
            exit_code: exit_code(&e, kind),
        },
    }
}

/// Full JSON report text for an outcome.
pub fn render_report(outcome: &Outcome, scenario: &Scenario, opts: &RunOptions) -> String {
    let error = outcome.report.get("error").and_then(|e| e.as_str()).map(str::to_owned);
    let minimality_budgets = match opts.budget_override {
        Some(k) => vec![k],
        None => scenario.minimality_budgets(),
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
        .to_string();
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        command: outcome.command.name(),
        scenario: &scenario.name,
        scenario_hash: scenario.hash(),
        budget: opts.budget_override.unwrap_or_else(|| scenario.budget()),
        density_budgets: &scenario.density_budgets,
        minimality_budgets,
        tolerances: scenario.tolerances,
        seed: opts.seed.unwrap_or(scenario.seed),
        status: if outcome.exit_code == 0 { "ok" } else { "error" },
        exit_code: outcome.exit_code,
        error,
        timestamp,
        result: &outcome.report,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("report serializes");
    text.push('\n');
    text
}

/// Writes the report and artifacts of `outcome` into `out`.
pub fn write_outcome(outcome: &Outcome, scenario: &Scenario, opts: &RunOptions, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{}.json", outcome.command.name()));
    std::fs::write(&path, render_report(outcome, scenario, opts))?;
    info!("wrote {}", path.display());
    for (name, body) in &outcome.artifacts {
        std::fs::write(out.join(name), body)?;
    }
    Ok(())
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    prep: &'a Prepared,
    budget: u32,
    seed: u64,
    minimality_budgets: Vec<u32>,
}

type CmdResult = Result<(Value, Vec<(String, String)>, i32)>;

fn block_structure(ctx: &Ctx) -> Result<(linalg::LinearGroupSpec, BlockStructure)> {
    let lin = ctx.prep.normalized.spec.linear_part(ctx.budget)?;
    let bs = simultaneous_block_triangularize(&lin, &ctx.scenario.normal_form)?;
    Ok((lin, bs))
}

fn cmd_normal_form(ctx: &Ctx) -> CmdResult {
    let (lin, bs) = block_structure(ctx)?;
    Ok((
        json!({ "block_structure": to_value(&bs), "span_dim": lin.span_dim() }),
        Vec::new(),
        0,
    ))
}

fn cmd_dominance(ctx: &Ctx) -> CmdResult {
    let spec = &ctx.prep.normalized.spec;
    let tol = spec.tolerances().rank;
    let points: Vec<Value> = ctx
        .prep
        .base_points
        .iter()
        .map(|x| match dominance_report(spec, x, ctx.budget) {
            Ok(r) => to_value(&r),
            Err(e) => error_value(&e),
        })
        .collect();
    let (linear, bs) = match block_structure(ctx) {
        Ok((lin, bs)) => (to_value(&linear_dominance(&lin, &bs, &ctx.prep.probes)), Some(bs)),
        Err(e) => (error_value(&e), None),
    };
    let strata: Vec<Value> = ctx
        .prep
        .probes
        .iter()
        .map(|y| match classify_point(spec, y, ctx.budget, tol, bs.as_ref(), &(1..=spec.dim()).collect::<Vec<_>>()) {
            Ok(e) => to_value(&e),
            Err(e) => error_value(&e),
        })
        .collect();
    Ok((json!({ "base_points": points, "linear": linear, "probe_strata": strata }), Vec::new(), 0))
}

fn cmd_linearize(ctx: &Ctx) -> CmdResult {
    let spec = &ctx.prep.normalized.spec;
    let tol = spec.tolerances();
    let mut code = 0;
    let mut artifacts = Vec::new();
    let mut points = Vec::new();
    for (i, x) in ctx.prep.base_points.iter().enumerate() {
        let ops = build_sampled_operators(spec, x, ctx.budget)?;
        let map = match build_phi_x(&ops, tol) {
            Ok(m) => m,
            Err(e) => {
                let c = exit_code(&e, CommandKind::Linearize);
                if c == 1 {
                    return Err(e);
                }
                if code == 0 {
                    code = c;
                }
                points.push(error_value(&e));
                continue;
            }
        };
        artifacts.push((format!("linearize_{i}.csv"), triples_csv(&map, &ops)));
        let bijection = verify_orbit_bijection(&map, spec, x, ctx.budget)?;
        let pushforward = ctx
            .prep
            .probes
            .iter()
            .map(|y| pushforward_orbit_check(&map, spec, y, ctx.budget).map(|r| to_value(&r)))
            .collect::<Result<Vec<_>>>()?;
        let sample = sample_orbit(spec, x, ctx.budget)?;
        let mut candidates = sample.points.clone();
        candidates.extend(ctx.prep.candidates.iter().cloned());
        let closure = closure_compatibility_check(&map, spec, &sample, &candidates, CLOSURE_EPS, tol.residual)?;
        let omega = omega_image_check(&map, &ctx.prep.probes, spec, ctx.budget, tol.rank)?;
        if !bijection.passes(tol.residual) || closure.violations > 0 || !omega.mismatches.is_empty() {
            warn!("linearization checks reported failures at base point {i}");
        }
        points.push(json!({
            "map": to_value(&map),
            "bijection": to_value(&bijection),
            "pushforward": pushforward,
            "closure": to_value(&closure),
            "omega_image": to_value(&omega),
        }));
    }
    let affine = if ctx.prep.is_affine() {
        match affine_baseline_check(&ctx.prep.presentation, ctx.budget, ctx.seed) {
            Ok(r) => to_value(&r),
            Err(e) => error_value(&e),
        }
    } else {
        Value::Null
    };
    Ok((json!({ "base_points": points, "affine_baseline": affine }), artifacts, code))
}

fn cmd_orbit(ctx: &Ctx) -> CmdResult {
    let spec = &ctx.prep.normalized.spec;
    let tol = spec.tolerances().rank;
    let mut artifacts = Vec::new();
    let mut points = Vec::new();
    for (i, x) in ctx.prep.base_points.iter().enumerate() {
        let sample = sample_orbit(spec, x, ctx.budget)?;
        artifacts.push((format!("orbit_{i}.csv"), sample.to_csv()));
        let base = classify_point(spec, x, ctx.budget, tol, None, &(1..=spec.dim()).collect::<Vec<_>>())?;
        let mut violations = Vec::new();
        for (w, p) in sample.words.iter().zip(&sample.points) {
            let e = classify_point(spec, p, ctx.budget, tol, None, &[])?;
            if e.r != base.r {
                violations.push(json!({ "word": w.tag(), "r": e.r }));
            }
        }
        points.push(json!({
            "sample_size": sample.len(),
            "words": sample.words.iter().map(|w| w.tag()).collect::<Vec<_>>(),
            "stratum": to_value(&base),
            "rank_invariance_violations": violations,
        }));
    }
    Ok((json!({ "base_points": points }), artifacts, 0))
}

fn cmd_minimality(ctx: &Ctx) -> CmdResult {
    let spec = &ctx.prep.normalized.spec;
    let tol = spec.tolerances().residual;
    let mut code = 0;
    let mut rows = Vec::new();
    for x in &ctx.prep.base_points {
        let mut per_budget = Vec::new();
        for &k in &ctx.minimality_budgets {
            match relative_minimality_experiment(spec, x, k, &ctx.prep.region, tol, true, &ctx.prep.candidates) {
                Ok(r) => per_budget.push(to_value(&r)),
                Err(e @ Error::InconclusiveExperiment(_)) => {
                    code = 5;
                    per_budget.push(error_value(&e));
                }
                Err(e) => return Err(e),
            }
        }
        rows.push(Value::Array(per_budget));
    }
    Ok((json!({ "region": to_value(&ctx.prep.region), "base_points": rows }), Vec::new(), code))
}

fn cmd_density(ctx: &Ctx) -> CmdResult {
    let spec = &ctx.prep.normalized.spec;
    let budgets: Vec<u32> = match ctx.scenario.density_budgets.as_slice() {
        [] => vec![ctx.budget],
        b => b.to_vec(),
    };
    let mut csv = String::from("base_point,budget,sample_size,eps_cover\n");
    let mut rows = Vec::new();
    for (i, x) in ctx.prep.base_points.iter().enumerate() {
        let region = if i == 0 { ctx.prep.region.clone() } else { crate::orbit::Polydisc::unit(x) };
        let rep = density_experiment(spec, x, &budgets, &region, ctx.scenario.grid_step)?;
        for row in &rep.table {
            csv.push_str(&format!("{i},{},{},{:e}\n", row.budget, row.sample_size, row.eps_cover));
        }
        rows.push(to_value(&rep));
    }
    Ok((json!({ "base_points": rows }), vec![("density.csv".into(), csv)], 0))
}

/// Runs `kinds` in order, writing every report. Returns the first
/// nonzero exit code.
pub fn run_commands(kinds: &[CommandKind], scenario: &Scenario, opts: &RunOptions, out: &Path) -> Result<i32> {
    let mut code = 0;
    for &k in kinds {
        let outcome = execute(k, scenario, opts);
        write_outcome(&outcome, scenario, opts, out)?;
        if code == 0 {
            code = outcome.exit_code;
        }
    }
    Ok(code)
}

fn dispatch(cli: Cli) -> i32 {
    let (kinds, args) = match cli.command {
        Command::NormalForm(a) => (Some(vec![CommandKind::NormalForm]), a),
        Command::Dominance(a) => (Some(vec![CommandKind::Dominance]), a),
        Command::Linearize(a) => (Some(vec![CommandKind::Linearize]), a),
        Command::Orbit(a) => (Some(vec![CommandKind::Orbit]), a),
        Command::Minimality(a) => (Some(vec![CommandKind::Minimality]), a),
        Command::Density(a) => (Some(vec![CommandKind::Density]), a),
        Command::Run(a) => (None, a),
    };
    let scenario = match Scenario::load(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("orbita: {e}");
            return 1;
        }
    };
    let kinds = match kinds {
        Some(k) => k,
        None if scenario.commands.is_empty() => CommandKind::ALL.to_vec(),
        None => {
            let mut ks = Vec::new();
            for name in &scenario.commands {
                match CommandKind::parse(name) {
                    Some(k) => ks.push(k),
                    None => {
                        eprintln!("orbita: unknown command {name:?} in scenario");
                        return 1;
                    }
                }
            }
            ks
        }
    };
    let opts = RunOptions {
        budget_override: args.budget_override,
        seed: args.seed,
    };
    let work = || run_commands(&kinds, &scenario, &opts, &args.out);
    let result = match args.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                eprintln!("orbita: {e}");
                return 1;
            }
        },
        None => work(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("orbita: {e}");
            1
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    }
}

/// Logger controlled by `ORBITA_LOG`.
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("ORBITA_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}
