//! Command-line front end of the membrane laboratory.
//!
//! Every subcommand reads a JSON config (flags override it), writes
//! machine-readable outputs to one directory and exits with 0 when every
//! check passes, 1 when a check fails or the run aborts, and 2 on usage errors.
//! Outputs other than the manifest contain no timestamps, so identical
//! configs give identical bytes.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use membrane_core::evolver::{Background, EvolutionMode, Evolver, RunOutput, RunSummary};
use membrane_core::extremal::operator_algebra;
use membrane_core::grid::{write_csv, Grid2D};
use membrane_core::inequalities::{run_estimate, Estimate};
use membrane_core::profile::WaveProfile;
use membrane_core::traveling_waves::{
    affine_subluminal_solution, lightspeed_solution, residual_convergence, residual_converges, superluminal_solution,
    TravelingWaveSolution,
};
use membrane_core::vector_fields::{commutator_suite, decomposition_defects, VectorFieldId};
use serde::Serialize;

use config::{LabConfig, OUT_ENV};

/// Bounds of the evolution checks.
pub const SUP_FACTOR: f64 = 10.0;
pub const ENERGY_FACTOR: f64 = 2.0;
pub const MIN_DELTA: f64 = 0.5;
pub const HAMILTONIAN_DRIFT: f64 = 1e-4;
pub const DECAY_SLOPE: f64 = -0.10;
/// Bounds of the operator checks.
pub const COMMUTATOR_TOL: f64 = 1e-8;
pub const DECOMPOSITION_TOL: f64 = 1e-12;
pub const NULL_FORM_TOL: f64 = 1e-11;
pub const M_FORM_TOL: f64 = 1e-10;
/// Random jets in the operator-algebra check.
pub const ALGEBRA_JETS: usize = 1000;

#[derive(Parser, Debug)]
#[command(name = "membrane-lab", version, about = "Numerical laboratory for relativistic membranes around traveling waves")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// JSON config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config and the environment).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Residual convergence of the exact traveling-wave families.
    VerifyExact(VerifyArgs),
    /// Seeded max-ratio statistics of the functional inequalities.
    Inequalities(InequalityArgs),
    /// Commutators with the wave operator and operator identities.
    Commutators(CommutatorArgs),
    /// Evolves the perturbation and checks stability.
    Evolve(EvolveArgs),
    /// Evolves and fits the decay of the Goursat stations.
    Decay(EvolveArgs),
    /// Evolves and reports the energy series.
    Energy(EvolveArgs),
    /// Evolves and writes field dumps at the requested times.
    Dump(DumpArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// affine, lightspeed, superluminal or all.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    scheme_order: Option<usize>,
    /// Comma-separated grid sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct InequalityArgs {
    /// Comma-separated estimate names, or all.
    #[arg(long, value_delimiter = ',')]
    which: Option<Vec<String>>,
    #[arg(long)]
    count: Option<usize>,
    /// Also run the refined lattice and report the drift.
    #[arg(long)]
    refine: Option<bool>,
}

#[derive(Args, Debug)]
struct CommutatorArgs {
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct EvolveArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    half_width: Option<f64>,
    /// perturbation, full_surface or linear_reference.
    #[arg(long)]
    mode: Option<String>,
    /// Background profile name.
    #[arg(long)]
    profile: Option<String>,
    /// Background profile amplitude.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Evolve around the flat membrane.
    #[arg(long)]
    flat: bool,
    #[arg(long)]
    scheme_order: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    emit_every: Option<f64>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[command(flatten)]
    evolve: EvolveArgs,
    /// Comma-separated dump times.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
}

/// Outcome of one subcommand.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<membrane_core::Error> for Failure {
    fn from(e: membrane_core::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

/// One pass/fail line of a summary.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            pass: value >= bound,
        }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            bound: 1.0,
            pass,
        }
    }
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    subcommand: &'static str,
    passed: bool,
    checks: Vec<Check>,
    detail: T,
}

#[derive(Serialize)]
struct Manifest {
    subcommand: &'static str,
    config: Option<PathBuf>,
    seed: u64,
    output_dir: PathBuf,
    tool_version: &'static str,
    wall_clock_seconds: f64,
    steps: Option<usize>,
}

struct Ctx {
    cfg: LabConfig,
    out: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_summary<T: Serialize>(&self, sub: &'static str, checks: Vec<Check>, detail: T) -> Result<bool, Failure> {
        let passed = checks.iter().all(|c| c.pass);
        for c in &checks {
            println!("{} {} {:e} (bound {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.bound);
        }
        let s = Summary {
            subcommand: sub,
            passed,
            checks,
            detail,
        };
        fs::write(self.path(&format!("{}_summary.json", sub.replace('-', "_"))), serde_json::to_string_pretty(&s)? + "\n")?;
        Ok(passed)
    }

    fn write_ndjson<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), Failure> {
        let mut f = std::io::BufWriter::new(fs::File::create(self.path(name))?);
        for r in rows {
            serde_json::to_writer(&mut f, r)?;
            f.write_all(b"\n")?;
        }
        f.flush()?;
        Ok(())
    }

    fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(msg)) => {
            eprintln!("run failed: {msg}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let start = Instant::now();
    let mut cfg = match &cli.config {
        Some(p) => LabConfig::load(p).map_err(Failure::Usage)?,
        None => LabConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&out)?;
    let seed = cfg.seed;
    let mut ctx = Ctx { cfg, out: out.clone() };
    let (name, passed, steps) = match cli.command {
        Command::VerifyExact(a) => ("verify-exact", verify_exact(&mut ctx, a)?, None),
        Command::Inequalities(a) => ("inequalities", inequalities(&mut ctx, a)?, None),
        Command::Commutators(a) => ("commutators", commutators(&mut ctx, a)?, None),
        Command::Evolve(a) => evolve_like(&mut ctx, "evolve", a, None)?,
        Command::Decay(a) => evolve_like(&mut ctx, "decay", a, None)?,
        Command::Energy(a) => evolve_like(&mut ctx, "energy", a, None)?,
        Command::Dump(a) => {
            let times = a.times.clone().unwrap_or_else(|| vec![0.0, ctx.cfg.sim.t_end]);
            evolve_like(&mut ctx, "dump", a.evolve, Some(times))?
        }
    };
    let manifest = Manifest {
        subcommand: name,
        config: cli.config,
        seed,
        output_dir: out,
        tool_version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        steps,
    };
    fs::write(
        ctx.path(&format!("{}_manifest.json", name.replace('-', "_"))),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(passed)
}

#[derive(Serialize)]
struct ResidualCsvRow {
    family: &'static str,
    n: usize,
    h: f64,
    residual: f64,
    order: Option<f64>,
}

fn verify_exact(ctx: &mut Ctx, a: VerifyArgs) -> Result<bool, Failure> {
    let v = &mut ctx.cfg.verify;
    if let Some(f) = a.family {
        v.family = f;
    }
    if let Some(p) = a.profile {
        v.profile = p;
    }
    if let Some(o) = a.scheme_order {
        v.scheme_order = o;
    }
    if let Some(s) = a.sizes {
        v.sizes = s;
    }
    if v.scheme_order != 2 && v.scheme_order != 4 {
        return Err(Failure::Usage("scheme order must be 2 or 4".into()));
    }
    let v = v.clone();
    let profile = v.profile().map_err(|e| Failure::Usage(e.to_string()))?;
    let families: Vec<&'static str> = match v.family.as_str() {
        "all" => vec!["affine", "lightspeed", "superluminal"],
        "affine" => vec!["affine"],
        "lightspeed" => vec!["lightspeed"],
        "superluminal" => vec!["superluminal"],
        other => return Err(Failure::Usage(format!("unknown family {other}"))),
    };
    let build = |fam: &str, profile: WaveProfile| -> membrane_core::Result<TravelingWaveSolution> {
        match fam {
            "affine" => affine_subluminal_solution(&[0.3, 0.4], 0.1, v.affine_speed),
            "lightspeed" => lightspeed_solution(v.a, v.b, profile, 1.0),
            _ => superluminal_solution(v.superluminal_speed, profile, 1.0),
        }
    };
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for fam in families {
        let sol = build(fam, profile.clone())?;
        let table = residual_convergence(&sol, v.half_width, &v.sizes, v.t, v.dt_ratio, v.scheme_order)?;
        let worst = table.iter().filter_map(|r| r.order).fold(f64::INFINITY, f64::min);
        let pass = residual_converges(&table, v.scheme_order);
        checks.push(Check {
            name: format!("{fam}_min_order"),
            value: worst,
            bound: v.scheme_order as f64 - 0.3,
            pass,
        });
        for r in table {
            println!("{fam} n={} h={} residual={:e} order={:?}", r.n, r.h, r.residual, r.order);
            rows.push(ResidualCsvRow {
                family: fam,
                n: r.n,
                h: r.h,
                residual: r.residual,
                order: r.order,
            });
        }
    }
    ctx.write_csv("verify_exact.csv", &rows)?;
    ctx.write_summary("verify-exact", checks, &v)
}

fn inequalities(ctx: &mut Ctx, a: InequalityArgs) -> Result<bool, Failure> {
    let ic = &mut ctx.cfg.inequalities;
    if let Some(w) = a.which {
        ic.which = w;
    }
    if let Some(c) = a.count {
        ic.count = c;
    }
    if let Some(r) = a.refine {
        ic.refine = r;
    }
    if ic.count == 0 {
        return Err(Failure::Usage("count must be positive".into()));
    }
    let mut list = Vec::new();
    for w in &ic.which {
        if w == "all" {
            list.extend(Estimate::ALL);
        } else {
            list.push(Estimate::from_name(w).ok_or_else(|| Failure::Usage(format!("unknown estimate {w}")))?);
        }
    }
    list.dedup();
    let (count, refine, seed) = (ic.count, ic.refine, ctx.cfg.seed);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for e in list {
        let r = run_estimate(e, count, seed, refine)?;
        checks.push(Check {
            name: e.name().to_string(),
            value: r.max_ratio,
            bound: if e == Estimate::Hardy {
                membrane_core::inequalities::HARDY_BOUND
            } else {
                f64::INFINITY
            },
            pass: r.accepted,
        });
        rows.push(r);
    }
    #[derive(Serialize)]
    struct Row {
        estimate: &'static str,
        count: usize,
        max_ratio: f64,
        argmax: usize,
        refinement_drift: Option<f64>,
        translation_growth: Option<f64>,
        violations: Option<usize>,
        accepted: bool,
    }
    let csv_rows: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            estimate: r.estimate.name(),
            count: r.count,
            max_ratio: r.max_ratio,
            argmax: r.argmax,
            refinement_drift: r.refinement_drift,
            translation_growth: r.translation_growth,
            violations: r.violations,
            accepted: r.accepted,
        })
        .collect();
    ctx.write_csv("inequalities.csv", &csv_rows)?;
    ctx.write_summary("inequalities", checks, &rows)
}

fn commutators(ctx: &mut Ctx, a: CommutatorArgs) -> Result<bool, Failure> {
    let cc = &mut ctx.cfg.commutators;
    if let Some(c) = a.count {
        cc.count = c;
    }
    if let Some(d) = a.degree {
        cc.degree = d;
    }
    if cc.count == 0 || !(2..=4).contains(&cc.degree) {
        return Err(Failure::Usage("count must be positive and degree in 2..=4".into()));
    }
    let (count, degree, seed) = (cc.count, cc.degree, ctx.cfg.seed);
    let rows = commutator_suite(&VectorFieldId::GAMMA, seed, count, degree);
    let mut checks: Vec<Check> = rows
        .iter()
        .map(|r| Check::at_most(format!("commutator_{}", r.id.name()), r.max_lambda_error, COMMUTATOR_TOL))
        .collect();
    for (name, gap) in decomposition_defects(seed, count, degree) {
        checks.push(Check::at_most(name, gap, DECOMPOSITION_TOL));
    }
    let alg = operator_algebra(seed, ALGEBRA_JETS)?;
    checks.push(Check::at_most("null_form_cartesian_vs_goursat", alg.null_form_gap, NULL_FORM_TOL));
    checks.push(Check::at_most("m_form_vs_residual", alg.m_form_rel_gap, M_FORM_TOL));
    #[derive(Serialize)]
    struct Row {
        field: &'static str,
        expected: f64,
        lambda_min: f64,
        lambda_max: f64,
        max_lambda_error: f64,
        max_residual: f64,
    }
    let csv_rows: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            field: r.id.name(),
            expected: r.expected,
            lambda_min: r.lambda_min,
            lambda_max: r.lambda_max,
            max_lambda_error: r.max_lambda_error,
            max_residual: r.max_residual,
        })
        .collect();
    ctx.write_csv("commutators.csv", &csv_rows)?;
    ctx.write_summary("commutators", checks, (&rows, alg))
}

fn apply_evolve_args(cfg: &mut LabConfig, a: &EvolveArgs) -> Result<(), Failure> {
    let sim = &mut cfg.sim;
    if let Some(e) = a.epsilon {
        sim.epsilon = e;
    }
    if let Some(t) = a.t_end {
        sim.t_end = t;
    }
    if a.n.is_some() || a.half_width.is_some() {
        let n = a.n.unwrap_or(sim.grid.n1);
        let hw = a.half_width.unwrap_or(sim.grid.half_width());
        sim.grid = Grid2D::square(hw, n).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(m) = &a.mode {
        sim.mode = serde_json::from_value::<EvolutionMode>(serde_json::Value::String(m.clone()))
            .map_err(|_| Failure::Usage(format!("unknown mode {m}")))?;
    }
    if a.flat {
        sim.background = Background::None;
    } else if a.profile.is_some() || a.amplitude.is_some() {
        let (a0, b0, sign, old) = match &sim.background {
            Background::Lightspeed { a, b, sign, profile } => (*a, *b, *sign, Some(profile.clone())),
            Background::None => (0.0, 1.0, 1.0, None),
        };
        let name = a.profile.clone().unwrap_or_else(|| old.as_ref().map_or("sech", |p| p.name()).to_string());
        let amp = a.amplitude.unwrap_or(0.5);
        let profile =
            WaveProfile::from_name(&name, &[("amplitude".to_string(), amp)]).map_err(|e| Failure::Usage(e.to_string()))?;
        sim.background = Background::Lightspeed {
            a: a0,
            b: b0,
            profile,
            sign,
        };
    }
    if let Some(s) = a.scheme_order {
        sim.scheme_order = s;
    }
    if let Some(c) = a.cfl {
        sim.cfl = c;
    }
    if let Some(e) = a.emit_every {
        sim.emit_every = e;
    }
    Ok(())
}

/// The stability, energy and propagation checks of one run.
fn run_checks(sub: &str, eps: f64, s: &RunSummary) -> Vec<Check> {
    let mut checks = vec![
        Check::at_most("sup_u", s.max_sup_u, SUP_FACTOR * eps),
        Check::at_most("energy_ratio", s.energy_ratio_max, ENERGY_FACTOR),
        Check::at_least("min_delta", s.min_delta, MIN_DELTA),
        Check::flag("support_within_t_plus_1_plus_2h", s.support_ok),
        Check::at_most("cone_violations", s.cone_violations as f64, 0.0),
    ];
    if let Some(d) = s.hamiltonian_drift {
        checks.push(Check::at_most("hamiltonian_drift", d, HAMILTONIAN_DRIFT));
    }
    if sub == "decay" {
        let slope = s.decay_fit.as_ref().map_or(f64::NAN, |f| f.slope);
        checks.push(Check {
            name: "decay_slope".into(),
            value: slope,
            bound: DECAY_SLOPE,
            pass: slope <= DECAY_SLOPE,
        });
    }
    checks
}

fn evolve_like(
    ctx: &mut Ctx,
    sub: &'static str,
    a: EvolveArgs,
    dump_times: Option<Vec<f64>>,
) -> Result<(&'static str, bool, Option<usize>), Failure> {
    apply_evolve_args(&mut ctx.cfg, &a)?;
    if let Some(t) = dump_times {
        ctx.cfg.sim.dump_times = t;
    }
    let sim = ctx.cfg.sim.clone();
    let ev = Evolver::new(sim.clone()).map_err(|e| Failure::Usage(e.to_string()))?;
    let out: RunOutput = ev.run()?;
    match sub {
        "evolve" => {
            ctx.write_ndjson("evolve_emissions.ndjson", &out.emissions)?;
            ctx.write_ndjson("evolve_stations.ndjson", &out.stations)?;
        }
        "energy" => ctx.write_ndjson("energy.ndjson", &out.emissions)?,
        "decay" => ctx.write_ndjson("decay.ndjson", &out.stations)?,
        _ => {
            for s in &out.snapshots {
                for (tag, f) in [("u", &s.u), ("u_t", &s.u_t)] {
                    let path = ctx.path(&format!("dump_t{:08.3}_{tag}.csv", s.t));
                    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
                    write_csv(f, &mut w)?;
                    w.flush()?;
                }
            }
        }
    }
    for e in &out.emissions {
        println!("t={:.3} sup_u={:e} min_delta={:.6} energy={:e}", e.t, e.sup_u, e.min_delta, e.energy_proxy);
    }
    let checks = run_checks(sub, sim.epsilon, &out.summary);
    let passed = ctx.write_summary(sub, checks, &out.summary)?;
    Ok((sub, passed, Some(out.summary.steps)))
}

/// [`dispatch`] with the program name supplied.
pub fn dispatch_args(args: &[&str]) -> i32 {
    let mut v: Vec<String> = vec!["membrane-lab".into()];
    v.extend(args.iter().map(|s| s.to_string()));
    dispatch(v)
}
