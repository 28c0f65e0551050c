//! The `fisherlab` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::diagnostics::{
    divergence, fisher_information, grid_from_potential, instance_poincare_bound, muckenhoupt_b, DivergenceKind,
};
use crate::experiments::equivalence::equivalence_csv;
use crate::experiments::game::warm_init;
use crate::experiments::{
    fano_bound, fmt_float, game_csv, optimal_embed_dim, packing_count_bound, run_equivalence, run_identification_game,
    run_scaling, scaling_csv, trial_rng, write_result, Experiment, ExperimentConfig, ExperimentError, Sidecar,
};
use crate::instance::{load_instance, save_instance, validate_packing, BumpInstance, Constants, QUAD_TOL};
use crate::oracle::{CountingOracle, InitOracle};
use crate::samplers::{averaged_lmc_sample, exact_target_sample, grid_envelope, rejection_sample, warm_start_envelope};

/// Exit code for unknown subcommands or flags.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "fisherlab", version, about = "Query complexity experiments for sampling in Fisher information")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve `(r, R)` and the packing, and write an instance file.
    SolveInstance(SolveArgs),
    /// Load an instance file and check its defining properties.
    AuditInstance {
        path: PathBuf,
    },
    /// Draw samples from an instance with one of the samplers.
    Sample(SampleArgs),
    /// Grid diagnostics for a one-dimensional instance.
    Diagnose(DiagnoseArgs),
    /// Run the identification game from a config file.
    Game(RunArgs),
    /// Run the stationarity equivalence demo from a config file.
    Equivalence(RunArgs),
    /// Run a scaling study from a config file.
    Scaling(RunArgs),
    /// Evaluate a closed-form bound.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, conflicts_with = "big_r")]
    pub eps: Option<f64>,
    #[arg(long = "R", required_unless_present = "eps")]
    pub big_r: Option<f64>,
    #[arg(long, requires = "big_r")]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub omega: usize,
    #[arg(long, default_value_t = Constants::default().c_pi)]
    pub c_pi: f64,
    #[arg(long, default_value_t = Constants::default().c_r)]
    pub c_r: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerKind {
    Exact,
    RejectionGrid,
    RejectionWarm,
    AveragedLmc,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step size for averaged LMC.
    #[arg(long)]
    pub h: Option<f64>,
    /// Iterations for averaged LMC, trials for rejection sampling.
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    /// Largest grid net for the grid envelope.
    #[arg(long, default_value_t = 100_000)]
    pub net_limit: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 8192)]
    pub grid_n: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time per trial (makes the CSV non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["fano", "packing", "embed_dim", "holley_stroock", "fi_tv"])))]
pub struct BoundsArgs {
    #[arg(long)]
    pub fano: bool,
    #[arg(long)]
    pub packing: bool,
    #[arg(long)]
    pub embed_dim: bool,
    #[arg(long)]
    pub holley_stroock: bool,
    #[arg(long)]
    pub fi_tv: bool,
    #[arg(long = "M")]
    pub m: Option<u64>,
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub cpi: Option<f64>,
    /// Bound on the oscillation of the log density ratio.
    #[arg(long)]
    pub osc: Option<f64>,
    #[arg(long)]
    pub fi: Option<f64>,
}

/// Parses `args` and runs the command, writing results to `out` and messages to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, ExperimentError> {
    v.ok_or_else(|| ExperimentError::Validation(format!("missing --{flag}")))
}

fn print_json<S: Serialize>(out: &mut dyn Write, value: &S) -> Result<(), ExperimentError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ExperimentError::Config(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), ExperimentError> {
    match cmd {
        Command::SolveInstance(a) => solve(a, out),
        Command::AuditInstance { path } => audit(&path, out),
        Command::Sample(a) => sample(a, out),
        Command::Diagnose(a) => diagnose(a, out),
        Command::Game(a) => run_config(a, out, "game"),
        Command::Equivalence(a) => run_config(a, out, "equivalence"),
        Command::Scaling(a) => run_config(a, out, "scaling"),
        Command::Bounds(a) => bounds(a, out),
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let constants = Constants { c_pi: a.c_pi, c_r: a.c_r };
    let base = match (a.eps, a.r, a.big_r) {
        (Some(eps), _, _) => BumpInstance::from_eps(a.d, eps, &constants)?,
        (None, Some(r), Some(big_r)) => BumpInstance::from_radii(a.d, r, big_r)?,
        (None, None, Some(big_r)) => BumpInstance::from_big_r(a.d, big_r)?,
        _ => return Err(ExperimentError::Validation("give --eps or --R".into())),
    };
    let inst = base.with_omega(a.omega)?;
    save_instance(&inst, &a.out)?;
    writeln!(out, "d={} r={} R={} M={} residual={:.3e}", inst.d(), inst.r(), inst.big_r(), inst.num_centers(), inst.residual()?)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Audit {
    d: usize,
    r: f64,
    big_r: f64,
    num_centers: usize,
    residual: f64,
    bump_mass: f64,
    z_ratio: f64,
    warnings: Vec<String>,
    passed: bool,
}

const AUDIT_MASS_TOL: f64 = 1e-3;
const AUDIT_RESIDUAL_TOL: f64 = 1e-6;

fn audit(path: &Path, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let rep = load_instance(path)?;
    let inst = &rep.instance;
    validate_packing(inst.centers(), inst.d(), inst.r(), inst.big_r())?;
    let ints = inst.radial_integrals(QUAD_TOL)?;
    let bump_mass = ints.bump_mass(inst.d(), inst.r());
    let z_ratio = ints.z_omega / ints.z_init;
    let passed = (bump_mass - 0.5).abs() <= AUDIT_MASS_TOL && rep.residual <= AUDIT_RESIDUAL_TOL && z_ratio <= 2.0;
    let audit = Audit {
        d: inst.d(),
        r: inst.r(),
        big_r: inst.big_r(),
        num_centers: inst.num_centers(),
        residual: rep.residual,
        bump_mass,
        z_ratio,
        warnings: rep.warnings.clone(),
        passed,
    };
    print_json(out, &audit)?;
    if passed {
        Ok(())
    } else {
        Err(ExperimentError::Validation("instance failed the audit".into()))
    }
}

fn sample(a: SampleArgs, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let inst = load_instance(&a.instance)?.instance;
    let d = inst.d();
    let mut csv = String::from("sample");
    for j in 0..d {
        let _ = write!(csv, ",x{j}");
    }
    csv.push_str(",queries,accepted\n");
    let warm = match a.sampler {
        SamplerKind::RejectionWarm => Some(warm_init(&inst)?),
        SamplerKind::AveragedLmc => Some(InitOracle::pi_init(d, inst.big_r())?),
        _ => None,
    };
    for i in 0..a.count {
        let mut rng = trial_rng(a.seed, i);
        let mut oracle = CountingOracle::new(&inst);
        let (x, accepted) = match a.sampler {
            SamplerKind::Exact => (exact_target_sample(&inst, &mut rng)?, true),
            SamplerKind::RejectionGrid => {
                let env = grid_envelope(&mut oracle, inst.big_r(), a.net_limit)?;
                let draw = rejection_sample(&mut oracle, &env, a.n, &mut rng)?;
                (draw.x, draw.accepted)
            }
            SamplerKind::RejectionWarm => {
                let env = warm_start_envelope(warm.as_ref().expect("prepared"), &mut oracle)?;
                let draw = rejection_sample(&mut oracle, &env, a.n, &mut rng)?;
                (draw.x, draw.accepted)
            }
            SamplerKind::AveragedLmc => {
                let h = need(a.h, "h")?;
                (averaged_lmc_sample(&mut oracle, warm.as_ref().expect("prepared"), h, a.n, &mut rng)?.x, true)
            }
        };
        let _ = write!(csv, "{i}");
        for v in &x {
            let _ = write!(csv, ",{}", fmt_float(*v));
        }
        let _ = writeln!(csv, ",{},{}", oracle.count(), accepted as u8);
    }
    match a.out {
        Some(p) => std::fs::write(p, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Diagnosis {
    muckenhoupt_b: f64,
    cpi_upper: f64,
    cpi_bound: f64,
    kl_init: f64,
    tv_init: f64,
    fi_init: f64,
}

fn diagnose(a: DiagnoseArgs, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let inst = load_instance(&a.instance)?.instance;
    if inst.d() != 1 {
        return Err(ExperimentError::Validation("grid diagnostics need a one-dimensional instance".into()));
    }
    let lim = inst.big_r() + 12.0;
    let pi = grid_from_potential(&inst, -lim, lim, a.grid_n)?;
    let init = grid_from_potential(&inst.init_potential(), -lim, lim, a.grid_n)?;
    let m = muckenhoupt_b(&pi)?;
    let diag = Diagnosis {
        muckenhoupt_b: m.b,
        cpi_upper: m.cpi_upper(),
        cpi_bound: instance_poincare_bound(1, inst.r(), inst.big_r(), &Constants::default())?,
        kl_init: divergence(&init, &pi, DivergenceKind::Kl)?,
        tv_init: divergence(&init, &pi, DivergenceKind::Tv)?,
        fi_init: fisher_information(&init, &pi)?,
    };
    print_json(out, &diag)
}

fn emit<S: Serialize>(
    out: &mut dyn Write,
    path: Option<PathBuf>,
    csv: &str,
    cfg: &ExperimentConfig,
    summary: S,
) -> Result<(), ExperimentError> {
    match path {
        Some(p) => write_result(&p, csv, &Sidecar::new(cfg, summary)),
        None => Ok(out.write_all(csv.as_bytes())?),
    }
}

fn run_config(a: RunArgs, out: &mut dyn Write, expected: &str) -> Result<(), ExperimentError> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let path = a.out.clone().or_else(|| cfg.output.clone());
    match (&cfg.experiment, expected) {
        (Experiment::Game(g), "game") => {
            let stats = run_identification_game(g, &cfg.constants, cfg.trials, cfg.seed, a.timing)?;
            let csv = game_csv(&stats.records);
            emit(out, path, &csv, &cfg, &stats)
        }
        (Experiment::Equivalence(e), "equivalence") => {
            let rep = run_equivalence(e, cfg.trials, cfg.seed)?;
            let csv = equivalence_csv(&rep.records);
            emit(out, path, &csv, &cfg, &rep)
        }
        (Experiment::Scaling(s), "scaling") => {
            let rep = run_scaling(s, &cfg.constants)?;
            let csv = scaling_csv(&rep.rows);
            emit(out, path, &csv, &cfg, &rep)
        }
        _ => Err(ExperimentError::Validation(format!("config does not describe a {expected} experiment"))),
    }
}

fn bounds(a: BoundsArgs, out: &mut dyn Write) -> Result<(), ExperimentError> {
    let v = if a.fano {
        fano_bound(need(a.m, "M")?, need(a.n, "N")?)?
    } else if a.packing {
        packing_count_bound(need(a.d, "d")?, need(a.eps, "eps")?, a.c)?
    } else if a.embed_dim {
        optimal_embed_dim(need(a.eps, "eps")?)? as f64
    } else if a.holley_stroock {
        crate::diagnostics::holley_stroock_bound(need(a.cpi, "cpi")?, need(a.osc, "osc")?)?
    } else {
        crate::diagnostics::fi_tv_bound(need(a.cpi, "cpi")?, need(a.fi, "fi")?)?
    };
    writeln!(out, "{v}")?;
    Ok(())
}
