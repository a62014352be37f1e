use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nshs_core::harness::{self, kato_monitor, norm_history, run_convergence};
use nshs_core::io::{self, emit_outputs, Artifact, ExperimentConfig};
use nshs_core::kernels::residual_resolved;
use nshs_core::norms::{triple_norm, validate_initial_data};
use nshs_core::solvers::{run, SolverKind, Trajectory};
use nshs_core::verify::{self, summary_csv, InequalityReport, KernelBoundSetup};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "nshs", version, about = "Half-plane Navier-Stokes vorticity solver and verification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Experiment file (TOML with [physics] [numerics] [norms] [io]).
    #[arg(long)]
    config: PathBuf,
    /// Override, `section.key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized sample families.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Viscous run with the configured solver.
    Simulate(Common),
    /// Inviscid run.
    Euler(Common),
    /// Viscosity sweep against an Euler reference.
    Converge(Common),
    /// Kernel envelope fits.
    VerifyKernels(Common),
    /// Time-integral, recovery, weight, nonlinear and energy checks.
    VerifyInequalities(Common),
    /// Norms of the configured initial datum.
    Norms(Common),
    /// Resolved configuration, grid summary and optional checkpoint contents.
    Inspect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NSHS_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("NSHS_THREADS={v} is not a thread count"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
    }
    Ok(())
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    Ok(io::parse_config(&common.config, &common.overrides)?)
}

fn base_artifacts(cfg: &ExperimentConfig, seed: u64, command: &str) -> Vec<Artifact> {
    vec![
        Artifact::text("config.toml", "config", cfg.to_toml()),
        Artifact::text("run.json", "metadata", pretty(&json!({ "command": command, "seed": seed, "version": env!("CARGO_PKG_VERSION") }))),
    ]
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn diagnostics_csv(traj: &Trajectory) -> String {
    let mut out = String::from("time,energy,enstrophy,compatibility,courant,picard_iters\n");
    for d in &traj.diagnostics {
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
            d.time, d.energy, d.enstrophy, d.compatibility, d.courant, d.picard_iters
        ));
    }
    out
}

fn trajectory_outputs(cfg: &ExperimentConfig, traj: &Trajectory, out: &mut Vec<Artifact>) -> Result<()> {
    out.push(Artifact::text("diagnostics.csv", "table", diagnostics_csv(traj)));
    if cfg.io.checkpoint {
        out.push(Artifact::binary("trajectory.nshs", "checkpoint", io::encode_checkpoint(&traj.config, &traj.snapshots)));
    }
    let p = cfg.norm_params();
    let within: Vec<_> = traj.snapshots.iter().filter(|s| s.time < traj.config.horizon()).collect();
    let history: Vec<_> = within.iter().map(|s| triple_norm(s, &p)).collect::<Result<_, _>>()?;
    out.push(Artifact::text("norm_history.json", "norms", serde_json::to_string_pretty(&history)?));
    Ok(())
}

fn simulate(common: &Common, inviscid: bool) -> Result<Outcome> {
    let cfg = load(common)?;
    let rc = cfg.run_config();
    let kind = if inviscid { SolverKind::Euler } else { cfg.numerics.solver };
    let grid = Arc::new(rc.grid()?);
    let init = harness::prepared_datum(cfg.physics.datum, cfg.physics.amplitude, &rc, grid);
    let data = validate_initial_data(&init, &cfg.norm_params());
    let traj = run(&rc, &init, kind)?;
    let kato = kato_monitor(&traj, cfg.norms.kato_c);
    let mut arts = base_artifacts(&cfg, common.seed, if inviscid { "euler" } else { "simulate" });
    trajectory_outputs(&cfg, &traj, &mut arts)?;
    let summary = json!({
        "solver": kind.name(),
        "steps": traj.diagnostics.len() - 1,
        "final_time": traj.final_state().time,
        "failure": traj.failure,
        "warnings": traj.warnings,
        "initial_data": { "x_sum": data.x_sum, "y_sum": data.y_sum, "s_sum": data.s_sum, "m_est": data.m_est, "finite": data.finite },
        "dissipation": kato.total,
        "wall_dissipation": kato.wall,
        "wall_width": kato.wall_width,
    });
    arts.push(Artifact::text("summary.json", "summary", pretty(&summary)));
    emit_outputs(&common.out, &arts)?;
    println!("{} run to t = {:.6}: dissipation {:.6e}", kind.name(), traj.final_state().time, kato.total);
    if let Some(f) = &traj.failure {
        eprintln!("run failed: {f}");
        return Ok(Outcome::Fail);
    }
    Ok(Outcome::Pass)
}

fn converge(common: &Common) -> Result<Outcome> {
    let cfg = load(common)?;
    let rc = cfg.run_config();
    let table = run_convergence(&rc, &cfg.numerics.nu_list, cfg.physics.datum, cfg.physics.amplitude, cfg.numerics.solver)?;
    let mut arts = base_artifacts(&cfg, common.seed, "converge");
    arts.push(Artifact::text("convergence.csv", "table", table.to_csv()));
    arts.push(Artifact::text("convergence.json", "table", serde_json::to_string_pretty(&table)?));
    emit_outputs(&common.out, &arts)?;
    print!("{}", table.to_csv());
    println!("slope: {}", table.slope.map_or("n/a".into(), |s| format!("{s:.4}")));
    for (nu, why) in &table.failures {
        eprintln!("nu = {nu:e} failed: {why}");
    }
    let ok = table.failures.is_empty() && table.slope.is_some() && table.distances_monotone();
    Ok(if ok { Outcome::Pass } else { Outcome::Fail })
}

fn report_outputs(cfg: &ExperimentConfig, common: &Common, command: &str, reports: &[InequalityReport], extra: Vec<Artifact>) -> Result<Outcome> {
    let mut arts = base_artifacts(cfg, common.seed, command);
    arts.push(Artifact::text("inequalities.csv", "table", summary_csv(reports)));
    for r in reports {
        arts.push(Artifact::text(&format!("reports/{}.json", r.name), "report", serde_json::to_string_pretty(r)?));
    }
    arts.extend(extra);
    emit_outputs(&common.out, &arts)?;
    for r in reports {
        println!("{:<22} {} worst ratio {:.4e}", r.name, if r.pass { "PASS" } else { "FAIL" }, r.worst_ratio);
        for n in &r.notes {
            println!("    {n}");
        }
    }
    Ok(if reports.iter().all(|r| r.pass) { Outcome::Pass } else { Outcome::Fail })
}

fn verify_kernels(common: &Common) -> Result<Outcome> {
    let cfg = load(common)?;
    let report = verify::check_kernel_bounds(&KernelBoundSetup::default())?;
    let mut extra = Vec::new();
    if cfg.io.kernel_dump {
        let rc = cfg.run_config();
        let grid = Arc::new(rc.grid()?);
        let t = rc.t_final.max(rc.dt);
        for xi in [1i64, rc.k as i64] {
            let r = residual_resolved(xi, t, rc.nu, grid.clone())?;
            extra.push(Artifact::binary(&format!("kernels/residual_xi{xi}.nshk"), "kernel", io::encode_kernel(&r)));
        }
    }
    report_outputs(&cfg, common, "verify-kernels", &[report], extra)
}

fn verify_inequalities(common: &Common) -> Result<Outcome> {
    let cfg = load(common)?;
    let rc = cfg.run_config();
    let p = cfg.norm_params();
    let grid = Arc::new(rc.grid()?);
    let init = harness::prepared_datum(cfg.physics.datum, cfg.physics.amplitude, &rc, grid);
    let traj = run(&rc, &init, cfg.numerics.solver)?;
    let history = norm_history(&traj, &p)?;
    let reports = vec![
        verify::check_int_t()?,
        verify::check_recovery(rc.eps0, rc.nu, common.seed),
        verify::check_weight_properties(rc.mu0),
        verify::check_nonlinear_estimates(&init, &p, common.seed),
        verify::check_sobolev_gronwall(&traj, &history),
    ];
    report_outputs(&cfg, common, "verify-inequalities", &reports, Vec::new())
}

fn norms(common: &Common) -> Result<Outcome> {
    let cfg = load(common)?;
    let rc = cfg.run_config();
    let p = cfg.norm_params();
    let grid = Arc::new(rc.grid()?);
    let init = harness::prepared_datum(cfg.physics.datum, cfg.physics.amplitude, &rc, grid);
    let report = triple_norm(&init, &p)?;
    let data = validate_initial_data(&init, &p);
    let mut arts = base_artifacts(&cfg, common.seed, "norms");
    arts.push(Artifact::text("norms.json", "norms", report.to_json()));
    arts.push(Artifact::text("initial_data.json", "norms", serde_json::to_string_pretty(&data)?));
    emit_outputs(&common.out, &arts)?;
    println!("X_t {:.6e}  Y_t {:.6e}  Z {:.6e}  triple {:.6e}", report.x_t, report.y_t, report.z, report.triple);
    println!("initial-data bound M ~ {:.6e} (finite: {})", data.m_est, data.finite);
    Ok(if data.finite && report.triple.is_finite() { Outcome::Pass } else { Outcome::Fail })
}

fn inspect(common: &Common, checkpoint: Option<&Path>) -> Result<Outcome> {
    let cfg = load(common)?;
    let rc = cfg.run_config();
    let grid = rc.grid()?;
    let mut info = json!({
        "config": serde_json::to_value(&cfg)?,
        "grid": { "nodes": grid.len(), "ymax": grid.ymax, "max_spacing": grid.max_spacing(), "first_spacing": grid.nodes[1] - grid.nodes[0] },
        "horizon": rc.horizon(),
    });
    if let Some(path) = checkpoint {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let ck = io::decode_checkpoint(&bytes)?;
        let states = ck.states()?;
        let times: Vec<f64> = states.iter().map(|s| s.time).collect();
        info["checkpoint"] = json!({
            "version": ck.version,
            "config": ck.config,
            "nodes": ck.nodes.len(),
            "snapshots": states.len(),
            "times": times,
            "max_abs_final": states.last().map(|s| s.max_abs()),
        });
    }
    let text = pretty(&info);
    let mut arts = base_artifacts(&cfg, common.seed, "inspect");
    arts.push(Artifact::text("inspect.json", "summary", text.clone()));
    emit_outputs(&common.out, &arts)?;
    println!("{text}");
    Ok(Outcome::Pass)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(c) => simulate(c, false),
        Command::Euler(c) => simulate(c, true),
        Command::Converge(c) => converge(c),
        Command::VerifyKernels(c) => verify_kernels(c),
        Command::VerifyInequalities(c) => verify_inequalities(c),
        Command::Norms(c) => norms(c),
        Command::Inspect { common, checkpoint } => inspect(common, checkpoint.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Pass) => ExitCode::from(0),
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
