//! Command-line runner: `run` solves a scenario and writes probe, layer and
//! plane outputs plus a summary; `compare` gates two probe files.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::ScenarioFile;
use crate::error::Error;
use crate::model::{validate_scenario, BcKind, BilayerScenario, EigenOrder, Face, Inclusion, TimeControl};
use crate::postprocess::{layer_average, plane_grid, read_samples_csv, write_matrix, write_samples_csv, FieldEvaluator, FieldSample, RunSummary};
use crate::solver::{build_global, solve_harmonic, solve_steady, GlobalSystem, Model, Snapshot, TransientRun};
use dribem_oracle::{compare_fields, fd_solve_harmonic, fd_solve_steady, fd_solve_transient, probe_complex, write_probe_csv, FaceCondition, FdGrid, OracleError};

#[derive(Debug, Parser)]
#[command(name = "dribem", version, about = "Bilayer heat conduction with ellipsoidal inhomogeneities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a scenario file (or a bundled scenario by name).
    Run(RunSpec),
    /// Compare probe temperatures of two sample CSV files.
    Compare(CompareSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Transient,
    Harmonic,
    Steady,
}

#[derive(Clone, Debug, Args)]
pub struct RunSpec {
    /// Scenario path, or one of: verify_bie, verify_two_spheres, fgm_desk.
    pub scenario: String,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_parser = parse_order)]
    pub eigen_order: Option<EigenOrder>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Also run the finite-volume reference and compare at the probes.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct CompareSpec {
    pub candidate: PathBuf,
    pub reference: PathBuf,
    /// Maximum relative temperature discrepancy.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
}

fn parse_order(s: &str) -> Result<EigenOrder, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("tolerance gate failed: {0}")]
    Gate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Validation(_) | Error::Config(_) | Error::Domain(_) | Error::Io { .. }) => 2,
            CliError::Oracle(OracleError::Input(_) | OracleError::Resolution(_) | OracleError::Compare(_) | OracleError::Io { .. }) => 2,
            CliError::Core(_) | CliError::Oracle(_) => 3,
            CliError::Gate(_) => 4,
        }
    }
}

pub fn main_with(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(spec) => run(&spec).map(|_| ()),
        Command::Compare(spec) => compare(&spec).map(|_| ()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub cells: [usize; 3],
    pub max_abs: f64,
    pub max_rel: f64,
    pub l2_rel: f64,
    pub tolerance: Option<f64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub samples: Vec<FieldSample>,
    pub oracle: Option<OracleReport>,
}

/// Scenario with flag overrides applied.
pub fn resolve(spec: &RunSpec) -> Result<(ScenarioFile, BilayerScenario, Vec<Inclusion>), CliError> {
    let file = ScenarioFile::load(&spec.scenario)?;
    let mut sc = file.scenario();
    let (t0, dt0, steps0) = match sc.time {
        TimeControl::Transient { t0, dt, steps } => (t0, Some(dt), Some(steps)),
        _ => (0.0, None, None),
    };
    let omega0 = match sc.time {
        TimeControl::Harmonic { omega } => Some(omega),
        _ => None,
    };
    let mode = spec.mode.unwrap_or(match sc.time {
        TimeControl::Transient { .. } => Mode::Transient,
        TimeControl::Harmonic { .. } => Mode::Harmonic,
        TimeControl::Steady => Mode::Steady,
    });
    let missing = |what: &str| Error::Config(format!("{what} required for this mode (flag or scenario)"));
    sc.time = match mode {
        Mode::Transient => TimeControl::Transient {
            t0,
            dt: spec.dt.or(dt0).ok_or_else(|| missing("--dt"))?,
            steps: spec.steps.or(steps0).ok_or_else(|| missing("--steps"))?,
        },
        Mode::Harmonic => TimeControl::Harmonic {
            omega: spec.omega.or(omega0).ok_or_else(|| missing("--omega"))?,
        },
        Mode::Steady => TimeControl::Steady,
    };
    if mode == Mode::Harmonic {
        // amplitudes carry no reference temperature
        sc.u0 = 0.0;
    }
    let incs = file.inclusions(&sc, spec.eigen_order)?;
    validate_scenario(&sc, &incs)?;
    Ok((file, sc, incs))
}

pub fn run(spec: &RunSpec) -> Result<RunOutcome, CliError> {
    if let Some(n) = spec.threads {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (file, sc, incs) = resolve(spec)?;
    std::fs::create_dir_all(&spec.out).map_err(|e| Error::io(&spec.out, e))?;
    let clock = Instant::now();
    let mut timings = Vec::new();
    let model = Model::new(&sc, &incs, &file.mesh_spec())?;
    let system = build_global(model)?;
    timings.push(("assembly".to_string(), clock.elapsed().as_secs_f64()));
    log::info!("{} unknowns, {} inclusions", system.model.num_unknowns(), incs.len());
    let probes = &file.output.probes;
    let out = &spec.out;
    let mode_name;
    let samples;
    let mut oracle = None;
    match sc.time {
        TimeControl::Transient { .. } => {
            mode_name = "transient";
            let snaps = run_transient(&system)?;
            timings.push(("solve".to_string(), clock.elapsed().as_secs_f64()));
            let picked = pick_times(&snaps, &file.output.times)?;
            let refs: Vec<&Snapshot> = picked.iter().map(|&i| &snaps[i]).collect();
            let eval = FieldEvaluator::new(&system.model, &refs);
            samples = sample_all(&eval, probes)?;
            write_outputs(&eval, &file, out, &samples, "probes.csv")?;
            if spec.oracle {
                let times: Vec<f64> = refs.iter().map(|s| s.t).collect();
                oracle = Some(oracle_transient(&file, &sc, &incs, &picked, &times, &samples, out)?);
            }
        }
        TimeControl::Steady => {
            mode_name = "steady";
            let snap = solve_steady(&system, 0.0)?;
            timings.push(("solve".to_string(), clock.elapsed().as_secs_f64()));
            let eval = FieldEvaluator::new(&system.model, &[&snap]);
            samples = sample_all(&eval, probes)?;
            write_outputs(&eval, &file, out, &samples, "probes.csv")?;
            if spec.oracle {
                let grid = oracle_grid(&file, &sc, &incs, false)?;
                let field = fd_solve_steady(&grid, 0.0)?;
                let u: Vec<f64> = probes.iter().map(|p| grid.probe(&field, p)).collect();
                let q3: Vec<f64> = probes.iter().map(|p| grid.probe_flux3(&field, p)).collect();
                write_probe_csv(&out.join("oracle_probes.csv"), probes, &[0.0], std::slice::from_ref(&u), &[q3], &phase_tags(&samples, probes.len()))?;
                let bem: Vec<f64> = samples.iter().map(|s| s.u).collect();
                oracle = Some(report(&grid, &bem, &u, file.oracle.tolerance)?);
            }
        }
        TimeControl::Harmonic { omega } => {
            mode_name = "harmonic";
            let h = solve_harmonic(&system, omega)?;
            timings.push(("solve".to_string(), clock.elapsed().as_secs_f64()));
            let eval = FieldEvaluator::new(&system.model, &[&h.re, &h.im]);
            let both = sample_all(&eval, probes)?;
            let (re, im) = both.split_at(probes.len());
            write_samples_csv(&out.join("probes_re.csv"), re)?;
            write_samples_csv(&out.join("probes_im.csv"), im)?;
            if spec.oracle {
                let grid = oracle_grid(&file, &sc, &incs, true)?;
                let field = fd_solve_harmonic(&grid, omega)?;
                let fd: Vec<_> = probes.iter().map(|p| probe_complex(&grid, &field, p)).collect();
                let u: Vec<Vec<f64>> = vec![fd.iter().map(|c| c.re).collect(), fd.iter().map(|c| c.im).collect()];
                let q3 = vec![vec![f64::NAN; probes.len()]; 2];
                write_probe_csv(&out.join("oracle_probes.csv"), probes, &[0.0, 1.0], &u, &q3, &phase_tags(&both, probes.len()))?;
                let bem: Vec<f64> = both.iter().map(|s| s.u).collect();
                let refv: Vec<f64> = u.concat();
                oracle = Some(report(&grid, &bem, &refv, file.oracle.tolerance)?);
            }
            samples = both;
        }
    }
    timings.push(("total".to_string(), clock.elapsed().as_secs_f64()));
    let mut summary = RunSummary::new(&system.model, mode_name);
    summary.timings = timings;
    summary.write(&out.join("summary.json"))?;
    if let Some(r) = &oracle {
        let text = serde_json::to_string_pretty(r).map_err(|e| Error::Numerical(e.to_string()))?;
        let path = out.join("oracle.json");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        log::info!("oracle max rel {:.3e}", r.max_rel);
        if let Some(tol) = r.tolerance {
            if !(r.max_rel <= tol) {
                return Err(CliError::Gate(format!("max relative discrepancy {:.3e} > {tol:.3e}", r.max_rel)));
            }
        }
    }
    Ok(RunOutcome { summary, samples, oracle })
}

fn run_transient(system: &GlobalSystem) -> Result<Vec<Snapshot>, CliError> {
    let steps = match system.model.scenario.time {
        TimeControl::Transient { steps, .. } => steps,
        _ => unreachable!(),
    };
    let mut run = TransientRun::from_scenario(system)?;
    Ok(run.run(steps)?)
}

fn pick_times(snaps: &[Snapshot], times: &[f64]) -> Result<Vec<usize>, CliError> {
    if times.is_empty() {
        return Ok((0..snaps.len()).collect());
    }
    times
        .iter()
        .map(|&t| {
            snaps
                .iter()
                .enumerate()
                .map(|(i, s)| (i, (s.t - t).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .filter(|&(_, d)| d <= 1e-6 * (1.0 + t.abs()))
                .map(|(i, _)| i)
                .ok_or_else(|| CliError::Core(Error::Config(format!("output time {t} is not a time station"))))
        })
        .collect()
}

/// Time-major samples: every probe at the first snapshot, then the next.
fn sample_all(eval: &FieldEvaluator<'_>, probes: &[[f64; 3]]) -> Result<Vec<FieldSample>, CliError> {
    use rayon::prelude::*;
    let per: Vec<crate::Result<Vec<FieldSample>>> = probes.par_iter().map(|p| eval.sample(p)).collect();
    let per: Vec<Vec<FieldSample>> = per.into_iter().collect::<crate::Result<_>>()?;
    Ok((0..eval.times().len()).flat_map(|k| per.iter().map(move |s| s[k])).collect())
}

fn phase_tags(samples: &[FieldSample], probes: usize) -> Vec<String> {
    samples.iter().take(probes).map(|s| s.phase.to_string()).collect()
}

fn write_outputs(eval: &FieldEvaluator<'_>, file: &ScenarioFile, out: &Path, samples: &[FieldSample], name: &str) -> Result<(), CliError> {
    write_samples_csv(&out.join(name), samples)?;
    if file.output.layers > 0 {
        let per = file.output.per_layer.unwrap_or([10, 10, 20]);
        let mut rows = vec![vec!["t".to_string(), "x3".into(), "u".into(), "q3".into(), "count".into()]];
        for p in layer_average(eval, file.output.layers, per)? {
            for l in 0..p.centers.len() {
                rows.push(vec![p.t.to_string(), p.centers[l].to_string(), p.u[l].to_string(), p.q3[l].to_string(), p.counts[l].to_string()]);
            }
        }
        let text: String = rows.iter().map(|r| r.join(",") + "\n").collect();
        let path = out.join("layers.csv");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    if let Some(plane) = &file.output.plane {
        use rayon::prelude::*;
        let pts = plane_grid(eval.model(), plane.x1, plane.n2, plane.n3);
        let per: Vec<crate::Result<Vec<FieldSample>>> = pts.par_iter().map(|p| eval.sample(p)).collect();
        let per: Vec<Vec<FieldSample>> = per.into_iter().collect::<crate::Result<_>>()?;
        for (k, t) in eval.times().iter().enumerate() {
            let rows: Vec<Vec<f64>> = per.iter().map(|s| vec![s[k].x[1], s[k].x[2], s[k].u, s[k].q[1], s[k].q[2]]).collect();
            write_matrix(&out.join(format!("plane_t{t:.6}.dat")), &rows)?;
        }
    }
    Ok(())
}

/// Voxel grid of the scenario; inclusions are sampled at cell centres.
pub fn oracle_grid(file: &ScenarioFile, sc: &BilayerScenario, incs: &[Inclusion], harmonic: bool) -> Result<FdGrid, CliError> {
    let (lo, hi) = (sc.lo(), sc.hi());
    let ext = [0, 1, 2].map(|a| hi[a] - lo[a]);
    let cells = match file.oracle.cells {
        Some(c) => c,
        None => {
            let dmin = incs
                .iter()
                .map(|i| 2.0 * i.ellipsoid.semi_axes.iter().cloned().fold(f64::INFINITY, f64::min))
                .fold(f64::INFINITY, f64::min);
            let h = (ext.iter().cloned().fold(f64::INFINITY, f64::min) / 20.0).min(dmin / 8.0);
            ext.map(|e| (e / h).ceil() as usize)
        }
    };
    let total: usize = cells.iter().product();
    if total > 4_000_000 {
        return Err(CliError::Core(Error::Validation(format!("oracle grid {cells:?} exceeds 4e6 cells"))));
    }
    let faces = Face::ALL.map(|f| {
        let bc = *sc.bc(f);
        let value: Arc<dyn Fn(&[f64; 3], f64) -> f64 + Send + Sync> = if harmonic {
            Arc::new(move |x, _| bc.value.amplitude(x))
        } else {
            Arc::new(move |x, t| bc.value.at(x, t))
        };
        match bc.kind {
            BcKind::Dirichlet => FaceCondition::Dirichlet(value),
            BcKind::Neumann => FaceCondition::Flux(value),
        }
    });
    let shapes: Vec<_> = incs.iter().map(|i| (i.ellipsoid, i.props)).collect();
    let (upper, lower) = (sc.upper, sc.lower);
    let grid = FdGrid::new(
        lo,
        hi,
        cells,
        move |x| {
            for (e, p) in &shapes {
                if e.contains(x) {
                    return (p.k, p.cp);
                }
            }
            let p = if x[2] >= 0.0 { upper } else { lower };
            (p.k, p.cp)
        },
        faces,
    )?;
    for i in incs {
        grid.check_resolution(2.0 * i.ellipsoid.semi_axes.iter().cloned().fold(f64::INFINITY, f64::min))?;
    }
    Ok(grid)
}

fn oracle_transient(
    file: &ScenarioFile,
    sc: &BilayerScenario,
    incs: &[Inclusion],
    picked: &[usize],
    times: &[f64],
    samples: &[FieldSample],
    out: &Path,
) -> Result<OracleReport, CliError> {
    let grid = oracle_grid(file, sc, incs, false)?;
    let TimeControl::Transient { t0, dt, .. } = sc.time else { unreachable!() };
    let steps = picked.iter().max().map_or(0, |m| m + 1);
    let probes = &file.output.probes;
    let substeps = file.oracle.substeps.unwrap_or(1);
    let (series, _) = fd_solve_transient(&grid, sc.u0, t0, dt, steps, substeps, probes)?;
    let u: Vec<Vec<f64>> = picked.iter().map(|&i| series.values[i].clone()).collect();
    let q3: Vec<Vec<f64>> = picked.iter().map(|&i| series.flux3[i].clone()).collect();
    write_probe_csv(&out.join("oracle_probes.csv"), probes, times, &u, &q3, &phase_tags(samples, probes.len()))?;
    let bem: Vec<f64> = samples.iter().map(|s| s.u - sc.u0).collect();
    let refv: Vec<f64> = u.concat().iter().map(|v| v - sc.u0).collect();
    report(&grid, &bem, &refv, file.oracle.tolerance)
}

fn report(grid: &FdGrid, bem: &[f64], fd: &[f64], tolerance: Option<f64>) -> Result<OracleReport, CliError> {
    let r = compare_fields(bem, fd, None)?;
    Ok(OracleReport {
        cells: grid.n,
        max_abs: r.max_abs,
        max_rel: r.max_rel,
        l2_rel: r.l2_rel,
        tolerance,
    })
}

pub fn compare(spec: &CompareSpec) -> Result<dribem_oracle::ErrorReport, CliError> {
    let a = read_samples_csv(&spec.candidate)?;
    let b = read_samples_csv(&spec.reference)?;
    let tags = |s: &[FieldSample]| -> Vec<String> { s.iter().map(|x| x.phase.to_string()).collect() };
    let (ta, tb) = (tags(&a), tags(&b));
    let ua: Vec<f64> = a.iter().map(|s| s.u).collect();
    let ub: Vec<f64> = b.iter().map(|s| s.u).collect();
    let r = compare_fields(&ua, &ub, Some((&ta, &tb)))?;
    println!("max_abs {:.6e} max_rel {:.6e} l2_rel {:.6e} worst {}", r.max_abs, r.max_rel, r.l2_rel, r.worst);
    if !r.passes(spec.tol) {
        return Err(CliError::Gate(format!("max relative discrepancy {:.3e} > {:.3e}", r.max_rel, spec.tol)));
    }
    Ok(r)
}
