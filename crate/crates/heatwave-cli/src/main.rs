//! Config-driven batch entry point. Every subcommand reads one JSON config,
//! computes all artifacts in memory, then writes them plus a checksum
//! manifest; on any error nothing is written. Exit codes: 0 ok, 2 config
//! error, 3 numerical failure.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use heatwave::gelfand_levitan::{
    build_kernel, potential_q, radial_lift, solve_gl, Potential1D, SpectralTarget,
};
use heatwave::homogenize::{
    field_from_cells, solve_resolvent_ie, stationary_average, ContinuumGrid, PotentialField,
};
use heatwave::kernels::{FreeField, Source};
use heatwave::laplace::{invert_real_axis, tauberian_limit};
use heatwave::manybody::{
    field_at, interaction_ratio_diagnostic, solve_full_las, solve_reduced_las,
};
use heatwave::particles::{generate_cloud, MediumSpec};
use heatwave::sturm_liouville::{
    dirichlet_spectrum, eigen_table_csv, normalization_asymptotics, radial_spectrum,
    BoundaryFamily,
};
use heatwave::waveguide::{
    assemble_spectrum, confinement_metric, residual_decay_slope, signal_trace, InitialData,
};
use heatwave::{Box3, Error, Point3};

const CONFIG_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "heatwave", version, about = "Batch driver for the heatwave pipeline")]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for all emitted files
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed; mandatory for stochastic commands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Solve the multiparticle resolvent system and sample the field
    SimulateManybody,
    /// Solve the limiting integral equation on a continuum grid
    Homogenize,
    /// Long-time averages and real-axis inversion for closed-form transforms
    Tauberian,
    /// Reconstruct a potential from prescribed spectral data
    DesignPotential,
    /// Eigenvalues and normalization asymptotics of a designed potential
    Eigencheck,
    /// Evolve initial data in the designed waveguide and trace probes
    WaveguideDemo,
    /// Reduced-system vs limiting-equation agreement across particle sizes
    ConvergenceStudy,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::SimulateManybody => "simulate-manybody",
            Cmd::Homogenize => "homogenize",
            Cmd::Tauberian => "tauberian",
            Cmd::DesignPotential => "design-potential",
            Cmd::Eigencheck => "eigencheck",
            Cmd::WaveguideDemo => "waveguide-demo",
            Cmd::ConvergenceStudy => "convergence-study",
        }
    }
}

/// Failure classified by exit code: config/domain problems exit 2,
/// numerical failures exit 3.
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

type RunResult<T> = std::result::Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

struct Artifact {
    path: &'static str,
    bytes: Vec<u8>,
}

impl Artifact {
    fn new(path: &'static str, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact {
            path,
            bytes: bytes.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> RunResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_err("threads must be >= 1"));
        }
        // ignore AlreadyInitialized: tests may run several configs in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| config_err("--config is required"))?;
    let out_dir = cli
        .out
        .as_ref()
        .ok_or_else(|| config_err("--out is required"))?;
    let text = fs::read_to_string(config_path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", config_path.display())))?;

    let artifacts = match cli.command {
        Cmd::SimulateManybody => simulate_manybody(&text, cli.seed)?,
        Cmd::Homogenize => homogenize(&text)?,
        Cmd::Tauberian => tauberian(&text)?,
        Cmd::DesignPotential => design_potential(&text)?,
        Cmd::Eigencheck => eigencheck(&text)?,
        Cmd::WaveguideDemo => waveguide_demo(&text)?,
        Cmd::ConvergenceStudy => convergence_study(&text, cli.seed)?,
    };

    // everything computed; only now touch the filesystem, manifest last
    fs::create_dir_all(out_dir)
        .map_err(|e| config_err(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut manifest_files = Vec::new();
    for a in &artifacts {
        fs::write(out_dir.join(a.path), &a.bytes)
            .map_err(|e| config_err(format!("cannot write {}: {e}", a.path)))?;
        let digest = Sha256::digest(&a.bytes);
        manifest_files.push(serde_json::json!({
            "path": a.path,
            "bytes": a.bytes.len(),
            "sha256": format!("{digest:x}"),
        }));
    }
    manifest_files.sort_by_key(|f| f["path"].as_str().unwrap_or("").to_string());
    let manifest = serde_json::json!({
        "version": CONFIG_VERSION,
        "command": cli.command.name(),
        "files": manifest_files,
    });
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    fs::write(out_dir.join("manifest.json"), manifest_text)
        .map_err(|e| config_err(format!("cannot write manifest.json: {e}")))?;
    Ok(())
}

fn parse_config<T: for<'de> Deserialize<'de>>(text: &str) -> RunResult<T> {
    serde_json::from_str(text).map_err(|e| config_err(e.to_string()))
}

fn check_version(version: u32) -> RunResult<()> {
    if version != CONFIG_VERSION {
        return Err(config_err(format!(
            "version: expected {CONFIG_VERSION}, got {version}"
        )));
    }
    Ok(())
}

fn require_seed(flag: Option<u64>, config: Option<u64>) -> RunResult<u64> {
    flag.or(config).ok_or_else(|| {
        config_err("seed is required for this command (pass --seed or set \"seed\" in the config)")
    })
}

/// CSV of complex samples at points; shared by field and free-field files so
/// the zero-impedance case compares byte-identically.
fn complex_samples_csv(points: &[Point3], values: &[Complex64]) -> String {
    let mut out = String::from("x1,x2,x3,re_u,im_u\n");
    for (p, v) in points.iter().zip(values) {
        out.push_str(&format!("{},{},{},{},{}\n", p.x1, p.x2, p.x3, v.re, v.im));
    }
    out
}

fn json_artifact(path: &'static str, value: &serde_json::Value) -> Artifact {
    Artifact::new(
        path,
        serde_json::to_string_pretty(value).expect("serializable") + "\n",
    )
}

// ---------------------------------------------------------------------------
// simulate-manybody

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum SolverChoice {
    Full,
    Reduced,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    version: u32,
    medium: MediumSpec,
    a: f64,
    lambda: f64,
    source: Source,
    probes: Vec<Point3>,
    solver: SolverChoice,
    /// side of the partition cubes for the reduced solver;
    /// default max(4 d_min, a^{1/3})
    partition_side: Option<f64>,
    seed: Option<u64>,
}

fn simulate_manybody(text: &str, seed_flag: Option<u64>) -> RunResult<Vec<Artifact>> {
    let cfg: SimulateConfig = parse_config(text)?;
    check_version(cfg.version)?;
    let seed = require_seed(seed_flag, cfg.seed)?;
    cfg.medium.validate().map_err(Failure::from)?;
    let cloud = generate_cloud(&cfg.medium, cfg.a, seed)?;
    let free = FreeField::new(&cfg.source)?;
    let free_values: Vec<Complex64> = cfg
        .probes
        .iter()
        .map(|p| free.eval(p, cfg.lambda).map(|v| Complex64::new(v, 0.0)))
        .collect::<heatwave::Result<_>>()?;

    let (field, probe_values, partition_side) = match cfg.solver {
        SolverChoice::Full => {
            let field = solve_full_las(&cloud, cfg.lambda, &free)?;
            let vals: Vec<Complex64> = cfg
                .probes
                .iter()
                .map(|p| field_at(p, &cloud, &field, &free))
                .collect::<heatwave::Result<_>>()?;
            (field, vals, None)
        }
        SolverChoice::Reduced => {
            let b = cfg
                .partition_side
                .unwrap_or((4.0 * cloud.d_min).max(cfg.a.cbrt()));
            let (field, part) = solve_reduced_las(&cloud, &cfg.medium, b, cfg.lambda, &free)?;
            let cells: Vec<Box3> = (0..part.p()).map(|i| part.cell_box(i)).collect();
            let q_cells: Vec<Complex64> = part
                .centers
                .iter()
                .map(|c| {
                    cfg.medium.impedance.eval(c)
                        * (cfg.medium.shape_constant * cfg.medium.density.eval(c))
                })
                .collect();
            let vals: Vec<Complex64> = cfg
                .probes
                .iter()
                .map(|p| {
                    field_from_cells(p, cfg.lambda, &cells, &q_cells, &field.values, &free)
                })
                .collect::<heatwave::Result<_>>()?;
            (field, vals, Some(b))
        }
    };

    let summary = serde_json::json!({
        "m": cloud.m(),
        "a": cloud.a,
        "d_min": cloud.d_min,
        "lambda": cfg.lambda,
        "seed": seed,
        "partition_side": partition_side,
        "interaction_ratio": interaction_ratio_diagnostic(&cloud, cfg.lambda),
    });
    Ok(vec![
        Artifact::new("cloud.json", cloud.to_json()),
        Artifact::new("field.csv", field.to_csv()),
        Artifact::new("probes.csv", complex_samples_csv(&cfg.probes, &probe_values)),
        Artifact::new(
            "free_field.csv",
            complex_samples_csv(&cfg.probes, &free_values),
        ),
        json_artifact("summary.json", &summary),
    ])
}

// ---------------------------------------------------------------------------
// homogenize

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HomogenizeConfig {
    version: u32,
    medium: MediumSpec,
    grid_n: usize,
    lambda: f64,
    source: Source,
    /// also solve the zero-lambda stationary-average equation
    #[serde(default)]
    stationary: bool,
}

fn homogenize(text: &str) -> RunResult<Vec<Artifact>> {
    let cfg: HomogenizeConfig = parse_config(text)?;
    check_version(cfg.version)?;
    cfg.medium.validate().map_err(Failure::from)?;
    let grid = ContinuumGrid::cube(cfg.medium.domain.bounding_box(), cfg.grid_n)?;
    let q = PotentialField::from_spec(&grid, &cfg.medium)?;
    let free = FreeField::new(&cfg.source)?;
    let field = solve_resolvent_ie(&grid, &q, cfg.lambda, &free)?;

    let mut artifacts = vec![Artifact::new("resolvent.csv", field.to_csv())];
    let mut summary = serde_json::json!({
        "grid_n": cfg.grid_n,
        "cells": grid.cells(),
        "lambda": cfg.lambda,
    });
    if cfg.stationary {
        let psi = stationary_average(&grid, &q, &free)?;
        artifacts.push(Artifact::new(
            "stationary.csv",
            complex_samples_csv(&psi.points, &psi.values),
        ));
        summary["stationary_condition"] = serde_json::json!(psi.condition);
    }
    artifacts.push(json_artifact("summary.json", &summary));
    Ok(artifacts)
}

// ---------------------------------------------------------------------------
// tauberian

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TauberianConfig {
    version: u32,
    lambda0: f64,
    order: usize,
    times: Vec<f64>,
}

/// The closed-form transform pairs: name, U(lambda), u(t), long-time average.
type Pair = (&'static str, fn(f64) -> f64, fn(f64) -> f64, f64);
const PAIRS: [Pair; 3] = [
    ("one_over_lambda", |l| 1.0 / l, |_| 1.0, 1.0),
    ("one_over_lambda_plus_one", |l| 1.0 / (l + 1.0), |t| (-t).exp(), 0.0),
    (
        "difference",
        |l| 1.0 / l - 1.0 / (l + 1.0),
        |t| 1.0 - (-t).exp(),
        1.0,
    ),
];

fn tauberian(text: &str) -> RunResult<Vec<Artifact>> {
    let cfg: TauberianConfig = parse_config(text)?;
    check_version(cfg.version)?;
    let mut limits = String::from("pair,limit,error_bar,exact\n");
    let mut inversion = String::from("pair,t,value,exact\n");
    for (name, transform, exact_u, exact_limit) in PAIRS {
        let est = tauberian_limit(transform, cfg.lambda0)?;
        limits.push_str(&format!(
            "{name},{},{},{exact_limit}\n",
            est.limit, est.error_bar
        ));
        for &t in &cfg.times {
            let u = invert_real_axis(transform, t, cfg.order)?;
            inversion.push_str(&format!("{name},{t},{u},{}\n", exact_u(t)));
        }
    }
    let summary = serde_json::json!({
        "lambda0": cfg.lambda0,
        "order": cfg.order,
        "times": cfg.times,
    });
    Ok(vec![
        Artifact::new("limits.csv", limits),
        Artifact::new("inversion.csv", inversion),
        json_artifact("summary.json", &summary),
    ])
}

// ---------------------------------------------------------------------------
// design-potential / eigencheck / waveguide-demo share a target

#[derive(Deserialize)]
#[serde(untagged)]
enum TargetConfig {
    Named(String),
    Explicit(SpectralTarget),
}

impl TargetConfig {
    fn resolve(self) -> RunResult<SpectralTarget> {
        let target = match self {
            TargetConfig::Named(name) => match name.as_str() {
                "heat_guide" => SpectralTarget::heat_guide(),
                "baseline" => SpectralTarget::baseline(),
                other => {
                    return Err(config_err(format!(
                        "target: unknown named target {other:?} (expected \"heat_guide\" or \"baseline\")"
                    )))
                }
            },
            TargetConfig::Explicit(t) => t,
        };
        target.validate().map_err(Failure::from)?;
        Ok(target)
    }
}

fn designed_potential(target: &SpectralTarget, grid_n: usize) -> RunResult<Potential1D> {
    let kernel = build_kernel(target)?;
    let tk = solve_gl(&kernel, grid_n)?;
    Ok(potential_q(&tk)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignConfig {
    version: u32,
    target: TargetConfig,
    grid_n: usize,
}

fn design_potential(text: &str) -> RunResult<Vec<Artifact>> {
    let cfg: DesignConfig = parse_config(text)?;
    check_version(cfg.version)?;
    let target = cfg.target.resolve()?;
    let q = designed_potential(&target, cfg.grid_n)?;
    let summary = serde_json::json!({
        "grid_n": cfg.grid_n,
        "sup_norm": q.sup_norm(),
        "q_at_0": q.eval(0.0),
        "q_at_end": q.eval(PI),
    });
    Ok(vec![
        Artifact::new("potential.csv", q.to_csv()),
        json_artifact("target.json", &target.to_json()),
        json_artifact("summary.json", &summary),
    ])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EigencheckConfig {
    version: u32,
    target: TargetConfig,
    count: usize,
    grid_n: usize,
    /// largest mode index in the normalization-asymptotics table
    #[serde(default = "default_j_max")]
    j_max: usize,
}

fn default_j_max() -> usize {
    20
}

fn eigencheck(text: &str) -> RunResult<Vec<Artifact>> {
    let cfg: EigencheckConfig = parse_config(text)?;
    check_version(cfg.version)?;
    let target = cfg.target.resolve()?;
    let q = designed_potential(&target, cfg.grid_n)?;
    let pairs = dirichlet_spectrum(&q, PI, cfg.count, cfg.grid_n)?;
    let radial = radial_spectrum(&radial_lift(q.clone()), PI, cfg.count, cfg.grid_n)?;
    let rows = normalization_asymptotics(&q, BoundaryFamily::Dirichlet, cfg.j_max, cfg.grid_n)?;
    let mut asym = String::from("j,alpha,sqrt_gap\n");
    for r in &rows {
        asym.push_str(&format!("{},{},{}\n", r.j, r.alpha, r.sqrt_gap));
    }
    let summary = serde_json::json!({
        "grid_n": cfg.grid_n,
        "eigenvalues": pairs.iter().map(|p| p.eigenvalue).collect::<Vec<_>>(),
        "radial_eigenvalues": radial.iter().map(|p| p.eigenvalue).collect::<Vec<_>>(),
    });
    Ok(vec![
        Artifact::new("spectrum.csv", eigen_table_csv(&pairs)),
        Artifact::new("radial_spectrum.csv", eigen_table_csv(&radial)),
        Artifact::new("asymptotics.csv", asym),
        json_artifact("summary.json", &summary),
    ])
}

// ---------------------------------------------------------------------------
// waveguide-demo

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum InitialConfig {
    Zero,
    AxialGaussian {
        s_center: f64,
        s_sigma: f64,
        rho_sigma: f64,
    },
    Azimuthal {
        azimuthal_index: usize,
    },
}

impl InitialConfig {
    fn into_data(self) -> InitialData {
        match self {
            InitialConfig::Zero => InitialData::Zero,
            InitialConfig::AxialGaussian {
                s_center,
                s_sigma,
                rho_sigma,
            } => InitialData::AxialGaussian {
                s_center,
                s_sigma,
                rho_sigma,
            },
            InitialConfig::Azimuthal { azimuthal_index } => {
                InitialData::Azimuthal { azimuthal_index }
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveguideConfig {
    version: u32,
    target: TargetConfig,
    grid_n: usize,
    /// 1-D eigenpairs kept per direction
    #[serde(default = "default_one_d_modes")]
    one_d_modes: usize,
    /// product modes kept in the expansion
    modes: usize,
    initial: InitialConfig,
    times: Vec<f64>,
    /// (s, rho) probe locations; rho = 0 reads the first interior node
    probes: Vec<(f64, f64)>,
    /// [t0, t1] window for the residual decay-slope fit
    fit_window: (f64, f64),
    #[serde(default = "default_fit_samples")]
    fit_samples: usize,
}

fn default_one_d_modes() -> usize {
    8
}

fn default_fit_samples() -> usize {
    9
}

fn waveguide_demo(text: &str) -> RunResult<Vec<Artifact>> {
    let cfg: WaveguideConfig = parse_config(text)?;
    check_version(cfg.version)?;
    let target = cfg.target.resolve()?;
    let q = designed_potential(&target, cfg.grid_n)?;
    let radial = radial_spectrum(&radial_lift(q.clone()), PI, cfg.one_d_modes, cfg.grid_n)?;
    let axial = dirichlet_spectrum(&q, PI, cfg.one_d_modes, cfg.grid_n)?;
    let spectrum = assemble_spectrum(radial, axial, cfg.modes)?;
    let f = cfg.initial.into_data();
    let trace = signal_trace(&spectrum, &f, &cfg.probes, &cfg.times, cfg.modes)?;
    let (t0, t1) = cfg.fit_window;
    let slope = residual_decay_slope(&spectrum, &f, t0, t1, cfg.fit_samples)?;
    let (ratio, profile) = confinement_metric(&spectrum);
    let mut profile_csv = String::from("rho,amplitude\n");
    for (rho, v) in &profile {
        profile_csv.push_str(&format!("{rho},{v}\n"));
    }
    let summary = serde_json::json!({
        "decay_slope": slope,
        "confinement_ratio": ratio,
        "lambda_1": spectrum.lambdas[0],
        "lambda_2": spectrum.lambdas.get(1),
        "fit_window": [t0, t1],
    });
    Ok(vec![
        json_artifact("spectrum.json", &spectrum.to_json()),
        Artifact::new("trace.csv", trace.to_csv()),
        Artifact::new("profile.csv", profile_csv),
        json_artifact("summary.json", &summary),
    ])
}

// ---------------------------------------------------------------------------
// convergence-study

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StudyConfig {
    version: u32,
    medium: MediumSpec,
    a_values: Vec<f64>,
    lambda: f64,
    grid_n: usize,
    source: Source,
    probes: Vec<Point3>,
    seed: Option<u64>,
}

fn convergence_study(text: &str, seed_flag: Option<u64>) -> RunResult<Vec<Artifact>> {
    let cfg: StudyConfig = parse_config(text)?;
    check_version(cfg.version)?;
    let seed = require_seed(seed_flag, cfg.seed)?;
    cfg.medium.validate().map_err(Failure::from)?;
    if cfg.a_values.is_empty() {
        return Err(config_err("a_values must be nonempty"));
    }
    let free = FreeField::new(&cfg.source)?;
    let grid = ContinuumGrid::cube(cfg.medium.domain.bounding_box(), cfg.grid_n)?;
    let qf = PotentialField::from_spec(&grid, &cfg.medium)?;
    let ie = solve_resolvent_ie(&grid, &qf, cfg.lambda, &free)?;
    let grid_cells: Vec<Box3> = (0..grid.cells()).map(|i| grid.cell_box(i)).collect();
    let ie_vals: Vec<Complex64> = cfg
        .probes
        .iter()
        .map(|p| field_from_cells(p, cfg.lambda, &grid_cells, &qf.values, &ie.values, &free))
        .collect::<heatwave::Result<_>>()?;

    let mut study = String::from("a,m,d_min,b,interaction_ratio,sup_diff\n");
    let mut sups = Vec::new();
    for &a in &cfg.a_values {
        let cloud = generate_cloud(&cfg.medium, a, seed)?;
        let b = (4.0 * cloud.d_min).max(a.cbrt());
        let (reduced, part) = solve_reduced_las(&cloud, &cfg.medium, b, cfg.lambda, &free)?;
        let cells: Vec<Box3> = (0..part.p()).map(|i| part.cell_box(i)).collect();
        let q_cells: Vec<Complex64> = part
            .centers
            .iter()
            .map(|c| {
                cfg.medium.impedance.eval(c)
                    * (cfg.medium.shape_constant * cfg.medium.density.eval(c))
            })
            .collect();
        let mut sup = 0.0f64;
        for (p, ie_v) in cfg.probes.iter().zip(&ie_vals) {
            let v = field_from_cells(p, cfg.lambda, &cells, &q_cells, &reduced.values, &free)?;
            sup = sup.max((v - ie_v).norm());
        }
        study.push_str(&format!(
            "{a},{},{},{b},{},{sup}\n",
            cloud.m(),
            cloud.d_min,
            interaction_ratio_diagnostic(&cloud, cfg.lambda)
        ));
        sups.push(sup);
    }
    let summary = serde_json::json!({
        "seed": seed,
        "lambda": cfg.lambda,
        "grid_n": cfg.grid_n,
        "sup_diffs": sups,
        "monotone_decreasing": sups.windows(2).all(|w| w[1] < w[0]),
    });
    Ok(vec![
        Artifact::new("study.csv", study),
        json_artifact("summary.json", &summary),
    ])
}
