//! `ldp` — experiments on mean-field jump processes from the command line.
//!
//! Every subcommand reads a JSON model config, validates all inputs before
//! computing, writes its outputs atomically (temp file + rename), embeds
//! the resolved configuration in each output file, and echoes a JSON run
//! manifest (config hash, seed, version, wall time) on stdout.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical non-convergence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ldp_core::action::{evaluate_action, gibbs_initial_rate, InitialRate};
use ldp_core::flow::{branch_solution, integrate_characteristics, integrate_mkv, FlowConfig, Method};
use ldp_core::hamiltonian::{self, HamiltonianError};
use ldp_core::hjb::{
    comparison_experiment, nisio_value_dp, solve_resolvent, Domain, Grid, GridFunction, HjbError,
    SchemeParams,
};
use ldp_core::io as ldpio;
use ldp_core::lyapunov::{integrator_tolerance, lyapunov_check_with};
use ldp_core::model::{ModelConfig, ModelSpec, SmoothFn};
use ldp_core::simulator::{ldp_rate_estimate, simulate_path};
use ldp_core::state::StatePoint;
use ldp_core::trajectory::Trajectory;
use ldp_core::{rng, Cost};

#[derive(Parser)]
#[command(name = "ldp", version, about = "Mean-field jump process experiments")]
struct Cli {
    /// Worker threads (default: all cores; env LDP_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Gillespie simulation of the n-particle empirical process.
    Simulate(SimulateArgs),
    /// Integrate the McKean-Vlasov flow (or a closed-form branch solution).
    Flow(FlowArgs),
    /// Evaluate the path action of a trajectory CSV.
    Action(ActionArgs),
    /// Monte-Carlo tube probabilities and decay-rate estimates over n.
    RateEstimate(RateEstimateArgs),
    /// Solve the resolvent equation f - lambda H(x, grad f) = h on a grid.
    Resolvent(ResolventArgs),
    /// Multi-initialization, multi-resolution uniqueness experiment.
    Comparison(ComparisonArgs),
    /// Dynamic-programming value function of the variational semigroup.
    Nisio(NisioArgs),
    /// Track the Gibbs rate function along the McKean-Vlasov flow.
    Lyapunov(LyapunovArgs),
    /// Evaluate the Hamiltonian at one (state, momentum) pair.
    Hamiltonian(HamiltonianArgs),
    /// Evaluate the Lagrangian at one (state, velocity) pair.
    Lagrangian(LagrangianArgs),
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// Model config JSON file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: u64,
    /// Comma-separated start coordinates.
    #[arg(long)]
    start: String,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct FlowArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated start coordinates (required unless --branch).
    #[arg(long)]
    start: Option<String>,
    /// Sample the closed-form branch solution with this branch time
    /// instead of integrating (non-unique model only).
    #[arg(long)]
    branch: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
    method: MethodArg,
    /// Skip projecting iterates back into the state space.
    #[arg(long)]
    no_projection: bool,
    /// Integrate characteristics of H_p(x, grad g) for a preset g instead
    /// of the plain flow.
    #[arg(long, value_enum)]
    g_preset: Option<PresetArg>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Rk4,
    Euler,
}

#[derive(Args, Serialize)]
struct ActionArgs {
    #[arg(long)]
    config: PathBuf,
    /// Trajectory CSV (piecewise-linear).
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long, value_enum, default_value_t = InitialRateArg::Point)]
    i0: InitialRateArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum InitialRateArg {
    /// Point mass at the trajectory's start.
    Point,
    /// Gibbs rate S(mu|uniform) + V(mu) (Glauber models with a potential).
    Gibbs,
}

#[derive(Args, Serialize)]
struct RateEstimateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Reference trajectory CSV (piecewise-linear).
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    delta: f64,
    /// Comma-separated increasing particle counts.
    #[arg(long)]
    n_values: String,
    #[arg(long)]
    replicas: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = InitialRateArg::Point)]
    i0: InitialRateArg,
    /// JSON report path.
    #[arg(long)]
    output: PathBuf,
    /// CSV summary path (default: output with .csv extension).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ResolventArgs {
    #[arg(long)]
    config: PathBuf,
    /// Grid resolution (points per axis / simplex denominator).
    #[arg(long)]
    resolution: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = PresetArg::Cos)]
    h_preset: PresetArg,
    #[arg(long, default_value_t = 2.0)]
    p_diss: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct ComparisonArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = PresetArg::Cos)]
    h_preset: PresetArg,
    /// Comma-separated grid resolutions.
    #[arg(long)]
    resolutions: String,
    #[arg(long, default_value_t = 2.0)]
    p_diss: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct NisioArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    resolution: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 64)]
    time_steps: usize,
    #[arg(long, default_value_t = 24)]
    velocity_samples: usize,
    #[arg(long, value_enum, default_value_t = PresetArg::Cos)]
    f0_preset: PresetArg,
    #[arg(long, default_value_t = 2.0)]
    p_diss: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct LyapunovArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    start: String,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long)]
    horizon: f64,
    /// Monotonicity tolerance (default: coupled to the integrator error).
    #[arg(long)]
    tolerance: Option<f64>,
    /// CSV of (t, I0) samples.
    #[arg(long)]
    output: PathBuf,
    /// JSON verdict path (default: output with .json extension).
    #[arg(long)]
    verdict: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct HamiltonianArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    state: String,
    #[arg(long)]
    p: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Serialize)]
struct LagrangianArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    state: String,
    #[arg(long)]
    velocity: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PresetArg {
    Zero,
    Quadratic,
    Cos,
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<HjbError> for CliError {
    fn from(e: HjbError) -> Self {
        match e {
            HjbError::NotConverged { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<HamiltonianError> for CliError {
    fn from(e: HamiltonianError) -> Self {
        match e {
            HamiltonianError::NonConvergence { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ldpio::IoError> for CliError {
    fn from(e: ldpio::IoError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = configure_threads(cli.threads);
    let started = Instant::now();
    match run(cli.command) {
        Ok(mut manifest) => {
            manifest.wall_time_s = started.elapsed().as_secs_f64();
            manifest.threads = threads;
            println!("{}", serde_json::to_string(&manifest).expect("manifest serializes"));
            ExitCode::SUCCESS
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads(requested: Option<usize>) -> usize {
    let threads = requested
        .or_else(|| std::env::var("LDP_THREADS").ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    threads
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    version: &'static str,
    config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    rng: &'static str,
    threads: usize,
    wall_time_s: f64,
    outputs: Vec<String>,
}

fn run(command: Command) -> Result<Manifest, CliError> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Flow(args) => cmd_flow(args),
        Command::Action(args) => cmd_action(args),
        Command::RateEstimate(args) => cmd_rate_estimate(args),
        Command::Resolvent(args) => cmd_resolvent(args),
        Command::Comparison(args) => cmd_comparison(args),
        Command::Nisio(args) => cmd_nisio(args),
        Command::Lyapunov(args) => cmd_lyapunov(args),
        Command::Hamiltonian(args) => cmd_hamiltonian(args),
        Command::Lagrangian(args) => cmd_lagrangian(args),
    }
}

// ---------------------------------------------------------------------
// Shared plumbing.

fn load_model(path: &Path) -> Result<(ModelConfig, ModelSpec), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let config: ModelConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    let model = config.build().map_err(CliError::validation)?;
    Ok((config, model))
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(format!("bad {what} `{text}`: {e}")))
}

fn parse_state(model: &ModelSpec, text: &str) -> Result<StatePoint, CliError> {
    let coords = parse_floats(text, "state")?;
    match model {
        ModelSpec::Ehrenfest(_) => StatePoint::cube(coords),
        ModelSpec::Glauber(_) => StatePoint::simplex(coords),
    }
    .map_err(CliError::validation)
}

/// Resolved configuration of a run: the model config plus every
/// command-specific parameter, as one JSON line, with its SHA-256.
fn resolved_config(
    command: &str,
    model: &ModelConfig,
    params: &impl Serialize,
) -> (String, String) {
    let json = serde_json::json!({
        "command": command,
        "model": model,
        "params": params,
    });
    let text = serde_json::to_string(&json).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let hash: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    (text, hash)
}

fn meta_lines(config_text: &str, hash: &str) -> Vec<(String, String)> {
    vec![
        ("config_sha256".to_string(), hash.to_string()),
        ("config".to_string(), config_text.to_string()),
    ]
}

/// Write bytes atomically: temp file in the target directory, then rename.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| CliError::Validation(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

fn read_reference(path: &Path) -> Result<Trajectory, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(ldpio::read_trajectory(std::io::BufReader::new(file))?)
}

fn model_domain(model: &ModelSpec) -> Domain {
    match model {
        ModelSpec::Ehrenfest(_) => Domain::Cube,
        ModelSpec::Glauber(_) => Domain::Simplex,
    }
}

fn build_grid(model: &ModelSpec, resolution: usize) -> Result<std::sync::Arc<Grid>, CliError> {
    match model {
        ModelSpec::Ehrenfest(m) => Grid::cube(m.d(), resolution),
        ModelSpec::Glauber(m) => Grid::simplex(m.d(), resolution),
    }
    .map_err(CliError::validation)
}

fn preset_fn(preset: PresetArg, domain: Domain, d: usize) -> Box<dyn Fn(&[f64]) -> f64 + Sync> {
    match (preset, domain) {
        (PresetArg::Zero, _) => Box::new(|_| 0.0),
        (PresetArg::Quadratic, Domain::Cube) => {
            Box::new(|z| 0.3 * z.iter().map(|v| v * v).sum::<f64>())
        }
        (PresetArg::Quadratic, Domain::Simplex) => Box::new(move |z| {
            let c = 1.0 / d as f64;
            0.3 * z.iter().map(|v| (v - c) * (v - c)).sum::<f64>()
        }),
        (PresetArg::Cos, Domain::Cube) => Box::new(|z| {
            0.4 * z
                .iter()
                .map(|v| (std::f64::consts::FRAC_PI_2 * v).cos())
                .product::<f64>()
        }),
        (PresetArg::Cos, Domain::Simplex) => Box::new(move |z| {
            let c = 1.0 / d as f64;
            0.4 * z
                .iter()
                .map(|v| (std::f64::consts::PI * (v - c)).cos())
                .product::<f64>()
        }),
    }
}

/// Preset smooth test functions with analytic gradients (for the
/// characteristic flow).
fn preset_smooth(preset: PresetArg, domain: Domain, d: usize) -> SmoothFn {
    match preset {
        PresetArg::Zero => SmoothFn::zero(),
        PresetArg::Quadratic => match domain {
            Domain::Cube => SmoothFn::new(
                |z| 0.3 * z.iter().map(|v| v * v).sum::<f64>(),
                |z| z.iter().map(|v| 0.6 * v).collect(),
            ),
            Domain::Simplex => {
                let c = 1.0 / d as f64;
                SmoothFn::new(
                    move |z| 0.3 * z.iter().map(|v| (v - c) * (v - c)).sum::<f64>(),
                    move |z| z.iter().map(|v| 0.6 * (v - c)).collect(),
                )
            }
        },
        PresetArg::Cos => match domain {
            Domain::Cube => SmoothFn::new(
                |z| {
                    0.4 * z
                        .iter()
                        .map(|v| (std::f64::consts::FRAC_PI_2 * v).cos())
                        .product::<f64>()
                },
                |z| {
                    let half_pi = std::f64::consts::FRAC_PI_2;
                    (0..z.len())
                        .map(|i| {
                            0.4 * z
                                .iter()
                                .enumerate()
                                .map(|(j, v)| {
                                    if i == j {
                                        -half_pi * (half_pi * v).sin()
                                    } else {
                                        (half_pi * v).cos()
                                    }
                                })
                                .product::<f64>()
                        })
                        .collect()
                },
            ),
            Domain::Simplex => {
                let c = 1.0 / d as f64;
                SmoothFn::new(
                    move |z| {
                        0.4 * z
                            .iter()
                            .map(|v| (std::f64::consts::PI * (v - c)).cos())
                            .product::<f64>()
                    },
                    move |z| {
                        let pi = std::f64::consts::PI;
                        (0..z.len())
                            .map(|i| {
                                0.4 * z
                                    .iter()
                                    .enumerate()
                                    .map(|(j, v)| {
                                        if i == j {
                                            -pi * (pi * (v - c)).sin()
                                        } else {
                                            (pi * (v - c)).cos()
                                        }
                                    })
                                    .product::<f64>()
                            })
                            .collect()
                    },
                )
            }
        },
    }
}

fn initial_rate(
    model: &ModelSpec,
    choice: InitialRateArg,
    traj: &Trajectory,
) -> Result<InitialRate, CliError> {
    match choice {
        InitialRateArg::Point => Ok(InitialRate::PointMass(traj.start().clone())),
        InitialRateArg::Gibbs => match model {
            ModelSpec::Glauber(g) => gibbs_initial_rate(g).map_err(CliError::validation),
            ModelSpec::Ehrenfest(_) => Err(CliError::Validation(
                "gibbs initial rate needs a Glauber model".to_string(),
            )),
        },
    }
}

fn manifest(
    command: &'static str,
    hash: String,
    seed: Option<u64>,
    outputs: Vec<&Path>,
) -> Manifest {
    Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: hash,
        seed,
        rng: rng::RNG_ALGORITHM,
        threads: 0,
        wall_time_s: 0.0,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    }
}

// ---------------------------------------------------------------------
// Command handlers.

fn cmd_simulate(args: SimulateArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let start = parse_state(&model, &args.start)?;
    let (text, hash) = resolved_config("simulate", &config, &args);
    let path = simulate_path(&model, args.n, &start, args.horizon, args.seed)
        .map_err(CliError::validation)?;
    let mut meta = meta_lines(&text, &hash);
    meta.push(("absorbed".to_string(), path.absorbed.to_string()));
    meta.push(("jumps".to_string(), path.jumps.to_string()));
    let mut buf = Vec::new();
    ldpio::write_trajectory(&mut buf, &path.trajectory, &meta)?;
    atomic_write(&args.output, &buf)?;
    Ok(manifest("simulate", hash, Some(args.seed), vec![&args.output]))
}

fn cmd_flow(args: FlowArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let method = match args.method {
        MethodArg::Rk4 => Method::Rk4,
        MethodArg::Euler => Method::Euler,
    };
    let mut cfg = FlowConfig::new(args.dt, args.horizon, method).map_err(CliError::validation)?;
    if args.no_projection {
        cfg = cfg.without_projection();
    }
    let (text, hash) = resolved_config("flow", &config, &args);
    let (trajectory, max_projection) = if let Some(branch) = args.branch {
        (branch_solution(&model, branch, &cfg).map_err(CliError::validation)?, 0.0)
    } else {
        let start_text = args.start.as_deref().ok_or_else(|| {
            CliError::Validation("either --start or --branch is required".to_string())
        })?;
        let start = parse_state(&model, start_text)?;
        let out = match args.g_preset {
            None => integrate_mkv(&model, &start, &cfg),
            Some(p) => {
                let g = preset_smooth(p, model_domain(&model), model.d());
                integrate_characteristics(&model, &g, &start, &cfg)
            }
        }
        .map_err(CliError::validation)?;
        (out.trajectory, out.max_projection)
    };
    let mut meta = meta_lines(&text, &hash);
    meta.push(("max_projection".to_string(), format!("{max_projection}")));
    let mut buf = Vec::new();
    ldpio::write_trajectory(&mut buf, &trajectory, &meta)?;
    atomic_write(&args.output, &buf)?;
    Ok(manifest("flow", hash, None, vec![&args.output]))
}

fn cmd_action(args: ActionArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let traj = read_reference(&args.trajectory)?;
    let i0 = initial_rate(&model, args.i0, &traj)?;
    let (text, hash) = resolved_config("action", &config, &args);
    let result = evaluate_action(&model, &traj, &i0).map_err(CliError::validation)?;
    let payload = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&text).unwrap(),
        "total": result.total,
        "initial_part": result.initial_part,
        "infinite_interval": result.infinite_interval,
        "intervals": result.running_part,
    });
    atomic_write(&args.output, format!("{payload:#}\n").as_bytes())?;
    Ok(manifest("action", hash, None, vec![&args.output]))
}

fn cmd_rate_estimate(args: RateEstimateArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let reference = read_reference(&args.reference)?;
    let n_values: Vec<u64> = args
        .n_values
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(format!("bad n-values: {e}")))?;
    let i0 = initial_rate(&model, args.i0, &reference)?;
    let (text, hash) = resolved_config("rate-estimate", &config, &args);
    let report = ldp_rate_estimate(
        &model,
        &reference,
        args.delta,
        &n_values,
        args.replicas,
        args.seed,
        &i0,
    )
    .map_err(CliError::validation)?;

    let payload = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&text).unwrap(),
        "report": report,
    });
    atomic_write(&args.output, format!("{payload:#}\n").as_bytes())?;

    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| args.output.with_extension("csv"));
    let mut csv = String::new();
    csv.push_str(&format!(
        "# schema=rate-report.v1\n# config_sha256={hash}\n# config={text}\n"
    ));
    csv.push_str("n,p_hat,decay_estimate,reference_action\n");
    for (i, &n) in report.n_values.iter().enumerate() {
        let decay = report.decay_estimates[i]
            .map(|d| d.to_string())
            .unwrap_or_default();
        csv.push_str(&format!(
            "{n},{},{decay},{}\n",
            report.tube_probabilities[i], report.reference_action
        ));
    }
    atomic_write(&summary_path, csv.as_bytes())?;
    Ok(manifest(
        "rate-estimate",
        hash,
        Some(args.seed),
        vec![&args.output, &summary_path],
    ))
}

fn cmd_resolvent(args: ResolventArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let grid = build_grid(&model, args.resolution)?;
    let params = SchemeParams::default().with_p_diss(args.p_diss).with_tol(args.tol);
    let h_fn = preset_fn(args.h_preset, model_domain(&model), model.d());
    let h = GridFunction::from_fn(&grid, &*h_fn).map_err(CliError::validation)?;
    let (text, hash) = resolved_config("resolvent", &config, &args);
    let out = solve_resolvent(&model, args.lambda, &h, &params)?;
    let mut meta = meta_lines(&text, &hash);
    meta.push(("residual".to_string(), format!("{}", out.residual)));
    meta.push(("iterations".to_string(), out.iterations.to_string()));
    let mut buf = Vec::new();
    ldpio::write_grid_function(&mut buf, &out.f, &meta)?;
    atomic_write(&args.output, &buf)?;
    Ok(manifest("resolvent", hash, None, vec![&args.output]))
}

fn cmd_comparison(args: ComparisonArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let resolutions: Vec<usize> = args
        .resolutions
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(format!("bad resolutions: {e}")))?;
    let params = SchemeParams::default().with_p_diss(args.p_diss);
    let h_fn = preset_fn(args.h_preset, model_domain(&model), model.d());
    let plus = |_: &[f64]| 1.0;
    let minus = |_: &[f64]| -1.0;
    let inits: Vec<&(dyn Fn(&[f64]) -> f64 + Sync)> = vec![&*h_fn, &plus, &minus];
    let (text, hash) = resolved_config("comparison", &config, &args);
    let report =
        comparison_experiment(&model, args.lambda, &*h_fn, &resolutions, &inits, &params)?;
    let payload = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&text).unwrap(),
        "report": report,
    });
    atomic_write(&args.output, format!("{payload:#}\n").as_bytes())?;
    Ok(manifest("comparison", hash, None, vec![&args.output]))
}

fn cmd_nisio(args: NisioArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let grid = build_grid(&model, args.resolution)?;
    let params = SchemeParams::default().with_p_diss(args.p_diss);
    let f0_fn = preset_fn(args.f0_preset, model_domain(&model), model.d());
    let f0 = GridFunction::from_fn(&grid, &*f0_fn).map_err(CliError::validation)?;
    let (text, hash) = resolved_config("nisio", &config, &args);
    let value = nisio_value_dp(&model, &f0, args.t, args.time_steps, args.velocity_samples, &params)?;
    let mut buf = Vec::new();
    ldpio::write_grid_function(&mut buf, &value, &meta_lines(&text, &hash))?;
    atomic_write(&args.output, &buf)?;
    Ok(manifest("nisio", hash, None, vec![&args.output]))
}

fn cmd_lyapunov(args: LyapunovArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let start = parse_state(&model, &args.start)?;
    let cfg = FlowConfig::new(args.dt, args.horizon, Method::Rk4).map_err(CliError::validation)?;
    let tolerance = args.tolerance.unwrap_or_else(|| integrator_tolerance(&cfg, 1.0));
    let glauber = match &model {
        ModelSpec::Glauber(g) => g,
        ModelSpec::Ehrenfest(_) => {
            return Err(CliError::Validation(
                "lyapunov needs a Glauber model with a potential".to_string(),
            ))
        }
    };
    let i0 = gibbs_initial_rate(glauber).map_err(CliError::validation)?;
    let (text, hash) = resolved_config("lyapunov", &config, &args);
    let report =
        lyapunov_check_with(&model, &i0, &start, &cfg, tolerance).map_err(CliError::validation)?;

    let mut csv = String::new();
    csv.push_str(&format!(
        "# schema=lyapunov.v1\n# config_sha256={hash}\n# config={text}\n"
    ));
    csv.push_str("t,I0\n");
    for (t, v) in report.times.iter().zip(&report.values) {
        csv.push_str(&format!("{t},{v}\n"));
    }
    atomic_write(&args.output, csv.as_bytes())?;

    let verdict_path = args
        .verdict
        .clone()
        .unwrap_or_else(|| args.output.with_extension("json"));
    let payload = serde_json::json!({
        "config": serde_json::from_str::<serde_json::Value>(&text).unwrap(),
        "monotone": report.monotone,
        "max_increase": report.max_increase,
        "tolerance": report.tolerance,
        "final_value": report.values.last(),
    });
    atomic_write(&verdict_path, format!("{payload:#}\n").as_bytes())?;
    Ok(manifest("lyapunov", hash, None, vec![&args.output, &verdict_path]))
}

fn cmd_hamiltonian(args: HamiltonianArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let state = parse_state(&model, &args.state)?;
    let p = parse_floats(&args.p, "momentum")?;
    let (text, hash) = resolved_config("hamiltonian", &config, &args);
    let value = hamiltonian::value(&model, &state, &p)?;
    let gradient = hamiltonian::grad_p(&model, &state, &p)?;
    let columns = ["H", "grad_H_p"];
    let values = vec![
        value.to_string(),
        gradient.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";"),
    ];
    let mut buf = Vec::new();
    ldpio::write_single_row(
        &mut buf,
        "hamiltonian.v1",
        &meta_lines(&text, &hash),
        &columns,
        &values,
    )?;
    atomic_write(&args.output, &buf)?;
    Ok(manifest("hamiltonian", hash, None, vec![&args.output]))
}

fn cmd_lagrangian(args: LagrangianArgs) -> Result<Manifest, CliError> {
    let (config, model) = load_model(&args.config)?;
    let state = parse_state(&model, &args.state)?;
    let velocity = parse_floats(&args.velocity, "velocity")?;
    let (text, hash) = resolved_config("lagrangian", &config, &args);
    let lv = hamiltonian::lagrangian(&model, &state, &velocity)?;
    let maximizer = lv
        .maximizer
        .map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"))
        .unwrap_or_default();
    let finite = matches!(lv.value, Cost::Finite(_));
    let columns = ["L", "finite", "maximizer"];
    let values = vec![lv.value.to_string(), finite.to_string(), maximizer];
    let mut buf = Vec::new();
    ldpio::write_single_row(
        &mut buf,
        "lagrangian.v1",
        &meta_lines(&text, &hash),
        &columns,
        &values,
    )?;
    atomic_write(&args.output, &buf)?;
    Ok(manifest("lagrangian", hash, None, vec![&args.output]))
}
