//! `ratio-sparse`: generate instances, run one solver, sweep experiment
//! grids, and compare against the brute-force oracle on tiny systems.
//!
//! Exit codes: 0 success, 1 I/O or other runtime error, 2 invalid flags or
//! configuration, 3 infeasible support separation, 4 solver failure
//! (inner failure or unbounded subproblem).

mod config;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ratio_sparse::harness::{gaussian_instance, nullspace_oracle, run_grid, OracleParams};
use ratio_sparse::instance_io::{header_line, load_instance, save_instance, write_vector_csv};
use ratio_sparse::solvers::{solve, InitPolicy};
use ratio_sparse::{gen_instance, Error, Scheme, SolverConfig, ValueMode};

use config::{resolve_threads, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ratio-sparse",
    version,
    about = "Sparse recovery by L1/L2 minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an oversampled-DCT instance file.
    Gen(GenArgs),
    /// Run one scheme on an instance file.
    Solve(SolveArgs),
    /// Run an experiment grid and write one report CSV per value mode.
    Bench(BenchArgs),
    /// Compare BS, A1 and A2 against the null-space grid oracle.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long)]
    s: usize,
    /// Coherence parameter: the DCT is oversampled by this factor.
    #[arg(long = "F", default_value_t = 1.0)]
    coherence: f64,
    /// `gaussian` or a dynamic-range exponent (`D3`, `D=3`, `3`).
    #[arg(long, default_value = "gaussian")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "instance.rsp")]
    out: PathBuf,
    /// Also write the ground truth as a one-column CSV.
    #[arg(long)]
    truth_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "a2")]
    scheme: String,
    /// A2 proximal weight; defaults by the instance's value mode.
    #[arg(long)]
    beta: Option<f64>,
    /// A2 ADMM penalty; defaults by the instance's value mode.
    #[arg(long)]
    rho: Option<f64>,
    /// ADMM penalty of the linear subproblems.
    #[arg(long)]
    lp_rho: Option<f64>,
    #[arg(long)]
    outer_max: Option<usize>,
    #[arg(long)]
    outer_tol: Option<f64>,
    #[arg(long)]
    inner_max: Option<usize>,
    #[arg(long)]
    inner_tol: Option<f64>,
    /// `l1` (basis pursuit) or `least-norm`.
    #[arg(long, default_value = "l1")]
    init: String,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Recovered signal as a one-column CSV.
    #[arg(long)]
    x_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Flat TOML run configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sparsities: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    coherences: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Worker threads; overrides `RATIO_SPARSE_THREADS`.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, default_value = "oracle")]
    out_dir: PathBuf,
}

/// Error with the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_)
            | Error::DimensionTooLarge(_)
            | Error::DimensionMismatch { .. } => 2,
            Error::InfeasibleSeparation { .. } => 3,
            Error::Unbounded | Error::InnerFailure { .. } => 4,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn create_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
        _ => Ok(()),
    }
}

fn write_csv_file(path: &Path, x: &ratio_sparse::DVector<f64>) -> CmdResult {
    create_parent(path)?;
    write_vector_csv(x, BufWriter::new(fs::File::create(path)?))?;
    Ok(())
}

fn cmd_gen(a: GenArgs) -> CmdResult {
    let mode: ValueMode = a.mode.parse()?;
    let inst = gen_instance(a.m, a.n, a.s, a.coherence, mode, a.seed)?;
    create_parent(&a.out)?;
    save_instance(&inst, &a.out)?;
    if let Some(path) = &a.truth_csv {
        write_csv_file(path, &inst.x_true)?;
    }
    let support = inst.support();
    let min_gap = support.windows(2).map(|w| w[1] - w[0]).min();
    print!("{}", header_line(&inst));
    println!("support={support:?}");
    println!(
        "wrote {} (m={}, n={}, s={}, min support gap {})",
        a.out.display(),
        a.m,
        a.n,
        a.s,
        min_gap.map_or("n/a".to_string(), |g| g.to_string())
    );
    Ok(())
}

fn solver_config(a: &SolveArgs, mode: ValueMode) -> Result<SolverConfig, Failure> {
    let scheme: Scheme = a.scheme.parse()?;
    let mut cfg = SolverConfig::for_regime(scheme, mode);
    if let Some(v) = a.beta {
        cfg.beta = v;
    }
    if let Some(v) = a.rho {
        cfg.rho = v;
    }
    cfg.lp_rho = a.lp_rho.or(cfg.lp_rho);
    if let Some(v) = a.outer_max {
        cfg.outer_max = v;
    }
    if let Some(v) = a.outer_tol {
        cfg.outer_tol = v;
    }
    if let Some(v) = a.inner_max {
        cfg.inner_max = v;
    }
    if let Some(v) = a.inner_tol {
        cfg.inner_tol = v;
    }
    cfg.init_policy = match a.init.as_str() {
        "l1" => InitPolicy::L1Solution,
        "least-norm" => InitPolicy::LeastNorm,
        other => return Err(Error::InvalidConfig(format!("unknown init policy '{other}'")).into()),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let inst = load_instance(&a.instance)?;
    let cfg = solver_config(&a, inst.meta.value_mode)?;
    let p = inst.projector()?;
    let r = solve(&p, &cfg);
    let rel_error = (&r.x_star - &inst.x_true).norm() / inst.x_true.norm();
    println!("instance={}", a.instance.display());
    println!(
        "beta={} rho={} lp_rho={:?} outer_max={} outer_tol={:e}",
        cfg.beta, cfg.rho, cfg.lp_rho, cfg.outer_max, cfg.outer_tol
    );
    print!("{}", r.to_record(&p));
    println!("rel_error={rel_error:e}");
    if let Some(path) = &a.trace {
        create_parent(path)?;
        r.write_trace_csv(BufWriter::new(fs::File::create(path)?))?;
    }
    if let Some(path) = &a.x_out {
        write_csv_file(path, &r.x_star)?;
    }
    println!(
        "{} {} after {} iterations, alpha {:.6}, rel_error {rel_error:.3e}",
        r.scheme,
        r.status.name(),
        r.iterations,
        r.final_alpha()
    );
    if r.status.is_failure() {
        return Err(Failure {
            code: 4,
            message: format!("solver ended with status {}", r.status.name()),
        });
    }
    Ok(())
}

fn resolve_run_config(a: &BenchArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &a.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = a.m {
        cfg.m = v;
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = &a.sparsities {
        cfg.sparsities = v.clone();
    }
    if let Some(v) = &a.coherences {
        cfg.coherences = v.clone();
    }
    if let Some(v) = &a.modes {
        cfg.modes = v.clone();
    }
    if let Some(v) = &a.schemes {
        cfg.schemes = v.clone();
    }
    cfg.threads = resolve_threads(a.threads.unwrap_or(cfg.threads));
    Ok(cfg)
}

/// `report_gaussian.csv`, `report_D3.csv`, ...
fn report_name(mode: ValueMode) -> String {
    match mode {
        ValueMode::Gaussian => "report_gaussian.csv".to_string(),
        ValueMode::DynamicRange(d) => format!("report_D{d}.csv"),
    }
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let cfg = resolve_run_config(&a)?;
    let spec = cfg.to_grid()?;
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("config.toml"), cfg.to_toml())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Failure {
            code: 1,
            message: e.to_string(),
        })?;
    let report = pool.install(|| run_grid(&spec))?;

    let mut errors = 0;
    for c in &report.cells {
        errors += c.errors().len();
        println!(
            "s={:<3} F={:<4} {:<8} {:<4} success {:5.1}%  model {:5.1}%  algorithm {:5.1}%  time {:.3}s",
            c.key.sparsity,
            c.key.coherence,
            c.key.mode.to_string(),
            c.key.scheme.name(),
            100.0 * c.success_rate(),
            100.0 * c.model_failure_rate(),
            100.0 * c.algorithm_failure_rate(),
            c.time_mean_s()
        );
    }
    for &mode in &spec.modes {
        let path = cfg.out_dir.join(report_name(mode));
        let mut w = BufWriter::new(fs::File::create(&path)?);
        report.for_mode(mode).write_csv(&mut w)?;
        w.flush()?;
    }
    println!(
        "{} cells, {} trials each, {errors} trial errors, {} threads; reports in {}",
        report.cells.len(),
        cfg.trials,
        cfg.threads,
        cfg.out_dir.display()
    );
    Ok(())
}

fn cmd_oracle_check(a: OracleArgs) -> CmdResult {
    if a.m == 0 || a.n < a.m || a.n - a.m > 2 {
        return Err(Error::InvalidConfig(format!(
            "oracle-check needs m <= n <= m + 2, got m={}, n={}",
            a.m, a.n
        ))
        .into());
    }
    let schemes = [Scheme::Bs, Scheme::A1, Scheme::A2];
    fs::create_dir_all(&a.out_dir)?;
    let params = OracleParams::default();
    fs::write(
        a.out_dir.join("oracle_config.toml"),
        format!(
            "m = {}\nn = {}\nseeds = {}\nbase_seed = {}\nbox_half_width = \"10 x least-norm\"\ngrid_points = {}\nrefinement_levels = {}\n",
            a.m, a.n, a.seeds, a.base_seed, params.grid_points, params.refinement_levels
        ),
    )?;
    let path = a.out_dir.join("oracle_check.csv");
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(
        w,
        "seed,oracle_ratio,bs_ratio,a1_ratio,a2_ratio,bs_gap,a1_gap,a2_gap"
    )?;
    let mut within = [0usize; 3];
    for seed in a.base_seed..a.base_seed + a.seeds {
        let inst = gaussian_instance(a.m, a.n, seed)?;
        let p = inst.projector()?;
        let (_, oracle) = nullspace_oracle(&p, params)?;
        let ratios: Vec<f64> = schemes
            .iter()
            .map(|&s| solve(&p, &SolverConfig::new(s)).final_alpha())
            .collect();
        let gaps: Vec<f64> = ratios.iter().map(|r| (r - oracle) / oracle).collect();
        for (k, g) in gaps.iter().enumerate() {
            within[k] += (*g <= 0.01) as usize;
        }
        writeln!(
            w,
            "{seed},{oracle:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            ratios[0], ratios[1], ratios[2], gaps[0], gaps[1], gaps[2]
        )?;
        println!(
            "seed {seed}: oracle {oracle:.6}  bs {:+.2}%  a1 {:+.2}%  a2 {:+.2}%",
            100.0 * gaps[0],
            100.0 * gaps[1],
            100.0 * gaps[2]
        );
    }
    w.flush()?;
    println!(
        "within 1% of the oracle: bs {}/{n}, a1 {}/{n}, a2 {}/{n}; wrote {}",
        within[0],
        within[1],
        within[2],
        path.display(),
        n = a.seeds
    );
    Ok(())
}
