//! `rpsdyn`: command-line driver for the discretized best-response
//! rock-paper-scissors dynamics.
//!
//! Five subcommands cover the library surface: `orbit` simulates a
//! trajectory of the one-step map, `attractor` enumerates the periodic
//! attractor orbits in closed form, `bifurcation` sweeps the retention
//! weight and emits the head/tail/count structure as CSV, `basins`
//! rasterizes basins of attraction to a PPM image plus a CSV table, and
//! `verify` runs the library's self-verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 indifference-set collision, 4 bifurcation boundary, 5 output error.
//! All reports echo the resolved parameters, floats carry 17 significant
//! digits, and every command is deterministic for fixed flags and seed.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rps_dynamics::{
    basin_raster, bifurcation_sweep, enumerate_attractor, iterate_t, lambda_grid,
    render_bifurcation_csv, run_verify, step_t, write_ppm, write_raster_csv, AttractorReport,
    Error, GameParams, RegionLabel, Strategy, Trajectory, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "rpsdyn",
    version,
    about = "Discretized best-response dynamics for rock-paper-scissors",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an orbit of the one-step map from a chosen start
    Orbit(OrbitArgs),
    /// Enumerate the periodic attractor orbits in closed form
    Attractor(AttractorArgs),
    /// Sweep the retention weight and emit head/tail/count rows as CSV
    Bifurcation(BifurcationArgs),
    /// Rasterize basins of attraction to a PPM image and a CSV table
    Basins(BasinsArgs),
    /// Run the library self-verification suite
    Verify(VerifyArgs),
}

/// Payoff flags: either `--a` with `--b`, or the single ratio `--alpha`.
#[derive(Args, Debug)]
struct PayoffArgs {
    /// Win payoff (use together with --b)
    #[arg(long, value_name = "A", requires = "b", conflicts_with = "alpha")]
    a: Option<f64>,
    /// Loss magnitude (use together with --a)
    #[arg(long, value_name = "B", requires = "a", conflicts_with = "alpha")]
    b: Option<f64>,
    /// Payoff ratio a/b (alternative to --a/--b)
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,
}

impl PayoffArgs {
    fn payoffs(&self) -> Result<(f64, f64), Failure> {
        match (self.a, self.b, self.alpha) {
            (Some(a), Some(b), None) => Ok((a, b)),
            (None, None, Some(alpha)) => Ok((alpha, 1.0)),
            _ => Err(bad_input(
                "specify the payoffs as either --a with --b, or --alpha alone",
            )),
        }
    }
}

/// Timescale flags: exactly one of `--lambda` or `--epsilon = 1 - lambda`.
#[derive(Args, Debug)]
struct RateArgs {
    /// Retention weight in (0,1) (alternative to --epsilon)
    #[arg(long, value_name = "LAMBDA", conflicts_with = "epsilon")]
    lambda: Option<f64>,
    /// Step size 1 - lambda in (0,1) (alternative to --lambda)
    #[arg(long, value_name = "EPS")]
    epsilon: Option<f64>,
}

fn game(
    payoff: &PayoffArgs,
    rate: &RateArgs,
    gamma_tol: Option<f64>,
) -> Result<GameParams, Failure> {
    let (a, b) = payoff.payoffs()?;
    let g = match (rate.lambda, rate.epsilon) {
        (Some(lambda), None) => GameParams::new(a, b, lambda),
        (None, Some(epsilon)) => GameParams::from_epsilon(a, b, epsilon),
        _ => {
            return Err(bad_input(
                "specify the timescale as exactly one of --lambda or --epsilon",
            ))
        }
    }
    .map_err(from_lib)?;
    match gamma_tol {
        Some(tol) => g.with_gamma_tol(tol).map_err(from_lib),
        None => Ok(g),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    payoff: PayoffArgs,
    #[command(flatten)]
    rate: RateArgs,
    /// Half-width of the indifference band Gamma
    #[arg(long = "gamma-tol", value_name = "TOL")]
    gamma_tol: Option<f64>,
    /// Starting strategy as "x1,x2,x3"
    #[arg(long, value_name = "X1,X2,X3")]
    x0: String,
    /// Number of map applications
    #[arg(long, default_value = "100")]
    steps: usize,
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct AttractorArgs {
    #[command(flatten)]
    payoff: PayoffArgs,
    #[command(flatten)]
    rate: RateArgs,
    /// Half-width of the indifference band Gamma
    #[arg(long = "gamma-tol", value_name = "TOL")]
    gamma_tol: Option<f64>,
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format (text or json)
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BifurcationArgs {
    #[command(flatten)]
    payoff: PayoffArgs,
    /// Lower end of the lambda grid
    #[arg(long = "lambda-min", value_name = "LO", default_value = "0.05")]
    lambda_min: f64,
    /// Upper end of the lambda grid
    #[arg(long = "lambda-max", value_name = "HI", default_value = "0.99")]
    lambda_max: f64,
    /// Number of grid points
    #[arg(long, default_value = "200")]
    points: usize,
    /// Write the CSV to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasinsArgs {
    #[command(flatten)]
    payoff: PayoffArgs,
    #[command(flatten)]
    rate: RateArgs,
    /// Half-width of the indifference band Gamma
    #[arg(long = "gamma-tol", value_name = "TOL")]
    gamma_tol: Option<f64>,
    /// Cells per simplex edge
    #[arg(long, default_value = "300")]
    resolution: u32,
    /// Iteration budget per cell
    #[arg(long, default_value = "5000")]
    iters: u32,
    /// Convergence distance to an orbit point
    #[arg(long, default_value = "1e-6")]
    tol: f64,
    /// Output prefix; writes PREFIX.ppm and PREFIX.csv
    #[arg(long, value_name = "PREFIX", default_value = "basins")]
    out: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Simplex samples per grid point
    #[arg(long, default_value = "500")]
    samples: usize,
    /// RNG seed
    #[arg(long, default_value = "7")]
    seed: u64,
    /// Write the report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format (text or json)
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Shift the band thresholds by this offset to demonstrate fault detection
    #[arg(
        long = "inject-bk-offset",
        value_name = "OFFSET",
        default_value = "0",
        hide = true
    )]
    inject_bk_offset: f64,
}

/// A command failure: diagnostic message plus process exit code.
struct Failure {
    code: u8,
    message: String,
}

fn bad_input(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn from_lib(err: Error) -> Failure {
    let code = match err {
        Error::InvalidParams(_) | Error::InvalidStrategy(_) | Error::BracketFailure(_) => 2,
        Error::GammaCollision { .. } | Error::NotInBranchB => 3,
        Error::ThresholdCollision { .. }
        | Error::BoundViolation { .. }
        | Error::BifurcationBoundary { .. }
        | Error::OrbitClosureFailure { .. } => 4,
        Error::Io { .. } => 5,
    };
    Failure {
        code,
        message: err.to_string(),
    }
}

fn io_failure(path: &Path, err: std::io::Error) -> Failure {
    Failure {
        code: 5,
        message: format!("cannot write {}: {err}", path.display()),
    }
}

fn sig(x: f64) -> String {
    format!("{x:.16e}")
}

fn param_echo(g: &GameParams) -> String {
    format!(
        "a={} b={} alpha={} lambda={} epsilon={} gamma_tol={}",
        sig(g.a()),
        sig(g.b()),
        sig(g.alpha()),
        sig(g.lambda()),
        sig(g.epsilon()),
        sig(g.gamma_tol()),
    )
}

fn region_str(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::R1 => "R1",
        RegionLabel::R2 => "R2",
        RegionLabel::R3 => "R3",
        RegionLabel::Gamma => "Gamma",
    }
}

/// Shared parameter echo for JSON reports.
#[derive(Serialize)]
struct ParamsJson {
    a: f64,
    b: f64,
    alpha: f64,
    lambda: f64,
    epsilon: f64,
    gamma_tol: f64,
}

impl ParamsJson {
    fn of(g: &GameParams) -> Self {
        Self {
            a: g.a(),
            b: g.b(),
            alpha: g.alpha(),
            lambda: g.lambda(),
            epsilon: g.epsilon(),
            gamma_tol: g.gamma_tol(),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize infallibly");
    text.push('\n');
    text
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| io_failure(path, e))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_x0(raw: &str) -> Result<Strategy, Failure> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad_input(format!(
            "--x0 needs three comma-separated coordinates, got {}",
            parts.len()
        )));
    }
    let mut coords = [0.0f64; 3];
    for (slot, part) in coords.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|e| bad_input(format!("--x0 component {part:?} is not a number: {e}")))?;
    }
    Strategy::new(coords[0], coords[1], coords[2]).map_err(from_lib)
}

fn orbit_text(g: &GameParams, steps: usize, traj: &Trajectory) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "params: {}", param_echo(g));
    let _ = writeln!(
        out,
        "steps requested={} completed={} hit_gamma={}",
        steps,
        traj.steps(),
        traj.hit_gamma
    );
    out.push_str("step x1 x2 x3 region\n");
    for (idx, (point, label)) in traj.points.iter().zip(&traj.labels).enumerate() {
        let [x1, x2, x3] = point.coords();
        let _ = writeln!(
            out,
            "{idx} {} {} {} {}",
            sig(x1),
            sig(x2),
            sig(x3),
            region_str(*label)
        );
    }
    out
}

fn orbit_csv(g: &GameParams, steps: usize, traj: &Trajectory) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "# params: {}", param_echo(g));
    let _ = writeln!(
        out,
        "# steps requested={} completed={} hit_gamma={}",
        steps,
        traj.steps(),
        traj.hit_gamma
    );
    out.push_str("step,x1,x2,x3,region\n");
    for (idx, (point, label)) in traj.points.iter().zip(&traj.labels).enumerate() {
        let [x1, x2, x3] = point.coords();
        let _ = writeln!(
            out,
            "{idx},{},{},{},{}",
            sig(x1),
            sig(x2),
            sig(x3),
            region_str(*label)
        );
    }
    out
}

#[derive(Serialize)]
struct OrbitRowJson {
    step: usize,
    x: [f64; 3],
    region: &'static str,
}

#[derive(Serialize)]
struct OrbitJson {
    params: ParamsJson,
    steps_requested: usize,
    steps_completed: usize,
    hit_gamma: bool,
    rows: Vec<OrbitRowJson>,
}

fn cmd_orbit(args: &OrbitArgs) -> Result<u8, Failure> {
    let g = game(&args.payoff, &args.rate, args.gamma_tol)?;
    let x0 = parse_x0(&args.x0)?;
    let traj = iterate_t(&g, &x0, args.steps);
    let content = match args.format {
        Format::Text => orbit_text(&g, args.steps, &traj),
        Format::Csv => orbit_csv(&g, args.steps, &traj),
        Format::Json => to_json(&OrbitJson {
            params: ParamsJson::of(&g),
            steps_requested: args.steps,
            steps_completed: traj.steps(),
            hit_gamma: traj.hit_gamma,
            rows: traj
                .points
                .iter()
                .zip(&traj.labels)
                .enumerate()
                .map(|(step, (point, label))| OrbitRowJson {
                    step,
                    x: point.coords(),
                    region: region_str(*label),
                })
                .collect(),
        }),
    };
    emit(args.out.as_deref(), &content)?;
    if traj.hit_gamma {
        let at = traj.points.len() - 1;
        let detail = match step_t(&g, &traj.points[at]) {
            Err(err) => err.to_string(),
            Ok(_) => "point within tolerance of the indifference set".to_string(),
        };
        return Err(Failure {
            code: 3,
            message: format!("orbit reached the indifference set at step {at}: {detail}"),
        });
    }
    Ok(0)
}

fn attractor_text(g: &GameParams, report: &AttractorReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "params: {}", param_echo(g));
    let _ = writeln!(
        out,
        "head={} tail={} count={} boundary={}",
        report.head, report.tail, report.count, report.boundary
    );
    for orbit in &report.orbits {
        let _ = writeln!(out, "orbit k={} period={}", orbit.k, orbit.period);
        for (idx, point) in orbit.points.iter().enumerate() {
            let [x1, x2, x3] = point.coords();
            let _ = writeln!(out, "  {idx}: {} {} {}", sig(x1), sig(x2), sig(x3));
        }
    }
    let [n1, n2, n3] = report.nash.coords();
    let _ = writeln!(out, "nash: {} {} {}", sig(n1), sig(n2), sig(n3));
    if let Some(triangle) = &report.shapley {
        for (idx, vertex) in triangle.iter().enumerate() {
            let [v1, v2, v3] = vertex.coords();
            let _ = writeln!(out, "shapley {idx}: {} {} {}", sig(v1), sig(v2), sig(v3));
        }
    }
    out
}

#[derive(Serialize)]
struct AttractorJson<'a> {
    params: ParamsJson,
    report: &'a AttractorReport,
}

fn cmd_attractor(args: &AttractorArgs) -> Result<u8, Failure> {
    let g = game(&args.payoff, &args.rate, args.gamma_tol)?;
    let report = enumerate_attractor(&g).map_err(from_lib)?;
    let content = match args.format {
        Format::Text => attractor_text(&g, &report),
        Format::Json => to_json(&AttractorJson {
            params: ParamsJson::of(&g),
            report: &report,
        }),
        Format::Csv => {
            return Err(bad_input(
                "the attractor report has no csv form; use text or json",
            ))
        }
    };
    emit(args.out.as_deref(), &content)?;
    if report.boundary {
        eprintln!(
            "warning: parameters sit on a bifurcation boundary; the adjacent orbit counts \
             are equally valid"
        );
        return Ok(4);
    }
    Ok(0)
}

fn cmd_bifurcation(args: &BifurcationArgs) -> Result<u8, Failure> {
    let (a, b) = args.payoff.payoffs()?;
    if !(args.lambda_min > 0.0 && args.lambda_max < 1.0 && args.lambda_min <= args.lambda_max) {
        return Err(bad_input(format!(
            "need 0 < --lambda-min <= --lambda-max < 1, got [{}, {}]",
            args.lambda_min, args.lambda_max
        )));
    }
    if args.points == 0 {
        return Err(bad_input("--points must be at least 1"));
    }
    let g = GameParams::new(a, b, args.lambda_min).map_err(from_lib)?;
    let grid = lambda_grid(args.lambda_min, args.lambda_max, args.points);
    let scan = bifurcation_sweep(g.alpha(), &grid).map_err(from_lib)?;
    let csv = render_bifurcation_csv(&scan);
    match args.out.as_deref() {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| io_failure(path, e))?;
            println!("alpha={} points={}", sig(scan.alpha), grid.len());
            println!("wrote {}", path.display());
        }
        None => {
            println!("# alpha={} points={}", sig(scan.alpha), grid.len());
            print!("{csv}");
        }
    }
    Ok(0)
}

fn cmd_basins(args: &BasinsArgs) -> Result<u8, Failure> {
    let g = game(&args.payoff, &args.rate, args.gamma_tol)?;
    let raster = basin_raster(&g, args.resolution, args.iters, args.tol).map_err(from_lib)?;
    let ppm_path = PathBuf::from(format!("{}.ppm", args.out));
    let csv_path = PathBuf::from(format!("{}.csv", args.out));
    write_ppm(&raster, &ppm_path).map_err(from_lib)?;
    write_raster_csv(&raster, &csv_path).map_err(from_lib)?;
    let summary = raster.summary();
    let share = |cells: usize| 100.0 * cells as f64 / summary.total as f64;
    println!("params: {}", param_echo(&g));
    println!(
        "resolution={} cells={} iter_budget={} conv_tol={:e}",
        args.resolution, summary.total, args.iters, args.tol
    );
    for &(k, period, cells) in &summary.orbit_cells {
        println!(
            "orbit k={k} period={period}: {cells} cells ({:.2}%)",
            share(cells)
        );
    }
    println!(
        "unresolved: {} cells ({:.2}%)",
        summary.unresolved,
        share(summary.unresolved)
    );
    println!(
        "gamma: {} cells ({:.2}%)",
        summary.gamma,
        share(summary.gamma)
    );
    println!("wrote {} and {}", ppm_path.display(), csv_path.display());
    if raster.report.boundary {
        eprintln!(
            "warning: parameters sit on a bifurcation boundary; the adjacent orbit counts \
             are equally valid"
        );
        return Ok(4);
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let opts = VerifyOptions {
        samples_per_point: args.samples,
        seed: args.seed,
        bk_bias: args.inject_bk_offset,
        ..VerifyOptions::default()
    };
    let report = run_verify(&opts);
    let content = match args.format {
        Format::Text => report.to_text(),
        Format::Json => to_json(&report),
        Format::Csv => {
            return Err(bad_input(
                "the verification report has no csv form; use text or json",
            ))
        }
    };
    emit(args.out.as_deref(), &content)?;
    if report.passed {
        Ok(0)
    } else {
        if let Some(check) = report.first_failure() {
            eprintln!(
                "error: verification failed at check '{}': {}",
                check.name, check.detail
            );
        }
        Ok(1)
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Orbit(args) => cmd_orbit(args),
        Command::Attractor(args) => cmd_attractor(args),
        Command::Bifurcation(args) => cmd_bifurcation(args),
        Command::Basins(args) => cmd_basins(args),
        Command::Verify(args) => cmd_verify(args),
    };
    let code = match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    let _ = std::io::stdout().flush();
    std::process::exit(code.into());
}
