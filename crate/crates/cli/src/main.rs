//! `rabiq` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid flags or configuration,
//! 3 numerical failure, 4 sweep with fewer than 99% of points solved.

mod args;
mod figures;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rabiq::analytic::{boundary_i_curve, boundary_ii_curve, lowfreq_curve};
use rabiq::eigensolve::{
    ground_state, solve_fixed, GroundSolution, SolverMethod, TruncationPolicy,
};
use rabiq::model::{derive_scales, validate, Coupling};
use rabiq::observables::compute_observables;
use rabiq::report::{
    overlay_curves, render_heatmap_svg, write_boundary_csv, write_csv, write_solution_json,
    HeatmapStyle,
};
use rabiq::sweep::{run_sweep, FixedParams, PhaseDiagram, SvgRequest, SweepSpec};
use rabiq::wavefunction::{
    classify_branch, evaluate_default, evaluate_wavefunction, write_wavefunction_csv, WaveGrid,
};
use rabiq::ModelParams;

use args::{AxisArg, GridRange, SvgArg};

/// Smallest solved fraction for which a sweep still exits 0.
const MIN_SUCCESS_FRACTION: f64 = 0.99;

#[derive(Parser)]
#[command(
    name = "rabiq",
    version,
    about = "Quantum Rabi model with one- and two-photon coupling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state and observables at one parameter point, as JSON.
    Solve(SolveArgs),
    /// Parameter-grid sweep to CSV, with optional SVG heatmaps.
    Sweep(SweepArgs),
    /// Closed-form transition boundary as a curve CSV.
    Boundary(BoundaryArgs),
    /// Position-space spin components of the ground state as CSV.
    Wavefunction(WaveArgs),
    /// Branch classification of the ground-state density as JSON.
    Classify(WaveArgs),
    /// Rerun a pinned figure configuration.
    Reproduce(ReproduceArgs),
}

/// Couplings take `<float>`, `<float>gs` or `<float>gt`.
#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long = "Omega", default_value_t = 1.0, allow_hyphen_values = true)]
    big_omega: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    g1: Coupling,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    g2: Coupling,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    chi: f64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        let (w, big) = (self.omega, self.big_omega);
        ModelParams::new(
            w,
            big,
            self.g1.resolve(w, big),
            self.g2.resolve(w, big),
            self.chi,
        )
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Fixed Fock cutoff instead of adaptive truncation.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Include the coefficient vector in the JSON document.
    #[arg(long)]
    dump_coeffs: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep specification.
    #[arg(long, conflicts_with_all = ["axis1", "axis2", "omega"])]
    config: Option<PathBuf>,
    /// Inline axis, `NAME=a:b:n[:gs|gt][:log]`.
    #[arg(long, allow_hyphen_values = true)]
    axis1: Option<AxisArg>,
    #[arg(long, allow_hyphen_values = true)]
    axis2: Option<AxisArg>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long = "Omega", default_value_t = 1.0)]
    big_omega: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    g1: Coupling,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    g2: Coupling,
    #[arg(long, default_value_t = 0.0)]
    chi: f64,
    #[arg(long, env = "RABIQ_JOBS")]
    jobs: Option<usize>,
    /// CSV destination; standard output when neither this nor the config names one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Heatmap panel, `FIELD=FILE`; repeatable.
    #[arg(long)]
    svg: Vec<SvgArg>,
    /// Analytic curve drawn on every `--svg` panel; repeatable.
    #[arg(long, value_parser = ["lowfreq", "I", "II"])]
    overlay: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "lowfreq")]
    LowFreq,
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    Ii,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long)]
    kind: KindArg,
    #[arg(long)]
    omega: f64,
    #[arg(long = "Omega", default_value_t = 1.0)]
    big_omega: f64,
    #[arg(long, default_value_t = 0.0)]
    chi: f64,
    /// `g2~/g_t` values for lowfreq and I, `g1/g_s` values for II.
    #[arg(long, allow_hyphen_values = true)]
    range: GridRange,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WaveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Position grid `a:b:n`; defaults to a range covering both wells.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridRange>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    figure: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, env = "RABIQ_JOBS")]
    jobs: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Usage(String),
    Numerics(String),
    Incomplete(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerics(_) => 3,
            Failure::Incomplete(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Numerics(m) | Failure::Incomplete(m) => m,
        }
    }
}

impl From<rabiq::Error> for Failure {
    fn from(e: rabiq::Error) -> Self {
        match e {
            rabiq::Error::Io(_) | rabiq::Error::Csv(_) | rabiq::Error::Json(_) => {
                Failure::Io(e.to_string())
            }
            e if e.is_validation() => Failure::Usage(e.to_string()),
            e => Failure::Numerics(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// File when given, standard output otherwise.
fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn solve_model(p: &ModelParams, n_max: Option<usize>) -> CliResult<GroundSolution> {
    validate(p)?;
    Ok(match n_max {
        Some(n) => solve_fixed(p, n, SolverMethod::Auto)?,
        None => ground_state(p, &TruncationPolicy::for_params(p))?,
    })
}

fn cmd_solve(a: &SolveArgs) -> CliResult {
    let p = a.model.params();
    let sol = solve_model(&p, a.n_max)?;
    let obs = compute_observables(&sol, &p)?;
    let mut out = sink(a.json_out.as_deref())?;
    write_solution_json(&sol, &obs, a.dump_coeffs, &mut out)?;
    out.flush()?;
    Ok(())
}

fn sweep_spec(a: &SweepArgs) -> CliResult<SweepSpec> {
    let mut spec = match &a.config {
        Some(path) => SweepSpec::from_file(path).map_err(|e| match e {
            rabiq::Error::Io(io) => Failure::Usage(format!("{}: {io}", path.display())),
            e => e.into(),
        })?,
        None => {
            let axis1 = a
                .axis1
                .ok_or_else(|| Failure::Usage("either --config or --axis1 is required".into()))?
                .0;
            let omega = a
                .omega
                .ok_or_else(|| Failure::Usage("--omega is required without --config".into()))?;
            let mut fixed = FixedParams::new(omega, a.big_omega, a.chi);
            fixed.g1 = a.g1;
            fixed.g2 = a.g2;
            let spec = SweepSpec::new(axis1, a.axis2.map(|x| x.0), fixed);
            spec.validate()?;
            spec
        }
    };
    if let Some(jobs) = a.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        spec.jobs = jobs;
    }
    if let Some(out) = &a.out {
        spec.output.csv = Some(out.display().to_string());
    }
    for s in &a.svg {
        spec.output.svg.push(SvgRequest {
            field: s.field.clone(),
            path: s.path.clone(),
            overlays: a.overlay.clone(),
        });
    }
    Ok(spec)
}

/// Runs a validated spec and writes every requested output.
fn execute_sweep(spec: &SweepSpec, base_dir: Option<&Path>) -> CliResult<PhaseDiagram> {
    let place = |p: &str| match base_dir {
        Some(d) => d.join(p),
        None => PathBuf::from(p),
    };
    let d = run_sweep(spec)?;
    let mut out = sink(spec.output.csv.as_deref().map(place).as_deref())?;
    write_csv(&d, &mut out)?;
    out.flush()?;
    for req in &spec.output.svg {
        let mut style = HeatmapStyle::for_field(&req.field);
        style.overlay = overlay_curves(&d, &req.overlays)?;
        let svg = render_heatmap_svg(&d, &req.field, &style)?;
        let mut f = create(&place(&req.path))?;
        f.write_all(svg.as_bytes())?;
        f.flush()?;
    }
    let failed = d.rows.iter().filter(|r| r.outcome.is_err()).count();
    eprintln!("sweep: {} points, {failed} failed", d.rows.len());
    Ok(d)
}

fn cmd_sweep(a: &SweepArgs) -> CliResult {
    let spec = sweep_spec(a)?;
    let fraction = execute_sweep(&spec, None)?.success_fraction();
    if fraction < MIN_SUCCESS_FRACTION {
        return Err(Failure::Incomplete(format!(
            "only {:.1}% of grid points solved",
            100.0 * fraction
        )));
    }
    Ok(())
}

fn cmd_boundary(a: &BoundaryArgs) -> CliResult {
    let p = ModelParams::new(a.omega, a.big_omega, 0.0, 0.0, a.chi);
    validate(&p)?;
    let values = a.range.values();
    let curve = match a.kind {
        KindArg::LowFreq => lowfreq_curve(&p, &values)?,
        KindArg::I => boundary_i_curve(&p, &values)?,
        KindArg::Ii => boundary_ii_curve(&p, &values)?,
    };
    let mut out = sink(a.out.as_deref())?;
    write_boundary_csv(&[curve], &mut out)?;
    out.flush()?;
    Ok(())
}

fn wave_grid(a: &WaveArgs) -> CliResult<(WaveGrid, ModelParams)> {
    let p = a.model.params();
    let sol = solve_model(&p, None)?;
    let scales = derive_scales(&p)?;
    let grid = match a.grid {
        Some(g) => evaluate_wavefunction(&sol, g.min, g.max, g.n)?,
        None => evaluate_default(&sol, &scales, rabiq::sweep::DEFAULT_WAVE_POINTS)?,
    };
    Ok((grid, p))
}

fn cmd_wavefunction(a: &WaveArgs) -> CliResult {
    let (grid, _) = wave_grid(a)?;
    let mut out = sink(a.out.as_deref())?;
    write_wavefunction_csv(&grid, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_classify(a: &WaveArgs) -> CliResult {
    let (grid, p) = wave_grid(a)?;
    let class = classify_branch(&grid, &derive_scales(&p)?);
    let text = serde_json::to_string_pretty(&class).map_err(rabiq::Error::from)?;
    let mut out = sink(a.out.as_deref())?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Boundary(a) => cmd_boundary(a),
        Command::Wavefunction(a) => cmd_wavefunction(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Reproduce(a) => figures::reproduce(&a.figure, &a.out_dir, a.jobs),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rabiq: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
