//! Command-line front end: noise fixtures, denoising runs, metrics, and
//! per-iteration curve extraction.
//!
//! Exit codes: 0 success, 2 usage/parameter error, 3 I/O error, 4 numerical
//! failure (non-finite data detected).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tvstokes::error::Error;
use tvstokes::imgio::{read_image, write_image};
use tvstokes::iterreg::{
    osher_iterate, richardson_both, richardson_step1, richardson_step2, OuterConfig, StopRule,
};
use tvstokes::metrics::{add_gaussian_noise, noise_level, psnr, MetricConfig};
use tvstokes::model::{tv_stokes_denoise, TvsParams};
use tvstokes::poisson::PoissonSolver;
use tvstokes::report::{IterRecord, Phase, SolveReport};
use tvstokes::rof::{rof_denoise, InnerSolveConfig};
use tvstokes::ScalarField;

#[derive(Parser)]
#[command(
    name = "tvstokes",
    version,
    about = "TV-Stokes image denoising with iterative regularization",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add seeded Gaussian noise to a grayscale image.
    AddNoise(AddNoiseArgs),
    /// Denoise an image; writes the restored image, a rescaled residual
    /// image with its scale sidecar, and a per-iteration CSV report.
    Denoise(DenoiseArgs),
    /// Print PSNR and noise level between an image and a reference.
    Metrics(MetricsArgs),
    /// Run a denoiser and write only the per-iteration CSV curves.
    Curves(CurvesArgs),
}

#[derive(Args)]
struct AddNoiseArgs {
    /// Clean input image (PGM or PNG).
    #[arg(long)]
    input: PathBuf,
    /// Noisy output image (.pgm or .png).
    #[arg(long)]
    output: PathBuf,
    /// Gaussian noise level σ.
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    /// Noise stream seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Clamp the noisy image to [0, peak].
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    clip: bool,
    /// Peak intensity value.
    #[arg(long, default_value_t = 255.0)]
    peak: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Single ROF solve (needs --eta).
    Rof,
    /// Single two-step TV-Stokes pass.
    Tvstokes,
    /// Iterative regularization of ROF (needs --eta).
    Osher,
    /// Iterative regularization of the tangent-field step.
    Tvs1,
    /// Iterative regularization of the image step.
    Tvs2,
    /// Iterative regularization of both steps.
    Tvs12,
}

#[derive(Args)]
struct SolveArgs {
    /// Noisy input image (PGM or PNG).
    #[arg(long)]
    input: PathBuf,
    /// Which solver to run.
    #[arg(long, value_enum, default_value_t = Algorithm::Tvs2)]
    algorithm: Algorithm,
    /// Tangent-step schedule constant (> 1).
    #[arg(long, default_value_t = 8.0)]
    beta1: f64,
    /// Image-step schedule constant (> 1).
    #[arg(long, default_value_t = 2.5)]
    beta2: f64,
    /// Orientation-matching weight in [0, 1].
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    /// Fidelity parameter: required by rof and osher, optional η₂ override
    /// for tvstokes, rejected for the scheduled algorithms (tvs1/tvs2/tvs12).
    #[arg(long)]
    eta: Option<f64>,
    /// Outer iteration count.
    #[arg(long, default_value_t = 12)]
    iters_outer: usize,
    /// Phase-1 outer count for tvs12 (defaults to --iters-outer).
    #[arg(long)]
    iters_outer1: Option<usize>,
    /// Inner dual iteration cap.
    #[arg(long, default_value_t = 2000)]
    iters_inner: usize,
    /// Inner stop tolerance on the max per-pixel dual change.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Normalization floor for τ⊥/|τ⊥| (default: 1e-8·(1 + max|τ|)).
    #[arg(long)]
    eps: Option<f64>,
    /// Peak intensity value for PSNR and image output.
    #[arg(long, default_value_t = 255.0)]
    peak: f64,
    /// Clean reference image; enables the ‖u-g‖ and PSNR columns.
    #[arg(long)]
    clean: Option<PathBuf>,
    /// Record wall-clock timings in the CSV (off keeps output byte-stable).
    #[arg(long, default_value_t = false)]
    timings: bool,
}

#[derive(Args)]
struct DenoiseArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Restored output image (.pgm or .png).
    #[arg(long)]
    output: PathBuf,
    /// Residual image path (default: <output>_residual.<ext>).
    #[arg(long)]
    residual_output: Option<PathBuf>,
    /// Report CSV path (default: <output>_report.csv).
    #[arg(long)]
    csv_output: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Where to write the per-iteration CSV.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Image under test.
    #[arg(long)]
    image: PathBuf,
    /// Reference (clean) image.
    #[arg(long)]
    reference: PathBuf,
    /// Peak intensity value.
    #[arg(long, default_value_t = 255.0)]
    peak: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::AddNoise(args) => run_add_noise(args),
        Command::Denoise(args) => run_denoise(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Curves(args) => run_curves(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => 2,
        Error::Io(_) | Error::Format(_) => 3,
        Error::NonFinite(_) => 4,
    }
}

fn run_add_noise(args: AddNoiseArgs) -> Result<(), Error> {
    let clean = read_image(&args.input)?;
    let noisy = add_gaussian_noise(&clean, args.sigma, args.seed, args.clip, args.peak)?;
    write_image(&args.output, &noisy, args.peak)
}

fn run_metrics(args: MetricsArgs) -> Result<(), Error> {
    let image = read_image(&args.image)?;
    let reference = read_image(&args.reference)?;
    let cfg = MetricConfig { peak: args.peak };
    println!("psnr_db={}", psnr(&image, &reference, &cfg)?);
    println!("noise_level={}", noise_level(&image, &reference)?);
    Ok(())
}

fn run_solve(args: &SolveArgs) -> Result<(ScalarField, SolveReport), Error> {
    let noisy = read_image(&args.input)?;
    let clean = args.clean.as_ref().map(read_image).transpose()?;
    if let Some(g) = &clean {
        if !g.same_shape(&noisy) {
            return Err(Error::DimensionMismatch {
                expected: noisy.shape(),
                found: g.shape(),
            });
        }
    }

    if matches!(args.algorithm, Algorithm::Rof | Algorithm::Osher) && args.eta.is_none() {
        return Err(Error::InvalidParameter(
            "--eta is required for --algorithm rof and osher".into(),
        ));
    }
    if matches!(args.algorithm, Algorithm::Tvs1 | Algorithm::Tvs2 | Algorithm::Tvs12)
        && args.eta.is_some()
    {
        return Err(Error::InvalidParameter(
            "--eta does not apply to tvs1/tvs2/tvs12; the fidelity comes from --beta1/--beta2"
                .into(),
        ));
    }

    let inner = InnerSolveConfig {
        step: 0.25,
        max_iters: args.iters_inner,
        rel_tol: args.tol,
    };
    let outer = OuterConfig {
        beta1: args.beta1,
        beta2: args.beta2,
        alpha: args.alpha,
        max_outer: args.iters_outer.max(args.iters_outer1.unwrap_or(0)),
        stop_rule: StopRule::FixedCount(args.iters_outer),
        phase1_stop: args.iters_outer1.map(StopRule::FixedCount),
        inner: inner.clone(),
        eps: args.eps,
        peak: args.peak,
    };
    let metric = MetricConfig { peak: args.peak };

    let (restored, report) = match args.algorithm {
        Algorithm::Rof => {
            let started = Instant::now();
            let eta = args.eta.unwrap();
            let (u, _) = rof_denoise(&noisy, eta, &inner)?;
            let report = single_row_report(&u, &noisy, clean.as_ref(), eta, &metric, started)?;
            (u, report)
        }
        Algorithm::Tvstokes => {
            let started = Instant::now();
            let params = TvsParams {
                eta1: None,
                eta2: args.eta,
                beta1: args.beta1,
                beta2: args.beta2,
                alpha: args.alpha,
                eps: args.eps,
                inner: inner.clone(),
            };
            let solver = PoissonSolver::new(noisy.height(), noisy.width());
            let (u, _tau) = tv_stokes_denoise(&noisy, &params, &solver)?;
            let eta2 = args
                .eta
                .unwrap_or_else(|| args.beta2 / (noisy.linf_norm() / 2.0));
            let report = single_row_report(&u, &noisy, clean.as_ref(), eta2, &metric, started)?;
            (u, report)
        }
        Algorithm::Osher => osher_iterate(&noisy, args.eta.unwrap(), &outer, clean.as_ref())?,
        Algorithm::Tvs1 => {
            let solver = PoissonSolver::new(noisy.height(), noisy.width());
            let (u, _tau, report) = richardson_step1(&noisy, &outer, &solver, clean.as_ref())?;
            (u, report)
        }
        Algorithm::Tvs2 => {
            let solver = PoissonSolver::new(noisy.height(), noisy.width());
            richardson_step2(&noisy, &outer, &solver, clean.as_ref())?
        }
        Algorithm::Tvs12 => {
            let solver = PoissonSolver::new(noisy.height(), noisy.width());
            richardson_both(&noisy, &outer, &solver, clean.as_ref())?
        }
    };

    if !restored.is_finite() {
        return Err(Error::NonFinite("restored image"));
    }
    Ok((restored, report))
}

/// One-row trace for the single-pass algorithms, using the same bookkeeping
/// as one Richardson iteration started from the data.
fn single_row_report(
    u: &ScalarField,
    f: &ScalarField,
    clean: Option<&ScalarField>,
    eta: f64,
    metric: &MetricConfig,
    started: Instant,
) -> Result<SolveReport, Error> {
    let dist = u.sub(f).l2_norm();
    let (u_minus_g, psnr_db) = match clean {
        None => (None, None),
        Some(g) => (Some(u.sub(g).l2_norm()), Some(psnr(u, g, metric)?)),
    };
    Ok(SolveReport {
        records: vec![IterRecord {
            k: 1,
            phase: Phase::First,
            eta,
            r_norm: dist,
            rex_norm: dist,
            u_minus_f: dist,
            u_minus_g,
            psnr: psnr_db,
            bregman: None,
            seconds: started.elapsed().as_secs_f64(),
        }],
    })
}

fn run_denoise(args: DenoiseArgs) -> Result<(), Error> {
    let (restored, report) = run_solve(&args.solve)?;
    let noisy = read_image(&args.solve.input)?;
    let peak = args.solve.peak;

    write_image(&args.output, &restored, peak)?;

    // residual f - u, affinely rescaled to [0, 255] for display
    let residual = noisy.sub(&restored);
    let (lo, hi) = residual
        .as_slice()
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 1.0 };
    let offset = -lo * scale;
    let display = residual.map(|v| v * scale + offset);
    let residual_path = args
        .residual_output
        .unwrap_or_else(|| derived_path(&args.output, "_residual", None));
    write_image(&residual_path, &display, 255.0)?;
    let sidecar = derived_path(&residual_path, "_scale", Some("txt"));
    std::fs::write(
        &sidecar,
        format!("display = scale * (f - u) + offset\nscale={scale}\noffset={offset}\n"),
    )?;

    let csv_path = args
        .csv_output
        .unwrap_or_else(|| derived_path(&args.output, "_report", Some("csv")));
    report.write_csv(&csv_path, args.solve.timings)?;

    print_final_metrics(&restored, &args.solve)?;
    Ok(())
}

fn run_curves(args: CurvesArgs) -> Result<(), Error> {
    let (restored, report) = run_solve(&args.solve)?;
    report.write_csv(&args.output, args.solve.timings)?;
    if args.solve.clean.is_some() {
        let best = report
            .argmin_u_minus_g(Phase::Second)
            .or_else(|| report.argmin_u_minus_g(Phase::First));
        if let Some(k) = best {
            println!("optimal_k={k}");
        }
    }
    print_final_metrics(&restored, &args.solve)?;
    Ok(())
}

fn print_final_metrics(restored: &ScalarField, args: &SolveArgs) -> Result<(), Error> {
    if let Some(clean_path) = &args.clean {
        let clean = read_image(clean_path)?;
        let cfg = MetricConfig { peak: args.peak };
        println!("psnr_db={}", psnr(restored, &clean, &cfg)?);
        println!("noise_level={}", noise_level(restored, &clean)?);
    }
    Ok(())
}

fn derived_path(base: &Path, suffix: &str, ext: Option<&str>) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = ext
        .map(str::to_owned)
        .or_else(|| base.extension().and_then(|e| e.to_str()).map(str::to_owned))
        .unwrap_or_else(|| "pgm".into());
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}
