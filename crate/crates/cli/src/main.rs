use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strokeforge::bench::{results_csv, run_suite, suite_by_name, timings_csv, write_artifacts};
use strokeforge::energy::EnergyParams;
use strokeforge::error::ErrorKind;
use strokeforge::image_io::{load_gray, load_mask, save_mask, StretchRange};
use strokeforge::optimizer::{DescentConfig, StepRule};
use strokeforge::pipeline::{overlay_masks, restore, RestoreConfig, SamplePointSet};
use strokeforge::profile::BandModel;

#[derive(Parser)]
#[command(name = "strokeforge", version, about = "Stroke restoration with a radius-carrying cubic B-spline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one stroke through the given points and write spline, mask and trace.
    Restore(RestoreArgs),
    /// Union of binary masks.
    Overlay {
        #[arg(required = true)]
        masks: Vec<PathBuf>,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Energy profile of a straight band of half-width R, as CSV.
    Profile(ProfileArgs),
    /// Synthetic benchmark suites.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// HTTP service; STROKEFORGE_ADDR and STROKEFORGE_DATA_DIR are the defaults for its flags.
    Serve {
        #[arg(long)]
        addr: Option<String>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RestoreArgs {
    #[arg(long)]
    image: PathBuf,
    /// Treat bright pixels as ink.
    #[arg(long)]
    invert: bool,
    /// Histogram-stretch percentiles `lo,hi`.
    #[arg(long, value_parser = parse_stretch, default_value = "1,99", conflicts_with = "no_stretch")]
    stretch: StretchRange,
    #[arg(long)]
    no_stretch: bool,
    #[arg(long)]
    points: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    c1: f64,
    #[arg(long, default_value_t = 2000.0)]
    c2: f64,
    #[arg(long, default_value_t = 50.0)]
    c3: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.125)]
    eps: f64,
    #[arg(long, default_value_t = 3.0)]
    rmin: f64,
    #[arg(long, default_value_t = 50.0)]
    rmax: f64,
    #[arg(long, default_value_t = 14)]
    iters: usize,
    #[arg(long, default_value_t = 2.0)]
    step: f64,
    #[arg(long, default_value_t = 0.5)]
    decay: f64,
    #[arg(long, default_value_t = 0.5)]
    fd_h: f64,
    /// `sign` moves each coefficient by its step size; `gradient` scales by the derivative.
    #[arg(long, value_parser = parse_step_rule, default_value = "sign")]
    step_rule: StepRule,
    #[arg(long)]
    out_spline: Option<PathBuf>,
    #[arg(long)]
    out_mask: Option<PathBuf>,
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// True band half-width.
    #[arg(long = "R")]
    r_true: f64,
    #[arg(long)]
    c1: f64,
    #[arg(long)]
    c2: f64,
    #[arg(long)]
    alpha: f64,
    /// Smallest radius sampled; defaults to R/10.
    #[arg(long)]
    r_lo: Option<f64>,
    /// Largest radius sampled; defaults to 5R.
    #[arg(long)]
    r_hi: Option<f64>,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run a suite and write per-case scores.
    Run {
        /// `default` or `recovery`.
        #[arg(long, default_value = "default")]
        suite: String,
        /// Per-case scores CSV.
        #[arg(long)]
        out: PathBuf,
        /// Per-case runtimes CSV.
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Directory for inputs, masks, splines and traces of every case.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
}

fn parse_stretch(s: &str) -> Result<StretchRange, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
    StretchRange::new(lo, hi).map_err(|e| e.to_string())
}

fn parse_step_rule(s: &str) -> Result<StepRule, String> {
    match s {
        "sign" => Ok(StepRule::Sign),
        "gradient" => Ok(StepRule::Gradient),
        _ => Err(format!("unknown step rule {s:?}, expected sign or gradient")),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<strokeforge::Error> for Failure {
    fn from(e: strokeforge::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => 2,
            ErrorKind::Numeric => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn run_restore(a: RestoreArgs) -> Result<(), Failure> {
    let mut img = load_gray(&a.image, a.invert)?;
    if !a.no_stretch {
        img = img.histogram_stretch(a.stretch);
    }
    let text = std::fs::read_to_string(&a.points).map_err(|e| input_error(format!("{}: {e}", a.points.display())))?;
    let points = SamplePointSet::from_json(&text)?;
    let energy = EnergyParams {
        c1: a.c1,
        c2: a.c2,
        c3: a.c3,
        alpha: a.alpha,
        epsilon: a.eps,
        ..EnergyParams::default()
    };
    let descent = DescentConfig {
        initial_step: a.step,
        decay: a.decay,
        fd_step: a.fd_h,
        max_iterations: a.iters,
        r_min: a.rmin,
        r_max: a.rmax,
        step_rule: a.step_rule,
        ..DescentConfig::default()
    };
    let result = restore(&img, &points, &RestoreConfig::new(energy, descent))?;
    if let Some(path) = &a.out_spline {
        write_file(path, result.curve.to_json()?)?;
    }
    if let Some(path) = &a.out_mask {
        save_mask(&result.mask, path)?;
    }
    if let Some(path) = &a.out_trace {
        write_file(path, result.trace_csv()?)?;
    }
    let (first, last) = (&result.trace[0], &result.trace[result.trace.len() - 1]);
    eprintln!(
        "{} iterations, f_total {:.6e} -> {:.6e}, {} mask pixels",
        result.iterations(),
        first.f_total,
        last.f_total,
        result.mask.count()
    );
    Ok(())
}

fn run_overlay(masks: &[PathBuf], out: &Path) -> Result<(), Failure> {
    let loaded = masks.iter().map(load_mask).collect::<Result<Vec<_>, _>>()?;
    save_mask(&overlay_masks(&loaded)?, out)?;
    Ok(())
}

fn run_profile(a: ProfileArgs) -> Result<(), Failure> {
    let model = BandModel::new(a.r_true, a.c1, a.c2, a.alpha)?;
    let lo = a.r_lo.unwrap_or(a.r_true / 10.0);
    let hi = a.r_hi.unwrap_or(a.r_true * 5.0);
    let csv = model.csv(lo, hi, a.samples)?;
    match &a.out {
        Some(path) => write_file(path, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run_bench(suite: &str, out: &Path, timings: Option<&Path>, artifacts: Option<&Path>) -> Result<(), Failure> {
    let cases = suite_by_name(suite).ok_or_else(|| input_error(format!("unknown suite {suite:?}, expected default or recovery")))?;
    let outcomes = run_suite(&cases, &RestoreConfig::default())?;
    write_file(out, results_csv(&outcomes)?)?;
    if let Some(path) = timings {
        write_file(path, timings_csv(&outcomes)?)?;
    }
    if let Some(dir) = artifacts {
        write_artifacts(&outcomes, dir)?;
    }
    for o in &outcomes {
        eprintln!(
            "{:<48} iou {:.3}  hausdorff {:.2}  {:.2}s",
            o.case.name, o.score.iou, o.score.hausdorff, o.runtime_s
        );
    }
    Ok(())
}

fn run_serve(addr: Option<String>, data_dir: Option<PathBuf>) -> Result<(), Failure> {
    let mut settings = strokeforge_service::Settings::from_env().map_err(input_error)?;
    if let Some(addr) = addr {
        settings.addr = addr.parse().map_err(|e| input_error(format!("--addr {addr:?}: {e}")))?;
    }
    if data_dir.is_some() {
        settings.data_dir = data_dir;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| input_error(e.to_string()))?;
    eprintln!("listening on http://{}", settings.addr);
    runtime
        .block_on(strokeforge_service::serve(settings))
        .map_err(|e| input_error(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Restore(a) => run_restore(a),
        Command::Overlay { masks, out } => run_overlay(&masks, &out),
        Command::Profile(a) => run_profile(a),
        Command::Bench {
            command: BenchCommand::Run {
                suite,
                out,
                timings,
                artifacts,
            },
        } => run_bench(&suite, &out, timings.as_deref(), artifacts.as_deref()),
        Command::Serve { addr, data_dir } => run_serve(addr, data_dir),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
