//! The `medsr` command line. Exit codes: 0 success, 1 usage or configuration
//! error, 2 data or format error, 3 numeric or model error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{emit_csv, emit_markdown, load_run, run_bench, write_outputs, BenchConfig};
use crate::degrade::{degrade, DegradationSpec, Profile};
use crate::error::{Error, Result};
use crate::imagecore::{load_msrf, load_pgm, save_msrf, save_pgm, Image};
use crate::metrics::{evaluate, MetricKind};
use crate::models::{load_weights, save_weights, srcnn_train, upscale, ModelKind, SrcnnConfig, TrainOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "medsr", version, about = "Paired degradation, super-resolution and image quality benchmarking")]
pub struct Cli {
    /// Seed for every random choice; echoed on stderr.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "MEDSR_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Make the LR counterpart of one image.
    Degrade(DegradeArgs),
    /// Super-resolve one image.
    Upscale(UpscaleArgs),
    /// Score a test image against a reference.
    Metric(MetricArgs),
    /// Train SRCNN on a pairs directory written by `degrade`/`bench`.
    TrainSrcnn(TrainArgs),
    /// Run a benchmark grid from a JSON config.
    Bench(BenchArgs),
    /// Re-render a saved results.json.
    Report(ReportArgs),
}

fn parse_scale(s: &str) -> std::result::Result<u32, String> {
    match s.parse::<u32>() {
        Ok(v @ 2..=4) => Ok(v),
        _ => Err(format!("{s:?} is not one of 2, 3, 4")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Classical,
    HighOrder,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Classical => Profile::Classical,
            ProfileArg::HighOrder => Profile::HighOrder,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Bicubic,
    Srcnn,
    Swinlite,
    Rrdblite,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Bicubic => ModelKind::Bicubic,
            ModelArg::Srcnn => ModelKind::Srcnn,
            ModelArg::Swinlite => ModelKind::Swinlite,
            ModelArg::Rrdblite => ModelKind::Rrdblite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Md,
    Csv,
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_scale)]
    pub scale: u32,
    #[arg(long, value_enum, default_value = "classical")]
    pub profile: ProfileArg,
    /// Classical profile: Gaussian blur before downscaling, in HR pixels.
    #[arg(long, default_value_t = 0.0)]
    pub blur_sigma: f64,
    /// Classical profile: Gaussian noise sigma on the 0-255 scale.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Classical profile: block-DCT compression quality 1-100.
    #[arg(long)]
    pub quality: Option<u8>,
}

#[derive(Debug, Args)]
pub struct UpscaleArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// MSRW weights (not used by bicubic).
    #[arg(long, value_name = "PATH")]
    pub weights: Option<PathBuf>,
    #[arg(long, value_parser = parse_scale)]
    pub scale: u32,
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub test: PathBuf,
    /// Comma-separated metric ids, or `all`.
    #[arg(long, default_value = "all", value_name = "LIST")]
    pub metrics: String,
    /// Print a JSON object instead of text lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory holding `hr/` and `lr/`.
    #[arg(long, value_name = "DIR")]
    pub pairs: PathBuf,
    #[arg(long, value_parser = parse_scale)]
    pub scale: u32,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    /// Optional `iter,loss` CSV.
    #[arg(long, value_name = "PATH")]
    pub loss_log: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "FILE")]
    pub run: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    pub format: ReportFormat,
}

/// Maps a library error onto the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => EXIT_USAGE,
        Error::Model(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Reads `.msrf` float images or PGM (anything else).
pub fn read_image(path: &Path) -> Result<Image> {
    if has_ext(path, "msrf") {
        load_msrf(path)
    } else {
        load_pgm(path)
    }
}

pub fn write_image(img: &Image, path: &Path) -> Result<()> {
    if has_ext(path, "msrf") {
        save_msrf(img, path)
    } else {
        save_pgm(img, path)
    }
}

fn has_ext(path: &Path, ext: &str) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Output goes to the given writers.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    init_threads(cli.threads);
    match execute(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn write_out(w: &mut dyn Write, text: &str) -> Result<()> {
    w.write_all(text.as_bytes()).map_err(Error::io("<stdout>"))
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let seed = match &cli.command {
        Command::Bench(a) => {
            let cfg = BenchConfig::load(&a.config)?;
            cli.seed.unwrap_or(cfg.seed)
        }
        _ => cli.seed.unwrap_or(0),
    };
    let _ = writeln!(err, "seed: {seed}");

    match cli.command {
        Command::Degrade(a) => {
            let spec = match a.profile.into() {
                Profile::Classical => DegradationSpec {
                    blur_sigma: a.blur_sigma,
                    noise_sigma: a.noise_sigma,
                    compression_quality: a.quality,
                    ..DegradationSpec::classical(a.scale)
                }
                .with_seed(seed),
                Profile::HighOrder => DegradationSpec::high_order(a.scale, seed),
            };
            let img = read_image(&a.input)?;
            let lr = degrade(&img, &spec)?;
            write_image(&lr, &a.out)?;
            let _ = writeln!(err, "{}x{} -> {}x{}", img.width(), img.height(), lr.width(), lr.height());
        }
        Command::Upscale(a) => {
            let kind: ModelKind = a.model.into();
            let weights = a.weights.as_deref().map(load_weights).transpose()?;
            if kind.needs_weights() && weights.is_none() {
                return Err(Error::Config(format!("--weights is required for --model {kind}")));
            }
            let lr = read_image(&a.input)?;
            let sr = upscale(&lr, kind, weights.as_ref(), a.scale)?;
            write_image(&sr, &a.out)?;
            let _ = writeln!(err, "{}x{} -> {}x{}", lr.width(), lr.height(), sr.width(), sr.height());
        }
        Command::Metric(a) => {
            let kinds = MetricKind::parse_list(&a.metrics)?;
            let reference = read_image(&a.reference)?;
            let test = read_image(&a.test)?;
            let values = evaluate(&reference, &test, &kinds)?;
            if a.json {
                let map: serde_json::Map<String, serde_json::Value> =
                    values.iter().map(|v| (v.name().to_string(), serde_json::Value::from(v.value))).collect();
                write_out(out, &(serde_json::to_string_pretty(&map)? + "\n"))?;
            } else {
                for v in &values {
                    write_out(out, &format!("{:<14}{:.6}\n", v.name(), v.value))?;
                }
            }
        }
        Command::TrainSrcnn(a) => {
            let opts = TrainOptions {
                iters: a.iters,
                lr: a.lr,
                momentum: a.momentum,
                batch: a.batch,
                seed,
                loss_log: a.loss_log,
                ..TrainOptions::default()
            };
            let outcome = srcnn_train(&a.pairs, &SrcnnConfig::new(a.scale), &opts)?;
            save_weights(&outcome.weights, &a.out)?;
            if let (Some(first), Some(last)) = (outcome.losses.first(), outcome.losses.last()) {
                let _ = writeln!(err, "loss {first:.6} -> {last:.6} over {} iterations", outcome.losses.len());
            }
        }
        Command::Bench(a) => {
            let mut cfg = BenchConfig::load(&a.config)?;
            cfg.seed = seed;
            let run = run_bench(&cfg)?;
            let files = write_outputs(&run, &cfg.output_path())?;
            for p in [&files.csv, &files.json, &files.markdown, &files.manifest] {
                write_out(out, &format!("{}\n", p.display()))?;
            }
        }
        Command::Report(a) => {
            let run = load_run(&a.run)?;
            let text = match a.format {
                ReportFormat::Md => emit_markdown(&run),
                ReportFormat::Csv => emit_csv(&run),
            };
            write_out(out, &text)?;
        }
    }
    Ok(())
}
