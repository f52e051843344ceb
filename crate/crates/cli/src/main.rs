//! `scatter-dsm`: dataset generation, forward solves, direct sampling,
//! augmentation, evaluation and image export over SCAT1 containers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod pgm;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scatter_dsm::augment::AugmentOp;
use scatter_dsm::dataset::{Family, Split};
use scatter_dsm::forward::ExperimentConfig;
use scatter_dsm::metrics::DEFAULT_SSIM_RANGE;

#[derive(Parser, Debug)]
#[command(
    name = "scatter-dsm",
    version,
    about = "2D inverse medium scattering toolkit"
)]
struct Cli {
    /// Worker threads (0 uses every core). Results do not depend on it.
    #[arg(long, global = true, env = "SCATTER_DSM_THREADS", default_value_t = 0)]
    threads: usize,

    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// JSON file holding an experiment configuration (k, n_inc, n_rec, r_meas, aperture).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a seeded dataset container.
    Gen(GenArgs),
    /// Solve the forward problem for every scene of a container or a built-in scene.
    Solve(SolveArgs),
    /// Compute index tensors from stored fields.
    Dsm(DsmArgs),
    /// Apply a symmetry to every (scene, tensor) pair.
    Augment(AugmentArgs),
    /// Score reconstructions against ground truth as JSON lines.
    Eval(EvalArgs),
    /// Write one raster of a container as a binary PGM image.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    n_train: u64,
    #[arg(long, default_value_t = 0)]
    n_val: u64,
    #[arg(long, default_value_t = 0)]
    n_test: u64,
    /// Number of incidences (overrides the configuration).
    #[arg(long)]
    ni: Option<usize>,
    /// Noise level of the stored noisy fields.
    #[arg(long, default_value_t = scatter_dsm::dataset::DEFAULT_TRAINING_NOISE)]
    delta: f64,
    /// Grid side.
    #[arg(long, default_value_t = scatter_dsm::scene::DEFAULT_RESOLUTION)]
    n: usize,
    /// IDX image file for the digit family.
    #[arg(long)]
    idx: Option<PathBuf>,
    /// Sixteen receivers on the upper half circle.
    #[arg(long)]
    limited_aperture: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Container whose permittivity grids are solved.
    #[arg(
        long = "in",
        conflicts_with = "scene",
        required_unless_present = "scene"
    )]
    input: Option<PathBuf>,
    /// Built-in scene instead of an input container.
    #[arg(long, value_enum)]
    scene: Option<SceneArg>,
    #[arg(long)]
    ni: Option<usize>,
    /// Also store noisy copies of the fields at this level.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    limited_aperture: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DsmArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Add noise at this level to the clean fields before sampling.
    #[arg(long)]
    delta: Option<f64>,
    /// Fields to sample when no noise level is given.
    #[arg(long, value_enum)]
    fields: Option<FieldsArg>,
    /// Keep only samples of one split.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AugmentArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    op: OpArg,
    /// Rotation step for `--op rotate` (angle `2 pi j / N_i`).
    #[arg(long, allow_hyphen_values = true)]
    j: Option<i64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Reconstructions: one-channel tensors holding permittivity.
    #[arg(long)]
    recon: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Noise level written to the report (defaults to the one recorded in the reconstruction container).
    #[arg(long)]
    delta: Option<f64>,
    /// Dynamic range of the SSIM constants.
    #[arg(long = "range", default_value_t = DEFAULT_SSIM_RANGE)]
    range: f64,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Sample id, decimal or `0x` hexadecimal (defaults to the first sample).
    #[arg(long, value_parser = parse_id)]
    sample: Option<u64>,
    #[arg(long, value_enum, default_value_t = ExportWhat::Eps)]
    what: ExportWhat,
    /// Tensor channel.
    #[arg(long, default_value_t = 0)]
    channel: usize,
    /// Value mapped to black (defaults to the image minimum).
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    /// Value mapped to white (defaults to the image maximum).
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Circles,
    CirclesHighContrast,
    Digits,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Circles => Family::Circles,
            FamilyArg::CirclesHighContrast => Family::CirclesHighContrast,
            FamilyArg::Digits => Family::Digits,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SceneArg {
    Austria,
    AustriaMnist1,
    AustriaMnist2,
    Letters,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FieldsArg {
    Clean,
    Noisy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    RotatePi,
    MirrorD1,
    Rotate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportWhat {
    Eps,
    Tensor,
}

fn parse_id(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad sample id {s:?}: {e}"))
}

fn load_config(path: Option<&PathBuf>) -> Result<Option<ExperimentConfig>> {
    let Some(path) = path else { return Ok(None) };
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    cfg.validate()?;
    Ok(Some(cfg))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("building the worker pool")?;
    let config = load_config(cli.config.as_ref())?;
    pool.install(|| run(cli.command, cli.seed, config))
}

fn run(command: Command, seed: u64, config: Option<ExperimentConfig>) -> Result<()> {
    match command {
        Command::Gen(a) => commands::gen(a, seed, config),
        Command::Solve(a) => commands::solve(a, seed, config),
        Command::Dsm(a) => commands::dsm(a),
        Command::Augment(a) => {
            let op = match (a.op, a.j) {
                (OpArg::RotatePi, _) => AugmentOp::RotatePi,
                (OpArg::MirrorD1, _) => AugmentOp::MirrorD1,
                (OpArg::Rotate, Some(j)) => AugmentOp::Rotate { j },
                (OpArg::Rotate, None) => anyhow::bail!("--op rotate needs --j"),
            };
            commands::augment(&a.input, &a.out, op)
        }
        Command::Eval(a) => commands::eval(a),
        Command::Export(a) => commands::export(a),
    }
}
