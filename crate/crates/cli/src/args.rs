use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsr_register::estimate::DEFAULT_RANSAC_TOL;
use lsr_register::eval::BUNDLED_SCENE_SEED;
use lsr_register::features::DEFAULT_D_RATIO;
use lsr_register::lsr::DEFAULT_TAU;
use lsr_register::pipeline::{DEFAULT_EPSILON, DEFAULT_FILTER, DEFAULT_MAX_LEVELS, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(
    name = "lsr-register",
    version,
    about = "Line-support-region image registration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register a sensed image onto a reference image.
    Register(RegisterArgs),
    /// Segment one image into line-support regions.
    Segment(SegmentArgs),
    /// Score outlier filters on correspondence fixtures.
    Eval(EvalArgs),
    /// Write the bundled synthetic correspondence fixtures.
    MakeFixtures(MakeFixturesArgs),
    /// Render a synthetic reference/sensed image pair with its ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Reference image.
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: PathBuf,
    /// Image to register onto the reference.
    #[arg(long, value_name = "PATH")]
    pub sensed: PathBuf,
    /// Acceptance threshold on the scaled RMSE, in full-resolution pixels.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Angle tolerance for region growing, in degrees.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Nearest/second-nearest descriptor distance ratio.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_D_RATIO)]
    pub dratio: f64,
    /// Number of pyramid levels tried.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_LEVELS)]
    pub max_levels: u32,
    /// Seed for randomized filters.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Outlier filter.
    #[arg(long, value_name = "NAME", default_value = DEFAULT_FILTER)]
    pub filter: String,
    /// TOML config, or a manifest.json from an earlier run. Flags override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input image.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Angle tolerance for region growing, in degrees.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Pyramid level to segment at.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub level: u32,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of NAME.csv / NAME.truth.json pairs.
    #[arg(long, value_name = "DIR")]
    pub fixtures: PathBuf,
    /// Filters to compare.
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        default_value = "gor,ransac"
    )]
    pub methods: Vec<String>,
    /// Seeds averaged per fixture and method.
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub seeds: u64,
    /// Inlier tolerance of the RANSAC baseline, in pixels.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_RANSAC_TOL)]
    pub ransac_tol: f64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MakeFixturesArgs {
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Protocol {
    /// 120 degrees clockwise and scale 0.8 about the centre.
    RotationScale,
    /// Shear 0.1 both ways about the centre.
    Shear,
    Identity,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = Protocol::RotationScale)]
    pub protocol: Protocol,
    /// Side length of the square images.
    #[arg(long, value_name = "N", default_value_t = 512)]
    pub size: usize,
    /// Scene seed.
    #[arg(long, value_name = "N", default_value_t = BUNDLED_SCENE_SEED)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}
