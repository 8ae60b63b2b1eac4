use std::path::PathBuf;

use artipose::forest::EnergyMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "artipose", version, about = "Articulated pose estimation, tracking and action recognition from depth images")]
pub struct Cli {
    /// Worker threads (default: all cores; `bench` defaults to 1).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a synthetic dataset.
    SynthGen(SynthGenArgs),
    /// Train the regressor cascade and error metric on a dataset.
    TrainPose(TrainPoseArgs),
    /// Estimate the pose in every frame of a dataset.
    Estimate(EstimateArgs),
    /// Track a pose through an ordered frame sequence.
    Track(TrackArgs),
    /// Train an action classifier on labelled pose sequences.
    TrainAction(TrainActionArgs),
    /// Classify pose sequences.
    Recognize(RecognizeArgs),
    /// Compare estimated joint positions against ground truth.
    Eval(EvalArgs),
    /// Time single-frame estimation on synthetic frames.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Independent random poses.
    Images,
    /// One smooth motion rendered frame by frame.
    Sequence,
    /// Labelled motion sequences (JSON lines, no rasters).
    Actions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnergyArg {
    Variance,
    Literal,
}

impl From<EnergyArg> for EnergyMode {
    fn from(e: EnergyArg) -> Self {
        match e {
            EnergyArg::Variance => EnergyMode::Variance,
            EnergyArg::Literal => EnergyMode::Literal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Tangent,
    JointPosition,
}

#[derive(Args, Debug)]
pub struct SynthGenArgs {
    /// fish, mouse, hand, or a skeletal model JSON file.
    #[arg(long, default_value = "fish")]
    pub preset: String,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_mm: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = SynthKind::Images)]
    pub kind: SynthKind,
    /// Base speed of `sequence` datasets, mm per frame.
    #[arg(long, default_value_t = 2.0)]
    pub speed: f64,
}

#[derive(Args, Debug)]
pub struct TrainPoseArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Model bundle to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Regressors per joint (default: preset value).
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Initial poses per training image (default: preset value).
    #[arg(long)]
    pub train_poses: Option<usize>,
    /// Candidate tests per node (default 8000).
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long, value_enum, default_value_t = EnergyArg::Variance)]
    pub energy_mode: EnergyArg,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Initial poses per frame (default: from the model).
    #[arg(long)]
    pub kt: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrackArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Particles.
    #[arg(long, default_value_t = 200)]
    pub kr: usize,
    /// Width of the weight Gaussian, mm.
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    /// Cascade rounds used per particle (default: all).
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Initial poses for the first frame's estimate (default: from the model).
    #[arg(long)]
    pub kt: Option<usize>,
    /// Per-step σ of the base rotation, rad.
    #[arg(long, default_value_t = 0.05)]
    pub rot_std: f64,
    /// Per-step σ of the base translation, mm.
    #[arg(long, default_value_t = 5.0)]
    pub trans_std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct TrainActionArgs {
    /// Labelled sequences (JSON lines).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Skeletal model the poses belong to.
    #[arg(long, default_value = "fish")]
    pub preset: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Tangent)]
    pub mode: ModeArg,
    /// Use the full per-joint tangent descriptor instead of the compact one.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RecognizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "fish")]
    pub preset: String,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Directory of estimate results.
    #[arg(long)]
    pub pred: PathBuf,
    /// Dataset directory with ground truth.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    #[arg(long, default_value_t = 40)]
    pub kt: usize,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_mm: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write `bench.csv` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
