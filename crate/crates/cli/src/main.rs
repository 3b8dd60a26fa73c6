use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vdm_core::dataset::Split;
use vdm_core::kv::KvConfig;

mod commands;
mod record;

type CliResult<T = ()> = Result<T, Box<dyn std::error::Error>>;

/// Bad configuration or flag combination; exits like a parse failure.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl std::fmt::Display) -> Box<dyn std::error::Error> {
    Box::new(UsageError(msg.to_string()))
}

#[derive(Parser, Debug)]
#[command(name = "vdm", version, about = "Virtual directional microphone laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct Common {
    /// Plain `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Master seed for every random draw.
    #[arg(long, env = "VDM_SEED", default_value_t = 0, global = true)]
    seed: u64,
    /// Worker threads for dataset generation; 0 uses every core.
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
}

impl Common {
    fn load(&self) -> CliResult<KvConfig> {
        let mut kv = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                KvConfig::parse(&text).map_err(usage)?
            }
            None => KvConfig::default(),
        };
        for o in &self.overrides {
            kv.insert_pair(o).map_err(usage)?;
        }
        Ok(kv)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render one scene with its targets.
    Simulate(SimulateArgs),
    /// Generate a dataset split with a JSON-lines manifest.
    Dataset(DatasetArgs),
    /// Train the dual-mask network on a generated dataset.
    Train(TrainArgs),
    /// Run a checkpoint on a multichannel recording.
    Infer(InferArgs),
    /// Score a model or the oracle masks on a generated dataset.
    Eval(EvalArgs),
    /// Measure a directivity pattern with plane-wave probes.
    Pattern(PatternArgs),
    /// Render the moving-source stereo scene.
    Stereo(StereoArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "test")]
    split: Split,
    /// Sample index; the scene equals sample `index` of `dataset` with the same seed.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Directory of mono 16 kHz WAV files; synthetic speech otherwise.
    #[arg(long)]
    speech_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DatasetArgs {
    #[arg(long)]
    split: Split,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    speech_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset directory holding a manifest.
    #[arg(long)]
    data: PathBuf,
    /// Use at most this many samples.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct InferArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Four-channel recording, or a seven-channel dataset file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5774)]
    beta: f64,
    /// Look direction in degrees: 30 or 150.
    #[arg(long, default_value_t = 30.0)]
    look: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Score this checkpoint; without it the oracle masks are scored.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PatternArgs {
    /// Ideal cardioid applied at the true incidence.
    #[arg(long, conflicts_with_all = ["dma", "checkpoint"])]
    analytic: bool,
    /// Two-element differential beamformer toward 30 degrees.
    #[arg(long, conflicts_with = "checkpoint")]
    dma: bool,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Azimuth step in degrees.
    #[arg(long, default_value_t = 5.0)]
    grid: f64,
    #[arg(long, default_value_t = 200.0)]
    fmin: f64,
    #[arg(long, default_value_t = 4000.0)]
    fmax: f64,
    /// Probe length in seconds.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    #[arg(long)]
    csv: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Oracle,
    IdealVdm,
    Model,
}

#[derive(Args, Debug)]
struct StereoArgs {
    #[arg(long, value_enum, default_value_t = Mode::Oracle)]
    mode: Mode,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5774)]
    beta: f64,
    /// Mono 16 kHz speech file; synthetic speech otherwise.
    #[arg(long)]
    speech: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Dataset(a) => commands::dataset(a),
        Command::Train(a) => commands::train(a),
        Command::Infer(a) => commands::infer(a),
        Command::Eval(a) => commands::eval(a),
        Command::Pattern(a) => commands::pattern(a),
        Command::Stereo(a) => commands::stereo(a),
    }
}

fn out_dir(p: &Path) -> CliResult<&Path> {
    std::fs::create_dir_all(p)?;
    Ok(p)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
