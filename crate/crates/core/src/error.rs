use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal too short: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("wav: {0}")]
    Wav(String),
    #[error("unachievable RT60 {rt60} s: absorption {alpha:.4} >= 1")]
    UnachievableRt60 { rt60: f64, alpha: f64 },
    #[error("position outside room: {0}")]
    OutsideRoom(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("zero energy: {0}")]
    ZeroEnergy(String),
    #[error("singular beamformer design: {0}")]
    SingularDesign(String),
    #[error("lambda_vdm must be 0 or 1, got {0}")]
    InvalidLambda(f64),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
