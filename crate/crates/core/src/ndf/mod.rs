//! Dual-mask directional filter network.

pub mod checkpoint;
pub mod config;
pub mod features;
pub mod infer;
pub mod linalg;
pub mod loss;
pub mod lstm;
pub mod mask;
pub mod model;
pub mod params;
pub mod train;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use config::NetConfig;
pub use features::Features;
pub use infer::{NdfOutput, NdfProcessor};
pub use loss::{norm_l1_loss, total_loss};
pub use mask::{apply_and_combine, Estimates, MaskPair};
pub use model::{backward, forward, infer_masks, ForwardCache, RawMasks};
pub use params::{NetworkParams, Tensor};
pub use train::{batch_objective, train, write_loss_trace, Adam, LossRecord, LossSettings, LossTerms, TrainConfig, TrainItem};
