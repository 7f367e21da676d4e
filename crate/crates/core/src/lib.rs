//! Discriminative convolutional analysis dictionary learning.
//!
//! A convolutional analysis dictionary, a sparse code tensor and a universal
//! linear classifier are learned jointly by block coordinate descent over a
//! patch-matrix form of the convolution. Encoding an unseen sample is a
//! single matrix product with the learned dictionary.

pub mod cli;
pub mod dataio;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod patching;
pub mod persistence;
pub mod presets;
mod wire;

pub use error::{Error, FormatError, Result};
pub use linalg::Matrix;
pub use dataio::{Dataset, SplitSpec};
pub use inference::{classify, encode, evaluate, EncodeOptions, Prediction};
pub use model::{AnalysisDictionary, Hyperparams, LabelMatrix, LinearClassifier, SampleMode};
pub use optimizer::{train, ModelLayout, TrainState, Trainer};
pub use patching::{CodeTensor, ConvGeometry};
pub use persistence::{load_model, save_model, TrainedModel};
