//! Auxiliary-variable forward-filtering backward-sampling for Markov jump
//! processes on countable structured state spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cluster;
pub mod diagnostics;
pub mod error;
pub mod ffbs;
pub mod inference;
pub mod model;
pub mod observation;
pub mod path;
pub mod rates;
pub mod rng;
pub mod simulate;
pub mod state;
pub mod uniformization;
pub mod zoo;

pub use error::{Error, Result};
pub use model::{GeneratorModel, Model, Move};
pub use observation::{JumpLabel, JumpLabelMap, LabelTag, RetrievalProbs};
pub use path::{MjpPath, UniformizedPath};
pub use rates::RateParams;
pub use state::State;
