//! Simply generated noncrossing trees, discrete stable laminations, their
//! triangulations and iterations.

pub mod error;
pub mod iterate;
pub mod lamination;
pub mod noncrossing;
pub mod offspring;
pub mod par;
pub mod render;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod tree;
pub mod verify;

mod conv;

pub use error::{Error, Result};
pub use lamination::Lamination;
pub use noncrossing::{Decoration, NoncrossingTree};
pub use offspring::{OffspringPair, Pmf, StableOffspring, WeightSeq};
pub use rng::StreamKey;
pub use tree::{LukasiewiczPath, PlaneTree};
