//! Pfaffian simulation: joint outcome probabilities of adaptive circuits as
//! Pfaffians of contraction matrices, summed over input-string pairs for
//! superposed inputs.

mod backend;
mod contraction;
mod kernel;

pub use crate::projectors::{projector_chain, ContractionSlot, ProjectorChain, SlotKind};
pub use backend::{PfaffianConfig, PfaffianSim};
pub use contraction::build_o;
pub use kernel::{pfaffian, pfaffian_brute_force, pfaffian_in_place, SkewMatrix};
