//! Matchgates, adaptive programs, input specifications and the file format.

mod format;
mod input;
mod matchgate;
mod program;
mod segments;

pub use format::{circuit_from_value, circuit_to_value, parse_circuit, serialize_circuit};
pub use input::{block_index_to_mask, magic_amplitudes, Block, InputSpec, MAX_ENTANGLED_WIDTH};
pub use matchgate::{Matchgate, MatchgateAngles};
pub use program::{Basis, Circuit, Guard, Instruction, Macro, Outcomes, RecordInfo, Role};
pub use segments::{instantiate_segments, instantiate_until, Segment};
