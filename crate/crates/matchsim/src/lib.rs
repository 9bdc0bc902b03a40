//! Classical simulation of nearest-neighbour matchgate circuits.
//!
//! Two simulation backends share one circuit model:
//!
//! * [`heisenberg`] expands measured operators in Majorana monomials and sums
//!   every term explicitly. Cheap for a few adaptive measurements and a single
//!   output line, and it accepts product and small entangled inputs directly.
//! * [`pfaffian`] evaluates joint outcome probabilities as Pfaffians of
//!   contraction matrices, handling many adaptive measurements and, at a
//!   `2^{2k}` cost, one entangled block of `k` lines.
//!
//! [`gadgets`] rewrites circuits that use Hadamards, SWAPs, Toffolis or
//! arbitrary two-qubit inputs into plain matchgate programs with adaptive
//! measurements, and [`oracle`] is a dense state-vector simulator used to
//! check everything else.
//!
//! ```
//! use matchsim::circuit::{Circuit, InputSpec, Instruction, Matchgate};
//! use matchsim::pfaffian::PfaffianSim;
//!
//! let c = Circuit::new(
//!     InputSpec::bits(&[1, 0]),
//!     vec![
//!         Instruction::gate(0, Matchgate::fswap()),
//!         Instruction::final_(0, "a"),
//!         Instruction::final_(1, "b"),
//!     ],
//! )
//! .unwrap();
//! let sim = PfaffianSim::new(&c).unwrap();
//! let p = sim.prob(&[("a", 0), ("b", 1)]).unwrap();
//! assert!((p - 1.0).abs() < 1e-12);
//! ```

pub mod circuit;
pub mod cli;
mod error;
pub mod gadgets;
pub mod heisenberg;
pub mod linalg;
pub mod majorana;
pub mod oracle;
pub mod pfaffian;
mod projectors;
pub mod sampling;

pub use error::{Error, Result};
