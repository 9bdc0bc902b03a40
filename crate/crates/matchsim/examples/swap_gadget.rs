//! SWAP by teleportation through one magic state: every one of the 16
//! measurement branches leaves the swapped state on the data lines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use matchsim::circuit::{Block, Circuit, InputSpec};
use matchsim::gadgets::{swap_gadget, Ids};
use matchsim::linalg::random_state;
use matchsim::oracle::run_branches;

fn main() -> matchsim::Result<()> {
    let alpha = random_state(4, &mut ChaCha8Rng::seed_from_u64(4));
    let e = swap_gadget(0, 2, 6, &mut Ids::new())?;
    println!("{} instructions, {} magic state(s), records {:?}", e.len(), e.cost.magic_states, e.records);

    let input = InputSpec::new(vec![Block::Entangled { k: 2, amps: alpha.clone() }, Block::Magic])?;
    let swapped = [alpha[0], alpha[2], alpha[1], alpha[3]];
    for b in run_branches(&Circuit::new(input, e.prologue)?)? {
        let bits: String = e.records.iter().map(|r| char::from(b'0' + b.outcomes[r])).collect();
        println!("branch {bits}  p={:.4}  fidelity {:.12}", b.prob, b.state.subsystem_fidelity(&[0, 1], &swapped));
    }
    Ok(())
}
