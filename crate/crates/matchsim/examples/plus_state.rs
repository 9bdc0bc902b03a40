//! Heralded |+> preparation from |00> with a tunable rotation x, and the
//! repeat-until-success driver around it.

use std::f64::consts::PI;

use matchsim::gadgets::{plus_state_rus, plus_state_success, rus_attempts};

fn main() -> matchsim::Result<()> {
    for div in [4.0, 8.0, 16.0, 32.0] {
        let x = PI / div;
        let run = plus_state_rus(x, None, 17)?;
        println!(
            "x = pi/{div:<2}  success {:.5}  attempt budget {:>4}  used {:>3}  fidelity {:.12}",
            plus_state_success(x),
            rus_attempts(x, 1e-6),
            run.attempts,
            run.fidelity
        );
    }
    Ok(())
}
