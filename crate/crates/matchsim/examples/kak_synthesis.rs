//! Arbitrary two-qubit unitaries from matchgates and |+> ancillas via the
//! KAK decomposition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use matchsim::circuit::{Block, Circuit, InputSpec};
use matchsim::gadgets::{kak_decompose, two_qubit_unitary};
use matchsim::linalg::{random_state, random_unitary4};
use matchsim::oracle::run_branches;

fn main() -> matchsim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_unitary4(&mut rng);
    let k = kak_decompose(&u)?;
    println!("interaction coefficients x={:.4} y={:.4} z={:.4}", k.x, k.y, k.z);
    let err = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (k.to_mat4()[i][j] - u[i][j]).norm())
        .fold(0.0, f64::max);
    println!("reconstruction error {err:.2e}");

    let psi = random_state(4, &mut rng);
    let e = two_qubit_unitary(1, &u)?;
    println!("gadget: {} instructions, {} records", e.len(), e.records.len());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [matchsim::linalg::c(s, 0.0), matchsim::linalg::c(s, 0.0)];
    let input = InputSpec::new(vec![
        Block::Product(vec![plus]),
        Block::Entangled { k: 2, amps: psi.clone() },
        Block::Product(vec![plus]),
    ])?;
    let target: Vec<_> = (0..4).map(|i| (0..4).map(|j| u[i][j] * psi[j]).sum()).collect();
    let worst = run_branches(&Circuit::new(input, e.prologue)?)?
        .iter()
        .map(|b| b.state.subsystem_fidelity(&[1, 2], &target))
        .fold(1.0, f64::min);
    println!("worst branch fidelity with U|psi>: {worst:.12}");
    Ok(())
}
