//! Compiling arbitrary neighbouring two-line input states into a matchgate
//! prologue over computational-basis lines plus one |+> line.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use matchsim::circuit::{Block, InputSpec};
use matchsim::gadgets::{compile_circuit, compile_input, Ids};
use matchsim::linalg::random_state;
use matchsim::oracle::{random_circuit, run_branches, run_exact, tv_distance, RandomCircuitSpec, StateVector};
use matchsim::pfaffian::PfaffianSim;
use matchsim::sampling::empirical;

fn main() -> matchsim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = InputSpec::new(vec![
        Block::Entangled { k: 2, amps: random_state(4, &mut rng) },
        Block::Bits(vec![1]),
        Block::Entangled { k: 2, amps: random_state(4, &mut rng) },
        Block::Bits(vec![0]),
    ])?;

    let compiled = compile_input(&spec, &mut Ids::new())?;
    println!("compiled input: {} lines, {} prologue instructions", compiled.input.n(), compiled.prologue.len());
    let prep = matchsim::circuit::Circuit::new(compiled.input.clone(), compiled.prologue.prologue.clone())?;
    let want = StateVector::from_input(&spec)?;
    let lines: Vec<usize> = (0..spec.n()).rev().collect();
    for b in run_branches(&prep)? {
        println!("  branch p={:.4}  fidelity {:.12}", b.prob, b.state.subsystem_fidelity(&lines, want.amps()));
    }

    let circuit = random_circuit(&RandomCircuitSpec::new(spec, 25), 5);
    let cc = compile_circuit(&circuit)?;
    let ids: Vec<String> = circuit.records().into_iter().map(|r| r.id).collect();
    let samples = PfaffianSim::new(&cc.circuit)?.sample_full(200_000, 2)?;
    let tv = tv_distance(&empirical(&samples, &ids), &run_exact(&circuit)?.probs);
    println!("pfaffian sampling of the compiled circuit, TV vs oracle: {tv:.4}");
    Ok(())
}
