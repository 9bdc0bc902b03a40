//! Weak simulation of an adaptive circuit with the Pfaffian backend,
//! checked against the state-vector oracle.

use matchsim::circuit::parse_circuit;
use matchsim::oracle::{run_exact, tv_distance};
use matchsim::pfaffian::PfaffianSim;
use matchsim::sampling::empirical;

fn main() -> matchsim::Result<()> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/adaptive.json")).unwrap();
    let circuit = parse_circuit(&text)?;
    let sim = PfaffianSim::new(&circuit)?;

    let shots = 200_000;
    let samples = sim.sample(shots, 1)?;
    let exact = run_exact(&circuit)?;
    let freq = empirical(&samples, &exact.ids);

    println!("records {}", exact.ids.join(" "));
    for (key, p) in &exact.probs {
        let bits: String = key.iter().map(|b| char::from(b'0' + b)).collect();
        println!("{bits}  exact {p:.5}  sampled {:.5}", freq.get(key).copied().unwrap_or(0.0));
    }
    println!("TV over {shots} shots: {:.4}", tv_distance(&freq, &exact.probs));
    println!("(w, w') pairs evaluated: {}", sim.pairs_evaluated());
    Ok(())
}
