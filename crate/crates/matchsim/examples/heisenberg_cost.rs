//! Heisenberg-picture strong simulation: the number of summands grows as
//! (2n)^(4k+2) with k adaptive measurements, independent of circuit depth.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use matchsim::circuit::{Circuit, InputSpec, Instruction, Matchgate, Outcomes};
use matchsim::heisenberg::HeisenbergSim;
use matchsim::oracle::{random_angles, run_exact};

fn chain(n: usize, k: usize, layers: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut prog = Vec::new();
    for t in 0..=k {
        for _ in 0..layers {
            for l in 0..n - 1 {
                prog.push(Instruction::gate(l, Matchgate::from_angles(random_angles(&mut rng))));
            }
        }
        if t < k {
            prog.push(Instruction::intermediate(t, format!("y{t}")));
        }
    }
    prog.push(Instruction::final_(n - 1, "x"));
    Circuit::new(InputSpec::zeros(n), prog).unwrap()
}

fn main() -> matchsim::Result<()> {
    println!(" n  k  depth      summands  time_s   p(y=0, x=1)   oracle");
    for (n, k) in [(3, 0), (4, 0), (4, 1), (5, 1), (4, 2)] {
        for layers in [1, 8] {
            let c = chain(n, k, layers);
            let sim = HeisenbergSim::new(&c)?;
            let y: Outcomes = (0..k).map(|t| (format!("y{t}"), 0)).collect();
            let t0 = Instant::now();
            let p = sim.joint(&y, k, &[(n - 1, 1)])?;
            let secs = t0.elapsed().as_secs_f64();
            let mut a: Vec<(String, u8)> = y.into_iter().collect();
            a.push(("x".into(), 1));
            let refs: Vec<(&str, u8)> = a.iter().map(|(s, b)| (s.as_str(), *b)).collect();
            let want = run_exact(&c)?.prob(&refs);
            println!(
                "{n:>2} {k:>2} {:>6} {:>13} {secs:>7.3} {p:>13.10} {want:>8.6}",
                c.gate_count(),
                sim.terms_evaluated()
            );
        }
    }
    Ok(())
}
