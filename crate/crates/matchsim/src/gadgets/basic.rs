use super::{GadgetExpansion, Ids};
use crate::circuit::{Basis, Guard, Matchgate};
use crate::error::{Error, Result};
use crate::linalg::*;

/// Moves the content of `from` to `to` with nearest-neighbour fSWAPs.
///
/// With `guard_ids` empty every step is G(Z, X). Otherwise the moving line
/// must hold the computational value `⊕ guard_ids`, and each step is G(Z, X)
/// when that parity is 0 and G(−Z, X) when it is 1, which makes the move an
/// exact SWAP with every line passed.
pub fn fswap_ladder(from: usize, to: usize, guard_ids: &[String]) -> GadgetExpansion {
    let mut e = GadgetExpansion::new();
    let steps: Vec<usize> = if from < to { (from..to).collect() } else { (to..from).rev().collect() };
    for line in steps {
        if guard_ids.is_empty() {
            e.gate(line, Matchgate::fswap());
        } else {
            e.guarded(line, Matchgate::fswap(), Guard::new(guard_ids, 0));
            e.guarded(line, Matchgate::fswap_odd(), Guard::new(guard_ids, 1));
        }
    }
    e
}

fn check_neighbour(target: usize, ancilla: usize) -> Result<()> {
    if target.abs_diff(ancilla) != 1 {
        return Err(Error::validation("macro-layout", format!("ancilla {} does not neighbour target {}", ancilla + 1, target + 1)));
    }
    Ok(())
}

/// Hadamard on `target` using a neighbouring `|+>` line, which is left intact.
pub fn hadamard_gadget(target: usize, ancilla: usize) -> Result<GadgetExpansion> {
    check_neighbour(target, ancilla)?;
    let mut e = GadgetExpansion::new();
    push_hadamard(&mut e, target, ancilla);
    Ok(e)
}

fn push_hadamard(e: &mut GadgetExpansion, target: usize, ancilla: usize) {
    if ancilla == target + 1 {
        e.gate(target, Matchgate::hadamard_gadget());
    } else {
        e.gate(ancilla, Matchgate::hadamard_gadget_lower());
    }
}

/// `Rz(t) = e^{−itZ/2}` on `target`; dropped when it is `±I`.
fn push_rz(e: &mut GadgetExpansion, target: usize, ancilla: usize, t: f64) {
    let phi = -t / 2.0;
    if phi.sin().abs() < 1e-12 {
        return;
    }
    if ancilla == target + 1 {
        e.gate(target, Matchgate::phase_upper(phi));
    } else {
        e.gate(ancilla, Matchgate::phase_lower(phi));
    }
}

fn rz(t: f64) -> Mat2 {
    [[C64::from_polar(1.0, -t / 2.0), ZERO], [ZERO, C64::from_polar(1.0, t / 2.0)]]
}

/// Arbitrary single-line unitary from phase gates and at most two Hadamard
/// gadgets, via `u ∝ Rz(α) H Rz(β) H Rz(δ)`.
pub fn single_qubit_unitary(target: usize, ancilla: usize, u: &Mat2) -> Result<GadgetExpansion> {
    check_neighbour(target, ancilla)?;
    let res = unitarity_residual2(u);
    if !(res <= 1e-8) {
        return Err(Error::DecompositionFailure(format!("matrix is not unitary (residual {res:.3e})")));
    }
    let s = det2(u).sqrt();
    let v = scale2(u, s.inv());
    let (a, b) = (v[0][0], v[0][1]);
    // sequence in time order: Some(t) is Rz(t), None is H
    let seq: Vec<Option<f64>> = if b.norm() < 1e-12 {
        vec![Some(-2.0 * a.arg())]
    } else if (a.norm() - b.norm()).abs() < 1e-12 {
        let delta = v[0][1].arg() - v[0][0].arg();
        let alpha = v[1][0].arg() - v[0][0].arg();
        vec![Some(delta), None, Some(alpha)]
    } else {
        let beta = 2.0 * b.norm().atan2(a.norm());
        let sum = -2.0 * a.arg();
        let diff = -2.0 * b.arg() - std::f64::consts::PI;
        vec![Some((sum - diff) / 2.0), None, Some(beta), None, Some((sum + diff) / 2.0)]
    };
    let mut product = id2();
    let mut e = GadgetExpansion::new();
    for step in &seq {
        match step {
            Some(t) => {
                product = mul2(&rz(*t), &product);
                push_rz(&mut e, target, ancilla, *t);
            }
            None => {
                product = mul2(&hadamard(), &product);
                push_hadamard(&mut e, target, ancilla);
            }
        }
    }
    let ov: C64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| product[i][j].conj() * u[i][j]).sum();
    if (ov.norm() / 2.0 - 1.0).abs() > 1e-10 {
        return Err(Error::DecompositionFailure(format!("Euler reconstruction overlap {}", ov.norm() / 2.0)));
    }
    Ok(e)
}

/// Toffoli on computational-basis inputs: measures both controls, then flips
/// `target` and `ancilla` through an X⊗X ladder whose every rung is the
/// product `e^{iπ/4 XX}[c1] e^{iπ/4 XX}[c2] e^{−iπ/4 XX}[c1⊕c2]`, which
/// equals `i XX` exactly when both controls read 1.
pub fn toffoli_gadget(controls: [usize; 2], target: usize, ancilla: usize, ids: &mut Ids) -> GadgetExpansion {
    let mut e = GadgetExpansion::new();
    let c1 = ids.fresh("ctl");
    let c2 = ids.fresh("ctl");
    e.measure(controls[0], c1.clone(), Basis::Computational);
    e.measure(controls[1], c2.clone(), Basis::Computational);
    let quarter = std::f64::consts::FRAC_PI_4;
    for line in target.min(ancilla)..target.max(ancilla) {
        e.guarded(line, Matchgate::xx_rotation(quarter), Guard::new(&[&c1], 1));
        e.guarded(line, Matchgate::xx_rotation(quarter), Guard::new(&[&c2], 1));
        e.guarded(line, Matchgate::xx_rotation(-quarter), Guard::new(&[&c1, &c2], 1));
    }
    e.ancillas.push(super::Ancilla { line: ancilla, state: super::AncillaState::Zero });
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Block, Circuit, InputSpec, Instruction};
    use crate::oracle::{run_branches, run_exact, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circuit(input: InputSpec, e: &GadgetExpansion) -> Circuit {
        Circuit::new(input, e.prologue.clone()).unwrap()
    }

    fn plus() -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [c(s, 0.0), c(s, 0.0)]
    }

    #[test]
    fn ladder_trivial_and_bits() {
        assert!(fswap_ladder(2, 2, &[]).is_empty());
        let c = circuit(InputSpec::bits(&[1, 0, 0]), &fswap_ladder(0, 2, &[]));
        let out = &run_branches(&c).unwrap()[0].state;
        assert!((out.amps()[0b100].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_round_trip_on_bell_pair() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        let input = InputSpec::new(vec![
            Block::Entangled { k: 2, amps: bell },
            Block::Product(vec![plus(), [c(0.6, 0.0), c(0.0, 0.8)]]),
            Block::Bits(vec![1]),
        ])
        .unwrap();
        let mut e = fswap_ladder(1, 4, &[]);
        e.append(fswap_ladder(4, 1, &[]));
        let start = StateVector::from_input(&input).unwrap();
        let out = run_branches(&circuit(input, &e)).unwrap();
        assert!((fidelity(start.amps(), out[0].state.amps()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_examples() {
        for (target, ancilla) in [(0, 1), (1, 0)] {
            let mut blocks = vec![Block::Bits(vec![0]), Block::Product(vec![plus()])];
            if target == 1 {
                blocks.reverse();
            }
            let input = InputSpec::new(blocks).unwrap();
            let e = hadamard_gadget(target, ancilla).unwrap();
            assert_eq!(e.len(), 1);
            let st = &run_branches(&circuit(input, &e)).unwrap()[0].state;
            assert!((st.subsystem_fidelity(&[target], &plus()) - 1.0).abs() < 1e-12);
            assert!((st.subsystem_fidelity(&[ancilla], &plus()) - 1.0).abs() < 1e-12);
        }
        let input = InputSpec::new(vec![Block::Product(vec![plus(), plus()])]).unwrap();
        let st = &run_branches(&circuit(input, &hadamard_gadget(0, 1).unwrap())).unwrap()[0].state;
        assert!((st.subsystem_fidelity(&[0], &[ONE, ZERO]) - 1.0).abs() < 1e-12);
        assert!(hadamard_gadget(0, 2).is_err());
    }

    #[test]
    fn hadamard_random_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let psi = random_state(2, &mut rng);
            let input = InputSpec::new(vec![Block::Product(vec![plus(), [psi[0], psi[1]]])]).unwrap();
            let st = &run_branches(&circuit(input, &hadamard_gadget(1, 0).unwrap())).unwrap()[0].state;
            let h = hadamard();
            let want = [h[0][0] * psi[0] + h[0][1] * psi[1], h[1][0] * psi[0] + h[1][1] * psi[1]];
            assert!(st.subsystem_fidelity(&[1], &want) > 1.0 - 1e-10);
        }
    }

    fn apply_single_via_gadget(u: &Mat2, psi: [C64; 2], below: bool) -> f64 {
        let (target, ancilla) = if below { (0, 1) } else { (1, 0) };
        let mut states = vec![psi, plus()];
        if !below {
            states.reverse();
        }
        let input = InputSpec::new(vec![Block::Product(states)]).unwrap();
        let e = single_qubit_unitary(target, ancilla, u).unwrap();
        let st = &run_branches(&circuit(input, &e)).unwrap()[0].state;
        let want = [u[0][0] * psi[0] + u[0][1] * psi[1], u[1][0] * psi[0] + u[1][1] * psi[1]];
        st.subsystem_fidelity(&[target], &want)
    }

    #[test]
    fn single_qubit_special_cases() {
        let z = single_qubit_unitary(0, 1, &pauli_z()).unwrap();
        assert_eq!(z.cost.gates, 1);
        let h = single_qubit_unitary(0, 1, &hadamard()).unwrap();
        assert_eq!(h.len(), 1);
        assert!(single_qubit_unitary(0, 1, &id2()).unwrap().is_empty());
        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(single_qubit_unitary(0, 1, &bad), Err(Error::DecompositionFailure(_))));
    }

    #[test]
    fn single_qubit_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..30 {
            let u = random_unitary2(&mut rng);
            let psi = random_state(2, &mut rng);
            let f = apply_single_via_gadget(&u, [psi[0], psi[1]], i % 2 == 0);
            assert!(f > 1.0 - 1e-9, "fidelity {f}");
            let e = single_qubit_unitary(0, 1, &u).unwrap();
            assert!(e.prologue.iter().filter(|i| matches!(i, Instruction::Gate { gate, .. } if gate.angles().is_none())).count() <= 2);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let y_like = [[c(s, 0.0), c(0.0, -s)], [c(0.0, -s), c(s, 0.0)]];
        assert!(apply_single_via_gadget(&y_like, [c(0.6, 0.0), c(0.8, 0.0)], true) > 1.0 - 1e-9);
    }

    #[test]
    fn toffoli_truth_table() {
        for bits in 0..8u8 {
            let (c1, c2, t) = (bits >> 2 & 1, bits >> 1 & 1, bits & 1);
            // lines: c1, c2, target, ancilla
            let mut ids = Ids::new();
            let e = toffoli_gadget([0, 1], 2, 3, &mut ids);
            let mut prog = e.prologue.clone();
            prog.push(Instruction::final_(2, "t"));
            let c = Circuit::new(InputSpec::bits(&[c1, c2, t, 0]), prog).unwrap();
            let d = run_exact(&c).unwrap();
            let want = t ^ (c1 & c2);
            assert!((d.prob(&[("t", want)]) - 1.0).abs() < 1e-12, "input {bits:03b}");
        }
        // ancilla above the target, ladder passing a control
        let mut ids = Ids::new();
        let e = toffoli_gadget([2, 0], 3, 1, &mut ids);
        let mut prog = e.prologue.clone();
        prog.push(Instruction::final_(3, "t"));
        prog.push(Instruction::final_(2, "c"));
        let c = Circuit::new(InputSpec::bits(&[1, 0, 1, 0]), prog).unwrap();
        let d = run_exact(&c).unwrap();
        assert!((d.prob(&[("t", 1), ("c", 1)]) - 1.0).abs() < 1e-12);
    }
}
