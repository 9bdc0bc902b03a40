use super::basic::fswap_ladder;
use super::{Ancilla, AncillaState, CostReport, GadgetExpansion, Ids};
use crate::circuit::{Basis, Block, Circuit, Guard, Instruction, Macro, Matchgate, Role};
use crate::error::{Error, Result};

/// Pauli correction after a Bell measurement read as `(u, l)` on the upper
/// and lower line: `X^{x·(u,l)} Z^{z·(u,l)}` with mod-2 dot products, X first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeleportCorrection {
    pub x: [u8; 2],
    pub z: [u8; 2],
}

/// Found by exhaustive oracle search over all outcome branches; see the
/// regression test below.
pub const TELEPORT_CORRECTIONS: TeleportCorrection = TeleportCorrection { x: [1, 1], z: [1, 0] };

fn pick(mask: [u8; 2], ids: [&String; 2]) -> Vec<&String> {
    ids.iter().zip(mask).filter(|(_, m)| *m == 1).map(|(id, _)| *id).collect()
}

/// Adaptive SWAP of lines `line`, `line + 1` consuming the Magic block at
/// `magic_start..magic_start + 4`.
///
/// The block's lines are moved up between the targets, giving
/// `t1 m1 m2 m3 m4 t2`. Bell measurements on `(t1, m1)` and `(m4, t2)`
/// teleport `t1` onto `m3` and `t2` onto `m2`; guarded corrections follow,
/// and the four measured lines are moved to `dispose_end − 4..dispose_end`
/// with parity-guarded ladders. Lines between the targets and `dispose_end`
/// end up where they started.
pub fn swap_gadget(line: usize, magic_start: usize, dispose_end: usize, ids: &mut Ids) -> Result<GadgetExpansion> {
    let mut e = move_magic_in(line, magic_start, dispose_end)?;
    let t = line;
    let [r1, r2, s1, s2] = [ids.fresh("bell"), ids.fresh("bell"), ids.fresh("bell"), ids.fresh("bell")];
    e.gate(t, Matchgate::hadamard_gadget());
    e.gate(t + 4, Matchgate::hadamard_gadget());
    e.measure(t, r1.clone(), Basis::Computational);
    e.measure(t + 1, r2.clone(), Basis::Computational);
    e.measure(t + 4, s1.clone(), Basis::Computational);
    e.measure(t + 5, s2.clone(), Basis::Computational);
    let corr = TELEPORT_CORRECTIONS;
    let guard = |mask: [u8; 2], pair: [&String; 2]| {
        let sel = pick(mask, pair);
        (!sel.is_empty()).then(|| Guard::new(&sel, 1))
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    // X on m3 via XX on (m3, m4), X on m2 via XX on (m1, m2)
    if let Some(g) = guard(corr.x, [&r1, &r2]) {
        e.guarded(t + 3, Matchgate::xx(), g);
    }
    if let Some(g) = guard(corr.x, [&s1, &s2]) {
        e.guarded(t + 1, Matchgate::xx(), g);
    }
    if let Some(g) = guard(corr.z, [&r1, &r2]) {
        e.guarded(t + 2, Matchgate::phase_lower(half_pi), g);
    }
    if let Some(g) = guard(corr.z, [&s1, &s2]) {
        e.guarded(t + 2, Matchgate::phase_upper(half_pi), g);
    }
    // parities now held by the measured lines
    let xor = |a: &[&String], b: &[&String]| -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for id in a.iter().chain(b) {
            if let Some(p) = v.iter().position(|x| x == *id) {
                v.remove(p);
            } else {
                v.push((*id).clone());
            }
        }
        v
    };
    let m1_bits = xor(&[&r2], &pick(corr.x, [&s1, &s2]));
    let m4_bits = xor(&[&s1], &pick(corr.x, [&r1, &r2]));
    let end = dispose_end;
    for (from, bits, to) in [(t + 5, vec![s2.clone()], end - 1), (t + 4, m4_bits, end - 2), (t + 1, m1_bits, end - 3), (t, vec![r1.clone()], end - 4)] {
        e.append(fswap_ladder(from, to, &bits));
    }
    e.cost.magic_states += 1;
    Ok(e)
}

fn move_magic_in(line: usize, magic_start: usize, dispose_end: usize) -> Result<GadgetExpansion> {
    if magic_start <= line + 1 || magic_start + 4 > dispose_end {
        return Err(Error::NoMagicAvailable);
    }
    let mut e = GadgetExpansion::new();
    // the block has even parity, so the fermionic signs of its four moves cancel
    for j in 0..4 {
        e.append(fswap_ladder(magic_start + j, line + 1 + j, &[]));
    }
    for j in 0..4 {
        e.ancillas.push(Ancilla { line: magic_start + j, state: AncillaState::Magic });
    }
    Ok(e)
}

/// Post-selected SWAP gadget: Bell rotations without measurement or
/// correction, and plain fSWAP disposal. Conditioned on all four disposed
/// lines reading 0 at the end, it acts as SWAP.
pub fn swap_gadget_postselected(line: usize, magic_start: usize, dispose_end: usize) -> Result<GadgetExpansion> {
    let mut e = move_magic_in(line, magic_start, dispose_end)?;
    let t = line;
    e.gate(t, Matchgate::hadamard_gadget());
    e.gate(t + 4, Matchgate::hadamard_gadget());
    for (from, to) in [(t + 5, dispose_end - 1), (t + 4, dispose_end - 2), (t + 1, dispose_end - 3), (t, dispose_end - 4)] {
        e.append(fswap_ladder(from, to, &[]));
    }
    e.cost.magic_states += 1;
    Ok(e)
}

/// Both gadgetised forms of a circuit with SWAP macros.
#[derive(Debug, Clone)]
pub struct SwapGadgetization {
    pub adaptive: Circuit,
    pub post_selected: Circuit,
    /// Final records of the post-selected variant that must read 0.
    pub post_select_ids: Vec<String>,
    /// Bell-measurement records of the adaptive variant.
    pub new_records: Vec<String>,
    pub swaps: usize,
    pub cost: CostReport,
}

/// Replaces each SWAP macro by a SWAP gadget using one of `K` Magic blocks
/// appended to the input. Final measurements move to the end of the program.
pub fn gadgetize_swaps(c: &Circuit) -> Result<SwapGadgetization> {
    gadgetize_swaps_with(c, &mut Ids::avoiding(c))
}

pub(crate) fn gadgetize_swaps_with(c: &Circuit, ids: &mut Ids) -> Result<SwapGadgetization> {
    let k = c.program().iter().filter(|i| matches!(i, Instruction::Macro(Macro::Swap { .. }))).count();
    if k == 0 {
        return Ok(SwapGadgetization {
            adaptive: c.clone(),
            post_selected: c.clone(),
            post_select_ids: vec![],
            new_records: vec![],
            swaps: 0,
            cost: CostReport::default(),
        });
    }
    if let Some(Instruction::Macro(m)) = c.program().iter().find(|i| matches!(i, Instruction::Macro(m) if !matches!(m, Macro::Swap { .. }))) {
        return Err(Error::validation("macro-order", format!("lower `{}` before gadgetising SWAPs", m.name())));
    }
    let n = c.n();
    let total = n + 4 * k;
    let input = c.input().with_appended(vec![Block::Magic; k])?;
    let mut adaptive = Vec::new();
    let mut post = Vec::new();
    let mut finals = Vec::new();
    let mut cost = CostReport::default();
    let mut new_records = Vec::new();
    let mut j = 0;
    for ins in c.program() {
        match ins {
            Instruction::Macro(Macro::Swap { line }) => {
                let end = total - 4 * j;
                let e = swap_gadget(*line, n, end, ids)?;
                cost += e.cost;
                new_records.extend(e.records.iter().cloned());
                adaptive.extend(e.prologue);
                post.extend(swap_gadget_postselected(*line, n, end)?.prologue);
                j += 1;
            }
            Instruction::Measure { role: Role::Final, .. } => finals.push(ins.clone()),
            other => {
                adaptive.push(other.clone());
                post.push(other.clone());
            }
        }
    }
    adaptive.extend(finals.iter().cloned());
    post.extend(finals);
    let mut post_select_ids = Vec::new();
    for l in n..total {
        let id = ids.fresh("ps");
        post.push(Instruction::measure(l, id.clone(), Role::Final));
        post_select_ids.push(id);
    }
    Ok(SwapGadgetization {
        adaptive: Circuit::new(input.clone(), adaptive)?,
        post_selected: Circuit::new(input, post)?,
        post_select_ids,
        new_records,
        swaps: k,
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::InputSpec;
    use crate::linalg::*;
    use crate::oracle::{post_select, run_branches, run_exact, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair_input(alpha: &[C64]) -> InputSpec {
        InputSpec::new(vec![Block::Entangled { k: 2, amps: alpha.to_vec() }, Block::Magic]).unwrap()
    }

    fn swapped(alpha: &[C64]) -> Vec<C64> {
        vec![alpha[0], alpha[2], alpha[1], alpha[3]]
    }

    fn test_states() -> Vec<Vec<C64>> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut v = vec![
            vec![ZERO, ZERO, ONE, ZERO],
            vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)],
            vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.5, 0.0)],
        ];
        for _ in 0..3 {
            v.push(random_state(4, &mut rng));
        }
        v
    }

    /// Bell rotations and measurements only, then every Pauli pair on
    /// (m2, m3) is tried per branch.
    #[test]
    fn correction_table_from_oracle_search() {
        let paulis: [Mat2; 4] = [id2(), pauli_x(), pauli_z(), mul2(&pauli_z(), &pauli_x())];
        // index: 0 = I, 1 = X, 2 = Z, 3 = X then Z
        let mut ids = Ids::new();
        let mut prog = move_magic_in(0, 2, 6).unwrap().prologue;
        prog.push(Instruction::gate(0, Matchgate::hadamard_gadget()));
        prog.push(Instruction::gate(4, Matchgate::hadamard_gadget()));
        let names: Vec<String> = (0..4).map(|_| ids.fresh("b")).collect();
        for (l, id) in [0, 1, 4, 5].iter().zip(&names) {
            prog.push(Instruction::intermediate(*l, id.clone()));
        }
        let states = test_states();
        let runs: Vec<_> = states.iter().map(|a| run_branches(&Circuit::new(pair_input(a), prog.clone()).unwrap()).unwrap()).collect();
        let mut found = 0;
        for branch in &runs[5] {
            let o = &branch.outcomes;
            let (r, s) = ([o[&names[0]], o[&names[1]]], [o[&names[2]], o[&names[3]]]);
            let mut ok_pairs = vec![];
            for p2 in 0..4 {
                for p3 in 0..4 {
                    let good = states.iter().zip(&runs).all(|(a, run)| {
                        let b = run.iter().find(|b| &b.outcomes == o);
                        b.is_none_or(|b| {
                            let mut st: StateVector = b.state.clone();
                            st.apply_single(2, &paulis[p2]);
                            st.apply_single(3, &paulis[p3]);
                            st.subsystem_fidelity(&[2, 3], &swapped(a)) > 1.0 - 1e-9
                        })
                    });
                    if good {
                        ok_pairs.push((p2, p3));
                    }
                }
            }
            let table = |bits: [u8; 2]| {
                let dot = |m: [u8; 2]| (m[0] & bits[0]) ^ (m[1] & bits[1]);
                (dot(TELEPORT_CORRECTIONS.x) + 2 * dot(TELEPORT_CORRECTIONS.z)) as usize
            };
            assert_eq!(ok_pairs, vec![(table(s), table(r))], "branch r={r:?} s={s:?}");
            found += 1;
        }
        assert_eq!(found, 16);
    }

    #[test]
    fn adaptive_gadget_swaps_every_branch() {
        for alpha in test_states() {
            let mut ids = Ids::new();
            let e = swap_gadget(0, 2, 6, &mut ids).unwrap();
            assert_eq!(e.cost.measurements, 4);
            assert_eq!(e.cost.magic_states, 1);
            let c = Circuit::new(pair_input(&alpha), e.prologue).unwrap();
            let branches = run_branches(&c).unwrap();
            assert_eq!(branches.len(), 16);
            for b in &branches {
                assert!(b.state.subsystem_fidelity(&[0, 1], &swapped(&alpha)) > 1.0 - 1e-9);
                assert!((b.prob - 1.0 / 16.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gadget_with_lines_in_between() {
        // targets 0,1; a bystander at 2 entangled with target 1; magic at 3..7
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_state(8, &mut rng);
        let input = InputSpec::new(vec![Block::Entangled { k: 3, amps: psi.clone() }, Block::Magic]).unwrap();
        let mut ids = Ids::new();
        let e = swap_gadget(0, 3, 7, &mut ids).unwrap();
        let c = Circuit::new(input, e.prologue).unwrap();
        // SWAP of the first two lines, block index has line 0 as MSB
        let want: Vec<C64> = (0..8).map(|i| psi[(i & 1) | ((i >> 1 & 1) << 2) | ((i >> 2 & 1) << 1)]).collect();
        for b in run_branches(&c).unwrap() {
            assert!(b.state.subsystem_fidelity(&[0, 1, 2], &want) > 1.0 - 1e-9);
        }
    }

    fn swap_circuit(bits: &[u8]) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = Matchgate::from_angles(crate::oracle::random_angles(&mut rng));
        Circuit::new(
            InputSpec::bits(bits),
            vec![
                Instruction::gate(1, g),
                Instruction::Macro(Macro::Swap { line: 0 }),
                Instruction::gate(1, Matchgate::hadamard_gadget()),
                Instruction::final_(0, "a"),
                Instruction::final_(1, "b"),
                Instruction::final_(2, "c"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn gadgetised_circuit_matches_original() {
        let c = swap_circuit(&[1, 0, 1]);
        let reference = run_exact(&c).unwrap();
        let g = gadgetize_swaps(&c).unwrap();
        assert_eq!(g.swaps, 1);
        assert_eq!(g.adaptive.n(), 7);
        let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let adaptive = run_exact(&g.adaptive).unwrap().marginal(&ids);
        for (k, p) in &reference.probs {
            assert!((adaptive.probs.get(k).copied().unwrap_or(0.0) - p).abs() < 1e-9);
        }
        let full = run_exact(&g.post_selected).unwrap();
        let cons: Vec<(&str, u8)> = g.post_select_ids.iter().map(|s| (s.as_str(), 0)).collect();
        let cond = post_select(&full, &cons).unwrap().marginal(&ids);
        for (k, p) in &reference.probs {
            assert!((cond.probs.get(k).copied().unwrap_or(0.0) - p).abs() < 1e-8);
        }
    }

    #[test]
    fn no_swaps_unchanged() {
        let c = Circuit::new(InputSpec::bits(&[0, 1]), vec![Instruction::final_(0, "a")]).unwrap();
        let g = gadgetize_swaps(&c).unwrap();
        assert_eq!(g.adaptive, c);
        assert_eq!(g.swaps, 0);
    }

    #[test]
    fn missing_magic_reported() {
        let mut ids = Ids::new();
        assert!(matches!(swap_gadget(0, 2, 5, &mut ids), Err(Error::NoMagicAvailable)));
    }
}
