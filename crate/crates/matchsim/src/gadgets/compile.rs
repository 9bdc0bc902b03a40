use super::basic::{fswap_ladder, hadamard_gadget, single_qubit_unitary};
use super::kak::two_qubit_unitary;
use super::{Ancilla, AncillaState, GadgetExpansion, Ids};
use crate::circuit::{Basis, Block, Circuit, InputSpec, Instruction};
use crate::error::{Error, Result};
use crate::linalg::*;

/// Arbitrary two-line states on the pattern `|+>|00>|+>|00>…|+>` starting at
/// `line`. Each pair gets the unitary whose first column is its target
/// state; the `|+>` lines are then measured and moved below the pairs, so
/// pair `i` ends on `line + 2i` and the ancillas on `line + 2m ..= line + 3m`.
pub fn prepare_two_qubit_inputs(line: usize, states: &[[C64; 4]], ids: &mut Ids) -> Result<GadgetExpansion> {
    let m = states.len();
    let mut e = GadgetExpansion::new();
    for (i, s) in states.iter().enumerate() {
        let nrm = norm(s);
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::DecompositionFailure(format!("pair state {i} has norm {nrm}")));
        }
        e.append(two_qubit_unitary(line + 1 + 3 * i, &dmatrix_to_mat4(&unitary_with_first_column(s)))?);
    }
    let anc_ids: Vec<String> = (0..=m).map(|_| ids.fresh("anc")).collect();
    for (i, id) in anc_ids.iter().enumerate() {
        e.measure(line + 3 * i, id.clone(), Basis::Computational);
        e.ancillas.push(Ancilla { line: line + 3 * i, state: AncillaState::Plus });
    }
    for i in (0..=m).rev() {
        e.append(fswap_ladder(line + 3 * i, line + 2 * m + i, std::slice::from_ref(&anc_ids[i])));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Bit(u8),
    Work,
    Placed,
    Hub,
    Measured(String),
    Region,
}

enum Item {
    Single(usize, [C64; 2]),
    Pair(usize, [C64; 4]),
}

fn move_slot(layout: &mut Vec<Slot>, from: usize, to: usize) {
    let s = layout.remove(from);
    layout.insert(to, s);
}

fn passed_parity(layout: &[Slot]) -> Result<u8> {
    let mut p = 0;
    for s in layout {
        match s {
            Slot::Bit(b) => p ^= b,
            Slot::Work => {}
            other => return Err(Error::UnsupportedLayout(format!("prepared line would pass {other:?}"))),
        }
    }
    Ok(p)
}

fn hub(layout: &[Slot]) -> usize {
    layout.iter().position(|s| *s == Slot::Hub).expect("hub present")
}

/// Input in the form `bits ⊕ |+> ⊕ trailing blocks` plus the prologue that
/// turns it into the requested input on the original lines.
#[derive(Debug, Clone)]
pub struct CompiledInput {
    pub input: InputSpec,
    pub prologue: GadgetExpansion,
}

/// Compiles product lines and neighbouring two-line blocks into a prologue
/// acting on computational-basis lines and one `|+>` line.
///
/// Original line `k` stays on line `k`. The `|+>` line sits below them,
/// followed by one measured ancilla per two-line block; blocks wider than
/// two lines and Magic blocks are passed through and, with any lines after
/// them, must come last.
///
/// Lines are prepared in ascending order on the work line next to the `|+>`
/// line and moved up with fSWAPs. The moves only cross computational-basis
/// lines, so their fermionic signs are known and folded into the prepared
/// state beforehand.
pub fn compile_input(spec: &InputSpec, ids: &mut Ids) -> Result<CompiledInput> {
    let offsets = spec.offsets();
    let mut items = Vec::new();
    let mut pre: Vec<Option<u8>> = Vec::new();
    let mut region: Option<usize> = None;
    for (bi, block) in spec.blocks().iter().enumerate() {
        let off = offsets[bi];
        if region.is_some() {
            if matches!(block, Block::Product(_) | Block::Entangled { k: 1 | 2, .. }) {
                return Err(Error::UnsupportedLayout(format!("block at line {} follows a wide entangled block", off + 1)));
            }
            continue;
        }
        match block {
            Block::Bits(b) => pre.extend(b.iter().map(|&x| Some(x))),
            Block::Product(states) => {
                for (j, s) in states.iter().enumerate() {
                    items.push(Item::Single(off + j, *s));
                    pre.push(None);
                }
            }
            Block::Entangled { k: 1, amps } => {
                items.push(Item::Single(off, [amps[0], amps[1]]));
                pre.push(None);
            }
            Block::Entangled { k: 2, amps } => {
                items.push(Item::Pair(off, [amps[0], amps[1], amps[2], amps[3]]));
                pre.extend([None, None]);
            }
            _ => region = Some(bi),
        }
    }
    if items.is_empty() {
        return Ok(CompiledInput { input: spec.clone(), prologue: GadgetExpansion::new() });
    }
    let pairs = items.iter().filter(|i| matches!(i, Item::Pair(..))).count();
    let work = items.len() + 2 * pairs;
    let region_blocks: Vec<Block> = region.map(|r| spec.blocks()[r..].to_vec()).unwrap_or_default();
    let region_width: usize = region_blocks.iter().map(|b| b.width()).sum();

    let mut bits: Vec<u8> = pre.iter().flatten().copied().collect();
    let mut layout: Vec<Slot> = bits.iter().map(|&b| Slot::Bit(b)).collect();
    let mut e = GadgetExpansion::new();
    for j in 0..work {
        e.ancillas.push(Ancilla { line: bits.len() + j, state: AncillaState::Zero });
    }
    e.ancillas.push(Ancilla { line: bits.len() + work, state: AncillaState::Plus });
    layout.extend(std::iter::repeat_n(Slot::Work, work));
    layout.push(Slot::Hub);
    layout.extend(std::iter::repeat_n(Slot::Region, region_width));
    bits.extend(std::iter::repeat_n(0, work));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut blocks = vec![Block::Bits(bits), Block::Product(vec![[c(s, 0.0), c(s, 0.0)]])];
    blocks.extend(region_blocks);
    let input = InputSpec::new(blocks)?;

    for item in &items {
        let h = hub(&layout);
        match item {
            Item::Single(p, phi) => {
                let src = h - 1;
                let m = passed_parity(&layout[*p..src])?;
                let phi = if m == 1 { [phi[0], -phi[1]] } else { *phi };
                let u = unitary_with_first_column(&phi);
                let u = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
                e.append(single_qubit_unitary(src, h, &u)?);
                e.append(fswap_ladder(src, *p, &[]));
                layout[src] = Slot::Placed;
                move_slot(&mut layout, src, *p);
            }
            Item::Pair(p, psi) => {
                // second |+> from the work line next to the hub, lifted above the pair
                e.append(hadamard_gadget(h - 1, h)?);
                e.append(fswap_ladder(h - 1, h - 3, &[]));
                move_slot(&mut layout, h - 1, h - 3);
                let m = passed_parity(&layout[*p..h - 3])?;
                let mut psi = *psi;
                if m == 1 {
                    psi[1] = -psi[1];
                    psi[2] = -psi[2];
                }
                e.append(two_qubit_unitary(h - 2, &dmatrix_to_mat4(&unitary_with_first_column(&psi)))?);
                let id = ids.fresh("anc");
                e.measure(h - 3, id.clone(), Basis::Computational);
                e.append(fswap_ladder(h - 3, h, std::slice::from_ref(&id)));
                layout[h - 3] = Slot::Measured(id);
                move_slot(&mut layout, h - 3, h);
                for (from, to) in [(h - 3, *p), (h - 2, p + 1)] {
                    e.append(fswap_ladder(from, to, &[]));
                    layout[from] = Slot::Placed;
                    move_slot(&mut layout, from, to);
                }
            }
        }
    }
    if region_width > 0 {
        // measure the |+> line and move the ancilla group below the trailing blocks
        let h = hub(&layout);
        let hid = ids.fresh("anc");
        e.measure(h, hid.clone(), Basis::Computational);
        layout[h] = Slot::Measured(hid);
        let total = layout.len();
        let group = pairs + 1;
        for k in (0..group).rev() {
            let from = h + k;
            let to = total - group + k;
            let Slot::Measured(id) = layout[from].clone() else { unreachable!() };
            e.append(fswap_ladder(from, to, &[id]));
            move_slot(&mut layout, from, to);
        }
    }
    debug_assert!(layout.iter().take(spec.n()).all(|s| matches!(s, Slot::Bit(_) | Slot::Placed | Slot::Region)));
    Ok(CompiledInput { input, prologue: e })
}

/// A circuit whose input was compiled, with the prologue prepended.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub prologue_records: Vec<String>,
}

pub fn compile_circuit(c: &Circuit) -> Result<CompiledCircuit> {
    if c.has_macros() {
        return Err(Error::validation("macro-order", "lower macros before compiling the input"));
    }
    let compiled = compile_input(c.input(), &mut Ids::avoiding(c))?;
    let mut program: Vec<Instruction> = compiled.prologue.prologue;
    program.extend(c.program().iter().cloned());
    Ok(CompiledCircuit { circuit: Circuit::new(compiled.input, program)?, prologue_records: compiled.prologue.records })
}
