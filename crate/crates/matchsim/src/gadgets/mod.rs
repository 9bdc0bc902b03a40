//! Gadget constructions as macro expansions into primitive instructions.
//!
//! Every expansion emits validated matchgates, guarded matchgates and
//! measurements only. Ancilla lines are named by the caller; expansions never
//! renumber lines outside the ones they are given, except for the documented
//! disposal moves.

mod basic;
mod compile;
mod kak;
mod plus;
mod swap;

use std::collections::BTreeSet;
use std::ops::AddAssign;

pub use basic::{fswap_ladder, hadamard_gadget, single_qubit_unitary, toffoli_gadget};
pub use compile::{compile_circuit, compile_input, prepare_two_qubit_inputs, CompiledCircuit, CompiledInput};
pub use kak::{kak_decompose, two_qubit_unitary, Kak};
pub use plus::{plus_state_gadget, plus_state_rus, plus_state_success, rus_attempts, RusOutcome};
pub use swap::{gadgetize_swaps, swap_gadget, swap_gadget_postselected, SwapGadgetization, TELEPORT_CORRECTIONS};

use crate::circuit::{Basis, Circuit, Guard, Instruction, Macro, Matchgate, Role};
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostReport {
    pub gates: usize,
    pub measurements: usize,
    pub magic_states: usize,
}

impl AddAssign for CostReport {
    fn add_assign(&mut self, o: CostReport) {
        self.gates += o.gates;
        self.measurements += o.measurements;
        self.magic_states += o.magic_states;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaState {
    Zero,
    Plus,
    Magic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ancilla {
    pub line: usize,
    pub state: AncillaState,
}

/// Primitive instructions produced by one gadget.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GadgetExpansion {
    pub prologue: Vec<Instruction>,
    pub ancillas: Vec<Ancilla>,
    /// Intermediate records introduced, in program order.
    pub records: Vec<String>,
    pub cost: CostReport,
}

impl GadgetExpansion {
    pub fn new() -> Self {
        GadgetExpansion::default()
    }

    pub fn is_empty(&self) -> bool {
        self.prologue.is_empty()
    }

    pub fn len(&self) -> usize {
        self.prologue.len()
    }

    pub(crate) fn gate(&mut self, line: usize, g: Matchgate) {
        self.prologue.push(Instruction::gate(line, g));
        self.cost.gates += 1;
    }

    pub(crate) fn guarded(&mut self, line: usize, g: Matchgate, guard: Guard) {
        self.prologue.push(Instruction::guarded(line, g, guard));
        self.cost.gates += 1;
    }

    pub(crate) fn measure(&mut self, line: usize, id: String, basis: Basis) {
        self.prologue.push(Instruction::Measure { line, id: id.clone(), role: Role::Intermediate, basis });
        self.records.push(id);
        self.cost.measurements += 1;
    }

    pub(crate) fn append(&mut self, other: GadgetExpansion) {
        self.prologue.extend(other.prologue);
        self.ancillas.extend(other.ancillas);
        self.records.extend(other.records);
        self.cost += other.cost;
    }
}

/// Fresh record ids that avoid every id already in use.
#[derive(Debug, Clone)]
pub struct Ids {
    used: BTreeSet<String>,
    next: usize,
}

impl Ids {
    pub fn new() -> Self {
        Ids { used: BTreeSet::new(), next: 1 }
    }

    pub fn avoiding(c: &Circuit) -> Self {
        let mut ids = Ids::new();
        ids.used.extend(c.records().into_iter().map(|r| r.id));
        // macros introduce ids only through expansion, but ladder guards name existing ones
        for ins in c.program() {
            if let Instruction::Macro(Macro::FswapLadder { guard_ids, .. }) = ins {
                ids.used.extend(guard_ids.iter().cloned());
            }
        }
        ids
    }

    pub fn fresh(&mut self, stem: &str) -> String {
        loop {
            let id = format!("_{stem}{}", self.next);
            self.next += 1;
            if self.used.insert(id.clone()) {
                return id;
            }
        }
    }
}

impl Default for Ids {
    fn default() -> Self {
        Ids::new()
    }
}

/// Output of [`lower`].
#[derive(Debug, Clone)]
pub struct Lowered {
    pub circuit: Circuit,
    /// Intermediate records introduced by the expansions.
    pub new_records: Vec<String>,
    pub cost: CostReport,
}

/// Expands one non-SWAP macro.
pub fn expand_macro(m: &Macro, ids: &mut Ids) -> Result<GadgetExpansion> {
    match m {
        Macro::Hadamard { target, ancilla } => hadamard_gadget(*target, *ancilla),
        Macro::SingleQubit { target, ancilla, u } => single_qubit_unitary(*target, *ancilla, u),
        Macro::TwoQubit { line, u } => two_qubit_unitary(*line, u),
        Macro::PrepareTwoQubitInputs { line, states } => prepare_two_qubit_inputs(*line, states, ids),
        Macro::Toffoli { controls, target, ancilla } => Ok(toffoli_gadget(*controls, *target, *ancilla, ids)),
        Macro::FswapLadder { from, to, guard_ids } => Ok(fswap_ladder(*from, *to, guard_ids)),
        Macro::PlusState { x, ancillas } => plus_state_gadget(*x, *ancillas, ids),
        Macro::Swap { .. } => unreachable!("swap macros are gadgetised as a whole circuit"),
    }
}

/// Expands every macro except SWAP, which stays as a macro.
pub fn expand_macros(c: &Circuit) -> Result<Lowered> {
    expand_with(c, &mut Ids::avoiding(c))
}

fn expand_with(c: &Circuit, ids: &mut Ids) -> Result<Lowered> {
    let mut new_records = Vec::new();
    let mut cost = CostReport::default();
    let mut program = Vec::with_capacity(c.program().len());
    for ins in c.program() {
        match ins {
            Instruction::Macro(m) if !matches!(m, Macro::Swap { .. }) => {
                let e = expand_macro(m, ids)?;
                new_records.extend(e.records.iter().cloned());
                cost += e.cost;
                program.extend(e.prologue);
            }
            other => program.push(other.clone()),
        }
    }
    Ok(Lowered { circuit: Circuit::new(c.input().clone(), program)?, new_records, cost })
}

/// Replaces every macro by primitives. SWAPs become adaptive SWAP gadgets,
/// each consuming a Magic block appended to the input.
pub fn lower(c: &Circuit) -> Result<Lowered> {
    let mut ids = Ids::avoiding(c);
    let mut out = expand_with(c, &mut ids)?;
    let g = gadgetize_swaps_with(&out.circuit, &mut ids)?;
    out.new_records.extend(g.new_records);
    out.cost += g.cost;
    out.circuit = g.adaptive;
    Ok(out)
}

pub(crate) use swap::gadgetize_swaps_with;
