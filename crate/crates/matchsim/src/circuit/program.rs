use std::collections::{BTreeMap, BTreeSet};

use super::input::InputSpec;
use super::matchgate::Matchgate;
use crate::error::{Error, Result};
use crate::linalg::*;

/// Fires when the XOR of the referenced outcome bits equals `parity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    ids: Vec<String>,
    parity: u8,
}

impl Guard {
    pub fn new<S: AsRef<str>>(ids: &[S], parity: u8) -> Self {
        let set: BTreeSet<String> = ids.iter().map(|s| s.as_ref().to_string()).collect();
        Guard { ids: set.into_iter().collect(), parity: parity & 1 }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    /// `Ok(true)` if the guarded instruction applies under `outcomes`.
    pub fn fires(&self, outcomes: &Outcomes) -> Result<bool> {
        let mut acc = 0u8;
        for id in &self.ids {
            match outcomes.get(id) {
                Some(b) => acc ^= b & 1,
                None => return Err(Error::UnresolvedGuard(id.clone())),
            }
        }
        Ok(acc == self.parity)
    }
}

pub type Outcomes = BTreeMap<String, u8>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Computational,
    /// Outcome 0 ↔ cos x|0> + e^{iφ} sin x|1>, outcome 1 ↔ sin x|0> − e^{iφ} cos x|1>.
    Tilted { x: f64, phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Intermediate,
    Final,
}

/// Higher-level instructions lowered by [`crate::gadgets::lower`].
#[derive(Debug, Clone, PartialEq)]
pub enum Macro {
    /// SWAP of lines `line`, `line + 1`; realised with one magic block.
    Swap { line: usize },
    Hadamard { target: usize, ancilla: usize },
    SingleQubit { target: usize, ancilla: usize, u: Mat2 },
    /// Acts on `line`, `line + 1` using |+> ancillas on `line − 1` and `line + 2`.
    TwoQubit { line: usize, u: Mat4 },
    /// Layout `|+>|00>|+>|00>…|+>` starting at `line`.
    PrepareTwoQubitInputs { line: usize, states: Vec<[C64; 4]> },
    Toffoli { controls: [usize; 2], target: usize, ancilla: usize },
    FswapLadder { from: usize, to: usize, guard_ids: Vec<String> },
    /// One attempt of the |+> preparation from tilted measurements.
    PlusState { x: f64, ancillas: [usize; 2] },
}

impl Macro {
    pub fn name(&self) -> &'static str {
        match self {
            Macro::Swap { .. } => "swap_gadget",
            Macro::Hadamard { .. } => "hadamard_gadget",
            Macro::SingleQubit { .. } => "single_qubit_unitary",
            Macro::TwoQubit { .. } => "two_qubit_unitary",
            Macro::PrepareTwoQubitInputs { .. } => "prepare_two_qubit_inputs",
            Macro::Toffoli { .. } => "toffoli",
            Macro::FswapLadder { .. } => "fswap_ladder",
            Macro::PlusState { .. } => "plus_state",
        }
    }

    /// Every line the macro touches.
    pub fn lines(&self) -> Vec<usize> {
        match self {
            Macro::Swap { line } => vec![*line, line + 1],
            Macro::Hadamard { target, ancilla } | Macro::SingleQubit { target, ancilla, .. } => vec![*target, *ancilla],
            Macro::TwoQubit { line, .. } => {
                let mut v = vec![*line, line + 1, line + 2];
                if *line > 0 {
                    v.push(line - 1);
                }
                v
            }
            Macro::PrepareTwoQubitInputs { line, states } => (*line..line + 3 * states.len() + 1).collect(),
            Macro::Toffoli { controls, target, ancilla } => {
                let lo = *controls.iter().chain([target, ancilla]).min().unwrap();
                let hi = *controls.iter().chain([target, ancilla]).max().unwrap();
                (lo..=hi).collect()
            }
            Macro::FswapLadder { from, to, .. } => (*from.min(to)..=*from.max(to)).collect(),
            Macro::PlusState { ancillas, .. } => vec![ancillas[0], ancillas[1]],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let nn = |cond: bool, what: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::validation("macro-layout", format!("{}: {what}", self.name())))
            }
        };
        match self {
            Macro::Swap { line } => nn(line + 1 < n, "line out of range"),
            Macro::Hadamard { target, ancilla } => nn(target.abs_diff(*ancilla) == 1 && target.max(ancilla) < &n, "ancilla must neighbour target"),
            Macro::SingleQubit { target, ancilla, u } => {
                nn(target.abs_diff(*ancilla) == 1 && target.max(ancilla) < &n, "ancilla must neighbour target")?;
                let r = unitarity_residual2(u);
                if r > 1e-10 {
                    return Err(Error::NotUnitary { residual: r });
                }
                Ok(())
            }
            Macro::TwoQubit { line, u } => {
                nn(*line >= 1 && line + 2 < n, "needs ancillas above and below")?;
                let r = unitarity_residual4(u);
                if r > 1e-10 {
                    return Err(Error::NotUnitary { residual: r });
                }
                Ok(())
            }
            Macro::PrepareTwoQubitInputs { line, states } => {
                nn(!states.is_empty() && line + 3 * states.len() < n, "layout exceeds register")?;
                for s in states {
                    let nrm = norm(s);
                    if (nrm - 1.0).abs() > 1e-12 {
                        return Err(Error::validation("unit-norm", format!("pair state norm {nrm}")));
                    }
                }
                Ok(())
            }
            Macro::Toffoli { controls, target, ancilla } => {
                let all = [controls[0], controls[1], *target, *ancilla];
                let distinct: BTreeSet<_> = all.iter().collect();
                nn(distinct.len() == 4 && all.iter().all(|&l| l < n), "lines must be distinct and in range")?;
                nn(target.abs_diff(*ancilla) >= 1, "ancilla must differ from target")
            }
            Macro::FswapLadder { from, to, .. } => nn(*from < n && *to < n, "line out of range"),
            Macro::PlusState { x, ancillas } => {
                nn(ancillas[1] == ancillas[0] + 1 && ancillas[1] < n, "ancillas must be adjacent")?;
                nn(*x > 0.0 && *x <= std::f64::consts::FRAC_PI_4 + 1e-15, "x must lie in (0, π/4]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    /// Matchgate on lines `line`, `line + 1`.
    Gate { line: usize, gate: Matchgate, guard: Option<Guard> },
    Measure { line: usize, id: String, role: Role, basis: Basis },
    Macro(Macro),
}

impl Instruction {
    pub fn gate(line: usize, gate: Matchgate) -> Self {
        Instruction::Gate { line, gate, guard: None }
    }

    pub fn guarded(line: usize, gate: Matchgate, guard: Guard) -> Self {
        Instruction::Gate { line, gate, guard: Some(guard) }
    }

    pub fn measure(line: usize, id: impl Into<String>, role: Role) -> Self {
        Instruction::Measure { line, id: id.into(), role, basis: Basis::Computational }
    }

    pub fn intermediate(line: usize, id: impl Into<String>) -> Self {
        Instruction::measure(line, id, Role::Intermediate)
    }

    pub fn final_(line: usize, id: impl Into<String>) -> Self {
        Instruction::measure(line, id, Role::Final)
    }

    fn lines(&self) -> Vec<usize> {
        match self {
            Instruction::Gate { line, .. } => vec![*line, line + 1],
            Instruction::Measure { line, .. } => vec![*line],
            Instruction::Macro(m) => m.lines(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordInfo {
    pub id: String,
    pub line: usize,
    pub role: Role,
    pub basis: Basis,
    /// Position in the program.
    pub index: usize,
}

/// Validated nearest-neighbour program with its input.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    input: InputSpec,
    program: Vec<Instruction>,
}

impl Circuit {
    pub fn new(input: InputSpec, program: Vec<Instruction>) -> Result<Self> {
        let c = Circuit { n: input.n(), input, program };
        c.validate()?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn input(&self) -> &InputSpec {
        &self.input
    }
    pub fn program(&self) -> &[Instruction] {
        &self.program
    }

    pub fn into_parts(self) -> (InputSpec, Vec<Instruction>) {
        (self.input, self.program)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::validation("line-count", "n must be positive"));
        }
        let mut records: BTreeMap<&str, Role> = BTreeMap::new();
        let mut finalised: BTreeSet<usize> = BTreeSet::new();
        for (pos, ins) in self.program.iter().enumerate() {
            for l in ins.lines() {
                if finalised.contains(&l) {
                    return Err(Error::validation(
                        "final-last",
                        format!("instruction {pos} touches line {} after its final measurement", l + 1),
                    ));
                }
            }
            match ins {
                Instruction::Gate { line, guard, .. } => {
                    if line + 1 >= n {
                        return Err(Error::validation(
                            "nearest-neighbour",
                            format!("gate line {} outside 1..={}", line + 1, n.saturating_sub(1)),
                        ));
                    }
                    if let Some(g) = guard {
                        for id in g.ids() {
                            match records.get(id.as_str()) {
                                Some(Role::Intermediate) => {}
                                Some(Role::Final) => {
                                    return Err(Error::validation("guard-final", format!("guard references final record `{id}`")))
                                }
                                None => {
                                    return Err(Error::validation("guard-earlier", format!("guard references unknown or later record `{id}`")))
                                }
                            }
                        }
                    }
                }
                Instruction::Measure { line, id, role, basis } => {
                    if *line >= n {
                        return Err(Error::validation("line-range", format!("measurement line {} outside 1..={n}", line + 1)));
                    }
                    if id.is_empty() {
                        return Err(Error::validation("record-id", "empty record id"));
                    }
                    if records.insert(id.as_str(), *role).is_some() {
                        return Err(Error::validation("unique-record", format!("duplicate record id `{id}`")));
                    }
                    if let Basis::Tilted { x, phase } = basis {
                        if !(x.is_finite() && phase.is_finite() && *x > 0.0 && *x <= std::f64::consts::FRAC_PI_4 + 1e-15) {
                            return Err(Error::validation("tilt-range", format!("tilt angle {x} outside (0, π/4]")));
                        }
                    }
                    if *role == Role::Final {
                        finalised.insert(*line);
                    }
                }
                Instruction::Macro(m) => {
                    m.validate(n)?;
                    if let Macro::FswapLadder { guard_ids, .. } = m {
                        for id in guard_ids {
                            if records.get(id.as_str()) != Some(&Role::Intermediate) {
                                return Err(Error::validation("guard-earlier", format!("ladder guard `{id}` is not an earlier intermediate record")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Measurement records in program order.
    pub fn records(&self) -> Vec<RecordInfo> {
        self.program
            .iter()
            .enumerate()
            .filter_map(|(index, ins)| match ins {
                Instruction::Measure { line, id, role, basis } => Some(RecordInfo {
                    id: id.clone(),
                    line: *line,
                    role: *role,
                    basis: *basis,
                    index,
                }),
                _ => None,
            })
            .collect()
    }

    pub fn intermediate_records(&self) -> Vec<RecordInfo> {
        self.records().into_iter().filter(|r| r.role == Role::Intermediate).collect()
    }

    pub fn final_records(&self) -> Vec<RecordInfo> {
        self.records().into_iter().filter(|r| r.role == Role::Final).collect()
    }

    pub fn has_macros(&self) -> bool {
        self.program.iter().any(|i| matches!(i, Instruction::Macro(_)))
    }

    pub fn is_adaptive(&self) -> bool {
        self.program.iter().any(|i| matches!(i, Instruction::Measure { role: Role::Intermediate, .. }))
    }

    pub fn all_computational(&self) -> bool {
        self.records().iter().all(|r| r.basis == Basis::Computational)
    }

    pub fn gate_count(&self) -> usize {
        self.program.iter().filter(|i| matches!(i, Instruction::Gate { .. })).count()
    }
}
