use super::matchgate::Matchgate;
use super::program::{Circuit, Instruction, Outcomes, Role};
use crate::error::{Error, Result};

/// A maximal run of resolved gates, closed by an intermediate measurement
/// (or by the end of the program for the last segment).
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub gates: Vec<(usize, Matchgate)>,
    /// `(line, record id)` of the closing intermediate measurement.
    pub closed_by: Option<(usize, String)>,
}

/// Resolves every guard against `outcomes` and splits the gate list at each
/// intermediate measurement. Segments `1..=t` concatenated give the gates
/// applied before measurement `t`.
pub fn instantiate_segments(c: &Circuit, outcomes: &Outcomes) -> Result<Vec<Segment>> {
    instantiate_until(c, outcomes, usize::MAX)
}

/// Like [`instantiate_segments`] but stops after `count` intermediate
/// measurements, so later records need no assignment.
pub fn instantiate_until(c: &Circuit, outcomes: &Outcomes, count: usize) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    let mut current = Vec::new();
    for ins in c.program() {
        match ins {
            Instruction::Gate { line, gate, guard } => {
                let apply = match guard {
                    None => true,
                    Some(g) => g.fires(outcomes)?,
                };
                if apply {
                    current.push((*line, gate.clone()));
                }
            }
            Instruction::Measure { line, id, role: Role::Intermediate, .. } => {
                segments.push(Segment { gates: std::mem::take(&mut current), closed_by: Some((*line, id.clone())) });
                if segments.len() == count {
                    return Ok(segments);
                }
            }
            Instruction::Measure { .. } => {}
            Instruction::Macro(m) => {
                return Err(Error::BackendInapplicable(format!("macro `{}` must be lowered first", m.name())));
            }
        }
    }
    segments.push(Segment { gates: current, closed_by: None });
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Guard, InputSpec};

    #[test]
    fn no_measurements_single_segment() {
        let c = Circuit::new(
            InputSpec::zeros(3),
            vec![Instruction::gate(0, Matchgate::fswap()), Instruction::gate(1, Matchgate::xx()), Instruction::final_(2, "x")],
        )
        .unwrap();
        let s = instantiate_segments(&c, &Outcomes::new()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].gates.len(), 2);
    }

    #[test]
    fn guard_selects_second_segment() {
        let c = Circuit::new(
            InputSpec::zeros(2),
            vec![
                Instruction::gate(0, Matchgate::hadamard_gadget()),
                Instruction::intermediate(0, "m"),
                Instruction::guarded(0, Matchgate::fswap(), Guard::new(&["m"], 1)),
                Instruction::guarded(0, Matchgate::xx(), Guard::new(&["m"], 0)),
                Instruction::final_(1, "x"),
            ],
        )
        .unwrap();
        let mut o = Outcomes::new();
        assert!(matches!(instantiate_segments(&c, &o), Err(Error::UnresolvedGuard(_))));
        assert_eq!(instantiate_until(&c, &o, 1).unwrap().len(), 1);
        o.insert("m".into(), 0);
        let s0 = instantiate_segments(&c, &o).unwrap();
        o.insert("m".into(), 1);
        let s1 = instantiate_segments(&c, &o).unwrap();
        assert_eq!(s0.len(), 2);
        assert_ne!(s0[1], s1[1]);
        assert_eq!(s1[1].gates[0].1, Matchgate::fswap());
    }
}
