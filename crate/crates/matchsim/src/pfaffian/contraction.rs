use super::kernel::SkewMatrix;
use crate::error::{Error, Result};
use crate::majorana::TMatrix;
use crate::projectors::{apply_h, contract, ContractionSlot, SlotKind};

/// `O_{ij} = v_iᵀ H v_j` for `i < j`, completed antisymmetrically.
///
/// Every bra input slot (`Q`) must precede every other slot and every ket
/// input slot (`P`) must follow them; any other arrangement is a pair the
/// lookup tables mark as never occurring.
pub fn build_o(slots: &[ContractionSlot], seg_ts: &[TMatrix], n: usize) -> Result<SkewMatrix> {
    let mut phase = 0u8;
    for (i, s) in slots.iter().enumerate() {
        let rank = match s.kind {
            SlotKind::Q => 0,
            SlotKind::T | SlotKind::TConj => 1,
            SlotKind::P => 2,
        };
        if rank < phase {
            return Err(Error::InconsistentSlots(format!("slot {i} ({:?}) out of order", s.kind)));
        }
        phase = rank;
        if matches!(s.kind, SlotKind::T | SlotKind::TConj) && s.segment >= seg_ts.len() {
            return Err(Error::InconsistentSlots(format!("slot {i} refers to missing segment {}", s.segment)));
        }
        if s.owner >= n {
            return Err(Error::InconsistentSlots(format!("slot {i} owner {} outside register", s.owner)));
        }
    }
    let forms: Vec<_> = slots.iter().map(|s| s.form(seg_ts, n)).collect();
    let hv: Vec<_> = forms.iter().map(|v| apply_h(v)).collect();
    Ok(SkewMatrix::from_upper(slots.len(), |i, j| contract(&forms[i], &hv[j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, InputSpec, Instruction, Outcomes};
    use crate::linalg::*;
    use crate::oracle::random_mg_circuit;
    use crate::pfaffian::pfaffian;
    use crate::projectors::projector_chain;

    #[test]
    fn q_q_and_p_p_corners_vanish() {
        let c = random_mg_circuit(4, 10, 1);
        let chain = projector_chain(&c, &Outcomes::new(), 0, &[(0, 1)]).unwrap();
        let mut slots = vec![ContractionSlot::q(3), ContractionSlot::q(1)];
        slots.extend(chain.slots.iter().copied());
        slots.extend([ContractionSlot::p(1), ContractionSlot::p(2)]);
        let o = build_o(&slots, &chain.seg_ts, 4).unwrap();
        assert_eq!(o.get(0, 1), ZERO);
        assert_eq!(o.get(4, 5), ZERO);
        // q–p entries are δ of the lines
        assert_eq!(o.get(1, 4), ONE);
        assert_eq!(o.get(0, 5), ZERO);
    }

    #[test]
    fn out_of_order_slots_rejected() {
        let c = random_mg_circuit(3, 5, 2);
        let chain = projector_chain(&c, &Outcomes::new(), 0, &[(0, 0)]).unwrap();
        let mut slots = chain.slots.clone();
        slots.insert(0, ContractionSlot::p(1));
        assert!(matches!(build_o(&slots, &chain.seg_ts, 3), Err(Error::InconsistentSlots(_))));
    }

    #[test]
    fn single_prepared_line() {
        // input |10>, identity circuit, outcome 1 on line 0 has probability 1
        let c = Circuit::new(InputSpec::bits(&[1, 0]), vec![Instruction::final_(0, "x")]).unwrap();
        let chain = projector_chain(&c, &Outcomes::new(), 0, &[(0, 1)]).unwrap();
        let mut slots = vec![ContractionSlot::q(0)];
        slots.extend(chain.slots.iter().copied());
        slots.push(ContractionSlot::p(0));
        let o = build_o(&slots, &chain.seg_ts, 2).unwrap();
        assert_eq!(o.dim(), 4);
        assert!((pfaffian(&o) - ONE).norm() < 1e-15);
    }
}
