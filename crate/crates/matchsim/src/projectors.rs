//! Conjugated measurement projectors as ordered linear forms in Majoranas.
//!
//! `U† Π_k(0) U = (Σ T_{kμ} c_μ)(Σ T*_{kν} c_ν)` and `Π_k(1)` swaps the two
//! factors. The joint probability of intermediate outcomes `y_1..y_J` and
//! final outcomes `x` is `<ψ| P̃_1 … P̃_J X̃ P̃_J … P̃_1 |ψ>`, where `P̃_t` uses
//! the T matrix of all gates before measurement `t` and `X̃` the T matrix of
//! the whole circuit.

use crate::circuit::{instantiate_segments, instantiate_until, Circuit, Outcomes};
use crate::error::Result;
use crate::linalg::*;
use crate::majorana::{extend_rotation, t_from_r, RotationMatrix, TMatrix, COMPOSITION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    /// `c_{2q}` from the bra input string.
    Q,
    /// Row `T_{owner,·}` of the slot's segment.
    T,
    /// Row `T*_{owner,·}`.
    TConj,
    /// `c_{2p}` from the ket input string.
    P,
}

/// One Majorana-linear factor of the probability expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionSlot {
    pub kind: SlotKind,
    /// Line of the measurement (T/TConj) or of the input 1-position (P/Q).
    pub owner: usize,
    /// Index into the segment T list; unused for P/Q.
    pub segment: usize,
}

impl ContractionSlot {
    pub fn q(line: usize) -> Self {
        ContractionSlot { kind: SlotKind::Q, owner: line, segment: 0 }
    }
    pub fn p(line: usize) -> Self {
        ContractionSlot { kind: SlotKind::P, owner: line, segment: 0 }
    }

    /// Dense coefficient vector over the `2n` Majoranas.
    pub fn form(&self, seg_ts: &[TMatrix], n: usize) -> Vec<C64> {
        match self.kind {
            SlotKind::Q | SlotKind::P => {
                let mut v = vec![ZERO; 2 * n];
                v[2 * self.owner] = ONE;
                v
            }
            SlotKind::T => seg_ts[self.segment].row(self.owner).to_vec(),
            SlotKind::TConj => seg_ts[self.segment].row(self.owner).iter().map(|z| z.conj()).collect(),
        }
    }
}

/// Two slots for the conjugated projector onto `bit` on `line`.
pub fn projector_slots(line: usize, bit: u8, segment: usize) -> [ContractionSlot; 2] {
    let t = ContractionSlot { kind: SlotKind::T, owner: line, segment };
    let tc = ContractionSlot { kind: SlotKind::TConj, owner: line, segment };
    if bit == 0 {
        [t, tc]
    } else {
        [tc, t]
    }
}

/// The conjugated measurement chain for one outcome assignment.
#[derive(Debug, Clone)]
pub struct ProjectorChain {
    /// Cumulative T matrices: one per intermediate measurement, then the
    /// full circuit if final outcomes are present.
    pub seg_ts: Vec<TMatrix>,
    pub slots: Vec<ContractionSlot>,
}

impl ProjectorChain {
    pub fn forms(&self, n: usize) -> Vec<Vec<C64>> {
        self.slots.iter().map(|s| s.form(&self.seg_ts, n)).collect()
    }
}

/// Builds the chain for the first `j` intermediate outcomes in `y` and the
/// listed `(line, bit)` final outcomes. With finals present, `j` must cover
/// every intermediate measurement.
pub fn projector_chain(c: &Circuit, y: &Outcomes, j: usize, finals: &[(usize, u8)]) -> Result<ProjectorChain> {
    let n = c.n();
    let segments = if finals.is_empty() { instantiate_until(c, y, j)? } else { instantiate_segments(c, y)? };
    let mut r = RotationMatrix::identity(n);
    let mut seg_ts = Vec::new();
    let mut adaptive = Vec::new();
    for seg in &segments {
        extend_rotation(&mut r, &seg.gates, COMPOSITION)?;
        match &seg.closed_by {
            Some((line, id)) if adaptive.len() < j => {
                seg_ts.push(t_from_r(&r));
                adaptive.push(projector_slots(*line, y[id], seg_ts.len() - 1));
            }
            _ => {}
        }
    }
    let mut slots: Vec<ContractionSlot> = adaptive.iter().flatten().copied().collect();
    if !finals.is_empty() {
        seg_ts.push(t_from_r(&r));
        let f = seg_ts.len() - 1;
        for &(line, bit) in finals {
            slots.extend(projector_slots(line, bit, f));
        }
    }
    for pair in adaptive.iter().rev() {
        slots.extend(pair.iter().copied());
    }
    Ok(ProjectorChain { seg_ts, slots })
}

/// `H v` for the vacuum contraction `H = ⊕ [[1, i], [−i, 1]]`.
pub fn apply_h(v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for k in 0..v.len() / 2 {
        let (a, b) = (v[2 * k], v[2 * k + 1]);
        out[2 * k] = a + I * b;
        out[2 * k + 1] = -I * a + b;
    }
    out
}

/// `uᵀ H v`.
pub fn contract(u: &[C64], hv: &[C64]) -> C64 {
    u.iter().zip(hv).map(|(a, b)| a * b).sum()
}
