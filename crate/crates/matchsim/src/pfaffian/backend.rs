use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use nalgebra::DMatrix;

use super::kernel::pfaffian_in_place;
use crate::circuit::{Basis, Circuit, Outcomes, RecordInfo, Role};
use crate::error::{Error, Result};
use crate::gadgets;
use crate::linalg::*;
use crate::projectors::{apply_h, contract, projector_chain};
use crate::sampling::{sample_chain, ChainModel, OutcomeRecord};

#[derive(Debug, Clone, Copy)]
pub struct PfaffianConfig {
    /// Widest entangled block accepted.
    pub max_block: usize,
    /// Inputs with a larger computational-basis support are first compiled
    /// into the bits ⊕ |+> ⊕ block form.
    pub max_support: usize,
    /// Most unassigned intermediate records summed over in one query.
    pub max_marginalized: usize,
    /// Check `Pf(O)² = det(O)` on every contraction matrix built.
    pub verify_pfaffians: bool,
}

impl Default for PfaffianConfig {
    fn default() -> Self {
        PfaffianConfig { max_block: 14, max_support: 16, max_marginalized: 12, verify_pfaffians: false }
    }
}

/// Pfaffian simulator for one circuit.
///
/// Macros are lowered and inputs outside the direct-support limit are
/// compiled on construction; records introduced by either step are hidden
/// from samples but take part in the chain rule.
pub struct PfaffianSim {
    circuit: Circuit,
    cfg: PfaffianConfig,
    support: Vec<(u64, C64)>,
    hidden: BTreeSet<String>,
    sequence: Vec<RecordInfo>,
    visible: Vec<String>,
    pairs: AtomicU64,
    pf_checks: Mutex<(u64, f64)>,
}

impl PfaffianSim {
    pub fn new(c: &Circuit) -> Result<Self> {
        PfaffianSim::with_config(c, PfaffianConfig::default())
    }

    pub fn with_config(c: &Circuit, cfg: PfaffianConfig) -> Result<Self> {
        let visible: Vec<String> = c.records().into_iter().map(|r| r.id).collect();
        let mut hidden = BTreeSet::new();
        let mut circuit = c.clone();
        if circuit.has_macros() {
            let lowered = gadgets::lower(&circuit)?;
            hidden.extend(lowered.new_records);
            circuit = lowered.circuit;
        }
        if !circuit.all_computational() {
            return Err(Error::BackendInapplicable("pfaffian backend needs computational-basis measurements".into()));
        }
        let direct = circuit.input().max_entangled_width() <= cfg.max_block && circuit.input().basis_expansion(cfg.max_support).is_ok();
        if !direct {
            let compiled = gadgets::compile_circuit(&circuit)?;
            hidden.extend(compiled.prologue_records);
            circuit = compiled.circuit;
        }
        let width = circuit.input().max_entangled_width();
        if width > cfg.max_block {
            return Err(Error::BlockTooLarge { width, cap: cfg.max_block });
        }
        let support = circuit.input().basis_expansion(cfg.max_support.max(1 << (cfg.max_block + 1)))?;
        let mut sequence: Vec<RecordInfo> = circuit.intermediate_records();
        sequence.extend(circuit.final_records());
        Ok(PfaffianSim {
            circuit,
            cfg,
            support,
            hidden,
            sequence,
            visible,
            pairs: AtomicU64::new(0),
            pf_checks: Mutex::new((0, 0.0)),
        })
    }

    /// The circuit actually simulated (after lowering and input compilation).
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn support(&self) -> &[(u64, C64)] {
        &self.support
    }

    /// Record ids of the original circuit, in program order.
    pub fn visible_records(&self) -> &[String] {
        &self.visible
    }

    pub fn hidden_records(&self) -> &BTreeSet<String> {
        &self.hidden
    }

    /// Number of `(w, w′)` Pfaffian evaluations so far.
    pub fn pairs_evaluated(&self) -> u64 {
        self.pairs.load(Ordering::Relaxed)
    }

    /// `(count, max relative |Pf² − det| / |det|)` when verification is on.
    pub fn pfaffian_checks(&self) -> (u64, f64) {
        *self.pf_checks.lock().unwrap()
    }

    /// Probability of a partial assignment of record ids.
    ///
    /// Final records left out are marginalised by omitting their projectors.
    /// Intermediate records left out are summed over when they precede an
    /// assigned record (all of them, if any final record is assigned) and
    /// ignored otherwise.
    pub fn prob(&self, assignment: &[(&str, u8)]) -> Result<f64> {
        let inter: Vec<RecordInfo> = self.circuit.intermediate_records();
        let finals = self.circuit.final_records();
        let mut y = Outcomes::new();
        let mut fin = Vec::new();
        let mut last_inter = 0usize;
        for (id, bit) in assignment {
            if let Some(pos) = inter.iter().position(|r| r.id == *id) {
                y.insert(id.to_string(), bit & 1);
                last_inter = last_inter.max(pos + 1);
            } else if let Some(r) = finals.iter().find(|r| r.id == *id) {
                fin.push((r.line, bit & 1));
            } else {
                return Err(Error::validation("record-exists", format!("no record `{id}`")));
            }
        }
        let j = if fin.is_empty() { last_inter } else { inter.len() };
        let free: Vec<&RecordInfo> = inter[..j].iter().filter(|r| !y.contains_key(&r.id)).collect();
        if free.len() > self.cfg.max_marginalized {
            return Err(Error::CapExceeded(format!("{} unassigned intermediate records to sum over", free.len())));
        }
        let mut total = 0.0;
        for mask in 0u64..1 << free.len() {
            let mut yy = y.clone();
            for (b, r) in free.iter().enumerate() {
                yy.insert(r.id.clone(), (mask >> b & 1) as u8);
            }
            total += self.joint(&yy, j, &fin)?;
        }
        Ok(total.clamp(0.0, 1.0))
    }

    /// `p(y_1..y_j, x)` for the first `j` intermediate records (all assigned
    /// in `y`) and final outcomes given as `(line, bit)`.
    pub fn joint(&self, y: &Outcomes, j: usize, finals: &[(usize, u8)]) -> Result<f64> {
        let n = self.circuit.n();
        let chain = projector_chain(&self.circuit, y, j, finals)?;
        let forms = chain.forms(n);
        let hv: Vec<Vec<C64>> = forms.iter().map(|v| apply_h(v)).collect();
        // vᵀH, needed against ket unit vectors
        let vh: Vec<Vec<C64>> = forms
            .iter()
            .map(|v| {
                let mut out = vec![ZERO; 2 * n];
                for k in 0..n {
                    out[2 * k] = v[2 * k] - I * v[2 * k + 1];
                    out[2 * k + 1] = I * v[2 * k] + v[2 * k + 1];
                }
                out
            })
            .collect();
        let m = forms.len();
        let mut mid = vec![ZERO; m * m];
        for a in 0..m {
            for b in a + 1..m {
                mid[a * m + b] = contract(&forms[a], &hv[b]);
            }
        }
        let lines = |w: u64| -> Vec<usize> { (0..n).filter(|l| w >> l & 1 == 1).collect() };
        let mut total = ZERO;
        for (ia, &(w, lw)) in self.support.iter().enumerate() {
            for &(wp, lwp) in &self.support[ia..] {
                if (w.count_ones() + wp.count_ones()) % 2 == 1 {
                    continue;
                }
                // bra string first, in descending line order; ket string last, ascending
                let mut q = lines(wp);
                q.reverse();
                let p = lines(w);
                let d = q.len() + m + p.len();
                let mut o = vec![ZERO; d * d];
                let nq = q.len();
                for (a, &qa) in q.iter().enumerate() {
                    for b in 0..m {
                        o[a * d + nq + b] = hv[b][2 * qa];
                    }
                    for (b, &pb) in p.iter().enumerate() {
                        if qa == pb {
                            o[a * d + nq + m + b] = ONE;
                        }
                    }
                }
                for a in 0..m {
                    for b in a + 1..m {
                        o[(nq + a) * d + nq + b] = mid[a * m + b];
                    }
                    for (b, &pb) in p.iter().enumerate() {
                        o[(nq + a) * d + nq + m + b] = vh[a][2 * pb];
                    }
                }
                for a in 0..d {
                    for b in a + 1..d {
                        o[b * d + a] = -o[a * d + b];
                    }
                }
                if self.cfg.verify_pfaffians {
                    self.verify(&o, d);
                }
                let pf = pfaffian_in_place(&mut o, d);
                self.pairs.fetch_add(1, Ordering::Relaxed);
                let term = lwp.conj() * lw * pf;
                if w == wp {
                    total += term;
                } else {
                    total += 2.0 * term.re;
                }
            }
        }
        if total.im.abs() > 1e-10 || total.re < -1e-9 {
            return Err(Error::ImaginaryResidual { value: if total.re < -1e-9 { total.re } else { total.im } });
        }
        Ok(total.re.clamp(0.0, 1.0))
    }

    fn verify(&self, o: &[C64], d: usize) {
        if d == 0 {
            return;
        }
        let det = DMatrix::from_row_slice(d, d, o).determinant();
        let pf = pfaffian_in_place(&mut o.to_vec(), d);
        let scale = det.norm().max(1e-300);
        let rel = if det.norm() < 1e-200 { (pf * pf).norm() } else { (pf * pf - det).norm() / scale };
        let mut g = self.pf_checks.lock().unwrap();
        g.0 += 1;
        g.1 = g.1.max(rel);
    }

    /// Weak simulation by the chain rule. Records carry original ids only.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<OutcomeRecord>> {
        if self.circuit.final_records().is_empty() {
            return Err(Error::validation("final-present", "sampling needs at least one final measurement"));
        }
        let recs = sample_chain(self, shots, seed)?;
        Ok(recs.into_iter().map(|r| r.restrict(&self.visible)).collect())
    }

    /// Like [`PfaffianSim::sample`] but keeps hidden records.
    pub fn sample_full(&self, shots: usize, seed: u64) -> Result<Vec<OutcomeRecord>> {
        sample_chain(self, shots, seed)
    }
}

impl ChainModel for PfaffianSim {
    fn sequence(&self) -> &[RecordInfo] {
        &self.sequence
    }

    fn prefix_prob(&self, bits: &[u8]) -> Result<f64> {
        let mut y = Outcomes::new();
        let mut finals = Vec::new();
        let mut j = 0;
        for (r, b) in self.sequence.iter().zip(bits) {
            match r.role {
                Role::Intermediate => {
                    y.insert(r.id.clone(), *b);
                    j += 1;
                }
                Role::Final => finals.push((r.line, *b)),
            }
        }
        debug_assert!(self.sequence.iter().all(|r| r.basis == Basis::Computational));
        self.joint(&y, j, &finals)
    }
}
