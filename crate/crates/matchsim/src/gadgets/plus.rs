use rand::Rng;

use super::{Ancilla, AncillaState, GadgetExpansion, Ids};
use crate::circuit::{Basis, Circuit, Guard, InputSpec, Matchgate};
use crate::error::{Error, Result};
use crate::linalg::*;
use crate::oracle::StateVector;
use crate::sampling::shot_rng;

/// `sin²(2x)`, the success probability of one attempt.
pub fn plus_state_success(x: f64) -> f64 {
    (2.0 * x).sin().powi(2)
}

/// Attempt budget `⌈ln(1/ε) / sin²(2x)⌉`.
pub fn rus_attempts(x: f64, eps: f64) -> usize {
    ((1.0 / eps).ln() / plus_state_success(x)).ceil() as usize
}

/// Real rotation `M` with `(M w)_0 = m`, `det M = 1`, for `|w| ≥ m`.
fn aim(w: [f64; 2], m: f64) -> Mat2 {
    let len = w[0].hypot(w[1]);
    let (u0, u1) = (w[0] / len, w[1] / len);
    let cos = (m / len).min(1.0);
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let r = [cos * u0 - sin * u1, cos * u1 + sin * u0];
    real2([[r[0], r[1]], [-r[1], r[0]]])
}

/// Final gate for ancilla state `ψ(x) ⊗ v_bit`, with `v_0 = (cos x, sin x)` and
/// `v_1 = (sin x, −cos x)`: after it, reading 0 on the upper line leaves
/// `|+>` on the lower one with probability `sin²(2x)`.
fn extractor(x: f64, bit: u8) -> Matchgate {
    let (cx, sx) = (x.cos(), x.sin());
    let v = if bit == 0 { [cx, sx] } else { [sx, -cx] };
    let s = [cx * v[0], cx * v[1], sx * v[0], sx * v[1]];
    let (e, o) = ([s[0], s[3]], [s[1], s[2]]);
    let m = e[0].hypot(e[1]).min(o[0].hypot(o[1]));
    Matchgate::from_components(aim(e, m), aim(o, m)).expect("rotations are valid matchgate blocks")
}

/// Y ⊗ Y as G(−X, X).
fn yy() -> Matchgate {
    Matchgate::from_components(scale2(&pauli_x(), -ONE), pauli_x()).expect("valid blocks")
}

/// One attempt at `|+>` from two `|0>` ancillas and tilted measurements.
///
/// Both ancillas are measured in the tilted basis, leaving `v_{r1} ⊗ v_{r2}`.
/// Since `Y v_r ∝ v_{1−r}` and `Y Z X ∝ I`, a guarded Y⊗Y on `r1` gives
/// `ψ(x) ⊗ v_{r1⊕r2}` up to phase; a parity-selected matchgate then makes
/// outcome 0 on the first ancilla herald `|+>` on the second. The success
/// record is the last one in `records`.
pub fn plus_state_gadget(x: f64, ancillas: [usize; 2], ids: &mut Ids) -> Result<GadgetExpansion> {
    if !(x > 0.0 && x <= std::f64::consts::FRAC_PI_4 + 1e-15) {
        return Err(Error::validation("tilt-range", format!("tilt angle {x} outside (0, π/4]")));
    }
    let [a, b] = ancillas;
    if b != a + 1 {
        return Err(Error::validation("macro-layout", "plus_state ancillas must be adjacent"));
    }
    let mut e = GadgetExpansion::new();
    let (r1, r2, ok) = (ids.fresh("tilt"), ids.fresh("tilt"), ids.fresh("herald"));
    let tilt = Basis::Tilted { x, phase: 0.0 };
    e.measure(a, r1.clone(), tilt);
    e.measure(b, r2.clone(), tilt);
    e.guarded(a, yy(), Guard::new(&[&r1], 1));
    e.guarded(a, extractor(x, 0), Guard::new(&[&r1, &r2], 0));
    e.guarded(a, extractor(x, 1), Guard::new(&[&r1, &r2], 1));
    e.measure(a, ok, Basis::Computational);
    e.ancillas.push(Ancilla { line: a, state: AncillaState::Zero });
    e.ancillas.push(Ancilla { line: b, state: AncillaState::Zero });
    Ok(e)
}

/// Result of a repeat-until-success run on the oracle.
#[derive(Debug, Clone)]
pub struct RusOutcome {
    pub attempts: usize,
    /// Fidelity of the heralded second ancilla with `|+>`.
    pub fidelity: f64,
}

/// Repeats [`plus_state_gadget`] on fresh ancillas, drawing outcomes on the
/// oracle, until the herald reads 0.
pub fn plus_state_rus(x: f64, max_attempts: Option<usize>, seed: u64) -> Result<RusOutcome> {
    let budget = max_attempts.unwrap_or_else(|| rus_attempts(x, 1e-6));
    let mut ids = Ids::new();
    let e = plus_state_gadget(x, [0, 1], &mut ids)?;
    let circ = Circuit::new(InputSpec::zeros(2), e.prologue)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for attempt in 0..budget {
        let mut rng = shot_rng(seed, attempt as u64);
        let mut st = StateVector::from_input(circ.input())?;
        let mut outcomes = crate::circuit::Outcomes::new();
        let mut herald = 1;
        for ins in circ.program() {
            match ins {
                crate::circuit::Instruction::Gate { line, gate, guard } => {
                    if guard.as_ref().map_or(Ok(true), |g| g.fires(&outcomes))? {
                        st.apply_gate(*line, gate);
                    }
                }
                crate::circuit::Instruction::Measure { line, id, basis, .. } => {
                    let mut trial = st.clone();
                    let p0 = trial.measure(*line, *basis, 0);
                    let bit = if rng.random::<f64>() < p0 { 0 } else { 1 };
                    st.measure(*line, *basis, bit);
                    outcomes.insert(id.clone(), bit);
                    herald = bit;
                }
                crate::circuit::Instruction::Macro(_) => unreachable!(),
            }
        }
        if herald == 0 {
            return Ok(RusOutcome { attempts: attempt + 1, fidelity: st.subsystem_fidelity(&[1], &[c(s, 0.0), c(s, 0.0)]) });
        }
    }
    let bound = 1.0 - (1.0 - plus_state_success(x)).powi(budget as i32);
    Err(Error::MaxAttemptsExceeded { attempts: budget, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::run_branches;

    fn branches(x: f64) -> Vec<crate::oracle::Branch> {
        let mut ids = Ids::new();
        let e = plus_state_gadget(x, [0, 1], &mut ids).unwrap();
        run_branches(&Circuit::new(InputSpec::zeros(2), e.prologue).unwrap()).unwrap()
    }

    fn herald_stats(x: f64) -> (f64, f64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut p_ok = 0.0;
        let mut worst: f64 = 1.0;
        for b in branches(x) {
            let ok = b.outcomes.iter().find(|(k, _)| k.starts_with("_herald")).unwrap().1;
            if *ok == 0 {
                p_ok += b.prob;
                worst = worst.min(b.state.subsystem_fidelity(&[1], &[c(s, 0.0), c(s, 0.0)]));
            }
        }
        (p_ok, worst)
    }

    #[test]
    fn success_probability_matches_formula() {
        let pi = std::f64::consts::PI;
        let (p, _) = herald_stats(pi / 4.0);
        assert!((p - 1.0).abs() < 1e-9);
        let (p, _) = herald_stats(pi / 8.0);
        assert!((p - 0.5).abs() < 1e-9);
        for x in [0.05, 0.3, 0.6, pi / 12.0] {
            let (p, f) = herald_stats(x);
            assert!((p - plus_state_success(x)).abs() < 1e-9);
            assert!(f > 1.0 - 1e-9);
        }
    }

    #[test]
    fn every_tilt_branch_succeeds_equally() {
        let x = std::f64::consts::PI / 12.0;
        let mut per_branch = std::collections::BTreeMap::new();
        for b in branches(x) {
            let key: Vec<u8> = b.outcomes.iter().filter(|(k, _)| k.starts_with("_tilt")).map(|(_, v)| *v).collect();
            let ok = *b.outcomes.iter().find(|(k, _)| k.starts_with("_herald")).unwrap().1;
            let e = per_branch.entry(key).or_insert([0.0, 0.0]);
            e[ok as usize] += b.prob;
        }
        assert_eq!(per_branch.len(), 4);
        for [p0, p1] in per_branch.values() {
            assert!((p0 / (p0 + p1) - plus_state_success(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn rus_driver() {
        let x = std::f64::consts::PI / 12.0;
        assert_eq!(rus_attempts(x, 1e-6), 56);
        let out = plus_state_rus(x, None, 3).unwrap();
        assert!(out.fidelity > 1.0 - 1e-9);
        match plus_state_rus(0.01, Some(1), 1) {
            Err(Error::MaxAttemptsExceeded { attempts, bound }) => {
                assert_eq!(attempts, 1);
                assert!((bound - plus_state_success(0.01)).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tilt_range_checked() {
        let mut ids = Ids::new();
        assert!(plus_state_gadget(0.0, [0, 1], &mut ids).is_err());
        assert!(plus_state_gadget(1.0, [0, 1], &mut ids).is_err());
        assert!(plus_state_gadget(0.3, [0, 2], &mut ids).is_err());
    }
}
