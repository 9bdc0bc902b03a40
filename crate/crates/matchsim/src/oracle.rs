//! Dense state-vector reference simulator.
//!
//! Line `k` is bit `k` of the amplitude index. Gates act through in-place
//! 4×4 kernels; measurement branches are enumerated depth-first.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::*;
use crate::error::{Error, Result};
use crate::linalg::*;

pub const DEFAULT_MAX_LINES: usize = 14;
pub const HARD_MAX_LINES: usize = 20;
pub const MAX_INTERMEDIATE: usize = 20;
pub const DEFAULT_PRUNE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_input(input: &InputSpec) -> Result<Self> {
        let n = input.n();
        if n > HARD_MAX_LINES {
            return Err(Error::CapExceeded(format!("{n} lines exceed the oracle limit {HARD_MAX_LINES}")));
        }
        let mut amps = vec![ZERO; 1 << n];
        for (mask, a) in input.basis_expansion(1 << n)? {
            amps[mask as usize] = a;
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// 4×4 gate on lines `line` (upper, index MSB) and `line + 1`.
    pub fn apply_two(&mut self, line: usize, m: &Mat4) {
        let (bu, bl) = (1usize << line, 1usize << (line + 1));
        for base in 0..self.amps.len() {
            if base & (bu | bl) != 0 {
                continue;
            }
            let idx = [base, base | bl, base | bu, base | bu | bl];
            let v = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }

    pub fn apply_gate(&mut self, line: usize, g: &Matchgate) {
        self.apply_two(line, &g.to_mat4());
    }

    pub fn apply_single(&mut self, line: usize, m: &Mat2) {
        let b = 1usize << line;
        for base in 0..self.amps.len() {
            if base & b != 0 {
                continue;
            }
            let (v0, v1) = (self.amps[base], self.amps[base | b]);
            self.amps[base] = m[0][0] * v0 + m[0][1] * v1;
            self.amps[base | b] = m[1][0] * v0 + m[1][1] * v1;
        }
    }

    /// Probability of reading 1 on `line` in the computational basis.
    pub fn prob_one(&self, line: usize) -> f64 {
        let b = 1usize << line;
        self.amps.iter().enumerate().filter(|(i, _)| i & b != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects `line` onto `bit` and renormalises; returns the probability.
    pub fn collapse(&mut self, line: usize, bit: u8) -> f64 {
        let b = 1usize << line;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & b != 0) as u8) != bit {
                *a = ZERO;
            } else {
                p += a.norm_sqr();
            }
        }
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            for a in &mut self.amps {
                *a *= s;
            }
        }
        p
    }

    /// Measurement in `basis`, leaving the line in the observed basis vector.
    pub fn measure(&mut self, line: usize, basis: Basis, bit: u8) -> f64 {
        match basis {
            Basis::Computational => self.collapse(line, bit),
            Basis::Tilted { x, phase } => {
                let w = tilted_basis(x, phase);
                self.apply_single(line, &dagger2(&w));
                let p = self.collapse(line, bit);
                self.apply_single(line, &w);
                p
            }
        }
    }

    /// Applies the ideal SWAP of lines `line`, `line + 1`.
    pub fn apply_swap(&mut self, line: usize) {
        let mut s = [[ZERO; 4]; 4];
        s[0][0] = ONE;
        s[1][2] = ONE;
        s[2][1] = ONE;
        s[3][3] = ONE;
        self.apply_two(line, &s);
    }

    /// `Σ_r |<target, r|ψ>|²`: overlap of `target` on `lines` (first listed
    /// line is the target's MSB) with the state, summed over the rest.
    pub fn subsystem_fidelity(&self, lines: &[usize], target: &[C64]) -> f64 {
        let k = lines.len();
        assert_eq!(target.len(), 1 << k);
        let sub_mask: usize = lines.iter().map(|l| 1usize << l).sum();
        let mut overlaps: BTreeMap<usize, C64> = BTreeMap::new();
        for (i, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let mut t = 0usize;
            for (j, l) in lines.iter().enumerate() {
                if i >> l & 1 == 1 {
                    t |= 1 << (k - 1 - j);
                }
            }
            *overlaps.entry(i & !sub_mask).or_insert(ZERO) += target[t].conj() * a;
        }
        overlaps.values().map(|z| z.norm_sqr()).sum()
    }
}

/// Columns are the outcome-0 and outcome-1 basis vectors.
pub fn tilted_basis(x: f64, phase: f64) -> Mat2 {
    let e = C64::from_polar(1.0, phase);
    [[c(x.cos(), 0.0), c(x.sin(), 0.0)], [e * x.sin(), -e * x.cos()]]
}

/// Exact joint distribution over every measurement record.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDistribution {
    /// Record ids in program order; keys of `probs` follow this order.
    pub ids: Vec<String>,
    pub probs: BTreeMap<Vec<u8>, f64>,
    pub pruned_mass: f64,
}

impl BranchDistribution {
    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn prob(&self, assignment: &[(&str, u8)]) -> f64 {
        let pos: Vec<(usize, u8)> = assignment
            .iter()
            .map(|(id, b)| (self.ids.iter().position(|x| x == id).expect("unknown record id"), *b))
            .collect();
        self.probs.iter().filter(|(k, _)| pos.iter().all(|(i, b)| k[*i] == *b)).map(|(_, p)| p).sum()
    }

    /// Distribution of the listed records only.
    pub fn marginal(&self, ids: &[String]) -> BranchDistribution {
        let pos: Vec<usize> = ids.iter().map(|id| self.ids.iter().position(|x| x == id).expect("unknown record id")).collect();
        let mut probs = BTreeMap::new();
        for (k, p) in &self.probs {
            *probs.entry(pos.iter().map(|&i| k[i]).collect()).or_insert(0.0) += p;
        }
        BranchDistribution { ids: ids.to_vec(), probs, pruned_mass: self.pruned_mass }
    }
}

/// Renormalised conditional distribution given `constraints`.
pub fn post_select(dist: &BranchDistribution, constraints: &[(&str, u8)]) -> Result<BranchDistribution> {
    let pos: Vec<(usize, u8)> = constraints
        .iter()
        .map(|(id, b)| {
            dist.ids
                .iter()
                .position(|x| x == id)
                .map(|i| (i, *b))
                .ok_or_else(|| Error::validation("record-exists", format!("no record `{id}`")))
        })
        .collect::<Result<_>>()?;
    let kept: BTreeMap<Vec<u8>, f64> =
        dist.probs.iter().filter(|(k, _)| pos.iter().all(|(i, b)| k[*i] == *b)).map(|(k, p)| (k.clone(), *p)).collect();
    let mass: f64 = kept.values().sum();
    if mass <= 1e-12 {
        return Err(Error::ZeroConditionMass(mass));
    }
    Ok(BranchDistribution {
        ids: dist.ids.clone(),
        probs: kept.into_iter().map(|(k, p)| (k, p / mass)).collect(),
        pruned_mass: dist.pruned_mass / mass,
    })
}

pub fn tv_distance(p: &BTreeMap<Vec<u8>, f64>, q: &BTreeMap<Vec<u8>, f64>) -> f64 {
    let mut keys: Vec<&Vec<u8>> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys.iter().map(|k| (p.get(*k).unwrap_or(&0.0) - q.get(*k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

/// A leaf of the intermediate-measurement tree, before final measurements.
#[derive(Debug, Clone)]
pub struct Branch {
    pub outcomes: Outcomes,
    pub prob: f64,
    pub state: StateVector,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub max_lines: usize,
    pub prune: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_lines: DEFAULT_MAX_LINES, prune: DEFAULT_PRUNE }
    }
}

fn check_caps(c: &Circuit, cfg: &OracleConfig) -> Result<()> {
    let cap = cfg.max_lines.min(HARD_MAX_LINES);
    if c.n() > cap {
        return Err(Error::CapExceeded(format!("{} lines exceed oracle cap {cap}", c.n())));
    }
    let k = c.intermediate_records().len();
    if k > MAX_INTERMEDIATE {
        return Err(Error::CapExceeded(format!("{k} intermediate measurements exceed {MAX_INTERMEDIATE}")));
    }
    Ok(())
}

/// Every intermediate-outcome branch with probability above the prune level.
pub fn run_branches(c: &Circuit) -> Result<Vec<Branch>> {
    run_branches_with(c, &OracleConfig::default()).map(|(b, _)| b)
}

pub fn run_branches_with(c: &Circuit, cfg: &OracleConfig) -> Result<(Vec<Branch>, f64)> {
    check_caps(c, cfg)?;
    let state = StateVector::from_input(c.input())?;
    let mut out = Vec::new();
    let mut pruned = 0.0;
    walk(c, 0, state, Outcomes::new(), 1.0, cfg.prune, &mut out, &mut pruned)?;
    Ok((out, pruned))
}

#[allow(clippy::too_many_arguments)]
fn walk(
    c: &Circuit,
    start: usize,
    mut state: StateVector,
    outcomes: Outcomes,
    prob: f64,
    prune: f64,
    out: &mut Vec<Branch>,
    pruned: &mut f64,
) -> Result<()> {
    let prog = c.program();
    for pos in start..prog.len() {
        match &prog[pos] {
            Instruction::Gate { line, gate, guard } => {
                let apply = match guard {
                    None => true,
                    Some(g) => g.fires(&outcomes)?,
                };
                if apply {
                    state.apply_gate(*line, gate);
                }
            }
            Instruction::Measure { role: Role::Final, .. } => {}
            Instruction::Measure { line, id, basis, .. } => {
                for bit in [0u8, 1] {
                    let mut s = state.clone();
                    let p = s.measure(*line, *basis, bit);
                    let joint = prob * p;
                    if joint < prune {
                        *pruned += joint;
                        continue;
                    }
                    let mut o = outcomes.clone();
                    o.insert(id.clone(), bit);
                    walk(c, pos + 1, s, o, joint, prune, out, pruned)?;
                }
                return Ok(());
            }
            Instruction::Macro(Macro::Swap { line }) => state.apply_swap(*line),
            Instruction::Macro(m) => {
                return Err(Error::BackendInapplicable(format!("oracle cannot execute macro `{}`; lower it first", m.name())))
            }
        }
    }
    out.push(Branch { outcomes, prob, state });
    Ok(())
}

pub fn run_exact(c: &Circuit) -> Result<BranchDistribution> {
    run_exact_with(c, &OracleConfig::default())
}

pub fn run_exact_with(c: &Circuit, cfg: &OracleConfig) -> Result<BranchDistribution> {
    let (branches, mut pruned) = run_branches_with(c, cfg)?;
    let records = c.records();
    let finals = c.final_records();
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let mut probs = BTreeMap::new();
    for br in branches {
        let mut s = br.state;
        for f in &finals {
            if let Basis::Tilted { x, phase } = f.basis {
                s.apply_single(f.line, &dagger2(&tilted_basis(x, phase)));
            }
        }
        let mut local: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (i, a) in s.amps.iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            let key: Vec<u8> = finals.iter().map(|f| (i >> f.line & 1) as u8).collect();
            *local.entry(key).or_insert(0.0) += w;
        }
        for (fbits, w) in local {
            let joint = br.prob * w;
            if joint < cfg.prune {
                pruned += joint;
                continue;
            }
            let mut fi = fbits.iter();
            let key: Vec<u8> = records
                .iter()
                .map(|r| match r.role {
                    Role::Intermediate => br.outcomes[&r.id],
                    Role::Final => *fi.next().unwrap(),
                })
                .collect();
            *probs.entry(key).or_insert(0.0) += joint;
        }
    }
    Ok(BranchDistribution { ids, probs, pruned_mass: pruned })
}

/// Draws `shots` full records from an exact distribution.
pub fn sample_distribution(dist: &BranchDistribution, shots: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<(&Vec<u8>, f64)> = dist.probs.iter().map(|(k, p)| (k, *p)).collect();
    let total: f64 = entries.iter().map(|e| e.1).sum();
    (0..shots)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            for (k, p) in &entries {
                if u < *p {
                    return (*k).clone();
                }
                u -= p;
            }
            entries.last().unwrap().0.clone()
        })
        .collect()
}

/// Options for [`random_circuit`].
#[derive(Debug, Clone)]
pub struct RandomCircuitSpec {
    pub input: InputSpec,
    pub depth: usize,
    pub intermediate: usize,
    /// Probability that a gate after the first intermediate measurement is guarded.
    pub guard_prob: f64,
    /// Lines carrying a final measurement; `None` measures every line.
    pub final_lines: Option<Vec<usize>>,
}

impl RandomCircuitSpec {
    pub fn new(input: InputSpec, depth: usize) -> Self {
        RandomCircuitSpec { input, depth, intermediate: 0, guard_prob: 0.3, final_lines: None }
    }
}

pub fn random_angles<R: Rng + ?Sized>(rng: &mut R) -> MatchgateAngles {
    let tau = std::f64::consts::TAU;
    MatchgateAngles::from_array(std::array::from_fn(|_| rng.random::<f64>() * tau))
}

/// Random nearest-neighbour circuit: uniform angles, zero-input, all lines measured.
pub fn random_mg_circuit(n: usize, depth: usize, seed: u64) -> Circuit {
    random_circuit(&RandomCircuitSpec::new(InputSpec::zeros(n), depth), seed)
}

pub fn random_circuit(spec: &RandomCircuitSpec, seed: u64) -> Circuit {
    let n = spec.input.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut program = Vec::new();
    // measurement slots spread over the gate sequence
    let mut slots: Vec<usize> = (0..spec.intermediate).map(|_| rng.random_range(0..=spec.depth)).collect();
    slots.sort_unstable();
    let mut measured: Vec<String> = Vec::new();
    let mut next_slot = 0;
    for step in 0..=spec.depth {
        while next_slot < slots.len() && slots[next_slot] == step {
            let id = format!("y{}", measured.len() + 1);
            program.push(Instruction::intermediate(rng.random_range(0..n), id.clone()));
            measured.push(id);
            next_slot += 1;
        }
        if step == spec.depth || n < 2 {
            continue;
        }
        let line = rng.random_range(0..n - 1);
        let gate = Matchgate::from_angles(random_angles(&mut rng));
        let guard = if !measured.is_empty() && rng.random::<f64>() < spec.guard_prob {
            let ids: Vec<&String> = measured.iter().filter(|_| rng.random::<bool>()).collect();
            let ids = if ids.is_empty() { vec![&measured[rng.random_range(0..measured.len())]] } else { ids };
            Some(Guard::new(&ids, rng.random_range(0..2)))
        } else {
            None
        };
        program.push(Instruction::Gate { line, gate, guard });
    }
    let finals = spec.final_lines.clone().unwrap_or_else(|| (0..n).collect());
    for l in finals {
        program.push(Instruction::final_(l, format!("x{}", l + 1)));
    }
    Circuit::new(spec.input.clone(), program).expect("random circuits are valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_point_mass() {
        let c = Circuit::new(
            InputSpec::bits(&[1, 0, 1]),
            (0..3).map(|l| Instruction::final_(l, format!("x{l}"))).collect(),
        )
        .unwrap();
        let d = run_exact(&c).unwrap();
        assert_eq!(d.probs.len(), 1);
        assert_eq!(d.probs[&vec![1, 0, 1]], 1.0);
    }

    #[test]
    fn hadamard_gadget_distribution() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let input = InputSpec::new(vec![Block::Bits(vec![0]), Block::Product(vec![[c(s, 0.0), c(s, 0.0)]])]).unwrap();
        let circ = Circuit::new(
            input,
            vec![Instruction::gate(0, Matchgate::hadamard_gadget()), Instruction::final_(0, "t"), Instruction::final_(1, "a")],
        )
        .unwrap();
        let d = run_exact(&circ).unwrap();
        // H|0> ⊗ |+>: uniform over the four outcomes
        for k in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            assert!((d.probs[&k.to_vec()] - 0.25).abs() < 1e-15);
        }
        let br = run_branches(&circ).unwrap();
        let target = [c(0.5, 0.0); 4];
        assert!((br[0].state.subsystem_fidelity(&[0, 1], &target) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tilted_basis_at_pi_over_4_is_plus_minus() {
        let w = tilted_basis(std::f64::consts::FRAC_PI_4, 0.0);
        let h = hadamard();
        for i in 0..2 {
            for j in 0..2 {
                assert!((w[i][j] - h[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn post_select_identity_and_point_mass() {
        let c = Circuit::new(InputSpec::bits(&[1, 0]), vec![Instruction::final_(0, "a"), Instruction::final_(1, "b")]).unwrap();
        let d = run_exact(&c).unwrap();
        assert_eq!(post_select(&d, &[]).unwrap(), d);
        assert_eq!(post_select(&d, &[("a", 1)]).unwrap().probs, d.probs);
        assert!(matches!(post_select(&d, &[("a", 0)]), Err(Error::ZeroConditionMass(_))));
    }

    #[test]
    fn random_circuits_are_deterministic() {
        assert!(random_mg_circuit(4, 0, 1).gate_count() == 0);
        let a = serialize_circuit(&random_mg_circuit(5, 30, 9));
        let b = serialize_circuit(&random_mg_circuit(5, 30, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn norm_preserved_and_parity_superselected() {
        for seed in 0..20 {
            let c = random_mg_circuit(5, 40, seed);
            let mut s = StateVector::from_input(c.input()).unwrap();
            for ins in c.program() {
                if let Instruction::Gate { line, gate, .. } = ins {
                    s.apply_gate(*line, gate);
                    assert!((s.norm() - 1.0).abs() < 1e-10);
                }
            }
            let d = run_exact(&c).unwrap();
            let odd: f64 = d.probs.iter().filter(|(k, _)| k.iter().map(|b| *b as u32).sum::<u32>() % 2 == 1).map(|(_, p)| p).sum();
            assert!(odd < 1e-12);
        }
    }

    #[test]
    fn random_draws_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = random_angles(&mut rng).to_mat4();
            assert!(Matchgate::from_mat4(&a).is_ok());
        }
    }
}
