//! Heisenberg-picture simulation for circuits with few adaptive measurements.
//!
//! The conjugated projector chain is a product of `K = 4k + 2|x|` linear forms
//! in the Majoranas. Expanding it gives `(2n)^K` summands
//! `v_1[a_1] ⋯ v_K[a_K] <ψ|c_{a_1} ⋯ c_{a_K}|ψ>`; each Majorana word reduces to
//! a signed ordered monomial whose input expectation is looked up by bitmask.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::circuit::{Basis, Circuit, InputSpec, Outcomes, RecordInfo, Role};
use crate::error::{Error, Result};
use crate::gadgets;
use crate::linalg::*;
use crate::majorana::{expectation_pauli, monomial_pauli};
use crate::projectors::projector_chain;
use crate::sampling::{sample_chain, ChainModel, OutcomeRecord};

/// Largest `2n` for which the expectation table is filled eagerly.
const DENSE_TABLE_BITS: usize = 20;
/// Largest `2n` for which the sign-folded row table is built.
const ROW_TABLE_BITS: usize = 16;

/// `s(m, a)`: sign from moving `c_a` left past the members of `m` above `a`.
fn word_sign(mask: u64, a: usize) -> f64 {
    if (mask >> (a + 1)).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

enum Expectations {
    Dense {
        table: Vec<C64>,
        /// `s(m, a) E[m ^ 2^a]` at `m * stride + a`, split into real and
        /// imaginary parts and zero-padded to the stride.
        rows: Option<(Vec<f64>, Vec<f64>)>,
    },
    Lazy { input: InputSpec, cap: usize, memo: Mutex<HashMap<u64, C64>> },
}

impl Expectations {
    fn build(input: &InputSpec, cap: usize) -> Result<Self> {
        let n = input.n();
        let m = 2 * n;
        if m > DENSE_TABLE_BITS {
            return Ok(Expectations::Lazy { input: input.clone(), cap, memo: Mutex::new(HashMap::new()) });
        }
        let table = (0u64..1 << m)
            .into_par_iter()
            .map(|mask| expectation_pauli(&monomial_pauli(mask, n), input, cap))
            .collect::<Result<Vec<_>>>()?;
        let stride = row_stride(m);
        let rows = (m <= ROW_TABLE_BITS).then(|| {
            let mut re = vec![0.0; stride << m];
            let mut im = vec![0.0; stride << m];
            for mask in 0u64..1 << m {
                for a in 0..m {
                    let e = word_sign(mask, a) * table[(mask ^ 1 << a) as usize];
                    re[mask as usize * stride + a] = e.re;
                    im[mask as usize * stride + a] = e.im;
                }
            }
            (re, im)
        });
        Ok(Expectations::Dense { table, rows })
    }

    fn get(&self, mask: u64) -> C64 {
        match self {
            Expectations::Dense { table, .. } => table[mask as usize],
            Expectations::Lazy { input, cap, memo } => {
                if let Some(v) = memo.lock().unwrap().get(&mask) {
                    return *v;
                }
                let v = expectation_pauli(&monomial_pauli(mask, input.n()), input, *cap)
                    .expect("block widths checked on construction");
                memo.lock().unwrap().insert(mask, v);
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HeisenbergConfig {
    pub max_block: usize,
    /// Most intermediate measurements accepted (after macro lowering).
    pub max_adaptive: usize,
    /// Largest summand count one query may start.
    pub term_budget: f64,
}

impl Default for HeisenbergConfig {
    fn default() -> Self {
        HeisenbergConfig { max_block: 12, max_adaptive: 3, term_budget: 1e11 }
    }
}

/// Row length of the sign-folded table: `2n` rounded up to a multiple of 4.
fn row_stride(m: usize) -> usize {
    m.div_ceil(4) * 4
}

/// `u[b] v[a]` for the last two forms at `b * stride + a`, split into real
/// and imaginary parts, zero-padded, with negated copies.
struct PairTable {
    stride: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    neg_re: Vec<f64>,
    neg_im: Vec<f64>,
}

impl PairTable {
    fn new(u: &[C64], v: &[C64]) -> Self {
        let stride = row_stride(v.len());
        let mut re = vec![0.0; u.len() * stride];
        let mut im = vec![0.0; u.len() * stride];
        for (b, x) in u.iter().enumerate() {
            for (a, y) in v.iter().enumerate() {
                let p = x * y;
                re[b * stride + a] = p.re;
                im[b * stride + a] = p.im;
            }
        }
        let neg_re = re.iter().map(|x| -x).collect();
        let neg_im = im.iter().map(|x| -x).collect();
        PairTable { stride, re, im, neg_re, neg_im }
    }
}

/// Depth-first walk over index words using the sign-folded rows for the
/// last two forms.
struct RowWalk<'a> {
    forms: &'a [Vec<C64>],
    pairs: &'a PairTable,
    re: &'a [f64],
    im: &'a [f64],
    wide: bool,
}

impl RowWalk<'_> {
    /// `(sum, summands)` below a prefix with reduced monomial `mask`.
    fn level(&self, depth: usize, mask: u64, coef: C64) -> (C64, u64) {
        let k = self.forms.len();
        if depth + 2 == k {
            #[cfg(target_arch = "x86_64")]
            if self.wide {
                // SAFETY: `wide` is set only when AVX2 and FMA were detected at runtime.
                return unsafe { self.last_two_avx2(mask, coef) };
            }
            return self.last_two(mask, coef);
        }
        let v = &self.forms[depth];
        let child = |a: usize, above: bool| {
            let c = if above { -coef * v[a] } else { coef * v[a] };
            self.level(depth + 1, mask ^ (1 << a), c)
        };
        if depth == 0 {
            return (0..v.len())
                .into_par_iter()
                .map(|a| child(a, false))
                .reduce(|| (ZERO, 0), |x, y| (x.0 + y.0, x.1 + y.1));
        }
        let mut acc = (ZERO, 0);
        let mut above = false;
        for a in (0..v.len()).rev() {
            let (s, n) = child(a, above);
            acc = (acc.0 + s, acc.1 + n);
            above ^= mask >> a & 1 == 1;
        }
        acc
    }

    #[inline(always)]
    fn last_two(&self, mask: u64, coef: C64) -> (C64, u64) {
        let p = self.pairs;
        let m = self.forms[0].len();
        let stride = p.stride;
        let mut ar = [0.0; 4];
        let mut ai = [0.0; 4];
        let mut above = false;
        for b in (0..m).rev() {
            let base = (mask ^ (1 << b)) as usize * stride;
            let (er, ei) = (&self.re[base..base + stride], &self.im[base..base + stride]);
            let row = b * stride..(b + 1) * stride;
            let (pr, pi) = if above { (&p.neg_re[row.clone()], &p.neg_im[row]) } else { (&p.re[row.clone()], &p.im[row]) };
            let chunks = pr.chunks_exact(4).zip(pi.chunks_exact(4)).zip(er.chunks_exact(4).zip(ei.chunks_exact(4)));
            for ((pr, pi), (er, ei)) in chunks {
                for l in 0..4 {
                    ar[l] += pr[l] * er[l] - pi[l] * ei[l];
                    ai[l] += pr[l] * ei[l] + pi[l] * er[l];
                }
            }
            above ^= mask >> b & 1 == 1;
        }
        let acc = c((ar[0] + ar[1]) + (ar[2] + ar[3]), (ai[0] + ai[1]) + (ai[2] + ai[3]));
        (coef * acc, (m * m) as u64)
    }

    /// [`RowWalk::last_two`] with 256-bit fused multiply-adds and separate
    /// accumulators for the four real products.
    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2,fma")]
    unsafe fn last_two_avx2(&self, mask: u64, coef: C64) -> (C64, u64) {
        use std::arch::x86_64::*;
        let p = self.pairs;
        let m = self.forms[0].len();
        let stride = p.stride;
        debug_assert!(((mask as usize) | ((1 << m) - 1)) * stride + stride <= self.re.len());
        let (mut rr, mut ii, mut ri, mut ir) = (_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd());
        let mut above = false;
        for b in (0..m).rev() {
            let base = (mask ^ (1 << b)) as usize * stride;
            let off = b * stride;
            let (pr, pi) = if above { (&p.neg_re, &p.neg_im) } else { (&p.re, &p.im) };
            // SAFETY: every row of both tables holds `stride` entries, a multiple of 4.
            let (pr, pi) = (pr.as_ptr().add(off), pi.as_ptr().add(off));
            let (er, ei) = (self.re.as_ptr().add(base), self.im.as_ptr().add(base));
            let mut j = 0;
            while j < stride {
                let (vpr, vpi) = (_mm256_loadu_pd(pr.add(j)), _mm256_loadu_pd(pi.add(j)));
                let (ver, vei) = (_mm256_loadu_pd(er.add(j)), _mm256_loadu_pd(ei.add(j)));
                rr = _mm256_fmadd_pd(vpr, ver, rr);
                ii = _mm256_fmadd_pd(vpi, vei, ii);
                ri = _mm256_fmadd_pd(vpr, vei, ri);
                ir = _mm256_fmadd_pd(vpi, ver, ir);
                j += 4;
            }
            above ^= mask >> b & 1 == 1;
        }
        let re = _mm256_sub_pd(rr, ii);
        let im = _mm256_add_pd(ri, ir);
        let (mut lr, mut li) = ([0.0; 4], [0.0; 4]);
        _mm256_storeu_pd(lr.as_mut_ptr(), re);
        _mm256_storeu_pd(li.as_mut_ptr(), im);
        let acc = c((lr[0] + lr[1]) + (lr[2] + lr[3]), (li[0] + li[1]) + (li[2] + li[3]));
        (coef * acc, (m * m) as u64)
    }
}

fn wide_dot_available() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// Heisenberg simulator for one circuit.
pub struct HeisenbergSim {
    circuit: Circuit,
    cfg: HeisenbergConfig,
    table: Expectations,
    hidden: BTreeSet<String>,
    sequence: Vec<RecordInfo>,
    visible: Vec<String>,
    terms: AtomicU64,
    wide: bool,
}

impl HeisenbergSim {
    pub fn new(c: &Circuit) -> Result<Self> {
        HeisenbergSim::with_config(c, HeisenbergConfig::default())
    }

    pub fn with_config(c: &Circuit, cfg: HeisenbergConfig) -> Result<Self> {
        let visible: Vec<String> = c.records().into_iter().map(|r| r.id).collect();
        let mut hidden = BTreeSet::new();
        let mut circuit = c.clone();
        if circuit.has_macros() {
            let lowered = gadgets::lower(&circuit)?;
            hidden.extend(lowered.new_records);
            circuit = lowered.circuit;
        }
        if !circuit.all_computational() {
            return Err(Error::BackendInapplicable("heisenberg backend needs computational-basis measurements".into()));
        }
        let k = circuit.intermediate_records().len();
        if k > cfg.max_adaptive {
            return Err(Error::CapExceeded(format!("{k} intermediate measurements, cap {}", cfg.max_adaptive)));
        }
        let width = circuit.input().max_entangled_width();
        if width > cfg.max_block {
            return Err(Error::BlockTooLarge { width, cap: cfg.max_block });
        }
        let table = Expectations::build(circuit.input(), cfg.max_block)?;
        let mut sequence = circuit.intermediate_records();
        sequence.extend(circuit.final_records());
        Ok(HeisenbergSim { circuit, cfg, table, hidden, sequence, visible, terms: AtomicU64::new(0), wide: wide_dot_available() })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn visible_records(&self) -> &[String] {
        &self.visible
    }

    pub fn hidden_records(&self) -> &BTreeSet<String> {
        &self.hidden
    }

    /// Summands evaluated so far, across all queries.
    pub fn terms_evaluated(&self) -> u64 {
        self.terms.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.terms.store(0, Ordering::Relaxed);
    }

    /// `(2n)^K` for a chain of `K` forms.
    pub fn term_count(&self, forms: usize) -> f64 {
        (2.0 * self.circuit.n() as f64).powi(forms as i32)
    }

    fn check_budget(&self, terms: f64) -> Result<()> {
        if terms > self.cfg.term_budget {
            return Err(Error::BudgetExceeded { terms, budget: self.cfg.term_budget });
        }
        Ok(())
    }

    /// Probability of a partial assignment of record ids, with the same
    /// marginalisation rules as the Pfaffian backend.
    pub fn prob(&self, assignment: &[(&str, u8)]) -> Result<f64> {
        let inter = self.circuit.intermediate_records();
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
        self.check_budget((1u64 << free.len()) as f64 * self.term_count(4 * j + 2 * fin.len()))?;
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

    /// `p(y_1..y_j, x)` with finals given as `(line, bit)`.
    pub fn joint(&self, y: &Outcomes, j: usize, finals: &[(usize, u8)]) -> Result<f64> {
        let n = self.circuit.n();
        let forms = projector_chain(&self.circuit, y, j, finals)?.forms(n);
        self.check_budget(self.term_count(forms.len()))?;
        let (total, count) = self.sum_words(&forms);
        self.terms.fetch_add(count, Ordering::Relaxed);
        if total.im.abs() > 1e-10 || total.re < -1e-9 {
            return Err(Error::ImaginaryResidual { value: if total.re < -1e-9 { total.re } else { total.im } });
        }
        Ok(total.re.clamp(0.0, 1.0))
    }

    /// `Σ_a v_1[a_1] ⋯ v_K[a_K] <ψ|c_{a_1} ⋯ c_{a_K}|ψ>` and the number of
    /// summands visited.
    fn sum_words(&self, forms: &[Vec<C64>]) -> (C64, u64) {
        if forms.is_empty() {
            return (self.table.get(0), 1);
        }
        if let (Expectations::Dense { rows: Some((re, im)), .. }, true) = (&self.table, forms.len() >= 2) {
            let k = forms.len();
            let pairs = PairTable::new(&forms[k - 2], &forms[k - 1]);
            let walk = RowWalk { forms, pairs: &pairs, re, im, wide: self.wide };
            return walk.level(0, 0, ONE);
        }
        (0..forms[0].len())
            .into_par_iter()
            .map(|a| {
                let mut count = 0u64;
                let s = self.descend(&forms[1..], 1 << a, forms[0][a], &mut count);
                (s, count)
            })
            .reduce(|| (ZERO, 0), |x, y| (x.0 + y.0, x.1 + y.1))
    }

    fn descend(&self, rest: &[Vec<C64>], mask: u64, coef: C64, count: &mut u64) -> C64 {
        let Some((v, tail)) = rest.split_first() else {
            *count += 1;
            return coef * self.table.get(mask);
        };
        if tail.is_empty() {
            return coef * self.last_level(v, mask, count);
        }
        let mut acc = ZERO;
        let mut above = 0u32;
        for a in (0..v.len()).rev() {
            let c = if above & 1 == 1 { -coef * v[a] } else { coef * v[a] };
            acc += self.descend(tail, mask ^ (1 << a), c, count);
            above += (mask >> a & 1) as u32;
        }
        acc
    }

    fn last_level(&self, v: &[C64], mask: u64, count: &mut u64) -> C64 {
        *count += v.len() as u64;
        let mut acc = ZERO;
        for (a, x) in v.iter().enumerate() {
            acc += word_sign(mask, a) * x * self.table.get(mask ^ (1 << a));
        }
        acc
    }

    /// Weak simulation by the chain rule; records carry original ids only.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<OutcomeRecord>> {
        if self.circuit.final_records().is_empty() {
            return Err(Error::validation("final-present", "sampling needs at least one final measurement"));
        }
        let recs = sample_chain(self, shots, seed)?;
        Ok(recs.into_iter().map(|r| r.restrict(&self.visible)).collect())
    }
}

impl ChainModel for HeisenbergSim {
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

/// `p(1)` on one line of a circuit without intermediate measurements.
pub fn strong_single_line(c: &Circuit, line: usize) -> Result<f64> {
    let sim = HeisenbergSim::new(c)?;
    if !sim.circuit.intermediate_records().is_empty() {
        return Err(Error::BackendInapplicable("strong_single_line expects no intermediate measurements".into()));
    }
    if line >= sim.circuit.n() {
        return Err(Error::validation("line-range", format!("line {line} out of range")));
    }
    sim.joint(&Outcomes::new(), 0, &[(line, 1)])
}

/// `p(y, x)` for all intermediate outcomes `y` and final `(line, bit)` pairs.
pub fn joint_prob_few_adaptive(c: &Circuit, y: &Outcomes, x: &[(usize, u8)]) -> Result<f64> {
    let sim = HeisenbergSim::new(c)?;
    let j = sim.circuit.intermediate_records().len();
    sim.joint(y, j, x)
}

pub fn sample_few_adaptive(c: &Circuit, shots: usize, seed: u64) -> Result<Vec<OutcomeRecord>> {
    HeisenbergSim::new(c)?.sample(shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Block, Instruction, Matchgate};
    use crate::oracle::{random_angles, random_circuit, run_exact, RandomCircuitSpec};
    use rand::SeedableRng;

    fn adaptive_circuit(n: usize, k: usize, seed: u64) -> Circuit {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut prog = Vec::new();
        for t in 0..k {
            for l in 0..n - 1 {
                prog.push(Instruction::gate(l, Matchgate::from_angles(random_angles(&mut rng))));
            }
            prog.push(Instruction::intermediate(t % n, format!("m{t}")));
            prog.push(Instruction::guarded(
                (t + 1) % (n - 1),
                Matchgate::from_angles(random_angles(&mut rng)),
                crate::circuit::Guard::new(&[format!("m{t}")], 1),
            ));
        }
        for l in 0..n - 1 {
            prog.push(Instruction::gate(l, Matchgate::from_angles(random_angles(&mut rng))));
        }
        for l in 0..n {
            prog.push(Instruction::final_(l, format!("f{l}")));
        }
        Circuit::new(InputSpec::bits(&[1, 0, 0, 1, 0, 1][..n]), prog).unwrap()
    }

    #[test]
    fn single_line_matches_oracle() {
        for seed in 0..5 {
            let c = random_circuit(&RandomCircuitSpec::new(InputSpec::bits(&[0, 1, 1, 0]), 12), seed);
            let c = Circuit::new(c.input().clone(), c.program().iter().filter(|i| !matches!(i, Instruction::Measure { .. })).cloned().chain((0..4).map(|l| Instruction::final_(l, format!("f{l}")))).collect()).unwrap();
            let dist = run_exact(&c).unwrap();
            for line in 0..4 {
                let p = strong_single_line(&c, line).unwrap();
                assert!((p - dist.prob(&[(&format!("f{line}"), 1)])).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adaptive_joint_matches_oracle_and_counts_terms() {
        for k in 0..=2 {
            let n = if k == 2 { 3 } else { 4 };
            let c = adaptive_circuit(n, k, 7 + k as u64);
            let dist = run_exact(&c).unwrap();
            let sim = HeisenbergSim::new(&c).unwrap();
            for bits in 0u32..1 << k {
                let mut y = Outcomes::new();
                let mut assignment: Vec<(String, u8)> = Vec::new();
                for t in 0..k {
                    let b = (bits >> t & 1) as u8;
                    y.insert(format!("m{t}"), b);
                    assignment.push((format!("m{t}"), b));
                }
                assignment.push(("f2".into(), 1));
                sim.reset_counter();
                let p = sim.joint(&y, k, &[(2, 1)]).unwrap();
                assert_eq!(sim.terms_evaluated(), (2 * n as u64).pow(4 * k as u32 + 2));
                let refs: Vec<(&str, u8)> = assignment.iter().map(|(s, b)| (s.as_str(), *b)).collect();
                assert!((p - dist.prob(&refs)).abs() < 1e-10, "k={k} bits={bits}");
            }
        }
    }

    #[test]
    fn entangled_and_magic_inputs() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let input = InputSpec::new(vec![
            Block::Entangled { k: 2, amps: vec![c(s, 0.0), ZERO, ZERO, c(0.0, s)] },
            Block::Magic,
        ])
        .unwrap();
        let c = random_circuit(&RandomCircuitSpec::new(input, 20), 3);
        let dist = run_exact(&c).unwrap();
        let sim = HeisenbergSim::new(&c).unwrap();
        for r in c.final_records() {
            let p = sim.prob(&[(&r.id, 1)]).unwrap();
            assert!((p - dist.prob(&[(&r.id, 1)])).abs() < 1e-10);
        }
    }

    #[test]
    fn portable_kernel_agrees() {
        let c = adaptive_circuit(4, 1, 11);
        let wide = HeisenbergSim::new(&c).unwrap();
        let mut plain = HeisenbergSim::new(&c).unwrap();
        plain.wide = false;
        for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let a = [("m0", bits[0]), ("f1", bits[1])];
            assert!((wide.prob(&a).unwrap() - plain.prob(&a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn lazy_table_on_wide_registers() {
        let n = 11;
        let bits: Vec<u8> = (0..n).map(|l| (l % 3 == 0) as u8).collect();
        let c = random_circuit(&RandomCircuitSpec::new(InputSpec::bits(&bits), 30), 4);
        let sim = HeisenbergSim::new(&c).unwrap();
        assert!(matches!(sim.table, Expectations::Lazy { .. }));
        let dist = run_exact(&c).unwrap();
        let r = &c.final_records()[0];
        let p = sim.prob(&[(&r.id, 1)]).unwrap();
        assert!((p - dist.prob(&[(&r.id, 1)])).abs() < 1e-10);
    }

    #[test]
    fn caps_and_budget() {
        let c = adaptive_circuit(4, 2, 1);
        let tight = HeisenbergConfig { max_adaptive: 1, ..Default::default() };
        assert!(matches!(HeisenbergSim::with_config(&c, tight), Err(Error::CapExceeded(_))));
        let poor = HeisenbergConfig { term_budget: 1e3, ..Default::default() };
        let sim = HeisenbergSim::with_config(&c, poor).unwrap();
        let mut y = Outcomes::new();
        y.insert("m0".into(), 0);
        y.insert("m1".into(), 0);
        assert!(matches!(sim.joint(&y, 2, &[(0, 0)]), Err(Error::BudgetExceeded { .. })));
        assert_eq!(sim.terms_evaluated(), 0);
    }

    #[test]
    fn sampling_is_deterministic_and_consistent() {
        let c = adaptive_circuit(3, 1, 5);
        let sim = HeisenbergSim::new(&c).unwrap();
        let a = sim.sample(300, 9).unwrap();
        assert_eq!(a, sim.sample(300, 9).unwrap());
        let distinct: std::collections::BTreeMap<Vec<u8>, &OutcomeRecord> = a.iter().map(|r| (r.bits(), r)).collect();
        for r in distinct.values() {
            let refs: Vec<(&str, u8)> = r.assignments.iter().map(|(s, b, _)| (s.as_str(), *b)).collect();
            assert!((r.probability() - sim.prob(&refs).unwrap()).abs() < 1e-9);
        }
    }
}
