//! Chain-rule weak sampling shared by both simulation backends.
//!
//! Records are drawn one at a time in a fixed sequence (intermediate
//! measurements in program order, then final measurements), each from
//! `p(r_t = b | r_<t) = p(r_≤t) / p(r_<t)`. Prefix probabilities are cached
//! for the duration of one sampling call, so repeated prefixes across shots
//! are evaluated once.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::RecordInfo;
use crate::error::{Error, Result};

pub const ZERO_PREFIX: f64 = 1e-12;

/// A model that can evaluate joint probabilities of record prefixes.
pub trait ChainModel: Sync {
    /// Records in sampling order.
    fn sequence(&self) -> &[RecordInfo];
    /// `p(r_1 = bits[0], …, r_L = bits[L−1])`.
    fn prefix_prob(&self, bits: &[u8]) -> Result<f64>;
}

/// One sampled shot: `(record id, bit, conditional probability of that bit)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub assignments: Vec<(String, u8, f64)>,
}

impl OutcomeRecord {
    pub fn bits(&self) -> Vec<u8> {
        self.assignments.iter().map(|a| a.1).collect()
    }

    /// Product of the conditionals, i.e. the joint probability of the record.
    pub fn probability(&self) -> f64 {
        self.assignments.iter().map(|a| a.2).product()
    }

    pub fn get(&self, id: &str) -> Option<u8> {
        self.assignments.iter().find(|a| a.0 == id).map(|a| a.1)
    }

    /// Keeps only the listed records, in the listed order.
    pub fn restrict(&self, ids: &[String]) -> OutcomeRecord {
        OutcomeRecord {
            assignments: ids
                .iter()
                .filter_map(|id| self.assignments.iter().find(|a| &a.0 == id).cloned())
                .collect(),
        }
    }
}

/// Per-shot generator: the master seed with the shot index as stream id.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

struct Cached<'a, M: ChainModel> {
    model: &'a M,
    cache: Mutex<HashMap<Vec<u8>, f64>>,
}

impl<M: ChainModel> Cached<'_, M> {
    fn get(&self, bits: &[u8]) -> Result<f64> {
        if bits.is_empty() {
            return Ok(1.0);
        }
        if let Some(p) = self.cache.lock().unwrap().get(bits) {
            return Ok(*p);
        }
        let p = self.model.prefix_prob(bits)?;
        self.cache.lock().unwrap().insert(bits.to_vec(), p);
        Ok(p)
    }
}

fn one_shot<M: ChainModel>(m: &Cached<'_, M>, rng: &mut ChaCha8Rng) -> Result<OutcomeRecord> {
    let seq = m.model.sequence();
    let mut bits = Vec::with_capacity(seq.len());
    let mut assignments = Vec::with_capacity(seq.len());
    let mut p_prefix = 1.0;
    for rec in seq {
        if p_prefix < ZERO_PREFIX {
            return Err(Error::ZeroProbabilityPrefix(p_prefix));
        }
        bits.push(1);
        let p1 = m.get(&bits)?;
        let cond1 = (p1 / p_prefix).clamp(0.0, 1.0);
        let u: f64 = rng.random();
        let (bit, cond, p_next) = if u < cond1 { (1, cond1, p1) } else { (0, 1.0 - cond1, (p_prefix - p1).max(0.0)) };
        *bits.last_mut().unwrap() = bit;
        assignments.push((rec.id.clone(), bit, cond));
        p_prefix = p_next;
    }
    Ok(OutcomeRecord { assignments })
}

/// Draws `shots` records; shot `s` uses [`shot_rng`]`(seed, s)`, so results
/// are independent of the worker count.
pub fn sample_chain<M: ChainModel>(model: &M, shots: usize, seed: u64) -> Result<Vec<OutcomeRecord>> {
    let cached = Cached { model, cache: Mutex::new(HashMap::new()) };
    (0..shots as u64)
        .into_par_iter()
        .map(|s| one_shot(&cached, &mut shot_rng(seed, s)))
        .collect()
}

/// Empirical distribution of the listed records.
pub fn empirical(records: &[OutcomeRecord], ids: &[String]) -> std::collections::BTreeMap<Vec<u8>, f64> {
    let mut out = std::collections::BTreeMap::new();
    if records.is_empty() {
        return out;
    }
    let w = 1.0 / records.len() as f64;
    for r in records {
        *out.entry(r.restrict(ids).bits()).or_insert(0.0) += w;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Basis, Role};

    struct Coin {
        seq: Vec<RecordInfo>,
    }

    impl ChainModel for Coin {
        fn sequence(&self) -> &[RecordInfo] {
            &self.seq
        }
        fn prefix_prob(&self, bits: &[u8]) -> Result<f64> {
            // first bit biased 0.25 towards 1, second copies the first
            let mut p = if bits[0] == 1 { 0.25 } else { 0.75 };
            if bits.len() > 1 && bits[1] != bits[0] {
                p = 0.0;
            }
            Ok(p)
        }
    }

    fn coin() -> Coin {
        let rec = |id: &str| RecordInfo { id: id.into(), line: 0, role: Role::Final, basis: Basis::Computational, index: 0 };
        Coin { seq: vec![rec("a"), rec("b")] }
    }

    #[test]
    fn conditionals_multiply_to_joint() {
        let c = coin();
        for r in sample_chain(&c, 200, 1).unwrap() {
            assert_eq!(r.bits()[0], r.bits()[1]);
            let expect = c.prefix_prob(&r.bits()).unwrap();
            assert!((r.probability() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let c = coin();
        assert_eq!(sample_chain(&c, 50, 7).unwrap(), sample_chain(&c, 50, 7).unwrap());
        assert_ne!(sample_chain(&c, 50, 7).unwrap(), sample_chain(&c, 50, 8).unwrap());
        assert!(sample_chain(&c, 0, 7).unwrap().is_empty());
    }

    #[test]
    fn frequencies_follow_model() {
        let c = coin();
        let recs = sample_chain(&c, 20000, 3).unwrap();
        let emp = empirical(&recs, &["a".to_string()]);
        assert!((emp[&vec![1]] - 0.25).abs() < 0.02);
    }
}
