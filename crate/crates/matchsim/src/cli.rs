//! Commands behind the `matchsim` binary. Each one returns a [`RunReport`]
//! that renders identically for identical inputs, flags and seed.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{serialize_circuit, Circuit, InputSpec, RecordInfo, Role};
use crate::error::{Error, Result};
use crate::gadgets;
use crate::heisenberg::{HeisenbergConfig, HeisenbergSim};
use crate::oracle::{random_circuit, run_exact, sample_distribution, tv_distance, BranchDistribution, RandomCircuitSpec};
use crate::pfaffian::{PfaffianConfig, PfaffianSim};
use crate::sampling::{empirical, OutcomeRecord};

/// Summand budget for one Heisenberg query inside `xcheck`.
pub const XCHECK_TERM_BUDGET: f64 = 1e8;
/// Sampler TV tolerance on single-record marginals.
pub const TV_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendChoice {
    Auto,
    Heisenberg,
    Pfaffian,
    Oracle,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub backend: BackendChoice,
    pub seed: u64,
    pub tol: f64,
    pub max_adaptive: usize,
    pub max_block: usize,
    /// Adds wall time to reports, which makes them run-dependent.
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { backend: BackendChoice::Auto, seed: 0, tol: 1e-7, max_adaptive: 3, max_block: 12, timing: false }
    }
}

impl Options {
    fn heisenberg(&self) -> HeisenbergConfig {
        HeisenbergConfig { max_block: self.max_block, max_adaptive: self.max_adaptive, ..Default::default() }
    }

    fn pfaffian(&self) -> PfaffianConfig {
        PfaffianConfig { max_block: self.max_block, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Record ids in program order; samples and patterns follow this order.
    pub records: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<String>,
    pub counters: BTreeMap<String, u64>,
    pub metrics: BTreeMap<String, f64>,
    /// Tolerances that were breached.
    pub flags: Vec<String>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    fn new(command: &str, backend: &str, records: Vec<String>) -> Self {
        RunReport { command: command.into(), backend: backend.into(), records, ..Default::default() }
    }

    pub fn breached(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}: {v}\n"));
        line("command", self.command.clone());
        line("backend", self.backend.clone());
        if let Some(s) = self.seed {
            line("seed", s.to_string());
        }
        line("records", self.records.join(","));
        if let Some(p) = &self.pattern {
            line("pattern", p.clone());
        }
        if let Some(p) = self.probability {
            line("probability", p.to_string());
        }
        for (k, v) in &self.counters {
            line(k, v.to_string());
        }
        for (k, v) in &self.metrics {
            line(k, format!("{v:e}"));
        }
        line("flags", if self.flags.is_empty() { "none".into() } else { self.flags.join(",") });
        for n in &self.notes {
            line("note", n.clone());
        }
        if let Some(t) = self.wall_time_s {
            line("wall_time_s", format!("{t:.3}"));
        }
        if !self.samples.is_empty() || self.command == "sample" {
            out.push_str(&format!("samples: {}\n", self.samples.len()));
            for s in &self.samples {
                out.push_str(s);
                out.push('\n');
            }
        }
        out
    }
}

/// Process exit code for an error: 2 for malformed input, 3 when the chosen
/// backend cannot take the circuit, 1 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::Validation { .. }
        | Error::NotUnitary { .. }
        | Error::DeterminantMismatch { .. }
        | Error::UnresolvedGuard(_)
        | Error::NotSkew { .. }
        | Error::Io(_) => 2,
        Error::BackendInapplicable(_)
        | Error::CapExceeded(_)
        | Error::BlockTooLarge { .. }
        | Error::BudgetExceeded { .. }
        | Error::UnsupportedLayout(_)
        | Error::NoMagicAvailable => 3,
        _ => 1,
    }
}

fn record_ids(c: &Circuit) -> Vec<String> {
    c.records().into_iter().map(|r| r.id).collect()
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

/// Exact distribution over the circuit's own records. SWAP macros run as
/// ideal SWAPs; other macros are expanded and their records summed out.
pub fn oracle_distribution(c: &Circuit) -> Result<BranchDistribution> {
    let ids = record_ids(c);
    let expanded = if c.has_macros() { gadgets::expand_macros(c)?.circuit } else { c.clone() };
    Ok(run_exact(&expanded)?.marginal(&ids))
}

/// Parses `0`, `1` and `*` over the records in program order.
pub fn parse_pattern(pattern: &str, records: &[String]) -> Result<Vec<(String, u8)>> {
    let chars: Vec<char> = pattern.chars().collect();
    if chars.len() != records.len() {
        return Err(Error::validation(
            "pattern-length",
            format!("pattern has {} positions, circuit has {} records", chars.len(), records.len()),
        ));
    }
    let mut out = Vec::new();
    for (ch, id) in chars.iter().zip(records) {
        match ch {
            '0' => out.push((id.clone(), 0)),
            '1' => out.push((id.clone(), 1)),
            '*' => {}
            other => return Err(Error::validation("pattern-symbol", format!("unexpected `{other}` in pattern"))),
        }
    }
    Ok(out)
}

fn auto_prob_backend(c: &Circuit, assigned: &[(String, u8)]) -> BackendChoice {
    let finals = c.final_records();
    let single_final = assigned.len() == 1 && finals.iter().any(|r| r.id == assigned[0].0);
    if !c.is_adaptive() && !c.has_macros() && single_final {
        BackendChoice::Heisenberg
    } else {
        BackendChoice::Pfaffian
    }
}

fn backend_name(b: BackendChoice) -> &'static str {
    match b {
        BackendChoice::Auto => "auto",
        BackendChoice::Heisenberg => "heisenberg",
        BackendChoice::Pfaffian => "pfaffian",
        BackendChoice::Oracle => "oracle",
    }
}

pub fn cmd_prob(c: &Circuit, pattern: &str, opts: &Options) -> Result<RunReport> {
    let start = Instant::now();
    let records = record_ids(c);
    let assigned = parse_pattern(pattern, &records)?;
    let refs: Vec<(&str, u8)> = assigned.iter().map(|(id, b)| (id.as_str(), *b)).collect();
    let backend = match opts.backend {
        BackendChoice::Auto => auto_prob_backend(c, &assigned),
        b => b,
    };
    let mut report = RunReport::new("prob", backend_name(backend), records);
    report.pattern = Some(pattern.to_string());
    let p = match backend {
        BackendChoice::Heisenberg => {
            let sim = HeisenbergSim::with_config(c, opts.heisenberg())?;
            let p = sim.prob(&refs)?;
            report.counters.insert("heisenberg_terms".into(), sim.terms_evaluated());
            p
        }
        BackendChoice::Pfaffian => {
            let sim = PfaffianSim::with_config(c, opts.pfaffian())?;
            let p = sim.prob(&refs)?;
            report.counters.insert("pfaffian_pairs".into(), sim.pairs_evaluated());
            p
        }
        BackendChoice::Oracle | BackendChoice::Auto => {
            let dist = oracle_distribution(c)?;
            report.counters.insert("oracle_outcomes".into(), dist.probs.len() as u64);
            dist.prob(&refs)
        }
    };
    report.probability = Some(p);
    if opts.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

fn samples_as_strings(recs: &[OutcomeRecord]) -> Vec<String> {
    recs.iter().map(|r| bit_string(&r.bits())).collect()
}

pub fn cmd_sample(c: &Circuit, shots: usize, opts: &Options) -> Result<RunReport> {
    let start = Instant::now();
    let records = record_ids(c);
    let backend = match opts.backend {
        BackendChoice::Auto => BackendChoice::Pfaffian,
        b => b,
    };
    let mut report = RunReport::new("sample", backend_name(backend), records);
    report.seed = Some(opts.seed);
    report.samples = match backend {
        BackendChoice::Heisenberg => {
            let sim = HeisenbergSim::with_config(c, opts.heisenberg())?;
            let recs = sim.sample(shots, opts.seed)?;
            report.counters.insert("heisenberg_terms".into(), sim.terms_evaluated());
            samples_as_strings(&recs)
        }
        BackendChoice::Pfaffian | BackendChoice::Auto => {
            let sim = PfaffianSim::with_config(c, opts.pfaffian())?;
            let recs = sim.sample(shots, opts.seed)?;
            report.counters.insert("pfaffian_pairs".into(), sim.pairs_evaluated());
            samples_as_strings(&recs)
        }
        BackendChoice::Oracle => {
            let dist = oracle_distribution(c)?;
            sample_distribution(&dist, shots, opts.seed).iter().map(|b| bit_string(b)).collect()
        }
    };
    report.counters.insert("shots".into(), shots as u64);
    if opts.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Largest per-record TV distance between samples and the exact distribution.
pub fn marginal_tv(dist: &BranchDistribution, samples: &[OutcomeRecord], ids: &[String]) -> f64 {
    ids.iter()
        .map(|id| {
            let one = [id.clone()];
            tv_distance(&empirical(samples, &one), &dist.marginal(&one).probs)
        })
        .fold(0.0, f64::max)
}

/// Deviations of one backend from the oracle on one circuit.
#[derive(Debug, Clone, Default)]
pub struct BackendCheck {
    pub max_deviation: f64,
    pub queries: u64,
    pub tv: Option<f64>,
    pub skipped: Option<String>,
}

fn skippable(e: &Error) -> bool {
    exit_code(e) == 3
}

/// Full joint distribution on the oracle's support, plus the missing mass.
pub fn check_pfaffian(c: &Circuit, dist: &BranchDistribution, shots: usize, opts: &Options) -> Result<BackendCheck> {
    let sim = match PfaffianSim::with_config(c, opts.pfaffian()) {
        Ok(s) => s,
        Err(e) if skippable(&e) => return Ok(BackendCheck { skipped: Some(e.to_string()), ..Default::default() }),
        Err(e) => return Err(e),
    };
    let mut out = BackendCheck::default();
    let mut mass = 0.0;
    for (key, p) in &dist.probs {
        let assignment: Vec<(&str, u8)> = dist.ids.iter().map(|s| s.as_str()).zip(key.iter().copied()).collect();
        let q = sim.prob(&assignment)?;
        mass += q;
        out.queries += 1;
        out.max_deviation = out.max_deviation.max((q - p).abs());
    }
    out.max_deviation = out.max_deviation.max((1.0 - mass).abs());
    if shots > 0 && !c.final_records().is_empty() {
        let recs = sim.sample(shots, opts.seed)?;
        out.tv = Some(marginal_tv(dist, &recs, &dist.ids));
    }
    Ok(out)
}

/// `p(y, x_l = 1)` for every final line and every intermediate assignment.
pub fn check_heisenberg(c: &Circuit, dist: &BranchDistribution, opts: &Options) -> Result<BackendCheck> {
    let cfg = HeisenbergConfig { term_budget: XCHECK_TERM_BUDGET, ..opts.heisenberg() };
    let sim = match HeisenbergSim::with_config(c, cfg) {
        Ok(s) => s,
        Err(e) if skippable(&e) => return Ok(BackendCheck { skipped: Some(e.to_string()), ..Default::default() }),
        Err(e) => return Err(e),
    };
    let visible: Vec<RecordInfo> = c.records();
    let inter: Vec<&RecordInfo> = visible.iter().filter(|r| r.role == Role::Intermediate).collect();
    let finals: Vec<&RecordInfo> = visible.iter().filter(|r| r.role == Role::Final).collect();
    let mut out = BackendCheck::default();
    for f in &finals {
        for mask in 0u64..1 << inter.len() {
            let mut assignment: Vec<(&str, u8)> = inter.iter().enumerate().map(|(b, r)| (r.id.as_str(), (mask >> b & 1) as u8)).collect();
            assignment.push((f.id.as_str(), 1));
            let q = match sim.prob(&assignment) {
                Ok(q) => q,
                Err(e) if skippable(&e) => return Ok(BackendCheck { skipped: Some(e.to_string()), ..out }),
                Err(e) => return Err(e),
            };
            out.queries += 1;
            out.max_deviation = out.max_deviation.max((q - dist.prob(&assignment)).abs());
        }
    }
    Ok(out)
}

/// Random circuits used by `xcheck --random`: random bit inputs and up to
/// three intermediate measurements.
pub fn random_batch(n: usize, depth: usize, count: usize, seed: u64) -> Vec<Circuit> {
    (0..count)
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let spec = RandomCircuitSpec {
                input: InputSpec::bits(&bits),
                depth,
                intermediate: i % 4,
                guard_prob: 0.3,
                final_lines: None,
            };
            random_circuit(&spec, s)
        })
        .collect()
}

pub fn cmd_xcheck(circuits: &[(String, Circuit)], shots: usize, opts: &Options) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("xcheck", "heisenberg,pfaffian,oracle", Vec::new());
    report.seed = Some(opts.seed);
    let mut worst = BTreeMap::from([("heisenberg", 0.0f64), ("pfaffian", 0.0f64)]);
    let mut worst_tv: f64 = 0.0;
    let mut counts = BTreeMap::from([("heisenberg", 0u64), ("pfaffian", 0u64)]);
    for (label, c) in circuits {
        let dist = oracle_distribution(c)?;
        let checks = [("heisenberg", check_heisenberg(c, &dist, opts)?), ("pfaffian", check_pfaffian(c, &dist, shots, opts)?)];
        for (name, chk) in checks {
            if let Some(reason) = &chk.skipped {
                report.notes.push(format!("{label}: {name} skipped ({reason})"));
            }
            *counts.get_mut(name).unwrap() += chk.queries;
            let w = worst.get_mut(name).unwrap();
            *w = w.max(chk.max_deviation);
            if let Some(tv) = chk.tv {
                worst_tv = worst_tv.max(tv);
            }
        }
    }
    let max_dev = worst.values().copied().fold(0.0, f64::max);
    report.counters.insert("circuits".into(), circuits.len() as u64);
    for (name, n) in counts {
        report.counters.insert(format!("{name}_queries"), n);
    }
    for (name, w) in worst {
        report.metrics.insert(format!("max_deviation_{name}"), w);
    }
    report.metrics.insert("max_deviation".into(), max_dev);
    if shots > 0 {
        report.counters.insert("shots".into(), shots as u64);
        report.metrics.insert("max_marginal_tv".into(), worst_tv);
        if worst_tv > TV_TOL {
            report.flags.push(format!("marginal TV {worst_tv:e} > {TV_TOL:e}"));
        }
    }
    if max_dev > opts.tol {
        report.flags.push(format!("deviation {max_dev:e} > {:e}", opts.tol));
    }
    if opts.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Lowers all macros; returns the primitive circuit and its cost report.
pub fn cmd_gadget_expand(c: &Circuit) -> Result<(Circuit, RunReport)> {
    let lowered = gadgets::lower(c)?;
    let out = lowered.circuit;
    let mut report = RunReport::new("gadget expand", "none", record_ids(c));
    let cost = lowered.cost;
    report.counters.insert("gates".into(), cost.gates as u64);
    report.counters.insert("measurements".into(), cost.measurements as u64);
    report.counters.insert("magic_states".into(), cost.magic_states as u64);
    report.counters.insert("ancilla_lines".into(), (out.n() - c.n()) as u64);
    let added = out.intermediate_records().len() - c.intermediate_records().len();
    report.counters.insert("intermediate_measurements".into(), added as u64);
    report.counters.insert("hidden_records".into(), lowered.new_records.len() as u64);
    Ok((out, report))
}

/// Canonical text of an expanded circuit.
pub fn expanded_text(c: &Circuit) -> String {
    serialize_circuit(c)
}
