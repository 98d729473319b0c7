//! Resource-accounting simulators for the distributed and streaming models.
//!
//! Every simulator runs a [`Plan`] as a set of players. A player owns a list
//! of batches; each batch is a clique of the plan's graph and is drawn from
//! the RNG lane the monolithic tester uses for the same vertices, so a model
//! run and [`TesterSpec::run`](crate::tester::TesterSpec::run) on the same
//! [`StreamId`] see identical samples.

use serde::{Deserialize, Serialize};

use crate::conditions::{bits_per_sample, counter_bits, message_bits, rate_sizes, Model, Plan, PlanFamily};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph::{ComparisonGraph, GraphStats};
use crate::rng::StreamId;
use crate::tester::{threshold, CollisionCounter, Decision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Payload {
    Count(u64),
    Overflow,
}

/// One player-to-referee message: a fixed-width count field whose all-ones
/// code is the overflow sentinel, and an optional exponent field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub payload: Payload,
    pub count_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<u32>,
    pub exponent_bits: u32,
}

impl Message {
    /// Encodes `z` against a count cap: values `< cap` are literal, anything
    /// else is the sentinel.
    pub fn encode(z: u64, cap: u64) -> Message {
        let count_bits = message_bits(cap as f64);
        let payload = if z < cap { Payload::Count(z) } else { Payload::Overflow };
        Message { payload, count_bits, exponent: None, exponent_bits: 0 }
    }

    pub fn with_exponent(self, exponent: u32, exponent_bits: u32) -> Message {
        Message { exponent: Some(exponent), exponent_bits, ..self }
    }

    pub fn encoded_bits(&self) -> u32 {
        self.count_bits + self.exponent_bits
    }

    /// The count field as transmitted.
    pub fn count_code(&self) -> u64 {
        match self.payload {
            Payload::Count(z) => z,
            Payload::Overflow => (1u64 << self.count_bits) - 1,
        }
    }

    pub fn decode_count(code: u64, count_bits: u32) -> Payload {
        if code == (1u64 << count_bits) - 1 {
            Payload::Overflow
        } else {
            Payload::Count(code)
        }
    }

    /// Bit-level encoding, count field first.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = bits_of(self.count_code(), self.count_bits);
        if let Some(e) = self.exponent {
            out.extend(bits_of(e.saturating_sub(1) as u64, self.exponent_bits));
        }
        out
    }
}

fn bits_of(value: u64, width: u32) -> Vec<bool> {
    (0..width).rev().map(|i| value >> i & 1 == 1).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub samples: Vec<u64>,
    pub message_bits: Vec<u32>,
    pub peak_memory_bits: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    pub violations: Vec<String>,
}

impl ResourceLedger {
    pub fn total_samples(&self) -> u64 {
        self.samples.iter().sum()
    }

    pub fn max_message_bits(&self) -> u32 {
        self.message_bits.iter().copied().max().unwrap_or(0)
    }

    pub fn max_memory_bits(&self) -> u64 {
        self.peak_memory_bits.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub decision: Decision,
    /// Sum of the reported counts; a sentinel or an early stop contributes
    /// the count cap.
    pub z: u64,
    pub threshold: f64,
    pub early_stop: bool,
    pub messages: Vec<Message>,
    pub ledger: ResourceLedger,
}

/// `(lane, size)` for every batch of every player.
pub fn schedule(plan: &Plan) -> Result<Vec<Vec<(u64, u64)>>> {
    Ok(match plan.family {
        PlanFamily::Clique => vec![vec![(0, plan.clique_size)]],
        PlanFamily::DisjointCliques => (0..plan.players).map(|p| vec![(p, plan.clique_size)]).collect(),
        PlanFamily::PerRateCliques => plan
            .player_sizes
            .as_ref()
            .ok_or_else(|| Error::invalid("per-rate plan without player sizes"))?
            .iter()
            .enumerate()
            .map(|(p, &q)| vec![(p as u64, q)])
            .collect(),
        PlanFamily::BatchedCliques => {
            let l = plan.cliques_per_player;
            (0..plan.players).map(|p| (0..l).map(|j| (p * l + j, plan.clique_size)).collect()).collect()
        }
    })
}

struct PlayerRun {
    count: u64,
    stopped: bool,
    samples: u64,
    peak_memory: u64,
}

/// One player processing its batches in order. The counter saturates at
/// `cap`; with `stop_early` the player quits once it reaches `t`.
fn run_player(
    batches: &[(u64, u64)],
    p: &Distribution,
    stream: StreamId,
    t: f64,
    cap: u64,
    stop_early: bool,
) -> PlayerRun {
    let sample_bits = bits_per_sample(p.n()) as u64;
    let mut counter = CollisionCounter::default();
    let mut buffer = Vec::new();
    let mut run = PlayerRun { count: 0, stopped: false, samples: 0, peak_memory: counter_bits(cap as f64) as u64 };
    for &(lane, size) in batches {
        buffer.clear();
        p.sample_into(&mut stream.with_lane(lane).rng(), size as usize, &mut buffer);
        run.samples += size;
        run.peak_memory = run.peak_memory.max(size * sample_bits + counter_bits(cap as f64) as u64);
        run.count = (run.count + counter.clique_collisions(&buffer)).min(cap);
        if stop_early && run.count as f64 >= t {
            run.stopped = true;
            break;
        }
    }
    run
}

fn ceil_cap(t: f64) -> u64 {
    t.ceil() as u64
}

/// Players send one message each; the referee sums them.
fn referee_run(
    plan: &Plan,
    p: &Distribution,
    stream: StreamId,
    stop_early: bool,
    memory_budget: Option<u64>,
) -> Result<ModelRun> {
    check_domain(plan, p)?;
    let t = plan.threshold();
    let cap = ceil_cap(t);
    let width = message_bits(t);
    let mut ledger = ResourceLedger::default();
    let mut messages = Vec::new();
    for batches in schedule(plan)? {
        let run = run_player(&batches, p, stream, t, cap, stop_early);
        let msg = Message::encode(run.count, cap);
        if msg.encoded_bits() > width {
            ledger.violations.push(format!("message of {} bits exceeds {width}", msg.encoded_bits()));
        }
        if let Some(m) = memory_budget.filter(|&m| run.peak_memory > m) {
            ledger.violations.push(format!("peak memory {} bits exceeds {m}", run.peak_memory));
        }
        ledger.samples.push(run.samples);
        ledger.message_bits.push(msg.encoded_bits());
        ledger.peak_memory_bits.push(run.peak_memory);
        messages.push(msg);
    }
    let (z, decision) = referee_decide(&messages, t, cap);
    finish(ModelRun { decision, z, threshold: t, early_stop: false, messages, ledger })
}

fn referee_decide(messages: &[Message], t: f64, cap: u64) -> (u64, Decision) {
    let mut z = 0u64;
    let mut overflow = false;
    for msg in messages {
        match Message::decode_count(msg.count_code(), msg.count_bits) {
            Payload::Count(c) => z += c,
            Payload::Overflow => {
                overflow = true;
                z += cap;
            }
        }
    }
    let decision = if !overflow && (z as f64) < t { Decision::Yes } else { Decision::No };
    (z, decision)
}

fn finish(run: ModelRun) -> Result<ModelRun> {
    match run.ledger.violations.first() {
        Some(v) => Err(Error::ModelViolation(v.clone())),
        None => Ok(run),
    }
}

fn check_domain(plan: &Plan, p: &Distribution) -> Result<()> {
    if p.n() != plan.n {
        return Err(Error::invalid(format!("distribution over [{}] for a plan over [{}]", p.n(), plan.n)));
    }
    Ok(())
}

fn require(plan: &Plan, families: &[PlanFamily], what: &str) -> Result<()> {
    if !families.contains(&plan.family) {
        return Err(Error::invalid(format!("{what} cannot run a {:?} plan", plan.family)));
    }
    Ok(())
}

/// `k` players, one clique each, one message each.
pub fn simulate_simultaneous(plan: &Plan, p: &Distribution, stream: StreamId) -> Result<ModelRun> {
    require(
        plan,
        &[PlanFamily::Clique, PlanFamily::DisjointCliques, PlanFamily::PerRateCliques],
        "simultaneous model",
    )?;
    referee_run(plan, p, stream, false, None)
}

/// Player `i` collects `floor(R_i t)` samples.
pub fn simulate_asymmetric(plan: &Plan, p: &Distribution, stream: StreamId) -> Result<ModelRun> {
    require(plan, &[PlanFamily::PerRateCliques], "asymmetric model")?;
    let rates = plan.rates.as_deref().ok_or_else(|| Error::invalid("asymmetric plan without rates"))?;
    let t = plan.resources.time.ok_or_else(|| Error::invalid("asymmetric plan without a time"))?;
    let mut run = referee_run(plan, p, stream, false, None)?;
    if rate_sizes(rates, t) != run.ledger.samples {
        return Err(Error::ModelViolation(format!(
            "per-player samples {:?} differ from floor(R_i t) at t = {t}",
            run.ledger.samples
        )));
    }
    run.ledger.time = Some(t);
    Ok(run)
}

/// One player streaming batches of `m'` with `m_bits` of memory.
pub fn simulate_streaming(plan: &Plan, p: &Distribution, stream: StreamId, m_bits: u64) -> Result<ModelRun> {
    require(plan, &[PlanFamily::Clique, PlanFamily::BatchedCliques], "streaming model")?;
    if plan.players != 1 {
        return Err(Error::invalid("streaming plans have one player"));
    }
    check_domain(plan, p)?;
    let t = plan.threshold();
    let cap = ceil_cap(t);
    let batches = &schedule(plan)?[0];
    let run = run_player(batches, p, stream, t, cap, true);
    let mut ledger = ResourceLedger {
        samples: vec![run.samples],
        message_bits: vec![],
        peak_memory_bits: vec![run.peak_memory],
        ..Default::default()
    };
    if run.peak_memory > m_bits {
        ledger.violations.push(format!("peak memory {} bits exceeds m = {m_bits}", run.peak_memory));
    }
    let decision = if !run.stopped && (run.count as f64) < t { Decision::Yes } else { Decision::No };
    finish(ModelRun { decision, z: run.count, threshold: t, early_stop: run.stopped, messages: vec![], ledger })
}

/// `k` streaming players with `m_bits` each, then one message each.
pub fn simulate_simultaneous_streaming(
    plan: &Plan,
    p: &Distribution,
    stream: StreamId,
    m_bits: u64,
) -> Result<ModelRun> {
    require(
        plan,
        &[PlanFamily::Clique, PlanFamily::DisjointCliques, PlanFamily::BatchedCliques],
        "simultaneous streaming model",
    )?;
    let mut run = referee_run(plan, p, stream, true, Some(m_bits))?;
    run.early_stop = run.messages.iter().any(|m| m.payload == Payload::Overflow);
    Ok(run)
}

/// Dispatches on the plan's model. `m_bits` is required for streaming models.
pub fn simulate(plan: &Plan, p: &Distribution, stream: StreamId, m_bits: Option<u64>) -> Result<ModelRun> {
    let need_m = || m_bits.ok_or_else(|| Error::invalid("streaming models need a memory budget"));
    match plan.model {
        Model::Centralized | Model::Simultaneous => simulate_simultaneous(plan, p, stream),
        Model::Asymmetric => simulate_asymmetric(plan, p, stream),
        Model::Streaming => simulate_streaming(plan, p, stream, need_m()?),
        Model::SimultaneousStreaming => simulate_simultaneous_streaming(plan, p, stream, need_m()?),
    }
}

/// Per-player sizes after rounding up to `2^e` with `e >= 1`.
pub fn oblivious_sizes(plan: &Plan) -> Result<Vec<u64>> {
    Ok(schedule(plan)?
        .iter()
        .map(|batches| batches.iter().map(|b| b.1).sum::<u64>().max(2).next_power_of_two())
        .collect())
}

/// The comparison graph an oblivious run actually uses.
pub fn oblivious_graph(plan: &Plan) -> Result<ComparisonGraph> {
    let blocks: Vec<_> =
        oblivious_sizes(plan)?.iter().enumerate().map(|(i, &q)| (q as usize, Some(i as u32))).collect();
    ComparisonGraph::from_clique_blocks(&blocks)
}

/// Simultaneous model where players know only an upper bound `k_upper` on
/// the number of players. Each player rounds its sample count up to `2^e`
/// and sends `e` next to its count, so the referee can rebuild `|E|` and `T`.
/// The count field is sized for the largest threshold any `k <= k_upper`
/// players could produce.
pub fn simulate_oblivious(plan: &Plan, p: &Distribution, stream: StreamId, k_upper: u64) -> Result<ModelRun> {
    require(plan, &[PlanFamily::Clique, PlanFamily::DisjointCliques, PlanFamily::PerRateCliques], "oblivious model")?;
    check_domain(plan, p)?;
    if k_upper < plan.players {
        return Err(Error::invalid(format!("k_upper = {k_upper} is below the {} players", plan.players)));
    }
    let sizes = oblivious_sizes(plan)?;
    let max_size = sizes.iter().copied().max().unwrap_or(2);
    let e_max = max_size.trailing_zeros();
    let exponent_bits = u32::BITS - (e_max - 1).leading_zeros();
    let worst = GraphStats::disjoint_cliques(max_size, k_upper)?;
    let cap = ceil_cap(threshold(worst.edges, plan.n, plan.eps, plan.tau));

    let mut ledger = ResourceLedger::default();
    let mut messages = Vec::new();
    for (player, &size) in sizes.iter().enumerate() {
        let run = run_player(&[(player as u64, size)], p, stream, f64::INFINITY, cap, false);
        let msg = Message::encode(run.count, cap).with_exponent(size.trailing_zeros(), exponent_bits);
        ledger.samples.push(run.samples);
        ledger.message_bits.push(msg.encoded_bits());
        ledger.peak_memory_bits.push(run.peak_memory);
        messages.push(msg);
    }
    let edges: u64 = messages
        .iter()
        .map(|m| GraphStats::disjoint_cliques(1 << m.exponent.unwrap_or(0), 1).map(|s| s.edges))
        .sum::<Result<u64>>()?;
    let t = threshold(edges, plan.n, plan.eps, plan.tau);
    let (z, decision) = referee_decide(&messages, t, cap);
    finish(ModelRun { decision, z, threshold: t, early_stop: false, messages, ledger })
}
