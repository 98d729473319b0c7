//! Sufficient conditions for a `(G, tau)` tester, parameter planners for each
//! model, and conjecture-conditional lower bounds.
//!
//! All certificates use the directed two-path count. Planners search `tau`
//! on a grid and refine around the best grid point, and every returned
//! [`Plan`] carries the report that certifies its own graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ComparisonGraph, GraphStats};
use crate::tester::threshold;

/// Relative slack when comparing a condition's two sides, so that exact
/// ties survive floating-point rounding.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

const TAU_MIN: f64 = 0.05;
const TAU_MAX: f64 = 0.95;

/// `0.05, 0.10, ..., 0.95`.
pub fn tau_grid() -> impl Iterator<Item = f64> + Clone {
    (1..=19).map(|i| i as f64 * 0.05)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub required: f64,
    pub actual: f64,
    pub pass: bool,
}

impl Condition {
    fn at_least(actual: f64, required: f64) -> Self {
        Condition { required, actual, pass: actual >= required * (1.0 - RELATIVE_TOLERANCE) }
    }

    fn at_most(actual: f64, required: f64) -> Self {
        Condition { required, actual, pass: actual <= required * (1.0 + RELATIVE_TOLERANCE) }
    }
}

/// The three sufficiency conditions for one `(G, tau)` at `(n, eps)`.
///
/// `cond1` and `cond2` are lower bounds on `|E|`; `cond3` is an upper bound on
/// `c(G) / |E|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub tau: f64,
    pub cond1: Condition,
    pub cond2: Condition,
    pub cond3: Condition,
    pub overall: bool,
}

impl ConditionReport {
    fn from_parts(tau: f64, cond1: Condition, cond2: Condition, cond3: Condition) -> Self {
        ConditionReport { tau, cond1, cond2, cond3, overall: cond1.pass && cond2.pass && cond3.pass }
    }
}

fn check_params(tau: f64, n: usize, eps: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
    }
    if n == 0 {
        return Err(Error::InvalidDomain("n must be positive".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Evaluates the conditions on graph statistics.
pub fn check_theorem(stats: GraphStats, tau: f64, n: usize, eps: f64) -> Result<ConditionReport> {
    check_params(tau, n, eps)?;
    if stats.edges == 0 {
        return Err(Error::invalid("comparison graph has no edges"));
    }
    let e = stats.edges as f64;
    let nf = n as f64;
    let eps2 = eps * eps;
    let eps4 = eps2 * eps2;
    Ok(ConditionReport::from_parts(
        tau,
        Condition::at_least(e, 4.0 * nf / (tau * tau * eps4)),
        Condition::at_least(e, 16.0 * nf / ((1.0 - tau).powi(2) * eps4)),
        Condition::at_most(stats.two_paths as f64 / (e * e), (1.0 - tau).powi(2) * eps2 / (16.0 * nf.sqrt())),
    ))
}

pub fn check_graph(graph: &ComparisonGraph, tau: f64, n: usize, eps: f64) -> Result<ConditionReport> {
    check_theorem(graph.stats(), tau, n, eps)
}

/// Every verdict available for `l` disjoint copies of `K_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointCliqueReport {
    pub q: u64,
    pub l: u64,
    /// Closed forms `q sqrt(l) >= sqrt(12 n) / (tau eps^2)`,
    /// `q sqrt(l) >= sqrt(48 n) / ((1 - tau) eps^2)` and
    /// `q l >= 24 sqrt(n) / ((1 - tau)^2 eps^2)`.
    pub closed_form: ConditionReport,
    /// As `closed_form` with the third constant 144, which is sufficient for
    /// the directed two-path count.
    pub rederived: ConditionReport,
    /// `q sqrt(l) >= 35 sqrt(n) / eps^2`, the single bound for `tau = 1/9`.
    pub single_bound: Condition,
    /// The conditions on the instantiated statistics.
    pub direct: ConditionReport,
    /// The conditions with `c(G) / 6`, i.e. `l binom(q, 3)`.
    pub triangle_convention: ConditionReport,
}

pub fn check_disjoint_cliques(q: u64, l: u64, tau: f64, n: usize, eps: f64) -> Result<DisjointCliqueReport> {
    check_params(tau, n, eps)?;
    if q < 3 || l < 1 {
        return Err(Error::invalid(format!("need q >= 3 and l >= 1, got q={q} l={l}")));
    }
    let stats = GraphStats::disjoint_cliques(q, l)?;
    let root_n = (n as f64).sqrt();
    let eps2 = eps * eps;
    let q_root_l = q as f64 * (l as f64).sqrt();
    let ql = (q * l) as f64;
    let closed = |c3: f64| {
        ConditionReport::from_parts(
            tau,
            Condition::at_least(q_root_l, 12f64.sqrt() * root_n / (tau * eps2)),
            Condition::at_least(q_root_l, 48f64.sqrt() * root_n / ((1.0 - tau) * eps2)),
            Condition::at_least(ql, c3 * root_n / ((1.0 - tau).powi(2) * eps2)),
        )
    };
    Ok(DisjointCliqueReport {
        q,
        l,
        closed_form: closed(24.0),
        rederived: closed(144.0),
        single_bound: Condition::at_least(q_root_l, 35.0 * root_n / eps2),
        direct: check_theorem(stats, tau, n, eps)?,
        triangle_convention: check_theorem(stats.with_two_paths(stats.two_paths / 6), tau, n, eps)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Centralized,
    Simultaneous,
    Asymmetric,
    Streaming,
    SimultaneousStreaming,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanFamily {
    /// One `K_q`.
    Clique,
    /// One `K_q` per player.
    DisjointCliques,
    /// `K_{q_i}` for player `i`, `q_i = floor(R_i t)`.
    PerRateCliques,
    /// Cliques of the batch size `m'`, one per batch; the owner is the global
    /// batch index (player `p` holds batches `p l_p .. (p + 1) l_p`).
    BatchedCliques,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResources {
    pub total_samples: u64,
    /// Largest per-player sample count.
    pub samples_per_player: u64,
    pub edges: u64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_bits: Option<u64>,
}

/// A certified tester for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub model: Model,
    pub family: PlanFamily,
    pub n: usize,
    pub eps: f64,
    pub tau: f64,
    /// `q`, `q'` or the batch size `m'`; 0 for per-rate plans.
    pub clique_size: u64,
    pub players: u64,
    /// Batches per player for batched plans, otherwise 1.
    pub cliques_per_player: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub player_sizes: Option<Vec<u64>>,
    pub resources: PlanResources,
    pub report: ConditionReport,
}

impl Plan {
    pub fn stats(&self) -> Result<GraphStats> {
        match self.family {
            PlanFamily::Clique => GraphStats::disjoint_cliques(self.clique_size, 1),
            PlanFamily::DisjointCliques => GraphStats::disjoint_cliques(self.clique_size, self.players),
            PlanFamily::BatchedCliques => {
                GraphStats::disjoint_cliques(self.clique_size, self.players * self.cliques_per_player)
            }
            PlanFamily::PerRateCliques => per_rate_stats(self.player_sizes.as_deref().unwrap_or_default()),
        }
    }

    /// Materialises the plan's comparison graph.
    pub fn graph(&self) -> Result<ComparisonGraph> {
        let q = self.clique_size as usize;
        match self.family {
            PlanFamily::Clique => ComparisonGraph::clique(q),
            PlanFamily::DisjointCliques => ComparisonGraph::disjoint_cliques(q, self.players as usize),
            PlanFamily::BatchedCliques => {
                ComparisonGraph::disjoint_cliques(q, (self.players * self.cliques_per_player) as usize)
            }
            PlanFamily::PerRateCliques => {
                let sizes = self.player_sizes.as_deref().unwrap_or_default();
                let blocks: Vec<_> = sizes.iter().enumerate().map(|(i, &s)| (s as usize, Some(i as u32))).collect();
                ComparisonGraph::from_clique_blocks(&blocks)
            }
        }
    }

    pub fn threshold(&self) -> f64 {
        self.resources.threshold
    }
}

/// `ceil(log2(T + 2))`: counts below `T` plus one overflow codepoint.
pub fn message_bits(t: f64) -> u32 {
    (t + 2.0).log2().ceil() as u32
}

/// Bits a streaming counter needs to hold every value up to `ceil(T)`.
pub fn counter_bits(t: f64) -> u32 {
    ((t.ceil() + 1.0).log2().ceil() as u32).max(1)
}

/// `max(1, ceil(log2 n))`.
pub fn bits_per_sample(n: usize) -> u32 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1)
}

/// `m' = floor(m / (2 bits_per_sample))`.
pub fn batch_size(n: usize, m_bits: u64) -> u64 {
    m_bits / (2 * bits_per_sample(n) as u64)
}

/// Smallest `x >= lo` with `passes(x)`, assuming monotonicity in `x`.
fn min_passing(lo: u64, passes: impl Fn(u64) -> Result<bool>) -> Result<u64> {
    let mut hi = lo.max(1);
    while !passes(hi)? {
        hi = hi
            .checked_mul(2)
            .filter(|&h| h <= 1 << 48)
            .ok_or_else(|| Error::capacity("planner search exceeded 2^48"))?;
    }
    let mut low = lo.max(hi / 2);
    if low < hi && passes(low)? {
        return Ok(low);
    }
    while hi - low > 1 {
        let mid = low + (hi - low) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            low = mid;
        }
    }
    Ok(hi)
}

/// Minimises an integer resource over `tau`: grid search, then a
/// golden-section pass around the best grid point.
///
/// A `tau` whose search overflows counts as infeasible; the call fails only
/// if every grid point does.
fn optimise_tau(resource: impl Fn(f64) -> Result<u64>) -> Result<(f64, u64)> {
    let resource = |tau: f64| match resource(tau) {
        Err(e) if e.is_capacity() => Ok(u64::MAX),
        other => other,
    };
    let mut best: Option<(f64, u64)> = None;
    for tau in tau_grid() {
        let r = resource(tau)?;
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((tau, r));
        }
    }
    let (grid_tau, grid_best) = best.expect("grid is non-empty");
    if grid_best == u64::MAX {
        return Err(Error::capacity("no tau on the grid admits a plan within u64 statistics"));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((grid_tau - 0.05).max(TAU_MIN), (grid_tau + 0.05).min(TAU_MAX));
    let probe = |tau: f64, best: &mut Option<(f64, u64)>| -> Result<u64> {
        let r = resource(tau)?;
        if best.is_some_and(|(_, b)| r < b) {
            *best = Some((tau, r));
        }
        Ok(r)
    };
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = probe(x1, &mut best)?;
    let mut f2 = probe(x2, &mut best)?;
    for _ in 0..30 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = probe(x1, &mut best)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = probe(x2, &mut best)?;
        }
    }
    Ok(best.expect("grid is non-empty"))
}

fn check_inputs(n: usize, eps: f64) -> Result<()> {
    check_params(0.5, n, eps)
}

fn passes(stats: GraphStats, tau: f64, n: usize, eps: f64) -> Result<bool> {
    if stats.edges == 0 {
        return Ok(false);
    }
    Ok(check_theorem(stats, tau, n, eps)?.overall)
}

fn finish(
    model: Model,
    family: PlanFamily,
    n: usize,
    eps: f64,
    tau: f64,
    shape: (u64, u64, u64),
    stats: GraphStats,
) -> Result<Plan> {
    let (clique_size, players, cliques_per_player) = shape;
    let t = threshold(stats.edges, n, eps, tau);
    Ok(Plan {
        model,
        family,
        n,
        eps,
        tau,
        clique_size,
        players,
        cliques_per_player,
        rates: None,
        player_sizes: None,
        resources: PlanResources {
            total_samples: stats.vertices,
            samples_per_player: stats.vertices / players.max(1),
            edges: stats.edges,
            threshold: t,
            time: None,
            message_bits: None,
            memory_bits: None,
        },
        report: check_theorem(stats, tau, n, eps)?,
    })
}

/// Smallest clique `K_q` certified for some `tau`.
pub fn plan_centralized(n: usize, eps: f64) -> Result<Plan> {
    check_inputs(n, eps)?;
    let (tau, q) = optimise_tau(|tau| min_passing(3, |q| passes(GraphStats::disjoint_cliques(q, 1)?, tau, n, eps)))?;
    finish(Model::Centralized, PlanFamily::Clique, n, eps, tau, (q, 1, 1), GraphStats::disjoint_cliques(q, 1)?)
}

/// `k` equal cliques, one per player.
pub fn plan_simultaneous(n: usize, eps: f64, k: u64) -> Result<Plan> {
    check_inputs(n, eps)?;
    if k == 0 {
        return Err(Error::invalid("need at least one player"));
    }
    let (tau, q) = optimise_tau(|tau| min_passing(2, |q| passes(GraphStats::disjoint_cliques(q, k)?, tau, n, eps)))?;
    let stats = GraphStats::disjoint_cliques(q, k)?;
    let mut plan = finish(Model::Simultaneous, PlanFamily::DisjointCliques, n, eps, tau, (q, k, 1), stats)?;
    plan.resources.message_bits = Some(message_bits(plan.resources.threshold));
    Ok(plan)
}

/// Per-player clique sizes `floor(R_i t)`.
pub fn rate_sizes(rates: &[f64], t: f64) -> Vec<u64> {
    rates.iter().map(|r| (r * t * (1.0 + RELATIVE_TOLERANCE)).floor() as u64).collect()
}

fn per_rate_stats(sizes: &[u64]) -> Result<GraphStats> {
    sizes.iter().try_fold(GraphStats { vertices: 0, edges: 0, two_paths: 0 }, |acc, &q| {
        let s = GraphStats::disjoint_cliques(q, 1)?;
        let overflow = || Error::capacity("per-rate statistics overflow u64");
        Ok(GraphStats {
            vertices: acc.vertices.checked_add(s.vertices).ok_or_else(overflow)?,
            edges: acc.edges.checked_add(s.edges).ok_or_else(overflow)?,
            two_paths: acc.two_paths.checked_add(s.two_paths).ok_or_else(overflow)?,
        })
    })
}

/// Smallest time `t` such that per-rate cliques `K_{floor(R_i t)}` certify.
pub fn plan_asymmetric(n: usize, eps: f64, rates: &[f64]) -> Result<Plan> {
    check_inputs(n, eps)?;
    if rates.is_empty() || rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::invalid("rates must be finite and non-negative"));
    }
    if rates.iter().all(|&r| r == 0.0) {
        return Err(Error::invalid("at least one rate must be positive"));
    }
    let ok = |t: f64, tau: f64| passes(per_rate_stats(&rate_sizes(rates, t))?, tau, n, eps);
    let min_time = |tau: f64| -> Result<f64> {
        let mut hi = 1.0;
        while !ok(hi, tau)? {
            hi *= 2.0;
            if hi > 2f64.powi(48) {
                return Err(Error::capacity("planner search exceeded 2^48"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if ok(mid, tau)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(snap_time(rates, hi))
    };
    // Objective: t in units of 2^-20.
    let (tau, _) = optimise_tau(|tau| Ok((min_time(tau)? * (1u64 << 20) as f64).ceil() as u64))?;
    let t = min_time(tau)?;
    let sizes = rate_sizes(rates, t);
    let stats = per_rate_stats(&sizes)?;
    let k = rates.len() as u64;
    let mut plan = finish(Model::Asymmetric, PlanFamily::PerRateCliques, n, eps, tau, (0, k, 1), stats)?;
    plan.resources.samples_per_player = sizes.iter().copied().max().unwrap_or(0);
    plan.resources.time = Some(t);
    plan.resources.message_bits = Some(message_bits(plan.resources.threshold));
    plan.rates = Some(rates.to_vec());
    plan.player_sizes = Some(sizes);
    Ok(plan)
}

/// The smallest `t' <= t` yielding the same per-player sizes as `t`.
fn snap_time(rates: &[f64], t: f64) -> f64 {
    let sizes = rate_sizes(rates, t);
    let snapped = rates.iter().zip(&sizes).filter(|(r, _)| **r > 0.0).map(|(r, &q)| q as f64 / r).fold(0.0, f64::max);
    if rate_sizes(rates, snapped) == sizes {
        snapped
    } else {
        t
    }
}

/// Batches of size `m'` (a clique each) for one streaming player, ignoring
/// the counter budget.
pub fn plan_batched(n: usize, eps: f64, m_prime: u64) -> Result<Plan> {
    check_inputs(n, eps)?;
    if m_prime < 3 {
        return Err(Error::capacity(format!("batch size m' = {m_prime} is below 3")));
    }
    let central = plan_centralized(n, eps)?;
    let bits = bits_per_sample(n) as u64;
    if m_prime >= central.clique_size {
        let mut plan = Plan { model: Model::Streaming, ..central };
        plan.resources.memory_bits = Some(plan.clique_size * bits + counter_bits(plan.threshold()) as u64);
        return Ok(plan);
    }
    let (tau, l) =
        optimise_tau(|tau| min_passing(1, |l| passes(GraphStats::disjoint_cliques(m_prime, l)?, tau, n, eps)))?;
    let stats = GraphStats::disjoint_cliques(m_prime, l)?;
    let mut plan = finish(Model::Streaming, PlanFamily::BatchedCliques, n, eps, tau, (m_prime, 1, l), stats)?;
    plan.resources.memory_bits = Some(m_prime * bits + counter_bits(plan.threshold()) as u64);
    Ok(plan)
}

fn check_counter_budget(plan: &Plan, m_bits: u64) -> Result<()> {
    let need = message_bits(plan.threshold()) as u64;
    if m_bits / 2 < need {
        return Err(Error::capacity(format!(
            "counter budget: m/2 = {} bits cannot hold ceil(log2(T + 2)) = {need} bits",
            m_bits / 2
        )));
    }
    Ok(())
}

/// One streaming player with `m_bits` of memory.
pub fn plan_streaming(n: usize, eps: f64, m_bits: u64) -> Result<Plan> {
    let m_prime = batch_size(n, m_bits);
    if m_prime < 3 {
        return Err(Error::capacity(format!(
            "batch size: m' = floor({m_bits} / (2 * {})) = {m_prime} is below 3",
            bits_per_sample(n)
        )));
    }
    let plan = plan_batched(n, eps, m_prime)?;
    check_counter_budget(&plan, m_bits)?;
    Ok(plan)
}

/// `k` streaming players with `m_bits` each.
pub fn plan_simultaneous_streaming(n: usize, eps: f64, k: u64, m_bits: u64) -> Result<Plan> {
    let m_prime = batch_size(n, m_bits);
    let simultaneous = plan_simultaneous(n, eps, k)?;
    if m_prime >= simultaneous.clique_size {
        let mut plan = Plan { model: Model::SimultaneousStreaming, ..simultaneous };
        plan.resources.memory_bits =
            Some(plan.clique_size * bits_per_sample(n) as u64 + counter_bits(plan.threshold()) as u64);
        check_counter_budget(&plan, m_bits)?;
        return Ok(plan);
    }
    let single = plan_streaming(n, eps, m_bits)?;
    let batches = single.stats()?.vertices.div_ceil(m_prime);
    let per_player = batches.div_ceil(k);
    let stats = GraphStats::disjoint_cliques(m_prime, per_player * k)?;
    let mut plan = finish(
        Model::SimultaneousStreaming,
        PlanFamily::BatchedCliques,
        n,
        eps,
        single.tau,
        (m_prime, k, per_player),
        stats,
    )?;
    plan.resources.message_bits = Some(message_bits(plan.threshold()));
    plan.resources.memory_bits = Some(m_prime * bits_per_sample(n) as u64 + counter_bits(plan.threshold()) as u64);
    check_counter_budget(&plan, m_bits)?;
    Ok(plan)
}

/// `coefficient * n / eps^4`; an assumption, not a proven bound.
pub fn conjectured_edge_floor(n: usize, eps: f64, coefficient: f64) -> f64 {
    coefficient * n as f64 / eps.powi(4)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FloorModel {
    Centralized,
    Simultaneous { k: u64 },
    Asymmetric { rates: Vec<f64> },
    Streaming { m_prime: u64 },
    SimultaneousStreaming { k: u64, m_prime: u64 },
}

/// The sample (or time) floor implied by needing `e_min` edges: total
/// samples for centralized and streaming, per-player samples for the
/// multi-player models, and time for the asymmetric model.
pub fn conjectured_lower_bound(model: &FloorModel, e_min: f64) -> Result<f64> {
    let positive = |x: u64, what: &str| {
        if x == 0 {
            Err(Error::invalid(format!("{what} must be positive")))
        } else {
            Ok(x as f64)
        }
    };
    Ok(match model {
        FloorModel::Centralized => (2.0 * e_min).sqrt(),
        FloorModel::Simultaneous { k } => (2.0 * e_min / positive(*k, "k")?).sqrt(),
        FloorModel::Asymmetric { rates } => {
            let norm = rates.iter().map(|r| r * r).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::invalid("at least one rate must be positive"));
            }
            (2.0 * e_min).sqrt() / norm
        }
        FloorModel::Streaming { m_prime } => e_min / positive(*m_prime, "m'")?,
        FloorModel::SimultaneousStreaming { k, m_prime } => {
            let k = positive(*k, "k")?;
            (2.0 * e_min / k).sqrt().max(e_min / (positive(*m_prime, "m'")? * k))
        }
    })
}

/// A certified cycle `H` and the supergraph `G` that adds a hub.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub h: ComparisonGraph,
    pub g: ComparisonGraph,
    pub h_report: ConditionReport,
    /// One report per grid `tau`.
    pub g_reports: Vec<ConditionReport>,
    pub g_ratio: f64,
}

/// `H = cycle(ceil(b n / eps^4))`; `G` joins vertex 0 of `H` to every vertex
/// it is not yet adjacent to.
pub fn appendix_counterexample(n: usize, eps: f64, b: f64) -> Result<Counterexample> {
    check_inputs(n, eps)?;
    let size = (b * n as f64 / eps.powi(4)).ceil();
    if !(3.0..=1e7).contains(&size) {
        return Err(Error::invalid(format!("cycle size {size} outside 3..=10^7")));
    }
    let size = size as usize;
    let h = ComparisonGraph::cycle(size)?;
    let h_report = tau_grid()
        .map(|tau| check_graph(&h, tau, n, eps))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .find(|r| r.overall)
        .ok_or_else(|| {
            Error::invalid(format!("b = {b} is too small: no grid tau certifies the cycle of size {size}"))
        })?;
    let hub_edges = (2..size - 1).map(|v| (0, v));
    let g = ComparisonGraph::from_edges(size, h.edges().chain(hub_edges), None)?;
    let g_reports = tau_grid().map(|tau| check_graph(&g, tau, n, eps)).collect::<Result<Vec<_>>>()?;
    let e = g.edge_count() as f64;
    Ok(Counterexample { g_ratio: g.two_path_count() as f64 / (e * e), h, g, h_report, g_reports })
}
