//! A synchronous CONGEST simulator.
//!
//! Each node holds one sample. In every round a node may send messages to its
//! neighbours; all messages sent in round `r` are delivered before round
//! `r + 1`. The engine meters bits per directed edge per round against the
//! channel width `CHANNEL_FACTOR * (ceil(log2(n + 1)) + ceil(log2(k + 1)))`
//! and fails the run if any edge is overloaded. A round is counted when at
//! least one message is sent in it.
//!
//! Round budgets, with `D` the diameter and `s` the bundle size:
//!
//! | procedure                  | rounds                         |
//! |----------------------------|--------------------------------|
//! | BFS tree                   | `<= D + 2`                     |
//! | detection                  | `<= 2 D`                       |
//! | local collision protocol   | `<= 1 + D`                     |
//! | pipelined bundle protocol  | `<= PIPE_FACTOR (D + s) + PIPE_OFFSET` |
//! | graph-power detection      | `<= (cap + 2) t D`             |
//!
//! Tree procedures other than BFS take a built [`BfsTree`] and report only
//! their own rounds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conditions::{check_theorem, counter_bits, message_bits, tau_grid};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, ComparisonGraph, GraphStats};
use crate::models::{Message, Payload};
use crate::rng::StreamId;
use crate::tester::{count_collisions_in, threshold, CollisionCounter, Decision, TesterSpec};

pub const CHANNEL_FACTOR: u32 = 6;
pub const BFS_FACTOR: usize = 1;
pub const BFS_OFFSET: usize = 2;
pub const DETECT_FACTOR: usize = 2;
pub const SUM_FACTOR: usize = 1;
pub const SUM_OFFSET: usize = 0;
pub const PIPE_FACTOR: usize = 4;
pub const PIPE_OFFSET: usize = 2;

/// Bits to write any value in `0..=max`.
fn width(max: u64) -> u32 {
    (u64::BITS - max.leading_zeros()).max(1)
}

/// A connected communication network over `k` nodes with unique ids.
#[derive(Clone, Debug)]
pub struct Network {
    topology: Arc<ComparisonGraph>,
    ids: Vec<u64>,
    adj: Vec<Vec<usize>>,
    diameter: usize,
    domain: usize,
    channel_bits: u32,
    record: bool,
}

impl Network {
    /// `ids` defaults to `0..k`. `domain` is the sample domain size `n`.
    pub fn new(topology: impl Into<Arc<ComparisonGraph>>, ids: Option<Vec<u64>>, domain: usize) -> Result<Self> {
        let topology = topology.into();
        let k = topology.vertex_count();
        if k == 0 {
            return Err(Error::InvalidNetwork("network needs at least one node".into()));
        }
        if domain == 0 {
            return Err(Error::InvalidDomain("n must be positive".into()));
        }
        let ids = ids.unwrap_or_else(|| (0..k as u64).collect());
        if ids.len() != k {
            return Err(Error::InvalidNetwork(format!("{} ids for {k} nodes", ids.len())));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidNetwork("node ids must be unique".into()));
        }
        let adj: Vec<Vec<usize>> =
            topology.adjacency().into_iter().map(|l| l.into_iter().map(|v| v as usize).collect()).collect();
        let adj32 = topology.adjacency();
        let mut diameter = 0;
        for src in 0..k {
            let reach = bfs_distances(&adj32, src, None);
            if reach.len() != k {
                return Err(Error::InvalidNetwork("topology is disconnected".into()));
            }
            diameter = diameter.max(reach.iter().map(|r| r.1).max().unwrap_or(0));
        }
        let channel_bits = CHANNEL_FACTOR * (width(domain as u64) + width(k as u64));
        let net = Network { topology, ids, adj, diameter, domain, channel_bits, record: false };
        if net.id_bits() + net.k_bits() > channel_bits {
            return Err(Error::InvalidNetwork("node ids too wide for the channel".into()));
        }
        Ok(net)
    }

    /// Keep a per-message event log in every outcome.
    pub fn with_recording(mut self, record: bool) -> Self {
        self.record = record;
        self
    }

    pub fn k(&self) -> usize {
        self.ids.len()
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn channel_bits(&self) -> u32 {
        self.channel_bits
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn topology(&self) -> &ComparisonGraph {
        &self.topology
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    fn id_bits(&self) -> u32 {
        width(self.ids.iter().copied().max().unwrap_or(0))
    }

    fn k_bits(&self) -> u32 {
        width(self.k() as u64)
    }

    fn sample_bits(&self) -> u32 {
        width(self.domain.saturating_sub(1) as u64)
    }

    /// One sample per node, node `i` taking the `i`-th draw of lane 0.
    pub fn samples(&self, p: &Distribution, stream: StreamId) -> Result<Vec<u32>> {
        if p.n() != self.domain {
            return Err(Error::invalid(format!("distribution over [{}] for a network over [{}]", p.n(), self.domain)));
        }
        Ok(p.sample_labeling(self.k(), stream).values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Msg {
    Flood { leader: u64, dist: u64 },
    Child,
    Degrees { degree_sum: u64, two_paths: u64 },
    Verdict { certified: bool, tau_index: u8 },
    Sample { value: u32 },
    Count { value: u64 },
    SubtreeSize { value: u64 },
    Setup { bundle: u64, tau_index: u8 },
    Answer { code: u64, width: u32 },
    Id { id: u64 },
}

impl Msg {
    fn bits(&self, net: &Network) -> u32 {
        let kb = net.k_bits();
        match self {
            Msg::Flood { .. } => net.id_bits() + kb,
            Msg::Child => 1,
            Msg::Degrees { .. } => 5 * kb,
            Msg::Verdict { .. } => 6,
            Msg::Sample { .. } => net.sample_bits(),
            Msg::Count { .. } => 2 * kb,
            Msg::SubtreeSize { .. } => kb,
            Msg::Setup { .. } => kb + 5,
            Msg::Answer { width, .. } => *width,
            Msg::Id { .. } => net.id_bits(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub round: usize,
    pub from: u64,
    pub to: u64,
    pub bits: u32,
    pub msg: Msg,
}

type Inbox = Vec<Vec<(usize, Msg)>>;

struct Engine<'a> {
    net: &'a Network,
    rounds: usize,
    load: std::collections::HashMap<(usize, usize), u32>,
    events: Vec<Event>,
}

impl<'a> Engine<'a> {
    fn new(net: &'a Network) -> Self {
        Engine { net, rounds: 0, load: Default::default(), events: Vec::new() }
    }

    /// Runs one round: meters and delivers `outbox`. Empty outboxes cost
    /// nothing.
    fn round(&mut self, outbox: Vec<(usize, usize, Msg)>) -> Result<Inbox> {
        let mut inbox = vec![Vec::new(); self.net.k()];
        if outbox.is_empty() {
            return Ok(inbox);
        }
        self.rounds += 1;
        self.load.clear();
        for (from, to, msg) in outbox {
            if self.net.adj[from].binary_search(&to).is_err() {
                return Err(Error::ModelViolation(format!("nodes {from} and {to} are not adjacent")));
            }
            let bits = msg.bits(self.net);
            let used = self.load.entry((from, to)).or_insert(0);
            *used += bits;
            if *used > self.net.channel_bits {
                return Err(Error::ModelViolation(format!(
                    "round {}: edge {from}->{to} carries {} bits over a {}-bit channel",
                    self.rounds, used, self.net.channel_bits
                )));
            }
            if self.net.record {
                let ids = &self.net.ids;
                self.events.push(Event { round: self.rounds, from: ids[from], to: ids[to], bits, msg });
            }
            inbox[to].push((from, msg));
        }
        Ok(inbox)
    }
}

/// Replays a transcript: checks every directed edge load per round and
/// returns the number of rounds it spans.
pub fn audit_transcript(events: &[Event], channel_bits: u32) -> Result<usize> {
    let mut load = std::collections::HashMap::new();
    for e in events {
        let used = load.entry((e.round, e.from, e.to)).or_insert(0u32);
        *used += e.bits;
        if *used > channel_bits {
            return Err(Error::ModelViolation(format!("round {}: edge {}->{} overloaded", e.round, e.from, e.to)));
        }
    }
    Ok(events.iter().map(|e| e.round).max().unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    /// Children of each node, ordered by id.
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
}

impl BfsTree {
    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Nodes in depth-first pre-order, children visited in id order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.parent.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    fn postorder(&self) -> Vec<usize> {
        let mut order = self.preorder();
        order.reverse();
        order
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BfsOutcome {
    pub tree: BfsTree,
    pub rounds: usize,
    pub events: Vec<Event>,
}

/// Max-id flooding: every node adopts the largest id it has heard of and the
/// neighbour that first reported it at the smallest distance as its parent.
/// A final round tells each parent its children.
pub fn build_bfs_tree(net: &Network) -> Result<BfsOutcome> {
    let k = net.k();
    let mut engine = Engine::new(net);
    let mut best: Vec<(u64, u64)> = net.ids.iter().map(|&id| (id, 0)).collect();
    let mut parent: Vec<Option<usize>> = vec![None; k];
    let mut changed: Vec<bool> = vec![true; k];
    if k > 1 {
        loop {
            let mut outbox = Vec::new();
            for v in 0..k {
                if changed[v] {
                    let (leader, dist) = best[v];
                    outbox.extend(net.adj[v].iter().map(|&u| (v, u, Msg::Flood { leader, dist })));
                }
            }
            if outbox.is_empty() {
                break;
            }
            let inbox = engine.round(outbox)?;
            for v in 0..k {
                changed[v] = false;
                let mut msgs = inbox[v].clone();
                msgs.sort_by_key(|(from, _)| net.ids[*from]);
                for (from, msg) in msgs {
                    if let Msg::Flood { leader, dist } = msg {
                        let offer = (leader, dist + 1);
                        if offer.0 > best[v].0 || (offer.0 == best[v].0 && offer.1 < best[v].1) {
                            best[v] = offer;
                            parent[v] = Some(from);
                            changed[v] = true;
                        }
                    }
                }
            }
        }
        let notify: Vec<_> = (0..k).filter_map(|v| parent[v].map(|p| (v, p, Msg::Child))).collect();
        engine.round(notify)?;
    }
    let root = (0..k).max_by_key(|&v| net.ids[v]).expect("k >= 1");
    let mut children = vec![Vec::new(); k];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            children[p].push(v);
        }
    }
    for list in &mut children {
        list.sort_by_key(|&c| net.ids[c]);
    }
    let depth = best.iter().map(|b| b.1 as usize).collect();
    let tree = BfsTree { root, parent, children, depth };
    Ok(BfsOutcome { tree, rounds: engine.rounds, events: engine.events })
}

/// Convergecast: every node sends `up(v, combined)` to its parent once all
/// children have reported. Returns the combined value at every node.
fn convergecast<T: Clone>(
    engine: &mut Engine<'_>,
    tree: &BfsTree,
    init: Vec<T>,
    combine: impl Fn(&mut T, &Msg),
    up: impl Fn(&T) -> Msg,
) -> Result<Vec<T>> {
    let k = init.len();
    let mut acc = init;
    let mut waiting: Vec<usize> = tree.children.iter().map(Vec::len).collect();
    let mut sent = vec![false; k];
    sent[tree.root] = true;
    loop {
        let outbox: Vec<_> = (0..k)
            .filter(|&v| !sent[v] && waiting[v] == 0)
            .map(|v| (v, tree.parent[v].expect("non-root has a parent"), up(&acc[v])))
            .collect();
        if outbox.is_empty() {
            return Ok(acc);
        }
        for (v, _, _) in &outbox {
            sent[*v] = true;
        }
        let inbox = engine.round(outbox)?;
        for (v, msgs) in inbox.into_iter().enumerate() {
            for (_, msg) in msgs {
                combine(&mut acc[v], &msg);
                waiting[v] -= 1;
            }
        }
    }
}

/// Floods `msg` from the root down the tree.
fn broadcast(engine: &mut Engine<'_>, tree: &BfsTree, msg: Msg) -> Result<()> {
    let mut frontier = vec![tree.root];
    while !frontier.is_empty() {
        let outbox: Vec<_> =
            frontier.iter().flat_map(|&v| tree.children[v].iter().map(move |&c| (v, c, msg))).collect();
        frontier = outbox.iter().map(|o| o.1).collect();
        engine.round(outbox)?;
    }
    Ok(())
}

/// Among the passing taus, the middle one.
fn choose_tau(stats: GraphStats, n: usize, eps: f64, taus: &[f64]) -> Result<Option<(usize, f64)>> {
    if stats.edges == 0 {
        return Ok(None);
    }
    let mut passing = Vec::new();
    for (i, &tau) in taus.iter().enumerate() {
        if check_theorem(stats, tau, n, eps)?.overall {
            passing.push((i, tau));
        }
    }
    Ok(passing.get(passing.len() / 2).copied())
}

fn default_taus() -> Vec<f64> {
    tau_grid().collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Detection {
    pub certified: bool,
    pub tau_star: Option<f64>,
    pub edges: u64,
    pub two_paths: u64,
    pub rounds: usize,
    pub events: Vec<Event>,
}

/// Sums `d_v` and `d_v (d_v - 1)` up the tree, lets the root check the
/// topology as a comparison graph over `taus`, and sends the verdict down.
pub fn detect_topology(net: &Network, tree: &BfsTree, n: usize, eps: f64, taus: &[f64]) -> Result<Detection> {
    if taus.len() > 32 {
        return Err(Error::invalid("at most 32 candidate taus"));
    }
    let mut engine = Engine::new(net);
    let init: Vec<(u64, u64)> = (0..net.k())
        .map(|v| {
            let d = net.adj[v].len() as u64;
            (d, d * d.saturating_sub(1))
        })
        .collect();
    let acc = convergecast(
        &mut engine,
        tree,
        init,
        |a, m| {
            if let Msg::Degrees { degree_sum, two_paths } = m {
                a.0 += degree_sum;
                a.1 += two_paths;
            }
        },
        |a| Msg::Degrees { degree_sum: a.0, two_paths: a.1 },
    )?;
    let (degree_sum, two_paths) = acc[tree.root];
    let stats = GraphStats { vertices: net.k() as u64, edges: degree_sum / 2, two_paths };
    let chosen = choose_tau(stats, n, eps, taus)?;
    let tau_index = chosen.map_or(0, |c| c.0 as u8);
    broadcast(&mut engine, tree, Msg::Verdict { certified: chosen.is_some(), tau_index })?;
    Ok(Detection {
        certified: chosen.is_some(),
        tau_star: chosen.map(|c| c.1),
        edges: stats.edges,
        two_paths,
        rounds: engine.rounds,
        events: engine.events,
    })
}

/// [`detect_topology`] over the standard grid `0.05, ..., 0.95`.
pub fn detect(net: &Network, tree: &BfsTree, n: usize, eps: f64) -> Result<Detection> {
    detect_topology(net, tree, n, eps, &default_taus())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalOutcome {
    pub decision: Decision,
    pub z: u64,
    pub threshold: f64,
    pub rounds: usize,
    pub events: Vec<Event>,
}

/// Each node sends its sample to every higher-id neighbour, counts matches,
/// and the counts are summed up the tree.
pub fn local_collision_protocol(
    net: &Network,
    tree: &BfsTree,
    detection: &Detection,
    eps: f64,
    p: &Distribution,
    stream: StreamId,
) -> Result<LocalOutcome> {
    let tau = match (detection.certified, detection.tau_star) {
        (true, Some(tau)) => tau,
        _ => return Err(Error::ProtocolRefused("topology is not certified".into())),
    };
    let samples = net.samples(p, stream)?;
    let mut engine = Engine::new(net);
    let outbox: Vec<_> = (0..net.k())
        .flat_map(|v| {
            let value = samples[v];
            net.adj[v].iter().filter(move |&&u| net.ids[u] > net.ids[v]).map(move |&u| (v, u, Msg::Sample { value }))
        })
        .collect();
    let inbox = engine.round(outbox)?;
    let local: Vec<u64> = (0..net.k())
        .map(|v| inbox[v].iter().filter(|(_, m)| *m == Msg::Sample { value: samples[v] }).count() as u64)
        .collect();
    let acc = convergecast(
        &mut engine,
        tree,
        local,
        |a, m| {
            if let Msg::Count { value } = m {
                *a += value;
            }
        },
        |a| Msg::Count { value: *a },
    )?;
    let spec = TesterSpec::new(Arc::clone(&net.topology), tau, net.domain, eps)?;
    let out = spec.decide(acc[tree.root]);
    Ok(LocalOutcome {
        decision: out.decision,
        z: out.z,
        threshold: out.t,
        rounds: engine.rounds,
        events: engine.events,
    })
}

/// Node lists of every bundle, in the order the pipelined protocol forms
/// them: a node's sequence is its own sample followed by the items each
/// child forwards (children in id order); it forwards the first
/// `|sequence| mod s` items and cuts the rest into bundles. Bundles are
/// listed in DFS pre-order of their holders. The root's remainder is dropped.
pub fn bundle_assignment(tree: &BfsTree, s: usize) -> Vec<Vec<usize>> {
    let k = tree.parent.len();
    let mut forwarded: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut kept: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in tree.postorder() {
        let mut seq = vec![v];
        for &c in &tree.children[v] {
            seq.extend(std::mem::take(&mut forwarded[c]));
        }
        let r = seq.len() % s;
        kept[v] = seq.split_off(r);
        forwarded[v] = seq;
    }
    tree.preorder().into_iter().flat_map(|v| kept[v].chunks(s).map(<[usize]>::to_vec).collect::<Vec<_>>()).collect()
}

/// Smallest bundle size `s >= 3` for which `floor(k / s)` cliques of size `s`
/// certify at some grid `tau`; the middle passing `tau` is used.
pub fn choose_bundle_size(k: usize, n: usize, eps: f64) -> Result<(usize, usize, f64)> {
    let taus = default_taus();
    for s in 3..=k {
        let stats = GraphStats::disjoint_cliques(s as u64, (k / s) as u64)?;
        if let Some((i, tau)) = choose_tau(stats, n, eps, &taus)? {
            return Ok((s, i, tau));
        }
    }
    Err(Error::capacity(format!("{k} samples cannot certify any bundled tester at n = {n}, eps = {eps}")))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub decision: Decision,
    pub bundle_size: usize,
    pub tau: f64,
    pub threshold: f64,
    /// Origin node of every sample, per bundle, in pre-order of holders.
    pub bundles: Vec<Vec<usize>>,
    pub rounds: usize,
    pub events: Vec<Event>,
}

/// The bundling protocol with the bundle size chosen by the root.
pub fn pipelined_bundle_protocol(
    net: &Network,
    tree: &BfsTree,
    eps: f64,
    p: &Distribution,
    stream: StreamId,
) -> Result<PipelineOutcome> {
    let (s, tau_index, _) = choose_bundle_size(net.k(), net.domain, eps)?;
    run_pipeline(net, tree, eps, Setup::Chosen { s, tau_index }, p, stream)
}

/// The bundling protocol with a caller-fixed bundle size and `tau`.
pub fn pipelined_bundle_protocol_with(
    net: &Network,
    tree: &BfsTree,
    eps: f64,
    s: usize,
    tau: f64,
    p: &Distribution,
    stream: StreamId,
) -> Result<PipelineOutcome> {
    if s < 3 {
        return Err(Error::invalid(format!("bundle size must be at least 3, got {s}")));
    }
    if net.k() < s {
        return Err(Error::capacity(format!("{} samples cannot fill a bundle of {s}", net.k())));
    }
    run_pipeline(net, tree, eps, Setup::Fixed { s, tau }, p, stream)
}

enum Setup {
    Chosen { s: usize, tau_index: usize },
    Fixed { s: usize, tau: f64 },
}

/// Per-node state of the forwarding phase.
struct Relay {
    own: u32,
    origin: usize,
    received: Vec<Vec<(u32, usize)>>,
    expect: Vec<usize>,
    forward: usize,
    next: usize,
    answers: usize,
    answered: bool,
}

impl Relay {
    /// Item `j` of this node's sequence, if it has arrived.
    fn item(&self, mut j: usize) -> Option<(u32, usize)> {
        if j == 0 {
            return Some((self.own, self.origin));
        }
        j -= 1;
        for (got, &want) in self.received.iter().zip(&self.expect) {
            if j < want {
                return got.get(j).copied();
            }
            j -= want;
        }
        None
    }

    fn complete(&self) -> bool {
        self.received.iter().zip(&self.expect).all(|(g, &w)| g.len() == w)
    }

    fn len(&self) -> usize {
        1 + self.expect.iter().sum::<usize>()
    }
}

fn run_pipeline(
    net: &Network,
    tree: &BfsTree,
    eps: f64,
    setup: Setup,
    p: &Distribution,
    stream: StreamId,
) -> Result<PipelineOutcome> {
    let k = net.k();
    let samples = net.samples(p, stream)?;
    let mut engine = Engine::new(net);

    let sizes = convergecast(
        &mut engine,
        tree,
        vec![1u64; k],
        |a, m| {
            if let Msg::SubtreeSize { value } = m {
                *a += value;
            }
        },
        |a| Msg::SubtreeSize { value: *a },
    )?;
    let taus = default_taus();
    let (s, tau) = match setup {
        Setup::Chosen { s, tau_index } => (s, taus[tau_index]),
        Setup::Fixed { s, tau } => (s, tau),
    };
    let tau_index = taus.iter().position(|&t| t == tau).unwrap_or(0) as u8;
    broadcast(&mut engine, tree, Msg::Setup { bundle: s as u64, tau_index })?;

    let bundle_count = k / s;
    let stats = GraphStats::disjoint_cliques(s as u64, bundle_count as u64)?;
    if !(0.0..=1.0).contains(&tau) || !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("need tau in [0, 1] and eps in (0, 1], got {tau} and {eps}")));
    }
    let t = threshold(stats.edges, net.domain, eps, tau);
    let cap = t.ceil() as u64;
    let answer_width = message_bits(t);
    if answer_width > net.channel_bits || counter_bits(t) > net.channel_bits {
        return Err(Error::capacity("answer messages do not fit the channel"));
    }

    let mut relay: Vec<Relay> = (0..k)
        .map(|v| {
            let expect: Vec<usize> = tree.children[v].iter().map(|&c| sizes[c] as usize % s).collect();
            Relay {
                own: samples[v],
                origin: v,
                received: vec![Vec::new(); expect.len()],
                forward: if v == tree.root { 0 } else { sizes[v] as usize % s },
                expect,
                next: 0,
                answers: 0,
                answered: false,
            }
        })
        .collect();
    let mut totals: Vec<(u64, bool)> = vec![(0, false); k];
    let mut computed = vec![false; k];
    let mut held: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
    let mut counter = CollisionCounter::default();
    let child_slot = |v: usize, c: usize| tree.children[v].iter().position(|&x| x == c).expect("child");

    loop {
        for v in 0..k {
            let r = &relay[v];
            if !computed[v] && r.complete() {
                computed[v] = true;
                let seq: Vec<(u32, usize)> = (0..r.len()).map(|j| r.item(j).expect("complete")).collect();
                for chunk in seq[r.forward..].chunks(s).filter(|c| c.len() == s) {
                    let values: Vec<u32> = chunk.iter().map(|x| x.0).collect();
                    let msg = Message::encode(counter.clique_collisions(&values), cap);
                    match msg.payload {
                        Payload::Count(z) => totals[v].0 = (totals[v].0 + z).min(cap),
                        Payload::Overflow => totals[v].1 = true,
                    }
                    held[v].push(chunk.iter().map(|x| x.1).collect());
                }
            }
        }
        let mut outbox = Vec::new();
        for v in 0..k {
            let r = &relay[v];
            if let Some(parent) = tree.parent[v] {
                if r.next < r.forward {
                    if let Some((value, _)) = r.item(r.next) {
                        outbox.push((v, parent, Msg::Sample { value }));
                    }
                } else if computed[v] && !r.answered && r.answers == tree.children[v].len() {
                    let (z, overflow) = totals[v];
                    let payload = if overflow || z >= cap { Payload::Overflow } else { Payload::Count(z) };
                    let code =
                        Message { payload, count_bits: answer_width, exponent: None, exponent_bits: 0 }.count_code();
                    outbox.push((v, parent, Msg::Answer { code, width: answer_width }));
                }
            }
        }
        if outbox.is_empty() {
            break;
        }
        for &(v, _, msg) in &outbox {
            match msg {
                Msg::Sample { .. } => relay[v].next += 1,
                _ => relay[v].answered = true,
            }
        }
        let inbox = engine.round(outbox)?;
        for (v, msgs) in inbox.into_iter().enumerate() {
            for (from, msg) in msgs {
                match msg {
                    Msg::Sample { value } => {
                        let slot = child_slot(v, from);
                        let j = relay[from].next - 1;
                        let origin = relay[from].item(j).expect("sent item exists").1;
                        relay[v].received[slot].push((value, origin));
                    }
                    Msg::Answer { code, width } => {
                        relay[v].answers += 1;
                        match Message::decode_count(code, width) {
                            Payload::Count(z) => totals[v].0 = (totals[v].0 + z).min(cap),
                            Payload::Overflow => totals[v].1 = true,
                        }
                    }
                    other => return Err(Error::ModelViolation(format!("unexpected {other:?} while pipelining"))),
                }
            }
        }
    }
    let root = tree.root;
    if !computed[root] || relay[root].answers != tree.children[root].len() {
        return Err(Error::ModelViolation("pipeline stalled before the root heard every answer".into()));
    }
    let (z, overflow) = totals[root];
    let decision = if !overflow && (z as f64) < t { Decision::Yes } else { Decision::No };
    let bundles: Vec<Vec<usize>> = tree.preorder().into_iter().flat_map(|v| std::mem::take(&mut held[v])).collect();
    debug_assert_eq!(bundles.len(), bundle_count);
    Ok(PipelineOutcome {
        decision,
        bundle_size: s,
        tau,
        threshold: t,
        bundles,
        rounds: engine.rounds,
        events: engine.events,
    })
}

/// Decision of the monolithic disjoint-cliques tester on the bundles of
/// [`bundle_assignment`].
pub fn bundled_oracle(
    net: &Network,
    tree: &BfsTree,
    eps: f64,
    s: usize,
    tau: f64,
    p: &Distribution,
    stream: StreamId,
) -> Result<Decision> {
    let samples = net.samples(p, stream)?;
    let bundles = bundle_assignment(tree, s);
    let graph = ComparisonGraph::disjoint_cliques(s, bundles.len())?;
    let values: Vec<u32> = bundles.iter().flatten().map(|&v| samples[v]).collect();
    let spec = TesterSpec::new(graph, tau, net.domain, eps)?;
    Ok(spec.decide(count_collisions_in(spec.graph(), &values)?).decision)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathTaken {
    Local,
    Pipelined,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombinedOutcome {
    pub path: PathTaken,
    pub decision: Decision,
    pub bfs_rounds: usize,
    pub detection_rounds: usize,
    pub protocol_rounds: usize,
    pub rounds: usize,
}

/// BFS, detection, then the local protocol if the topology certifies and
/// the pipelined protocol otherwise.
pub fn combined_protocol(net: &Network, eps: f64, p: &Distribution, stream: StreamId) -> Result<CombinedOutcome> {
    let bfs = build_bfs_tree(net)?;
    let detection = detect(net, &bfs.tree, net.domain, eps)?;
    let (path, decision, protocol_rounds) = if detection.certified {
        let out = local_collision_protocol(net, &bfs.tree, &detection, eps, p, stream)?;
        (PathTaken::Local, out.decision, out.rounds)
    } else {
        let out = pipelined_bundle_protocol(net, &bfs.tree, eps, p, stream)?;
        (PathTaken::Pipelined, out.decision, out.rounds)
    };
    Ok(CombinedOutcome {
        path,
        decision,
        bfs_rounds: bfs.rounds,
        detection_rounds: detection.rounds,
        protocol_rounds,
        rounds: bfs.rounds + detection.rounds + protocol_rounds,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerDetection {
    pub certified: bool,
    pub tau_star: Option<f64>,
    pub local_congestion_ok: bool,
    pub edges: u64,
    pub two_paths: u64,
    pub max_ball: usize,
    pub rounds: usize,
    pub events: Vec<Event>,
}

/// Learns every node's `t`-ball by `t` phases of frontier exchange, then
/// runs detection on the degrees of `G^t`. A node whose ball holds more
/// than `ball_cap` other nodes breaks the congestion cap, which withholds
/// certification.
pub fn graph_power_detection(
    net: &Network,
    tree: &BfsTree,
    eps: f64,
    t: usize,
    ball_cap: usize,
) -> Result<PowerDetection> {
    if t == 0 {
        return Err(Error::invalid("graph power needs t >= 1"));
    }
    let k = net.k();
    let mut engine = Engine::new(net);
    let mut known: Vec<Vec<bool>> = (0..k).map(|v| (0..k).map(|u| u == v).collect()).collect();
    let mut ball: Vec<usize> = vec![1; k];
    let mut frontier: Vec<Vec<usize>> = (0..k).map(|v| vec![v]).collect();
    let per_round = (net.channel_bits / net.id_bits()).max(1) as usize;
    for _ in 0..t {
        let mut fresh: Vec<Vec<usize>> = vec![Vec::new(); k];
        let longest = frontier.iter().map(Vec::len).max().unwrap_or(0);
        for start in (0..longest).step_by(per_round) {
            let mut outbox = Vec::new();
            for (v, known) in frontier.iter().enumerate() {
                for &u in known.iter().skip(start).take(per_round) {
                    outbox.extend(net.adj[v].iter().map(|&w| (v, w, Msg::Id { id: net.ids[u] })));
                }
            }
            let inbox = engine.round(outbox)?;
            for (v, msgs) in inbox.into_iter().enumerate() {
                for (_, msg) in msgs {
                    if let Msg::Id { id } = msg {
                        let u = net.ids.iter().position(|&x| x == id).expect("known id");
                        if !known[v][u] {
                            known[v][u] = true;
                            ball[v] += 1;
                            fresh[v].push(u);
                        }
                    }
                }
            }
        }
        frontier = fresh;
    }
    let max_ball = ball.iter().map(|b| b - 1).max().unwrap_or(0);
    let congestion_ok = max_ball <= ball_cap;
    let init: Vec<(u64, u64)> =
        ball.iter().map(|&b| ((b - 1) as u64, ((b - 1) * b.saturating_sub(2)) as u64)).collect();
    let acc = convergecast(
        &mut engine,
        tree,
        init,
        |a, m| {
            if let Msg::Degrees { degree_sum, two_paths } = m {
                a.0 += degree_sum;
                a.1 += two_paths;
            }
        },
        |a| Msg::Degrees { degree_sum: a.0, two_paths: a.1 },
    )?;
    let (degree_sum, two_paths) = acc[tree.root];
    let stats = GraphStats { vertices: k as u64, edges: degree_sum / 2, two_paths };
    let chosen = if congestion_ok { choose_tau(stats, net.domain, eps, &default_taus())? } else { None };
    broadcast(
        &mut engine,
        tree,
        Msg::Verdict { certified: chosen.is_some(), tau_index: chosen.map_or(0, |c| c.0 as u8) },
    )?;
    Ok(PowerDetection {
        certified: chosen.is_some(),
        tau_star: chosen.map(|c| c.1),
        local_congestion_ok: congestion_ok,
        edges: stats.edges,
        two_paths,
        max_ball,
        rounds: engine.rounds,
        events: engine.events,
    })
}
