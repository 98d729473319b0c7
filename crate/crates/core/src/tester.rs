//! The collision tester `(G, tau)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, SampleLabeling};
use crate::error::{Error, Result};
use crate::graph::ComparisonGraph;
use crate::rng::StreamId;

/// Largest number of labelings the exact oracle will enumerate.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// Tolerance used to classify a distribution as uniform or eps-far.
pub const FARNESS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
}

impl Decision {
    pub fn is_yes(self) -> bool {
        self == Decision::Yes
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.is_yes() { "YES" } else { "NO" })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub z: u64,
    pub t: f64,
    pub decision: Decision,
}

/// What a distribution is, relative to a proximity parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    Uniform,
    Far,
}

impl Truth {
    /// `None` when `p` is neither uniform nor `eps`-far.
    pub fn classify(p: &Distribution, eps: f64) -> Option<Truth> {
        let d = p.l1_to_uniform();
        if d <= FARNESS_TOLERANCE {
            Some(Truth::Uniform)
        } else if d >= eps - FARNESS_TOLERANCE {
            Some(Truth::Far)
        } else {
            None
        }
    }

    pub fn correct(self) -> Decision {
        match self {
            Truth::Uniform => Decision::Yes,
            Truth::Far => Decision::No,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TesterSpec {
    graph: Arc<ComparisonGraph>,
    tau: f64,
    n: usize,
    eps: f64,
}

impl TesterSpec {
    pub fn new(graph: impl Into<Arc<ComparisonGraph>>, tau: f64, n: usize, eps: f64) -> Result<Self> {
        let graph = graph.into();
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::invalid(format!("tau must lie in [0, 1], got {tau}")));
        }
        if n == 0 {
            return Err(Error::InvalidDomain("n must be positive".into()));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
        }
        if graph.edge_count() == 0 {
            return Err(Error::invalid("comparison graph has no edges"));
        }
        Ok(TesterSpec { graph, tau, n, eps })
    }

    pub fn graph(&self) -> &ComparisonGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<ComparisonGraph> {
        Arc::clone(&self.graph)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `T = |E| (1 + tau eps^2) / n`, kept real.
    pub fn threshold(&self) -> f64 {
        threshold(self.graph.edge_count(), self.n, self.eps, self.tau)
    }

    /// YES iff `z < T`.
    pub fn decide(&self, z: u64) -> TestOutcome {
        let t = self.threshold();
        TestOutcome { z, t, decision: if (z as f64) < t { Decision::Yes } else { Decision::No } }
    }

    /// Draws one labeling of the graph: each owner block from its own lane of
    /// `stream`, or everything from lane 0 when there is no owner map.
    pub fn labeling(&self, p: &Distribution, stream: StreamId) -> Result<SampleLabeling> {
        self.check_domain(p)?;
        Ok(label_graph(&self.graph, p, stream))
    }

    pub fn run(&self, p: &Distribution, stream: StreamId) -> Result<TestOutcome> {
        let labeling = self.labeling(p, stream)?;
        Ok(self.decide(count_collisions(&self.graph, &labeling)?))
    }

    fn check_domain(&self, p: &Distribution) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::invalid(format!("distribution over [{}] for a tester over [{}]", p.n(), self.n)));
        }
        Ok(())
    }
}

pub fn threshold(edges: u64, n: usize, eps: f64, tau: f64) -> f64 {
    edges as f64 * (1.0 + tau * eps * eps) / n as f64
}

pub(crate) fn label_graph(graph: &ComparisonGraph, p: &Distribution, stream: StreamId) -> SampleLabeling {
    let mut values = Vec::with_capacity(graph.vertex_count());
    for (lane, range) in graph.lane_segments() {
        let mut rng = stream.with_lane(lane).rng();
        p.sample_into(&mut rng, range.len(), &mut values);
    }
    SampleLabeling { values, stream }
}

/// Number of edges whose endpoints carry equal samples.
pub fn count_collisions(graph: &ComparisonGraph, labeling: &SampleLabeling) -> Result<u64> {
    count_collisions_in(graph, &labeling.values)
}

pub(crate) fn count_collisions_in(graph: &ComparisonGraph, values: &[u32]) -> Result<u64> {
    if values.len() != graph.vertex_count() {
        return Err(Error::invalid(format!(
            "labeling has {} values for {} vertices",
            values.len(),
            graph.vertex_count()
        )));
    }
    Ok(match graph.clique_blocks() {
        Some(blocks) => {
            let mut counter = CollisionCounter::default();
            blocks.iter().map(|b| counter.clique_collisions(&values[b.range()])).sum()
        }
        None => graph.edges().filter(|&(u, v)| values[u] == values[v]).count() as u64,
    })
}

/// Collision counting inside one clique: `sum_x binom(count_x, 2)`.
#[derive(Default)]
pub(crate) struct CollisionCounter {
    dense: Vec<u32>,
    scratch: Vec<u32>,
}

impl CollisionCounter {
    const DENSE_LIMIT: u32 = 1 << 16;

    pub(crate) fn clique_collisions(&mut self, values: &[u32]) -> u64 {
        let max = values.iter().copied().max().unwrap_or(0);
        if max < Self::DENSE_LIMIT {
            if self.dense.len() <= max as usize {
                self.dense.resize(max as usize + 1, 0);
            }
            let mut z = 0u64;
            for &x in values {
                z += self.dense[x as usize] as u64;
                self.dense[x as usize] += 1;
            }
            for &x in values {
                self.dense[x as usize] = 0;
            }
            z
        } else {
            self.scratch.clear();
            self.scratch.extend_from_slice(values);
            self.scratch.sort_unstable();
            self.scratch
                .chunk_by(|a, b| a == b)
                .map(|run| {
                    let c = run.len() as u64;
                    c * (c - 1) / 2
                })
                .sum()
        }
    }
}

/// `E[Z] = |E| mu`.
pub fn expected_collisions(graph: &ComparisonGraph, p: &Distribution) -> f64 {
    graph.edge_count() as f64 * p.collision_probability()
}

/// `Var[Z] = |E| (mu - mu^2) + c(G) (gamma - mu^2)`.
pub fn variance_collisions(graph: &ComparisonGraph, p: &Distribution) -> f64 {
    let mu = p.collision_probability();
    let gamma = p.three_way_collision_probability();
    graph.edge_count() as f64 * (mu - mu * mu) + graph.two_path_count() as f64 * (gamma - mu * mu)
}

/// Exact law of `Z` by enumerating every labeling; entry `z` is `P[Z = z]`.
pub fn exact_collision_pmf(graph: &ComparisonGraph, p: &Distribution) -> Result<Vec<f64>> {
    let n = p.n() as u64;
    let outcomes =
        (0..graph.vertex_count()).try_fold(1u64, |acc, _| acc.checked_mul(n).filter(|&x| x <= ENUMERATION_CAP));
    if outcomes.is_none() {
        return Err(Error::capacity(format!(
            "{}^{} labelings exceed the enumeration cap {ENUMERATION_CAP}",
            p.n(),
            graph.vertex_count()
        )));
    }
    let back: Vec<Vec<usize>> = graph
        .adjacency()
        .iter()
        .enumerate()
        .map(|(v, nb)| nb.iter().map(|&u| u as usize).filter(|&u| u < v).collect())
        .collect();
    let mut pmf = vec![0.0; graph.edge_count() as usize + 1];
    let mut labels = vec![0usize; graph.vertex_count()];
    enumerate(&back, p.probs(), 0, 1.0, 0, &mut labels, &mut pmf);
    Ok(pmf)
}

fn enumerate(
    back: &[Vec<usize>],
    probs: &[f64],
    v: usize,
    weight: f64,
    z: usize,
    labels: &mut [usize],
    pmf: &mut [f64],
) {
    if v == back.len() {
        pmf[z] += weight;
        return;
    }
    for (x, &px) in probs.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        labels[v] = x;
        let hits = back[v].iter().filter(|&&u| labels[u] == x).count();
        enumerate(back, probs, v + 1, weight * px, z + hits, labels, pmf);
    }
}

/// Exact probability that the tester answers wrongly on `p`.
pub fn exact_error_probability(spec: &TesterSpec, p: &Distribution) -> Result<f64> {
    spec.check_domain(p)?;
    let truth = Truth::classify(p, spec.eps).ok_or_else(|| {
        Error::invalid(format!(
            "distribution at distance {} is neither uniform nor {}-far",
            p.l1_to_uniform(),
            spec.eps
        ))
    })?;
    let pmf = exact_collision_pmf(spec.graph(), p)?;
    Ok(pmf.iter().enumerate().filter(|&(z, _)| spec.decide(z as u64).decision != truth.correct()).map(|(_, w)| w).sum())
}
