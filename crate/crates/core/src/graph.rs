//! Comparison graphs.
//!
//! Vertices are dense indices `0..|V|`. Two layouts are supported: an explicit
//! sorted edge list, and a union of vertex-disjoint cliques over contiguous
//! index ranges. The clique layout keeps planner-sized graphs (millions of
//! implicit edges) cheap to build and to count collisions on.
//!
//! `c(G)` is always the directed two-path count `sum_v d_v (d_v - 1)`: the
//! number of ordered pairs of distinct edges that share a vertex.

use std::collections::VecDeque;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub vertices: u64,
    pub edges: u64,
    /// Directed two-path count `c(G)`.
    pub two_paths: u64,
}

impl GraphStats {
    /// Closed-form statistics of `l` disjoint copies of `K_q`.
    pub fn disjoint_cliques(q: u64, l: u64) -> Result<GraphStats> {
        let overflow = || Error::capacity(format!("statistics of {l} x K_{q} overflow u64"));
        let per_edges = q.checked_mul(q.saturating_sub(1)).ok_or_else(overflow)? / 2;
        let per_paths = (q as u128) * (q.saturating_sub(1) as u128) * (q.saturating_sub(2) as u128);
        let two_paths = per_paths.checked_mul(l as u128).ok_or_else(overflow)?;
        Ok(GraphStats {
            vertices: q.checked_mul(l).ok_or_else(overflow)?,
            edges: per_edges.checked_mul(l).ok_or_else(overflow)?,
            two_paths: u64::try_from(two_paths).map_err(|_| overflow())?,
        })
    }

    /// Same graph under the undirected two-path convention (`c / 2` per path,
    /// `binom(q, 3)` per clique triangle count when divided by 6).
    pub fn with_two_paths(self, two_paths: u64) -> GraphStats {
        GraphStats { two_paths, ..self }
    }
}

/// A clique on vertices `start..start + size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliqueBlock {
    pub start: usize,
    pub size: usize,
}

impl CliqueBlock {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.size
    }
}

/// A contiguous run of vertices held by one owner (player or batch).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OwnerBlock {
    pub owner: u32,
    pub start: usize,
    pub end: usize,
}

impl OwnerBlock {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Layout {
    Explicit(Vec<(u32, u32)>),
    Cliques(Vec<CliqueBlock>),
}

/// An undirected simple graph whose vertices are sample placeholders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonGraph {
    vertex_count: usize,
    layout: Layout,
    owners: Option<Vec<OwnerBlock>>,
    stats: GraphStats,
}

impl ComparisonGraph {
    /// Builds a graph from an explicit edge list, validating simplicity and,
    /// when an owner map is given, that every edge stays inside one owner and
    /// that each owner's vertices form one contiguous run.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        owner: Option<Vec<u32>>,
    ) -> Result<Self> {
        if vertex_count > u32::MAX as usize {
            return Err(Error::capacity("vertex count exceeds u32 indices"));
        }
        let mut list: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::invalid(format!("edge ({u}, {v}) outside 0..{vertex_count}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            list.push((u.min(v) as u32, u.max(v) as u32));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let owners = match owner {
            None => None,
            Some(map) => {
                if map.len() != vertex_count {
                    return Err(Error::invalid(format!(
                        "owner map has {} entries for {vertex_count} vertices",
                        map.len()
                    )));
                }
                if let Some(&(u, v)) = list.iter().find(|(u, v)| map[*u as usize] != map[*v as usize]) {
                    return Err(Error::ModelViolation(format!(
                        "edge ({u}, {v}) joins owners {} and {}",
                        map[u as usize], map[v as usize]
                    )));
                }
                Some(owner_runs(&map)?)
            }
        };
        let mut degrees = vec![0u64; vertex_count];
        for &(u, v) in &list {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let stats = GraphStats {
            vertices: vertex_count as u64,
            edges: list.len() as u64,
            two_paths: degrees.iter().map(|d| d * d.saturating_sub(1)).sum(),
        };
        Ok(ComparisonGraph { vertex_count, layout: Layout::Explicit(list), owners, stats })
    }

    /// Vertex-disjoint cliques laid out consecutively, one `(size, owner)` per
    /// clique. Sizes 0 and 1 are allowed (no edges). Consecutive cliques with
    /// the same owner share one owner block.
    pub fn from_clique_blocks(blocks: &[(usize, Option<u32>)]) -> Result<Self> {
        let with_owner = blocks.iter().filter(|b| b.1.is_some()).count();
        if with_owner != 0 && with_owner != blocks.len() {
            return Err(Error::invalid("either every clique has an owner or none does"));
        }
        let mut cliques = Vec::with_capacity(blocks.len());
        let mut owners: Vec<OwnerBlock> = Vec::new();
        let mut start = 0usize;
        let mut stats = GraphStats { vertices: 0, edges: 0, two_paths: 0 };
        for &(size, owner) in blocks {
            let s = GraphStats::disjoint_cliques(size as u64, 1)?;
            stats.edges = stats.edges.checked_add(s.edges).ok_or_else(|| Error::capacity("edge count overflow"))?;
            stats.two_paths =
                stats.two_paths.checked_add(s.two_paths).ok_or_else(|| Error::capacity("two-path count overflow"))?;
            cliques.push(CliqueBlock { start, size });
            if let Some(o) = owner {
                match owners.last_mut() {
                    Some(last) if last.owner == o => last.end = start + size,
                    _ => {
                        if owners.iter().any(|b| b.owner == o) {
                            return Err(Error::invalid(format!("owner {o} is not contiguous")));
                        }
                        owners.push(OwnerBlock { owner: o, start, end: start + size });
                    }
                }
            }
            start += size;
        }
        if start > u32::MAX as usize {
            return Err(Error::capacity("vertex count exceeds u32 indices"));
        }
        stats.vertices = start as u64;
        Ok(ComparisonGraph {
            vertex_count: start,
            layout: Layout::Cliques(cliques),
            owners: if with_owner > 0 { Some(owners) } else { None },
            stats,
        })
    }

    pub fn clique(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid(format!("clique needs q >= 2, got {q}")));
        }
        Self::from_clique_blocks(&[(q, None)])
    }

    /// `l` copies of `K_q`; clique `i` is owned by `i`.
    pub fn disjoint_cliques(q: usize, l: usize) -> Result<Self> {
        if q < 2 || l < 1 {
            return Err(Error::invalid(format!("disjoint cliques need q >= 2 and l >= 1, got q={q} l={l}")));
        }
        let blocks: Vec<_> = (0..l).map(|i| (q, Some(i as u32))).collect();
        Self::from_clique_blocks(&blocks)
    }

    pub fn matching(pairs: usize) -> Result<Self> {
        if pairs < 1 {
            return Err(Error::invalid("matching needs at least one pair"));
        }
        Self::from_edges(2 * pairs, (0..pairs).map(|i| (2 * i, 2 * i + 1)), None)
    }

    /// Hub is vertex 0.
    pub fn star(leaves: usize) -> Result<Self> {
        if leaves < 1 {
            return Err(Error::invalid("star needs at least one leaf"));
        }
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)), None)
    }

    /// Complete bipartite graph with sides `0..a` and `a..a+b`.
    pub fn bipartite(a: usize, b: usize) -> Result<Self> {
        if a < 1 || b < 1 {
            return Err(Error::invalid("bipartite sides must be non-empty"));
        }
        Self::from_edges(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))), None)
    }

    pub fn cycle(len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::invalid(format!("cycle needs at least 3 vertices, got {len}")));
        }
        Self::from_edges(len, (0..len).map(|i| (i, (i + 1) % len)), None)
    }

    pub fn path(len: usize) -> Result<Self> {
        if len < 1 {
            return Err(Error::invalid("path needs at least one vertex"));
        }
        Self::from_edges(len, (1..len).map(|i| (i - 1, i)), None)
    }

    /// G(n, p) over `vertices` vertices.
    pub fn erdos_renyi(vertices: usize, p: f64, seed: u64) -> Result<Self> {
        let mut rng = StreamId::new(seed, 0).rng();
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in u + 1..vertices {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Self::from_edges(vertices, edges, None)
    }

    /// A random recursive tree plus independent extra edges with probability `p`.
    pub fn random_connected(vertices: usize, p: f64, seed: u64) -> Result<Self> {
        if vertices < 1 {
            return Err(Error::invalid("random connected graph needs a vertex"));
        }
        let mut rng = StreamId::new(seed, 0).with_lane(1).rng();
        let mut edges = std::collections::BTreeSet::new();
        for v in 1..vertices {
            edges.insert((rng.random_range(0..v), v));
        }
        for u in 0..vertices {
            for v in u + 1..vertices {
                if rng.random::<f64>() < p {
                    edges.insert((u, v));
                }
            }
        }
        Self::from_edges(vertices, edges, None)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> u64 {
        self.stats.edges
    }

    /// Directed two-path count `c(G)`.
    pub fn two_path_count(&self) -> u64 {
        self.stats.two_paths
    }

    pub fn stats(&self) -> GraphStats {
        self.stats
    }

    /// The clique decomposition, when the graph was built from clique blocks.
    pub fn clique_blocks(&self) -> Option<&[CliqueBlock]> {
        match &self.layout {
            Layout::Cliques(b) => Some(b),
            Layout::Explicit(_) => None,
        }
    }

    pub fn owner_blocks(&self) -> Option<&[OwnerBlock]> {
        self.owners.as_deref()
    }

    /// Per-vertex owner map, if any.
    pub fn owner_map(&self) -> Option<Vec<u32>> {
        self.owners.as_ref().map(|blocks| {
            let mut map = vec![0u32; self.vertex_count];
            for b in blocks {
                map[b.range()].fill(b.owner);
            }
            map
        })
    }

    /// RNG lanes used to label the graph: one per owner block, or a single
    /// lane 0 covering every vertex.
    pub fn lane_segments(&self) -> Vec<(u64, Range<usize>)> {
        match &self.owners {
            Some(blocks) => blocks.iter().map(|b| (b.owner as u64, b.range())).collect(),
            None => vec![(0, 0..self.vertex_count)],
        }
    }

    /// Iterates every edge once as `(u, v)` with `u < v`.
    pub fn edges(&self) -> Box<dyn Iterator<Item = (usize, usize)> + '_> {
        match &self.layout {
            Layout::Explicit(list) => Box::new(list.iter().map(|&(u, v)| (u as usize, v as usize))),
            Layout::Cliques(blocks) => Box::new(
                blocks.iter().flat_map(|b| b.range().flat_map(move |u| (u + 1..b.start + b.size).map(move |v| (u, v)))),
            ),
        }
    }

    pub fn degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.vertex_count];
        match &self.layout {
            Layout::Explicit(list) => {
                for &(u, v) in list {
                    d[u as usize] += 1;
                    d[v as usize] += 1;
                }
            }
            Layout::Cliques(blocks) => {
                for b in blocks {
                    d[b.range()].fill(b.size.saturating_sub(1) as u64);
                }
            }
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (u, v) in self.edges() {
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Edge present iff the graph distance in `self` lies in `[1, t]`.
    /// The owner map is dropped.
    pub fn graph_power(&self, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("graph power needs t >= 1"));
        }
        let adj = self.adjacency();
        let mut edges = Vec::new();
        for src in 0..self.vertex_count {
            for (v, d) in bfs_distances(&adj, src, Some(t)) {
                if d >= 1 && v > src {
                    edges.push((src, v));
                }
            }
        }
        Self::from_edges(self.vertex_count, edges, None)
    }

    pub fn check_inequalities(&self) -> GraphInequalities {
        GraphInequalities::evaluate(self.stats)
    }
}

/// Vertices reachable from `src` with their hop distance, within `limit` hops.
pub(crate) fn bfs_distances(adj: &[Vec<u32>], src: usize, limit: Option<usize>) -> Vec<(usize, usize)> {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        out.push((u, dist[u]));
        if limit.is_some_and(|l| dist[u] >= l) {
            continue;
        }
        for &v in &adj[u] {
            let v = v as usize;
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    out
}

fn owner_runs(map: &[u32]) -> Result<Vec<OwnerBlock>> {
    let mut blocks: Vec<OwnerBlock> = Vec::new();
    for (v, &o) in map.iter().enumerate() {
        match blocks.last_mut() {
            Some(last) if last.owner == o => last.end = v + 1,
            _ => {
                if blocks.iter().any(|b| b.owner == o) {
                    return Err(Error::invalid(format!("owner {o} does not hold a contiguous vertex range")));
                }
                blocks.push(OwnerBlock { owner: o, start: v, end: v + 1 });
            }
        }
    }
    Ok(blocks)
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
    owner: Option<Vec<u32>>,
}

impl Serialize for ComparisonGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            vertex_count: self.vertex_count,
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
            owner: self.owner_map(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComparisonGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        ComparisonGraph::from_edges(repr.vertex_count, repr.edges.into_iter().map(|[u, v]| (u, v)), repr.owner)
            .map_err(serde::de::Error::custom)
    }
}

/// One inequality, with both sides as exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub lhs: u128,
    pub rhs: u128,
    /// False for conditional items whose premise fails.
    pub applicable: bool,
    pub holds: bool,
}

/// Structural inequalities that hold for every simple graph.
///
/// Each item is cross-multiplied so it can be checked in integers:
/// - `edges_bound`: `2|E| <= |V|^2`
/// - `vertex_bound`: `|V| (2|E| + c) >= 4|E|^2`
/// - `two_path_bound`: if `|V| <= |E|` then `c >= 2|E|`
/// - `product_bound`: if `|V| <= |E|` then `|V| c >= 2|E|^2`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GraphInequalities {
    pub stats: GraphStats,
    pub edges_bound: Inequality,
    pub vertex_bound: Inequality,
    pub two_path_bound: Inequality,
    pub product_bound: Inequality,
}

impl GraphInequalities {
    pub fn evaluate(stats: GraphStats) -> Self {
        let v = stats.vertices as u128;
        let e = stats.edges as u128;
        let c = stats.two_paths as u128;
        let dense = v <= e;
        let ge = |lhs: u128, rhs: u128, applicable: bool| Inequality {
            lhs,
            rhs,
            applicable,
            holds: !applicable || lhs >= rhs,
        };
        GraphInequalities {
            stats,
            edges_bound: ge(v * v, 2 * e, true),
            vertex_bound: ge(v * (2 * e + c), 4 * e * e, true),
            two_path_bound: ge(c, 2 * e, dense),
            product_bound: ge(v * c, 2 * e * e, dense),
        }
    }

    pub fn all_hold(&self) -> bool {
        [self.edges_bound, self.vertex_bound, self.two_path_bound, self.product_bound].iter().all(|i| i.holds)
    }
}
