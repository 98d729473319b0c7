//! Scenario execution, summary tables and moment audits.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conditions::{
    plan_asymmetric, plan_centralized, plan_simultaneous, plan_simultaneous_streaming, plan_streaming, Plan,
};
use crate::congest::{
    build_bfs_tree, detect, graph_power_detection, local_collision_protocol, pipelined_bundle_protocol, Network,
    PathTaken,
};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::exec::{try_map_trials, Execution};
use crate::graph::ComparisonGraph;
use crate::models::simulate;
use crate::rng::StreamId;
use crate::tester::{count_collisions, expected_collisions, variance_collisions, Decision, TesterSpec, Truth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioModel {
    Centralized,
    Simultaneous,
    Asymmetric,
    Streaming,
    SimultaneousStreaming,
    CongestLocal,
    CongestPipelined,
    CongestCombined,
}

impl ScenarioModel {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioModel::Centralized => "centralized",
            ScenarioModel::Simultaneous => "simultaneous",
            ScenarioModel::Asymmetric => "asymmetric",
            ScenarioModel::Streaming => "streaming",
            ScenarioModel::SimultaneousStreaming => "simultaneous_streaming",
            ScenarioModel::CongestLocal => "congest_local",
            ScenarioModel::CongestPipelined => "congest_pipelined",
            ScenarioModel::CongestCombined => "congest_combined",
        }
    }
}

/// A distribution description; `eps` defaults to the scenario's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform,
    Bump {
        #[serde(default)]
        eps: Option<f64>,
    },
    Heavy {
        #[serde(default)]
        eps: Option<f64>,
    },
    Point {
        #[serde(default = "first_element")]
        element: usize,
    },
    Explicit {
        probs: Vec<f64>,
    },
}

fn first_element() -> usize {
    1
}

impl DistSpec {
    pub fn build(&self, n: usize, eps: f64) -> Result<Distribution> {
        match self {
            DistSpec::Uniform => Distribution::uniform(n),
            DistSpec::Bump { eps: e } => Distribution::bump(n, e.unwrap_or(eps)),
            DistSpec::Heavy { eps: e } => Distribution::heavy(n, e.unwrap_or(eps)),
            DistSpec::Point { element } => Distribution::point_mass(n, *element),
            DistSpec::Explicit { probs } => {
                if probs.len() != n {
                    return Err(Error::invalid(format!("{} explicit probabilities for n = {n}", probs.len())));
                }
                Distribution::new(probs.clone())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            DistSpec::Uniform => "uniform".into(),
            DistSpec::Bump { eps: Some(e) } => format!("bump:{e}"),
            DistSpec::Bump { eps: None } => "bump".into(),
            DistSpec::Heavy { eps: Some(e) } => format!("heavy:{e}"),
            DistSpec::Heavy { eps: None } => "heavy".into(),
            DistSpec::Point { element } => format!("point:{element}"),
            DistSpec::Explicit { .. } => "explicit".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub id: Option<String>,
    pub model: ScenarioModel,
    pub n: usize,
    pub eps: f64,
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    #[serde(default)]
    pub m_bits: Option<u64>,
    /// Graph spec of the network, e.g. `clique:150` or `path:400`.
    #[serde(default)]
    pub topology: Option<String>,
    /// Locality for an extra graph-power detection on the topology.
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub ball_cap: Option<usize>,
    pub dist: DistSpec,
    pub trials: u64,
}

impl Scenario {
    pub fn label(&self, index: usize) -> String {
        self.id.clone().unwrap_or_else(|| format!("{}-{index}", self.model.name()))
    }

    fn need<T: Copy>(&self, v: Option<T>, what: &str) -> Result<T> {
        v.ok_or_else(|| Error::invalid(format!("{} scenarios need `{what}`", self.model.name())))
    }

    /// The certified plan for the non-network models.
    pub fn plan(&self) -> Result<Option<Plan>> {
        Ok(Some(match self.model {
            ScenarioModel::Centralized => plan_centralized(self.n, self.eps)?,
            ScenarioModel::Simultaneous => plan_simultaneous(self.n, self.eps, self.need(self.k, "k")?)?,
            ScenarioModel::Asymmetric => plan_asymmetric(
                self.n,
                self.eps,
                self.rates.as_deref().ok_or_else(|| Error::invalid("asymmetric scenarios need `rates`"))?,
            )?,
            ScenarioModel::Streaming => plan_streaming(self.n, self.eps, self.need(self.m_bits, "m_bits")?)?,
            ScenarioModel::SimultaneousStreaming => plan_simultaneous_streaming(
                self.n,
                self.eps,
                self.need(self.k, "k")?,
                self.need(self.m_bits, "m_bits")?,
            )?,
            _ => return Ok(None),
        }))
    }
}

/// One trial's outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: String,
    pub trial: u64,
    pub decision: Decision,
    pub z: u64,
    pub t: f64,
    /// The model's cost measure; see [`SummaryRow::resource`].
    pub resource: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_bits: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathTaken>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub id: String,
    pub model: String,
    pub n: usize,
    pub eps: f64,
    pub dist: String,
    pub trials: u64,
    pub family: String,
    /// Clique size, or the node count for network scenarios.
    pub q: u64,
    /// Cliques (players or batches) in the plan's graph.
    pub l: u64,
    pub k: u64,
    pub tau: f64,
    pub threshold: f64,
    pub yes_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Empty when the input is neither uniform nor eps-far.
    pub error_rate: Option<f64>,
    /// `samples`, `samples_per_player`, `time`, or `rounds`.
    pub resource: String,
    pub mean_resource: f64,
    pub max_resource: f64,
    pub max_message_bits: Option<u32>,
    pub max_memory_bits: Option<u64>,
    pub power_certified: Option<bool>,
    pub wall_ms: Option<u128>,
}

const COLUMNS: [&str; 23] = [
    "id",
    "model",
    "n",
    "eps",
    "dist",
    "trials",
    "family",
    "q",
    "l",
    "k",
    "tau",
    "threshold",
    "yes_rate",
    "ci_low",
    "ci_high",
    "error_rate",
    "resource",
    "mean_resource",
    "max_resource",
    "max_message_bits",
    "max_memory_bits",
    "power_certified",
    "wall_ms",
];

fn field<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SummaryRow {
    /// CSV header; `wall_ms` only with `timing`.
    pub fn csv_header(timing: bool) -> String {
        let n = if timing { COLUMNS.len() } else { COLUMNS.len() - 1 };
        COLUMNS[..n].join(",")
    }

    pub fn csv_cells(&self, timing: bool) -> Vec<String> {
        let mut cells = vec![
            self.id.clone(),
            self.model.clone(),
            self.n.to_string(),
            self.eps.to_string(),
            self.dist.clone(),
            self.trials.to_string(),
            self.family.clone(),
            self.q.to_string(),
            self.l.to_string(),
            self.k.to_string(),
            self.tau.to_string(),
            self.threshold.to_string(),
            self.yes_rate.to_string(),
            self.ci_low.to_string(),
            self.ci_high.to_string(),
            field(self.error_rate),
            self.resource.clone(),
            self.mean_resource.to_string(),
            self.max_resource.to_string(),
            field(self.max_message_bits),
            field(self.max_memory_bits),
            field(self.power_certified),
        ];
        if timing {
            cells.push(field(self.wall_ms));
        }
        cells
    }
}

/// Renders rows as CSV under [`SummaryRow::csv_header`].
pub fn summary_csv(rows: &[SummaryRow], timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let n = if timing { COLUMNS.len() } else { COLUMNS.len() - 1 };
    w.write_record(&COLUMNS[..n]).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.csv_cells(timing)).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (centre + half).clamp(p, 1.0) };
    (lo, hi)
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub row: SummaryRow,
    pub records: Vec<TrialRecord>,
    pub plan: Option<Plan>,
}

struct Echo {
    family: String,
    q: u64,
    l: u64,
    k: u64,
    tau: f64,
    threshold: f64,
    resource: &'static str,
}

impl Echo {
    fn of_plan(plan: &Plan) -> Echo {
        let resource = match plan.model {
            crate::conditions::Model::Centralized | crate::conditions::Model::Streaming => "samples",
            crate::conditions::Model::Asymmetric => "time",
            _ => "samples_per_player",
        };
        let family =
            serde_json::to_value(plan.family).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        Echo {
            family,
            q: plan.clique_size,
            l: plan.players * plan.cliques_per_player,
            k: plan.players,
            tau: plan.tau,
            threshold: plan.threshold(),
            resource,
        }
    }
}

/// Plans and runs one scenario from `master_seed`; trial `i` uses
/// `StreamId::new(master_seed, i)`.
pub fn run_scenario(scenario: &Scenario, index: usize, master_seed: u64, exec: Execution) -> Result<ScenarioResult> {
    let started = std::time::Instant::now();
    if scenario.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let id = scenario.label(index);
    let p = scenario.dist.build(scenario.n, scenario.eps)?;
    let plan = scenario.plan()?;
    let mut power_certified = None;
    let (echo, records) = match &plan {
        Some(plan) => {
            let echo = Echo::of_plan(plan);
            let records = run_plan_trials(scenario, &id, plan, &p, master_seed, exec)?;
            (echo, records)
        }
        None => {
            let spec =
                scenario.topology.as_deref().ok_or_else(|| Error::invalid("network scenarios need `topology`"))?;
            let net = Network::new(parse_graph_spec(spec)?, None, scenario.n)?;
            if let Some(t) = scenario.t {
                let bfs = build_bfs_tree(&net)?;
                let cap = scenario.ball_cap.unwrap_or(net.k());
                power_certified = Some(graph_power_detection(&net, &bfs.tree, scenario.eps, t, cap)?.certified);
            }
            run_network_trials(scenario, &id, &net, &p, master_seed, exec)?
        }
    };
    let trials = records.len() as u64;
    let yes = records.iter().filter(|r| r.decision.is_yes()).count() as u64;
    let (ci_low, ci_high) = wilson_interval(yes, trials);
    let error_rate = Truth::classify(&p, scenario.eps)
        .map(|truth| records.iter().filter(|r| r.decision != truth.correct()).count() as f64 / trials as f64);
    let row = SummaryRow {
        id,
        model: scenario.model.name().into(),
        n: scenario.n,
        eps: scenario.eps,
        dist: scenario.dist.label(),
        trials,
        family: echo.family,
        q: echo.q,
        l: echo.l,
        k: echo.k,
        tau: echo.tau,
        threshold: echo.threshold,
        yes_rate: yes as f64 / trials as f64,
        ci_low,
        ci_high,
        error_rate,
        resource: echo.resource.into(),
        mean_resource: records.iter().map(|r| r.resource).sum::<f64>() / trials as f64,
        max_resource: records.iter().map(|r| r.resource).fold(0.0, f64::max),
        max_message_bits: records.iter().filter_map(|r| r.message_bits).max(),
        max_memory_bits: records.iter().filter_map(|r| r.memory_bits).max(),
        power_certified,
        wall_ms: Some(started.elapsed().as_millis()),
    };
    Ok(ScenarioResult { row, records, plan })
}

fn run_plan_trials(
    scenario: &Scenario,
    id: &str,
    plan: &Plan,
    p: &Distribution,
    seed: u64,
    exec: Execution,
) -> Result<Vec<TrialRecord>> {
    if scenario.model == ScenarioModel::Centralized {
        let spec = TesterSpec::new(plan.graph()?, plan.tau, plan.n, plan.eps)?;
        return try_map_trials(exec, scenario.trials, |trial| {
            let out = spec.run(p, StreamId::new(seed, trial))?;
            Ok(TrialRecord {
                scenario: id.to_string(),
                trial,
                decision: out.decision,
                z: out.z,
                t: out.t,
                resource: plan.resources.total_samples as f64,
                message_bits: None,
                memory_bits: None,
                early_stop: None,
                path: None,
            })
        });
    }
    try_map_trials(exec, scenario.trials, |trial| {
        let run = simulate(plan, p, StreamId::new(seed, trial), scenario.m_bits)?;
        let resource = match scenario.model {
            ScenarioModel::Asymmetric => run.ledger.time.unwrap_or(0.0),
            ScenarioModel::Streaming => run.ledger.total_samples() as f64,
            _ => run.ledger.samples.iter().copied().max().unwrap_or(0) as f64,
        };
        let streaming = matches!(scenario.model, ScenarioModel::Streaming | ScenarioModel::SimultaneousStreaming);
        Ok(TrialRecord {
            scenario: id.to_string(),
            trial,
            decision: run.decision,
            z: run.z,
            t: run.threshold,
            resource,
            message_bits: (!run.messages.is_empty()).then(|| run.ledger.max_message_bits()),
            memory_bits: streaming.then(|| run.ledger.max_memory_bits()),
            early_stop: streaming.then_some(run.early_stop),
            path: None,
        })
    })
}

fn run_network_trials(
    scenario: &Scenario,
    id: &str,
    net: &Network,
    p: &Distribution,
    seed: u64,
    exec: Execution,
) -> Result<(Echo, Vec<TrialRecord>)> {
    let bfs = build_bfs_tree(net)?;
    let detection = detect(net, &bfs.tree, scenario.n, scenario.eps)?;
    let setup = bfs.rounds + detection.rounds;
    let local = match scenario.model {
        ScenarioModel::CongestLocal => true,
        ScenarioModel::CongestPipelined => false,
        _ => detection.certified,
    };
    let k = net.k() as u64;
    if local {
        let tau = detection.tau_star.ok_or_else(|| Error::ProtocolRefused("topology is not certified".into()))?;
        let records = try_map_trials(exec, scenario.trials, |trial| {
            let out =
                local_collision_protocol(net, &bfs.tree, &detection, scenario.eps, p, StreamId::new(seed, trial))?;
            Ok::<_, Error>(TrialRecord {
                scenario: id.to_string(),
                trial,
                decision: out.decision,
                z: out.z,
                t: out.threshold,
                resource: (setup + out.rounds) as f64,
                message_bits: None,
                memory_bits: None,
                early_stop: None,
                path: Some(PathTaken::Local),
            })
        })?;
        let threshold = records.first().map_or(0.0, |r| r.t);
        let echo = Echo { family: "topology".into(), q: k, l: 1, k, tau, threshold, resource: "rounds" };
        return Ok((echo, records));
    }
    let outcomes = try_map_trials(exec, scenario.trials, |trial| {
        pipelined_bundle_protocol(net, &bfs.tree, scenario.eps, p, StreamId::new(seed, trial))
    })?;
    let first = &outcomes[0];
    let echo = Echo {
        family: "bundled_cliques".into(),
        q: first.bundle_size as u64,
        l: first.bundles.len() as u64,
        k,
        tau: first.tau,
        threshold: first.threshold,
        resource: "rounds",
    };
    let records = outcomes
        .into_iter()
        .enumerate()
        .map(|(trial, out)| TrialRecord {
            scenario: id.to_string(),
            trial: trial as u64,
            decision: out.decision,
            z: 0,
            t: out.threshold,
            resource: (setup + out.rounds) as f64,
            message_bits: None,
            memory_bits: None,
            early_stop: None,
            path: Some(PathTaken::Pipelined),
        })
        .collect();
    Ok((echo, records))
}

/// Parses a JSON array of scenarios, or one scenario per line.
pub fn parse_suite(text: &str) -> Result<Vec<Scenario>> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| Error::Parse(format!("suite: {e}")));
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

pub struct SuiteOutput {
    pub csv: String,
    pub rows: Vec<SummaryRow>,
    pub records: Vec<TrialRecord>,
    pub plans: Vec<Plan>,
}

pub fn run_suite_text(text: &str, master_seed: u64, exec: Execution, timing: bool) -> Result<SuiteOutput> {
    let scenarios = parse_suite(text)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut plans = Vec::new();
    for (i, s) in scenarios.iter().enumerate() {
        let result = run_scenario(s, i, master_seed, exec)?;
        rows.push(result.row);
        records.extend(result.records);
        plans.extend(result.plan);
    }
    Ok(SuiteOutput { csv: summary_csv(&rows, timing)?, rows, records, plans })
}

pub fn run_suite(path: &Path, master_seed: u64, exec: Execution, timing: bool) -> Result<SuiteOutput> {
    run_suite_text(&std::fs::read_to_string(path)?, master_seed, exec, timing)
}

pub fn records_jsonl(records: &[TrialRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentAudit {
    pub trials: u64,
    pub edges: u64,
    pub two_paths: u64,
    pub expected_mean: f64,
    pub empirical_mean: f64,
    pub mean_z_score: f64,
    pub expected_variance: f64,
    pub empirical_variance: f64,
    pub variance_relative_error: f64,
    pub variance_z_score: f64,
    /// Some z-score exceeds 4 in absolute value.
    pub flagged: bool,
}

/// Monte Carlo mean and variance of `Z` against the closed forms.
pub fn moment_audit(
    graph: &ComparisonGraph,
    p: &Distribution,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<MomentAudit> {
    if trials < 2 {
        return Err(Error::invalid("an audit needs at least two trials"));
    }
    let graph = Arc::new(graph.clone());
    let spec = TesterSpec::new(Arc::clone(&graph), 0.5, p.n(), 1.0)?;
    let zs = try_map_trials(exec, trials, |trial| {
        let lab = spec.labeling(p, StreamId::new(seed, trial))?;
        count_collisions(&graph, &lab).map(|z| z as f64)
    })?;
    let n = trials as f64;
    let mean = zs.iter().sum::<f64>() / n;
    let m2 = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n;
    let m4 = zs.iter().map(|z| (z - mean).powi(4)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    let expected_mean = expected_collisions(&graph, p);
    let expected_variance = variance_collisions(&graph, p);
    let z_of = |diff: f64, se: f64| {
        if se > 0.0 {
            diff / se
        } else if diff.abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mean_z = z_of(mean - expected_mean, (expected_variance / n).sqrt());
    let var_se = ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    let var_z = z_of(variance - expected_variance, var_se);
    let rel =
        if expected_variance > 0.0 { (variance - expected_variance).abs() / expected_variance } else { variance.abs() };
    Ok(MomentAudit {
        trials,
        edges: graph.edge_count(),
        two_paths: graph.two_path_count(),
        expected_mean,
        empirical_mean: mean,
        mean_z_score: mean_z,
        expected_variance,
        empirical_variance: variance,
        variance_relative_error: rel,
        variance_z_score: var_z,
        flagged: mean_z.abs() > 4.0 || var_z.abs() > 4.0,
    })
}

fn parse_num<T: std::str::FromStr>(s: &str, spec: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number `{s}` in `{spec}`")))
}

/// Graph specs: `clique:Q`, `cliques:Q:L`, `matching:P`, `star:L`,
/// `bipartite:A:B`, `cycle:N`, `path:N`, `random:N:P:SEED`,
/// `connected:N:P:SEED`, or a path to a JSON graph file.
pub fn parse_graph_spec(spec: &str) -> Result<ComparisonGraph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let arg = |i: usize| parts.get(i).copied().ok_or_else(|| Error::Parse(format!("`{spec}` is missing a field")));
    let arity = |n: usize| {
        if parts.len() == n + 1 {
            Ok(())
        } else {
            Err(Error::Parse(format!("`{spec}` expects {n} field(s)")))
        }
    };
    match parts[0] {
        "clique" => arity(1).and_then(|_| ComparisonGraph::clique(parse_num(arg(1)?, spec)?)),
        "cliques" => arity(2)
            .and_then(|_| ComparisonGraph::disjoint_cliques(parse_num(arg(1)?, spec)?, parse_num(arg(2)?, spec)?)),
        "matching" => arity(1).and_then(|_| ComparisonGraph::matching(parse_num(arg(1)?, spec)?)),
        "star" => arity(1).and_then(|_| ComparisonGraph::star(parse_num(arg(1)?, spec)?)),
        "bipartite" => {
            arity(2).and_then(|_| ComparisonGraph::bipartite(parse_num(arg(1)?, spec)?, parse_num(arg(2)?, spec)?))
        }
        "cycle" => arity(1).and_then(|_| ComparisonGraph::cycle(parse_num(arg(1)?, spec)?)),
        "path" => arity(1).and_then(|_| ComparisonGraph::path(parse_num(arg(1)?, spec)?)),
        "random" => arity(3).and_then(|_| {
            ComparisonGraph::erdos_renyi(
                parse_num(arg(1)?, spec)?,
                parse_num(arg(2)?, spec)?,
                parse_num(arg(3)?, spec)?,
            )
        }),
        "connected" => arity(3).and_then(|_| {
            ComparisonGraph::random_connected(
                parse_num(arg(1)?, spec)?,
                parse_num(arg(2)?, spec)?,
                parse_num(arg(3)?, spec)?,
            )
        }),
        _ if Path::new(spec).exists() => Ok(serde_json::from_str(&std::fs::read_to_string(spec)?)?),
        other => Err(Error::Parse(format!("unknown graph kind `{other}`"))),
    }
}

/// Distribution specs: `uniform:N`, `bump:N:EPS`, `heavy:N:EPS`,
/// `point:N:ELEMENT`, `explicit:P1,P2,...`, or a path to a JSON
/// distribution file.
pub fn parse_dist_spec(spec: &str) -> Result<Distribution> {
    let parts: Vec<&str> = spec.split(':').collect();
    let arg = |i: usize| parts.get(i).copied().ok_or_else(|| Error::Parse(format!("`{spec}` is missing a field")));
    match parts[0] {
        "uniform" => Distribution::uniform(parse_num(arg(1)?, spec)?),
        "bump" => Distribution::bump(parse_num(arg(1)?, spec)?, parse_num(arg(2)?, spec)?),
        "heavy" => Distribution::heavy(parse_num(arg(1)?, spec)?, parse_num(arg(2)?, spec)?),
        "point" => Distribution::point_mass(parse_num(arg(1)?, spec)?, parse_num(arg(2)?, spec)?),
        "explicit" => Distribution::new(arg(1)?.split(',').map(|x| parse_num(x, spec)).collect::<Result<_>>()?),
        _ if Path::new(spec).exists() => Ok(serde_json::from_str(&std::fs::read_to_string(spec)?)?),
        other => Err(Error::Parse(format!("unknown distribution kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(json: &str) -> Scenario {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn wilson_contains_estimate() {
        for (s, n) in [(0, 10), (10, 10), (7, 20), (1, 1)] {
            let (lo, hi) = wilson_interval(s, n);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
        }
    }

    #[test]
    fn single_trial_summary() {
        let s = scenario(r#"{"model":"centralized","n":16,"eps":1.0,"dist":{"kind":"uniform"},"trials":1}"#);
        let r = run_scenario(&s, 0, 3, Execution::Sequential).unwrap();
        assert_eq!(r.records.len(), 1);
        let yes = if r.records[0].decision.is_yes() { 1.0 } else { 0.0 };
        assert_eq!(r.row.yes_rate, yes);
        assert_eq!(r.row.mean_resource, r.records[0].resource);
    }

    #[test]
    fn empty_suite_is_header_only() {
        let out = run_suite_text("[]", 1, Execution::Sequential, false).unwrap();
        assert_eq!(out.csv, format!("{}\n", SummaryRow::csv_header(false)));
        assert!(run_suite_text("", 1, Execution::Sequential, false).unwrap().records.is_empty());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text =
            "{\"model\":\"centralized\",\"n\":4,\"eps\":1.0,\"dist\":{\"kind\":\"uniform\"},\"trials\":1}\n{oops}\n";
        let err = parse_suite(text).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn specs_parse() {
        assert_eq!(parse_graph_spec("clique:5").unwrap().edge_count(), 10);
        assert_eq!(parse_graph_spec("cliques:3:2").unwrap().two_path_count(), 12);
        assert_eq!(parse_graph_spec("bipartite:1:5").unwrap().two_path_count(), 20);
        assert!(parse_graph_spec("clique").is_err());
        assert!(parse_graph_spec("clique:5:6").is_err());
        assert!(parse_graph_spec("blob:3").is_err());
        assert_eq!(parse_dist_spec("bump:4:0.5").unwrap().probs(), &[0.375, 0.375, 0.125, 0.125]);
        assert_eq!(parse_dist_spec("explicit:0.5,0.5").unwrap().n(), 2);
        assert!(parse_dist_spec("uniform:x").is_err());
    }

    #[test]
    fn matching_audit() {
        let g = ComparisonGraph::matching(20).unwrap();
        let a = moment_audit(&g, &Distribution::bump(10, 0.5).unwrap(), 20_000, 4, Execution::Parallel).unwrap();
        assert_eq!(a.two_paths, 0);
        assert!(!a.flagged, "{a:?}");
    }

    #[test]
    fn missing_parameters_are_reported() {
        let s = scenario(r#"{"model":"simultaneous","n":16,"eps":1.0,"dist":{"kind":"uniform"},"trials":1}"#);
        let err = run_scenario(&s, 0, 1, Execution::Sequential).unwrap_err().to_string();
        assert!(err.contains("`k`"), "{err}");
    }
}
