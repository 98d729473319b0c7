//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::time::Instant;

use compgraph::conditions::{
    appendix_counterexample, bits_per_sample, check_disjoint_cliques, conjectured_edge_floor, conjectured_lower_bound,
    plan_asymmetric, plan_centralized, plan_simultaneous, plan_simultaneous_streaming, plan_streaming, FloorModel,
    Plan,
};
use compgraph::congest::{
    audit_transcript, build_bfs_tree, combined_protocol, detect, local_collision_protocol, Network, PathTaken,
    PIPE_FACTOR, PIPE_OFFSET, SUM_FACTOR, SUM_OFFSET,
};
use compgraph::harness::{moment_audit, run_scenario, DistSpec, Scenario, ScenarioModel};
use compgraph::models::{simulate, Payload};
use compgraph::tester::{exact_error_probability, Truth};
use compgraph::{ComparisonGraph, Decision, Distribution, Error, Execution, StreamId, TesterSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_917;

type FloorCase = (String, compgraph::Result<Plan>, Box<dyn Fn(&Plan) -> (FloorModel, f64)>);
type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn moments() -> Verdict {
    let graphs = [
        ("K5", ComparisonGraph::clique(5).unwrap()),
        ("K8", ComparisonGraph::clique(8).unwrap()),
        ("matching10", ComparisonGraph::matching(10).unwrap()),
        ("star10", ComparisonGraph::star(10).unwrap()),
        ("cycle12", ComparisonGraph::cycle(12).unwrap()),
        ("cliques4x3", ComparisonGraph::disjoint_cliques(4, 3).unwrap()),
    ];
    let dists = [
        ("uniform", Distribution::uniform(10).unwrap()),
        ("bump", Distribution::bump(10, 0.5).unwrap()),
        ("heavy", Distribution::heavy(10, 0.5).unwrap()),
    ];
    let mut failures = Vec::new();
    let mut worst_z: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut pairs = 0;
    for (gi, (gname, g)) in graphs.iter().enumerate() {
        for (di, (dname, p)) in dists.iter().enumerate() {
            pairs += 1;
            let a = moment_audit(g, p, 100_000, SEED + (gi * 10 + di) as u64, Execution::Parallel).unwrap();
            worst_z = worst_z.max(a.mean_z_score.abs());
            let mean_ok = a.mean_z_score.abs() <= 4.0;
            let var_ok = a.expected_variance < 0.01 || a.variance_relative_error <= 0.10;
            if a.expected_variance >= 0.01 {
                worst_rel = worst_rel.max(a.variance_relative_error);
            }
            if !(mean_ok && var_ok) {
                failures.push(format!("{gname}/{dname}"));
            }
        }
    }
    verdict(
        failures.is_empty() && pairs >= 12,
        format!(
            "{pairs} pairs, max |z| {worst_z:.2}, max variance error {:.3}%{}",
            worst_rel * 100.0,
            listed(&failures)
        ),
    )
}

fn listed(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!(", failing: {}", items.join(" "))
    }
}

/// Error probability by walking every labeling as a base-`n` counter.
fn brute_error(g: &ComparisonGraph, p: &Distribution, tau: f64, eps: f64, truth: Truth) -> f64 {
    let n = p.n();
    let v = g.vertex_count();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let t = edges.len() as f64 * (1.0 + tau * eps * eps) / n as f64;
    let mut labels = vec![0usize; v];
    let mut total = 0.0;
    loop {
        let weight: f64 = labels.iter().map(|&x| p.probs()[x]).product();
        let z = edges.iter().filter(|&&(a, b)| labels[a] == labels[b]).count() as f64;
        let yes = z < t;
        let wrong = match truth {
            Truth::Uniform => !yes,
            Truth::Far => yes,
        };
        if wrong {
            total += weight;
        }
        let mut i = 0;
        while i < v {
            labels[i] += 1;
            if labels[i] < n {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == v {
            return total;
        }
    }
}

fn oracle() -> Verdict {
    let cases: Vec<(&str, ComparisonGraph, Distribution, f64)> = vec![
        ("K3/u3", ComparisonGraph::clique(3).unwrap(), Distribution::uniform(3).unwrap(), 1.0),
        ("K3/heavy3", ComparisonGraph::clique(3).unwrap(), Distribution::heavy(3, 1.0).unwrap(), 1.0),
        ("M2/u4", ComparisonGraph::matching(2).unwrap(), Distribution::uniform(4).unwrap(), 0.5),
        ("M2/bump4", ComparisonGraph::matching(2).unwrap(), Distribution::bump(4, 1.0).unwrap(), 1.0),
        ("star3/heavy4", ComparisonGraph::star(3).unwrap(), Distribution::heavy(4, 0.5).unwrap(), 0.5),
        ("path4/u4", ComparisonGraph::path(4).unwrap(), Distribution::uniform(4).unwrap(), 0.5),
        ("C4/u6", ComparisonGraph::cycle(4).unwrap(), Distribution::uniform(6).unwrap(), 0.5),
        ("C4/bump6", ComparisonGraph::cycle(4).unwrap(), Distribution::bump(6, 0.5).unwrap(), 0.5),
        ("K4/bump8", ComparisonGraph::clique(4).unwrap(), Distribution::bump(8, 0.5).unwrap(), 0.5),
        ("2K3/u6", ComparisonGraph::disjoint_cliques(3, 2).unwrap(), Distribution::uniform(6).unwrap(), 0.5),
        ("2K3/heavy6", ComparisonGraph::disjoint_cliques(3, 2).unwrap(), Distribution::heavy(6, 1.0).unwrap(), 1.0),
    ];
    let trials = 10_000u64;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, (name, g, p, eps)) in cases.iter().enumerate() {
        assert!((p.n() as f64).powi(g.vertex_count() as i32) <= 1e5);
        let tau = 0.5;
        let spec = TesterSpec::new(g.clone(), tau, p.n(), *eps).unwrap();
        let truth = Truth::classify(p, *eps).unwrap();
        let exact = exact_error_probability(&spec, p).unwrap();
        let brute = brute_error(g, p, tau, *eps, truth);
        let wrong = (0..trials)
            .filter(|&t| spec.run(p, StreamId::new(SEED + i as u64, t)).unwrap().decision != truth.correct())
            .count() as f64;
        let freq = wrong / trials as f64;
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        let dev = if sigma > 0.0 { (freq - exact).abs() / sigma } else { (freq - exact).abs() * 1e12 };
        worst = worst.max(dev);
        if (exact - brute).abs() > 1e-12 || dev > 3.0 {
            failures.push(format!("{name}(exact {exact:.5} brute {brute:.5} mc {freq:.5})"));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{} cases, enumeration agrees, max Monte Carlo deviation {worst:.2} sigma{}",
            cases.len(),
            listed(&failures)
        ),
    )
}

fn scenario(model: ScenarioModel, n: usize, eps: f64, dist: DistSpec, trials: u64) -> Scenario {
    Scenario {
        id: None,
        model,
        n,
        eps,
        k: None,
        rates: None,
        m_bits: None,
        topology: None,
        t: None,
        ball_cap: None,
        dist,
        trials,
    }
}

/// YES-rate thresholds on uniform and on the two far families.
fn guarantee(mut base: Scenario) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for dist in [DistSpec::Uniform, DistSpec::Bump { eps: None }, DistSpec::Heavy { eps: None }] {
        base.dist = dist.clone();
        let row = run_scenario(&base, 0, SEED, Execution::Parallel).unwrap().row;
        let good = match dist {
            DistSpec::Uniform => row.yes_rate >= 0.70,
            _ => row.yes_rate <= 0.30,
        };
        ok &= good;
        parts.push(format!("{}={:.3}", dist.label(), row.yes_rate));
    }
    (ok, parts.join(" "))
}

fn end_to_end() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [64, 100, 256] {
        for eps in [0.5, 1.0] {
            let (good, detail) = guarantee(scenario(ScenarioModel::Centralized, n, eps, DistSpec::Uniform, 2000));
            ok &= good;
            if !good {
                parts.push(format!("n={n} eps={eps}: {detail}"));
            }
        }
    }
    verdict(ok, format!("6 settings x 3 inputs x 2000 trials{}", listed(&parts)))
}

fn clique_constant() -> Verdict {
    let mut points = 0;
    let mut certified = 0;
    let mut unsound = Vec::new();
    let mut band = Vec::new();
    let mut outside_band = Vec::new();
    for n in [1usize, 16, 64, 100] {
        for eps in [0.5, 1.0] {
            for l in [1u64, 4, 16, 64] {
                let q0 = (35.0 * (n as f64).sqrt() / (eps * eps * (l as f64).sqrt())).ceil().max(3.0) as u64;
                for q in [q0, 2 * q0, 6 * q0] {
                    for tau in [1.0 / 9.0, 0.1, 0.25, 0.5] {
                        let r = check_disjoint_cliques(q, l, tau, n, eps).unwrap();
                        if !r.single_bound.pass {
                            continue;
                        }
                        points += 1;
                        if r.rederived.overall {
                            certified += 1;
                            if !r.direct.overall {
                                unsound.push(format!("q={q} l={l} n={n} eps={eps} tau={tau:.3}"));
                            }
                        }
                        if r.closed_form.overall && !r.direct.overall {
                            let row = format!("q={q} l={l} n={n} eps={eps} tau={tau:.3}");
                            if r.triangle_convention.overall {
                                band.push(row);
                            } else {
                                outside_band.push(row);
                            }
                        }
                    }
                }
            }
        }
    }
    println!("  closed-form pass / direct fail (all pass with c/6): {}", band.len());
    for row in band.iter().take(8) {
        println!("    {row}");
    }
    verdict(
        points >= 50 && certified >= 50 && unsound.is_empty() && outside_band.is_empty(),
        format!(
            "{points} points meet the single bound, {certified} re-derived certified, {} closed-form disagreements inside the factor-6 band{}{}",
            band.len(),
            listed(&unsound),
            listed(&outside_band)
        ),
    )
}

fn expected_message_bits(t: f64) -> u32 {
    let x = t.ceil() as u64 + 2;
    64 - (x - 1).leading_zeros()
}

fn check_model(name: &str, plan: &Plan, m_bits: Option<u64>, failures: &mut Vec<String>) {
    let spec = TesterSpec::new(plan.graph().unwrap(), plan.tau, plan.n, plan.eps).unwrap();
    let dists = [
        Distribution::uniform(plan.n).unwrap(),
        Distribution::bump(plan.n, plan.eps).unwrap(),
        Distribution::heavy(plan.n, plan.eps).unwrap(),
    ];
    let bits = expected_message_bits(plan.threshold());
    for trial in 0..200u64 {
        let p = &dists[trial as usize % 3];
        let stream = StreamId::new(SEED, trial);
        let run = simulate(plan, p, stream, m_bits).unwrap();
        let mono = spec.run(p, stream).unwrap();
        let overflow = run.messages.iter().any(|m| matches!(m.payload, Payload::Overflow));
        let agrees = if run.early_stop || overflow {
            run.decision == Decision::No && mono.decision == Decision::No
        } else {
            run.decision == mono.decision && run.z == mono.z
        };
        let ledger = &run.ledger;
        let mut budget = ledger.violations.is_empty();
        if plan.resources.message_bits.is_some() {
            budget &= ledger.message_bits.iter().all(|&b| b == bits);
        }
        if let Some(m) = m_bits {
            budget &= ledger.max_memory_bits() <= m;
        }
        if plan.resources.time.is_some() {
            budget &= ledger.time == plan.resources.time;
        }
        if !(agrees && budget) {
            failures.push(format!("{name}#{trial}"));
            return;
        }
    }
}

fn simulators() -> Verdict {
    let (n, eps) = (64, 1.0);
    let m = |m_prime: u64| 2 * bits_per_sample(n) as u64 * m_prime;
    let mut failures = Vec::new();
    for k in [4, 16] {
        check_model(&format!("simultaneous k={k}"), &plan_simultaneous(n, eps, k).unwrap(), None, &mut failures);
    }
    for rates in [vec![1.0; 4], vec![4.0, 2.0, 1.0]] {
        check_model(&format!("asymmetric {rates:?}"), &plan_asymmetric(n, eps, &rates).unwrap(), None, &mut failures);
    }
    for m_prime in [4, 8] {
        check_model(
            &format!("streaming m'={m_prime}"),
            &plan_streaming(n, eps, m(m_prime)).unwrap(),
            Some(m(m_prime)),
            &mut failures,
        );
    }
    let combined = plan_simultaneous_streaming(n, eps, 4, m(4)).unwrap();
    check_model("simultaneous streaming k=4 m'=4", &combined, Some(m(4)), &mut failures);
    verdict(failures.is_empty(), format!("7 configurations x 200 runs{}", listed(&failures)))
}

fn inequalities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut graphs: Vec<ComparisonGraph> = (0..500)
        .map(|i| {
            let v = rng.random_range(2..=50);
            let p = rng.random_range(0.0..1.0);
            ComparisonGraph::erdos_renyi(v, p, SEED + i).unwrap()
        })
        .collect();
    graphs.extend([
        ComparisonGraph::clique(7).unwrap(),
        ComparisonGraph::disjoint_cliques(4, 3).unwrap(),
        ComparisonGraph::matching(6).unwrap(),
        ComparisonGraph::star(9).unwrap(),
        ComparisonGraph::bipartite(3, 5).unwrap(),
        ComparisonGraph::cycle(8).unwrap(),
        ComparisonGraph::path(6).unwrap(),
        ComparisonGraph::cycle(9).unwrap().graph_power(2).unwrap(),
    ]);
    // every graph on five labelled vertices
    let pairs: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
    for mask in 0u32..1 << pairs.len() {
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e);
        graphs.push(ComparisonGraph::from_edges(5, edges, None).unwrap());
    }
    let mut broken = 0;
    let mut brute_checked = 0;
    let mut brute_wrong = 0;
    for g in &graphs {
        if g.edge_count() > 0 && !g.check_inequalities().all_hold() {
            broken += 1;
        }
        if g.vertex_count() <= 12 {
            brute_checked += 1;
            let edges: Vec<(usize, usize)> = g.edges().collect();
            let mut ordered = 0u64;
            for (i, &(a, b)) in edges.iter().enumerate() {
                for (j, &(c, d)) in edges.iter().enumerate() {
                    if i != j && (a == c || a == d || b == c || b == d) {
                        ordered += 1;
                    }
                }
            }
            if ordered != g.two_path_count() {
                brute_wrong += 1;
            }
        }
    }
    verdict(
        broken == 0 && brute_wrong == 0,
        format!(
            "{} graphs, {broken} violations; two-path brute force on {brute_checked} graphs, {brute_wrong} mismatches",
            graphs.len()
        ),
    )
}

fn congest() -> Verdict {
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for (n, eps) in [(1usize, 1.0), (4, 1.0)] {
        let k = plan_centralized(n, eps).unwrap().clique_size as usize;
        let net = Network::new(ComparisonGraph::clique(k).unwrap(), None, n).unwrap().with_recording(true);
        let bfs = build_bfs_tree(&net).unwrap();
        let det = detect(&net, &bfs.tree, n, eps).unwrap();
        if !det.certified {
            problems.push(format!("K{k} uncertified at n={n}"));
            continue;
        }
        let p = Distribution::uniform(n).unwrap();
        for trial in 0..3 {
            let out = local_collision_protocol(&net, &bfs.tree, &det, eps, &p, StreamId::new(SEED, trial)).unwrap();
            if out.rounds > 1 + SUM_FACTOR * net.diameter() + SUM_OFFSET {
                problems.push(format!("K{k}: {} rounds", out.rounds));
            }
            if audit_transcript(&out.events, net.channel_bits()).is_err() {
                problems.push(format!("K{k}: channel overloaded"));
            }
        }
        if n > 1 {
            let mut s = scenario(ScenarioModel::CongestLocal, n, eps, DistSpec::Uniform, 2000);
            s.topology = Some(format!("clique:{k}"));
            let (good, detail) = guarantee(s);
            notes.push(format!("K{k} {detail}"));
            if !good {
                problems.push(format!("K{k} error rates {detail}"));
            }
        }
    }
    for (n, len) in [(16usize, 300usize), (16, 400), (64, 600)] {
        let eps = 1.0;
        let net = Network::new(ComparisonGraph::path(len).unwrap(), None, n).unwrap().with_recording(true);
        let bfs = build_bfs_tree(&net).unwrap();
        let det = detect(&net, &bfs.tree, n, eps).unwrap();
        let p = Distribution::bump(n, eps).unwrap();
        let refused = matches!(
            local_collision_protocol(&net, &bfs.tree, &det, eps, &p, StreamId::new(SEED, 0)),
            Err(Error::ProtocolRefused(_))
        );
        if det.certified || !refused {
            problems.push(format!("path{len} at n={n} not refused"));
            continue;
        }
        for trial in 0..2 {
            let out = combined_protocol(&net, eps, &p, StreamId::new(SEED, trial)).unwrap();
            let pipe =
                compgraph::congest::pipelined_bundle_protocol(&net, &bfs.tree, eps, &p, StreamId::new(SEED, trial))
                    .unwrap();
            let bound = PIPE_FACTOR * (net.diameter() + pipe.bundle_size) + PIPE_OFFSET;
            if out.path != PathTaken::Pipelined || out.protocol_rounds > bound || pipe.rounds > bound {
                problems.push(format!("path{len}: {:?} {} rounds > {bound}", out.path, out.protocol_rounds));
            }
            if audit_transcript(&pipe.events, net.channel_bits()).is_err() {
                problems.push(format!("path{len}: channel overloaded"));
            }
            if out.decision != Decision::No {
                notes.push(format!("path{len} answered YES on a far input"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut mismatches = 0;
    for i in 0..100 {
        let v = rng.random_range(2..=60);
        let pe = rng.random_range(0.02..0.4);
        let g = ComparisonGraph::random_connected(v, pe, SEED + i).unwrap();
        let (edges, two_paths) = (g.edge_count(), g.two_path_count());
        let net = Network::new(g, None, 16).unwrap();
        let bfs = build_bfs_tree(&net).unwrap();
        let det = detect(&net, &bfs.tree, 16, 1.0).unwrap();
        if det.edges != edges || det.two_paths != two_paths {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        problems.push(format!("{mismatches} aggregation mismatches"));
    }
    verdict(
        problems.is_empty(),
        format!("{}; 100 random topologies aggregate exactly{}", notes.join("; "), listed(&problems)),
    )
}

fn counterexample() -> Verdict {
    let c = appendix_counterexample(16, 1.0, 40.0).unwrap();
    let h_ok = c.h_report.overall;
    let g_fails = c.g_reports.iter().all(|r| !r.cond3.pass);
    verdict(
        h_ok && g_fails && c.g_ratio >= 1.0 / 12.0,
        format!(
            "H = C{} certifies at tau {:.2}; G fails cond3 on all {} grid taus: {g_fails}; c/|E|^2 = {:.4}",
            c.h.vertex_count(),
            c.h_report.tau,
            c.g_reports.len(),
            c.g_ratio
        ),
    )
}

fn floors() -> Verdict {
    let mut checked = 0;
    let mut skipped = 0;
    let mut problems = Vec::new();
    for n in [1usize, 16, 64, 100, 256] {
        for eps in [0.5, 1.0] {
            let e_min = conjectured_edge_floor(n, eps, 1.0);
            let mut cases: Vec<FloorCase> = vec![(
                "centralized".into(),
                plan_centralized(n, eps),
                Box::new(|p: &Plan| (FloorModel::Centralized, p.resources.total_samples as f64)),
            )];
            for k in [1u64, 4, 16, 64] {
                cases.push((
                    format!("simultaneous k={k}"),
                    plan_simultaneous(n, eps, k),
                    Box::new(move |p: &Plan| (FloorModel::Simultaneous { k }, p.resources.samples_per_player as f64)),
                ));
            }
            for rates in [vec![1.0, 1.0], vec![2.0, 1.0], vec![4.0, 2.0, 1.0], vec![1.0, 0.0, 0.0]] {
                let r = rates.clone();
                cases.push((
                    format!("asymmetric {rates:?}"),
                    plan_asymmetric(n, eps, &rates),
                    Box::new(move |p: &Plan| (FloorModel::Asymmetric { rates: r.clone() }, p.resources.time.unwrap())),
                ));
            }
            let bits = 2 * bits_per_sample(n) as u64;
            for m_prime in [3u64, 4, 8, 16] {
                cases.push((
                    format!("streaming m'={m_prime}"),
                    plan_streaming(n, eps, bits * m_prime),
                    Box::new(|p: &Plan| {
                        (FloorModel::Streaming { m_prime: p.clique_size }, p.resources.total_samples as f64)
                    }),
                ));
                for k in [4u64, 16] {
                    cases.push((
                        format!("simultaneous streaming k={k} m'={m_prime}"),
                        plan_simultaneous_streaming(n, eps, k, bits * m_prime),
                        Box::new(move |p: &Plan| {
                            (
                                FloorModel::SimultaneousStreaming { k, m_prime: p.clique_size },
                                p.resources.samples_per_player as f64,
                            )
                        }),
                    ));
                }
            }
            for (name, plan, measure) in cases {
                let plan = match plan {
                    Ok(plan) => plan,
                    Err(e) if e.is_capacity() => {
                        skipped += 1;
                        continue;
                    }
                    Err(e) => panic!("{name}: {e}"),
                };
                checked += 1;
                let (model, used) = measure(&plan);
                let floor = conjectured_lower_bound(&model, e_min).unwrap();
                if floor > used * (1.0 + 1e-12) || (plan.resources.edges as f64) < e_min {
                    problems.push(format!("{name} n={n} eps={eps}: floor {floor:.1} > {used}"));
                }
                if let FloorModel::Streaming { m_prime } = model {
                    let exact = conjectured_lower_bound(&model, e_min).unwrap() == e_min / m_prime as f64;
                    let rearranged = plan.resources.edges <= m_prime * plan.resources.total_samples;
                    if !(exact && rearranged) {
                        problems.push(format!("{name} n={n} eps={eps}: streaming floor mismatch"));
                    }
                }
            }
        }
    }
    verdict(
        problems.is_empty() && checked > 0,
        format!("{checked} plans checked, {skipped} infeasible budgets skipped{}", listed(&problems)),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("moment exactness", moments),
        ("brute-force oracle", oracle),
        ("end-to-end error", end_to_end),
        ("disjoint-clique constant", clique_constant),
        ("model simulators", simulators),
        ("graph inequalities", inequalities),
        ("CONGEST", congest),
        ("hub counterexample", counterexample),
        ("lower-bound consistency", floors),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("{label} {status} [{name}] {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
