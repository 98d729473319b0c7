use compgraph::conditions::{
    check_disjoint_cliques, check_graph, check_theorem, conjectured_edge_floor, conjectured_lower_bound,
    plan_centralized, plan_simultaneous, FloorModel,
};
use compgraph::tester::{count_collisions, exact_collision_pmf, expected_collisions, variance_collisions};
use compgraph::{ComparisonGraph, Distribution, GraphStats, StreamId, TesterSpec};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, 1..12).prop_filter("some mass", |w| w.iter().sum::<f64>() > 1e-6)
}

fn normalised(w: &[f64]) -> Distribution {
    let s: f64 = w.iter().sum();
    Distribution::new(w.iter().map(|x| x / s).collect()).unwrap()
}

fn edge_list() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2usize..12).prop_flat_map(|v| (Just(v), prop::collection::vec((0..v, 0..v), 0..40)))
}

fn simple(v: usize, raw: &[(usize, usize)]) -> ComparisonGraph {
    let mut edges: Vec<(usize, usize)> =
        raw.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
    edges.sort_unstable();
    edges.dedup();
    ComparisonGraph::from_edges(v, edges, None).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collision_probabilities_are_bounded(w in weights()) {
        let p = normalised(&w);
        let n = p.n() as f64;
        let mu = p.collision_probability();
        let gamma = p.three_way_collision_probability();
        prop_assert!(mu >= 1.0 / n - 1e-12 && mu <= 1.0 + 1e-12);
        prop_assert!(gamma <= mu + 1e-12);
        prop_assert!(gamma >= mu * mu - 1e-12);
        prop_assert!(p.l1_to_uniform() >= -1e-12 && p.l1_to_uniform() <= 2.0 + 1e-12);
    }

    #[test]
    fn samples_stay_in_support(w in weights(), seed in any::<u64>()) {
        let p = normalised(&w);
        let lab = p.sample_labeling(50, StreamId::new(seed, 0));
        for &x in &lab.values {
            prop_assert!(x >= 1 && x as usize <= p.n());
            prop_assert!(p.probs()[x as usize - 1] > 0.0);
        }
        prop_assert_eq!(lab.values, p.sample_labeling(50, StreamId::new(seed, 0)).values);
    }

    #[test]
    fn two_paths_match_ordered_pairs((v, raw) in edge_list()) {
        let g = simple(v, &raw);
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let mut brute = 0u64;
        for (i, e) in edges.iter().enumerate() {
            for (j, f) in edges.iter().enumerate() {
                if i != j && (e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1) {
                    brute += 1;
                }
            }
        }
        prop_assert_eq!(g.two_path_count(), brute);
        prop_assert_eq!(g.degrees().iter().sum::<u64>(), 2 * g.edge_count());
        if g.edge_count() > 0 {
            prop_assert!(g.check_inequalities().all_hold());
        }
    }

    #[test]
    fn powers_only_add_edges((v, raw) in edge_list(), t in 1usize..4) {
        let g = simple(v, &raw);
        let lower = g.graph_power(t).unwrap();
        let upper = g.graph_power(t + 1).unwrap();
        prop_assert!(lower.edge_count() <= upper.edge_count());
        let upper_edges: std::collections::HashSet<_> = upper.edges().collect();
        prop_assert!(lower.edges().all(|e| upper_edges.contains(&e)));
        prop_assert_eq!(g.graph_power(1).unwrap().edge_count(), g.edge_count());
    }

    #[test]
    fn er_graphs_satisfy_inequalities(v in 2usize..50, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = ComparisonGraph::erdos_renyi(v, p, seed).unwrap();
        if g.edge_count() > 0 {
            prop_assert!(g.check_inequalities().all_hold());
        }
    }

    #[test]
    fn pmf_matches_moments((v, raw) in (2usize..5).prop_flat_map(|v| (Just(v), prop::collection::vec((0..v, 0..v), 1..8))), w in prop::collection::vec(0.1f64..5.0, 2..5)) {
        let g = simple(v, &raw);
        prop_assume!(g.edge_count() > 0);
        let p = normalised(&w);
        let pmf = exact_collision_pmf(&g, &p).unwrap();
        let total: f64 = pmf.iter().sum();
        let mean: f64 = pmf.iter().enumerate().map(|(z, w)| z as f64 * w).sum();
        let var: f64 = pmf.iter().enumerate().map(|(z, w)| (z as f64 - mean).powi(2) * w).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!((mean - expected_collisions(&g, &p)).abs() < 1e-9);
        prop_assert!((var - variance_collisions(&g, &p)).abs() < 1e-9);
    }

    #[test]
    fn collisions_bounded_by_edges((v, raw) in edge_list(), seed in any::<u64>(), n in 1usize..6) {
        let g = simple(v, &raw);
        prop_assume!(g.edge_count() > 0);
        let p = Distribution::uniform(n).unwrap();
        let spec = TesterSpec::new(g.clone(), 0.5, n, 1.0).unwrap();
        let lab = spec.labeling(&p, StreamId::new(seed, 1)).unwrap();
        let z = count_collisions(&g, &lab).unwrap();
        prop_assert!(z <= g.edge_count());
        if n == 1 {
            prop_assert_eq!(z, g.edge_count());
        }
        let out = spec.run(&p, StreamId::new(seed, 1)).unwrap();
        prop_assert_eq!(out.z, z);
        prop_assert_eq!(out.decision.is_yes(), (z as f64) < spec.threshold());
    }

    #[test]
    fn conditions_are_monotone_in_edges(q in 3u64..400, l in 1u64..20, tau in 0.05f64..0.95, n in 1usize..300, eps in 0.2f64..1.0) {
        let small = check_theorem(GraphStats::disjoint_cliques(q, l).unwrap(), tau, n, eps).unwrap();
        let more = check_theorem(GraphStats::disjoint_cliques(q, l + 1).unwrap(), tau, n, eps).unwrap();
        prop_assert!(!small.cond1.pass || more.cond1.pass);
        prop_assert!(!small.cond2.pass || more.cond2.pass);
        prop_assert!(!small.cond3.pass || more.cond3.pass);
        let r = check_disjoint_cliques(q, l, tau, n, eps).unwrap();
        prop_assert!(!r.rederived.overall || r.direct.overall);
        prop_assert!(!r.direct.overall || r.triangle_convention.overall);
    }

    #[test]
    fn plans_certify_themselves(n in 1usize..400, eps in 0.3f64..1.0, k in 1u64..32) {
        for plan in [plan_centralized(n, eps).unwrap(), plan_simultaneous(n, eps, k).unwrap()] {
            let again = check_theorem(plan.stats().unwrap(), plan.tau, n, eps).unwrap();
            prop_assert!(again.overall);
            prop_assert_eq!(again, plan.report);
            let roundtrip: compgraph::Plan = serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
            prop_assert!(check_theorem(roundtrip.stats().unwrap(), roundtrip.tau, n, eps).unwrap().overall);
            let floor = conjectured_lower_bound(&FloorModel::Centralized, conjectured_edge_floor(n, eps, 1.0)).unwrap();
            prop_assert!(floor <= plan.resources.total_samples as f64);
        }
    }

    #[test]
    fn planners_grow_with_n(n in 1usize..300, eps in 0.3f64..1.0) {
        let a = plan_centralized(n, eps).unwrap();
        let b = plan_centralized(n + 50, eps).unwrap();
        prop_assert!(a.clique_size <= b.clique_size);
        prop_assert!(check_graph(&a.graph().unwrap(), a.tau, n, eps).unwrap().overall);
    }
}
