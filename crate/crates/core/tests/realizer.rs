use proptest::prelude::*;
use tightspan::corpus::{random_two_compatible, CorpusConfig};
use tightspan::graph::{check_optimality_necessary, is_realisation};
use tightspan::realizer::{
    improve_until_stable, optimal_realisations, scc_perturbation_improve, Improvement, Realisation, SearchConfig,
    SearchStrategy,
};
use tightspan::rational::frac;
use tightspan::split::split_metric;
use tightspan::{FiniteMetric, WeightedGraph};

fn instance(seed: u64, max_points: usize) -> FiniteMetric {
    let cfg = CorpusConfig { count: 1, seed, max_points, ..CorpusConfig::default() };
    split_metric(&random_two_compatible(&cfg)[0]).unwrap()
}

/// `g` plus an auxiliary hub joined to each terminal `x` by an edge of half
/// its eccentricity. No distance between terminals shrinks.
fn with_hub(g: &WeightedGraph, m: &FiniteMetric) -> WeightedGraph {
    let mut h = g.clone();
    let hub = h.add_auxiliary();
    for x in 0..m.len() {
        let ecc = (0..m.len()).map(|y| m.d(x, y).clone()).max().unwrap();
        let v = h.terminal_index(m.label(x)).unwrap();
        h.add_edge(v, hub, ecc * frac(1, 2)).unwrap();
    }
    h
}

fn masks(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (1u64..(1 << (n - 1))).map(move |mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn strategies_agree_on_the_optimum(seed in any::<u64>()) {
        let m = instance(seed, 4);
        let topo = optimal_realisations(&m, &SearchConfig { strategy: SearchStrategy::Topology, ..SearchConfig::default() }).unwrap();
        let cube = optimal_realisations(&m, &SearchConfig { strategy: SearchStrategy::SplitCube, ..SearchConfig::default() }).unwrap();
        prop_assert_eq!(&topo.optimum, &cube.optimum);
        for r in topo.realisations.iter().chain(&cube.realisations) {
            prop_assert!(is_realisation(&r.graph, &m));
            prop_assert_eq!(&r.length, &topo.optimum);
            prop_assert!(check_optimality_necessary(&r.graph, &m).unwrap().all_hold());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moves_on_optima_never_shorten(seed in any::<u64>()) {
        let m = instance(seed, 5);
        let out = optimal_realisations(&m, &SearchConfig::default()).unwrap();
        for r in &out.realisations {
            for in_a in masks(r.graph.vertex_count()) {
                if let Some(step) = scc_perturbation_improve(r, &m, &in_a).unwrap() {
                    prop_assert!(!matches!(step, Improvement::Shorter(_)));
                    prop_assert_eq!(&step.realisation().length, &out.optimum);
                    prop_assert!(is_realisation(&step.realisation().graph, &m));
                }
            }
        }
    }

    #[test]
    fn improving_a_hub_stays_a_realisation(seed in any::<u64>()) {
        let m = instance(seed, 5);
        let out = optimal_realisations(&m, &SearchConfig::default()).unwrap();
        let start = Realisation::new(with_hub(&out.realisations[0].graph, &m), &m).unwrap();
        let (end, steps) = improve_until_stable(&start, &m, 50).unwrap();
        let mut previous = start.length.clone();
        for step in &steps {
            let r = step.realisation();
            prop_assert!(is_realisation(&r.graph, &m));
            prop_assert!(r.length <= previous);
            previous = r.length.clone();
        }
        prop_assert!(end.length <= start.length);
        prop_assert!(end.length >= out.optimum);
    }
}

#[test]
fn hub_on_the_square_shortens() {
    let m = split_metric(&tightspan::corpus::square()).unwrap();
    let out = optimal_realisations(&m, &SearchConfig::default()).unwrap();
    let start = Realisation::new(with_hub(&out.realisations[0].graph, &m), &m).unwrap();
    let (end, steps) = improve_until_stable(&start, &m, 50).unwrap();
    assert!(!steps.is_empty());
    assert!(end.length < start.length);
    assert!(end.length >= out.optimum);
}
