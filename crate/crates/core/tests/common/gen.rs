use proptest::prelude::*;
use tightspan::rational::int;
use tightspan::split::{split_metric, Split, WeightedSplitSystem};
use tightspan::WeightedGraph;

/// Split systems on 3 to 6 points in which every pair is separated.
pub fn split_system() -> impl Strategy<Value = WeightedSplitSystem> {
    (3usize..=6)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((1u64..(1 << (n - 1)), 1i64..=4), 1..=7)))
        .prop_filter_map("pairs must be separated", |(n, raw)| {
            let mut entries: Vec<(Split, _)> = Vec::new();
            for (r, w) in raw {
                let s = Split::new(r << 1 | 1, n).ok()?;
                if entries.iter().all(|(t, _)| *t != s) {
                    entries.push((s, int(w)));
                }
            }
            let s = WeightedSplitSystem::new((1..=n).map(|i| i.to_string()).collect(), entries).ok()?;
            split_metric(&s).ok().map(|_| s)
        })
}

/// Connected graphs: `t` terminals then `a` auxiliaries, a random spanning
/// tree plus a few extra edges, integer weights 1 to 4.
pub fn graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..=4, 0usize..=3)
        .prop_flat_map(|(t, a)| {
            let n = t + a;
            (
                Just(t),
                Just(a),
                prop::collection::vec((any::<prop::sample::Index>(), 1i64..=4), n - 1),
                prop::collection::vec((0..n, 0..n, 1i64..=4), 0..=3),
            )
        })
        .prop_map(|(t, a, tree, extra)| {
            let mut g = WeightedGraph::new();
            for i in 0..t {
                g.add_terminal(format!("t{i}"));
            }
            for _ in 0..a {
                g.add_auxiliary();
            }
            for (v, (parent, w)) in tree.into_iter().enumerate() {
                let v = v + 1;
                g.add_edge(parent.index(v), v, int(w)).expect("tree edge");
            }
            for (u, v, w) in extra {
                if u != v && !g.has_edge(u, v) {
                    g.add_edge(u, v, int(w)).expect("extra edge");
                }
            }
            g
        })
}

/// Copy of `g` with vertex `v` moved to position `order[v]`.
pub fn relabel(g: &WeightedGraph, order: &[usize]) -> WeightedGraph {
    let n = g.vertex_count();
    let mut inverse = vec![0; n];
    for (v, &p) in order.iter().enumerate() {
        inverse[p] = v;
    }
    let mut h = WeightedGraph::new();
    for &v in &inverse {
        h.add_vertex(g.role(v).clone());
    }
    for (u, v, w) in g.edges() {
        h.add_edge(order[u], order[v], w).expect("edge");
    }
    h
}
