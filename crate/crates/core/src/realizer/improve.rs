//! Local moves on realisations driven by split-flow components: shift weight
//! across the boundary of an auxiliary component, then contract edges that
//! reach zero.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{is_realisation, WeightedGraph};
use crate::metric::FiniteMetric;
use crate::rational::Rat;

use super::flow::split_flow_digraph;
use super::Realisation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Improvement {
    /// Total length dropped.
    Shorter(Realisation),
    /// Same length, fewer vertices.
    Contracted(Realisation),
    /// Same graph and length, strictly more terminal geodesics.
    MorePaths(Realisation),
}

impl Improvement {
    pub fn realisation(&self) -> &Realisation {
        match self {
            Improvement::Shorter(r) | Improvement::Contracted(r) | Improvement::MorePaths(r) => r,
        }
    }

    pub fn into_realisation(self) -> Realisation {
        match self {
            Improvement::Shorter(r) | Improvement::Contracted(r) | Improvement::MorePaths(r) => r,
        }
    }
}

/// One move for the bipartition marked by `in_a` (indexed by vertex; only
/// terminal entries matter). Returns `None` when no auxiliary component of
/// the split-flow digraph yields a move.
pub fn scc_perturbation_improve(r: &Realisation, m: &FiniteMetric, in_a: &[bool]) -> Result<Option<Improvement>> {
    let g = &r.graph;
    if !is_realisation(g, m) {
        return Err(Error::NotARealisation);
    }
    let flow = split_flow_digraph(g, in_a)?;
    let edges = g.edges();
    for w_set in &flow.sccs {
        if w_set.iter().any(|&v| g.is_terminal(v)) {
            continue;
        }
        let inside = |v: usize| flow.component[v] == flow.component[w_set[0]];
        let mut delta: Vec<i64> = edges
            .iter()
            .map(|&(u, v, _)| {
                let (a, b) = if flow.arcs.contains(&(u, v)) {
                    (u, v)
                } else if flow.arcs.contains(&(v, u)) {
                    (v, u)
                } else {
                    return 0;
                };
                match (inside(a), inside(b)) {
                    (false, true) => 1,
                    (true, false) => -1,
                    _ => 0,
                }
            })
            .collect();
        let net: i64 = delta.iter().sum();
        if net > 0 {
            delta.iter_mut().for_each(|d| *d = -*d);
        }
        let Some(t) = edges
            .iter()
            .zip(&delta)
            .filter(|(_, d)| **d == -1)
            .map(|((_, _, w), _)| w.clone())
            .min()
        else {
            continue;
        };
        let eps = ray_limit(g, m, &edges, &delta, &t)?;
        let moved: Vec<(usize, usize, Rat)> = edges
            .iter()
            .zip(&delta)
            .map(|((u, v, w), d)| (*u, *v, w + &eps * Rat::from_integer((*d).into())))
            .collect();
        let net = net.abs();
        if net != 0 || eps == t {
            let next = Realisation::new(contract_zero_edges(g, &moved)?, m)
                .map_err(|_| Error::Invariant("perturbed graph stopped realising the metric".into()))?;
            if next.length < r.length {
                return Ok(Some(Improvement::Shorter(next)));
            }
            if next.vertex_count() < r.vertex_count() {
                return Ok(Some(Improvement::Contracted(next)));
            }
            return Err(Error::Invariant("boundary move neither shortened nor contracted".into()));
        }
        let next = Realisation::new(contract_zero_edges(g, &moved)?, m)
            .map_err(|_| Error::Invariant("perturbed graph stopped realising the metric".into()))?;
        if next.gamma_count > r.gamma_count {
            return Ok(Some(Improvement::MorePaths(next)));
        }
    }
    Ok(None)
}

/// Largest `ε ≤ t` keeping every terminal path at least as long as the metric
/// distance of its ends.
fn ray_limit(g: &WeightedGraph, m: &FiniteMetric, edges: &[(usize, usize, Rat)], delta: &[i64], t: &Rat) -> Result<Rat> {
    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, (u, v, _)) in edges.iter().enumerate() {
        edge_index.insert((*u, *v), i);
        edge_index.insert((*v, *u), i);
    }
    let terms = g.terminals();
    let label_of: Vec<usize> = terms
        .iter()
        .map(|&x| m.index_of(g.terminal_label(x).expect("terminal")).expect("terminal in metric"))
        .collect();
    let mut best = t.clone();
    for (i, &x) in terms.iter().enumerate() {
        for (j, &y) in terms.iter().enumerate().skip(i + 1) {
            let target = m.d(label_of[i], label_of[j]).clone();
            let mut on_path = vec![false; g.vertex_count()];
            on_path[x] = true;
            let mut ctx = Walk { g, edges, delta, edge_index: &edge_index, target: &target, y, on_path, best: &mut best };
            ctx.dfs(x, Rat::from_integer(0.into()), 0);
        }
    }
    Ok(best)
}

struct Walk<'a> {
    g: &'a WeightedGraph,
    edges: &'a [(usize, usize, Rat)],
    delta: &'a [i64],
    edge_index: &'a HashMap<(usize, usize), usize>,
    target: &'a Rat,
    y: usize,
    on_path: Vec<bool>,
    best: &'a mut Rat,
}

impl Walk<'_> {
    fn dfs(&mut self, v: usize, len: Rat, shift: i64) {
        if v == self.y {
            if shift < 0 {
                let limit = (&len - self.target) / Rat::from_integer((-shift).into());
                if limit < *self.best {
                    *self.best = limit;
                }
            }
            return;
        }
        let next: Vec<usize> = self.g.neighbors(v).map(|(u, _)| u).collect();
        for u in next {
            if self.on_path[u] {
                continue;
            }
            let e = self.edge_index[&(v, u)];
            self.on_path[u] = true;
            self.dfs(u, &len + &self.edges[e].2, shift + self.delta[e]);
            self.on_path[u] = false;
        }
    }
}

/// Merges the endpoints of zero-weight edges; parallel edges keep the
/// lighter weight.
fn contract_zero_edges(g: &WeightedGraph, weighted: &[(usize, usize, Rat)]) -> Result<WeightedGraph> {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while p[r] != r {
            r = p[r];
        }
        p[v] = r;
        r
    }
    for (u, v, w) in weighted {
        if w.numer() == &0.into() {
            let (a, b) = (find(&mut parent, *u), find(&mut parent, *v));
            if a == b {
                continue;
            }
            if g.is_terminal(a) && g.is_terminal(b) {
                return Err(Error::Invariant("two terminals merged".into()));
            }
            // A terminal representative survives the merge.
            if g.is_terminal(b) {
                parent[a] = b;
            } else {
                parent[b] = a;
            }
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut out = WeightedGraph::new();
    for v in 0..n {
        if find(&mut parent, v) == v {
            index[v] = out.add_vertex(g.role(v).clone());
        }
    }
    let mut best: HashMap<(usize, usize), Rat> = HashMap::new();
    for (u, v, w) in weighted {
        let (a, b) = (index[find(&mut parent, *u)], index[find(&mut parent, *v)]);
        if a == b {
            continue;
        }
        if *w < Rat::from_integer(0.into()) {
            return Err(Error::Invariant("negative weight after perturbation".into()));
        }
        let key = (a.min(b), a.max(b));
        best.entry(key).and_modify(|cur| if *w < *cur { *cur = w.clone() }).or_insert_with(|| w.clone());
    }
    let mut keys: Vec<_> = best.into_iter().collect();
    keys.sort();
    for ((a, b), w) in keys {
        out.add_edge(a, b, w)?;
    }
    Ok(out)
}

/// Applies moves over all terminal bipartitions until none fires or
/// `max_steps` moves have been made. Returns the final realisation and the
/// moves taken.
pub fn improve_until_stable(r: &Realisation, m: &FiniteMetric, max_steps: usize) -> Result<(Realisation, Vec<Improvement>)> {
    let mut current = r.clone();
    let mut steps = Vec::new();
    'outer: while steps.len() < max_steps {
        let terms = current.graph.terminals();
        for mask in 1u64..(1u64 << (terms.len() - 1)) {
            let mut in_a = vec![false; current.graph.vertex_count()];
            for (i, &t) in terms.iter().enumerate() {
                in_a[t] = mask >> i & 1 == 1;
            }
            if let Some(step) = scc_perturbation_improve(&current, m, &in_a)? {
                current = step.realisation().clone();
                steps.push(step);
                continue 'outer;
            }
        }
        break;
    }
    Ok((current, steps))
}
