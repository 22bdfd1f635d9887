//! Split-flow digraphs, their strongly connected components, and split
//! potentials on realisations.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{all_pairs_distance, DistanceMatrix, WeightedGraph};
use crate::rational::Rat;

/// Arcs induced by shortest terminal paths relative to a bipartition `(A, X∖A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitFlowDigraph {
    pub arcs: BTreeSet<(usize, usize)>,
    /// Components, each sorted, ordered by smallest vertex.
    pub sccs: Vec<Vec<usize>>,
    pub component: Vec<usize>,
}

impl SplitFlowDigraph {
    pub fn scc_count(&self) -> usize {
        self.sccs.len()
    }
}

/// `in_a[v]` marks the terminal vertices on side `A`; other entries are ignored.
pub fn split_flow_digraph(g: &WeightedGraph, in_a: &[bool]) -> Result<SplitFlowDigraph> {
    let dist = all_pairs_distance(g)?;
    Ok(split_flow_with(g, &dist, in_a))
}

pub fn split_flow_with(g: &WeightedGraph, dist: &DistanceMatrix, in_a: &[bool]) -> SplitFlowDigraph {
    let terms = g.terminals();
    let edges = g.edges();
    let mut arcs = BTreeSet::new();
    for (i, &x) in terms.iter().enumerate() {
        for &y in &terms[i + 1..] {
            // Orient from the A-side endpoint when the pair is split.
            let (from, to, split) = match (in_a[x], in_a[y]) {
                (true, false) => (x, y, true),
                (false, true) => (y, x, true),
                _ => (x, y, false),
            };
            for (u, v, w) in &edges {
                let forward = &dist[from][*u] + w + &dist[*v][to] == dist[from][to];
                let backward = &dist[from][*v] + w + &dist[*u][to] == dist[from][to];
                if split {
                    if forward {
                        arcs.insert((*u, *v));
                    }
                    if backward {
                        arcs.insert((*v, *u));
                    }
                } else if forward || backward {
                    arcs.insert((*u, *v));
                    arcs.insert((*v, *u));
                }
            }
        }
    }
    let (sccs, component) = strongly_connected(g.vertex_count(), &arcs);
    SplitFlowDigraph { arcs, sccs, component }
}

/// Tarjan's algorithm, iterative.
pub fn strongly_connected(n: usize, arcs: &BTreeSet<(usize, usize)>) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in arcs {
        out[u].push(v);
    }
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < out[v].len() {
                let u = out[v][*next];
                *next += 1;
                if index[u] == usize::MAX {
                    index[u] = counter;
                    low[u] = counter;
                    counter += 1;
                    stack.push(u);
                    on_stack[u] = true;
                    call.push((u, 0));
                } else if on_stack[u] {
                    low[v] = low[v].min(index[u]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps.sort();
    let mut component = vec![0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            component[v] = c;
        }
    }
    (comps, component)
}

/// SCC counts of `D(G, w; A)` over subsets `A` of the terminals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SccReport {
    /// `(mask, count)`; bit `i` of `mask` is the `i`-th terminal in vertex order.
    pub counts: Vec<(u64, usize)>,
    /// Masks whose count lies outside `{1, 2}`.
    pub violations: Vec<u64>,
}

/// Counts SCCs for every subset of the terminals. Violations are recorded
/// only when the graph is claimed to be minimal path-saturated.
pub fn check_scc_count(g: &WeightedGraph, claimed_minimal_path_saturated: bool) -> Result<SccReport> {
    let terms = g.terminals();
    if terms.len() > 20 {
        return Err(Error::GroundSetTooLarge { size: terms.len(), bound: 20 });
    }
    let dist = all_pairs_distance(g)?;
    let mut report = SccReport::default();
    for mask in 0u64..(1u64 << terms.len()) {
        let mut in_a = vec![false; g.vertex_count()];
        for (i, &t) in terms.iter().enumerate() {
            in_a[t] = mask >> i & 1 == 1;
        }
        let count = split_flow_with(g, &dist, &in_a).scc_count();
        report.counts.push((mask, count));
        if claimed_minimal_path_saturated && !(1..=2).contains(&count) {
            report.violations.push(mask);
        }
    }
    Ok(report)
}

fn require_binary_terminals(g: &WeightedGraph, values: &[Rat]) -> Result<()> {
    for t in g.terminals() {
        let v = &values[t];
        if *v != Rat::from_integer(0.into()) && *v != Rat::from_integer(1.into()) {
            return Err(Error::TerminalValueNotBinary(g.terminal_label(t).unwrap_or_default().to_string()));
        }
    }
    Ok(())
}

/// Whether vertex values are monotone along every shortest terminal path.
///
/// A path is monotone iff each step moves in the direction fixed by its end
/// values (and not at all when they agree), so the check runs per edge of
/// each geodesic interval instead of per path.
pub fn check_split_potential(g: &WeightedGraph, values: &[Rat]) -> Result<bool> {
    require_binary_terminals(g, values)?;
    let dist = all_pairs_distance(g)?;
    let terms = g.terminals();
    let edges = g.edges();
    for (i, &x) in terms.iter().enumerate() {
        for &y in &terms[i + 1..] {
            let rising = values[x] < values[y];
            let flat = values[x] == values[y];
            for (u, v, w) in &edges {
                for (a, b) in [(*u, *v), (*v, *u)] {
                    if &dist[x][a] + w + &dist[b][y] != dist[x][y] {
                        continue;
                    }
                    let ok = if flat {
                        values[a] == values[b]
                    } else if rising {
                        values[a] <= values[b]
                    } else {
                        values[a] >= values[b]
                    };
                    if !ok {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

pub fn verify_potential_vertex_binarity(values: &[Rat]) -> bool {
    values
        .iter()
        .all(|v| *v == Rat::from_integer(0.into()) || *v == Rat::from_integer(1.into()))
}
