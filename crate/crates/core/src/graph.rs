//! Simple weighted graphs with terminal and auxiliary vertices.
//!
//! Vertices are dense indices. Terminal vertices carry a label (a point of the
//! metric space being realised); auxiliary vertices do not. Graphs are simple:
//! no loops, no parallel edges, positive weights.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::rational::{int, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexRole {
    Terminal(String),
    Auxiliary,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedGraph {
    roles: Vec<VertexRole>,
    adj: Vec<BTreeMap<usize, Rat>>,
}

/// A walk `v0, .., vk` with consecutive vertices adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexPath(pub Vec<usize>);

impl VertexPath {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn start(&self) -> usize {
        self.0[0]
    }

    pub fn end(&self) -> usize {
        *self.0.last().expect("non-empty path")
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self, g: &WeightedGraph) -> Rat {
        self.edges()
            .map(|(u, v)| g.weight(u, v).expect("consecutive vertices adjacent").clone())
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn reversed(&self) -> VertexPath {
        VertexPath(self.0.iter().rev().copied().collect())
    }
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, role: VertexRole) -> usize {
        self.roles.push(role);
        self.adj.push(BTreeMap::new());
        self.roles.len() - 1
    }

    pub fn add_terminal(&mut self, label: impl Into<String>) -> usize {
        self.add_vertex(VertexRole::Terminal(label.into()))
    }

    pub fn add_auxiliary(&mut self) -> usize {
        self.add_vertex(VertexRole::Auxiliary)
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: Rat) -> Result<()> {
        let n = self.vertex_count();
        if u >= n || v >= n {
            return Err(Error::InvalidEdge(u, v, "no such vertex".into()));
        }
        if u == v {
            return Err(Error::InvalidEdge(u, v, "self-loop".into()));
        }
        if self.adj[u].contains_key(&v) {
            return Err(Error::InvalidEdge(u, v, "parallel edge".into()));
        }
        if !w.is_positive() {
            return Err(Error::InvalidEdge(u, v, format!("non-positive weight {w}")));
        }
        self.adj[u].insert(v, w.clone());
        self.adj[v].insert(u, w);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Option<Rat> {
        self.adj[v].remove(&u);
        self.adj[u].remove(&v)
    }

    pub fn set_weight(&mut self, u: usize, v: usize, w: Rat) {
        debug_assert!(self.has_edge(u, v));
        self.adj[u].insert(v, w.clone());
        self.adj[v].insert(u, w);
    }

    pub fn vertex_count(&self) -> usize {
        self.roles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn role(&self, v: usize) -> &VertexRole {
        &self.roles[v]
    }

    pub fn roles(&self) -> &[VertexRole] {
        &self.roles
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        matches!(self.roles[v], VertexRole::Terminal(_))
    }

    pub fn terminal_label(&self, v: usize) -> Option<&str> {
        match &self.roles[v] {
            VertexRole::Terminal(l) => Some(l),
            VertexRole::Auxiliary => None,
        }
    }

    pub fn terminal_index(&self, label: &str) -> Option<usize> {
        self.roles
            .iter()
            .position(|r| matches!(r, VertexRole::Terminal(l) if l == label))
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.is_terminal(v)).collect()
    }

    pub fn auxiliary_count(&self) -> usize {
        self.vertex_count() - self.terminals().len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, &Rat)> + '_ {
        self.adj[v].iter().map(|(&u, w)| (u, w))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains_key(&v)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<&Rat> {
        self.adj[u].get(&v)
    }

    /// Edges as `(u, v, w)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, Rat)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for (&v, w) in nbrs {
                if u < v {
                    out.push((u, v, w.clone()));
                }
            }
        }
        out
    }

    pub fn total_length(&self) -> Rat {
        self.edges().into_iter().fold(Rat::zero(), |acc, (_, _, w)| acc + w)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in self.adj[v].keys() {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Keeps the marked vertices (order preserved); returns the old-to-new map.
    pub fn retain_vertices(&self, keep: &[bool]) -> (WeightedGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.vertex_count()];
        let mut out = WeightedGraph::new();
        for v in 0..self.vertex_count() {
            if keep[v] {
                map[v] = Some(out.add_vertex(self.roles[v].clone()));
            }
        }
        for (u, v, w) in self.edges() {
            if let (Some(a), Some(b)) = (map[u], map[v]) {
                out.adj[a].insert(b, w.clone());
                out.adj[b].insert(a, w);
            }
        }
        (out, map)
    }

    /// Triangles `(a, b, c)` with `a < b < c`.
    pub fn triangles(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.vertex_count() {
            for &b in self.adj[a].keys().filter(|&&b| b > a) {
                for &c in self.adj[b].keys().filter(|&&c| c > b) {
                    if self.adj[a].contains_key(&c) {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// Graphviz rendering; terminals are boxed, edges labelled by weight.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {name} {{");
        for (v, role) in self.roles.iter().enumerate() {
            match role {
                VertexRole::Terminal(l) => {
                    let _ = writeln!(out, "  v{v} [label=\"{l}\", shape=box];");
                }
                VertexRole::Auxiliary => {
                    let _ = writeln!(out, "  v{v} [label=\"\", shape=circle, width=0.15];");
                }
            }
        }
        for (u, v, w) in self.edges() {
            let _ = writeln!(out, "  v{u} -- v{v} [label=\"{w}\"];");
        }
        out.push_str("}\n");
        out
    }
}

pub type DistanceMatrix = Vec<Vec<Rat>>;

/// Shortest-path distances between all vertex pairs (Floyd–Warshall).
pub fn all_pairs_distance(g: &WeightedGraph) -> Result<DistanceMatrix> {
    let n = g.vertex_count();
    let mut d: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
    for v in 0..n {
        d[v][v] = Some(Rat::zero());
        for (u, w) in g.neighbors(v) {
            d[v][u] = Some(w.clone());
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k].clone() else { continue };
            for j in 0..n {
                if let Some(dkj) = &d[k][j] {
                    let via = &dik + dkj;
                    match &d[i][j] {
                        Some(cur) if *cur <= via => {}
                        _ => d[i][j] = Some(via),
                    }
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| x.ok_or(Error::Disconnected)).collect())
        .collect()
}

/// Number of shortest paths between every ordered vertex pair.
pub fn shortest_path_counts(g: &WeightedGraph, dist: &DistanceMatrix) -> Vec<Vec<u128>> {
    let n = g.vertex_count();
    let mut counts = vec![vec![0u128; n]; n];
    for s in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[s][a].cmp(&dist[s][b]));
        counts[s][s] = 1;
        for &v in order.iter().skip(1) {
            let mut c = 0u128;
            for (u, w) in g.neighbors(v) {
                if &dist[s][u] + w == dist[s][v] {
                    c += counts[s][u];
                }
            }
            counts[s][v] = c;
        }
    }
    counts
}

/// All shortest paths from `a` to `b`, in lexicographic order of vertex sequences.
pub fn shortest_paths_between(
    g: &WeightedGraph,
    dist: &DistanceMatrix,
    a: usize,
    b: usize,
) -> Vec<VertexPath> {
    let mut out = Vec::new();
    let mut stack = vec![a];
    fn walk(
        g: &WeightedGraph,
        dist: &DistanceMatrix,
        a: usize,
        b: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<VertexPath>,
    ) {
        let v = *stack.last().unwrap();
        if v == b {
            out.push(VertexPath(stack.clone()));
            return;
        }
        for (u, w) in g.neighbors(v) {
            if &dist[a][v] + w == dist[a][u] && &dist[a][u] + &dist[u][b] == dist[a][b] {
                stack.push(u);
                walk(g, dist, a, b, stack, out);
                stack.pop();
            }
        }
    }
    walk(g, dist, a, b, &mut stack, &mut out);
    out
}

/// The set `Γ(G, w; A)`: every shortest path between two distinct vertices of
/// `subset`, stored once, starting at the smaller vertex index.
pub fn enumerate_shortest_paths(g: &WeightedGraph, subset: &[usize]) -> Result<Vec<VertexPath>> {
    let dist = all_pairs_distance(g)?;
    Ok(shortest_paths_in(g, &dist, subset))
}

pub fn shortest_paths_in(g: &WeightedGraph, dist: &DistanceMatrix, subset: &[usize]) -> Vec<VertexPath> {
    let mut verts: Vec<usize> = subset.to_vec();
    verts.sort_unstable();
    verts.dedup();
    let mut out = Vec::new();
    for (i, &a) in verts.iter().enumerate() {
        for &b in &verts[i + 1..] {
            out.extend(shortest_paths_between(g, dist, a, b));
        }
    }
    out
}

/// `|Γ(G, w; terminals)|` without materialising the paths.
pub fn count_terminal_geodesics(g: &WeightedGraph) -> Result<u128> {
    let dist = all_pairs_distance(g)?;
    let counts = shortest_path_counts(g, &dist);
    let t = g.terminals();
    let mut total = 0u128;
    for (i, &a) in t.iter().enumerate() {
        for &b in &t[i + 1..] {
            total += counts[a][b];
        }
    }
    Ok(total)
}

/// Suppresses degree-two vertices outside `keep`.
///
/// The graph is cut into threads: maximal paths whose inner vertices all have
/// degree two and lie outside `keep`. A thread is replaced by a single edge of
/// the summed weight when no other thread or edge joins the same endpoints.
/// Otherwise the replacement would not be simple, and the thread is reduced to
/// one inner vertex (lowest index) halfway along it; a thread closing on its
/// own endpoint keeps two inner vertices at thirds. The result depends only on
/// the isomorphism type of `(g, keep)`.
pub fn suppress_degree_two(g: &WeightedGraph, keep: &[usize]) -> WeightedGraph {
    suppress_degree_two_with_map(g, keep).0
}

pub fn suppress_degree_two_with_map(g: &WeightedGraph, keep: &[usize]) -> (WeightedGraph, Vec<Option<usize>>) {
    let n = g.vertex_count();
    let mut kept = vec![false; n];
    for &v in keep {
        kept[v] = true;
    }
    let inner = |v: usize| !kept[v] && g.degree(v) == 2;

    struct Thread {
        ends: (usize, usize),
        inner: Vec<usize>,
        length: Rat,
    }
    let mut seen = vec![false; n];
    let mut threads: Vec<Thread> = Vec::new();
    let mut cycle: Option<Thread> = None;
    for s in 0..n {
        if seen[s] || !inner(s) {
            continue;
        }
        // Walk both ways from s until leaving the inner vertices.
        let nbrs: Vec<(usize, Rat)> = g.neighbors(s).map(|(u, w)| (u, w.clone())).collect();
        let mut sides: Vec<(Vec<usize>, usize, Rat)> = Vec::new();
        let mut closed = false;
        for (first, w0) in &nbrs {
            let mut prev = s;
            let mut cur = *first;
            let mut len = w0.clone();
            let mut trail = Vec::new();
            while inner(cur) {
                if cur == s {
                    closed = true;
                    break;
                }
                trail.push(cur);
                let (next, w) = g
                    .neighbors(cur)
                    .find(|&(u, _)| u != prev)
                    .map(|(u, w)| (u, w.clone()))
                    .expect("degree two");
                prev = cur;
                cur = next;
                len += w;
            }
            if closed {
                let mut verts = vec![s];
                verts.extend(trail);
                for &v in &verts {
                    seen[v] = true;
                }
                cycle = Some(Thread { ends: (s, s), inner: verts, length: len });
                break;
            }
            sides.push((trail, cur, len));
        }
        if closed {
            continue;
        }
        let (left, p, lw) = sides.remove(0);
        let (right, q, rw) = sides.remove(0);
        let mut verts: Vec<usize> = left.into_iter().rev().collect();
        verts.push(s);
        verts.extend(right);
        for &v in &verts {
            seen[v] = true;
        }
        threads.push(Thread { ends: (p.min(q), p.max(q)), inner: verts, length: lw + rw });
    }

    let mut group: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &threads {
        *group.entry(t.ends).or_default() += 1;
    }

    let mut keep_vertex = vec![true; n];
    for t in threads.iter().chain(cycle.iter()) {
        for &v in &t.inner {
            keep_vertex[v] = false;
        }
    }
    // New edges: (u, v, w) in old indices.
    let mut new_edges: Vec<(usize, usize, Rat)> = Vec::new();
    for t in &threads {
        let (p, q) = t.ends;
        if p != q && group[&t.ends] == 1 && !g.has_edge(p, q) {
            new_edges.push((p, q, t.length.clone()));
        } else if p != q {
            let m = *t.inner.iter().min().unwrap();
            keep_vertex[m] = true;
            let h = &t.length / int(2);
            new_edges.push((p, m, h.clone()));
            new_edges.push((m, q, h));
        } else {
            let mut two: Vec<usize> = t.inner.clone();
            two.sort_unstable();
            let (a, b) = (two[0], two[1]);
            keep_vertex[a] = true;
            keep_vertex[b] = true;
            let third = &t.length / int(3);
            new_edges.push((p, a, third.clone()));
            new_edges.push((a, b, third.clone()));
            new_edges.push((b, p, third));
        }
    }
    if let Some(c) = &cycle {
        let mut three = c.inner.clone();
        three.sort_unstable();
        if three.len() >= 3 {
            let third = &c.length / int(3);
            for &v in &three[..3] {
                keep_vertex[v] = true;
            }
            new_edges.push((three[0], three[1], third.clone()));
            new_edges.push((three[1], three[2], third.clone()));
            new_edges.push((three[2], three[0], third));
        } else {
            for &v in &c.inner {
                keep_vertex[v] = true;
            }
        }
    }

    let threaded: BTreeSet<usize> = threads
        .iter()
        .chain(cycle.iter())
        .flat_map(|t| t.inner.iter().copied())
        .collect();
    let mut map = vec![None; n];
    let mut out = WeightedGraph::new();
    for v in 0..n {
        if keep_vertex[v] {
            map[v] = Some(out.add_vertex(g.roles[v].clone()));
        }
    }
    let cycle_intact = cycle.as_ref().is_some_and(|c| c.inner.len() < 3);
    for (u, v, w) in g.edges() {
        let touches = threaded.contains(&u) || threaded.contains(&v);
        if !touches || cycle_intact {
            let (a, b) = (map[u].unwrap(), map[v].unwrap());
            out.adj[a].insert(b, w.clone());
            out.adj[b].insert(a, w);
        }
    }
    for (u, v, w) in new_edges {
        let (a, b) = (map[u].unwrap(), map[v].unwrap());
        out.adj[a].insert(b, w.clone());
        out.adj[b].insert(a, w);
    }
    (out, map)
}

fn vertex_invariant(g: &WeightedGraph, v: usize) -> (VertexRole, usize, Vec<Rat>) {
    let mut ws: Vec<Rat> = g.neighbors(v).map(|(_, w)| w.clone()).collect();
    ws.sort();
    (g.roles[v].clone(), g.degree(v), ws)
}

/// A bijection `V(g1) -> V(g2)` preserving adjacency, weights and terminal
/// labels, if one exists. Backtracking with invariant pruning.
pub fn weighted_isomorphic(g1: &WeightedGraph, g2: &WeightedGraph) -> Option<Vec<usize>> {
    let n = g1.vertex_count();
    if n != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    let mut w1: Vec<Rat> = g1.edges().into_iter().map(|e| e.2).collect();
    let mut w2: Vec<Rat> = g2.edges().into_iter().map(|e| e.2).collect();
    w1.sort();
    w2.sort();
    if w1 != w2 {
        return None;
    }
    let inv1: Vec<_> = (0..n).map(|v| vertex_invariant(g1, v)).collect();
    let inv2: Vec<_> = (0..n).map(|v| vertex_invariant(g2, v)).collect();
    let mut s1 = inv1.clone();
    let mut s2 = inv2.clone();
    s1.sort();
    s2.sort();
    if s1 != s2 {
        return None;
    }
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|v| (0..n).filter(|&u| inv2[u] == inv1[v]).collect())
        .collect();
    // Fewest candidates first, then prefer vertices adjacent to earlier ones.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| {
                let linked = order.iter().any(|&u| g1.has_edge(u, v));
                (candidates[v].len(), !linked, v)
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        k: usize,
        order: &[usize],
        candidates: &[Vec<usize>],
        g1: &WeightedGraph,
        g2: &WeightedGraph,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        for &u in &candidates[v] {
            if used[u] {
                continue;
            }
            let consistent = order[..k].iter().all(|&x| g1.weight(v, x) == g2.weight(u, map[x]));
            if !consistent {
                continue;
            }
            map[v] = u;
            used[u] = true;
            if extend(k + 1, order, candidates, g1, g2, map, used) {
                return true;
            }
            used[u] = false;
        }
        map[v] = usize::MAX;
        false
    }
    extend(0, &order, &candidates, g1, g2, &mut map, &mut used).then_some(map)
}

/// Equal after suppressing all auxiliary degree-two vertices on both sides.
pub fn homeomorphic(g1: &WeightedGraph, g2: &WeightedGraph) -> bool {
    let s1 = suppress_degree_two(g1, &g1.terminals());
    let s2 = suppress_degree_two(g2, &g2.terminals());
    weighted_isomorphic(&s1, &s2).is_some()
}

/// Relabelled copy of `g` that is identical for isomorphic inputs: terminals
/// sorted by label, auxiliaries in the order minimising the edge list.
pub fn canonical_form(g: &WeightedGraph) -> WeightedGraph {
    let mut terms: Vec<usize> = g.terminals();
    terms.sort_by(|&a, &b| g.terminal_label(a).cmp(&g.terminal_label(b)));
    let aux: Vec<usize> = (0..g.vertex_count()).filter(|&v| !g.is_terminal(v)).collect();
    // Partition auxiliaries by a relabelling-invariant signature.
    let term_pos: HashMap<usize, usize> = terms.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let signature = |v: usize| {
        let mut ws: Vec<Rat> = g.neighbors(v).map(|(_, w)| w.clone()).collect();
        ws.sort();
        let mut tn: Vec<(usize, Rat)> = g
            .neighbors(v)
            .filter_map(|(u, w)| term_pos.get(&u).map(|&p| (p, w.clone())))
            .collect();
        tn.sort();
        (g.degree(v), ws, tn)
    };
    let mut classes: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for &v in &aux {
        classes.entry(signature(v)).or_default().push(v);
    }
    let classes: Vec<Vec<usize>> = classes.into_values().collect();

    let mut best: Option<(Vec<(usize, usize, Rat)>, Vec<usize>)> = None;
    let mut current: Vec<usize> = terms.clone();
    fn encode(g: &WeightedGraph, order: &[usize]) -> Vec<(usize, usize, Rat)> {
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut e: Vec<(usize, usize, Rat)> = g
            .edges()
            .into_iter()
            .map(|(u, v, w)| {
                let (a, b) = (pos[&u], pos[&v]);
                (a.min(b), a.max(b), w)
            })
            .collect();
        e.sort();
        e
    }
    fn permute_classes(
        g: &WeightedGraph,
        classes: &[Vec<usize>],
        ci: usize,
        current: &mut Vec<usize>,
        remaining: &mut Vec<usize>,
        best: &mut Option<(Vec<(usize, usize, Rat)>, Vec<usize>)>,
    ) {
        if ci == classes.len() {
            let code = encode(g, current);
            if best.as_ref().map_or(true, |(b, _)| code < *b) {
                *best = Some((code, current.clone()));
            }
            return;
        }
        if remaining.is_empty() {
            if ci + 1 <= classes.len() {
                let mut next = classes.get(ci + 1).cloned().unwrap_or_default();
                permute_classes(g, classes, ci + 1, current, &mut next, best);
            }
            return;
        }
        for i in 0..remaining.len() {
            let v = remaining.remove(i);
            current.push(v);
            permute_classes(g, classes, ci, current, remaining, best);
            current.pop();
            remaining.insert(i, v);
        }
    }
    let mut first = classes.first().cloned().unwrap_or_default();
    if classes.is_empty() {
        best = Some((encode(g, &current), current.clone()));
    } else {
        permute_classes(g, &classes, 0, &mut current, &mut first, &mut best);
    }
    let order = best.expect("at least one ordering").1;
    let mut keep_map = vec![0usize; g.vertex_count()];
    for (i, &v) in order.iter().enumerate() {
        keep_map[v] = i;
    }
    let mut out = WeightedGraph::new();
    for &v in &order {
        out.add_vertex(g.roles[v].clone());
    }
    for (u, v, w) in g.edges() {
        let (a, b) = (keep_map[u], keep_map[v]);
        out.adj[a].insert(b, w.clone());
        out.adj[b].insert(a, w);
    }
    out
}

/// Total-order key for deterministic tie-breaking among isomorphism classes.
pub fn canonical_key(g: &WeightedGraph) -> (Vec<VertexRole>, Vec<(usize, usize, Rat)>) {
    let c = canonical_form(g);
    (c.roles.clone(), c.edges())
}

/// Whether the graph distances between the metric's points reproduce it.
pub fn is_realisation(g: &WeightedGraph, m: &FiniteMetric) -> bool {
    let Some(idx) = metric_terminals(g, m) else { return false };
    let Ok(dist) = all_pairs_distance(g) else { return false };
    for i in 0..m.len() {
        for j in (i + 1)..m.len() {
            if dist[idx[i]][idx[j]] != *m.d(i, j) {
                return false;
            }
        }
    }
    true
}

/// Vertex index of every metric point, if all are present as terminals.
pub fn metric_terminals(g: &WeightedGraph, m: &FiniteMetric) -> Option<Vec<usize>> {
    m.labels().iter().map(|l| g.terminal_index(l)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OptimalityReport {
    /// Every edge lies on all shortest paths between some terminal pair.
    pub edges_essential: bool,
    /// Every two edges sharing a vertex lie on a common shortest terminal path.
    pub adjacent_pairs_geodesic: bool,
    pub triangle_free: bool,
    pub inessential_edges: Vec<(usize, usize)>,
    /// `(a, v, b)`: the edges `{a,v}` and `{v,b}` share no shortest terminal path.
    pub uncovered_corners: Vec<(usize, usize, usize)>,
    pub triangles: Vec<(usize, usize, usize)>,
}

impl OptimalityReport {
    pub fn all_hold(&self) -> bool {
        self.edges_essential && self.adjacent_pairs_geodesic && self.triangle_free
    }
}

/// Necessary conditions for optimality; a false flag proves `g` non-optimal.
pub fn check_optimality_necessary(g: &WeightedGraph, m: &FiniteMetric) -> Result<OptimalityReport> {
    let terms = metric_terminals(g, m).ok_or(Error::NotARealisation)?;
    let dist = all_pairs_distance(g)?;
    let counts = shortest_path_counts(g, &dist);
    let on_geodesic = |x: usize, y: usize, a: usize, b: usize, w: &Rat| &dist[x][a] + w + &dist[b][y] == dist[x][y];

    let mut report = OptimalityReport::default();
    for (u, v, w) in g.edges() {
        let essential = terms.iter().enumerate().any(|(i, &x)| {
            terms[i + 1..].iter().any(|&y| {
                let mut through = 0u128;
                if on_geodesic(x, y, u, v, &w) {
                    through += counts[x][u] * counts[v][y];
                }
                if on_geodesic(x, y, v, u, &w) {
                    through += counts[x][v] * counts[u][y];
                }
                through == counts[x][y]
            })
        });
        if !essential {
            report.inessential_edges.push((u, v));
        }
    }
    for v in 0..g.vertex_count() {
        let nbrs: Vec<(usize, Rat)> = g.neighbors(v).map(|(u, w)| (u, w.clone())).collect();
        for (i, (a, wa)) in nbrs.iter().enumerate() {
            for (b, wb) in &nbrs[i + 1..] {
                let corner = wa + wb;
                let covered = terms.iter().any(|&x| {
                    terms.iter().any(|&y| {
                        x != y && &dist[x][*a] + &corner + &dist[*b][y] == dist[x][y]
                    })
                });
                if !covered {
                    report.uncovered_corners.push((*a, v, *b));
                }
            }
        }
    }
    report.triangles = g.triangles();
    report.edges_essential = report.inessential_edges.is_empty();
    report.adjacent_pairs_geodesic = report.uncovered_corners.is_empty();
    report.triangle_free = report.triangles.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;
    use crate::rational::frac;

    pub(crate) fn cycle(n: usize, weights: &[i64]) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for i in 1..=n {
            g.add_terminal(i.to_string());
        }
        for i in 0..n {
            g.add_edge(i, (i + 1) % n, int(weights[i])).unwrap();
        }
        g
    }

    fn square_metric() -> FiniteMetric {
        let rows = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]];
        validate_metric(
            rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
            (1..=4).map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    /// Every simple path between `a` and `b`, by exhaustive DFS.
    fn all_simple_paths(g: &WeightedGraph, a: usize, b: usize) -> Vec<Vec<usize>> {
        fn go(g: &WeightedGraph, b: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            let v = *path.last().unwrap();
            if v == b {
                out.push(path.clone());
                return;
            }
            for (u, _) in g.neighbors(v) {
                if !path.contains(&u) {
                    path.push(u);
                    go(g, b, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(g, b, &mut vec![a], &mut out);
        out
    }

    #[test]
    fn four_cycle_distances_match_brute_force() {
        let g = cycle(4, &[1, 1, 1, 1]);
        let d = all_pairs_distance(&g).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let brute = all_simple_paths(&g, a, b)
                    .into_iter()
                    .map(|p| VertexPath(p).length(&g))
                    .min()
                    .unwrap();
                assert_eq!(d[a][b], brute);
            }
        }
        assert_eq!(d[0][2], int(2));
        assert_eq!(d[0][1], int(1));
    }

    #[test]
    fn star_and_edge_distances() {
        let mut g = WeightedGraph::new();
        let c = g.add_auxiliary();
        let leaves: Vec<usize> = (1..=3).map(|i| g.add_terminal(format!("l{i}"))).collect();
        for (i, &l) in leaves.iter().enumerate() {
            g.add_edge(c, l, int(i as i64 + 1)).unwrap();
        }
        assert_eq!(all_pairs_distance(&g).unwrap()[leaves[0]][leaves[2]], int(4));

        let mut e = WeightedGraph::new();
        e.add_terminal("x");
        e.add_terminal("y");
        e.add_edge(0, 1, int(3)).unwrap();
        assert_eq!(all_pairs_distance(&e).unwrap()[0][1], int(3));
    }

    #[test]
    fn disconnected_is_an_error() {
        let mut g = WeightedGraph::new();
        g.add_terminal("x");
        g.add_terminal("y");
        assert_eq!(all_pairs_distance(&g).unwrap_err(), Error::Disconnected);
    }

    #[test]
    fn rejects_loops_parallel_and_nonpositive() {
        let mut g = WeightedGraph::new();
        g.add_terminal("x");
        g.add_terminal("y");
        assert!(g.add_edge(0, 0, int(1)).is_err());
        assert!(g.add_edge(0, 1, int(0)).is_err());
        g.add_edge(0, 1, int(1)).unwrap();
        assert!(g.add_edge(1, 0, int(2)).is_err());
    }

    #[test]
    fn gamma_of_four_cycle() {
        let g = cycle(4, &[1, 1, 1, 1]);
        let paths = enumerate_shortest_paths(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(paths.len(), 8);
        assert!(paths.iter().all(|p| p.start() < p.end()));
        assert_eq!(count_terminal_geodesics(&g).unwrap(), 8);
    }

    #[test]
    fn gamma_small_cases() {
        let mut e = WeightedGraph::new();
        e.add_terminal("x");
        e.add_terminal("y");
        e.add_edge(0, 1, int(3)).unwrap();
        assert_eq!(enumerate_shortest_paths(&e, &[0, 1]).unwrap(), vec![VertexPath(vec![0, 1])]);

        let mut p = WeightedGraph::new();
        let x = p.add_terminal("x");
        let m = p.add_auxiliary();
        let y = p.add_terminal("y");
        p.add_edge(x, m, int(1)).unwrap();
        p.add_edge(m, y, int(1)).unwrap();
        assert_eq!(enumerate_shortest_paths(&p, &[x, y]).unwrap(), vec![VertexPath(vec![x, m, y])]);
    }

    #[test]
    fn suppression_examples() {
        let mut p = WeightedGraph::new();
        let x = p.add_terminal("x");
        let a = p.add_auxiliary();
        let y = p.add_terminal("y");
        p.add_edge(x, a, int(1)).unwrap();
        p.add_edge(a, y, int(2)).unwrap();
        let s = suppress_degree_two(&p, &[x, y]);
        assert_eq!(s.vertex_count(), 2);
        assert_eq!(s.weight(0, 1), Some(&int(3)));

        let c4 = cycle(4, &[1, 1, 1, 1]);
        assert_eq!(suppress_degree_two(&c4, &[0, 1, 2, 3]), c4);

        // x - a - y - b - x: two parallel candidates, nothing changes.
        let mut g = WeightedGraph::new();
        let x = g.add_terminal("x");
        let a = g.add_auxiliary();
        let y = g.add_terminal("y");
        let b = g.add_auxiliary();
        for (u, v) in [(x, a), (a, y), (y, b), (b, x)] {
            g.add_edge(u, v, int(1)).unwrap();
        }
        assert_eq!(suppress_degree_two(&g, &[x, y]), g);
    }

    #[test]
    fn suppression_is_order_independent() {
        // Parallel threads with unequal weight splits.
        let build = |first_ab: bool| {
            let mut g = WeightedGraph::new();
            let x = g.add_terminal("x");
            let y = g.add_terminal("y");
            let a = g.add_auxiliary();
            let b = g.add_auxiliary();
            let (p, q) = if first_ab { (a, b) } else { (b, a) };
            g.add_edge(x, p, int(1)).unwrap();
            g.add_edge(p, y, int(2)).unwrap();
            g.add_edge(x, q, int(1)).unwrap();
            g.add_edge(q, y, int(1)).unwrap();
            g
        };
        let s1 = suppress_degree_two(&build(true), &[0, 1]);
        let s2 = suppress_degree_two(&build(false), &[0, 1]);
        assert!(weighted_isomorphic(&s1, &s2).is_some());
        assert_eq!(s1.total_length(), int(5));
    }

    #[test]
    fn suppression_preserves_kept_distances() {
        let mut g = cycle(4, &[1, 2, 1, 2]);
        let a = g.add_auxiliary();
        let b = g.add_auxiliary();
        g.remove_edge(0, 1);
        g.add_edge(0, a, frac(1, 2)).unwrap();
        g.add_edge(a, b, frac(1, 4)).unwrap();
        g.add_edge(b, 1, frac(1, 4)).unwrap();
        let (s, map) = suppress_degree_two_with_map(&g, &[0, 1, 2, 3]);
        assert_eq!(s.vertex_count(), 4);
        let d0 = all_pairs_distance(&g).unwrap();
        let d1 = all_pairs_distance(&s).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(d0[u][v], d1[map[u].unwrap()][map[v].unwrap()]);
            }
        }
    }

    #[test]
    fn isomorphism_examples() {
        let c1 = cycle(4, &[1, 1, 1, 1]);
        let c2 = cycle(4, &[1, 1, 1, 1]);
        assert_eq!(weighted_isomorphic(&c1, &c2), Some(vec![0, 1, 2, 3]));

        let mut path = WeightedGraph::new();
        for i in 1..=4 {
            path.add_terminal(i.to_string());
        }
        for i in 0..3 {
            path.add_edge(i, i + 1, int(1)).unwrap();
        }
        assert!(weighted_isomorphic(&c1, &path).is_none());
        assert!(weighted_isomorphic(&c1, &cycle(4, &[1, 1, 1, 2])).is_none());
    }

    #[test]
    fn isomorphism_maps_auxiliaries() {
        let mut g1 = WeightedGraph::new();
        let x = g1.add_terminal("x");
        let y = g1.add_terminal("y");
        let z = g1.add_terminal("z");
        let c = g1.add_auxiliary();
        g1.add_edge(x, c, int(1)).unwrap();
        g1.add_edge(y, c, int(2)).unwrap();
        g1.add_edge(z, c, int(3)).unwrap();
        let mut g2 = WeightedGraph::new();
        let c2 = g2.add_auxiliary();
        let z2 = g2.add_terminal("z");
        let x2 = g2.add_terminal("x");
        let y2 = g2.add_terminal("y");
        g2.add_edge(c2, z2, int(3)).unwrap();
        g2.add_edge(c2, x2, int(1)).unwrap();
        g2.add_edge(c2, y2, int(2)).unwrap();
        let map = weighted_isomorphic(&g1, &g2).unwrap();
        assert_eq!(map, vec![x2, y2, z2, c2]);
        assert_eq!(canonical_form(&g1), canonical_form(&g2));
    }

    #[test]
    fn homeomorphism_examples() {
        let mut e = WeightedGraph::new();
        e.add_terminal("x");
        e.add_terminal("y");
        e.add_edge(0, 1, int(3)).unwrap();
        let mut p = WeightedGraph::new();
        let x = p.add_terminal("x");
        let a = p.add_auxiliary();
        let y = p.add_terminal("y");
        p.add_edge(x, a, int(1)).unwrap();
        p.add_edge(a, y, int(2)).unwrap();
        assert!(homeomorphic(&e, &p));

        let c4 = cycle(4, &[1, 1, 1, 1]);
        let mut sub = cycle(4, &[1, 1, 1, 1]);
        let m = sub.add_auxiliary();
        sub.remove_edge(0, 1);
        sub.add_edge(0, m, frac(1, 2)).unwrap();
        sub.add_edge(m, 1, frac(1, 2)).unwrap();
        assert!(homeomorphic(&c4, &sub));

        let mut tri = cycle(3, &[1, 1, 1]);
        let t4 = tri.add_terminal("4");
        tri.add_edge(0, t4, int(1)).unwrap();
        assert!(!homeomorphic(&c4, &tri));
        assert!(homeomorphic(&c4, &c4));
    }

    #[test]
    fn realisation_checks() {
        let sq = square_metric();
        assert!(is_realisation(&cycle(4, &[1, 1, 1, 1]), &sq));
        let mut star = WeightedGraph::new();
        let c = star.add_auxiliary();
        for i in 1..=4 {
            let t = star.add_terminal(i.to_string());
            star.add_edge(c, t, int(1)).unwrap();
        }
        assert!(!is_realisation(&star, &sq));
    }

    #[test]
    fn optimality_flags() {
        let sq = square_metric();
        let c4 = cycle(4, &[1, 1, 1, 1]);
        let r = check_optimality_necessary(&c4, &sq).unwrap();
        assert!(r.all_hold());

        let mut chord = c4.clone();
        chord.add_edge(0, 2, int(2)).unwrap();
        assert!(is_realisation(&chord, &sq));
        let r = check_optimality_necessary(&chord, &sq).unwrap();
        assert!(!r.edges_essential);
        assert_eq!(r.inessential_edges, vec![(0, 2)]);
        assert!(!r.triangle_free);
    }
}
