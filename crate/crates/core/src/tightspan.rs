//! Tight-span computations on small metrics: membership, vertices, and the
//! graph of zero- and one-dimensional faces with max-norm edge weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::buneman::{buneman_skeleton, lambda_map, vertex_point};
use crate::error::{Error, Result};
use crate::graph::{all_pairs_distance, WeightedGraph};
use crate::metric::FiniteMetric;
use crate::rational::{half, Rat};
use crate::split::{
    decompose, is_octahedral_free, is_two_compatible, is_weakly_compatible, WeightedSplitSystem,
    OCTAHEDRAL_BOUND,
};

/// Default bound on `|X|` for direct vertex enumeration.
pub const DIRECT_BOUND: usize = 10;

/// A function `X -> Q`, stored in label order.
pub type TightPoint = Vec<Rat>;

pub fn kuratowski(m: &FiniteMetric, x: usize) -> TightPoint {
    m.matrix()[x].clone()
}

/// `max_x |f(x) - g(x)|`.
pub fn d_inf(f: &[Rat], g: &[Rat]) -> Rat {
    f.iter()
        .zip(g)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rat::zero)
}

pub fn in_p(m: &FiniteMetric, f: &[Rat]) -> bool {
    let n = m.len();
    f.len() == n
        && f.iter().all(|v| !v.is_negative())
        && (0..n).all(|x| (x + 1..n).all(|y| &f[x] + &f[y] >= *m.d(x, y)))
}

/// `f ∈ P(d)` and `f(x) = max_y (d(x,y) - f(y))` for every `x`.
pub fn is_tight_point(m: &FiniteMetric, f: &[Rat]) -> bool {
    in_p(m, f)
        && (0..m.len()).all(|x| {
            let best = (0..m.len()).map(|y| m.d(x, y) - &f[y]).max().expect("nonempty");
            best == f[x]
        })
}

/// Vertices of `T(d)`, sorted.
///
/// Every vertex is fixed by choosing, for each point, one tight partner
/// (itself when its value is zero) such that every cycle of the resulting
/// functional graph is odd. The search assigns partners point by point and
/// evaluates values as soon as a cycle closes.
pub fn tight_span_vertices(m: &FiniteMetric) -> Result<Vec<TightPoint>> {
    tight_span_vertices_bounded(m, DIRECT_BOUND)
}

pub fn tight_span_vertices_bounded(m: &FiniteMetric, bound: usize) -> Result<Vec<TightPoint>> {
    let n = m.len();
    if n > bound {
        return Err(Error::GroundSetTooLarge { size: n, bound });
    }
    let mut found = BTreeSet::new();
    let mut partner = vec![usize::MAX; n];
    let vals = vec![None; n];
    search(m, 0, &mut partner, vals, &mut found);
    Ok(found.into_iter().filter(|f| is_tight_point(m, f)).collect())
}

fn search(
    m: &FiniteMetric,
    x: usize,
    partner: &mut Vec<usize>,
    vals: Vec<Option<Rat>>,
    found: &mut BTreeSet<TightPoint>,
) {
    let n = m.len();
    if x == n {
        if let Some(f) = vals.into_iter().collect::<Option<Vec<Rat>>>() {
            found.insert(f);
        }
        return;
    }
    for y in 0..n {
        partner[x] = y;
        let mut next = vals.clone();
        if settle(m, x, partner, &mut next) {
            search(m, x + 1, partner, next, found);
        }
    }
    partner[x] = usize::MAX;
}

/// Updates values after assigning `partner[x]`; false if the branch is dead.
fn settle(m: &FiniteMetric, x: usize, partner: &[usize], vals: &mut [Option<Rat>]) -> bool {
    let y = partner[x];
    let mut fresh = Vec::new();
    if x == y {
        vals[x] = Some(Rat::zero());
        fresh.push(x);
    } else if let Some(vy) = vals[y].clone() {
        vals[x] = Some(m.d(x, y) - vy);
        fresh.push(x);
    } else {
        // Follow the chain from y; a return to x closes a cycle.
        let mut cycle = vec![x];
        let mut cur = y;
        while cur != x {
            if partner[cur] == usize::MAX || vals[cur].is_some() {
                return true;
            }
            cycle.push(cur);
            cur = partner[cur];
        }
        if cycle.len() % 2 == 0 {
            return false;
        }
        // Alternating sum around the odd cycle gives 2 f(x).
        let mut acc = Rat::zero();
        for (i, &c) in cycle.iter().enumerate() {
            let d = m.d(c, partner[c]).clone();
            if i % 2 == 0 {
                acc += d;
            } else {
                acc -= d;
            }
        }
        vals[x] = Some(acc * half());
        fresh.push(x);
        for &c in cycle.iter().skip(1).rev() {
            let vp = vals[partner[c]].clone().expect("set along the cycle");
            vals[c] = Some(m.d(c, partner[c]) - vp);
            fresh.push(c);
        }
    }
    // Anything already pointing at a freshly valued point gets valued too.
    let mut i = 0;
    while i < fresh.len() {
        let v = fresh[i];
        for z in 0..partner.len() {
            if partner[z] == v && vals[z].is_none() {
                vals[z] = Some(m.d(z, v) - vals[v].clone().expect("fresh"));
                fresh.push(z);
            }
        }
        i += 1;
    }
    fresh.iter().all(|&v| {
        let fv = vals[v].as_ref().expect("fresh");
        !fv.is_negative()
            && (0..vals.len()).all(|u| match &vals[u] {
                Some(fu) if u != v => fu + fv >= *m.d(u, v),
                _ => true,
            })
    })
}

/// Vertices and edges of `T(d)`, weights `d∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightSpanGraph {
    /// Sorted.
    pub vertices: Vec<TightPoint>,
    /// `(i, j, d∞)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize, Rat)>,
}

impl TightSpanGraph {
    fn from_parts(vertices: Vec<TightPoint>, pairs: Vec<(usize, usize)>) -> Self {
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| vertices[a].cmp(&vertices[b]));
        let mut pos = vec![0; vertices.len()];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let mut edges: Vec<(usize, usize, Rat)> = pairs
            .into_iter()
            .map(|(a, b)| {
                let w = d_inf(&vertices[a], &vertices[b]);
                (pos[a].min(pos[b]), pos[a].max(pos[b]), w)
            })
            .collect();
        edges.sort();
        edges.dedup();
        let vertices = order.into_iter().map(|i| vertices[i].clone()).collect();
        TightSpanGraph { vertices, edges }
    }

    pub fn index_of(&self, f: &[Rat]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(f)).ok()
    }

    /// As a weighted graph: `κ(x)` becomes terminal `x`, all else auxiliary.
    pub fn to_weighted_graph(&self, m: &FiniteMetric) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for f in &self.vertices {
            match (0..m.len()).find(|&x| m.matrix()[x] == *f) {
                Some(x) => g.add_terminal(m.label(x)),
                None => g.add_auxiliary(),
            };
        }
        for (a, b, w) in &self.edges {
            g.add_edge(*a, *b, w.clone()).expect("edges are simple with positive weights");
        }
        g
    }

    pub fn to_dot(&self, m: &FiniteMetric) -> String {
        let mut out = String::from("graph tightspan {\n");
        for (v, f) in self.vertices.iter().enumerate() {
            let coords: Vec<String> = f.iter().map(ToString::to_string).collect();
            match (0..m.len()).find(|&x| m.matrix()[x] == *f) {
                Some(x) => {
                    let _ = writeln!(out, "  t{v} [label=\"{}\", shape=box];", m.label(x));
                }
                None => {
                    let _ = writeln!(out, "  t{v} [label=\"({})\"];", coords.join(","));
                }
            }
        }
        for (a, b, w) in &self.edges {
            let _ = writeln!(out, "  t{a} -- t{b} [label=\"{w}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// Number of bipartite components of the graph on `0..n` with the given
/// edges (a loop makes its component non-bipartite).
fn bipartite_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        if a != b {
            adj[b].push(a);
        }
    }
    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut count = 0;
    for s in 0..n {
        if colour[s].is_some() {
            continue;
        }
        colour[s] = Some(false);
        let mut stack = vec![s];
        let mut bipartite = true;
        while let Some(v) = stack.pop() {
            let c = colour[v].expect("coloured");
            for &u in &adj[v] {
                match colour[u] {
                    None => {
                        colour[u] = Some(!c);
                        stack.push(u);
                    }
                    Some(cu) if cu == c => bipartite = false,
                    _ => {}
                }
            }
        }
        if bipartite {
            count += 1;
        }
    }
    count
}

/// Direct construction: enumerate vertices, then keep the pairs whose common
/// tight constraints cut out a line (exactly one bipartite component).
pub fn tight_span_graph_direct(m: &FiniteMetric) -> Result<TightSpanGraph> {
    let vertices = tight_span_vertices(m)?;
    let n = m.len();
    let tight = |f: &TightPoint, x: usize, y: usize| &f[x] + &f[y] == *m.d(x, y);
    let mut pairs = Vec::new();
    for a in 0..vertices.len() {
        for b in (a + 1)..vertices.len() {
            let (f, g) = (&vertices[a], &vertices[b]);
            let mut common = Vec::new();
            for x in 0..n {
                for y in x..n {
                    if tight(f, x, y) && tight(g, x, y) {
                        common.push((x, y));
                    }
                }
            }
            if bipartite_components(n, &common) == 1 {
                pairs.push((a, b));
            }
        }
    }
    Ok(TightSpanGraph::from_parts(vertices, pairs))
}

/// Construction through the Buneman complex of the split decomposition.
pub fn tight_span_graph_buneman(m: &FiniteMetric) -> Result<TightSpanGraph> {
    let s = decompose(m)?;
    tight_span_graph_from_splits(&s)
}

pub fn tight_span_graph_from_splits(s: &WeightedSplitSystem) -> Result<TightSpanGraph> {
    if !is_weakly_compatible(s) {
        return Err(Error::RouteUnavailable("not weakly compatible".into()));
    }
    if !is_octahedral_free(s, OCTAHEDRAL_BOUND)? {
        return Err(Error::RouteUnavailable("not octahedral-free".into()));
    }
    let skel = buneman_skeleton(s)?;
    let vertices: Vec<TightPoint> = skel.vertices.iter().map(|&p| lambda_map(s, &vertex_point(s, p))).collect();
    let pairs = skel.edges.iter().map(|e| e.ends).collect();
    Ok(TightSpanGraph::from_parts(vertices, pairs))
}

/// Uses the Buneman route when it applies and the direct route otherwise.
pub fn tight_span_graph(m: &FiniteMetric) -> Result<TightSpanGraph> {
    match tight_span_graph_buneman(m) {
        Ok(g) => Ok(g),
        Err(Error::RouteUnavailable(_) | Error::NotTotallyDecomposable(_)) => tight_span_graph_direct(m),
        Err(e) => Err(e),
    }
}

/// First vertex pair (by index) whose `d∞` differs from the graph distance.
pub fn vertex_distance_witness(g: &TightSpanGraph, m: &FiniteMetric) -> Result<Option<(usize, usize)>> {
    let dist = all_pairs_distance(&g.to_weighted_graph(m))?;
    for a in 0..g.vertices.len() {
        for b in (a + 1)..g.vertices.len() {
            if d_inf(&g.vertices[a], &g.vertices[b]) != dist[a][b] {
                return Ok(Some((a, b)));
            }
        }
    }
    Ok(None)
}

/// For two-decomposable metrics: `None` when `d∞` agrees with the graph
/// distance on all vertex pairs, otherwise a witness pair.
pub fn check_vertex_distance_property(m: &FiniteMetric) -> Result<Option<(TightPoint, TightPoint)>> {
    let s = decompose(m).map_err(|e| Error::NotTwoDecomposable(e.to_string()))?;
    if !is_two_compatible(&s) {
        return Err(Error::NotTwoDecomposable("split decomposition is not two-compatible".into()));
    }
    let g = tight_span_graph_from_splits(&s)?;
    Ok(vertex_distance_witness(&g, m)?.map(|(a, b)| (g.vertices[a].clone(), g.vertices[b].clone())))
}

/// Edges grouped by weight, for quick structural comparisons.
pub fn weight_profile(g: &TightSpanGraph) -> BTreeMap<Rat, usize> {
    let mut out = BTreeMap::new();
    for (_, _, w) in &g.edges {
        *out.entry(w.clone()).or_default() += 1;
    }
    out
}
