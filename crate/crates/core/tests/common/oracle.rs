//! Brute-force optimal realisation length, written without the library's
//! topology rules or weight search.
//!
//! Candidate graphs: the terminals plus `k <= max_aux` auxiliaries, connected,
//! every auxiliary of degree at least three and no triangle. Both
//! restrictions lose nothing for optimal realisations: an auxiliary leaf can
//! be deleted and a degree-two auxiliary suppressed; a triangle whose edges
//! are shortest paths can be replaced by a star on a new vertex with legs
//! `(a+c-b)/2`, `(a+b-c)/2`, `(b+c-a)/2`, which keeps every distance and
//! saves half the triangle's length.
//!
//! For each graph the optimum is found by choosing a tight path for every
//! terminal pair in turn and solving the linear program "chosen paths equal
//! `d`, every path at least `d`, weights non-negative". Zero weights are
//! allowed, which covers contractions.

use tightspan::lp::{LinearProgram, LpOutcome, Sense};
use tightspan::{FiniteMetric, Rat};

pub struct Candidate {
    /// Edges as bits over all vertex pairs of the largest graph size.
    global: u32,
    edges: Vec<(usize, usize)>,
    /// Per terminal pair, every simple path as an edge mask.
    paths: Vec<Vec<u32>>,
}

pub struct GraphSpace {
    n: usize,
    max_size: usize,
    pub graphs: Vec<Candidate>,
}

fn zero() -> Rat {
    Rat::from_integer(0.into())
}

fn one() -> Rat {
    Rat::from_integer(1.into())
}

fn terminal_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|x| ((x + 1)..n).map(move |y| (x, y))).collect()
}

impl GraphSpace {
    pub fn new(n: usize, max_aux: usize) -> Self {
        let mut graphs = Vec::new();
        let max_size = n + max_aux;
        for k in 0..=max_aux {
            let size = n + k;
            let tt_pairs = terminal_pairs(n);
            let aa_pairs: Vec<(usize, usize)> = (n..size).flat_map(|a| ((a + 1)..size).map(move |b| (a, b))).collect();
            let tmasks = nondecreasing(k, 1 << n);
            for tt in 0u32..(1 << tt_pairs.len()) {
                for tm in &tmasks {
                    for aa in 0u32..(1 << aa_pairs.len()) {
                        let mut adj = [0u32; 8];
                        let mut edges = Vec::new();
                        for (i, &(a, b)) in tt_pairs.iter().enumerate() {
                            if tt >> i & 1 == 1 {
                                edges.push((a, b));
                            }
                        }
                        for (i, &m) in tm.iter().enumerate() {
                            for x in 0..n {
                                if m >> x & 1 == 1 {
                                    edges.push((x, n + i));
                                }
                            }
                        }
                        for (i, &(a, b)) in aa_pairs.iter().enumerate() {
                            if aa >> i & 1 == 1 {
                                edges.push((a, b));
                            }
                        }
                        for &(a, b) in &edges {
                            adj[a] |= 1 << b;
                            adj[b] |= 1 << a;
                        }
                        if (n..size).any(|v| adj[v].count_ones() < 3) {
                            continue;
                        }
                        if (0..size).any(|a| (0..size).any(|b| adj[a] >> b & 1 == 1 && adj[a] & adj[b] != 0)) {
                            continue;
                        }
                        let mut seen = 1u32;
                        let mut frontier = 1u32;
                        while frontier != 0 {
                            let mut next = 0;
                            for v in 0..size {
                                if frontier >> v & 1 == 1 {
                                    next |= adj[v];
                                }
                            }
                            next &= !seen;
                            seen |= next;
                            frontier = next;
                        }
                        if seen != (1u32 << size) - 1 {
                            continue;
                        }
                        let paths = tt_pairs.iter().map(|&(x, y)| simple_paths(size, &edges, x, y)).collect();
                        let global = edges.iter().fold(0u32, |acc, &(a, b)| acc | 1 << pair_bit(max_size, a, b));
                        graphs.push(Candidate { global, edges, paths });
                    }
                }
            }
        }
        graphs.sort_by_key(|g| (g.edges.len(), g.global));
        GraphSpace { n, max_size, graphs }
    }

    /// Least total length of a realisation of `m` over the space.
    pub fn optimum(&self, m: &FiniteMetric) -> Rat {
        assert_eq!(m.len(), self.n);
        let targets: Vec<Rat> = terminal_pairs(self.n).iter().map(|&(x, y)| m.d(x, y).clone()).collect();
        // The complete graph on the terminals, weighted by `d`, realises `m`.
        let mut best = targets.iter().fold(zero(), |a, b| a + b);
        // Edge sets whose paths alone force length >= best; any graph
        // containing one of them cannot do better.
        let mut certificates: Vec<u32> = Vec::new();
        for g in &self.graphs {
            if certificates.iter().any(|&c| c & !g.global == 0) {
                continue;
            }
            let mut cuts: Vec<(usize, u32)> = g
                .paths
                .iter()
                .enumerate()
                .flat_map(|(p, paths)| {
                    let hops = paths.iter().map(|q| q.count_ones()).min().expect("connected");
                    paths.iter().filter(move |q| q.count_ones() == hops).map(move |&q| (p, q))
                })
                .collect();
            let Some((value, loose, w)) = lp(g, &targets, &[], &mut cuts) else { continue };
            if value >= best {
                // Cuts tight at the optimum already pin the value.
                let used = cuts
                    .iter()
                    .filter(|&&(p, path)| path_length(path, &w) == targets[p])
                    .fold(0u32, |acc, &(_, path)| acc | path);
                let global = (0..g.edges.len())
                    .filter(|e| used >> e & 1 == 1)
                    .fold(0u32, |acc, e| acc | 1 << pair_bit(self.max_size, g.edges[e].0, g.edges[e].1));
                certificates.push(global);
                continue;
            }
            if loose.is_none() {
                best = value;
                continue;
            }
            let mut fixed = Vec::new();
            branch(g, &targets, &mut fixed, &mut cuts, &mut best);
        }
        best
    }
}

/// Nondecreasing sequences of length `k` over `0..limit`; auxiliaries are
/// ordered by their terminal neighbourhoods.
fn nondecreasing(k: usize, limit: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|seq: Vec<u32>| {
                let from = seq.last().copied().unwrap_or(0);
                (from..limit).map(move |m| {
                    let mut next = seq.clone();
                    next.push(m);
                    next
                })
            })
            .collect();
    }
    out
}

fn pair_bit(size: usize, a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    // Row-major index of (a, b) among pairs of 0..size.
    a * (2 * size - a - 1) / 2 + (b - a - 1)
}

fn simple_paths(size: usize, edges: &[(usize, usize)], x: usize, y: usize) -> Vec<u32> {
    fn walk(edges: &[(usize, usize)], v: usize, y: usize, used: u32, on: &mut [bool], out: &mut Vec<u32>) {
        if v == y {
            out.push(used);
            return;
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a != v && b != v {
                continue;
            }
            let u = if a == v { b } else { a };
            if on[u] {
                continue;
            }
            on[u] = true;
            walk(edges, u, y, used | 1 << e, on, out);
            on[u] = false;
        }
    }
    let mut on = vec![false; size];
    on[x] = true;
    let mut out = Vec::new();
    walk(edges, x, y, 0, &mut on, &mut out);
    out
}

fn path_length(path: u32, w: &[Rat]) -> Rat {
    (0..w.len()).filter(|e| path >> e & 1 == 1).fold(zero(), |acc, e| acc + &w[e])
}

/// Solves with the given equalities, adding violated path constraints
/// until every path is at least its target. Returns the value and the first
/// pair whose distance exceeds its target, if any.
fn lp(g: &Candidate, targets: &[Rat], fixed: &[(usize, u32)], cuts: &mut Vec<(usize, u32)>) -> Option<(Rat, Option<usize>, Vec<Rat>)> {
    let width = g.edges.len();
    let row = |path: u32| -> Vec<Rat> { (0..width).map(|e| if path >> e & 1 == 1 { one() } else { zero() }).collect() };
    loop {
        let mut lp = LinearProgram::new(vec![one(); width]);
        for &(p, path) in cuts.iter() {
            lp.add(row(path), Sense::Ge, targets[p].clone());
        }
        for &(p, path) in fixed {
            lp.add(row(path), Sense::Eq, targets[p].clone());
        }
        let (w, value) = match lp.solve() {
            LpOutcome::Optimal { x, value } => (x, value),
            _ => return None,
        };
        let mut added = false;
        let mut loose = None;
        for (p, paths) in g.paths.iter().enumerate() {
            let (shortest, len) = paths
                .iter()
                .map(|&path| (path, path_length(path, &w)))
                .min_by(|a, b| a.1.cmp(&b.1))
                .expect("connected");
            if len < targets[p] {
                cuts.push((p, shortest));
                added = true;
            } else if len > targets[p] && loose.is_none() {
                loose = Some(p);
            }
        }
        if !added {
            return Some((value, loose, w));
        }
    }
}

/// Every optimal weighting makes each pair tight along some path, so a
/// pair left loose is split by which of its paths is tight.
fn branch(g: &Candidate, targets: &[Rat], fixed: &mut Vec<(usize, u32)>, cuts: &mut Vec<(usize, u32)>, best: &mut Rat) {
    let Some((value, loose, _)) = lp(g, targets, fixed, cuts) else { return };
    if value >= *best {
        return;
    }
    let Some(p) = loose else {
        *best = value;
        return;
    };
    for &path in &g.paths[p] {
        fixed.push((p, path));
        branch(g, targets, fixed, cuts, best);
        fixed.pop();
    }
}

