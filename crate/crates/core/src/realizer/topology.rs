//! Enumeration of graph topologies on fixed terminals plus unlabelled
//! auxiliary vertices, up to isomorphism fixing the terminals.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::metric::FiniteMetric;

use super::Budget;

/// Unweighted simple graph; vertices `0..n_terminals` are the metric's
/// points in order, the rest auxiliary.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topology {
    pub n_terminals: usize,
    pub adj: Vec<u32>,
}

impl Topology {
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn aux_count(&self) -> usize {
        self.adj.len() - self.n_terminals
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.adj.len() {
            for v in (u + 1)..self.adj.len() {
                if self.adj[u] >> v & 1 == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Pruning applied during enumeration.
#[derive(Clone, Copy, Debug, Default)]
pub struct TopologyRules<'a> {
    /// Enables the metric-driven edge rules for terminal-terminal edges.
    pub metric: Option<&'a FiniteMetric>,
    pub max_degree: Option<usize>,
}

fn triangle_free(adj: &[u32]) -> bool {
    (0..adj.len()).all(|u| {
        (u + 1..adj.len()).all(|v| adj[u] >> v & 1 == 0 || adj[u] & adj[v] == 0)
    })
}

fn connected(adj: &[u32]) -> bool {
    let all = if adj.len() == 32 { u32::MAX } else { (1u32 << adj.len()) - 1 };
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == all
}

/// Terminal-terminal edges must carry their full distance, so no terminal
/// may lie strictly between the endpoints, and two terminal edges meeting at
/// a terminal must form a geodesic.
fn terminal_edges_admissible(adj: &[u32], n: usize, m: &FiniteMetric) -> bool {
    for a in 0..n {
        for b in (a + 1)..n {
            if adj[a] >> b & 1 == 0 {
                continue;
            }
            let between = (0..n).any(|c| c != a && c != b && m.d(a, c) + m.d(c, b) == *m.d(a, b));
            if between {
                return false;
            }
        }
    }
    for v in 0..n {
        for a in 0..n {
            for b in (a + 1)..n {
                if adj[v] >> a & 1 == 1 && adj[v] >> b & 1 == 1 && m.d(a, v) + m.d(v, b) != *m.d(a, b) {
                    return false;
                }
            }
        }
    }
    true
}

/// Smallest encoding over all relabellings of the auxiliary vertices.
fn canonical_code(adj: &[u32], n: usize) -> Vec<u32> {
    let k = adj.len() - n;
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best: Option<Vec<u32>> = None;
    loop {
        // perm[new] = old
        let mut pos = vec![0usize; k];
        for (new, &old) in perm.iter().enumerate() {
            pos[old] = new;
        }
        let code: Vec<u32> = perm
            .iter()
            .map(|&old| {
                let row = adj[n + old];
                let mut out = row & ((1u32 << n) - 1);
                for o in 0..k {
                    if row >> (n + o) & 1 == 1 {
                        out |= 1 << (n + pos[o]);
                    }
                }
                out
            })
            .collect();
        if best.as_ref().map_or(true, |b| code < *b) {
            best = Some(code);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Next nondecreasing sequence with entries below `limit`.
fn advance(chosen: &mut [usize], limit: usize) -> bool {
    for i in (0..chosen.len()).rev() {
        if chosen[i] + 1 < limit {
            chosen[i] += 1;
            let v = chosen[i];
            for c in chosen[i + 1..].iter_mut() {
                *c = v;
            }
            return true;
        }
    }
    false
}

/// All connected, triangle-free topologies on `n` terminals and exactly `k`
/// auxiliary vertices of degree at least three.
pub fn enumerate_topologies(n: usize, k: usize, rules: TopologyRules<'_>, budget: &Budget) -> Result<Vec<Topology>> {
    let total = n + k;
    if total > 32 {
        return Err(Error::GroundSetTooLarge { size: total, bound: 32 });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    if pairs.len() > 30 {
        return Err(Error::GroundSetTooLarge { size: n, bound: 8 });
    }
    let aux_pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let mut seen: BTreeSet<(u32, Vec<u32>)> = BTreeSet::new();
    let mut out = Vec::new();
    for tt in 0u32..(1u32 << pairs.len()) {
        let mut base = vec![0u32; total];
        for (bit, &(a, b)) in pairs.iter().enumerate() {
            if tt >> bit & 1 == 1 {
                base[a] |= 1 << b;
                base[b] |= 1 << a;
            }
        }
        if !triangle_free(&base[..n]) {
            continue;
        }
        if let Some(m) = rules.metric {
            if !terminal_edges_admissible(&base, n, m) {
                continue;
            }
        }
        // Terminal neighbourhoods of the auxiliaries, as a nondecreasing sequence.
        let masks: Vec<u32> = (0u32..(1u32 << n))
            .filter(|&mask| (0..n).all(|t| mask >> t & 1 == 0 || base[t] & mask == 0))
            .collect();
        let mut chosen = vec![0usize; k];
        loop {
            if !budget.tick() {
                return Err(Error::BudgetExceeded);
            }
            let mut adj = base.clone();
            for (i, &mi) in chosen.iter().enumerate() {
                let mask = masks[mi];
                adj[n + i] |= mask;
                for t in 0..n {
                    if mask >> t & 1 == 1 {
                        adj[t] |= 1 << (n + i);
                    }
                }
            }
            for aa in 0u32..(1u32 << aux_pairs.len()) {
                let mut g = adj.clone();
                let mut ok = true;
                for (bit, &(a, b)) in aux_pairs.iter().enumerate() {
                    if aa >> bit & 1 == 1 {
                        if g[n + a] & g[n + b] & ((1u32 << n) - 1) != 0 {
                            ok = false;
                            break;
                        }
                        g[n + a] |= 1 << (n + b);
                        g[n + b] |= 1 << (n + a);
                    }
                }
                if !ok || (n..total).any(|v| g[v].count_ones() < 3) {
                    continue;
                }
                if let Some(cap) = rules.max_degree {
                    if g.iter().any(|r| r.count_ones() as usize > cap) {
                        continue;
                    }
                }
                if !triangle_free(&g) || !connected(&g) {
                    continue;
                }
                let key = (tt, canonical_code(&g, n));
                if seen.insert(key) {
                    out.push(Topology { n_terminals: n, adj: g });
                }
            }
            if !advance(&mut chosen, masks.len()) {
                break;
            }
        }
    }
    out.sort_by_key(|t| (t.edges().len(), t.adj.clone()));
    Ok(out)
}
