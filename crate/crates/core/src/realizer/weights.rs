//! Exact minimum-length edge weights for a fixed topology.
//!
//! Minimises total length subject to "graph distance between terminals equals
//! the metric". The lower-bound side (every path is at least as long as the
//! distance) is added lazily as cutting planes; the upper-bound side (some
//! path is exactly as long) is a disjunction handled by branching on which
//! path of an untight pair is made tight.

use std::collections::BTreeSet;
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Sense};
use crate::metric::FiniteMetric;
use crate::rational::Rat;

use super::topology::Topology;
use super::Budget;

/// Smallest length known to be achievable; shared across topologies.
#[derive(Debug, Default)]
pub struct SharedBound(Mutex<Option<Rat>>);

impl SharedBound {
    pub fn new(initial: Option<Rat>) -> Self {
        SharedBound(Mutex::new(initial))
    }

    pub fn get(&self) -> Option<Rat> {
        self.0.lock().expect("bound lock").clone()
    }

    pub fn offer(&self, value: &Rat) {
        let mut guard = self.0.lock().expect("bound lock");
        if guard.as_ref().map_or(true, |b| value < b) {
            *guard = Some(value.clone());
        }
    }

    fn exceeds(&self, value: &Rat) -> bool {
        self.get().is_some_and(|b| *value > b)
    }
}

/// Edge-index lists of all simple paths between every terminal pair.
fn terminal_paths(top: &Topology, edge_index: &[Vec<Option<usize>>]) -> Vec<Vec<Vec<usize>>> {
    let n = top.n_terminals;
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut paths = Vec::new();
            let mut stack = vec![a];
            let mut edges = Vec::new();
            walk(top, edge_index, b, &mut stack, &mut edges, &mut paths);
            out.push(paths);
        }
    }
    out
}

fn walk(
    top: &Topology,
    edge_index: &[Vec<Option<usize>>],
    target: usize,
    stack: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let v = *stack.last().expect("nonempty");
    if v == target {
        let mut e = edges.clone();
        e.sort_unstable();
        out.push(e);
        return;
    }
    for u in 0..top.vertex_count() {
        if top.adj[v] >> u & 1 == 0 || stack.contains(&u) {
            continue;
        }
        stack.push(u);
        edges.push(edge_index[v][u].expect("adjacent"));
        walk(top, edge_index, target, stack, edges, out);
        edges.pop();
        stack.pop();
    }
}

/// Terminal distances under `w` and, for each pair, one shortest path (edge indices).
fn terminal_distances(
    top: &Topology,
    edges: &[(usize, usize)],
    w: &[Rat],
) -> Vec<(Rat, Vec<usize>)> {
    let v = top.vertex_count();
    let mut dist: Vec<Vec<Option<Rat>>> = vec![vec![None; v]; v];
    let mut next: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; v]; v];
    for i in 0..v {
        dist[i][i] = Some(Rat::zero());
    }
    for (e, &(a, b)) in edges.iter().enumerate() {
        dist[a][b] = Some(w[e].clone());
        dist[b][a] = Some(w[e].clone());
        next[a][b] = Some((b, e));
        next[b][a] = Some((a, e));
    }
    for k in 0..v {
        for i in 0..v {
            let Some(dik) = dist[i][k].clone() else { continue };
            for j in 0..v {
                let Some(dkj) = &dist[k][j] else { continue };
                let via = &dik + dkj;
                if dist[i][j].as_ref().map_or(true, |cur| via < *cur) {
                    dist[i][j] = Some(via);
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    let n = top.n_terminals;
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut path = Vec::new();
            let mut cur = a;
            while cur != b {
                let (nx, e) = next[cur][b].expect("connected topology");
                path.push(e);
                cur = nx;
            }
            path.sort_unstable();
            out.push((dist[a][b].clone().expect("connected"), path));
        }
    }
    out
}

fn row(edges_in: &[usize], width: usize) -> Vec<Rat> {
    let mut r = vec![Rat::zero(); width];
    for &e in edges_in {
        r[e] = Rat::one();
    }
    r
}

struct Problem<'a> {
    top: &'a Topology,
    edges: Vec<(usize, usize)>,
    targets: Vec<Rat>,
    cuts: BTreeSet<(usize, Vec<usize>)>,
}

enum NodeResult {
    Dead,
    Solved { value: Rat, untight: Vec<usize> },
}

impl Problem<'_> {
    /// Min-length LP for the node with fixed tight paths, adding cuts until
    /// every terminal distance is at least the metric.
    fn solve_node(&mut self, fixed: &[(usize, Vec<usize>)], bound: &SharedBound, budget: &Budget) -> Result<NodeResult> {
        let width = self.edges.len();
        loop {
            if !budget.tick() {
                return Err(Error::BudgetExceeded);
            }
            let mut lp = LinearProgram::new(vec![Rat::one(); width]);
            for (p, path) in &self.cuts {
                lp.add(row(path, width), Sense::Ge, self.targets[*p].clone());
            }
            for (p, path) in fixed {
                lp.add(row(path, width), Sense::Eq, self.targets[*p].clone());
            }
            let (w, value) = match lp.solve() {
                LpOutcome::Optimal { x, value } => (x, value),
                LpOutcome::Infeasible => return Ok(NodeResult::Dead),
                LpOutcome::Unbounded => return Err(Error::Invariant("length LP unbounded".into())),
            };
            if bound.exceeds(&value) {
                return Ok(NodeResult::Dead);
            }
            let dists = terminal_distances(self.top, &self.edges, &w);
            let mut added = false;
            let mut untight = Vec::new();
            for (p, (d, path)) in dists.into_iter().enumerate() {
                if d < self.targets[p] {
                    added |= self.cuts.insert((p, path));
                } else if d > self.targets[p] {
                    untight.push(p);
                }
            }
            if !added {
                return Ok(NodeResult::Solved { value, untight });
            }
        }
    }

    /// A weighting of length `value` with every terminal pair tight and all
    /// weights positive, extending `fixed`; branches on pairs left untight.
    fn positive_weighting(
        &mut self,
        fixed: &[(usize, Vec<usize>)],
        value: &Rat,
        paths: &[Vec<Vec<usize>>],
        budget: &Budget,
    ) -> Result<Option<Vec<Rat>>> {
        let Some(w) = self.max_min_weighting(fixed, value, budget)? else { return Ok(None) };
        let dists = terminal_distances(self.top, &self.edges, &w);
        let Some(pair) = (0..dists.len()).find(|&p| dists[p].0 > self.targets[p]) else {
            return Ok(Some(w));
        };
        for path in &paths[pair] {
            let mut child = fixed.to_vec();
            child.push((pair, path.clone()));
            child.sort();
            if let Some(w) = self.positive_weighting(&child, value, paths, budget)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    /// Largest minimum edge weight among weightings of length `value`
    /// meeting the fixed paths and all cuts.
    fn max_min_weighting(&mut self, fixed: &[(usize, Vec<usize>)], value: &Rat, budget: &Budget) -> Result<Option<Vec<Rat>>> {
        let width = self.edges.len();
        loop {
            if !budget.tick() {
                return Err(Error::BudgetExceeded);
            }
            let mut objective = vec![Rat::zero(); width + 1];
            objective[width] = -Rat::one();
            let mut lp = LinearProgram::new(objective);
            let widen = |mut r: Vec<Rat>| {
                r.push(Rat::zero());
                r
            };
            for (p, path) in &self.cuts {
                lp.add(widen(row(path, width)), Sense::Ge, self.targets[*p].clone());
            }
            for (p, path) in fixed {
                lp.add(widen(row(path, width)), Sense::Eq, self.targets[*p].clone());
            }
            lp.add(widen(vec![Rat::one(); width]), Sense::Eq, value.clone());
            for e in 0..width {
                let mut r = vec![Rat::zero(); width + 1];
                r[e] = Rat::one();
                r[width] = -Rat::one();
                lp.add(r, Sense::Ge, Rat::zero());
            }
            let x = match lp.solve() {
                LpOutcome::Optimal { x, .. } => x,
                _ => return Ok(None),
            };
            let w = x[..width].to_vec();
            let dists = terminal_distances(self.top, &self.edges, &w);
            let mut added = false;
            for (p, (d, path)) in dists.into_iter().enumerate() {
                if d < self.targets[p] {
                    added |= self.cuts.insert((p, path));
                }
            }
            if !added {
                return Ok(x[width].is_positive().then_some(w));
            }
        }
    }
}

/// Optimal length of the topology and its distinct positive optimal
/// weightings (one per optimal branch), unless pruned by `bound`.
pub fn optimise_topology(
    top: &Topology,
    m: &FiniteMetric,
    bound: &SharedBound,
    budget: &Budget,
) -> Result<Option<(Rat, Vec<Vec<Rat>>)>> {
    let n = top.n_terminals;
    let edges = top.edges();
    let mut edge_index = vec![vec![None; top.vertex_count()]; top.vertex_count()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        edge_index[a][b] = Some(e);
        edge_index[b][a] = Some(e);
    }
    let paths = terminal_paths(top, &edge_index);
    let targets: Vec<Rat> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| m.d(a, b).clone()).collect();
    let mut problem = Problem { top, edges, targets, cuts: BTreeSet::new() };

    let mut best: Option<Rat> = None;
    let mut leaves: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let mut visited: BTreeSet<Vec<(usize, Vec<usize>)>> = BTreeSet::new();
    let mut stack: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new()];
    while let Some(fixed) = stack.pop() {
        if !visited.insert(fixed.clone()) {
            continue;
        }
        let (value, untight) = match problem.solve_node(&fixed, bound, budget)? {
            NodeResult::Dead => continue,
            NodeResult::Solved { value, untight } => (value, untight),
        };
        if best.as_ref().is_some_and(|b| value > *b) {
            continue;
        }
        if untight.is_empty() {
            bound.offer(&value);
            if best.as_ref().map_or(true, |b| value < *b) {
                best = Some(value);
                leaves.clear();
            }
            leaves.push(fixed);
            continue;
        }
        let pair = *untight.iter().min_by_key(|&&p| (paths[p].len(), p)).expect("nonempty");
        for path in paths[pair].iter().rev() {
            let mut child = fixed.clone();
            child.push((pair, path.clone()));
            child.sort();
            stack.push(child);
        }
    }
    let Some(best) = best else { return Ok(None) };
    if bound.exceeds(&best) {
        return Ok(None);
    }
    let mut weightings: Vec<Vec<Rat>> = Vec::new();
    for fixed in &leaves {
        if let Some(w) = problem.positive_weighting(fixed, &best, &paths, budget)? {
            if !weightings.contains(&w) {
                weightings.push(w);
            }
        }
    }
    Ok(Some((best, weightings)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;
    use crate::rational::int;

    fn metric(rows: &[&[i64]]) -> FiniteMetric {
        let n = rows.len();
        validate_metric(
            rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
            (1..=n).map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    fn topology(n: usize, total: usize, edges: &[(usize, usize)]) -> Topology {
        let mut adj = vec![0u32; total];
        for &(a, b) in edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        Topology { n_terminals: n, adj }
    }

    #[test]
    fn square_on_four_cycle() {
        let m = metric(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]]);
        let top = topology(4, 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let (value, ws) = optimise_topology(&top, &m, &SharedBound::default(), &Budget::unlimited()).unwrap().unwrap();
        assert_eq!(value, int(4));
        assert_eq!(ws, vec![vec![int(1); 4]]);
    }

    #[test]
    fn star_for_three_points() {
        // d(1,2)=3, d(1,3)=4, d(2,3)=5: star legs 1, 2, 3.
        let m = metric(&[&[0, 3, 4], &[3, 0, 5], &[4, 5, 0]]);
        let top = topology(3, 4, &[(0, 3), (1, 3), (2, 3)]);
        let (value, ws) = optimise_topology(&top, &m, &SharedBound::default(), &Budget::unlimited()).unwrap().unwrap();
        assert_eq!(value, int(6));
        assert_eq!(ws, vec![vec![int(1), int(2), int(3)]]);
    }

    #[test]
    fn degenerate_star_has_no_positive_weighting() {
        // 2 lies between 1 and 3, so the star's middle leg would be zero.
        let m = metric(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        let top = topology(3, 4, &[(0, 3), (1, 3), (2, 3)]);
        let (value, ws) = optimise_topology(&top, &m, &SharedBound::default(), &Budget::unlimited()).unwrap().unwrap();
        assert_eq!(value, int(2));
        assert!(ws.is_empty());
    }

    #[test]
    fn bound_prunes() {
        let m = metric(&[&[0, 1, 2, 1], &[1, 0, 1, 2], &[2, 1, 0, 1], &[1, 2, 1, 0]]);
        let top = topology(4, 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let bound = SharedBound::new(Some(int(3)));
        assert!(optimise_topology(&top, &m, &bound, &Budget::unlimited()).unwrap().is_none());
    }
}
