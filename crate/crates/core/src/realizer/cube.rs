//! Optimal realisations of two-decomposable metrics as subgraphs of the
//! Buneman graph.
//!
//! For a two-compatible split system the optimal length equals the least
//! total weight of an edge set `H` of the Buneman graph that contains, for
//! every pair of points, a path whose length is their distance (a path
//! crossing each separating split once). Branch and bound over such `H`.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use num_traits::Zero;

use crate::buneman::{phi_pattern, BunemanSkeleton};
use crate::error::{Error, Result};
use crate::graph::{all_pairs_distance, DistanceMatrix, WeightedGraph};
use crate::rational::Rat;
use crate::split::WeightedSplitSystem;

use super::Budget;

struct PairDag {
    /// Skeleton vertex indices of the endpoints.
    from: usize,
    /// Vertices of the geodesic interval, by increasing distance from `from`.
    order: Vec<usize>,
    /// Arcs `(u, v, edge)` along the interval.
    arcs: Vec<(usize, usize, usize)>,
    target: usize,
    separating: u64,
}

pub struct CubeSearch<'a> {
    skel: &'a BunemanSkeleton,
    weights: Vec<Rat>,
    edge_split: Vec<usize>,
    split_weight: Vec<Rat>,
    pairs: Vec<PairDag>,
    vertex_count: usize,
}

impl<'a> CubeSearch<'a> {
    pub fn new(s: &WeightedSplitSystem, skel: &'a BunemanSkeleton) -> Result<Self> {
        let mut g = WeightedGraph::new();
        for _ in &skel.vertices {
            g.add_auxiliary();
        }
        for e in &skel.edges {
            g.add_edge(e.ends.0, e.ends.1, s.weight(e.split).clone())?;
        }
        let dist: DistanceMatrix = all_pairs_distance(&g)?;
        let terminals: Vec<usize> = (0..s.ground_size())
            .map(|x| skel.index_of(phi_pattern(s, x)).ok_or_else(|| Error::Invariant("Φ(x) is not a Buneman vertex".into())))
            .collect::<Result<_>>()?;
        let weights: Vec<Rat> = skel.edges.iter().map(|e| s.weight(e.split).clone()).collect();
        let mut pairs = Vec::new();
        for (i, &a) in terminals.iter().enumerate() {
            for &b in &terminals[i + 1..] {
                let mut order: Vec<usize> = (0..skel.vertices.len())
                    .filter(|&v| &dist[a][v] + &dist[v][b] == dist[a][b])
                    .collect();
                order.sort_by(|&u, &v| dist[a][u].cmp(&dist[a][v]));
                let mut arcs = Vec::new();
                for (ei, e) in skel.edges.iter().enumerate() {
                    let (u, v) = e.ends;
                    let w = &weights[ei];
                    if &dist[a][u] + w + &dist[v][b] == dist[a][b] {
                        arcs.push((u, v, ei));
                    } else if &dist[a][v] + w + &dist[u][b] == dist[a][b] {
                        arcs.push((v, u, ei));
                    }
                }
                let separating = skel.vertices[a] ^ skel.vertices[b];
                pairs.push(PairDag { from: a, order, arcs, target: b, separating });
            }
        }
        Ok(CubeSearch {
            skel,
            weights,
            edge_split: skel.edges.iter().map(|e| e.split).collect(),
            split_weight: (0..s.len()).map(|i| s.weight(i).clone()).collect(),
            pairs,
            vertex_count: skel.vertices.len(),
        })
    }

    /// Cheapest completion of a geodesic for `pair`, counting only edges outside `h`.
    fn extension_cost(&self, pair: &PairDag, h: &FixedBitSet) -> Rat {
        let mut best: Vec<Option<Rat>> = vec![None; self.vertex_count];
        best[pair.from] = Some(Rat::zero());
        for &v in &pair.order {
            for &(a, b, e) in &pair.arcs {
                if b != v {
                    continue;
                }
                let Some(ca) = best[a].clone() else { continue };
                let step = if h.contains(e) { ca } else { ca + &self.weights[e] };
                if best[v].as_ref().map_or(true, |cur| step < *cur) {
                    best[v] = Some(step);
                }
            }
        }
        best[pair.target].clone().expect("target reachable along its interval")
    }

    /// All geodesic edge sets of `pair`.
    fn geodesics(&self, pair: &PairDag, budget: &Budget) -> Result<Vec<FixedBitSet>> {
        let mut out = Vec::new();
        let mut current = FixedBitSet::with_capacity(self.weights.len());
        self.walk(pair, pair.from, &mut current, &mut out, budget)?;
        Ok(out)
    }

    fn walk(&self, pair: &PairDag, v: usize, current: &mut FixedBitSet, out: &mut Vec<FixedBitSet>, budget: &Budget) -> Result<()> {
        if v == pair.target {
            if !budget.tick() {
                return Err(Error::BudgetExceeded);
            }
            out.push(current.clone());
            return Ok(());
        }
        for &(a, b, e) in &pair.arcs {
            if a == v {
                current.insert(e);
                self.walk(pair, b, current, out, budget)?;
                current.set(e, false);
            }
        }
        Ok(())
    }

    fn cost(&self, h: &FixedBitSet) -> Rat {
        h.ones().fold(Rat::zero(), |acc, e| acc + &self.weights[e])
    }

    /// Least total weight and every edge set attaining it. The flag is false
    /// when the budget ran out, in which case the sets are the best seen so far.
    pub fn solve(&self, budget: &Budget) -> Result<(Rat, Vec<FixedBitSet>, bool)> {
        let mut full = FixedBitSet::with_capacity(self.weights.len());
        full.insert_range(..);
        let mut state = State { best: self.cost(&full), found: Vec::new(), visited: HashSet::new() };
        let geodesics: Vec<Vec<FixedBitSet>> = self
            .pairs
            .iter()
            .map(|p| self.geodesics(p, budget))
            .collect::<Result<_>>()?;
        let empty = FixedBitSet::with_capacity(self.weights.len());
        let complete = match self.branch(empty, Rat::zero(), &geodesics, &mut state, budget) {
            Ok(()) => true,
            Err(Error::BudgetExceeded) => false,
            Err(e) => return Err(e),
        };
        let mut found = state.found;
        found.sort_by(|a, b| a.ones().collect::<Vec<_>>().cmp(&b.ones().collect::<Vec<_>>()));
        Ok((state.best, found, complete))
    }

    fn branch(&self, h: FixedBitSet, cost: Rat, geodesics: &[Vec<FixedBitSet>], state: &mut State, budget: &Budget) -> Result<()> {
        if !budget.tick() {
            return Err(Error::BudgetExceeded);
        }
        if !state.visited.insert(h.clone()) {
            return Ok(());
        }
        let mut open: Vec<(usize, Rat)> = Vec::new();
        for (i, p) in self.pairs.iter().enumerate() {
            let c = self.extension_cost(p, &h);
            if !c.is_zero() {
                open.push((i, c));
            }
        }
        if open.is_empty() {
            if cost < state.best {
                state.best = cost.clone();
                state.found.clear();
            }
            if cost == state.best {
                state.found.push(h);
            }
            return Ok(());
        }
        let path_bound = open.iter().map(|(_, c)| c.clone()).max().expect("nonempty");
        let mut touched = 0u64;
        for e in h.ones() {
            touched |= 1 << self.edge_split[e];
        }
        let needed = open.iter().fold(0u64, |acc, (i, _)| acc | self.pairs[*i].separating) & !touched;
        let split_bound = (0..self.split_weight.len())
            .filter(|i| needed >> i & 1 == 1)
            .fold(Rat::zero(), |acc, i| acc + &self.split_weight[i]);
        if cost.clone() + path_bound.clone().max(split_bound) > state.best {
            return Ok(());
        }
        // Branch on the pair that is hardest to complete.
        let (pair, _) = open
            .iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty")
            .clone();
        let mut options: Vec<(Rat, FixedBitSet)> = geodesics[pair]
            .iter()
            .map(|p| {
                let mut next = h.clone();
                next.union_with(p);
                (self.cost(&next) - &cost, next)
            })
            .collect();
        options.sort_by(|a, b| a.0.cmp(&b.0));
        for (extra, next) in options {
            self.branch(next, &cost + extra, geodesics, state, budget)?;
        }
        Ok(())
    }

    /// The subgraph of the Buneman graph spanned by `h`.
    pub fn subgraph(&self, s: &WeightedSplitSystem, h: &FixedBitSet) -> WeightedGraph {
        let mut used: Vec<usize> = h
            .ones()
            .flat_map(|e| [self.skel.edges[e].ends.0, self.skel.edges[e].ends.1])
            .collect();
        used.sort_unstable();
        used.dedup();
        let mut g = WeightedGraph::new();
        let mut index = vec![usize::MAX; self.vertex_count];
        for &v in &used {
            let pattern = self.skel.vertices[v];
            index[v] = match (0..s.ground_size()).find(|&x| phi_pattern(s, x) == pattern) {
                Some(x) => g.add_terminal(s.ground()[x].clone()),
                None => g.add_auxiliary(),
            };
        }
        for e in h.ones() {
            let (a, b) = self.skel.edges[e].ends;
            g.add_edge(index[a], index[b], self.weights[e].clone()).expect("skeleton edges are simple");
        }
        g
    }
}

struct State {
    best: Rat,
    found: Vec<FixedBitSet>,
    visited: HashSet<FixedBitSet>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buneman::buneman_skeleton;
    use crate::graph::is_realisation;
    use crate::rational::int;
    use crate::split::split_metric;
    use crate::split::tests::{square, system};

    #[test]
    fn square_needs_the_whole_cycle() {
        let s = square();
        let skel = buneman_skeleton(&s).unwrap();
        let search = CubeSearch::new(&s, &skel).unwrap();
        let (len, found, _) = search.solve(&Budget::unlimited()).unwrap();
        assert_eq!(len, int(4));
        assert_eq!(found.len(), 1);
        let g = search.subgraph(&s, &found[0]);
        assert!(is_realisation(&g, &split_metric(&s).unwrap()));
    }

    #[test]
    fn tree_is_its_own_optimum() {
        let s = system(4, &[(&[1], 1), (&[2], 1), (&[3], 1), (&[4], 1), (&[1, 2], 2)]);
        let skel = buneman_skeleton(&s).unwrap();
        let search = CubeSearch::new(&s, &skel).unwrap();
        let (len, found, _) = search.solve(&Budget::unlimited()).unwrap();
        assert_eq!(len, int(6));
        assert_eq!(found.len(), 1);
    }

    #[test]
    fn two_by_one_grid_drops_an_edge() {
        // Splits 1|234 (weight 1), 12|34, 14|23 on four points: the
        // Buneman graph has a pendant edge on a square.
        let s = system(4, &[(&[1], 1), (&[1, 2], 1), (&[1, 4], 1)]);
        let m = split_metric(&s).unwrap();
        let skel = buneman_skeleton(&s).unwrap();
        let search = CubeSearch::new(&s, &skel).unwrap();
        let (len, found, _) = search.solve(&Budget::unlimited()).unwrap();
        assert_eq!(len, int(5));
        for h in &found {
            assert!(is_realisation(&search.subgraph(&s, h), &m));
        }
    }
}
