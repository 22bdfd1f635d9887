//! Exact optimal realisations at desk scale, path-saturation selection,
//! split-flow analysis and improvement moves.

pub mod cube;
pub mod flow;
pub mod improve;
pub mod topology;
pub mod weights;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::buneman::buneman_skeleton;
use crate::error::{Error, Result};
use crate::graph::{
    canonical_key, count_terminal_geodesics, is_realisation, suppress_degree_two, VertexRole, WeightedGraph,
};
use crate::metric::FiniteMetric;
use crate::rational::Rat;
use crate::split::{decompose, is_two_compatible, WeightedSplitSystem};
use crate::tightspan::{tight_span_graph, DIRECT_BOUND};

pub use flow::{check_scc_count, check_split_potential, split_flow_digraph, verify_potential_vertex_binarity, SccReport, SplitFlowDigraph};
pub use improve::{improve_until_stable, scc_perturbation_improve, Improvement};

/// Work counter shared by a search; optionally also a wall-clock limit.
#[derive(Debug)]
pub struct Budget {
    limit: Option<u64>,
    used: AtomicU64,
    deadline: Option<Instant>,
    expired: AtomicBool,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::new(None, None)
    }

    pub fn new(limit: Option<u64>, time: Option<Duration>) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
            deadline: time.map(|t| Instant::now() + t),
            expired: AtomicBool::new(false),
        }
    }

    /// Records one unit of work; false once the budget is spent.
    pub fn tick(&self) -> bool {
        if self.expired.load(Ordering::Relaxed) {
            return false;
        }
        let used = self.used.fetch_add(1, Ordering::Relaxed) + 1;
        let over = self.limit.is_some_and(|l| used > l)
            || (used % 256 == 0 && self.deadline.is_some_and(|d| Instant::now() > d));
        if over {
            self.expired.store(true, Ordering::Relaxed);
        }
        !over
    }

    pub fn exhausted(&self) -> bool {
        self.expired.load(Ordering::Relaxed)
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Split-cube search when the metric is two-decomposable, else topology search.
    #[default]
    Auto,
    Topology,
    SplitCube,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub max_aux: usize,
    pub max_degree: Option<usize>,
    pub max_points: usize,
    /// Units of work (LP solves, search nodes) before giving up.
    pub node_budget: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    pub strategy: SearchStrategy,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_aux: 4,
            max_degree: None,
            max_points: 8,
            node_budget: None,
            time_limit: None,
            threads: 0,
            strategy: SearchStrategy::Auto,
        }
    }
}

/// A realisation with auxiliary degree-two vertices suppressed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realisation {
    pub graph: WeightedGraph,
    pub length: Rat,
    pub gamma_count: u128,
}

impl Realisation {
    pub fn new(graph: WeightedGraph, m: &FiniteMetric) -> Result<Self> {
        if !is_realisation(&graph, m) {
            return Err(Error::NotARealisation);
        }
        let graph = suppress_degree_two(&graph, &graph.terminals());
        let gamma_count = count_terminal_geodesics(&graph)?;
        let length = graph.total_length();
        Ok(Realisation { graph, length, gamma_count })
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn aux_count(&self) -> usize {
        self.graph.auxiliary_count()
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub optimum: Rat,
    /// Pairwise non-isomorphic, sorted by canonical encoding.
    pub realisations: Vec<Realisation>,
    /// False when the budget ran out; results are then not exhaustive.
    pub complete: bool,
    pub strategy: SearchStrategy,
}

/// All optimal realisations with at most `cfg.max_aux` auxiliary vertices,
/// up to isomorphism.
pub fn optimal_realisations(m: &FiniteMetric, cfg: &SearchConfig) -> Result<SearchOutcome> {
    if m.len() > cfg.max_points {
        return Err(Error::GroundSetTooLarge { size: m.len(), bound: cfg.max_points });
    }
    let run = || match cfg.strategy {
        SearchStrategy::Topology => topology_search(m, cfg),
        SearchStrategy::SplitCube => {
            let s = decompose(m).map_err(|e| Error::NotTwoDecomposable(e.to_string()))?;
            if !is_two_compatible(&s) {
                return Err(Error::NotTwoDecomposable("split decomposition is not two-compatible".into()));
            }
            cube_search(m, &s, cfg)
        }
        SearchStrategy::Auto => match decompose(m) {
            Ok(s) if is_two_compatible(&s) => cube_search(m, &s, cfg),
            _ => topology_search(m, cfg),
        },
    };
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Invariant(e.to_string()))?;
        pool.install(run)
    } else {
        run()
    }
}

fn dedupe(cands: Vec<Realisation>) -> Vec<Realisation> {
    let mut by_key: BTreeMap<(Vec<VertexRole>, Vec<(usize, usize, Rat)>), Realisation> = BTreeMap::new();
    for r in cands {
        by_key.entry(canonical_key(&r.graph)).or_insert(r);
    }
    by_key.into_values().collect()
}

fn finish(optimum: Option<Rat>, cands: Vec<Realisation>, complete: bool, strategy: SearchStrategy) -> Result<SearchOutcome> {
    let optimum = match optimum {
        Some(o) => o,
        None if complete => return Err(Error::SearchBoundTooSmall("no realisation within the auxiliary bound".into())),
        None => return Err(Error::BudgetExceeded),
    };
    Ok(SearchOutcome { optimum, realisations: dedupe(cands), complete, strategy })
}

fn cube_search(m: &FiniteMetric, s: &WeightedSplitSystem, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let budget = Budget::new(cfg.node_budget, cfg.time_limit);
    let skel = buneman_skeleton(s)?;
    let search = cube::CubeSearch::new(s, &skel)?;
    let (best, found, complete) = search.solve(&budget)?;
    let mut cands = Vec::new();
    let mut fewest_aux: Option<usize> = None;
    for h in &found {
        let r = Realisation::new(search.subgraph(s, h), m)?;
        fewest_aux = Some(fewest_aux.map_or(r.aux_count(), |a| a.min(r.aux_count())));
        let degree_ok = cfg.max_degree.map_or(true, |cap| (0..r.graph.vertex_count()).all(|v| r.graph.degree(v) <= cap));
        if r.aux_count() <= cfg.max_aux && degree_ok {
            cands.push(r);
        }
    }
    if cands.is_empty() && complete {
        return Err(Error::SearchBoundTooSmall(match fewest_aux {
            Some(a) => format!("optimal realisations need {a} auxiliary vertices, bound is {}", cfg.max_aux),
            None => "no realisation found".into(),
        }));
    }
    let optimum = (!cands.is_empty()).then_some(best);
    finish(optimum, cands, complete, SearchStrategy::SplitCube)
}

fn topology_search(m: &FiniteMetric, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let budget = Budget::new(cfg.node_budget, cfg.time_limit);
    let initial = if m.len() <= DIRECT_BOUND {
        tight_span_graph(m).ok().and_then(|g| {
            let wg = g.to_weighted_graph(m);
            is_realisation(&wg, m).then(|| wg.total_length())
        })
    } else {
        None
    };
    let bound = weights::SharedBound::new(initial);
    let rules = topology::TopologyRules { metric: Some(m), max_degree: cfg.max_degree };
    let mut complete = true;
    let mut tops = Vec::new();
    for k in 0..=cfg.max_aux {
        match topology::enumerate_topologies(m.len(), k, rules, &budget) {
            Ok(t) => tops.extend(t),
            Err(Error::BudgetExceeded) => {
                complete = false;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let results: Vec<Result<Option<(Rat, Vec<Vec<Rat>>)>>> = tops
        .par_iter()
        .map(|t| weights::optimise_topology(t, m, &bound, &budget))
        .collect();
    let mut solved = Vec::new();
    for (t, r) in tops.iter().zip(results) {
        match r {
            Ok(Some((value, ws))) if !ws.is_empty() => solved.push((t, value, ws)),
            Ok(_) => {}
            Err(Error::BudgetExceeded) => complete = false,
            Err(e) => return Err(e),
        }
    }
    let optimum = solved.iter().map(|(_, v, _)| v.clone()).min();
    let mut cands = Vec::new();
    for (t, value, ws) in &solved {
        if Some(value) != optimum.as_ref() {
            continue;
        }
        for w in ws {
            let mut g = WeightedGraph::new();
            for x in 0..m.len() {
                g.add_terminal(m.label(x));
            }
            for _ in 0..t.aux_count() {
                g.add_auxiliary();
            }
            for (e, &(a, b)) in t.edges().iter().enumerate() {
                g.add_edge(a, b, w[e].clone())?;
            }
            cands.push(Realisation::new(g, m)?);
        }
    }
    finish(optimum, cands, complete, SearchStrategy::Topology)
}

/// Maximises `|Γ(G,w;X)|`, then minimises `|V(G)|`; ties go to the smaller
/// canonical encoding. Saturation is relative to the candidate set.
pub fn select_minimal_path_saturated(cands: &[Realisation]) -> Result<Realisation> {
    cands
        .iter()
        .map(|r| (r, canonical_key(&r.graph)))
        .min_by(|(a, ka), (b, kb)| {
            b.gamma_count
                .cmp(&a.gamma_count)
                .then(a.vertex_count().cmp(&b.vertex_count()))
                .then(ka.cmp(kb))
        })
        .map(|(r, _)| r.clone())
        .ok_or(Error::EmptyCandidates)
}
