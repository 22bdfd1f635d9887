//! Vertex images of a realisation in the tight span and the Buneman complex,
//! and the certificate that an optimal realisation sits inside `(G_d, w∞)`
//! up to suppression of degree-two vertices.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::buneman::{buneman_skeleton, lambda_a, lambda_preimage, vertex_point, BunemanPoint, BunemanSkeleton};
use crate::error::{Error, Result};
use crate::graph::{
    all_pairs_distance, is_realisation, metric_terminals, shortest_paths_between, suppress_degree_two, weighted_isomorphic,
    VertexPath, WeightedGraph,
};
use crate::metric::FiniteMetric;
use crate::rational::Rat;
use crate::realizer::{optimal_realisations, select_minimal_path_saturated, Realisation, SearchConfig};
use crate::split::{decompose, is_two_compatible, WeightedSplitSystem};
use crate::tightspan::{d_inf, is_tight_point, tight_span_graph_from_splits, TightPoint, TightSpanGraph};

/// Bound on path-system backtracking in [`build_g_star`].
pub const PATH_SYSTEM_BOUND: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct EmbeddingCertificate {
    pub splits: WeightedSplitSystem,
    pub tight_span: TightSpanGraph,
    pub realisation: Realisation,
    /// Indexed by vertex of the realisation.
    pub psi_images: Vec<TightPoint>,
    pub psi_prime_images: Vec<BunemanPoint>,
    /// For each edge `(u, v)` of the realisation, a path between the images
    /// of `u` and `v` in the tight-span graph.
    pub chosen_paths: Vec<((usize, usize), VertexPath)>,
    pub g_star: WeightedGraph,
    /// `g_star` with degree-two vertices outside `ψ(V)` suppressed.
    pub suppressed: WeightedGraph,
    /// `suppressed` vertex to realisation vertex.
    pub witness: Vec<usize>,
}

/// `ψ(v)(x) = d(v, x)` for every vertex `v`, coordinates in metric order.
/// Fails with `NotInTightSpan` when an image is not a tight point, and with
/// `Invariant` when an edge is stretched.
pub fn psi(r: &Realisation, m: &FiniteMetric) -> Result<Vec<TightPoint>> {
    let g = &r.graph;
    let terms = metric_terminals(g, m).ok_or(Error::NotARealisation)?;
    let dist = all_pairs_distance(g)?;
    let images: Vec<TightPoint> = (0..g.vertex_count())
        .map(|v| terms.iter().map(|&t| dist[v][t].clone()).collect())
        .collect();
    for (v, f) in images.iter().enumerate() {
        if !is_tight_point(m, f) {
            return Err(Error::NotInTightSpan(v));
        }
    }
    for (u, v, w) in g.edges() {
        if d_inf(&images[u], &images[v]) > w {
            return Err(Error::Invariant(format!("edge {{{u}, {v}}} is stretched by the embedding")));
        }
    }
    Ok(images)
}

/// First pair of vertices with equal images, if any.
pub fn psi_collision(images: &[TightPoint]) -> Option<(usize, usize)> {
    (0..images.len()).find_map(|a| ((a + 1)..images.len()).find(|&b| images[a] == images[b]).map(|b| (a, b)))
}

/// The preimage of each `ψ(v)` under `Λ`, searched over the cells of `skel`.
pub fn psi_prime(s: &WeightedSplitSystem, skel: &BunemanSkeleton, images: &[TightPoint]) -> Result<Vec<BunemanPoint>> {
    images
        .iter()
        .enumerate()
        .map(|(v, f)| lambda_preimage(s, skel, f).map(|(mu, _)| mu).ok_or(Error::NoPreimage(v)))
        .collect()
}

/// Whether every point is a vertex of the Buneman complex.
pub fn check_vertices_map_to_vertices(s: &WeightedSplitSystem, skel: &BunemanSkeleton, points: &[BunemanPoint]) -> bool {
    points.iter().all(|mu| {
        let pattern = (0..s.len()).fold(0u64, |acc, i| if mu.coords[2 * i + 1].is_zero() { acc } else { acc | 1 << i });
        skel.index_of(pattern).is_some() && vertex_point(s, pattern) == *mu
    })
}

/// `λ_A ∘ ψ′` at every vertex, for the split side with index `side`.
pub fn side_potential(s: &WeightedSplitSystem, points: &[BunemanPoint], side: usize) -> Vec<Rat> {
    points.iter().map(|mu| lambda_a(s, mu, side)).collect()
}

/// Chooses a shortest path in the tight-span graph for every edge of the
/// realisation so that two paths share only common end images, and returns
/// the paths with their union `G*`.
pub fn build_g_star(
    r: &Realisation,
    m: &FiniteMetric,
    gd: &TightSpanGraph,
    images: &[TightPoint],
) -> Result<(Vec<((usize, usize), VertexPath)>, WeightedGraph)> {
    let g = &r.graph;
    let image_index: Vec<usize> = images
        .iter()
        .enumerate()
        .map(|(v, f)| gd.index_of(f).ok_or(Error::NotInTightSpan(v)))
        .collect::<Result<_>>()?;
    let gdw = gd.to_weighted_graph(m);
    let gdist = all_pairs_distance(&gdw)?;
    let edges = g.edges();
    let mut options: Vec<Vec<VertexPath>> = Vec::with_capacity(edges.len());
    for (u, v, w) in &edges {
        let (a, b) = (image_index[*u], image_index[*v]);
        if gdist[a][b] != *w {
            return Err(Error::Invariant(format!(
                "edge {{{u}, {v}}} has weight {w} but its images are {} apart",
                gdist[a][b]
            )));
        }
        let mut paths = shortest_paths_between(&gdw, &gdist, a, b);
        paths.sort_by(|p, q| p.0.cmp(&q.0));
        options.push(paths);
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(edges.len());
    let mut nodes = 0u64;
    if !choose(&options, &mut chosen, &mut nodes)? {
        return Err(Error::NoValidPathSystem);
    }
    let paths: Vec<((usize, usize), VertexPath)> = edges
        .iter()
        .zip(&chosen)
        .enumerate()
        .map(|(e, ((u, v, _), &c))| ((*u, *v), options[e][c].clone()))
        .collect();

    let used: BTreeSet<usize> = paths.iter().flat_map(|(_, p)| p.0.iter().copied()).collect();
    let mut index = vec![usize::MAX; gdw.vertex_count()];
    let mut g_star = WeightedGraph::new();
    for &v in &used {
        index[v] = g_star.add_vertex(gdw.role(v).clone());
    }
    for (_, p) in &paths {
        for (a, b) in p.edges() {
            if !g_star.has_edge(index[a], index[b]) {
                let w = gdw.weight(a, b).expect("path edge").clone();
                g_star.add_edge(index[a], index[b], w)?;
            }
        }
    }
    if g_star.total_length() > r.length {
        return Err(Error::Invariant("G* is longer than the realisation".into()));
    }
    if !is_realisation(&g_star, m) {
        return Err(Error::Invariant("G* does not realise the metric".into()));
    }
    Ok((paths, g_star))
}

fn disjoint_enough(p: &VertexPath, q: &VertexPath) -> bool {
    let ends_p = [p.start(), p.end()];
    let ends_q = [q.start(), q.end()];
    p.0.iter().filter(|v| q.0.contains(v)).all(|v| ends_p.contains(v) && ends_q.contains(v))
}

fn choose(options: &[Vec<VertexPath>], chosen: &mut Vec<usize>, nodes: &mut u64) -> Result<bool> {
    let e = chosen.len();
    if e == options.len() {
        return Ok(true);
    }
    for (c, path) in options[e].iter().enumerate() {
        *nodes += 1;
        if *nodes > PATH_SYSTEM_BOUND {
            return Err(Error::BudgetExceeded);
        }
        if chosen.iter().enumerate().all(|(f, &cf)| disjoint_enough(&options[f][cf], path)) {
            chosen.push(c);
            if choose(options, chosen, nodes)? {
                return Ok(true);
            }
            chosen.pop();
        }
    }
    Ok(false)
}

/// Runs the whole chain on `m`: split decomposition, tight-span graph via the
/// Buneman complex, optimal realisations, selection, both embeddings, the
/// path system and the final isomorphism. Errors carry the failing stage.
pub fn certify_theorem(m: &FiniteMetric, cfg: &SearchConfig) -> Result<EmbeddingCertificate> {
    let s = decompose(m)
        .map_err(|e| Error::NotTwoDecomposable(e.to_string()))
        .map_err(|e| e.at_stage("decompose"))?;
    if !is_two_compatible(&s) {
        return Err(Error::NotTwoDecomposable("split decomposition is not two-compatible".into()).at_stage("decompose"));
    }
    let gd = tight_span_graph_from_splits(&s).map_err(|e| e.at_stage("tightspan"))?;
    let outcome = optimal_realisations(m, cfg).map_err(|e| e.at_stage("realize"))?;
    let r = select_minimal_path_saturated(&outcome.realisations).map_err(|e| e.at_stage("select"))?;
    let images = psi(&r, m).map_err(|e| e.at_stage("psi"))?;
    if let Some((a, b)) = psi_collision(&images) {
        return Err(Error::Invariant(format!("vertices {a} and {b} share an image")).at_stage("psi"));
    }
    let skel = buneman_skeleton(&s).map_err(|e| e.at_stage("psi-prime"))?;
    let points = psi_prime(&s, &skel, &images).map_err(|e| e.at_stage("psi-prime"))?;
    if !check_vertices_map_to_vertices(&s, &skel, &points) {
        return Err(Error::Invariant("a vertex maps into the interior of a cell".into()).at_stage("vertex-images"));
    }
    let (chosen_paths, g_star) = build_g_star(&r, m, &gd, &images).map_err(|e| e.at_stage("g-star"))?;
    // G* vertices are the used tight-span vertices in increasing order.
    let used: Vec<usize> = chosen_paths
        .iter()
        .flat_map(|(_, p)| p.0.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let keep: Vec<usize> = images
        .iter()
        .map(|f| {
            let v = gd.index_of(f).expect("checked in build_g_star");
            used.binary_search(&v).expect("image lies on a chosen path")
        })
        .collect();
    let suppressed = suppress_degree_two(&g_star, &keep);
    let witness = weighted_isomorphic(&suppressed, &r.graph)
        .ok_or_else(|| Error::Invariant("suppressed G* is not isomorphic to the realisation".into()).at_stage("homeomorphism"))?;
    Ok(EmbeddingCertificate {
        splits: s,
        tight_span: gd,
        realisation: r,
        psi_images: images,
        psi_prime_images: points,
        chosen_paths,
        g_star,
        suppressed,
        witness,
    })
}
