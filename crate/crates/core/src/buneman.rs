//! The hypercube `H(S, ws)`, the Buneman complex inside it, the maps `Φ` and
//! `Λ`, and the cells of the complex up to dimension two.
//!
//! Coordinates are indexed by side: side `2i` is the side of split `i` that
//! contains the first ground point, side `2i + 1` its complement. A vertex of
//! the hypercube is a bit pattern; bit `i` set means the full weight of split
//! `i` sits on side `2i + 1`.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{half, Rat};
use crate::split::WeightedSplitSystem;

/// Default bound on `|S|` for vertex enumeration.
pub const VERTEX_BOUND: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BunemanPoint {
    pub coords: Vec<Rat>,
}

impl BunemanPoint {
    pub fn coord(&self, side: usize) -> &Rat {
        &self.coords[side]
    }
}

/// Pairs of sides from different splits that are disjoint as subsets of X.
/// Such a pair may not carry weight on both sides at once.
fn conflicts(s: &WeightedSplitSystem) -> Vec<u128> {
    let k = s.len();
    let mask = |side: usize| {
        let sp = s.split(side / 2);
        if side % 2 == 0 {
            sp.side_a()
        } else {
            sp.side_b()
        }
    };
    (0..2 * k)
        .map(|p| {
            (0..2 * k)
                .filter(|&q| q / 2 != p / 2 && mask(p) & mask(q) == 0)
                .fold(0u128, |acc, q| acc | 1u128 << q)
        })
        .collect()
}

fn support_ok(conf: &[u128], nonzero: u128) -> bool {
    conf.iter()
        .enumerate()
        .all(|(p, c)| nonzero >> p & 1 == 0 || nonzero & c == 0)
}

/// Sides carrying weight on the face with vertex `pattern` and free splits `free`.
fn face_support(k: usize, pattern: u64, free: u64) -> u128 {
    (0..k).fold(0u128, |acc, i| {
        if free >> i & 1 == 1 {
            acc | 0b11u128 << (2 * i)
        } else {
            acc | 1u128 << (2 * i + (pattern >> i & 1) as usize)
        }
    })
}

fn check_size(s: &WeightedSplitSystem, bound: usize) -> Result<()> {
    let bound = bound.min(63);
    if s.len() > bound {
        return Err(Error::TooManySplits { count: s.len(), bound });
    }
    Ok(())
}

pub fn side_label(s: &WeightedSplitSystem, side: usize) -> String {
    let sp = s.split(side / 2);
    let mask = if side % 2 == 0 { sp.side_a() } else { sp.side_b() };
    let names: Vec<&str> = crate::split::Split::indices(mask)
        .into_iter()
        .map(|i| s.ground()[i].as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Membership in the hypercube and the Buneman complex.
pub fn in_buneman(s: &WeightedSplitSystem, mu: &BunemanPoint) -> Result<bool> {
    let k = s.len();
    if mu.coords.len() < 2 * k {
        return Err(Error::MissingCoordinate(side_label(s, mu.coords.len())));
    }
    if mu.coords.len() > 2 * k || k > 64 {
        return Err(Error::SystemMismatch);
    }
    for i in 0..k {
        let (a, b) = (&mu.coords[2 * i], &mu.coords[2 * i + 1]);
        if a.is_negative() || b.is_negative() || a + b != *s.weight(i) {
            return Ok(false);
        }
    }
    let nonzero = mu
        .coords
        .iter()
        .enumerate()
        .fold(0u128, |acc, (p, c)| if c.is_zero() { acc } else { acc | 1u128 << p });
    Ok(support_ok(&conflicts(s), nonzero))
}

/// The hypercube vertex with the given pattern.
pub fn vertex_point(s: &WeightedSplitSystem, pattern: u64) -> BunemanPoint {
    let mut coords = vec![Rat::zero(); 2 * s.len()];
    for i in 0..s.len() {
        coords[2 * i + (pattern >> i & 1) as usize] = s.weight(i).clone();
    }
    BunemanPoint { coords }
}

/// Pattern of `Φ(x)`: bit `i` set iff `x` is not on the first side of split `i`.
pub fn phi_pattern(s: &WeightedSplitSystem, x: usize) -> u64 {
    (0..s.len()).fold(0u64, |acc, i| acc | u64::from(!s.split(i).in_a(x)) << i)
}

pub fn phi(s: &WeightedSplitSystem, x: usize) -> BunemanPoint {
    vertex_point(s, phi_pattern(s, x))
}

/// `½ Σ_A |μ(A) − ν(A)|`.
pub fn d1(mu: &BunemanPoint, nu: &BunemanPoint) -> Rat {
    let total = mu
        .coords
        .iter()
        .zip(&nu.coords)
        .fold(Rat::zero(), |acc, (a, b)| acc + (a - b).abs());
    total * half()
}

/// `Λ(μ)(x) = Σ_{A ∌ x} μ(A)`.
pub fn lambda_map(s: &WeightedSplitSystem, mu: &BunemanPoint) -> Vec<Rat> {
    (0..s.ground_size())
        .map(|x| {
            (0..s.len()).fold(Rat::zero(), |acc, i| {
                // x misses exactly one side of each split.
                let missed = if s.split(i).in_a(x) { 2 * i + 1 } else { 2 * i };
                acc + &mu.coords[missed]
            })
        })
        .collect()
}

/// `μ(A) / ws(A)`, a value in `[0, 1]`.
pub fn lambda_a(s: &WeightedSplitSystem, mu: &BunemanPoint, side: usize) -> Rat {
    &mu.coords[side] / s.weight(side / 2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BunemanEdge {
    pub ends: (usize, usize),
    pub split: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BunemanQuad {
    /// Vertex indices `[p, p^i, p^j, p^i^j]`.
    pub corners: [usize; 4],
    pub splits: (usize, usize),
}

/// Vertices, edges and quadrangles of the Buneman complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BunemanSkeleton {
    /// Sorted vertex patterns.
    pub vertices: Vec<u64>,
    pub edges: Vec<BunemanEdge>,
    pub quads: Vec<BunemanQuad>,
}

impl BunemanSkeleton {
    pub fn index_of(&self, pattern: u64) -> Option<usize> {
        self.vertices.binary_search(&pattern).ok()
    }

    pub fn pattern_string(pattern: u64, k: usize) -> String {
        (0..k).map(|i| if pattern >> i & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn to_dot(&self, s: &WeightedSplitSystem) -> String {
        let k = s.len();
        let mut out = String::from("graph buneman {\n");
        for (v, &p) in self.vertices.iter().enumerate() {
            let terminals: Vec<&str> = (0..s.ground_size())
                .filter(|&x| phi_pattern(s, x) == p)
                .map(|x| s.ground()[x].as_str())
                .collect();
            let shape = if terminals.is_empty() { "circle" } else { "box" };
            let label = if terminals.is_empty() {
                Self::pattern_string(p, k)
            } else {
                format!("{} {}", terminals.join(","), Self::pattern_string(p, k))
            };
            let _ = writeln!(out, "  b{v} [label=\"{label}\", shape={shape}];");
        }
        for e in &self.edges {
            let _ = writeln!(out, "  b{} -- b{} [label=\"{}\"];", e.ends.0, e.ends.1, s.weight(e.split));
        }
        out.push_str("}\n");
        out
    }

    /// One line per vertex with its coordinates, then edges and quads.
    pub fn dump(&self, s: &WeightedSplitSystem) -> String {
        let k = s.len();
        let mut out = String::new();
        for &p in &self.vertices {
            let mu = vertex_point(s, p);
            let coords: Vec<String> = (0..2 * k)
                .map(|side| format!("{}={}", side_label(s, side), mu.coords[side]))
                .collect();
            let _ = writeln!(out, "vertex {} {}", Self::pattern_string(p, k), coords.join(" "));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "edge {} {} split {}",
                Self::pattern_string(self.vertices[e.ends.0], k),
                Self::pattern_string(self.vertices[e.ends.1], k),
                e.split
            );
        }
        for q in &self.quads {
            let _ = writeln!(
                out,
                "quad {} splits {} {}",
                Self::pattern_string(self.vertices[q.corners[0]], k),
                q.splits.0,
                q.splits.1
            );
        }
        out
    }
}

/// Vertex patterns of the Buneman complex, sorted.
pub fn buneman_vertices(s: &WeightedSplitSystem) -> Result<Vec<u64>> {
    buneman_vertices_bounded(s, VERTEX_BOUND)
}

pub fn buneman_vertices_bounded(s: &WeightedSplitSystem, bound: usize) -> Result<Vec<u64>> {
    check_size(s, bound)?;
    let k = s.len();
    let conf = conflicts(s);
    Ok((0..1u64 << k)
        .filter(|&p| support_ok(&conf, face_support(k, p, 0)))
        .collect())
}

pub fn buneman_skeleton(s: &WeightedSplitSystem) -> Result<BunemanSkeleton> {
    buneman_skeleton_bounded(s, VERTEX_BOUND)
}

pub fn buneman_skeleton_bounded(s: &WeightedSplitSystem, bound: usize) -> Result<BunemanSkeleton> {
    let vertices = buneman_vertices_bounded(s, bound)?;
    let k = s.len();
    let conf = conflicts(s);
    let index = |p: u64| vertices.binary_search(&p).ok();
    let mut edges = Vec::new();
    let mut quads = Vec::new();
    for (a, &p) in vertices.iter().enumerate() {
        for i in 0..k {
            if p >> i & 1 == 1 {
                continue;
            }
            let Some(b) = index(p | 1 << i) else { continue };
            if support_ok(&conf, face_support(k, p, 1 << i)) {
                edges.push(BunemanEdge { ends: (a, b), split: i });
            }
            for j in (i + 1)..k {
                if p >> j & 1 == 1 || !crate::split::incompatible(s.split(i), s.split(j)) {
                    continue;
                }
                let (Some(c), Some(d)) = (index(p | 1 << j), index(p | 1 << i | 1 << j)) else {
                    continue;
                };
                if support_ok(&conf, face_support(k, p, 1 << i | 1 << j)) {
                    quads.push(BunemanQuad { corners: [a, b, c, d], splits: (i, j) });
                }
            }
        }
    }
    Ok(BunemanSkeleton { vertices, edges, quads })
}

/// A cell of the skeleton: a vertex, an edge or a quadrangle (by index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
    Quad(usize),
}

/// Solves `Σ_j c_j · cols[j] = rhs` exactly; `None` if inconsistent or not unique.
fn solve_exact(cols: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let m = rhs.len();
    let n = cols.len();
    let mut rows: Vec<Vec<Rat>> = (0..m)
        .map(|r| {
            let mut row: Vec<Rat> = cols.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        let Some(r) = (pivot_row..m).find(|&r| !rows[r][col].is_zero()) else {
            return None;
        };
        rows.swap(pivot_row, r);
        let p = rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v /= &p;
        }
        for r in 0..m {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in 0..=n {
                    let delta = &f * &rows[pivot_row][c];
                    rows[r][c] -= delta;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&r| rows[r][n].clone()).collect())
}

fn open_unit(t: &Rat) -> bool {
    t.is_positive() && *t < Rat::from_integer(1.into())
}

/// A point `μ` of the skeleton with `Λ(μ) = f`, and the open cell containing it.
///
/// Cells are tried in order of dimension, so vertices are preferred.
pub fn lambda_preimage(
    s: &WeightedSplitSystem,
    skel: &BunemanSkeleton,
    f: &[Rat],
) -> Option<(BunemanPoint, Cell)> {
    let images: Vec<Vec<Rat>> = skel.vertices.iter().map(|&p| lambda_map(s, &vertex_point(s, p))).collect();
    if let Some(v) = images.iter().position(|img| img.as_slice() == f) {
        return Some((vertex_point(s, skel.vertices[v]), Cell::Vertex(v)));
    }
    let diff = |a: usize, b: usize| -> Vec<Rat> { images[b].iter().zip(&images[a]).map(|(x, y)| x - y).collect() };
    let offset = |a: usize| -> Vec<Rat> { f.iter().zip(&images[a]).map(|(x, y)| x - y).collect() };
    for (e, edge) in skel.edges.iter().enumerate() {
        let (a, b) = edge.ends;
        if let Some(t) = solve_exact(&[diff(a, b)], &offset(a)) {
            if open_unit(&t[0]) {
                let mut mu = vertex_point(s, skel.vertices[a]);
                let w = s.weight(edge.split);
                mu.coords[2 * edge.split + 1] = &t[0] * w;
                mu.coords[2 * edge.split] = w - &mu.coords[2 * edge.split + 1];
                return Some((mu, Cell::Edge(e)));
            }
        }
    }
    for (qi, quad) in skel.quads.iter().enumerate() {
        let [a, b, c, _] = quad.corners;
        if let Some(t) = solve_exact(&[diff(a, b), diff(a, c)], &offset(a)) {
            if open_unit(&t[0]) && open_unit(&t[1]) {
                let mut mu = vertex_point(s, skel.vertices[a]);
                for (split, ti) in [(quad.splits.0, &t[0]), (quad.splits.1, &t[1])] {
                    let w = s.weight(split);
                    mu.coords[2 * split + 1] = ti * w;
                    mu.coords[2 * split] = w - &mu.coords[2 * split + 1];
                }
                return Some((mu, Cell::Quad(qi)));
            }
        }
    }
    None
}
