//! Splits of a finite ground set, weighted split systems, the induced metric
//! and split decomposition.

use std::collections::HashSet;
use std::fmt;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{validate_metric, FiniteMetric};
use crate::rational::{half, parse_rat, Rat};

/// Largest ground set a split bitmask can hold.
pub const MAX_GROUND: usize = 64;
/// Default bound for the exhaustive candidate search in [`decompose`].
pub const DECOMPOSE_BOUND: usize = 16;
/// Default bound for [`is_octahedral_free`].
pub const OCTAHEDRAL_BOUND: usize = 16;

/// A bipartition `{A, B}` of `{0, .., n-1}`, stored by the side containing 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Split {
    a: u64,
    n: usize,
}

fn full(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl Split {
    /// Builds the split with one side `side`; either side may be given.
    pub fn new(side: u64, n: usize) -> Result<Split> {
        if n < 2 || n > MAX_GROUND {
            return Err(Error::InvalidSplit(format!("ground set size {n}")));
        }
        let all = full(n);
        if side & !all != 0 {
            return Err(Error::InvalidSplit("side outside the ground set".into()));
        }
        if side == 0 || side == all {
            return Err(Error::InvalidSplit("empty side".into()));
        }
        let a = if side & 1 == 1 { side } else { all & !side };
        Ok(Split { a, n })
    }

    pub fn from_indices(side: &[usize], n: usize) -> Result<Split> {
        let mut mask = 0u64;
        for &i in side {
            if i >= n {
                return Err(Error::InvalidSplit(format!("index {i} outside ground set")));
            }
            mask |= 1 << i;
        }
        Split::new(mask, n)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// Side containing point 0.
    pub fn side_a(&self) -> u64 {
        self.a
    }

    pub fn side_b(&self) -> u64 {
        full(self.n) & !self.a
    }

    pub fn in_a(&self, i: usize) -> bool {
        self.a >> i & 1 == 1
    }

    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.in_a(i) != self.in_a(j)
    }

    pub fn indices(side: u64) -> Vec<usize> {
        (0..64).filter(|i| side >> i & 1 == 1).collect()
    }

    /// Renders as `a b | c d` using the given labels.
    pub fn display_with(&self, labels: &[String]) -> String {
        let name = |m: u64| {
            Split::indices(m)
                .into_iter()
                .map(|i| labels[i].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("{} | {}", name(self.side_a()), name(self.side_b()))
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (1..=self.n).map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", self.display_with(&labels))
    }
}

/// All four intersections `A∩A'`, `A∩B'`, `B∩A'`, `B∩B'` are nonempty.
pub fn incompatible(s1: &Split, s2: &Split) -> bool {
    let (a, b) = (s1.side_a(), s1.side_b());
    let (c, d) = (s2.side_a(), s2.side_b());
    a & c != 0 && a & d != 0 && b & c != 0 && b & d != 0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedSplitSystem {
    ground: Vec<String>,
    /// Sorted by split, weights positive.
    splits: Vec<(Split, Rat)>,
}

impl WeightedSplitSystem {
    pub fn new(ground: Vec<String>, entries: Vec<(Split, Rat)>) -> Result<Self> {
        let n = ground.len();
        if n < 2 {
            return Err(Error::TooFewPoints);
        }
        if n > MAX_GROUND {
            return Err(Error::GroundSetTooLarge { size: n, bound: MAX_GROUND });
        }
        let mut seen = HashSet::new();
        for l in &ground {
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut splits = entries;
        for (s, w) in &splits {
            if s.ground_size() != n {
                return Err(Error::InvalidSplit(format!("{s} is over a different ground set")));
            }
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight(w.clone()));
            }
        }
        splits.sort_by(|x, y| x.0.cmp(&y.0));
        for pair in splits.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateSplit(pair[0].0.display_with(&ground)));
            }
        }
        Ok(WeightedSplitSystem { ground, splits })
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn ground_size(&self) -> usize {
        self.ground.len()
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    pub fn splits(&self) -> &[(Split, Rat)] {
        &self.splits
    }

    pub fn split(&self, i: usize) -> &Split {
        &self.splits[i].0
    }

    pub fn weight(&self, i: usize) -> &Rat {
        &self.splits[i].1
    }

    pub fn position(&self, s: &Split) -> Option<usize> {
        self.splits.binary_search_by(|(t, _)| t.cmp(s)).ok()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.ground.iter().position(|l| l == label)
    }

    /// Parses lines `A labels | B labels : weight`.
    ///
    /// A `# ground: a b c` line fixes the label order; otherwise labels are
    /// numbered in order of first appearance. Other `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ground: Vec<String> = Vec::new();
        let mut fixed = false;
        let mut rows: Vec<(Vec<String>, Vec<String>, Rat)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("ground:") {
                    if fixed || !rows.is_empty() {
                        return Err(Error::Parse(format!("line {}: ground header must come first", lineno + 1)));
                    }
                    ground = rest.split_whitespace().map(str::to_string).collect();
                    fixed = true;
                }
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let (sides, weight) = line.rsplit_once(':').ok_or_else(|| err("expected ': weight'"))?;
            let (a, b) = sides.split_once('|').ok_or_else(|| err("expected 'A | B'"))?;
            let a: Vec<String> = a.split_whitespace().map(str::to_string).collect();
            let b: Vec<String> = b.split_whitespace().map(str::to_string).collect();
            if a.is_empty() || b.is_empty() {
                return Err(err("empty side"));
            }
            let w = parse_rat(weight.trim()).map_err(|e| err(&e.to_string()))?;
            if !fixed {
                for l in a.iter().chain(&b) {
                    if !ground.contains(l) {
                        ground.push(l.clone());
                    }
                }
            }
            rows.push((a, b, w));
        }
        let n = ground.len();
        let mut entries = Vec::new();
        for (a, b, w) in rows {
            let mut mask_a = 0u64;
            let mut mask_b = 0u64;
            for l in &a {
                let i = ground.iter().position(|g| g == l).ok_or_else(|| Error::UnknownLabel(l.clone()))?;
                mask_a |= 1 << i;
            }
            for l in &b {
                let i = ground.iter().position(|g| g == l).ok_or_else(|| Error::UnknownLabel(l.clone()))?;
                mask_b |= 1 << i;
            }
            if mask_a & mask_b != 0 || (mask_a | mask_b) != full(n) || mask_a.count_ones() as usize != a.len()
                || mask_b.count_ones() as usize != b.len()
            {
                return Err(Error::InvalidSplit(format!("{} | {} is not a bipartition of the ground set", a.join(" "), b.join(" "))));
            }
            entries.push((Split::new(mask_a, n)?, w));
        }
        WeightedSplitSystem::new(ground, entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# ground: {}\n", self.ground.join(" "));
        for (s, w) in &self.splits {
            out.push_str(&format!("{} : {}\n", s.display_with(&self.ground), w));
        }
        out
    }
}

/// `d(x, y)` = total weight of the splits separating `x` and `y`.
pub fn split_metric(s: &WeightedSplitSystem) -> Result<FiniteMetric> {
    let n = s.ground_size();
    let mut d = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut total = Rat::zero();
            for (sp, w) in s.splits() {
                if sp.separates(i, j) {
                    total += w;
                }
            }
            if total.is_zero() {
                return Err(Error::NotSeparated(s.ground[i].clone(), s.ground[j].clone()));
            }
            d[i][j] = total.clone();
            d[j][i] = total;
        }
    }
    validate_metric(d, s.ground.clone())
}

/// `max{d(x,u)+d(y,v), d(x,v)+d(y,u)} - d(x,y) - d(u,v)`.
pub fn beta(m: &FiniteMetric, x: usize, y: usize, u: usize, v: usize) -> Rat {
    let p = m.d(x, u) + m.d(y, v);
    let q = m.d(x, v) + m.d(y, u);
    p.max(q) - m.d(x, y) - m.d(u, v)
}

pub fn alpha(m: &FiniteMetric, x: usize, y: usize, u: usize, v: usize) -> Rat {
    beta(m, x, y, u, v).max(Rat::zero())
}

/// First quintuple `[t, x, y, u, v]` (lexicographic) violating
/// `β(x,y;u,v) ≤ α(x,t;u,v) + α(x,y;u,t)`, if any.
pub fn total_decomposability_witness(m: &FiniteMetric) -> Option<[usize; 5]> {
    let n = m.len();
    (0..n).find_map(|t| {
        for x in 0..n {
            for y in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        if beta(m, x, y, u, v) > alpha(m, x, t, u, v) + alpha(m, x, y, u, t) {
                            return Some([t, x, y, u, v]);
                        }
                    }
                }
            }
        }
        None
    })
}

pub fn is_totally_decomposable(m: &FiniteMetric) -> bool {
    total_decomposability_witness(m).is_none()
}

/// Isolation index of the bipartition `a | b` (as bitmasks) with respect to `m`.
pub fn isolation_index(m: &FiniteMetric, a: u64, b: u64) -> Rat {
    let sa = Split::indices(a);
    let sb = Split::indices(b);
    let mut best: Option<Rat> = None;
    for &x in &sa {
        for &x2 in &sa {
            for &y in &sb {
                for &y2 in &sb {
                    let p = m.d(x, y) + m.d(x2, y2);
                    let q = m.d(x, y2) + m.d(x2, y);
                    let r = m.d(x, x2) + m.d(y, y2);
                    let val = p.max(q).max(r.clone()) - r;
                    if best.as_ref().map_or(true, |b| val < *b) {
                        if val.is_zero() {
                            return val;
                        }
                        best = Some(val);
                    }
                }
            }
        }
    }
    best.expect("nonempty sides") * half()
}

/// Split decomposition of a totally decomposable metric, with the default
/// ground-set bound.
pub fn decompose(m: &FiniteMetric) -> Result<WeightedSplitSystem> {
    decompose_bounded(m, DECOMPOSE_BOUND)
}

pub fn decompose_bounded(m: &FiniteMetric, bound: usize) -> Result<WeightedSplitSystem> {
    let n = m.len();
    if n > bound {
        return Err(Error::GroundSetTooLarge { size: n, bound });
    }
    if let Some(w) = total_decomposability_witness(m) {
        return Err(Error::NotTotallyDecomposable(w));
    }
    let all = full(n);
    let mut entries: Vec<(Split, Rat)> = (0u64..(1u64 << (n - 1)))
        .into_par_iter()
        .filter_map(|rest| {
            // Side containing point 0: bit 0 plus any subset of the others.
            let a = 1 | (rest << 1);
            if a == all {
                return None;
            }
            let idx = isolation_index(m, a, all & !a);
            idx.is_positive().then(|| (Split::new(a, n).expect("proper split"), idx))
        })
        .collect();
    entries.sort_by(|x, y| x.0.cmp(&y.0));
    let system = WeightedSplitSystem::new(m.labels().to_vec(), entries)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut total = Rat::zero();
            for (s, w) in system.splits() {
                if s.separates(i, j) {
                    total += w;
                }
            }
            if total != *m.d(i, j) {
                return Err(Error::ResidueNonZero(i, j));
            }
        }
    }
    Ok(system)
}

/// A triple of pairwise incompatible splits (indices into the system), if any.
pub fn two_compatibility_witness(s: &WeightedSplitSystem) -> Option<[usize; 3]> {
    let k = s.len();
    for i in 0..k {
        for j in (i + 1)..k {
            if !incompatible(s.split(i), s.split(j)) {
                continue;
            }
            for l in (j + 1)..k {
                if incompatible(s.split(i), s.split(l)) && incompatible(s.split(j), s.split(l)) {
                    return Some([i, j, l]);
                }
            }
        }
    }
    None
}

pub fn is_two_compatible(s: &WeightedSplitSystem) -> bool {
    two_compatibility_witness(s).is_none()
}

/// A triple of splits for which every choice of one side per split has a
/// common point, if any.
pub fn weak_compatibility_witness(s: &WeightedSplitSystem) -> Option<[usize; 3]> {
    let k = s.len();
    let sides = |i: usize| [s.split(i).side_a(), s.split(i).side_b()];
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                let ok = sides(i)
                    .iter()
                    .any(|a| sides(j).iter().any(|b| sides(l).iter().any(|c| a & b & c == 0)));
                if !ok {
                    return Some([i, j, l]);
                }
            }
        }
    }
    None
}

pub fn is_weakly_compatible(s: &WeightedSplitSystem) -> bool {
    weak_compatibility_witness(s).is_none()
}

/// Bit `r` of entry `b`: block `X(b+1)` lies on the first side of split `r+1`.
const OCTAHEDRAL_BLOCKS: [u8; 6] = [0b1001, 0b0011, 0b1111, 0b0110, 0b1100, 0b0000];

/// Witness for the failure of octahedral-freeness: split indices `[i1..i4]`
/// and the partition block (0-based) of every ground point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OctahedralWitness {
    pub splits: [usize; 4],
    pub blocks: Vec<usize>,
}

pub fn octahedral_witness(s: &WeightedSplitSystem, bound: usize) -> Result<Option<OctahedralWitness>> {
    let n = s.ground_size();
    if n > bound {
        return Err(Error::GroundSetTooLarge { size: n, bound });
    }
    if n < 6 {
        return Ok(None);
    }
    let k = s.len();
    // Bit r of a point's signature: the point lies on side A of the r-th split.
    let signature = |quad: &[usize; 4], p: usize| -> u8 {
        quad.iter()
            .enumerate()
            .fold(0u8, |acc, (r, &i)| acc | (u8::from(s.split(i).in_a(p)) << r))
    };
    let patterns = OCTAHEDRAL_BLOCKS;
    for i1 in 0..k {
        for i2 in 0..k {
            for i3 in 0..k {
                for i4 in 0..k {
                    let quad = [i1, i2, i3, i4];
                    if (1..4).any(|a| quad[..a].contains(&quad[a])) {
                        continue;
                    }
                    let sigs: Vec<u8> = (0..n).map(|p| signature(&quad, p)).collect();
                    for flip in 0u8..16 {
                        let blocks: Option<Vec<usize>> = sigs
                            .iter()
                            .map(|&g| patterns.iter().position(|&pat| pat == g ^ flip))
                            .collect();
                        if let Some(blocks) = blocks {
                            if (0..6).all(|b| blocks.contains(&b)) {
                                return Ok(Some(OctahedralWitness { splits: quad, blocks }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

pub fn is_octahedral_free(s: &WeightedSplitSystem, bound: usize) -> Result<bool> {
    Ok(octahedral_witness(s, bound)?.is_none())
}
