//! Finite metric spaces over labelled points and their plain-text format.
//!
//! Text format: the first line holds `n`, the second line `n` labels, then the
//! strictly lower-triangular rows (row `i` holds `d(i,0) .. d(i,i-1)`). Rows
//! that also carry the zero diagonal entry are accepted. Entries are integers
//! or `p/q`. Lines starting with `#` are comments.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rat, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteMetric {
    labels: Vec<String>,
    dist: Vec<Vec<Rat>>,
}

/// Checks the metric axioms and builds a [`FiniteMetric`].
///
/// Error witnesses use 0-based indices. A triangle witness `(i, j, k)` means
/// `d(i,j) > d(i,k) + d(k,j)`.
pub fn validate_metric(matrix: Vec<Vec<Rat>>, labels: Vec<String>) -> Result<FiniteMetric> {
    let n = labels.len();
    if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Shape { labels: n });
    }
    if n < 2 {
        return Err(Error::TooFewPoints);
    }
    let mut seen = HashSet::new();
    for l in &labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    for i in 0..n {
        if !matrix[i][i].is_zero() {
            return Err(Error::NonZeroDiagonal(i));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(Error::NotSymmetric(i, j));
            }
            if matrix[i][j].is_negative() {
                return Err(Error::NegativeEntry(i, j));
            }
            if matrix[i][j].is_zero() {
                return Err(Error::ZeroOffDiagonal(i, j));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if matrix[i][j] > &matrix[i][k] + &matrix[k][j] {
                    return Err(Error::TriangleViolation(i, j, k));
                }
            }
        }
    }
    Ok(FiniteMetric { labels, dist: matrix })
}

impl FiniteMetric {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn d(&self, i: usize, j: usize) -> &Rat {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.dist
    }

    /// Same metric with points reordered: new point `k` is old point `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> FiniteMetric {
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let dist = order
            .iter()
            .map(|&i| order.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        FiniteMetric { labels, dist }
    }

    pub fn parse(text: &str) -> Result<FiniteMetric> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty metric file".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be the number of points".into()))?;
        let labels: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Parse("missing label line".into()))?
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        if labels.len() != n {
            return Err(Error::Parse(format!("expected {n} labels, found {}", labels.len())));
        }
        let rows: Vec<Vec<Rat>> = lines
            .map(|l| l.split_whitespace().map(parse_rat).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut matrix = vec![vec![Rat::zero(); n]; n];
        let with_diagonal = rows.len() == n && rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
        let strict = rows.len() + 1 == n && rows.iter().enumerate().all(|(i, r)| r.len() == i + 1);
        if !(with_diagonal || strict) {
            return Err(Error::Parse("rows do not form a lower triangle".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            let i = if strict { r + 1 } else { r };
            for (j, v) in row.iter().enumerate() {
                if j == i {
                    if !v.is_zero() {
                        return Err(Error::NonZeroDiagonal(i));
                    }
                    continue;
                }
                matrix[i][j] = v.clone();
                matrix[j][i] = v.clone();
            }
        }
        validate_metric(matrix, labels)
    }

    /// Inverse of [`FiniteMetric::parse`], strict lower triangle.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.len());
        let _ = writeln!(out, "{}", self.labels.join(" "));
        for i in 1..self.len() {
            let row: Vec<String> = (0..i).map(|j| self.dist[i][j].to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn two_point_metric() {
        let d = validate_metric(m(&[&[0, 3], &[3, 0]]), vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(d.d(0, 1), &int(3));
    }

    #[test]
    fn triangle_violation_names_witness() {
        let err = validate_metric(m(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]), labels(3)).unwrap_err();
        assert_eq!(err, Error::TriangleViolation(0, 2, 1));
    }

    #[test]
    fn axiom_errors() {
        assert_eq!(
            validate_metric(m(&[&[0, 1], &[2, 0]]), labels(2)).unwrap_err(),
            Error::NotSymmetric(0, 1)
        );
        assert_eq!(
            validate_metric(m(&[&[0, -1], &[-1, 0]]), labels(2)).unwrap_err(),
            Error::NegativeEntry(0, 1)
        );
        assert_eq!(
            validate_metric(m(&[&[0, 0], &[0, 0]]), labels(2)).unwrap_err(),
            Error::ZeroOffDiagonal(0, 1)
        );
        assert_eq!(validate_metric(m(&[&[0]]), labels(1)).unwrap_err(), Error::TooFewPoints);
        assert!(matches!(
            validate_metric(m(&[&[0, 1]]), labels(2)).unwrap_err(),
            Error::Shape { .. }
        ));
    }

    #[test]
    fn text_round_trip() {
        let text = "4\na b c d\n1\n2 1\n1 2 1\n";
        let d = FiniteMetric::parse(text).unwrap();
        assert_eq!(d.to_text(), text);
        let with_diag = "# square\n4\na b c d\n0\n1 0\n2 1 0\n1 2 1 0\n";
        assert_eq!(FiniteMetric::parse(with_diag).unwrap(), d);
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(FiniteMetric::parse("3\na b c\n1\n2\n").is_err());
    }
}
