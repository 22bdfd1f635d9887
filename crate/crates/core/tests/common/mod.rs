#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use tightspan::metric::validate_metric;
use tightspan::rational::int;
use tightspan::FiniteMetric;

/// Metric on points `1..=n` from its upper triangle, row by row.
pub fn metric(n: usize, upper: &[i64]) -> FiniteMetric {
    let mut rows = vec![vec![int(0); n]; n];
    let mut it = upper.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = int(*it.next().expect("enough entries"));
            rows[i][j] = v.clone();
            rows[j][i] = v;
        }
    }
    validate_metric(rows, (1..=n).map(|i| i.to_string()).collect()).expect("valid metric")
}
