//! Average ranks, Friedman statistic and Nemenyi critical distance.

use std::fmt::Write as _;

use super::ResultRow;
use crate::{Error, Result};

/// Studentized range statistic divided by sqrt(2), alpha = 0.05, for k = 2..=20.
const Q_05: [f64; 19] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.94832, 3.030879, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.39123, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
];

/// Nemenyi q value for `k` methods. Only alpha = 0.05 is tabulated.
pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    if (alpha - 0.05).abs() > 1e-12 {
        return Err(Error::config(format!("unsupported alpha {alpha}; only 0.05 is available")));
    }
    if !(2..=20).contains(&k) {
        return Err(Error::config(format!("Nemenyi table covers 2 to 20 methods, got {k}")));
    }
    Ok(Q_05[k - 2])
}

/// Ranks one row by descending value; rank 1 is best and ties share the
/// average of the positions they span.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Column means of the per-row ranks.
pub fn average_ranks(matrix: &[Vec<f64>]) -> Vec<f64> {
    let k = matrix.first().map_or(0, Vec::len);
    let mut sums = vec![0.0; k];
    for row in matrix {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    sums.iter().map(|s| s / matrix.len() as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanNemenyi {
    pub average_ranks: Vec<f64>,
    pub critical_distance: f64,
    /// Friedman chi-square statistic with k - 1 degrees of freedom.
    pub chi_square: f64,
    pub n_methods: usize,
    pub n_datasets: usize,
}

/// `matrix[d][m]` is the accuracy of method `m` on dataset `d`.
pub fn friedman_nemenyi(matrix: &[Vec<f64>], alpha: f64) -> Result<FriedmanNemenyi> {
    let n = matrix.len();
    let k = matrix.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::config(format!(
            "need at least 2 datasets and 2 methods, got {n} x {k}"
        )));
    }
    for (d, row) in matrix.iter().enumerate() {
        if row.len() != k {
            return Err(Error::config(format!("dataset {d} has {} entries, expected {k}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(format!("dataset {d} has a missing entry")));
        }
    }
    let q = nemenyi_q(k, alpha)?;
    let ranks = average_ranks(matrix);
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = ranks.iter().map(|r| r * r).sum();
    let chi_square = 12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0);
    Ok(FriedmanNemenyi {
        average_ranks: ranks,
        critical_distance: q * (kf * (kf + 1.0) / (6.0 * nf)).sqrt(),
        chi_square,
        n_methods: k,
        n_datasets: n,
    })
}

/// Mean accuracy per (dataset, method) over seeds, with summary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    /// `accuracy[d][m]`, fraction in [0, 1].
    pub accuracy: Vec<Vec<f64>>,
    pub average_mean: Vec<f64>,
    pub average_rank: Vec<f64>,
}

/// Pivots result rows into a dataset x method table. Datasets and methods
/// keep their order of first appearance.
pub fn rank_table(rows: &[ResultRow]) -> Result<RankTable> {
    let mut datasets: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    for r in rows {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    if datasets.is_empty() {
        return Err(Error::config("no results to tabulate"));
    }
    let mut sums = vec![vec![(0.0, 0u32); methods.len()]; datasets.len()];
    for r in rows {
        let d = datasets.iter().position(|x| *x == r.dataset).unwrap();
        let m = methods.iter().position(|x| *x == r.method).unwrap();
        sums[d][m].0 += r.accuracy;
        sums[d][m].1 += 1;
    }
    let mut accuracy = Vec::with_capacity(datasets.len());
    for (d, row) in sums.iter().enumerate() {
        let mut out = Vec::with_capacity(methods.len());
        for (m, &(sum, count)) in row.iter().enumerate() {
            if count == 0 {
                return Err(Error::config(format!(
                    "no result for method {} on dataset {}",
                    methods[m], datasets[d]
                )));
            }
            out.push(sum / count as f64);
        }
        accuracy.push(out);
    }
    let average_mean = (0..methods.len())
        .map(|m| accuracy.iter().map(|row| row[m]).sum::<f64>() / accuracy.len() as f64)
        .collect();
    let average_rank = average_ranks(&accuracy);
    Ok(RankTable {
        datasets,
        methods,
        accuracy,
        average_mean,
        average_rank,
    })
}

impl RankTable {
    /// Accuracies as percentages with two decimals.
    pub fn render(&self) -> String {
        let name_w = self
            .datasets
            .iter()
            .map(String::len)
            .chain(["Average Mean".len()])
            .max()
            .unwrap_or(0);
        let col_w: Vec<usize> = self.methods.iter().map(|m| m.len().max(7)).collect();
        let mut out = String::new();
        let _ = write!(out, "{:<name_w$}", "Dataset");
        for (m, w) in self.methods.iter().zip(&col_w) {
            let _ = write!(out, "  {m:>w$}");
        }
        out.push('\n');
        let mut line = |label: &str, values: &[f64], scale: f64| {
            let _ = write!(out, "{label:<name_w$}");
            for (v, w) in values.iter().zip(&col_w) {
                let _ = write!(out, "  {:>w$.2}", v * scale);
            }
            out.push('\n');
        };
        for (d, row) in self.datasets.iter().zip(&self.accuracy) {
            line(d, row, 100.0);
        }
        line("Average Mean", &self.average_mean, 100.0);
        line("Rank", &self.average_rank, 1.0);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset");
        for m in &self.methods {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        let mut line = |label: &str, values: &[f64], scale: f64| {
            out.push_str(label);
            for v in values {
                let _ = write!(out, ",{:.4}", v * scale);
            }
            out.push('\n');
        };
        for (d, row) in self.datasets.iter().zip(&self.accuracy) {
            line(d, row, 100.0);
        }
        line("Average Mean", &self.average_mean, 100.0);
        line("Rank", &self.average_rank, 1.0);
        out
    }
}
