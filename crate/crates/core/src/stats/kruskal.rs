use serde::Serialize;

use super::special::{chi2_sf, normal_two_sided};
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KruskalResult {
    pub h: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Pooled mid-ranks of every observation, grouped as the input, plus the
/// tie sum Σ(t³ − t) over tie blocks.
pub(crate) struct Ranked {
    pub ranks: Vec<Vec<f64>>,
    pub n: usize,
    pub tie_sum: f64,
}

pub(crate) fn rank_groups(groups: &[Vec<f64>]) -> Result<Ranked, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(StatsError::EmptyGroup(i));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    if n < 3 {
        return Err(StatsError::TooFewObservations(n));
    }
    let mut pooled: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    for (g, values) in groups.iter().enumerate() {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(StatsError::NonFinite);
            }
            pooled.push((v, g, i));
        }
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut ranks: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut tie_sum = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        // positions start..end share the mean of ranks start+1..=end
        let mid = (start + end + 1) as f64 / 2.0;
        for &(_, g, i) in &pooled[start..end] {
            ranks[g][i] = mid;
        }
        let t = (end - start) as f64;
        tie_sum += t * t * t - t;
        start = end;
    }
    Ok(Ranked { ranks, n, tie_sum })
}

/// Kruskal-Wallis H test with tie correction. When every observation is
/// tied, H is 0 and p is 1.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalResult, StatsError> {
    let ranked = rank_groups(groups)?;
    let n = ranked.n as f64;
    let df = (groups.len() - 1) as u32;
    let correction = 1.0 - ranked.tie_sum / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalResult { h: 0.0, df, p_value: 1.0 });
    }
    let sum: f64 = ranked
        .ranks
        .iter()
        .map(|r| {
            let total: f64 = r.iter().sum();
            total * total / r.len() as f64
        })
        .sum();
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(KruskalResult { h, df, p_value: chi2_sf(h, df) })
}

/// Pairwise Dunn statistics with Bonferroni-adjusted two-sided p-values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DunnMatrix {
    pub labels: Vec<String>,
    pub z: Vec<Vec<f64>>,
    pub raw: Vec<Vec<f64>>,
    pub adjusted: Vec<Vec<f64>>,
}

impl DunnMatrix {
    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.labels.len(), "one label per group");
        self.labels = labels;
        self
    }
}

pub fn dunn_bonferroni(groups: &[Vec<f64>]) -> Result<DunnMatrix, StatsError> {
    let ranked = rank_groups(groups)?;
    let k = groups.len();
    let n = ranked.n as f64;
    let m = (k * (k - 1) / 2) as f64;
    let mean_rank: Vec<f64> = ranked
        .ranks
        .iter()
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    let variance = n * (n + 1.0) / 12.0 - ranked.tie_sum / (12.0 * (n - 1.0));

    let mut z = vec![vec![0.0; k]; k];
    let mut raw = vec![vec![1.0; k]; k];
    let mut adjusted = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let se = (variance * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let zij = if se > 0.0 { (mean_rank[i] - mean_rank[j]) / se } else { 0.0 };
            let p = normal_two_sided(zij);
            z[i][j] = zij;
            raw[i][j] = p;
            adjusted[i][j] = (m * p).min(1.0);
        }
    }
    Ok(DunnMatrix {
        labels: (1..=k).map(|i| i.to_string()).collect(),
        z,
        raw,
        adjusted,
    })
}
