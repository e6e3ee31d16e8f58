use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CaseResult;
use crate::backend::BackendId;
use crate::envgen::Family;
use crate::frontend::FrontendId;

/// Minimum number of maps for a meaningful rank correlation.
const MIN_MAPS: usize = 30;

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// column is constant or fewer than two pairs are given.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "columns must have equal length");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let m = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (rx[i] - m, ry[i] - m);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Per-map point of the complexity scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapScatter {
    pub case_id: String,
    pub d: f64,
    pub c: f64,
    pub s: f64,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Maps with a complete signature.
    pub maps: usize,
    /// False when fewer maps than needed for a meaningful estimate.
    pub sufficient: bool,
    /// Spearman coefficients against the per-map failure count; `None` is undefined.
    pub density: Option<f64>,
    pub clutter: Option<f64>,
    pub structure: Option<f64>,
    #[serde(skip)]
    pub scatter: Vec<MapScatter>,
}

/// Rank-correlates each signature component with the number of failed runs per map.
pub fn correlate_ecs(results: &[CaseResult]) -> CorrelationReport {
    let mut maps: BTreeMap<&str, MapScatter> = BTreeMap::new();
    for r in results {
        let (Some(d), Some(c), Some(s)) = (r.density, r.clutter, r.structure) else {
            continue;
        };
        let e = maps.entry(&r.case_id).or_insert_with(|| MapScatter {
            case_id: r.case_id.clone(),
            d,
            c,
            s,
            successes: 0,
            failures: 0,
        });
        if r.success() {
            e.successes += 1;
        } else {
            e.failures += 1;
        }
    }
    let scatter: Vec<MapScatter> = maps.into_values().collect();
    let fails: Vec<f64> = scatter.iter().map(|m| m.failures as f64).collect();
    let col = |f: fn(&MapScatter) -> f64| -> Option<f64> {
        let x: Vec<f64> = scatter.iter().map(f).collect();
        spearman(&x, &fails)
    };
    CorrelationReport {
        maps: scatter.len(),
        sufficient: scatter.len() >= MIN_MAPS,
        density: col(|m| m.d),
        clutter: col(|m| m.c),
        structure: col(|m| m.s),
        scatter,
    }
}

/// Aggregates for one (family, front-end, back-end) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub family: Family,
    pub frontend: FrontendId,
    pub backend: BackendId,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub collisions: usize,
    /// Runs whose output reached validation.
    pub returned: usize,
    /// Collisions over all runs.
    pub collision_rate: f64,
    /// Collisions over returned runs.
    pub collision_rate_returned: Option<f64>,
    pub mean_fe_time_ms: f64,
    pub max_fe_time_ms: f64,
    pub mean_be_time_ms: Option<f64>,
    pub mean_total_time_ms: f64,
    /// Over successful runs.
    pub mean_traj_duration: Option<f64>,
    pub mean_sq_jerk: Option<f64>,
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for v in it {
        s += v;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Groups rows by (family, front-end, back-end) in sorted order.
pub fn summarize(results: &[CaseResult]) -> Vec<GroupSummary> {
    let mut groups: BTreeMap<(Family, FrontendId, BackendId), Vec<&CaseResult>> = BTreeMap::new();
    for r in results {
        groups
            .entry((r.family, r.frontend, r.backend))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((family, frontend, backend), rows)| {
            let runs = rows.len();
            let successes = rows.iter().filter(|r| r.success()).count();
            let collisions = rows.iter().filter(|r| r.collision).count();
            let returned = rows.iter().filter(|r| r.returned()).count();
            GroupSummary {
                family,
                frontend,
                backend,
                runs,
                successes,
                success_rate: successes as f64 / runs as f64,
                collisions,
                returned,
                collision_rate: collisions as f64 / runs as f64,
                collision_rate_returned: (returned > 0)
                    .then(|| collisions as f64 / returned as f64),
                mean_fe_time_ms: mean(rows.iter().map(|r| r.fe_time_ms)).unwrap_or(0.0),
                max_fe_time_ms: rows.iter().map(|r| r.fe_time_ms).fold(0.0, f64::max),
                mean_be_time_ms: mean(rows.iter().filter_map(|r| r.be_time_ms)),
                mean_total_time_ms: mean(rows.iter().map(|r| r.total_time_ms)).unwrap_or(0.0),
                mean_traj_duration: mean(
                    rows.iter()
                        .filter(|r| r.success())
                        .filter_map(|r| r.traj_duration),
                ),
                mean_sq_jerk: mean(
                    rows.iter()
                        .filter(|r| r.success())
                        .filter_map(|r| r.mean_sq_jerk),
                ),
            }
        })
        .collect()
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Maps generated before filtering, when known.
    pub generated: Option<usize>,
    /// Maps that passed the feasibility filter.
    pub maps: usize,
    pub runs: usize,
    pub groups: Vec<GroupSummary>,
    pub correlation: CorrelationReport,
}

impl Summary {
    pub fn new(results: &[CaseResult], generated: usize, maps: usize) -> Self {
        Summary {
            generated: Some(generated),
            maps,
            ..Self::from_results(results)
        }
    }

    /// Everything recomputable from the rows alone.
    pub fn from_results(results: &[CaseResult]) -> Self {
        let mut ids: Vec<&str> = results.iter().map(|r| r.case_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        Summary {
            generated: None,
            maps: ids.len(),
            runs: results.len(),
            groups: summarize(results),
            correlation: correlate_ecs(results),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 40.0]), Some(1.0));
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]), None);
        // Ties get average ranks: matches the textbook value.
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - 0.9486832980505138).abs() < 1e-12);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }
}
