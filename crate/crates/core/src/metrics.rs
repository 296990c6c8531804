//! Agreement between a measured collectiveness series and its ground truth,
//! plus ROC-AUC for category separation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured and ground-truth values for the same frames.
#[derive(Debug, Clone, Copy)]
pub struct SeriesPair<'a> {
    measured: &'a [f64],
    truth: &'a [f64],
}

impl<'a> SeriesPair<'a> {
    pub fn new(measured: &'a [f64], truth: &'a [f64]) -> Result<Self> {
        if measured.len() != truth.len() {
            return Err(Error::InvalidInput(format!(
                "series lengths differ: {} vs {}",
                measured.len(),
                truth.len()
            )));
        }
        if measured.len() < 2 {
            return Err(Error::param("series need at least 2 frames"));
        }
        if measured.iter().chain(truth).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in series".into()));
        }
        Ok(Self { measured, truth })
    }

    pub fn len(&self) -> usize {
        self.measured.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measured.is_empty()
    }
}

/// Pearson correlation of the two series.
pub fn relevant_coefficient(p: &SeriesPair) -> Result<f64> {
    let n = p.len() as f64;
    let mx = p.measured.iter().sum::<f64>() / n;
    let my = p.truth.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in p.measured.iter().zip(p.truth) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Fraction of frame pairs whose measured order agrees with the true order.
/// Pairs tied in truth are not counted; ties in the measured series count
/// as wrong.
pub fn pairs_comparing_accuracy(p: &SeriesPair) -> Result<f64> {
    let (mut correct, mut considered) = (0u64, 0u64);
    let l = p.len();
    for a in 0..l {
        for b in (a + 1)..l {
            let truth = p.truth[a].partial_cmp(&p.truth[b]).expect("finite");
            if truth.is_eq() {
                continue;
            }
            considered += 1;
            if p.measured[a].partial_cmp(&p.measured[b]) == Some(truth) {
                correct += 1;
            }
        }
    }
    if considered == 0 {
        return Err(Error::Undefined("pair accuracy with constant ground truth"));
    }
    Ok(correct as f64 / considered as f64)
}

/// Ascending rank of each element, ties broken by position.
fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut rank = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// Mean absolute displacement between the measured and true rank of each
/// frame.
pub fn sorting_difference(p: &SeriesPair) -> f64 {
    let rm = ranks(p.measured);
    let rt = ranks(p.truth);
    let total: usize = rm.iter().zip(&rt).map(|(&a, &b)| a.abs_diff(b)).sum();
    total as f64 / p.len() as f64
}

/// Area under the ROC curve, computed as the Mann-Whitney statistic with
/// half credit for tied scores.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Undefined("AUC with a single class"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based mid-ranks of the positives, doubled to stay integral.
    let mut twice_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let twice_mid = (start + 1 + end) as u64;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        twice_rank_sum += twice_mid * pos_in_group;
        start = end;
    }
    let n_pos = n_pos as u64;
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg as u64) as f64)
}

/// The three agreement metrics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rc: f64,
    pub pca: f64,
    pub sd: f64,
}

pub fn evaluate_run(measured: &[f64], truth: &[f64]) -> Result<RunMetrics> {
    let p = SeriesPair::new(measured, truth)?;
    Ok(RunMetrics {
        rc: relevant_coefficient(&p)?,
        pca: pairs_comparing_accuracy(&p)?,
        sd: sorting_difference(&p),
    })
}

/// AUC of the three category pairs; `None` where a class is missing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AucRow {
    pub high_low: Option<f64>,
    pub high_medium: Option<f64>,
    pub medium_low: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AucTable {
    pub scores: AucRow,
    pub voting: AucRow,
}

/// Metrics averaged over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rc: f64,
    pub pca: f64,
    pub sd: f64,
    /// Runs that contributed to the means.
    pub n_runs: usize,
    /// Runs dropped because a metric was undefined.
    #[serde(default)]
    pub n_skipped: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<AucTable>,
}

/// Averages per-run metrics; `None` entries are runs whose metrics were
/// undefined and are only counted.
pub fn aggregate(runs: &[Option<RunMetrics>]) -> Result<MetricsReport> {
    let used: Vec<&RunMetrics> = runs.iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::Undefined("aggregate over zero usable runs"));
    }
    let n = used.len() as f64;
    Ok(MetricsReport {
        rc: used.iter().map(|m| m.rc).sum::<f64>() / n,
        pca: used.iter().map(|m| m.pca).sum::<f64>() / n,
        sd: used.iter().map(|m| m.sd).sum::<f64>() / n,
        n_runs: used.len(),
        n_skipped: runs.len() - used.len(),
        auc: None,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    crate::ncl::write_file(path, &body)
}
