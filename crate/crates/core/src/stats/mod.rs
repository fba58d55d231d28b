//! Statistical analysis: one-way ANOVA, Tukey HSD pairwise comparisons,
//! least-squares regression, power-law fitting and descriptive summaries.

mod srange;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

pub use srange::{srange_cdf, srange_critical, srange_sf};

/// Labeled observation groups.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GroupedSamples {
    pub groups: BTreeMap<String, Vec<f64>>,
}

impl GroupedSamples {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, group: &str, value: f64) {
        self.groups.entry(group.to_string()).or_default().push(value);
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, f64)>>(pairs: I) -> Self {
        let mut s = Self::new();
        for (g, v) in pairs {
            s.push(&g, v);
        }
        s
    }

    /// Loads a two-column CSV with header `group,value`.
    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut reader = csv::Reader::from_reader(raw.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Csv { path: path.to_path_buf(), message: e.to_string() })?
            .clone();
        let gcol = headers
            .iter()
            .position(|h| h.trim() == "group")
            .ok_or_else(|| Error::MissingColumn("group".into()))?;
        let vcol = headers
            .iter()
            .position(|h| h.trim() == "value")
            .ok_or_else(|| Error::MissingColumn("value".into()))?;
        let mut samples = Self::new();
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::Csv { path: path.to_path_buf(), message: e.to_string() })?;
            let group = record.get(gcol).unwrap_or("").trim().to_string();
            let value: f64 = record
                .get(vcol)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| Error::Csv { path: path.to_path_buf(), message: format!("value: {e}") })?;
            samples.push(&group, value);
        }
        Ok(samples)
    }

    fn validated(&self) -> Result<()> {
        if self.groups.len() < 2 {
            return Err(Error::TooFewGroups);
        }
        for (label, values) in &self.groups {
            if values.is_empty() {
                return Err(Error::EmptyGroup(label.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ms_between: f64,
    pub ms_within: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub p_value: f64,
}

/// One-way ANOVA; p from the F-distribution upper tail.
pub fn anova_oneway(samples: &GroupedSamples) -> Result<AnovaResult> {
    samples.validated()?;
    let k = samples.groups.len();
    let n_total: usize = samples.groups.values().map(Vec::len).sum();
    if n_total <= k {
        return Err(Error::DegenerateInput(format!("need more observations ({n_total}) than groups ({k})")));
    }

    let grand_mean: f64 =
        samples.groups.values().flatten().sum::<f64>() / n_total as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for values in samples.groups.values() {
        let n_i = values.len() as f64;
        let mean_i = values.iter().sum::<f64>() / n_i;
        ss_between += n_i * (mean_i - grand_mean).powi(2);
        ss_within += values.iter().map(|y| (y - mean_i).powi(2)).sum::<f64>();
    }

    let df_between = k - 1;
    let df_within = n_total - k;
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;

    if ss_within == 0.0 && ss_between == 0.0 {
        return Err(Error::AnovaUndefined);
    }
    let (f_stat, p_value) = if ms_within == 0.0 {
        (f64::INFINITY, 0.0)
    } else {
        let f = ms_between / ms_within;
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64)
            .map_err(|e| Error::DegenerateInput(e.to_string()))?;
        (f, 1.0 - dist.cdf(f))
    };

    Ok(AnovaResult { f_stat, df_between, df_within, ms_between, ms_within, ss_between, ss_within, p_value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub group_a: String,
    pub group_b: String,
    pub mean_diff: f64,
    pub q: f64,
    pub p: f64,
    pub significant: bool,
}

/// Tukey HSD over all group pairs (Tukey-Kramer for unequal sizes):
/// `q = |mean_a - mean_b| / sqrt((ms_within / 2) (1/n_a + 1/n_b))`, with
/// p-values from the studentized range distribution.
pub fn tukey_hsd(samples: &GroupedSamples, alpha: f64) -> Result<Vec<PairwiseComparison>> {
    let anova = anova_oneway(samples)?;
    let k = samples.groups.len();
    let labels: Vec<&String> = samples.groups.keys().collect();
    let stats: Vec<(f64, f64)> = samples
        .groups
        .values()
        .map(|v| (v.iter().sum::<f64>() / v.len() as f64, v.len() as f64))
        .collect();

    let mut out = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let (mean_a, n_a) = stats[i];
            let (mean_b, n_b) = stats[j];
            let se = (anova.ms_within / 2.0 * (1.0 / n_a + 1.0 / n_b)).sqrt();
            let mean_diff = mean_a - mean_b;
            let q = if se == 0.0 {
                if mean_diff == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                mean_diff.abs() / se
            };
            let p = if q.is_infinite() { 0.0 } else { srange_sf(q, k, anova.df_within as f64) };
            out.push(PairwiseComparison {
                group_a: labels[i].clone(),
                group_b: labels[j].clone(),
                mean_diff,
                q,
                p,
                significant: p < alpha,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_std: f64,
}

/// Least squares line with R^2 = 1 - SS_res/SS_tot; constant-y input
/// defines R^2 = 0.
pub fn linear_regression_r2(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput("need at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("x values are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mean_x) * (b - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (intercept + slope * a)).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit { slope, intercept, r_squared, residual_std: (ss_res / n).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// k in N(S) = k * S^(-alpha)
    pub scale: f64,
    /// alpha in N(S) = k * S^(-alpha)
    pub exponent: f64,
    pub r_squared: f64,
    pub residual_std: f64,
}

/// Log-log least squares over positive-count bins of a severity histogram
/// (levels LOW=1, MEDIUM=2, HIGH=3); zero-count levels are excluded.
pub fn power_law_fit(histogram: &BTreeMap<u32, f64>) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = histogram
        .iter()
        .filter(|(level, count)| **level > 0 && **count > 0.0)
        .map(|(level, count)| ((*level as f64).ln(), count.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateInput("power-law fit needs at least 2 positive bins".into()));
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    let line = linear_regression_r2(&xs, &ys)?;
    Ok(PowerLawFit {
        scale: line.intercept.exp(),
        exponent: -line.slope,
        r_squared: line.r_squared,
        residual_std: line.residual_std,
    })
}

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
    /// Fixed 20-bin histogram over [min, max].
    pub histogram: Vec<u64>,
}

/// Standard summary with nearest-rank percentiles and a fixed-bin histogram.
pub fn summarize_distribution(values: &[f64]) -> Result<DistributionSummary> {
    if values.is_empty() {
        return Err(Error::DegenerateInput("empty value list".into()));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min = sorted[0];
    let max = sorted[n - 1];
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let variance = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;

    let nearest_rank = |p: f64| -> f64 {
        let rank = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n);
        sorted[rank - 1]
    };

    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    let width = (max - min) / HISTOGRAM_BINS as f64;
    for v in &sorted {
        let bin = if width == 0.0 {
            0
        } else {
            (((v - min) / width) as usize).min(HISTOGRAM_BINS - 1)
        };
        histogram[bin] += 1;
    }

    Ok(DistributionSummary {
        n,
        mean,
        stddev: variance.sqrt(),
        min,
        p50: nearest_rank(50.0),
        p95: nearest_rank(95.0),
        max,
        histogram,
    })
}
