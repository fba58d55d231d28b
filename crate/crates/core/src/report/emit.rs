//! Deterministic report files: results JSON, Table-shaped CSV, plot-data
//! series, per-model traces, and a digest manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agentsim::ActionKind;
use crate::error::{Error, Result};
use crate::stats::{summarize_distribution, HISTOGRAM_BINS};

use super::{MetricRow, ResultsBundle};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&raw).map_err(|e| Error::ConfigInvalid(format!("manifest: {e}")))
    }

    pub fn digest_of(&self, path: &str) -> Option<&str> {
        self.files.iter().find(|f| f.path == path).map(|f| f.sha256.as_str())
    }
}

struct Emitter<'a> {
    outdir: &'a Path,
    entries: Vec<ManifestEntry>,
}

impl<'a> Emitter<'a> {
    fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let path = self.outdir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Write { path: parent.to_path_buf(), source })?;
        }
        std::fs::write(&path, contents).map_err(|source| Error::Write { path, source })?;
        self.entries.push(ManifestEntry {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        });
        Ok(())
    }
}

fn rate(v: f64) -> String {
    format!("{v:.4}")
}

fn opt_rate(v: Option<f64>) -> String {
    v.map(rate).unwrap_or_else(|| "NA".to_string())
}

/// Writes all report files under `outdir` and returns the manifest
/// (which is itself written as `manifest.json`, listing every other file).
pub fn emit_reports(bundle: &ResultsBundle, outdir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(outdir).map_err(|source| Error::Write { path: outdir.to_path_buf(), source })?;
    let mut em = Emitter { outdir, entries: Vec::new() };

    // results.json: the full bundle
    let results_json =
        serde_json::to_string_pretty(bundle).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    em.write("results.json", results_json.as_bytes())?;

    // metrics.csv: pinned column set
    let mut csv = String::from(
        "model,autonomous_failure_rate,deception_rate,recovery_success_rate,constraint_adherence,\
         cwe_diversity,vulnerability_density,hallucinations_fabricated_module,hallucinations_fake_api,\
         hallucinations_parameter,response_time_p50_ms,response_time_p95_ms,errored_cells\n",
    );
    for r in &bundle.metric_table.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{},{},{},{:.1},{:.1},{}\n",
            r.model,
            rate(r.autonomous_failure_rate),
            rate(r.deception_rate),
            opt_rate(r.recovery_success_rate),
            rate(r.constraint_adherence),
            r.cwe_diversity,
            r.vulnerability_density,
            r.hallucinations_fabricated_module,
            r.hallucinations_fake_api,
            r.hallucinations_parameter,
            r.response_time_p50_ms,
            r.response_time_p95_ms,
            r.errored_cells
        ));
    }
    em.write("metrics.csv", csv.as_bytes())?;

    // per-metric bar series
    type BarValue = Box<dyn Fn(&MetricRow) -> String>;
    let bars: [(&str, BarValue); 4] = [
        ("autonomous_failure_rate", Box::new(|r: &MetricRow| rate(r.autonomous_failure_rate))),
        ("deception_rate", Box::new(|r: &MetricRow| rate(r.deception_rate))),
        ("recovery_success_rate", Box::new(|r: &MetricRow| rate(r.recovery_success_rate.unwrap_or(0.0)))),
        ("constraint_adherence", Box::new(|r: &MetricRow| rate(r.constraint_adherence))),
    ];
    for (name, value_of) in &bars {
        let mut series = String::from("model,value\n");
        for r in &bundle.metric_table.rows {
            series.push_str(&format!("{},{}\n", r.model, value_of(r)));
        }
        em.write(&format!("plots/bar_{name}.csv"), series.as_bytes())?;
    }

    // model x metric heatmap, min-max normalized per metric column
    em.write("plots/heatmap_model_metric.csv", heatmap_csv(&bundle.metric_table.rows).as_bytes())?;

    // response-time histogram series
    em.write("plots/response_time_hist.csv", response_time_csv(bundle).as_bytes())?;

    // failure-type breakdown series
    em.write("plots/failure_types.csv", failure_types_csv(bundle).as_bytes())?;

    // per-episode traces as JSON lines
    for ep in &bundle.episodes {
        let mut buf = Vec::new();
        crate::agentsim::write_trace_jsonl(&ep.trace, &mut buf)
            .map_err(|source| Error::Write { path: outdir.join("traces"), source })?;
        em.write(&format!("traces/{}__ep{}.jsonl", sanitize(&ep.model), ep.episode_index), &buf)?;
    }

    let mut entries = em.entries;
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { files: entries };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    let manifest_path = outdir.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, manifest_json.as_bytes())
        .map_err(|source| Error::Write { path: manifest_path, source })?;
    Ok(manifest)
}

/// Re-hashes every manifest-listed file under `outdir`; returns the paths
/// whose digests no longer match.
pub fn verify_manifest(outdir: &Path) -> Result<Vec<String>> {
    let manifest = Manifest::load(outdir.join(MANIFEST_FILE))?;
    let mut mismatched = Vec::new();
    for entry in &manifest.files {
        let path = outdir.join(&entry.path);
        match std::fs::read(&path) {
            Ok(bytes) => {
                if hex::encode(Sha256::digest(&bytes)) != entry.sha256 {
                    mismatched.push(entry.path.clone());
                }
            }
            Err(_) => mismatched.push(entry.path.clone()),
        }
    }
    Ok(mismatched)
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

const HEATMAP_METRICS: [&str; 12] = [
    "autonomous_failure_rate",
    "deception_rate",
    "recovery_success_rate",
    "constraint_adherence",
    "cwe_diversity",
    "vulnerability_density",
    "hallucinations_fabricated_module",
    "hallucinations_fake_api",
    "hallucinations_parameter",
    "response_time_p50_ms",
    "response_time_p95_ms",
    "errored_cells",
];

fn metric_value(row: &MetricRow, metric: &str) -> f64 {
    match metric {
        "autonomous_failure_rate" => row.autonomous_failure_rate,
        "deception_rate" => row.deception_rate,
        "recovery_success_rate" => row.recovery_success_rate.unwrap_or(0.0),
        "constraint_adherence" => row.constraint_adherence,
        "cwe_diversity" => row.cwe_diversity as f64,
        "vulnerability_density" => row.vulnerability_density,
        "hallucinations_fabricated_module" => row.hallucinations_fabricated_module as f64,
        "hallucinations_fake_api" => row.hallucinations_fake_api as f64,
        "hallucinations_parameter" => row.hallucinations_parameter as f64,
        "response_time_p50_ms" => row.response_time_p50_ms,
        "response_time_p95_ms" => row.response_time_p95_ms,
        "errored_cells" => row.errored_cells as f64,
        _ => 0.0,
    }
}

/// Min-max normalization per metric column; constant columns map to 0.
fn heatmap_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from("model");
    for m in HEATMAP_METRICS {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    let ranges: Vec<(f64, f64)> = HEATMAP_METRICS
        .iter()
        .map(|m| {
            let values: Vec<f64> = rows.iter().map(|r| metric_value(r, m)).collect();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (min, max)
        })
        .collect();
    for row in rows {
        out.push_str(&row.model);
        for (m, (min, max)) in HEATMAP_METRICS.iter().zip(&ranges) {
            let v = metric_value(row, m);
            let norm = if max > min { (v - min) / (max - min) } else { 0.0 };
            out.push_str(&format!(",{norm:.4}"));
        }
        out.push('\n');
    }
    out
}

fn response_time_csv(bundle: &ResultsBundle) -> String {
    let mut out = String::from("model,bin,lo_ms,hi_ms,count\n");
    for row in &bundle.metric_table.rows {
        let times: Vec<f64> = bundle
            .cells
            .iter()
            .filter(|c| c.model == row.model)
            .filter_map(|c| c.record.as_ref())
            .map(|r| r.response_time_ms as f64)
            .collect();
        if times.is_empty() {
            for bin in 0..HISTOGRAM_BINS {
                out.push_str(&format!("{},{bin},0.0,0.0,0\n", row.model));
            }
            continue;
        }
        let summary = summarize_distribution(&times).expect("non-empty");
        let width = (summary.max - summary.min) / HISTOGRAM_BINS as f64;
        for (bin, count) in summary.histogram.iter().enumerate() {
            let lo = summary.min + bin as f64 * width;
            let hi = if bin + 1 == HISTOGRAM_BINS { summary.max } else { lo + width };
            out.push_str(&format!("{},{bin},{lo:.1},{hi:.1},{count}\n", row.model));
        }
    }
    out
}

fn failure_types_csv(bundle: &ResultsBundle) -> String {
    let mut out = String::from("model,failure_type,count\n");
    for row in &bundle.metric_table.rows {
        let mut kinds: BTreeMap<ActionKind, u64> = BTreeMap::new();
        for ep in bundle.episodes.iter().filter(|e| e.model == row.model) {
            for (kind, count) in &ep.failure_kinds {
                *kinds.entry(*kind).or_insert(0) += count;
            }
        }
        for kind in ActionKind::ALL {
            let label = serde_json::to_value(kind).unwrap();
            out.push_str(&format!(
                "{},{},{}\n",
                row.model,
                label.as_str().unwrap(),
                kinds.get(&kind).unwrap_or(&0)
            ));
        }
        let exhausted = bundle
            .cells
            .iter()
            .filter(|c| c.model == row.model)
            .filter_map(|c| c.record.as_ref())
            .filter(|r| r.gate_exhausted)
            .count();
        out.push_str(&format!("{},generation_gate_exhausted,{exhausted}\n", row.model));
        out.push_str(&format!("{},backend_error,{}\n", row.model, row.errored_cells));
    }
    out
}
