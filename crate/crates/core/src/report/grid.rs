//! Grid execution and metric aggregation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use crate::agentsim::{self, ActionKind, AgentPolicy, EpisodeMetrics, Outcome, RawCounters};
use crate::backend::{
    assign_worker, generate_sample, make_backend, BackendHandle, GateConfig, GenerationParams,
    ModelDescriptor,
};
use crate::corpus::{load_corpus, stratified_sample, PromptCorpus, SamplingConfig};
use crate::error::{Error, Result};
use crate::halluscan::{detect_hallucinations, load_kb, seed_kb, HalluKind};
use crate::rng::derive_seed;
use crate::stats::{
    anova_oneway, linear_regression_r2, power_law_fit, summarize_distribution, tukey_hsd,
    GroupedSamples,
};
use crate::syntax::parse_source;
use crate::vulnscan::{scan_vulns, severity_histogram, RuleRegistry, Severity};

use super::{
    resolve_path, AnalysisBlock, CellResult, EpisodeResult, MetricRow, MetricTable,
    RegressionReport, ResultsBundle, RunConfig, SafetyThresholds, SCHEMA_VERSION,
};

pub const REGRESSION_NOTE: &str = "fit computed over per-model aggregate rows; trial-level \
observations are required for distribution-level comparisons and are not recoverable from this table";

/// Executes the full grid for `config`, resolving relative paths against
/// `base_dir` (normally the config file's directory). Backend failures mark
/// their cell errored without aborting the grid.
pub fn run_grid(config: &RunConfig, base_dir: &Path) -> Result<ResultsBundle> {
    config.validate()?;

    let corpus = load_corpus(resolve_path(base_dir, &config.corpus))?;
    let sampled = stratified_sample(&corpus, &SamplingConfig { k: config.sample_k, seed: config.seed })?;

    let registry = match &config.registry {
        Some(p) => RuleRegistry::load(resolve_path(base_dir, p))?,
        None => RuleRegistry::baseline(),
    };
    let kb = match &config.knowledge_base {
        Some(p) => load_kb(resolve_path(base_dir, p))?,
        None => seed_kb(),
    };
    let bank_paths: BTreeMap<String, PathBuf> = config
        .mock_banks
        .iter()
        .map(|(id, p)| (id.clone(), resolve_path(base_dir, p)))
        .collect();

    let timeout = Duration::from_secs(config.generation.timeout_secs);
    let gate = GateConfig {
        unsafe_patterns: config
            .unsafe_patterns
            .clone()
            .unwrap_or_else(|| GateConfig::default().unsafe_patterns),
        max_retries: config.generation.retries,
    };

    let mut models: Vec<ModelDescriptor> = Vec::new();
    let mut backends: Vec<BackendHandle> = Vec::new();
    for (i, m) in config.models.iter().enumerate() {
        let worker_index = match m.worker_index {
            Some(w) => w,
            None => assign_worker(i as u64, config.workers)?,
        };
        models.push(ModelDescriptor {
            name: m.name.clone(),
            endpoint: m.endpoint.clone(),
            param_count_billions: m.param_count_billions,
            quantization_tag: m.quantization_tag.clone(),
            worker_index,
        });
        backends.push(make_backend(&m.endpoint, &bank_paths, timeout)?);
    }

    // Cell specs in canonical order; execution order does not matter.
    let mut specs = Vec::new();
    for (mi, _) in models.iter().enumerate() {
        for prompt in &sampled.prompts {
            for level in &config.specificity_levels {
                for trial in 1..=config.trials {
                    specs.push((mi, prompt, *level, trial));
                }
            }
        }
    }

    let run_cell = |&(mi, prompt, level, trial): &(
        usize,
        &crate::corpus::Prompt,
        crate::backend::SpecificityLevel,
        usize,
    )|
     -> CellResult {
        let model = &models[mi];
        let cell_seed = derive_seed(
            config.seed,
            &format!("{}|{}|{}|{trial}", model.name, prompt.id, level.as_str()),
        );
        let params = GenerationParams {
            temperature: config.generation.temperature,
            top_p: config.generation.top_p,
            max_tokens: config.generation.max_tokens,
            seed: cell_seed,
        };
        match generate_sample(&backends[mi], model, prompt, level, &params, trial, &gate) {
            Ok(record) => {
                let tree = parse_source(&record.code);
                let vuln_findings = scan_vulns(&tree, &registry);
                let hallu_findings = detect_hallucinations(&tree, &kb);
                CellResult {
                    model: model.name.clone(),
                    prompt_id: prompt.id.clone(),
                    specificity: level,
                    trial,
                    loc: tree.loc,
                    record: Some(record),
                    vuln_findings,
                    hallu_findings,
                    error: None,
                }
            }
            Err(e) => CellResult {
                model: model.name.clone(),
                prompt_id: prompt.id.clone(),
                specificity: level,
                trial,
                loc: 0,
                record: None,
                vuln_findings: Vec::new(),
                hallu_findings: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    };

    let mut cells: Vec<CellResult> = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
        pool.install(|| specs.par_iter().map(run_cell).collect())
    } else {
        specs.iter().map(run_cell).collect()
    };
    cells.sort_by(|a, b| {
        (&a.model, &a.prompt_id, a.specificity, a.trial).cmp(&(&b.model, &b.prompt_id, b.specificity, b.trial))
    });

    let mut episodes = Vec::new();
    for model in &models {
        for (ei, ep) in config.agent_episodes.iter().enumerate() {
            let seed_used = derive_seed(ep.seed, &model.name);
            let db_spec = ep.db_spec.clone().unwrap_or_else(agentsim::default_db_spec);
            let policy = AgentPolicy::preset(ep.autonomy, seed_used);
            let mut session = agentsim::new_session(&db_spec, ep.constraints.clone(), policy)?;
            let (trace, metrics) = agentsim::run_episode(&mut session, ep.n_steps, ep.recovery)?;
            let mut failure_kinds: BTreeMap<ActionKind, u64> = BTreeMap::new();
            for record in &trace {
                if record.outcome == Outcome::Failure {
                    *failure_kinds.entry(record.action.kind).or_insert(0) += 1;
                }
            }
            episodes.push(EpisodeResult {
                model: model.name.clone(),
                episode_index: ei,
                autonomy: ep.autonomy,
                seed_used,
                n_steps: ep.n_steps,
                metrics,
                chain_tail: session.chain_tail().to_string(),
                failure_kinds,
                trace,
            });
        }
    }

    let metric_table = aggregate_metrics(&models, &cells, &episodes)?;
    let analysis = analyze(&models, &cells, &episodes, &metric_table);
    let safety_assessment = match &config.thresholds {
        Some(p) => {
            let thresholds = SafetyThresholds::load(resolve_path(base_dir, p))?;
            Some(metric_table.rows.iter().map(|r| thresholds.evaluate(r)).collect())
        }
        None => None,
    };

    Ok(ResultsBundle {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: crate::TOOL_VERSION.to_string(),
        hash_algorithm: super::HASH_ALGORITHM.to_string(),
        config: config.clone(),
        specificity_templates: crate::backend::specificity_templates(),
        registry_version: registry.version.clone(),
        kb_version: kb.version.clone(),
        sampled_prompt_ids: sampled.prompts.iter().map(|p| p.id.clone()).collect(),
        cells,
        episodes,
        metric_table,
        analysis,
        safety_assessment,
    })
}

/// Re-derives the sampled corpus for a config (used by the CLI to show the
/// sample without running the grid).
pub fn sample_for(config: &RunConfig, base_dir: &Path) -> Result<PromptCorpus> {
    let corpus = load_corpus(resolve_path(base_dir, &config.corpus))?;
    stratified_sample(&corpus, &SamplingConfig { k: config.sample_k, seed: config.seed })
}

/// Folds cells and episodes into one row per model, in model config order.
pub fn aggregate_metrics(
    models: &[ModelDescriptor],
    cells: &[CellResult],
    episodes: &[EpisodeResult],
) -> Result<MetricTable> {
    let mut rows = Vec::new();
    for model in models {
        let model_cells: Vec<&CellResult> = cells.iter().filter(|c| c.model == model.name).collect();
        let model_episodes: Vec<&EpisodeResult> =
            episodes.iter().filter(|e| e.model == model.name).collect();

        let mut counters = RawCounters::default();
        for ep in &model_episodes {
            counters.n_total += ep.metrics.n_total;
            counters.n_fail += ep.metrics.n_fail;
            counters.n_violate += ep.metrics.n_violate;
            counters.n_recovered += ep.metrics.n_recovered;
            counters.n_panic += ep.metrics.n_panic;
            counters.n_deceptive += ep.metrics.n_deceptive;
        }
        let agent: Option<EpisodeMetrics> = if counters.n_total > 0 {
            Some(crate::agentsim::compute_agent_metrics(counters)?)
        } else {
            None
        };

        let mut cwes = std::collections::BTreeSet::new();
        let mut severity_total: u64 = 0;
        let mut total_loc: usize = 0;
        let mut hallu_counts: BTreeMap<HalluKind, u64> = BTreeMap::new();
        let mut times: Vec<f64> = Vec::new();
        let mut errored: u64 = 0;
        for cell in &model_cells {
            if cell.error.is_some() {
                errored += 1;
                continue;
            }
            for f in &cell.vuln_findings {
                cwes.insert(f.cwe_id.clone());
                severity_total += f.severity.weight();
            }
            for f in &cell.hallu_findings {
                *hallu_counts.entry(f.kind).or_insert(0) += 1;
            }
            total_loc += cell.loc;
            if let Some(record) = &cell.record {
                times.push(record.response_time_ms as f64);
            }
        }
        let density = if total_loc > 0 { severity_total as f64 / total_loc as f64 } else { 0.0 };
        let (p50, p95) = if times.is_empty() {
            (0.0, 0.0)
        } else {
            let summary = summarize_distribution(&times)?;
            (summary.p50, summary.p95)
        };

        rows.push(MetricRow {
            model: model.name.clone(),
            autonomous_failure_rate: agent.as_ref().map(|m| m.fr).unwrap_or(0.0),
            deception_rate: agent.as_ref().map(|m| m.deception_rate).unwrap_or(0.0),
            recovery_success_rate: agent.as_ref().and_then(|m| m.rsr),
            constraint_adherence: agent.as_ref().map(|m| m.constraint_adherence).unwrap_or(1.0),
            cwe_diversity: cwes.len(),
            severity_score_total: severity_total,
            vulnerability_density: density,
            hallucinations_fabricated_module: *hallu_counts.get(&HalluKind::FabricatedModule).unwrap_or(&0),
            hallucinations_fake_api: *hallu_counts.get(&HalluKind::FakeAPI).unwrap_or(&0),
            hallucinations_parameter: *hallu_counts.get(&HalluKind::ParameterHallucination).unwrap_or(&0),
            response_time_p50_ms: p50,
            response_time_p95_ms: p95,
            errored_cells: errored,
        });
    }
    Ok(MetricTable { rows })
}

/// Statistical analysis embedded in the bundle.
pub fn analyze(
    models: &[ModelDescriptor],
    cells: &[CellResult],
    episodes: &[EpisodeResult],
    table: &MetricTable,
) -> AnalysisBlock {
    // ANOVA on per-episode failure rates, grouped by model.
    let mut fr_groups = GroupedSamples::new();
    for ep in episodes {
        fr_groups.push(&ep.model, ep.metrics.fr);
    }
    let enough = fr_groups.groups.len() >= 2 && fr_groups.groups.values().all(|v| v.len() >= 2);
    let anova_failure_rate = if enough { anova_oneway(&fr_groups).ok() } else { None };
    let tukey_failure_rate = if anova_failure_rate.is_some() { tukey_hsd(&fr_groups, 0.05).ok() } else { None };

    // Deception rate vs inverse parameter count over aggregate rows.
    let regression = if table.rows.len() >= 2 {
        let x: Vec<f64> = models.iter().map(|m| 1.0 / m.param_count_billions).collect();
        let y: Vec<f64> = table.rows.iter().map(|r| r.deception_rate).collect();
        linear_regression_r2(&x, &y)
            .ok()
            .map(|fit| RegressionReport { fit, note: REGRESSION_NOTE.to_string() })
    } else {
        None
    };

    // Corpus-wide severity power law.
    let mut hist: BTreeMap<u32, f64> = BTreeMap::new();
    for cell in cells {
        for (sev, count) in severity_histogram(&cell.vuln_findings) {
            *hist.entry(sev.level()).or_insert(0.0) += count as f64;
        }
    }
    let severity_power_law = power_law_fit(&hist).ok();

    AnalysisBlock {
        anova_failure_rate,
        tukey_failure_rate,
        regression_deception_vs_inverse_params: regression,
        severity_power_law,
    }
}

/// Severity histogram over every cell in a bundle, keyed by numeric level.
pub fn bundle_severity_histogram(cells: &[CellResult]) -> BTreeMap<Severity, u64> {
    let mut out: BTreeMap<Severity, u64> =
        [(Severity::Low, 0), (Severity::Medium, 0), (Severity::High, 0)].into_iter().collect();
    for cell in cells {
        for f in &cell.vuln_findings {
            *out.get_mut(&f.severity).unwrap() += 1;
        }
    }
    out
}
