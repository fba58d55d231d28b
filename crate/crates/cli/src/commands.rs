//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use seceval_core::agentsim::{self, verify_audit_chain, ChainVerdict};
use seceval_core::error::{Error, Result};
use seceval_core::halluscan::{detect_hallucinations, load_kb, seed_kb, HalluFinding};
use seceval_core::report::{emit::emit_reports, grid::run_grid, ResultsBundle, RunConfig};
use seceval_core::stats::{anova_oneway, linear_regression_r2, power_law_fit, tukey_hsd, GroupedSamples};
use seceval_core::syntax::{parse_source, read_source};
use seceval_core::vulnscan::{scan_vulns, RuleRegistry, VulnFinding};

#[derive(Args)]
pub struct EvaluateArgs {
    /// Run-config JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Override the corpus path from the config.
    #[arg(long)]
    corpus: Option<String>,
    /// Override the sampled prompt count.
    #[arg(long = "sample-k")]
    sample_k: Option<usize>,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Point every model at this backend endpoint
    /// (`mock:<bank-id>`, `cmd:<command line>`, or an http(s) URL).
    #[arg(long)]
    backend: Option<String>,
    /// Override the per-request backend timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Override the gate retry limit.
    #[arg(long)]
    retries: Option<usize>,
    /// Override the grid worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: the config's output_dir, relative to the
    /// config file).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(corpus) = args.corpus {
        config.corpus = corpus;
    }
    if let Some(k) = args.sample_k {
        config.sample_k = k;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(backend) = args.backend {
        for model in &mut config.models {
            model.endpoint = backend.clone();
        }
    }
    if let Some(timeout) = args.timeout {
        config.generation.timeout_secs = timeout;
    }
    if let Some(retries) = args.retries {
        config.generation.retries = retries;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }

    let base_dir = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let bundle = run_grid(&config, &base_dir)?;
    let outdir = args
        .out
        .unwrap_or_else(|| seceval_core::report::resolve_path(&base_dir, &config.output_dir));
    let manifest = emit_reports(&bundle, &outdir)?;

    println!(
        "evaluated {} cells across {} models ({} errored)",
        bundle.cells.len(),
        bundle.metric_table.rows.len(),
        bundle.metric_table.rows.iter().map(|r| r.errored_cells).sum::<u64>()
    );
    print_metric_table(&bundle);
    println!("wrote {} files to {}", manifest.files.len() + 1, outdir.display());
    Ok(())
}

fn print_metric_table(bundle: &ResultsBundle) {
    println!(
        "{:<20} {:>8} {:>8} {:>8} {:>10} {:>6} {:>9}",
        "model", "FR%", "decep%", "RSR%", "adhere%", "CWEs", "density"
    );
    for r in &bundle.metric_table.rows {
        println!(
            "{:<20} {:>8.2} {:>8.2} {:>8} {:>10.2} {:>6} {:>9.4}",
            r.model,
            r.autonomous_failure_rate * 100.0,
            r.deception_rate * 100.0,
            r.recovery_success_rate.map(|v| format!("{:.2}", v * 100.0)).unwrap_or_else(|| "NA".into()),
            r.constraint_adherence * 100.0,
            r.cwe_diversity,
            r.vulnerability_density,
        );
    }
}

#[derive(Args)]
pub struct ScanArgs {
    /// Files or directories of source files to scan.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Rule registry JSON (built-in baseline rules when omitted).
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Knowledge base JSON (built-in seed KB when omitted).
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Emit machine-readable JSON instead of text lines.
    #[arg(long)]
    json: bool,
}

pub fn scan(args: ScanArgs) -> Result<()> {
    let registry = match &args.registry {
        Some(p) => RuleRegistry::load(p)?,
        None => RuleRegistry::baseline(),
    };
    let kb = match &args.kb {
        Some(p) => load_kb(p)?,
        None => seed_kb(),
    };

    let mut files = Vec::new();
    for path in &args.paths {
        collect_sources(path, &mut files)?;
    }
    files.sort();

    let mut all: Vec<(String, Vec<VulnFinding>, Vec<HalluFinding>)> = Vec::new();
    for file in &files {
        let source = read_source(file)?;
        let tree = parse_source(&source);
        let vulns = scan_vulns(&tree, &registry);
        let hallus = detect_hallucinations(&tree, &kb);
        all.push((file.display().to_string(), vulns, hallus));
    }

    if args.json {
        let value: Vec<serde_json::Value> = all
            .iter()
            .map(|(file, vulns, hallus)| {
                serde_json::json!({ "file": file, "vulns": vulns, "hallus": hallus })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        return Ok(());
    }

    let mut n_vulns = 0;
    let mut n_hallus = 0;
    for (file, vulns, hallus) in &all {
        for f in vulns {
            println!("{file}:{}: [{} {:?} {}] {}", f.span.start, f.cwe_id, f.severity, f.rule_id, f.evidence);
        }
        for f in hallus {
            println!("{file}:{}: [{}] {} (context {})", f.span.start, f.kind, f.symbol, f.context);
        }
        n_vulns += vulns.len();
        n_hallus += hallus.len();
    }
    println!("{} files scanned: {n_vulns} vulnerability findings, {n_hallus} hallucination findings", all.len());
    Ok(())
}

fn collect_sources(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let meta = std::fs::metadata(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    if meta.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let entries = std::fs::read_dir(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let p = entry.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "py") {
            out.push(p);
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Episode config JSON file.
    #[arg(long)]
    episode: PathBuf,
    /// Override the step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the policy seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the trace as JSON lines to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Verify the audit chain after the run.
    #[arg(long)]
    verify: bool,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = agentsim::EpisodeConfig::load(&args.episode)?;
    if let Some(steps) = args.steps {
        config.n_steps = steps;
    }
    if let Some(seed) = args.seed {
        config.policy.seed = seed;
    }
    let (trace, metrics) = config.run()?;

    println!("steps:               {}", metrics.n_total);
    println!("failure rate:        {:.2}%", metrics.fr * 100.0);
    println!("violation rate:      {:.2}%", metrics.cvr * 100.0);
    println!("adherence:           {:.2}%", metrics.constraint_adherence * 100.0);
    match metrics.rsr {
        Some(rsr) => println!("recovery success:    {:.2}%", rsr * 100.0),
        None => println!("recovery success:    not applicable (no failures)"),
    }
    println!("panic response rate: {:.2}%", metrics.prr * 100.0);
    println!("deception rate:      {:.2}%", metrics.deception_rate * 100.0);

    if let Some(path) = &args.trace {
        let mut buf = Vec::new();
        agentsim::write_trace_jsonl(&trace, &mut buf)
            .map_err(|source| Error::Write { path: path.clone(), source })?;
        std::fs::write(path, &buf).map_err(|source| Error::Write { path: path.clone(), source })?;
        println!("trace written to {}", path.display());
    }
    if args.verify {
        match verify_audit_chain(&trace) {
            ChainVerdict::Valid => println!("audit chain: valid ({} records)", trace.len()),
            ChainVerdict::BrokenAt(i) => {
                eprintln!("audit chain: broken at record {i}");
                return Err(Error::EpisodeInvalid(format!("audit chain broken at record {i}")));
            }
        }
    }
    Ok(())
}

#[derive(Args)]
pub struct StatsArgs {
    /// Input CSV: `group,value` (default mode), `x,y` (--regression), or
    /// `level,count` (--power-law).
    #[arg(long)]
    input: PathBuf,
    /// Significance level for Tukey HSD.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Least-squares line fit over x,y columns.
    #[arg(long)]
    regression: bool,
    /// Power-law fit over level,count columns.
    #[arg(long = "power-law")]
    power_law: bool,
}

pub fn stats(args: StatsArgs) -> Result<()> {
    if args.regression {
        let (x, y) = load_xy(&args.input, "x", "y")?;
        let fit = linear_regression_r2(&x, &y)?;
        println!("slope:     {:.6}", fit.slope);
        println!("intercept: {:.6}", fit.intercept);
        println!("r_squared: {:.6}", fit.r_squared);
        return Ok(());
    }
    if args.power_law {
        let (levels, counts) = load_xy(&args.input, "level", "count")?;
        let hist: BTreeMap<u32, f64> =
            levels.iter().map(|l| *l as u32).zip(counts.iter().copied()).collect();
        let fit = power_law_fit(&hist)?;
        println!("scale k:    {:.6}", fit.scale);
        println!("exponent a: {:.6}", fit.exponent);
        println!("r_squared:  {:.6}", fit.r_squared);
        return Ok(());
    }

    let samples = GroupedSamples::load_csv(&args.input)?;
    let anova = anova_oneway(&samples)?;
    println!(
        "ANOVA: F({}, {}) = {:.4}, p = {:.6}",
        anova.df_between, anova.df_within, anova.f_stat, anova.p_value
    );
    println!("  MS_between = {:.6}, MS_within = {:.6}", anova.ms_between, anova.ms_within);
    let pairs = tukey_hsd(&samples, args.alpha)?;
    println!("Tukey HSD (alpha = {}):", args.alpha);
    for p in pairs {
        println!(
            "  {} vs {}: diff = {:+.4}, q = {:.4}, p = {:.6}{}",
            p.group_a,
            p.group_b,
            p.mean_diff,
            p.q,
            p.p,
            if p.significant { "  *" } else { "" }
        );
    }
    Ok(())
}

fn load_xy(path: &Path, x_col: &str, y_col: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let raw = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut lines = raw.lines();
    let header = lines.next().unwrap_or("");
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let xi = cols
        .iter()
        .position(|c| *c == x_col)
        .ok_or_else(|| Error::MissingColumn(x_col.to_string()))?;
    let yi = cols
        .iter()
        .position(|c| *c == y_col)
        .ok_or_else(|| Error::MissingColumn(y_col.to_string()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Csv { path: path.to_path_buf(), message: format!("bad number in line {line:?}") })
        };
        xs.push(parse(xi)?);
        ys.push(parse(yi)?);
    }
    Ok((xs, ys))
}

#[derive(Args)]
pub struct ReportArgs {
    /// Existing results.json bundle.
    #[arg(long)]
    bundle: PathBuf,
    /// Output directory for the re-emitted files.
    #[arg(long)]
    out: PathBuf,
}

pub fn report(args: ReportArgs) -> Result<()> {
    let bundle = ResultsBundle::load(&args.bundle)?;
    let manifest = emit_reports(&bundle, &args.out)?;
    println!("re-emitted {} files to {}", manifest.files.len() + 1, args.out.display());
    Ok(())
}
