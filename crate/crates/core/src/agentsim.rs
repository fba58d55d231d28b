//! Autonomous-agent simulation on a toy database under constraints.
//!
//! An episode draws actions from a seeded weighted policy (or a scripted
//! stand-in), enforces a constraint set in blocking or permissive mode, and
//! appends hash-chained, risk-labeled records to an audit trace. Metrics
//! (failure rate, constraint violation rate, recovery success rate, panic
//! response rate, deception rate, adherence) are recomputable from the
//! trace alone.
//!
//! Chain recipe: `chain_hash = sha256_hex(prev_hash_hex || body_json)` with
//! `body_json` the record serialized without its `chain_hash` field, and a
//! genesis value of 64 zero hex digits.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const GENESIS_HASH: &str = "0000000000000000000000000000000000000000000000000000000000000000";
const CORRUPTION_MARKER: &str = "~~CORRUPT~~";

// ---------------------------------------------------------------------------
// Actions and risk classes

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Optm,
    Del,
    RunTests,
    FabricateTests,
    CorruptData,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Optm,
        ActionKind::Del,
        ActionKind::RunTests,
        ActionKind::FabricateTests,
        ActionKind::CorruptData,
    ];

    /// Fixed kind-to-risk mapping.
    pub fn risk_class(self) -> RiskClass {
        match self {
            ActionKind::Optm | ActionKind::RunTests => RiskClass::Autonomous,
            ActionKind::Del | ActionKind::FabricateTests | ActionKind::CorruptData => RiskClass::Destructive,
        }
    }

    /// Kinds that change database state (optm is a state-preserving
    /// permutation but still counts as mutating under a code freeze).
    pub fn is_mutating(self) -> bool {
        matches!(self, ActionKind::Optm | ActionKind::Del | ActionKind::CorruptData)
    }

    pub fn targets_table(self) -> bool {
        matches!(self, ActionKind::Optm | ActionKind::Del | ActionKind::CorruptData)
    }
}

/// Behavior taxonomy by inherent risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskClass {
    Suggestive,
    Generative,
    Autonomous,
    Destructive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentAction {
    pub kind: ActionKind,
    pub target: String,
    pub risk_class: RiskClass,
}

// ---------------------------------------------------------------------------
// Constraints and policy

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Enforcement {
    Blocking,
    Permissive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default)]
    pub forbidden_actions: BTreeSet<ActionKind>,
    #[serde(default)]
    pub protected_tables: BTreeSet<String>,
    #[serde(default)]
    pub code_freeze: bool,
    pub enforcement: Enforcement,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self {
            forbidden_actions: BTreeSet::new(),
            protected_tables: BTreeSet::new(),
            code_freeze: false,
            enforcement: Enforcement::Blocking,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Autonomy {
    Low,
    Medium,
    High,
}

/// A scripted step for deterministic episodes; `target` defaults to the
/// first layout table (or the test-suite id for test actions).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedAction {
    pub kind: ActionKind,
    #[serde(default)]
    pub target: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentPolicy {
    pub autonomy: Autonomy,
    /// Empty map selects the preset for the autonomy level.
    #[serde(default)]
    pub action_weights: BTreeMap<ActionKind, f64>,
    pub seed: u64,
    #[serde(default)]
    pub script: Option<Vec<ScriptedAction>>,
}

impl AgentPolicy {
    pub fn preset(autonomy: Autonomy, seed: u64) -> Self {
        Self { autonomy, action_weights: BTreeMap::new(), seed, script: None }
    }

    /// Effective weights: explicit weights, or the autonomy preset.
    pub fn effective_weights(&self) -> BTreeMap<ActionKind, f64> {
        if !self.action_weights.is_empty() {
            return self.action_weights.clone();
        }
        let pairs: &[(ActionKind, f64)] = match self.autonomy {
            Autonomy::Low => &[(ActionKind::Optm, 0.7), (ActionKind::RunTests, 0.3)],
            Autonomy::Medium => &[
                (ActionKind::Optm, 0.5),
                (ActionKind::RunTests, 0.3),
                (ActionKind::Del, 0.1),
                (ActionKind::FabricateTests, 0.05),
                (ActionKind::CorruptData, 0.05),
            ],
            Autonomy::High => &[
                (ActionKind::Optm, 0.3),
                (ActionKind::RunTests, 0.2),
                (ActionKind::Del, 0.2),
                (ActionKind::FabricateTests, 0.15),
                (ActionKind::CorruptData, 0.15),
            ],
        };
        pairs.iter().copied().collect()
    }
}

// ---------------------------------------------------------------------------
// Database

pub type Record = BTreeMap<String, String>;
pub type Tables = BTreeMap<String, Vec<Record>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DbSpec {
    pub tables: Tables,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub label: String,
    pub tables: Tables,
    pub checksum: String,
}

#[derive(Debug, Clone)]
pub struct SimDatabase {
    pub tables: Tables,
    pub snapshots: Vec<Snapshot>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl SimDatabase {
    fn new(tables: Tables) -> Self {
        Self { tables, snapshots: Vec::new() }
    }

    /// Digest of the canonical serialization: tables sorted by name,
    /// records in order, fields sorted by key.
    pub fn checksum(&self) -> String {
        sha256_hex(serde_json::to_string(&self.tables).expect("tables serialize").as_bytes())
    }

    pub fn snapshot(&mut self, label: &str) {
        let checksum = self.checksum();
        self.snapshots.push(Snapshot { label: label.to_string(), tables: self.tables.clone(), checksum });
    }

    /// Restores the latest snapshot; succeeds iff the post-restore checksum
    /// equals the stored snapshot checksum.
    pub fn restore_latest(&mut self) -> bool {
        let Some(snap) = self.snapshots.last() else { return false };
        self.tables = snap.tables.clone();
        self.checksum() == snap.checksum
    }
}

// ---------------------------------------------------------------------------
// Trace records

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Allowed,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportedOutcome {
    Pass,
    Fail,
}

/// One hash-chained trace entry. `integrity_ok` is the post-action
/// integrity check; `recovery` records the in-step restore attempt;
/// `db_checksum_after` reflects the state at the end of the step,
/// including any recovery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub step: usize,
    pub action: AgentAction,
    pub constraint_verdict: Verdict,
    pub outcome: Outcome,
    pub reported_outcome: Option<ReportedOutcome>,
    pub integrity_ok: bool,
    pub recovery: Option<bool>,
    pub db_checksum_before: String,
    pub db_checksum_after: String,
    pub severity_label: RiskClass,
    pub chain_hash: String,
}

/// The hashed portion of a record (everything except `chain_hash`),
/// serialized in declaration order.
#[derive(Serialize)]
struct TraceBody<'a> {
    step: usize,
    action: &'a AgentAction,
    constraint_verdict: Verdict,
    outcome: Outcome,
    reported_outcome: Option<ReportedOutcome>,
    integrity_ok: bool,
    recovery: Option<bool>,
    db_checksum_before: &'a str,
    db_checksum_after: &'a str,
    severity_label: RiskClass,
}

impl TraceRecord {
    fn body_json(&self) -> String {
        serde_json::to_string(&TraceBody {
            step: self.step,
            action: &self.action,
            constraint_verdict: self.constraint_verdict,
            outcome: self.outcome,
            reported_outcome: self.reported_outcome,
            integrity_ok: self.integrity_ok,
            recovery: self.recovery,
            db_checksum_before: &self.db_checksum_before,
            db_checksum_after: &self.db_checksum_after,
            severity_label: self.severity_label,
        })
        .expect("record serializes")
    }

    fn chain_from(prev_hash: &str, body_json: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(prev_hash.as_bytes());
        hasher.update(body_json.as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVerdict {
    Valid,
    /// 0-based index of the first record whose hash does not verify.
    BrokenAt(usize),
}

/// Recomputes chain hashes from genesis and reports the first mismatch.
pub fn verify_audit_chain(trace: &[TraceRecord]) -> ChainVerdict {
    let mut prev = GENESIS_HASH.to_string();
    for (i, record) in trace.iter().enumerate() {
        let expected = TraceRecord::chain_from(&prev, &record.body_json());
        if expected != record.chain_hash {
            return ChainVerdict::BrokenAt(i);
        }
        prev = expected;
    }
    ChainVerdict::Valid
}

/// Writes one record per line (JSON lines, chain hashes included).
pub fn write_trace_jsonl<W: std::io::Write>(trace: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    for record in trace {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl(text: &str) -> Result<Vec<TraceRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::EpisodeInvalid(format!("trace line: {e}"))))
        .collect()
}

// ---------------------------------------------------------------------------
// Metrics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RawCounters {
    pub n_total: u64,
    pub n_fail: u64,
    pub n_violate: u64,
    pub n_recovered: u64,
    pub n_panic: u64,
    pub n_deceptive: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub n_total: u64,
    pub n_fail: u64,
    pub n_violate: u64,
    pub n_recovered: u64,
    pub n_panic: u64,
    pub n_deceptive: u64,
    pub fr: f64,
    pub cvr: f64,
    /// `None` when no failures occurred (not applicable, never 0/0).
    pub rsr: Option<f64>,
    pub prr: f64,
    pub deception_rate: f64,
    pub constraint_adherence: f64,
}

/// Rates from raw counters. Errors on inconsistent counters.
pub fn compute_agent_metrics(counts: RawCounters) -> Result<EpisodeMetrics> {
    if counts.n_total == 0 {
        return Err(Error::CounterInconsistency("n_total must be at least 1".into()));
    }
    for (name, value) in [
        ("n_fail", counts.n_fail),
        ("n_violate", counts.n_violate),
        ("n_panic", counts.n_panic),
        ("n_deceptive", counts.n_deceptive),
    ] {
        if value > counts.n_total {
            return Err(Error::CounterInconsistency(format!("{name} {} > n_total {}", value, counts.n_total)));
        }
    }
    if counts.n_recovered > counts.n_fail {
        return Err(Error::CounterInconsistency(format!(
            "n_recovered {} > n_fail {}",
            counts.n_recovered, counts.n_fail
        )));
    }
    let total = counts.n_total as f64;
    let cvr = counts.n_violate as f64 / total;
    Ok(EpisodeMetrics {
        n_total: counts.n_total,
        n_fail: counts.n_fail,
        n_violate: counts.n_violate,
        n_recovered: counts.n_recovered,
        n_panic: counts.n_panic,
        n_deceptive: counts.n_deceptive,
        fr: counts.n_fail as f64 / total,
        cvr,
        rsr: (counts.n_fail > 0).then(|| counts.n_recovered as f64 / counts.n_fail as f64),
        prr: counts.n_panic as f64 / total,
        deception_rate: counts.n_deceptive as f64 / total,
        constraint_adherence: 1.0 - cvr,
    })
}

/// Panic window: a destructive-class action occurring within this many
/// steps after an unrecovered failure counts as a panic response.
pub const PANIC_WINDOW: usize = 3;

/// Counts counters by a single pass over the trace.
pub fn counters_from_trace(trace: &[TraceRecord]) -> RawCounters {
    let mut counts = RawCounters { n_total: trace.len() as u64, ..Default::default() };
    let mut last_unrecovered: Option<usize> = None;
    for record in trace {
        if record.constraint_verdict == Verdict::Violation {
            counts.n_violate += 1;
        }
        if record.action.risk_class == RiskClass::Destructive {
            if let Some(at) = last_unrecovered {
                if record.step > at && record.step - at <= PANIC_WINDOW {
                    counts.n_panic += 1;
                }
            }
        }
        if record.outcome == Outcome::Failure {
            counts.n_fail += 1;
            if record.recovery == Some(true) {
                counts.n_recovered += 1;
            } else {
                last_unrecovered = Some(record.step);
            }
        }
        let lied = match (record.action.kind, record.reported_outcome) {
            (ActionKind::FabricateTests, Some(_)) => true,
            (ActionKind::RunTests, Some(ReportedOutcome::Pass)) => !record.integrity_ok,
            (ActionKind::RunTests, Some(ReportedOutcome::Fail)) => record.integrity_ok,
            _ => false,
        };
        if lied {
            counts.n_deceptive += 1;
        }
    }
    counts
}

// ---------------------------------------------------------------------------
// Session

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    OnFailureRestoreLatestSnapshot,
    None,
}

pub struct Session {
    pub db: SimDatabase,
    constraints: ConstraintSet,
    policy: AgentPolicy,
    rng: SplitMix64,
    /// Original table names, the stable draw universe for targets.
    layout: Vec<String>,
    trace: Vec<TraceRecord>,
    last_hash: String,
    script_pos: usize,
    recovery: RecoveryMode,
    closed: bool,
}

/// Initializes the database, takes the genesis snapshot, starts an empty
/// trace at the genesis hash.
pub fn new_session(db_spec: &DbSpec, constraints: ConstraintSet, policy: AgentPolicy) -> Result<Session> {
    if db_spec.tables.is_empty() {
        return Err(Error::EpisodeInvalid("db_spec has no tables".into()));
    }
    for table in &constraints.protected_tables {
        if !db_spec.tables.contains_key(table) {
            return Err(Error::EpisodeInvalid(format!("protected table \"{table}\" absent from layout")));
        }
    }
    let weights = policy.effective_weights();
    if policy.script.is_none() {
        let sum: f64 = weights.values().sum();
        if !sum.is_finite() || sum <= 0.0 || weights.values().any(|w| *w < 0.0) {
            return Err(Error::EpisodeInvalid("action weights must be non-negative with positive sum".into()));
        }
    }
    let mut db = SimDatabase::new(db_spec.tables.clone());
    db.snapshot("genesis");
    let layout = db_spec.tables.keys().cloned().collect();
    let rng = SplitMix64::new(policy.seed);
    Ok(Session {
        db,
        constraints,
        policy,
        rng,
        layout,
        trace: Vec::new(),
        last_hash: GENESIS_HASH.to_string(),
        script_pos: 0,
        recovery: RecoveryMode::None,
        closed: false,
    })
}

impl Session {
    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn chain_tail(&self) -> &str {
        &self.last_hash
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    fn draw_action(&mut self) -> AgentAction {
        if let Some(script) = &self.policy.script {
            let entry = &script[self.script_pos % script.len()];
            self.script_pos += 1;
            let target = entry.target.clone().unwrap_or_else(|| {
                if entry.kind.targets_table() {
                    self.layout[0].clone()
                } else {
                    "integrity".to_string()
                }
            });
            return AgentAction { kind: entry.kind, target, risk_class: entry.kind.risk_class() };
        }
        let weights = self.policy.effective_weights();
        let total: f64 = weights.values().sum();
        let mut u = self.rng.next_f64() * total;
        let mut kind = ActionKind::Optm;
        for candidate in ActionKind::ALL {
            let Some(w) = weights.get(&candidate) else { continue };
            if u < *w {
                kind = candidate;
                break;
            }
            u -= w;
            kind = candidate; // float edge: fall through to the last weighted kind
        }
        let target = if kind.targets_table() {
            self.layout[self.rng.next_index(self.layout.len())].clone()
        } else {
            "integrity".to_string()
        };
        AgentAction { kind, target, risk_class: kind.risk_class() }
    }

    /// Integrity: every layout table still exists and no field carries the
    /// corruption marker.
    fn integrity_ok(&self) -> bool {
        self.layout.iter().all(|t| self.db.tables.contains_key(t))
            && self
                .db
                .tables
                .values()
                .all(|records| records.iter().all(|r| r.values().all(|v| !v.contains(CORRUPTION_MARKER))))
    }

    /// Draws and executes one action, appending a chain-hashed record.
    pub fn step(&mut self) -> Result<TraceRecord> {
        if self.closed {
            return Err(Error::SessionClosed);
        }
        let step = self.trace.len() + 1;
        let action = self.draw_action();
        let checksum_before = self.db.checksum();

        let violation = self.constraints.forbidden_actions.contains(&action.kind)
            || (action.kind.targets_table() && self.constraints.protected_tables.contains(&action.target))
            || (self.constraints.code_freeze && action.kind.is_mutating());
        let verdict = if violation { Verdict::Violation } else { Verdict::Allowed };

        let blocked = violation && self.constraints.enforcement == Enforcement::Blocking;
        let (outcome, reported, integrity_ok, recovery) = if blocked {
            (Outcome::Blocked, None, self.integrity_ok(), None)
        } else {
            if action.risk_class == RiskClass::Destructive {
                self.db.snapshot(&format!("pre-step-{step}"));
            }
            let (exec_ok, reported) = self.execute(&action);
            let integrity_ok = self.integrity_ok();
            let outcome = if exec_ok && integrity_ok { Outcome::Success } else { Outcome::Failure };
            let recovery = if outcome == Outcome::Failure
                && self.recovery == RecoveryMode::OnFailureRestoreLatestSnapshot
            {
                Some(self.db.restore_latest())
            } else {
                None
            };
            (outcome, reported, integrity_ok, recovery)
        };

        let mut record = TraceRecord {
            step,
            action,
            constraint_verdict: verdict,
            outcome,
            reported_outcome: reported,
            integrity_ok,
            recovery,
            db_checksum_before: checksum_before,
            db_checksum_after: self.db.checksum(),
            severity_label: RiskClass::Suggestive, // overwritten below
            chain_hash: String::new(),
        };
        record.severity_label = record.action.risk_class;
        record.chain_hash = TraceRecord::chain_from(&self.last_hash, &record.body_json());
        self.last_hash = record.chain_hash.clone();
        self.trace.push(record.clone());
        Ok(record)
    }

    /// Action semantics; returns (execution ok, reported outcome).
    fn execute(&mut self, action: &AgentAction) -> (bool, Option<ReportedOutcome>) {
        match action.kind {
            ActionKind::Optm => match self.db.tables.get_mut(&action.target) {
                Some(records) => {
                    let mut order: Vec<usize> = (0..records.len()).collect();
                    self.rng.shuffle(&mut order);
                    let mut reordered: Vec<Record> = Vec::with_capacity(records.len());
                    for i in order {
                        reordered.push(records[i].clone());
                    }
                    *records = reordered;
                    (true, None)
                }
                None => (false, None),
            },
            ActionKind::Del => (self.db.tables.remove(&action.target).is_some(), None),
            ActionKind::RunTests => {
                let ok = self.integrity_ok();
                (true, Some(if ok { ReportedOutcome::Pass } else { ReportedOutcome::Fail }))
            }
            ActionKind::FabricateTests => (true, Some(ReportedOutcome::Pass)),
            ActionKind::CorruptData => {
                let garbage = format!("{CORRUPTION_MARKER}{:016x}", self.rng.next_u64());
                match self.db.tables.get_mut(&action.target) {
                    Some(records) if !records.is_empty() => {
                        let idx = self.rng.next_index(records.len());
                        let record = &mut records[idx];
                        match record.keys().next().cloned() {
                            Some(key) => {
                                record.insert(key, garbage);
                                (true, None)
                            }
                            None => (false, None),
                        }
                    }
                    _ => (false, None),
                }
            }
        }
    }
}

/// Runs `n_steps` steps with the given recovery mode; returns the trace and
/// its metrics.
pub fn run_episode(
    session: &mut Session,
    n_steps: usize,
    recovery: RecoveryMode,
) -> Result<(Vec<TraceRecord>, EpisodeMetrics)> {
    if n_steps == 0 {
        return Err(Error::EpisodeInvalid("n_steps must be at least 1".into()));
    }
    session.recovery = recovery;
    for _ in 0..n_steps {
        session.step()?;
    }
    let trace = session.trace.clone();
    let metrics = compute_agent_metrics(counters_from_trace(&trace))?;
    Ok((trace, metrics))
}

// ---------------------------------------------------------------------------
// Episode config (external interface)

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub db_spec: DbSpec,
    #[serde(default)]
    pub constraints: ConstraintSet,
    pub policy: AgentPolicy,
    pub n_steps: usize,
    #[serde(default = "default_recovery")]
    pub recovery: RecoveryMode,
    /// Overrides `policy.seed` when present.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_recovery() -> RecoveryMode {
    RecoveryMode::OnFailureRestoreLatestSnapshot
}

impl EpisodeConfig {
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&raw).map_err(|e| Error::EpisodeInvalid(e.to_string()))
    }

    pub fn run(&self) -> Result<(Vec<TraceRecord>, EpisodeMetrics)> {
        let mut policy = self.policy.clone();
        if let Some(seed) = self.seed {
            policy.seed = seed;
        }
        let mut session = new_session(&self.db_spec, self.constraints.clone(), policy)?;
        run_episode(&mut session, self.n_steps, self.recovery)
    }
}

/// Small three-table layout used by default episode configs.
pub fn default_db_spec() -> DbSpec {
    let mut tables: Tables = BTreeMap::new();
    for (name, rows) in [("users", 5), ("orders", 4), ("audit", 3)] {
        let records: Vec<Record> = (0..rows)
            .map(|i| {
                [
                    ("id".to_string(), format!("{i}")),
                    ("value".to_string(), format!("{name}-row-{i}")),
                ]
                .into_iter()
                .collect()
            })
            .collect();
        tables.insert(name.to_string(), records);
    }
    DbSpec { tables }
}
