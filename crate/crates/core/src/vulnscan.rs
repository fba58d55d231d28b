//! CWE-classified vulnerability detection over parsed source.
//!
//! Rules are data-driven: a registry file declares rule ids, CWE ids,
//! severities and pattern parameters; the engine interprets five structural
//! pattern kinds. Analysis is deliberately syntactic — straight-line name
//! resolution only, no inter-procedural flow.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Node, NodeKind, Payload, SourceTree, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    #[serde(rename = "LOW")]
    Low,
    #[serde(rename = "MEDIUM")]
    Medium,
    #[serde(rename = "HIGH")]
    High,
}

impl Severity {
    pub fn weight(self) -> u64 {
        match self {
            Severity::Low => 1,
            Severity::Medium => 2,
            Severity::High => 3,
        }
    }

    /// Numeric level used by the severity power-law fit: LOW=1, MEDIUM=2, HIGH=3.
    pub fn level(self) -> u32 {
        match self {
            Severity::Low => 1,
            Severity::Medium => 2,
            Severity::High => 3,
        }
    }
}

/// A detected vulnerability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnFinding {
    pub cwe_id: String,
    pub severity: Severity,
    pub span: Span,
    pub evidence: String,
    pub rule_id: String,
}

/// Structural pattern interpreted by the engine.
#[derive(Debug, Clone)]
pub enum RuleKind {
    /// Query-execution sink fed a string built with any non-literal part.
    SqlInjection { callee_suffixes: Vec<String> },
    /// Shell-execution sink with a shell-enabling kwarg or non-literal command string.
    CommandInjection { callee_suffixes: Vec<String>, shell_kwarg: String },
    /// Dynamic evaluation of a non-literal argument.
    EvalInjection { callees: Vec<String> },
    /// Non-empty string literal assigned to a credential-like name.
    HardcodedCredential { name_pattern: Regex },
    /// External-input source value reaching any sink callee in the same
    /// straight-line chain with no intervening validator call.
    TaintedSinkFlow { source_callees: Vec<String>, validator_prefixes: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub rule_id: String,
    pub cwe_id: String,
    pub severity: Severity,
    pub kind: RuleKind,
}

#[derive(Debug, Clone)]
pub struct RuleRegistry {
    pub rules: Vec<Rule>,
    pub version: String,
}

// ---------------------------------------------------------------------------
// Registry file schema

#[derive(Debug, Serialize, Deserialize)]
struct RegistryFile {
    version: String,
    rules: Vec<RuleEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RuleEntry {
    rule_id: String,
    cwe: String,
    severity: Severity,
    kind: String,
    #[serde(default)]
    params: serde_json::Value,
}

impl RuleRegistry {
    /// The five baseline rules shipped with the tool.
    pub fn baseline() -> Self {
        let file: RegistryFile =
            serde_json::from_str(BASELINE_REGISTRY_JSON).expect("baseline registry is valid");
        Self::from_file_schema(file).expect("baseline registry is valid")
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let file: RegistryFile =
            serde_json::from_str(&raw).map_err(|e| Error::RegistryInvalid(e.to_string()))?;
        Self::from_file_schema(file)
    }

    fn from_file_schema(file: RegistryFile) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut rules = Vec::new();
        for entry in file.rules {
            if !seen.insert(entry.rule_id.clone()) {
                return Err(Error::RegistryInvalid(format!("duplicate rule_id \"{}\"", entry.rule_id)));
            }
            let p = &entry.params;
            let strings = |key: &str| -> Vec<String> {
                p.get(key)
                    .and_then(|v| v.as_array())
                    .map(|a| a.iter().filter_map(|s| s.as_str().map(str::to_string)).collect())
                    .unwrap_or_default()
            };
            let kind = match entry.kind.as_str() {
                "sql_injection" => RuleKind::SqlInjection { callee_suffixes: strings("callee_suffixes") },
                "command_injection" => RuleKind::CommandInjection {
                    callee_suffixes: strings("callee_suffixes"),
                    shell_kwarg: p
                        .get("shell_kwarg")
                        .and_then(|v| v.as_str())
                        .unwrap_or("shell")
                        .to_string(),
                },
                "eval_injection" => RuleKind::EvalInjection { callees: strings("callees") },
                "hardcoded_credential" => {
                    let pat = p
                        .get("name_pattern")
                        .and_then(|v| v.as_str())
                        .ok_or_else(|| Error::RegistryInvalid(format!("rule {}: missing name_pattern", entry.rule_id)))?;
                    let re = Regex::new(&format!("(?i)({pat})"))
                        .map_err(|e| Error::RegistryInvalid(format!("rule {}: {e}", entry.rule_id)))?;
                    RuleKind::HardcodedCredential { name_pattern: re }
                }
                "tainted_sink_flow" => RuleKind::TaintedSinkFlow {
                    source_callees: strings("source_callees"),
                    validator_prefixes: strings("validator_prefixes"),
                },
                other => {
                    return Err(Error::RegistryInvalid(format!("rule {}: unknown kind \"{other}\"", entry.rule_id)))
                }
            };
            rules.push(Rule {
                rule_id: entry.rule_id,
                cwe_id: entry.cwe,
                severity: entry.severity,
                kind,
            });
        }
        Ok(Self { rules, version: file.version })
    }
}

/// Baseline rule definitions; also written to the shipped registry fixture.
pub const BASELINE_REGISTRY_JSON: &str = r#"{
  "version": "1.0",
  "rules": [
    {
      "rule_id": "VS-089",
      "cwe": "CWE-89",
      "severity": "HIGH",
      "kind": "sql_injection",
      "params": { "callee_suffixes": ["execute", "executescript"] }
    },
    {
      "rule_id": "VS-078",
      "cwe": "CWE-78",
      "severity": "HIGH",
      "kind": "command_injection",
      "params": { "callee_suffixes": ["system", "popen", "call", "run"], "shell_kwarg": "shell" }
    },
    {
      "rule_id": "VS-095",
      "cwe": "CWE-95",
      "severity": "HIGH",
      "kind": "eval_injection",
      "params": { "callees": ["eval", "exec"] }
    },
    {
      "rule_id": "VS-798",
      "cwe": "CWE-798",
      "severity": "MEDIUM",
      "kind": "hardcoded_credential",
      "params": { "name_pattern": "password|passwd|secret|api_key|token" }
    },
    {
      "rule_id": "VS-020",
      "cwe": "CWE-20",
      "severity": "MEDIUM",
      "kind": "tainted_sink_flow",
      "params": {
        "source_callees": ["input", "raw_input"],
        "validator_prefixes": ["validate", "sanitize", "escape"]
      }
    }
  ]
}"#;

// ---------------------------------------------------------------------------
// Scanning

const RESOLVE_DEPTH: usize = 8;

struct Scanner<'a> {
    registry: &'a RuleRegistry,
    /// Last-segment matchers of every sink rule, for the tainted-flow rule.
    sink_segments: BTreeSet<&'a str>,
    findings: Vec<VulnFinding>,
    emitted: BTreeSet<(String, usize)>,
}

fn last_segment(dotted: &str) -> &str {
    dotted.rsplit('.').next().unwrap_or(dotted)
}

/// Applies every registry rule to the tree; findings sorted by
/// (start line, rule_id).
pub fn scan_vulns(tree: &SourceTree, registry: &RuleRegistry) -> Vec<VulnFinding> {
    let mut sink_segments = BTreeSet::new();
    for rule in &registry.rules {
        match &rule.kind {
            RuleKind::SqlInjection { callee_suffixes }
            | RuleKind::CommandInjection { callee_suffixes, .. } => {
                sink_segments.extend(callee_suffixes.iter().map(String::as_str));
            }
            RuleKind::EvalInjection { callees } => {
                sink_segments.extend(callees.iter().map(String::as_str));
            }
            _ => {}
        }
    }
    let mut scanner =
        Scanner { registry, sink_segments, findings: Vec::new(), emitted: BTreeSet::new() };
    scanner.scan_container(&tree.nodes, &mut HashMap::new());
    scanner.findings.sort_by(|a, b| (a.span.start, &a.rule_id).cmp(&(b.span.start, &b.rule_id)));
    scanner.findings
}

impl<'a> Scanner<'a> {
    fn scan_container<'t>(&mut self, stmts: &'t [Node], bindings: &mut HashMap<String, &'t Node>) {
        for stmt in stmts {
            match (&stmt.kind, &stmt.payload) {
                (NodeKind::Assign, Payload::Assign { target }) => {
                    self.check_credential_rules(stmt, target);
                    self.visit_calls(stmt, bindings);
                    bindings.insert(target.clone(), &stmt.children[0]);
                }
                (NodeKind::FunctionDef, _) => {
                    // fresh straight-line scope per function body
                    let mut inner: HashMap<String, &Node> = HashMap::new();
                    self.scan_container(&stmt.children, &mut inner);
                }
                _ => self.visit_calls(stmt, bindings),
            }
        }
    }

    fn visit_calls(&mut self, node: &Node, bindings: &HashMap<String, &Node>) {
        if node.kind == NodeKind::Call {
            self.check_call(node, bindings);
        }
        for child in &node.children {
            self.visit_calls(child, bindings);
        }
    }

    fn emit(&mut self, rule: &Rule, span: Span, evidence: String) {
        if self.emitted.insert((rule.rule_id.clone(), span.start)) {
            self.findings.push(VulnFinding {
                cwe_id: rule.cwe_id.clone(),
                severity: rule.severity,
                span,
                evidence,
                rule_id: rule.rule_id.clone(),
            });
        }
    }

    fn check_credential_rules(&mut self, assign: &Node, target: &str) {
        let value = &assign.children[0];
        let len = match (&value.kind, &value.payload) {
            (NodeKind::StringLit, Payload::StringLit { value }) if !value.is_empty() => value.len(),
            _ => return,
        };
        let registry = self.registry;
        for rule in &registry.rules {
            if let RuleKind::HardcodedCredential { name_pattern } = &rule.kind {
                if name_pattern.is_match(last_segment(target)) {
                    self.emit(
                        rule,
                        assign.span,
                        format!("string literal ({len} chars) assigned to credential-like name \"{target}\""),
                    );
                }
            }
        }
    }

    fn check_call(&mut self, call: &Node, bindings: &HashMap<String, &Node>) {
        let Some(callee) = call.callee_name().map(str::to_string) else { return };
        let segment = last_segment(&callee).to_string();
        let registry = self.registry;

        for rule in &registry.rules {
            match &rule.kind {
                RuleKind::SqlInjection { callee_suffixes } => {
                    if callee_suffixes.iter().any(|s| s == &segment) {
                        if let Some(arg) = call.positional_args().first() {
                            if self.is_built_string_with_nonliteral(arg, bindings, RESOLVE_DEPTH) {
                                self.emit(
                                    rule,
                                    call.span,
                                    format!("{callee} receives a query string built from non-literal parts"),
                                );
                            }
                        }
                    }
                }
                RuleKind::CommandInjection { callee_suffixes, shell_kwarg } => {
                    if callee_suffixes.iter().any(|s| s == &segment) {
                        let shell_on = call
                            .keyword_args()
                            .iter()
                            .find(|(n, _)| n == shell_kwarg)
                            .is_some_and(|(_, v)| shell_enabling(v));
                        if shell_on {
                            self.emit(
                                rule,
                                call.span,
                                format!("{callee} invoked with shell-enabling keyword \"{shell_kwarg}\""),
                            );
                        } else if let Some(arg) = call.positional_args().first() {
                            if self.is_nonliteral_command_string(arg, bindings, RESOLVE_DEPTH) {
                                self.emit(
                                    rule,
                                    call.span,
                                    format!("{callee} receives a non-literal command string"),
                                );
                            }
                        }
                    }
                }
                RuleKind::EvalInjection { callees } => {
                    if callees.iter().any(|c| c == &segment) {
                        let nonliteral = call
                            .positional_args()
                            .iter()
                            .any(|a| !self.is_literal(a, bindings, RESOLVE_DEPTH));
                        if nonliteral {
                            self.emit(rule, call.span, format!("{callee} of a non-literal argument"));
                        }
                    }
                }
                RuleKind::TaintedSinkFlow { source_callees, validator_prefixes } => {
                    if self.sink_segments.contains(segment.as_str()) {
                        let tainted = call
                            .positional_args()
                            .iter()
                            .chain(call.keyword_args().into_iter().map(|(_, v)| v))
                            .any(|a| {
                                self.is_tainted(a, source_callees, validator_prefixes, bindings, RESOLVE_DEPTH)
                            });
                        if tainted {
                            self.emit(
                                rule,
                                call.span,
                                format!("external input reaches sink {callee} without validation"),
                            );
                        }
                    }
                }
                RuleKind::HardcodedCredential { .. } => {}
            }
        }
    }

    /// Literal: string/number literals, non-interpolating f-strings, and
    /// concat/format expressions made only of literals. Names resolve through
    /// straight-line bindings; anything unresolvable is non-literal.
    fn is_literal(&self, expr: &Node, bindings: &HashMap<String, &Node>, depth: usize) -> bool {
        match (&expr.kind, &expr.payload) {
            (NodeKind::StringLit, _) | (NodeKind::NumberLit, _) => true,
            (NodeKind::FormatExpr, Payload::FormatExpr { interpolates }) => {
                if expr.children.is_empty() {
                    // f-string: interpolated content is treated as non-literal
                    !*interpolates
                } else {
                    expr.children.iter().all(|c| self.is_literal(c, bindings, depth))
                }
            }
            (NodeKind::BinOpConcat, _) => expr.children.iter().all(|c| self.is_literal(c, bindings, depth)),
            (NodeKind::Name, Payload::Name { ident }) => {
                if depth == 0 {
                    return false;
                }
                match bindings.get(ident) {
                    Some(bound) => self.is_literal(bound, bindings, depth - 1),
                    None => false,
                }
            }
            _ => false,
        }
    }

    /// A string *built* by concatenation/%-format/interpolation with at
    /// least one non-literal part (bare unresolvable names do not qualify).
    fn is_built_string_with_nonliteral(
        &self,
        expr: &Node,
        bindings: &HashMap<String, &Node>,
        depth: usize,
    ) -> bool {
        match (&expr.kind, &expr.payload) {
            (NodeKind::BinOpConcat, _) => !self.is_literal(expr, bindings, depth),
            (NodeKind::FormatExpr, Payload::FormatExpr { interpolates }) => {
                if expr.children.is_empty() {
                    *interpolates
                } else {
                    !self.is_literal(expr, bindings, depth)
                }
            }
            (NodeKind::Name, Payload::Name { ident }) => {
                depth > 0
                    && bindings
                        .get(ident)
                        .is_some_and(|bound| self.is_built_string_with_nonliteral(bound, bindings, depth - 1))
            }
            _ => false,
        }
    }

    /// Command-string judgement for shell sinks: string-shaped and not a
    /// pure literal. Unresolvable names count as non-literal; non-string
    /// shapes (e.g. list literals) are skipped.
    fn is_nonliteral_command_string(
        &self,
        expr: &Node,
        bindings: &HashMap<String, &Node>,
        depth: usize,
    ) -> bool {
        match (&expr.kind, &expr.payload) {
            (NodeKind::StringLit, _) => false,
            (NodeKind::BinOpConcat, _) | (NodeKind::FormatExpr, _) => !self.is_literal(expr, bindings, depth),
            (NodeKind::Name, Payload::Name { ident }) => {
                if depth == 0 {
                    return true;
                }
                match bindings.get(ident) {
                    Some(bound) => self.is_nonliteral_command_string(bound, bindings, depth - 1),
                    None => true,
                }
            }
            _ => false,
        }
    }

    /// Taint: a source-call value, propagated through names, concatenation,
    /// formatting and non-validator calls; absorbed by validator calls.
    fn is_tainted(
        &self,
        expr: &Node,
        sources: &[String],
        validators: &[String],
        bindings: &HashMap<String, &Node>,
        depth: usize,
    ) -> bool {
        match (&expr.kind, &expr.payload) {
            (NodeKind::Call, _) => {
                if let Some(name) = expr.callee_name() {
                    let seg = last_segment(name);
                    if validators.iter().any(|v| seg.starts_with(v.as_str())) {
                        return false;
                    }
                    if sources.iter().any(|s| s == seg) {
                        return true;
                    }
                }
                expr.positional_args()
                    .iter()
                    .chain(expr.keyword_args().into_iter().map(|(_, v)| v))
                    .any(|a| self.is_tainted(a, sources, validators, bindings, depth))
            }
            (NodeKind::Name, Payload::Name { ident }) => {
                depth > 0
                    && bindings
                        .get(ident)
                        .is_some_and(|bound| self.is_tainted(bound, sources, validators, bindings, depth - 1))
            }
            (NodeKind::BinOpConcat, _) | (NodeKind::FormatExpr, _) => {
                expr.children.iter().any(|c| self.is_tainted(c, sources, validators, bindings, depth))
            }
            _ => false,
        }
    }
}

fn shell_enabling(value: &Node) -> bool {
    match (&value.kind, &value.payload) {
        (NodeKind::Name, Payload::Name { ident }) => ident != "False",
        (NodeKind::NumberLit, Payload::NumberLit { value }) => value != "0",
        _ => true,
    }
}

// ---------------------------------------------------------------------------
// Scores

/// Weighted severity sum: 3·HIGH + 2·MEDIUM + 1·LOW.
pub fn severity_score(findings: &[VulnFinding]) -> u64 {
    findings.iter().map(|f| f.severity.weight()).sum()
}

/// Weighted findings per effective line of code.
pub fn vulnerability_density(findings: &[VulnFinding], loc: usize) -> Result<f64> {
    if loc == 0 {
        return Err(Error::ZeroLoc);
    }
    Ok(severity_score(findings) as f64 / loc as f64)
}

/// Counts per severity; absent levels reported as 0.
pub fn severity_histogram(findings: &[VulnFinding]) -> BTreeMap<Severity, u64> {
    let mut hist: BTreeMap<Severity, u64> =
        [(Severity::Low, 0), (Severity::Medium, 0), (Severity::High, 0)].into_iter().collect();
    for f in findings {
        *hist.get_mut(&f.severity).unwrap() += 1;
    }
    hist
}

/// Number of distinct CWE ids across findings.
pub fn cwe_diversity(findings: &[VulnFinding]) -> usize {
    findings.iter().map(|f| f.cwe_id.as_str()).collect::<BTreeSet<_>>().len()
}
