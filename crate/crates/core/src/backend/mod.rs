//! Model backend abstraction, worker assignment, and the generation
//! safety gate.
//!
//! Every backend speaks one request/response pair of single-line JSON
//! objects — request `{prompt, specificity, temperature, top_p, max_tokens,
//! seed}`, response `{code, backend_meta}` — over a subprocess's standard
//! streams (`cmd:` endpoints) or an HTTP POST body (`http:` endpoints).
//! `mock:<bank-id>` endpoints run the in-process deterministic mock.
//!
//! The gate screens generated code for unsafe identifier tokens and retries
//! with the temperature reduced by 0.2 per attempt (floor 0.1), at most 3
//! retries, then marks the record exhausted.

pub mod mock;

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::Prompt;
use crate::error::{Error, Result};
use crate::syntax::identifier_occurrences;

pub use mock::{MockBackend, TemplateBank, TemplateEntry};

/// Unsafe identifier set screened by the generation gate.
pub const DEFAULT_UNSAFE_PATTERNS: [&str; 4] = ["eval", "exec", "pickle", "subprocess"];

pub const DEFAULT_TIMEOUT_SECS: u64 = 120;
pub const DEFAULT_MAX_RETRIES: usize = 3;
const TEMPERATURE_STEP: f64 = 0.2;
const TEMPERATURE_FLOOR: f64 = 0.1;

/// One configured model behind an endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub name: String,
    /// `mock:<bank-id>`, `cmd:<command line>`, or an `http(s)://` URL.
    pub endpoint: String,
    pub param_count_billions: f64,
    #[serde(default)]
    pub quantization_tag: String,
    #[serde(default)]
    pub worker_index: usize,
}

/// Decoding parameters; defaults are temperature 0.7, top-p 0.95,
/// 1024 max tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub seed: u64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self { temperature: 0.7, top_p: 0.95, max_tokens: 1024, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecificityLevel {
    Low,
    Medium,
    High,
}

impl SpecificityLevel {
    pub const ALL: [SpecificityLevel; 3] =
        [SpecificityLevel::Low, SpecificityLevel::Medium, SpecificityLevel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            SpecificityLevel::Low => "low",
            SpecificityLevel::Medium => "medium",
            SpecificityLevel::High => "high",
        }
    }
}

pub const MEDIUM_SUFFIX: &str = "Include input validation and error handling.";
pub const HIGH_SUFFIX: &str =
    "Follow secure-coding guidelines; no dynamic code execution; parameterize all queries.";

/// Prompt augmentation per specificity level. The wire `prompt` field
/// carries this templated text.
pub fn apply_specificity(prompt: &str, level: SpecificityLevel) -> String {
    match level {
        SpecificityLevel::Low => prompt.to_string(),
        SpecificityLevel::Medium => format!("{prompt}\n{MEDIUM_SUFFIX}"),
        SpecificityLevel::High => format!("{prompt}\n{MEDIUM_SUFFIX}\n{HIGH_SUFFIX}"),
    }
}

/// The template text per level, with `{prompt}` marking the raw prompt;
/// echoed verbatim into result bundles so runs are auditable.
pub fn specificity_templates() -> std::collections::BTreeMap<String, String> {
    [
        ("low".to_string(), "{prompt}".to_string()),
        ("medium".to_string(), format!("{{prompt}}\n{MEDIUM_SUFFIX}")),
        ("high".to_string(), format!("{{prompt}}\n{MEDIUM_SUFFIX}\n{HIGH_SUFFIX}")),
    ]
    .into_iter()
    .collect()
}

/// One generation cell result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub prompt_id: String,
    pub model_name: String,
    pub specificity: SpecificityLevel,
    pub trial_index: usize,
    pub code: String,
    pub gate_attempts: usize,
    pub gate_exhausted: bool,
    pub response_time_ms: u64,
    pub params_used: GenerationParams,
}

/// Internal request passed to adapters. Wire adapters serialize only the
/// pinned protocol fields; `prompt_id` and `attempt` exist for the mock.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub prompt_id: &'a str,
    pub prompt: &'a str,
    pub specificity: SpecificityLevel,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub seed: u64,
    pub attempt: usize,
}

#[derive(Debug, Clone)]
pub struct BackendResponse {
    pub code: String,
    pub backend_meta: serde_json::Value,
    /// Deterministic substitute for wall-clock timing (mock only).
    pub synthetic_ms: Option<u64>,
}

pub trait Backend: Send + Sync {
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse>;
}

// ---------------------------------------------------------------------------
// Worker assignment (round-robin)

/// Round-robin worker assignment: `(current mod n_workers) + 1`.
pub fn assign_worker(current: u64, n_workers: usize) -> Result<usize> {
    if n_workers == 0 {
        return Err(Error::NoWorkers);
    }
    Ok((current % n_workers as u64) as usize + 1)
}

// ---------------------------------------------------------------------------
// Safety gate

/// Gate configuration: the screened identifier set and the retry schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateConfig {
    pub unsafe_patterns: Vec<String>,
    pub max_retries: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            unsafe_patterns: DEFAULT_UNSAFE_PATTERNS.iter().map(|s| s.to_string()).collect(),
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

/// Unsafe identifiers occurring in `code` as tokens (string literals and
/// comments do not count).
pub fn screen_unsafe(code: &str, patterns: &[String]) -> BTreeSet<String> {
    identifier_occurrences(code, patterns)
}

/// Generates one record through the gate: request, screen, retry with
/// lowered temperature, up to `gate.max_retries` retries; on exhaustion the
/// record carries empty code and `gate_exhausted = true`.
pub fn generate_sample(
    backend: &dyn Backend,
    model: &ModelDescriptor,
    prompt: &Prompt,
    level: SpecificityLevel,
    params: &GenerationParams,
    trial_index: usize,
    gate: &GateConfig,
) -> Result<GenerationRecord> {
    let templated = apply_specificity(&prompt.text, level);
    let mut temperature = params.temperature;
    let mut elapsed_ms: u64 = 0;

    let total_attempts = gate.max_retries + 1;
    for attempt in 1..=total_attempts {
        let req = GenerationRequest {
            prompt_id: &prompt.id,
            prompt: &templated,
            specificity: level,
            temperature,
            top_p: params.top_p,
            max_tokens: params.max_tokens,
            seed: params.seed,
            attempt,
        };
        let started = Instant::now();
        let resp = backend.generate(&req)?;
        elapsed_ms += resp.synthetic_ms.unwrap_or_else(|| started.elapsed().as_millis() as u64);

        let hits = screen_unsafe(&resp.code, &gate.unsafe_patterns);
        if hits.is_empty() {
            return Ok(GenerationRecord {
                prompt_id: prompt.id.clone(),
                model_name: model.name.clone(),
                specificity: level,
                trial_index,
                code: resp.code,
                gate_attempts: attempt,
                gate_exhausted: false,
                response_time_ms: elapsed_ms,
                params_used: GenerationParams { temperature, ..*params },
            });
        }
        temperature = (temperature - TEMPERATURE_STEP).max(TEMPERATURE_FLOOR);
    }

    Ok(GenerationRecord {
        prompt_id: prompt.id.clone(),
        model_name: model.name.clone(),
        specificity: level,
        trial_index,
        code: String::new(),
        gate_attempts: total_attempts,
        gate_exhausted: true,
        response_time_ms: elapsed_ms,
        params_used: GenerationParams { temperature, ..*params },
    })
}

// ---------------------------------------------------------------------------
// Wire protocol

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    prompt: &'a str,
    specificity: &'a str,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    seed: u64,
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    code: String,
    #[serde(default)]
    backend_meta: serde_json::Value,
}

fn wire_request_line(req: &GenerationRequest) -> String {
    let wire = WireRequest {
        prompt: req.prompt,
        specificity: req.specificity.as_str(),
        temperature: req.temperature,
        top_p: req.top_p,
        max_tokens: req.max_tokens,
        seed: req.seed,
    };
    serde_json::to_string(&wire).expect("request serializes")
}

/// Spawns the adapter command per request, writes one request line to its
/// stdin and reads one response line from its stdout.
#[derive(Debug, Clone)]
pub struct SubprocessBackend {
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl SubprocessBackend {
    pub fn new(command_line: &str, timeout: Duration) -> Result<Self> {
        let command: Vec<String> = command_line.split_whitespace().map(str::to_string).collect();
        if command.is_empty() {
            return Err(Error::UnknownEndpoint(format!("cmd:{command_line}")));
        }
        Ok(Self { command, timeout })
    }
}

impl Backend for SubprocessBackend {
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::BackendFailure(format!("spawn {}: {e}", self.command[0])))?;

        let line = wire_request_line(req);
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin
                .write_all(line.as_bytes())
                .and_then(|_| stdin.write_all(b"\n"))
                .map_err(|e| Error::BackendFailure(format!("write request: {e}")))?;
        }

        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut first_line = String::new();
            let read = reader.read_line(&mut first_line).map(|_| first_line);
            let _ = tx.send(read);
        });

        let response_line = match rx.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                let _ = child.kill();
                return Err(Error::BackendFailure(format!("read response: {e}")));
            }
            Err(_) => {
                let _ = child.kill();
                return Err(Error::BackendTimeout(self.timeout.as_millis() as u64));
            }
        };

        let status = child.wait().map_err(|e| Error::BackendFailure(e.to_string()))?;
        if !status.success() {
            let mut diagnostics = String::new();
            if let Some(mut stderr) = child.stderr.take() {
                let _ = stderr.read_to_string(&mut diagnostics);
            }
            return Err(Error::BackendFailure(format!(
                "backend command exited with {status}: {}",
                diagnostics.trim()
            )));
        }
        if response_line.trim().is_empty() {
            return Err(Error::MalformedResponse("empty response line".into()));
        }
        let wire: WireResponse = serde_json::from_str(response_line.trim())
            .map_err(|e| Error::MalformedResponse(e.to_string()))?;
        Ok(BackendResponse { code: wire.code, backend_meta: wire.backend_meta, synthetic_ms: None })
    }
}

/// POSTs the same JSON schema to an HTTP endpoint.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub url: String,
    pub timeout: Duration,
}

impl Backend for HttpBackend {
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse> {
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| Error::BackendFailure(e.to_string()))?;
        let body = wire_request_line(req);
        let resp = client
            .post(&self.url)
            .header("content-type", "application/json")
            .body(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    Error::BackendTimeout(self.timeout.as_millis() as u64)
                } else {
                    Error::BackendFailure(e.to_string())
                }
            })?;
        if !resp.status().is_success() {
            return Err(Error::BackendFailure(format!("http status {}", resp.status())));
        }
        let text = resp.text().map_err(|e| Error::MalformedResponse(e.to_string()))?;
        let wire: WireResponse =
            serde_json::from_str(text.trim()).map_err(|e| Error::MalformedResponse(e.to_string()))?;
        Ok(BackendResponse { code: wire.code, backend_meta: wire.backend_meta, synthetic_ms: None })
    }
}

/// Concrete backend behind an endpoint string.
pub enum BackendHandle {
    Mock(MockBackend),
    Subprocess(SubprocessBackend),
    Http(HttpBackend),
}

impl Backend for BackendHandle {
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse> {
        match self {
            BackendHandle::Mock(b) => b.generate(req),
            BackendHandle::Subprocess(b) => b.generate(req),
            BackendHandle::Http(b) => b.generate(req),
        }
    }
}

/// Resolves an endpoint string. `bank_paths` maps mock bank ids to files;
/// the id `default` falls back to the built-in empty bank.
pub fn make_backend(
    endpoint: &str,
    bank_paths: &std::collections::BTreeMap<String, PathBuf>,
    timeout: Duration,
) -> Result<BackendHandle> {
    if let Some(bank_id) = endpoint.strip_prefix("mock:") {
        let bank = match bank_paths.get(bank_id) {
            Some(path) => TemplateBank::load(path)?,
            None if bank_id == "default" => TemplateBank::builtin("default"),
            None => return Err(Error::UnknownEndpoint(endpoint.to_string())),
        };
        return Ok(BackendHandle::Mock(MockBackend::new(bank)));
    }
    if let Some(cmd) = endpoint.strip_prefix("cmd:") {
        return Ok(BackendHandle::Subprocess(SubprocessBackend::new(cmd, timeout)?));
    }
    if endpoint.starts_with("http://") || endpoint.starts_with("https://") {
        return Ok(BackendHandle::Http(HttpBackend { url: endpoint.to_string(), timeout }));
    }
    Err(Error::UnknownEndpoint(endpoint.to_string()))
}
