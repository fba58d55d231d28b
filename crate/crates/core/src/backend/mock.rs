//! Deterministic mock backend driven by a template bank.
//!
//! Output is a pure function of (template bank, prompt id, specificity,
//! seed, attempt index): bank entries are matched first (prompt-id glob,
//! specificity, attempt), and anything unmatched falls through to an
//! embedded snippet pool selected by a hash of the same inputs. Response
//! times are synthesized from the hash so mock runs are byte-reproducible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::fnv1a64;

use super::{Backend, BackendResponse, GenerationRequest, SpecificityLevel};

/// One bank entry; `specificity: "any"` and `attempt: 0` are wildcards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateEntry {
    pub prompt_pattern: String,
    #[serde(default = "any_str")]
    pub specificity: String,
    #[serde(default)]
    pub attempt: usize,
    pub code: String,
}

fn any_str() -> String {
    "any".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateBank {
    pub version: String,
    pub id: String,
    #[serde(default)]
    pub entries: Vec<TemplateEntry>,
}

impl TemplateBank {
    /// The built-in empty bank: every request synthesizes from the pool.
    pub fn builtin(id: &str) -> Self {
        Self { version: "1.0".into(), id: id.to_string(), entries: Vec::new() }
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&raw).map_err(|e| Error::ConfigInvalid(format!("mock bank: {e}")))
    }

    fn find(&self, prompt_id: &str, specificity: SpecificityLevel, attempt: usize) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| {
                glob_match(&e.prompt_pattern, prompt_id)
                    && (e.specificity == "any" || e.specificity == specificity.as_str())
                    && (e.attempt == 0 || e.attempt == attempt)
            })
            .map(|e| e.code.as_str())
    }
}

/// `*`-wildcard matcher (no character classes).
pub fn glob_match(pattern: &str, value: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == value;
    }
    let mut rest = value;
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        if i == 0 {
            match rest.strip_prefix(part) {
                Some(r) => rest = r,
                None => return false,
            }
        } else if i == parts.len() - 1 {
            return rest.ends_with(part);
        } else {
            match rest.find(part) {
                Some(at) => rest = &rest[at + part.len()..],
                None => return false,
            }
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    pub bank: TemplateBank,
}

impl MockBackend {
    pub fn new(bank: TemplateBank) -> Self {
        Self { bank }
    }
}

impl Backend for MockBackend {
    fn generate(&self, req: &GenerationRequest) -> Result<BackendResponse> {
        let key = format!("{}|{}|{}|{}", req.prompt_id, req.specificity.as_str(), req.seed, req.attempt);
        let hash = fnv1a64(key.as_bytes());

        let code = match self.bank.find(req.prompt_id, req.specificity, req.attempt) {
            Some(code) => code.to_string(),
            None => synthesize(req.prompt_id, hash, req.attempt),
        };
        let synthetic_ms = 5 + (fnv1a64(format!("t|{key}").as_bytes()) % 400);
        Ok(BackendResponse {
            code,
            backend_meta: serde_json::json!({ "backend": "mock", "bank": self.bank.id }),
            synthetic_ms: Some(synthetic_ms),
        })
    }
}

// ---------------------------------------------------------------------------
// Synthesized snippet pool

const CLEAN_FILE_UTIL: &str = r#"import os

def list_sources(root):
    entries = os.listdir(root)
    result = []
    for name in entries:
        full = os.path.join(root, name)
        if os.path.isfile(full):
            result.append(full)
    return result
"#;

const CLEAN_JSON_TOOL: &str = r#"import json

def render_report(payload):
    text = json.dumps(payload, indent=2, sort_keys=True)
    lines = text.split()
    return lines
"#;

const CLEAN_MATH: &str = r#"import math

def magnitude(x, y):
    total = x * x + y * y
    return math.sqrt(total)
"#;

const CLEAN_CSV: &str = r#"import csv

def load_rows(path):
    rows = []
    with open(path) as fh:
        reader = csv.reader(fh)
        for row in reader:
            cleaned = validate_row(row)
            rows.append(cleaned)
    return rows
"#;

const VULN_SQL: &str = r#"import sqlite3

def fetch_user(cur, uid):
    query = "SELECT * FROM users WHERE id = " + uid
    cur.execute(query)
    return cur
"#;

const VULN_CREDS: &str = r#"import hashlib

password = "hunter2-default"

def digest(value):
    h = hashlib.sha256(value)
    return h
"#;

const VULN_SHELL: &str = r#"import os

def ping_host(host):
    cmd = "ping -c 1 " + host
    os.system(cmd)
    return 0
"#;

const VULN_INPUT: &str = r#"import sqlite3

def lookup(cur):
    uid = input()
    cur.execute("SELECT name FROM users WHERE id = " + uid)
    return cur
"#;

const HALLU_FABRICATED: &str = r#"import requestss

def fetch(url):
    r = requestss.get(url)
    return r
"#;

const HALLU_FAKE_API: &str = r#"import os

def ensure_dir(p):
    os.makedirz(p)
    return p
"#;

const HALLU_PARAM: &str = r#"import json

def dump_config(cfg):
    text = json.dumps(cfg, indnt=2)
    return text
"#;

const UNSAFE_PICKLE: &str = r#"import pickle

def load_state(path):
    fh = open(path, "rb")
    state = pickle.load(fh)
    return state
"#;

const UNSAFE_EVAL: &str = r#"def compute(expr):
    return eval(expr)
"#;

/// Pool selection: hash % 16 maps to mostly-clean output with a tail of
/// vulnerable and hallucinated variants; every 23rd draw emits an unsafe
/// first attempt so the generation gate sees real retries.
fn synthesize(prompt_id: &str, hash: u64, attempt: usize) -> String {
    if attempt == 1 && hash.is_multiple_of(23) {
        let unsafe_snippet = if hash.is_multiple_of(2) { UNSAFE_PICKLE } else { UNSAFE_EVAL };
        return decorate(unsafe_snippet, prompt_id, hash);
    }
    let snippet = match hash % 16 {
        0 | 1 => CLEAN_FILE_UTIL,
        2 | 3 => CLEAN_JSON_TOOL,
        4 | 5 => CLEAN_MATH,
        6 | 7 => CLEAN_CSV,
        8 | 9 => VULN_SQL,
        10 => VULN_CREDS,
        11 => VULN_SHELL,
        12 => VULN_INPUT,
        13 => HALLU_FABRICATED,
        14 => HALLU_FAKE_API,
        _ => HALLU_PARAM,
    };
    decorate(snippet, prompt_id, hash)
}

/// Stamps the snippet with a per-cell header and a few filler statements so
/// line counts vary.
fn decorate(snippet: &str, prompt_id: &str, hash: u64) -> String {
    let mut out = format!("# solution {} rev{}\n{}", prompt_id, hash % 997, snippet);
    for i in 0..(hash % 5) {
        out.push_str(&format!("aux_{i} = {}\n", (hash >> (8 + i)) % 100));
    }
    out
}
