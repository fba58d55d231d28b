//! Hallucination detection against a knowledge base of known modules,
//! members and keyword-parameter names.
//!
//! Detection is knowledge-base-relative and intentionally shallow: only
//! names traceable to an import (`import x`, `import x as y`, from-imports,
//! and straight-line `z = x` aliases) are checked; unknown provenance is
//! never reported. A known member with no declared parameter entry accepts
//! no keyword names (the empty set), which keeps detection monotone: adding
//! modules, members or parameter names to the KB can only remove findings.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Node, NodeKind, Payload, SourceTree, Span};

/// Known modules, their members, and accepted keyword-parameter names.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    pub modules: HashMap<String, BTreeSet<String>>,
    /// Keyed by `"module.member"`.
    pub params: HashMap<String, BTreeSet<String>>,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HalluKind {
    FabricatedModule,
    FakeAPI,
    ParameterHallucination,
}

impl fmt::Display for HalluKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            HalluKind::FabricatedModule => "fabricated_module",
            HalluKind::FakeAPI => "fake_api",
            HalluKind::ParameterHallucination => "parameter_hallucination",
        };
        f.write_str(name)
    }
}

/// A detected hallucination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalluFinding {
    pub kind: HalluKind,
    /// Offending dotted name or parameter name.
    pub symbol: String,
    pub span: Span,
    /// Enclosing module or `module.member`.
    pub context: String,
}

// ---------------------------------------------------------------------------
// KB file schema: { version, modules: {name: [members]}, params: {"m.f": [names]} }

/// Map collector that sees duplicate keys (serde maps silently drop them).
struct KeyedLists(Vec<(String, Vec<String>)>);

impl<'de> Deserialize<'de> for KeyedLists {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = KeyedLists;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of name to string list")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<String>>()? {
                    out.push((k, v));
                }
                Ok(KeyedLists(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[derive(Deserialize)]
struct KbFile {
    version: String,
    modules: KeyedLists,
    #[serde(default = "empty_lists")]
    params: KeyedLists,
}

fn empty_lists() -> KeyedLists {
    KeyedLists(Vec::new())
}

/// Loads and validates a knowledge base file.
pub fn load_kb<P: AsRef<Path>>(path: P) -> Result<KnowledgeBase> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_kb(&raw)
}

/// Parses a knowledge base from JSON text.
pub fn parse_kb(raw: &str) -> Result<KnowledgeBase> {
    let file: KbFile = serde_json::from_str(raw).map_err(|e| Error::KbInvalid(e.to_string()))?;
    if !(file.version == "1" || file.version.starts_with("1.")) {
        return Err(Error::KbInvalid(format!("unknown schema version \"{}\"", file.version)));
    }

    let mut modules: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (name, members) in file.modules.0 {
        if modules.insert(name.clone(), members.into_iter().collect()).is_some() {
            return Err(Error::KbInvalid(format!("duplicate module entry \"{name}\"")));
        }
    }

    let mut params: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (key, names) in file.params.0 {
        let Some((module, member)) = key.rsplit_once('.') else {
            return Err(Error::KbInvalid(format!("params key \"{key}\" is not module.member")));
        };
        let members = modules
            .get(module)
            .ok_or_else(|| Error::KbInvalid(format!("params entry \"{key}\" references unknown module \"{module}\"")))?;
        if !members.contains(member) {
            return Err(Error::KbInvalid(format!(
                "params entry \"{key}\" references member \"{member}\" not declared under \"{module}\""
            )));
        }
        if params.insert(key.clone(), names.into_iter().collect()).is_some() {
            return Err(Error::KbInvalid(format!("duplicate params entry \"{key}\"")));
        }
    }

    Ok(KnowledgeBase { modules, params, version: file.version })
}

impl KnowledgeBase {
    /// Longest dotted prefix of `dotted` that is a known module.
    fn longest_module_prefix<'a>(&self, dotted: &'a str) -> Option<&'a str> {
        let mut best: Option<&str> = None;
        for (i, ch) in dotted.char_indices() {
            if ch == '.' && self.modules.contains_key(&dotted[..i]) {
                best = Some(&dotted[..i]);
            }
        }
        if self.modules.contains_key(dotted) {
            best = Some(dotted);
        }
        best
    }

    fn member_known(&self, module: &str, member: &str) -> bool {
        self.modules.get(module).is_some_and(|m| m.contains(member))
    }

    fn accepted_params(&self, module: &str, member: &str) -> Option<&BTreeSet<String>> {
        self.params.get(&format!("{module}.{member}"))
    }
}

/// Verdict of [`kb_lookup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupVerdict {
    pub module_known: bool,
    pub member_known: Option<bool>,
    pub param_accepted: Option<bool>,
}

/// Resolves a dotted name (and optional keyword parameter) against the KB.
pub fn kb_lookup(kb: &KnowledgeBase, dotted: &str, param: Option<&str>) -> LookupVerdict {
    let Some(prefix) = kb.longest_module_prefix(dotted) else {
        return LookupVerdict { module_known: false, member_known: None, param_accepted: None };
    };
    let rest = &dotted[prefix.len()..];
    let member = rest.strip_prefix('.').map(|r| r.split('.').next().unwrap_or(r));
    let member_known = member.map(|m| kb.member_known(prefix, m));
    let param_accepted = match (member, member_known, param) {
        (Some(m), Some(true), Some(p)) => {
            Some(kb.accepted_params(prefix, m).is_some_and(|set| set.contains(p)))
        }
        (_, _, Some(_)) => Some(false),
        _ => None,
    };
    LookupVerdict { module_known: true, member_known, param_accepted }
}

// ---------------------------------------------------------------------------
// Detection

#[derive(Debug, Clone)]
enum Binding {
    Module(String),
    Member { module: String, member: String },
}

struct Detector<'a> {
    kb: &'a KnowledgeBase,
    findings: Vec<HalluFinding>,
    emitted: BTreeSet<(HalluKind, String, usize)>,
}

/// Detects fabricated modules, fake APIs and parameter hallucinations.
/// Findings are sorted by (start line, kind).
pub fn detect_hallucinations(tree: &SourceTree, kb: &KnowledgeBase) -> Vec<HalluFinding> {
    let mut det = Detector { kb, findings: Vec::new(), emitted: BTreeSet::new() };
    det.scan_container(&tree.nodes, &mut HashMap::new());
    det.findings.sort_by_key(|f| (f.span.start, f.kind));
    det.findings
}

impl<'a> Detector<'a> {
    fn emit(&mut self, kind: HalluKind, symbol: String, span: Span, context: String) {
        if self.emitted.insert((kind, symbol.clone(), span.start)) {
            self.findings.push(HalluFinding { kind, symbol, span, context });
        }
    }

    fn scan_container(&mut self, stmts: &[Node], bindings: &mut HashMap<String, Binding>) {
        for stmt in stmts {
            match (&stmt.kind, &stmt.payload) {
                (NodeKind::Import, Payload::Import { module, alias }) => {
                    if !self.kb.modules.contains_key(module) {
                        self.emit(HalluKind::FabricatedModule, module.clone(), stmt.span, module.clone());
                    }
                    match alias {
                        Some(name) => {
                            bindings.insert(name.clone(), Binding::Module(module.clone()));
                        }
                        None => {
                            // `import a.b` binds the root name `a`
                            let root = module.split('.').next().unwrap_or(module);
                            bindings.insert(root.to_string(), Binding::Module(root.to_string()));
                        }
                    }
                }
                (NodeKind::FromImport, Payload::FromImport { module, names }) => {
                    if !self.kb.modules.contains_key(module) {
                        self.emit(HalluKind::FabricatedModule, module.clone(), stmt.span, module.clone());
                    } else {
                        for (name, alias) in names {
                            if name == "*" {
                                continue;
                            }
                            if self.kb.member_known(module, name) {
                                bindings.insert(
                                    alias.clone().unwrap_or_else(|| name.clone()),
                                    Binding::Member { module: module.clone(), member: name.clone() },
                                );
                            } else {
                                self.emit(
                                    HalluKind::FakeAPI,
                                    format!("{module}.{name}"),
                                    stmt.span,
                                    module.clone(),
                                );
                            }
                        }
                    }
                }
                (NodeKind::Assign, Payload::Assign { target }) => {
                    self.visit_exprs(&stmt.children[0], bindings);
                    if let Some(binding) = self.binding_of_expr(&stmt.children[0], bindings) {
                        bindings.insert(target.clone(), binding);
                    } else {
                        bindings.remove(target);
                    }
                }
                (NodeKind::FunctionDef, _) => {
                    // function bodies see module-level imports; local aliases
                    // do not leak back out
                    let mut inner = bindings.clone();
                    self.scan_container(&stmt.children, &mut inner);
                }
                _ => self.visit_exprs(stmt, bindings),
            }
        }
    }

    /// Straight-line alias: RHS that is a bound name, or an attribute chain
    /// resolving to a known module or member.
    fn binding_of_expr(&self, expr: &Node, bindings: &HashMap<String, Binding>) -> Option<Binding> {
        match (&expr.kind, &expr.payload) {
            (NodeKind::Name, Payload::Name { ident }) => bindings.get(ident).cloned(),
            (NodeKind::Attribute, Payload::Attribute { dotted }) => {
                let expanded = self.expand_chain(dotted, bindings)?;
                if self.kb.modules.contains_key(&expanded) {
                    return Some(Binding::Module(expanded));
                }
                let prefix = self.kb.longest_module_prefix(&expanded)?;
                let rest = expanded[prefix.len()..].strip_prefix('.')?;
                if !rest.contains('.') && self.kb.member_known(prefix, rest) {
                    return Some(Binding::Member { module: prefix.to_string(), member: rest.to_string() });
                }
                None
            }
            _ => None,
        }
    }

    /// Rewrites the chain's root through the alias table; `None` when the
    /// root is not module-bound (unknown provenance, skipped).
    fn expand_chain(&self, dotted: &str, bindings: &HashMap<String, Binding>) -> Option<String> {
        if dotted.starts_with('.') {
            return None; // unrooted chain (attribute on a call result)
        }
        let (root, rest) = match dotted.split_once('.') {
            Some((r, rest)) => (r, Some(rest)),
            None => (dotted, None),
        };
        match bindings.get(root)? {
            Binding::Module(module) => Some(match rest {
                Some(rest) => format!("{module}.{rest}"),
                None => module.clone(),
            }),
            Binding::Member { module, member } => Some(match rest {
                Some(rest) => format!("{module}.{member}.{rest}"),
                None => format!("{module}.{member}"),
            }),
        }
    }

    fn visit_exprs(&mut self, node: &Node, bindings: &HashMap<String, Binding>) {
        match (&node.kind, &node.payload) {
            (NodeKind::Attribute, Payload::Attribute { dotted }) => {
                self.check_attribute(dotted, node.span, bindings);
            }
            (NodeKind::Call, _) => {
                self.check_call(node, bindings);
            }
            _ => {}
        }
        for child in &node.children {
            self.visit_exprs(child, bindings);
        }
    }

    fn check_attribute(&mut self, dotted: &str, span: Span, bindings: &HashMap<String, Binding>) {
        let Some(expanded) = self.expand_chain(dotted, bindings) else { return };
        let Some(prefix) = self.kb.longest_module_prefix(&expanded) else { return };
        let rest = &expanded[prefix.len()..];
        let Some(member) = rest.strip_prefix('.').and_then(|r| r.split('.').next()) else {
            return; // the whole chain is a module
        };
        if !self.kb.member_known(prefix, member) {
            self.emit(HalluKind::FakeAPI, format!("{prefix}.{member}"), span, prefix.to_string());
        }
    }

    /// Resolves the callee to a known (module, member) and checks keyword
    /// names against the accepted set (absent entry = empty set).
    fn check_call(&mut self, call: &Node, bindings: &HashMap<String, Binding>) {
        let Some(callee) = call.callee() else { return };
        let resolved: Option<(String, String)> = match (&callee.kind, &callee.payload) {
            (NodeKind::Name, Payload::Name { ident }) => match bindings.get(ident) {
                Some(Binding::Member { module, member }) => Some((module.clone(), member.clone())),
                _ => None,
            },
            (NodeKind::Attribute, Payload::Attribute { dotted }) => {
                self.expand_chain(dotted, bindings).and_then(|expanded| {
                    let prefix = self.kb.longest_module_prefix(&expanded)?;
                    let rest = expanded[prefix.len()..].strip_prefix('.')?;
                    if rest.contains('.') {
                        return None; // deeper than (module, member): unchecked
                    }
                    Some((prefix.to_string(), rest.to_string()))
                })
            }
            _ => None,
        };
        let Some((module, member)) = resolved else { return };
        if !self.kb.member_known(&module, &member) {
            return; // the attribute walk reports the fake member
        }
        let empty = BTreeSet::new();
        let accepted = self.kb.accepted_params(&module, &member).unwrap_or(&empty);
        for (name, _) in call.keyword_args() {
            if !accepted.contains(name) {
                self.emit(
                    HalluKind::ParameterHallucination,
                    name.to_string(),
                    call.span,
                    format!("{module}.{member}"),
                );
            }
        }
    }
}

/// Seed knowledge base covering the standard-library surface used by the
/// shipped corpus; also written to the KB fixture.
pub const SEED_KB_JSON: &str = r#"{
  "version": "1.0",
  "modules": {
    "os": ["path", "getcwd", "system", "popen", "environ", "listdir", "remove", "makedirs", "mkdir", "getenv", "chdir", "rename", "stat", "walk", "urandom"],
    "os.path": ["join", "exists", "basename", "dirname", "abspath", "splitext", "isfile", "isdir"],
    "sys": ["argv", "exit", "path", "stdin", "stdout", "stderr", "version"],
    "json": ["dumps", "loads", "dump", "load", "JSONDecodeError"],
    "math": ["sqrt", "floor", "ceil", "pi", "e", "log", "log2", "pow", "fabs"],
    "re": ["match", "search", "compile", "sub", "findall", "split", "escape", "IGNORECASE"],
    "sqlite3": ["connect", "Row", "Error"],
    "csv": ["reader", "writer", "DictReader", "DictWriter"],
    "hashlib": ["sha256", "sha1", "md5", "new", "pbkdf2_hmac"],
    "random": ["random", "randint", "choice", "seed", "shuffle", "uniform", "sample"],
    "datetime": ["datetime", "date", "time", "timedelta", "timezone"],
    "collections": ["defaultdict", "Counter", "OrderedDict", "namedtuple", "deque"],
    "itertools": ["chain", "product", "islice", "count", "cycle", "groupby"],
    "subprocess": ["run", "call", "Popen", "check_output", "check_call", "PIPE", "DEVNULL"],
    "shutil": ["copy", "copy2", "move", "rmtree", "disk_usage"],
    "time": ["time", "sleep", "monotonic", "strftime"],
    "pathlib": ["Path", "PurePath"],
    "typing": ["List", "Dict", "Optional", "Any", "Tuple", "Union"],
    "logging": ["getLogger", "basicConfig", "info", "warning", "error", "debug", "DEBUG", "INFO"],
    "string": ["ascii_letters", "digits", "punctuation", "Template"],
    "requests": ["get", "post", "put", "delete", "Session", "Response"],
    "base64": ["b64encode", "b64decode"],
    "urllib": ["request", "parse"],
    "urllib.parse": ["urlparse", "quote", "unquote", "urlencode"],
    "urllib.request": ["urlopen", "Request"],
    "functools": ["reduce", "lru_cache", "partial", "wraps"],
    "pickle": ["dumps", "loads", "dump", "load"]
  },
  "params": {
    "json.dumps": ["obj", "indent", "sort_keys", "default", "separators", "ensure_ascii", "cls"],
    "json.dump": ["obj", "fp", "indent", "sort_keys", "default", "ensure_ascii"],
    "json.loads": ["s", "cls", "object_hook", "parse_float", "parse_int"],
    "subprocess.run": ["args", "shell", "capture_output", "check", "cwd", "env", "timeout", "stdout", "stderr", "stdin", "text", "encoding"],
    "subprocess.call": ["args", "shell", "cwd", "timeout", "env", "stdout", "stderr"],
    "subprocess.Popen": ["args", "shell", "cwd", "env", "stdout", "stderr", "stdin", "text", "bufsize"],
    "sqlite3.connect": ["database", "timeout", "check_same_thread", "isolation_level", "detect_types"],
    "requests.get": ["url", "params", "headers", "timeout", "auth", "verify", "cookies", "allow_redirects"],
    "requests.post": ["url", "data", "json", "headers", "timeout", "auth", "verify", "files"],
    "random.randint": ["a", "b"],
    "random.seed": ["a", "version"],
    "re.compile": ["pattern", "flags"],
    "re.sub": ["pattern", "repl", "string", "count", "flags"],
    "logging.basicConfig": ["level", "format", "filename", "filemode", "datefmt", "stream"],
    "os.makedirs": ["name", "mode", "exist_ok"],
    "csv.DictReader": ["f", "fieldnames", "dialect", "delimiter"],
    "csv.writer": ["csvfile", "dialect", "delimiter", "quotechar", "quoting"],
    "hashlib.pbkdf2_hmac": ["hash_name", "password", "salt", "iterations", "dklen"]
  }
}"#;

/// Parses the embedded seed KB.
pub fn seed_kb() -> KnowledgeBase {
    parse_kb(SEED_KB_JSON).expect("seed KB is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;

    fn detect(src: &str) -> Vec<HalluFinding> {
        detect_hallucinations(&parse_source(src), &seed_kb())
    }

    #[test]
    fn fabricated_import() {
        let f = detect("import torchh\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::FabricatedModule);
        assert_eq!(f[0].symbol, "torchh");
    }

    #[test]
    fn fake_member_on_known_module() {
        let f = detect("import os\nos.pathh.join(a, b)\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::FakeAPI);
        assert_eq!(f[0].symbol, "os.pathh");
        assert_eq!(f[0].context, "os");
    }

    #[test]
    fn known_surface_is_clean() {
        let src = "import os\nimport json\nfrom collections import Counter\n\
                   p = os.path.join(\"a\", \"b\")\ns = json.dumps(p, indent=2)\nc = Counter()\n";
        assert!(detect(src).is_empty());
    }

    #[test]
    fn parameter_hallucination_on_known_member() {
        let f = detect("import json\njson.dumps(data, indnt=2)\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::ParameterHallucination);
        assert_eq!(f[0].symbol, "indnt");
        assert_eq!(f[0].context, "json.dumps");
    }

    #[test]
    fn from_import_checks_members_and_binds() {
        let f = detect("from os import getcwdd\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::FakeAPI);
        assert_eq!(f[0].symbol, "os.getcwdd");

        // bound member flows to call-site param checks
        let f = detect("from json import dumps\ndumps(x, indnt=1)\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::ParameterHallucination);
    }

    #[test]
    fn alias_tracking() {
        let f = detect("import os as o\no.frobnicate()\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].symbol, "os.frobnicate");

        let f = detect("import json\nj = json\nj.dumps(x, indnt=1)\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::ParameterHallucination);
    }

    #[test]
    fn unknown_provenance_is_skipped() {
        // `cur` is not module-bound: member access unchecked
        assert!(detect("cur.executee(q)\n").is_empty());
        // bare un-imported names are not fabricated modules
        assert!(detect("frobnicate(1)\n").is_empty());
    }

    #[test]
    fn unknown_module_suppresses_member_checks() {
        // the import is flagged once; uses of it are unknown surface
        let f = detect("import torchh\ntorchh.nn.Linear(10, 2)\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, HalluKind::FabricatedModule);
    }

    #[test]
    fn lookup_verdicts() {
        let kb = seed_kb();
        let v = kb_lookup(&kb, "os.getcwd", None);
        assert!(v.module_known);
        assert_eq!(v.member_known, Some(true));
        let v = kb_lookup(&kb, "os.frobnicate", None);
        assert!(v.module_known);
        assert_eq!(v.member_known, Some(false));
        let v = kb_lookup(&kb, "jsson.dumps", Some("indent"));
        assert!(!v.module_known);
        let v = kb_lookup(&kb, "json.dumps", Some("indent"));
        assert_eq!(v.param_accepted, Some(true));
        let v = kb_lookup(&kb, "json.dumps", Some("indnt"));
        assert_eq!(v.param_accepted, Some(false));
    }

    #[test]
    fn kb_validation_errors() {
        let dup = r#"{"version":"1.0","modules":{"os":["getcwd"],"os":["path"]}}"#;
        assert!(matches!(parse_kb(dup), Err(Error::KbInvalid(msg)) if msg.contains("os")));

        let orphan = r#"{"version":"1.0","modules":{"os":["getcwd"]},"params":{"json.dumps":["indent"]}}"#;
        assert!(matches!(parse_kb(orphan), Err(Error::KbInvalid(msg)) if msg.contains("json")));

        let bad_member = r#"{"version":"1.0","modules":{"os":["getcwd"]},"params":{"os.nope":["x"]}}"#;
        assert!(parse_kb(bad_member).is_err());

        let bad_version = r#"{"version":"9","modules":{}}"#;
        assert!(matches!(parse_kb(bad_version), Err(Error::KbInvalid(msg)) if msg.contains("version")));
    }

    #[test]
    fn dotted_module_import_is_exact() {
        assert!(detect("import os.path\nos.path.join(a, b)\n").is_empty());
        let f = detect("import os.pathh\n");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].symbol, "os.pathh");
    }

    #[test]
    fn findings_sorted_by_line_then_kind() {
        let f = detect("import fakelib\nimport json\njson.dumps(x, wrong=1)\njson.duumps(x)\n");
        let kinds: Vec<HalluKind> = f.iter().map(|x| x.kind).collect();
        assert_eq!(
            kinds,
            vec![HalluKind::FabricatedModule, HalluKind::ParameterHallucination, HalluKind::FakeAPI]
        );
        assert!(f[0].span.start <= f[1].span.start && f[1].span.start <= f[2].span.start);
    }
}
