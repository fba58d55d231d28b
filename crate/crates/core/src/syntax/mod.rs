//! Tolerant parsing of generated source into a minimal tree.
//!
//! The subject language is a dynamic scripting language (the shipped corpus
//! and tests use Python source). Only the constructs the detectors need are
//! modeled: imports, single-target assignments, function definitions, calls
//! with positional and keyword arguments, dotted attribute chains, string
//! and number literals, `+` concatenation, `%` formatting and f-strings.
//! Everything else degrades to [`NodeKind::Opaque`] leaves; parsing never
//! fails.

mod lexer;
mod parser;

use serde::{Deserialize, Serialize};

pub use lexer::Tok;

/// Inclusive physical line range, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    Import,
    FromImport,
    Assign,
    FunctionDef,
    Call,
    Attribute,
    Name,
    StringLit,
    NumberLit,
    BinOpConcat,
    FormatExpr,
    Opaque,
}

/// Kind-specific node data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Payload {
    Import { module: String, alias: Option<String> },
    FromImport { module: String, names: Vec<(String, Option<String>)> },
    Assign { target: String },
    FunctionDef { name: String, params: Vec<String> },
    Call { n_positional: usize, kwarg_names: Vec<String> },
    /// Full dotted chain; a leading `.` marks a chain whose root is not a
    /// plain name (e.g. a call result) and cannot be resolved to a module.
    Attribute { dotted: String },
    Name { ident: String },
    StringLit { value: String },
    NumberLit { value: String },
    FormatExpr { interpolates: bool },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    pub children: Vec<Node>,
    pub span: Span,
    pub payload: Payload,
}

impl Node {
    /// The callee expression of a `Call` node.
    pub fn callee(&self) -> Option<&Node> {
        if self.kind == NodeKind::Call { self.children.first() } else { None }
    }

    /// Dotted name of the callee: attribute chain, or bare name.
    pub fn callee_name(&self) -> Option<&str> {
        match (self.callee()?.kind, &self.callee()?.payload) {
            (NodeKind::Attribute, Payload::Attribute { dotted }) => Some(dotted),
            (NodeKind::Name, Payload::Name { ident }) => Some(ident),
            _ => Option::None,
        }
    }

    pub fn positional_args(&self) -> &[Node] {
        match &self.payload {
            Payload::Call { n_positional, .. } => &self.children[1..1 + n_positional],
            _ => &[],
        }
    }

    pub fn keyword_args(&self) -> Vec<(&str, &Node)> {
        match &self.payload {
            Payload::Call { n_positional, kwarg_names } => kwarg_names
                .iter()
                .map(String::as_str)
                .zip(self.children[1 + n_positional..].iter())
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Parse result: statement nodes plus line accounting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceTree {
    pub nodes: Vec<Node>,
    pub line_count: usize,
    pub loc: usize,
}

/// Parses source text; total, never fails.
pub fn parse_source(code: &str) -> SourceTree {
    let lines = lexer::logical_lines(code);
    let nodes = parser::parse_blocks(&lines);
    SourceTree { nodes, line_count: code.lines().count(), loc: count_loc(code) }
}

/// Lines that are neither blank nor comment-only.
pub fn count_loc(code: &str) -> usize {
    code.lines()
        .filter(|line| {
            let t = line.trim_start();
            !t.is_empty() && !t.starts_with('#')
        })
        .count()
}

/// Pre-order traversal returning nodes of the given kind, in source order.
pub fn iter_matches(tree: &SourceTree, kind: NodeKind) -> Vec<&Node> {
    iter_matches_by(tree, &|n| n.kind == kind)
}

/// Pre-order traversal with an arbitrary predicate.
pub fn iter_matches_by<'a>(tree: &'a SourceTree, pred: &dyn Fn(&Node) -> bool) -> Vec<&'a Node> {
    let mut out = Vec::new();
    for node in &tree.nodes {
        walk(node, pred, &mut out);
    }
    out
}

fn walk<'a>(node: &'a Node, pred: &dyn Fn(&Node) -> bool, out: &mut Vec<&'a Node>) {
    if pred(node) {
        out.push(node);
    }
    for child in &node.children {
        walk(child, pred, out);
    }
}

/// Reads a source file with lossy UTF-8 decoding; lines containing
/// replacement characters parse as Opaque.
pub fn read_source(path: &std::path::Path) -> crate::error::Result<String> {
    let raw = std::fs::read(path)
        .map_err(|source| crate::error::Error::Io { path: path.to_path_buf(), source })?;
    Ok(String::from_utf8_lossy(&raw).into_owned())
}

/// Screens code for identifier tokens from `patterns`, skipping string
/// literals and comments. Backs the generation safety gate.
pub fn identifier_occurrences(code: &str, patterns: &[String]) -> std::collections::BTreeSet<String> {
    let mut found = std::collections::BTreeSet::new();
    for line in lexer::logical_lines(code) {
        for tok in lexer::tokenize(&line.text) {
            if let Tok::Ident(word) = tok {
                if patterns.iter().any(|p| p == &word) {
                    found.insert(word);
                }
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_import() {
        let tree = parse_source("import os\n");
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.nodes[0].kind, NodeKind::Import);
        assert_eq!(
            tree.nodes[0].payload,
            Payload::Import { module: "os".into(), alias: Option::None }
        );
    }

    #[test]
    fn import_list_and_alias() {
        let tree = parse_source("import os, sys as system\n");
        assert_eq!(tree.nodes.len(), 2);
        match &tree.nodes[1].payload {
            Payload::Import { module, alias } => {
                assert_eq!(module, "sys");
                assert_eq!(alias.as_deref(), Some("system"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Hand-parsed oracle: callee is the dotted attribute `cur.execute`,
    /// the single positional argument is a concat of a string literal and a
    /// bare name.
    #[test]
    fn execute_concat_call_shape() {
        let tree = parse_source("cur.execute(\"SELECT \" + uid)\n");
        let call = &tree.nodes[0];
        assert_eq!(call.kind, NodeKind::Call);
        assert_eq!(call.callee_name(), Some("cur.execute"));
        let args = call.positional_args();
        assert_eq!(args.len(), 1);
        assert_eq!(args[0].kind, NodeKind::BinOpConcat);
        assert_eq!(args[0].children[0].kind, NodeKind::StringLit);
        assert_eq!(args[0].children[1].kind, NodeKind::Name);
    }

    #[test]
    fn broken_line_is_opaque_and_neighbors_parse() {
        let tree = parse_source("import os\n  )))\nx = 1\n");
        assert_eq!(tree.nodes.len(), 3);
        assert_eq!(tree.nodes[0].kind, NodeKind::Import);
        assert_eq!(tree.nodes[1].kind, NodeKind::Opaque);
        assert_eq!(tree.nodes[2].kind, NodeKind::Assign);
    }

    #[test]
    fn function_def_holds_body() {
        let src = "def handler(req, timeout=5):\n    data = req\n    return data\n";
        let tree = parse_source(src);
        assert_eq!(tree.nodes.len(), 1);
        let def = &tree.nodes[0];
        assert_eq!(def.kind, NodeKind::FunctionDef);
        match &def.payload {
            Payload::FunctionDef { name, params } => {
                assert_eq!(name, "handler");
                assert_eq!(params, &vec!["req".to_string(), "timeout".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(def.children.len(), 2);
        assert_eq!(def.span, Span { start: 1, end: 3 });
    }

    #[test]
    fn unmodeled_block_header_is_opaque_but_body_parses() {
        let src = "if ready:\n    cur.execute(q)\n";
        let tree = parse_source(src);
        assert_eq!(tree.nodes.len(), 2);
        assert_eq!(tree.nodes[0].kind, NodeKind::Opaque);
        assert_eq!(tree.nodes[1].kind, NodeKind::Call);
    }

    #[test]
    fn call_keyword_names_in_source_order() {
        let tree = parse_source("run(cmd, shell=True, check=False)\n");
        let call = &tree.nodes[0];
        match &call.payload {
            Payload::Call { n_positional, kwarg_names } => {
                assert_eq!(*n_positional, 1);
                assert_eq!(kwarg_names, &vec!["shell".to_string(), "check".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let kwargs = call.keyword_args();
        assert_eq!(kwargs[0].0, "shell");
        match &kwargs[0].1.payload {
            Payload::Name { ident } => assert_eq!(ident, "True"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loc_counting() {
        assert_eq!(count_loc("a=1\n\n# note\nb=2\n"), 2);
        assert_eq!(count_loc(""), 0);
        // independent check on a generated 100-line file: 20 blank,
        // 10 comment-only, 70 code lines
        let mut src = String::new();
        for i in 0..70 {
            src.push_str(&format!("v{i} = {i}\n"));
        }
        for _ in 0..20 {
            src.push('\n');
        }
        for i in 0..10 {
            src.push_str(&format!("# comment {i}\n"));
        }
        assert_eq!(src.lines().count(), 100);
        assert_eq!(count_loc(&src), 70);
    }

    #[test]
    fn iter_matches_in_source_order() {
        let tree = parse_source("import a\nimport b\n");
        let imports = iter_matches(&tree, NodeKind::Import);
        assert_eq!(imports.len(), 2);
        assert!(imports[0].span.start < imports[1].span.start);

        let tree = parse_source("cur.execute(q)\nother.run(x)\n");
        let hits = iter_matches_by(&tree, &|n| {
            n.kind == NodeKind::Call
                && n.callee_name().is_some_and(|c| c.ends_with("execute"))
        });
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].span.start, 1);

        let empty = parse_source("");
        assert!(iter_matches(&empty, NodeKind::Call).is_empty());
    }

    #[test]
    fn parse_is_idempotent() {
        let src = "import os\nq = \"SELECT \" + uid\ncur.execute(q)\n";
        assert_eq!(parse_source(src), parse_source(src));
    }

    #[test]
    fn every_line_is_covered_or_trivial() {
        let src = "import os\n\n# comment\nif x:\n    y = 1\n\nz = f(1,\n      2)\n";
        let tree = parse_source(src);
        let mut covered = vec![false; tree.line_count + 1];
        fn mark(node: &Node, covered: &mut [bool]) {
            covered[node.span.start..=node.span.end].fill(true);
            for c in &node.children {
                mark(c, covered);
            }
        }
        for n in &tree.nodes {
            mark(n, &mut covered);
        }
        for (i, line) in src.lines().enumerate() {
            let t = line.trim_start();
            let trivial = t.is_empty() || t.starts_with('#');
            assert!(trivial || covered[i + 1], "line {} uncovered: {line:?}", i + 1);
        }
    }

    #[test]
    fn screen_tokens_not_substrings() {
        let pats: Vec<String> = ["eval", "exec", "pickle", "subprocess"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            identifier_occurrences("x = eval(user_input)", &pats).into_iter().collect::<Vec<_>>(),
            vec!["eval".to_string()]
        );
        assert!(identifier_occurrences("print('hello')", &pats).is_empty());
        assert!(identifier_occurrences("s = 'call eval later'", &pats).is_empty());
        assert!(identifier_occurrences("# eval in comment", &pats).is_empty());
        assert!(identifier_occurrences("evaluate(x)", &pats).is_empty());
    }

    #[test]
    fn replacement_char_line_is_opaque() {
        let src = "import os\nbad = \u{FFFD}\u{FFFD}\n";
        let tree = parse_source(src);
        assert_eq!(tree.nodes[1].kind, NodeKind::Opaque);
    }
}
