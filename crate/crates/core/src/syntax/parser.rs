//! Statement and expression parsing over logical lines.
//!
//! Anything outside the subset degrades to an [`NodeKind::Opaque`] leaf.
//! Block introducers we do not model (`if`, `for`, `class`, ...) become an
//! Opaque node for the header line only; their indented bodies are parsed
//! and appended as following siblings, so detectors still see statements
//! inside unmodeled blocks.

use super::lexer::{LogicalLine, Tok, tokenize};
use super::{Node, NodeKind, Payload, Span};

pub(super) fn parse_blocks(lines: &[LogicalLine]) -> Vec<Node> {
    let mut idx = 0;
    parse_block(lines, &mut idx, 0)
}

fn parse_block(lines: &[LogicalLine], idx: &mut usize, min_indent: usize) -> Vec<Node> {
    let mut nodes = Vec::new();
    while *idx < lines.len() && lines[*idx].indent >= min_indent {
        let line = &lines[*idx];
        *idx += 1;
        let has_suite = *idx < lines.len() && lines[*idx].indent > line.indent;

        let mut stmts = parse_statement(line);
        if has_suite {
            let suite = parse_block(lines, idx, line.indent + 1);
            if stmts.len() == 1 && stmts[0].kind == NodeKind::FunctionDef {
                let def = &mut stmts[0];
                if let Some(last) = suite.last() {
                    def.span.end = last.span.end.max(def.span.end);
                }
                def.children.extend(suite);
                nodes.append(&mut stmts);
            } else {
                // Opaque headers (and malformed suites) keep their own span;
                // the body statements become siblings.
                nodes.append(&mut stmts);
                nodes.extend(suite);
            }
        } else {
            nodes.append(&mut stmts);
        }
    }
    nodes
}

fn span_of(line: &LogicalLine) -> Span {
    Span { start: line.start_line, end: line.end_line }
}

fn opaque(line: &LogicalLine) -> Node {
    Node { kind: NodeKind::Opaque, children: Vec::new(), span: span_of(line), payload: Payload::None }
}

/// Parses one logical line into zero or more statement nodes.
fn parse_statement(line: &LogicalLine) -> Vec<Node> {
    // Lines carrying replacement characters from lossy decoding stay opaque.
    if line.text.contains('\u{FFFD}') {
        return vec![opaque(line)];
    }
    let toks = tokenize(&line.text);
    if toks.is_empty() {
        return vec![opaque(line)];
    }
    let span = span_of(line);

    if let Tok::Ident(word) = &toks[0] {
        match word.as_str() {
            "import" => return parse_import(&toks, span).unwrap_or_else(|| vec![opaque(line)]),
            "from" => return parse_from_import(&toks, span).map(|n| vec![n]).unwrap_or_else(|| vec![opaque(line)]),
            "def" => {
                if let Some(node) = parse_def(&toks, span) {
                    return vec![node];
                }
                return vec![opaque(line)];
            }
            // Keyword-prefixed expression statements: model the expression,
            // drop the keyword, so sinks inside `return eval(x)` stay visible.
            "return" | "yield" | "await" | "raise" => {
                let rest = &toks[1..];
                if !rest.is_empty() {
                    let mut pos = 0;
                    let expr = parse_expr(rest, &mut pos, span);
                    if pos == rest.len() {
                        return vec![expr];
                    }
                }
                return vec![opaque(line)];
            }
            _ => {}
        }
    }

    if let Some(node) = parse_assignment(&toks, span) {
        return vec![node];
    }

    // Expression statement: must consume every token.
    let mut pos = 0;
    let expr = parse_expr(&toks, &mut pos, span);
    if pos == toks.len() {
        return vec![expr];
    }
    vec![opaque(line)]
}

/// `import a.b [as x][, c [as y]]*` — one Import node per module.
fn parse_import(toks: &[Tok], span: Span) -> Option<Vec<Node>> {
    let mut nodes = Vec::new();
    let mut pos = 1;
    loop {
        let module = parse_dotted(toks, &mut pos)?;
        let alias = if matches!(toks.get(pos), Some(Tok::Ident(w)) if w == "as") {
            pos += 1;
            match toks.get(pos) {
                Some(Tok::Ident(name)) => {
                    pos += 1;
                    Some(name.clone())
                }
                _ => return None,
            }
        } else {
            None
        };
        nodes.push(Node {
            kind: NodeKind::Import,
            children: Vec::new(),
            span,
            payload: Payload::Import { module, alias },
        });
        match toks.get(pos) {
            None => return Some(nodes),
            Some(Tok::Op(op)) if op == "," => pos += 1,
            _ => return None,
        }
    }
}

/// `from mod import a [as x][, ...]` or `from mod import *`.
fn parse_from_import(toks: &[Tok], span: Span) -> Option<Node> {
    let mut pos = 1;
    let module = parse_dotted(toks, &mut pos)?;
    match toks.get(pos) {
        Some(Tok::Ident(w)) if w == "import" => pos += 1,
        _ => return None,
    }
    let mut names = Vec::new();
    if matches!(toks.get(pos), Some(Tok::Op(op)) if op == "*") {
        names.push(("*".to_string(), None));
        pos += 1;
        if pos != toks.len() {
            return None;
        }
    } else {
        // optional parenthesized name list
        let parenthesized = matches!(toks.get(pos), Some(Tok::Op(op)) if op == "(");
        if parenthesized {
            pos += 1;
        }
        loop {
            let name = match toks.get(pos) {
                Some(Tok::Ident(name)) => name.clone(),
                _ => return None,
            };
            pos += 1;
            let alias = if matches!(toks.get(pos), Some(Tok::Ident(w)) if w == "as") {
                pos += 1;
                match toks.get(pos) {
                    Some(Tok::Ident(a)) => {
                        pos += 1;
                        Some(a.clone())
                    }
                    _ => return None,
                }
            } else {
                None
            };
            names.push((name, alias));
            match toks.get(pos) {
                Some(Tok::Op(op)) if op == "," => pos += 1,
                Some(Tok::Op(op)) if op == ")" && parenthesized => {
                    pos += 1;
                    break;
                }
                None if !parenthesized => break,
                _ => return None,
            }
            if parenthesized && matches!(toks.get(pos), Some(Tok::Op(op)) if op == ")") {
                pos += 1;
                break;
            }
        }
        if pos != toks.len() {
            return None;
        }
    }
    Some(Node {
        kind: NodeKind::FromImport,
        children: Vec::new(),
        span,
        payload: Payload::FromImport { module, names },
    })
}

/// `def name(params):` — parameter names only, defaults and stars dropped.
fn parse_def(toks: &[Tok], span: Span) -> Option<Node> {
    let name = match toks.get(1) {
        Some(Tok::Ident(n)) => n.clone(),
        _ => return None,
    };
    if !matches!(toks.get(2), Some(Tok::Op(op)) if op == "(") {
        return None;
    }
    let mut params = Vec::new();
    let mut depth = 1;
    let mut pos = 3;
    let mut at_name = true;
    while pos < toks.len() && depth > 0 {
        match &toks[pos] {
            Tok::Op(op) if op == "(" || op == "[" || op == "{" => depth += 1,
            Tok::Op(op) if op == ")" || op == "]" || op == "}" => depth -= 1,
            Tok::Op(op) if op == "," && depth == 1 => at_name = true,
            Tok::Ident(p) if at_name && depth == 1 => {
                params.push(p.clone());
                at_name = false;
            }
            _ => {}
        }
        pos += 1;
    }
    Some(Node {
        kind: NodeKind::FunctionDef,
        children: Vec::new(),
        span,
        payload: Payload::FunctionDef { name, params },
    })
}

/// Single-target `name = expr` or `a.b = expr`; anything else is not ours.
fn parse_assignment(toks: &[Tok], span: Span) -> Option<Node> {
    // find a top-level bare `=`
    let mut depth = 0;
    let mut eq_at = None;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::Op(op) if op == "(" || op == "[" || op == "{" => depth += 1,
            Tok::Op(op) if op == ")" || op == "]" || op == "}" => depth -= 1,
            Tok::Op(op) if op == "=" && depth == 0 => {
                if eq_at.is_some() {
                    return None; // chained assignment: out of subset
                }
                eq_at = Some(i);
            }
            _ => {}
        }
    }
    let eq_at = eq_at?;
    let mut pos = 0;
    let target = parse_dotted(toks, &mut pos)?;
    if pos != eq_at {
        return None; // subscripted or tuple target
    }
    let rhs = &toks[eq_at + 1..];
    if rhs.is_empty() {
        return None;
    }
    let mut rpos = 0;
    let value = parse_expr(rhs, &mut rpos, span);
    if rpos != rhs.len() {
        return None;
    }
    Some(Node {
        kind: NodeKind::Assign,
        children: vec![value],
        span,
        payload: Payload::Assign { target },
    })
}

fn parse_dotted(toks: &[Tok], pos: &mut usize) -> Option<String> {
    let mut dotted = match toks.get(*pos) {
        Some(Tok::Ident(name)) => name.clone(),
        _ => return None,
    };
    *pos += 1;
    while matches!(toks.get(*pos), Some(Tok::Op(op)) if op == ".") {
        match toks.get(*pos + 1) {
            Some(Tok::Ident(next)) => {
                dotted.push('.');
                dotted.push_str(next);
                *pos += 2;
            }
            _ => return None,
        }
    }
    Some(dotted)
}

/// Expression grammar: `additive := modfmt ('+' modfmt)*`,
/// `modfmt := postfix ('%' postfix)*`, postfix handles `.attr` chains and
/// calls. Unknown constructs collapse into Opaque leaves.
pub(super) fn parse_expr(toks: &[Tok], pos: &mut usize, span: Span) -> Node {
    let first = parse_modfmt(toks, pos, span);
    if !matches!(toks.get(*pos), Some(Tok::Op(op)) if op == "+") {
        return first;
    }
    let mut operands = vec![first];
    while matches!(toks.get(*pos), Some(Tok::Op(op)) if op == "+") {
        *pos += 1;
        operands.push(parse_modfmt(toks, pos, span));
    }
    Node { kind: NodeKind::BinOpConcat, children: operands, span, payload: Payload::None }
}

fn parse_modfmt(toks: &[Tok], pos: &mut usize, span: Span) -> Node {
    let lhs = parse_postfix(toks, pos, span);
    if !matches!(toks.get(*pos), Some(Tok::Op(op)) if op == "%") {
        return lhs;
    }
    let mut children = vec![lhs];
    while matches!(toks.get(*pos), Some(Tok::Op(op)) if op == "%") {
        *pos += 1;
        children.push(parse_postfix(toks, pos, span));
    }
    Node {
        kind: NodeKind::FormatExpr,
        children,
        span,
        payload: Payload::FormatExpr { interpolates: true },
    }
}

fn parse_postfix(toks: &[Tok], pos: &mut usize, span: Span) -> Node {
    let mut node = parse_primary(toks, pos, span);
    loop {
        match toks.get(*pos) {
            Some(Tok::Op(op)) if op == "." => {
                let attr = match toks.get(*pos + 1) {
                    Some(Tok::Ident(name)) => name.clone(),
                    _ => break,
                };
                *pos += 2;
                let dotted = match (&node.kind, &node.payload) {
                    (NodeKind::Name, Payload::Name { ident }) => format!("{ident}.{attr}"),
                    (NodeKind::Attribute, Payload::Attribute { dotted }) => format!("{dotted}.{attr}"),
                    // attribute on a non-name base: keep the trailing chain,
                    // marked unrooted by the leading dot
                    _ => format!(".{attr}"),
                };
                let children = if matches!(node.kind, NodeKind::Name | NodeKind::Attribute) {
                    Vec::new()
                } else {
                    vec![node]
                };
                node = Node {
                    kind: NodeKind::Attribute,
                    children,
                    span,
                    payload: Payload::Attribute { dotted },
                };
            }
            Some(Tok::Op(op)) if op == "(" => {
                *pos += 1;
                node = parse_call(node, toks, pos, span);
            }
            Some(Tok::Op(op)) if op == "[" => {
                // subscript: out of subset, swallow the group
                *pos += 1;
                consume_balanced(toks, pos, "[", "]");
                node = Node { kind: NodeKind::Opaque, children: Vec::new(), span, payload: Payload::None };
            }
            _ => break,
        }
    }
    node
}

fn parse_call(callee: Node, toks: &[Tok], pos: &mut usize, span: Span) -> Node {
    let mut positional: Vec<Node> = Vec::new();
    let mut keywords: Vec<(String, Node)> = Vec::new();

    loop {
        match toks.get(*pos) {
            None => break,
            Some(Tok::Op(op)) if op == ")" => {
                *pos += 1;
                break;
            }
            Some(Tok::Op(op)) if op == "," => {
                *pos += 1;
                continue;
            }
            _ => {}
        }
        // keyword argument: Ident '=' expr
        if let (Some(Tok::Ident(name)), Some(Tok::Op(eq))) = (toks.get(*pos), toks.get(*pos + 1)) {
            if eq == "=" {
                let name = name.clone();
                *pos += 2;
                let value = parse_arg_expr(toks, pos, span);
                keywords.push((name, value));
                continue;
            }
        }
        let before = *pos;
        let value = parse_arg_expr(toks, pos, span);
        positional.push(value);
        if *pos == before {
            *pos += 1; // never stall on junk
        }
    }

    let mut children = vec![callee];
    let n_positional = positional.len();
    children.extend(positional);
    let kwarg_names: Vec<String> = keywords.iter().map(|(n, _)| n.clone()).collect();
    children.extend(keywords.into_iter().map(|(_, v)| v));
    Node {
        kind: NodeKind::Call,
        children,
        span,
        payload: Payload::Call { n_positional, kwarg_names },
    }
}

/// One call argument; on trailing junk before `,`/`)`, the whole argument
/// degrades to Opaque.
fn parse_arg_expr(toks: &[Tok], pos: &mut usize, span: Span) -> Node {
    let node = parse_expr(toks, pos, span);
    let mut junk = false;
    loop {
        match toks.get(*pos) {
            None => break,
            Some(Tok::Op(op)) if op == "," || op == ")" => break,
            Some(Tok::Op(op)) if op == "(" => {
                *pos += 1;
                consume_balanced(toks, pos, "(", ")");
                junk = true;
            }
            Some(Tok::Op(op)) if op == "[" => {
                *pos += 1;
                consume_balanced(toks, pos, "[", "]");
                junk = true;
            }
            Some(Tok::Op(op)) if op == "{" => {
                *pos += 1;
                consume_balanced(toks, pos, "{", "}");
                junk = true;
            }
            _ => {
                *pos += 1;
                junk = true;
            }
        }
    }
    if junk {
        Node { kind: NodeKind::Opaque, children: Vec::new(), span, payload: Payload::None }
    } else {
        node
    }
}

fn parse_primary(toks: &[Tok], pos: &mut usize, span: Span) -> Node {
    match toks.get(*pos) {
        Some(Tok::Str { value, fstring, interpolates }) => {
            let node = if *fstring {
                Node {
                    kind: NodeKind::FormatExpr,
                    children: Vec::new(),
                    span,
                    payload: Payload::FormatExpr { interpolates: *interpolates },
                }
            } else {
                Node {
                    kind: NodeKind::StringLit,
                    children: Vec::new(),
                    span,
                    payload: Payload::StringLit { value: value.clone() },
                }
            };
            *pos += 1;
            node
        }
        Some(Tok::Number(value)) => {
            let node = Node {
                kind: NodeKind::NumberLit,
                children: Vec::new(),
                span,
                payload: Payload::NumberLit { value: value.clone() },
            };
            *pos += 1;
            node
        }
        // signed number literal
        Some(Tok::Op(op)) if (op == "-" || op == "+") && matches!(toks.get(*pos + 1), Some(Tok::Number(_))) => {
            let sign = op.clone();
            let value = match toks.get(*pos + 1) {
                Some(Tok::Number(v)) => v.clone(),
                _ => unreachable!(),
            };
            *pos += 2;
            Node {
                kind: NodeKind::NumberLit,
                children: Vec::new(),
                span,
                payload: Payload::NumberLit { value: format!("{sign}{value}") },
            }
        }
        Some(Tok::Ident(name)) => {
            let node = Node {
                kind: NodeKind::Name,
                children: Vec::new(),
                span,
                payload: Payload::Name { ident: name.clone() },
            };
            *pos += 1;
            node
        }
        Some(Tok::Op(op)) if op == "(" => {
            *pos += 1;
            let save = *pos;
            let inner = parse_expr(toks, pos, span);
            if matches!(toks.get(*pos), Some(Tok::Op(op)) if op == ")") {
                *pos += 1;
                inner
            } else {
                // tuple or unsupported grouping
                *pos = save;
                consume_balanced(toks, pos, "(", ")");
                Node { kind: NodeKind::Opaque, children: Vec::new(), span, payload: Payload::None }
            }
        }
        Some(Tok::Op(op)) if op == "[" || op == "{" => {
            let (open, close) = if op == "[" { ("[", "]") } else { ("{", "}") };
            *pos += 1;
            consume_balanced(toks, pos, open, close);
            Node { kind: NodeKind::Opaque, children: Vec::new(), span, payload: Payload::None }
        }
        Some(_) => {
            *pos += 1;
            Node { kind: NodeKind::Opaque, children: Vec::new(), span, payload: Payload::None }
        }
        None => Node { kind: NodeKind::Opaque, children: Vec::new(), span, payload: Payload::None },
    }
}

/// Consumes tokens until the matching close bracket (assumes the opener was
/// already consumed).
fn consume_balanced(toks: &[Tok], pos: &mut usize, open: &str, close: &str) {
    let mut depth = 1;
    while *pos < toks.len() && depth > 0 {
        match &toks[*pos] {
            Tok::Op(op) if op == open => depth += 1,
            Tok::Op(op) if op == close => depth -= 1,
            _ => {}
        }
        *pos += 1;
    }
}
