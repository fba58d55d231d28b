//! Logical-line assembly and tokenization for the subset grammar.
//!
//! Physical lines are joined into logical lines while a bracket is open, a
//! triple-quoted string is unterminated, or a line ends in `\`. Comments are
//! stripped during assembly (outside strings). Tabs count as 4 columns for
//! indentation.

/// One logical line: joined text with its physical span and indent.
#[derive(Debug, Clone)]
pub struct LogicalLine {
    pub text: String,
    pub start_line: usize,
    pub end_line: usize,
    pub indent: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str { value: String, fstring: bool, interpolates: bool },
    Op(String),
}

fn indent_of(line: &str) -> usize {
    let mut col = 0;
    for ch in line.chars() {
        match ch {
            ' ' => col += 1,
            '\t' => col += 4,
            _ => break,
        }
    }
    col
}

/// Splits source text into logical lines, skipping blank and comment-only
/// physical lines that sit outside any continuation.
pub fn logical_lines(source: &str) -> Vec<LogicalLine> {
    let physical: Vec<&str> = source.lines().collect();
    let mut out = Vec::new();

    let mut current = String::new();
    let mut start_line = 0usize;
    let mut indent = 0usize;
    let mut depth = 0i32;
    let mut in_str: Option<(char, bool)> = None; // (quote, triple)
    let mut open = false;

    for (i, raw) in physical.iter().enumerate() {
        let line_no = i + 1;
        if !open {
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            start_line = line_no;
            indent = indent_of(raw);
            current.clear();
        } else if in_str.is_some() {
            current.push('\n');
        } else {
            current.push(' ');
        }

        // Scan characters, tracking strings and bracket depth, dropping comments.
        let chars: Vec<char> = raw.chars().collect();
        let mut j = 0;
        let mut escaped = false;
        let mut backslash_join = false;
        while j < chars.len() {
            let ch = chars[j];
            if let Some((quote, triple)) = in_str {
                current.push(ch);
                if escaped {
                    escaped = false;
                } else if ch == '\\' {
                    escaped = true;
                } else if ch == quote {
                    if triple {
                        if j + 2 < chars.len() && chars[j + 1] == quote && chars[j + 2] == quote {
                            current.push(quote);
                            current.push(quote);
                            j += 2;
                            in_str = None;
                        } else if j + 2 == chars.len() && chars[j + 1] == quote {
                            // dangling pair at EOL stays open
                            current.push(quote);
                            j += 1;
                        }
                    } else {
                        in_str = None;
                    }
                }
                j += 1;
                continue;
            }
            match ch {
                '#' => break, // comment to end of physical line
                '\'' | '"' => {
                    let triple = j + 2 < chars.len() && chars[j + 1] == ch && chars[j + 2] == ch;
                    in_str = Some((ch, triple));
                    current.push(ch);
                    if triple {
                        current.push(ch);
                        current.push(ch);
                        j += 2;
                    }
                }
                '(' | '[' | '{' => {
                    depth += 1;
                    current.push(ch);
                }
                ')' | ']' | '}' => {
                    depth -= 1;
                    current.push(ch);
                }
                '\\' if j + 1 == chars.len() => {
                    backslash_join = true;
                }
                _ => current.push(ch),
            }
            j += 1;
        }

        let unterminated_single = matches!(in_str, Some((_, false)));
        if unterminated_single {
            // A single-quoted string cannot span physical lines; close it off.
            in_str = None;
        }

        open = depth > 0 || in_str.is_some() || backslash_join;
        if !open {
            out.push(LogicalLine {
                text: current.clone(),
                start_line,
                end_line: line_no,
                indent,
            });
            depth = 0;
        }
    }

    if open && !current.is_empty() {
        out.push(LogicalLine {
            text: current,
            start_line,
            end_line: physical.len(),
            indent,
        });
    }
    out
}

fn is_ident_start(ch: char) -> bool {
    ch.is_alphabetic() || ch == '_'
}

fn is_ident_char(ch: char) -> bool {
    ch.is_alphanumeric() || ch == '_'
}

fn is_string_prefix(word: &str) -> bool {
    !word.is_empty()
        && word.len() <= 2
        && word.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'f' | 'u'))
}

/// Tokenizes one logical line. Unknown characters become 1-char `Op` tokens.
pub fn tokenize(text: &str) -> Vec<Tok> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;

    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(ch) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if i < chars.len() && (chars[i] == '\'' || chars[i] == '"') && is_string_prefix(&word) {
                let fstring = word.to_ascii_lowercase().contains('f');
                let (value, next) = scan_string(&chars, i);
                toks.push(make_str(value, fstring));
                i = next;
            } else {
                toks.push(Tok::Ident(word));
            }
            continue;
        }
        if ch.is_ascii_digit() {
            let start = i;
            i += 1;
            if i < chars.len() && ch == '0' && matches!(chars[i], 'x' | 'X' | 'o' | 'O' | 'b' | 'B') {
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
            } else {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                        i += 1;
                    }
                }
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    i += 1;
                    if i < chars.len() && matches!(chars[i], '+' | '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            toks.push(Tok::Number(chars[start..i].iter().collect()));
            continue;
        }
        if ch == '\'' || ch == '"' {
            let (value, next) = scan_string(&chars, i);
            toks.push(make_str(value, false));
            i = next;
            continue;
        }
        // operators, longest first
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        const TWO_CHAR: &[&str] = &[
            "**", "==", "!=", "<=", ">=", "//", "->", ":=", "+=", "-=", "*=", "/=", "%=", "&=",
            "|=", "^=", ">>", "<<",
        ];
        if TWO_CHAR.contains(&two.as_str()) {
            toks.push(Tok::Op(two));
            i += 2;
            continue;
        }
        toks.push(Tok::Op(ch.to_string()));
        i += 1;
    }
    toks
}

fn make_str(value: String, fstring: bool) -> Tok {
    let interpolates = fstring && has_brace_expr(&value);
    Tok::Str { value, fstring, interpolates }
}

fn has_brace_expr(value: &str) -> bool {
    let chars: Vec<char> = value.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '{' {
            if i + 1 < chars.len() && chars[i + 1] == '{' {
                i += 2;
                continue;
            }
            return true;
        }
        i += 1;
    }
    false
}

/// Scans a string starting at the opening quote; returns (contents, index past
/// the closing quote). Unterminated strings run to end of line.
fn scan_string(chars: &[char], start: usize) -> (String, usize) {
    let quote = chars[start];
    let triple = start + 2 < chars.len() && chars[start + 1] == quote && chars[start + 2] == quote;
    let mut i = start + if triple { 3 } else { 1 };
    let mut value = String::new();
    let mut escaped = false;
    while i < chars.len() {
        let ch = chars[i];
        if escaped {
            value.push(ch);
            escaped = false;
            i += 1;
            continue;
        }
        if ch == '\\' {
            escaped = true;
            i += 1;
            continue;
        }
        if ch == quote {
            if triple {
                if i + 2 < chars.len() && chars[i + 1] == quote && chars[i + 2] == quote {
                    return (value, i + 3);
                }
                if i + 2 == chars.len() && chars[i + 1] == quote {
                    return (value, i + 2);
                }
                value.push(ch);
            } else {
                return (value, i + 1);
            }
        } else {
            value.push(ch);
        }
        i += 1;
    }
    (value, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembles_bracket_continuation() {
        let src = "x = f(1,\n      2)\ny = 3\n";
        let lines = logical_lines(src);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].start_line, 1);
        assert_eq!(lines[0].end_line, 2);
        assert_eq!(lines[1].text, "y = 3");
    }

    #[test]
    fn strips_comments_outside_strings() {
        let lines = logical_lines("a = 1  # note\nb = '#'\n");
        assert_eq!(lines[0].text.trim_end(), "a = 1");
        assert!(lines[1].text.contains("'#'"));
    }

    #[test]
    fn triple_quoted_string_spans_lines() {
        let src = "s = \"\"\"one\ntwo\"\"\"\nz = 1\n";
        let lines = logical_lines(src);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].end_line, 2);
    }

    #[test]
    fn tokenizes_call_with_kwarg() {
        let toks = tokenize("f(a, key=1)");
        assert_eq!(toks[0], Tok::Ident("f".into()));
        assert!(toks.contains(&Tok::Op("=".into())));
    }

    #[test]
    fn fstring_interpolation_flag() {
        let toks = tokenize("f\"select {uid}\"");
        match &toks[0] {
            Tok::Str { fstring, interpolates, .. } => {
                assert!(fstring);
                assert!(interpolates);
            }
            other => panic!("unexpected {other:?}"),
        }
        let toks = tokenize("f\"plain {{brace}}\"");
        match &toks[0] {
            Tok::Str { interpolates, .. } => assert!(!interpolates),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comparison_is_not_assignment_token() {
        let toks = tokenize("a == b");
        assert!(toks.contains(&Tok::Op("==".into())));
        assert!(!toks.contains(&Tok::Op("=".into())));
    }
}
