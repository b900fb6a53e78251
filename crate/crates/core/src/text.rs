//! Line-oriented text formats for theories, open-component sets, and
//! example files.
//!
//! Theory files contain one statement per line: a single `root <name>.`
//! declaration, optional `primitive <name>.` declarations, clause lines
//! `<head> :- <lit>, <lit>, ... .`, and fact lines `<head>.`. A negative
//! literal is written `not <name>`. `#` starts a comment. Identifiers match
//! `[a-z][a-z0-9_]*`.

use crate::error::{Error, Result};
use crate::theory::{
    is_identifier, BodyLiteral, ComponentId, Example, LabeledExample, Sign, Theory,
};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Arrow,
    Comma,
    Period,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

fn tokenize_line(line_no: usize, line: &str) -> Result<Vec<(usize, Token)>> {
    let mut tokens = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            ':' => {
                if bytes.get(i + 1) == Some(&b'-') {
                    tokens.push((col, Token::Arrow));
                    i += 2;
                } else {
                    return Err(syntax(line_no, col, "expected `:-`"));
                }
            }
            ',' => {
                tokens.push((col, Token::Comma));
                i += 1;
            }
            '.' => {
                tokens.push((col, Token::Period));
                i += 1;
            }
            c if c.is_ascii_lowercase() => {
                let start = i;
                while i < bytes.len() {
                    let c = bytes[i] as char;
                    if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                tokens.push((col, Token::Ident(line[start..i].to_string())));
            }
            c => return Err(syntax(line_no, col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(tokens)
}

/// Parses a theory file. Component ordinals follow file order.
pub fn parse_theory(text: &str) -> Result<Theory> {
    let mut root: Option<String> = None;
    let mut primitives: Vec<String> = Vec::new();
    let mut clauses: Vec<(String, Vec<BodyLiteral>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = tokenize_line(line_no, raw)?;
        if tokens.is_empty() {
            continue;
        }
        let end_col = tokens.last().unwrap().0;
        match tokens.last() {
            Some((_, Token::Period)) => {}
            _ => return Err(syntax(line_no, end_col, "statement must end with `.`")),
        }
        let stmt = &tokens[..tokens.len() - 1];
        match stmt {
            [(_, Token::Ident(kw)), (_, Token::Ident(name))] if kw == "root" => {
                if root.is_some() {
                    return Err(Error::DuplicateRoot);
                }
                root = Some(name.clone());
            }
            [(_, Token::Ident(kw)), (_, Token::Ident(name))] if kw == "primitive" => {
                primitives.push(name.clone());
            }
            [(col, Token::Ident(head)), rest @ ..] => {
                if head == "not" {
                    return Err(syntax(line_no, *col, "`not` is reserved"));
                }
                let body = parse_body(line_no, rest)?;
                clauses.push((head.clone(), body));
            }
            [(col, _), ..] => return Err(syntax(line_no, *col, "expected statement")),
            [] => return Err(syntax(line_no, 1, "empty statement")),
        }
    }

    let root = root.ok_or(Error::MissingRoot)?;
    Theory::new(root, primitives, clauses)
}

fn parse_body(line_no: usize, rest: &[(usize, Token)]) -> Result<Vec<BodyLiteral>> {
    if rest.is_empty() {
        return Ok(Vec::new()); // fact clause
    }
    match rest[0] {
        (_, Token::Arrow) => {}
        (col, _) => return Err(syntax(line_no, col, "expected `:-` or `.`")),
    }
    let mut body = Vec::new();
    let mut i = 1;
    loop {
        let (sign, name, col) = match &rest[i..] {
            [(_, Token::Ident(kw)), (_, Token::Ident(name)), ..] if kw == "not" => {
                let col = rest[i].0;
                i += 2;
                (Sign::Neg, name.clone(), col)
            }
            [(col, Token::Ident(name)), ..] => {
                if name == "not" {
                    return Err(syntax(line_no, *col, "`not` must be followed by a name"));
                }
                let (col, name) = (*col, name.clone());
                i += 1;
                (Sign::Pos, name, col)
            }
            [(col, _), ..] => return Err(syntax(line_no, *col, "expected literal")),
            [] => return Err(syntax(line_no, 1, "expected literal after `,`")),
        };
        let _ = col;
        body.push(BodyLiteral::new(sign, name));
        match rest.get(i) {
            Some((_, Token::Comma)) => i += 1,
            None => break,
            Some((col, _)) => return Err(syntax(line_no, *col, "expected `,` or `.`")),
        }
    }
    Ok(body)
}

/// Canonical serialization: root line, sorted `primitive` declarations,
/// then live clauses in order with live literals. Re-parsing the output of
/// a freshly parsed theory yields a structurally identical theory.
pub fn serialize_theory(theory: &Theory) -> String {
    let mut out = String::new();
    out.push_str(&format!("root {}.\n", theory.root()));
    for p in theory.primitives() {
        out.push_str(&format!("primitive {p}.\n"));
    }
    for clause in theory.live_clauses() {
        let body: Vec<String> = clause
            .live_body()
            .map(|(_, lit)| match lit.sign {
                Sign::Pos => lit.prop.clone(),
                Sign::Neg => format!("not {}", lit.prop),
            })
            .collect();
        if body.is_empty() {
            out.push_str(&format!("{}.\n", clause.head));
        } else {
            out.push_str(&format!("{} :- {}.\n", clause.head, body.join(", ")));
        }
    }
    out
}

/// Parses an open-components file: one id per line, `p:<name>`,
/// `c:<name>/<k>`, or `l:<name>/<k>/<j>`.
pub fn parse_open(text: &str) -> Result<Vec<ComponentId>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let id: ComponentId = line.parse().map_err(|e| match e {
            Error::Syntax { col, msg, .. } => Error::Syntax { line: idx + 1, col, msg },
            other => other,
        })?;
        out.push(id);
    }
    Ok(out)
}

pub fn serialize_open(ids: &[ComponentId]) -> String {
    let mut out = String::new();
    for id in ids {
        out.push_str(&id.to_string());
        out.push('\n');
    }
    out
}

/// Parses an examples file: one example per line, `+` or `-`, then the
/// whitespace-separated names of the true primitives.
pub fn parse_examples(text: &str) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = match tokens.next() {
            Some("+") => true,
            Some("-") => false,
            _ => return Err(syntax(line_no, 1, "example must start with `+` or `-`")),
        };
        let mut names = Vec::new();
        for tok in tokens {
            if !is_identifier(tok) {
                return Err(syntax(line_no, 1, format!("invalid primitive name `{tok}`")));
            }
            names.push(tok.to_string());
        }
        out.push(LabeledExample::new(Example::new(names), label));
    }
    Ok(out)
}

pub fn serialize_examples(examples: &[LabeledExample]) -> String {
    let mut out = String::new();
    for le in examples {
        out.push(if le.label { '+' } else { '-' });
        for name in &le.example.true_primitives {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inferred_primitive() {
        let t = parse_theory("root r.\nr :- p.\n").unwrap();
        assert!(t.is_primitive("p"));
    }

    #[test]
    fn cycle_error() {
        let err = parse_theory("root r.\nr :- s.\ns :- r.\n").unwrap_err();
        assert!(matches!(err, Error::CyclicDependency(_)));
    }

    #[test]
    fn missing_root() {
        assert_eq!(parse_theory("a :- b.\n").unwrap_err(), Error::MissingRoot);
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_theory("root r.\nr :- p q.\n").unwrap_err();
        match err {
            Error::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 8);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn fact_and_negation_round_trip() {
        let src = "root r.\nprimitive q.\nr :- not q, p.\np.\n";
        let t = parse_theory(src).unwrap();
        let printed = serialize_theory(&t);
        let t2 = parse_theory(&printed).unwrap();
        assert_eq!(t, t2);
        assert!(printed.contains("not q"));
        assert!(printed.contains("p.\n"));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let t = parse_theory("# header\nroot r.\n\nr :- p. # tail\n").unwrap();
        assert_eq!(t.root(), "r");
    }

    #[test]
    fn examples_file() {
        let es = parse_examples("+ a b\n-\n# c\n+ c\n").unwrap();
        assert_eq!(es.len(), 3);
        assert!(es[0].label);
        assert!(!es[1].label);
        assert!(es[1].example.true_primitives.is_empty());
    }

    #[test]
    fn open_file() {
        let ids = parse_open("p:open\nc:graspable/0\nl:graspable/1/1\n").unwrap();
        assert_eq!(ids.len(), 3);
        assert_eq!(ids[2], ComponentId::lit("graspable", 1, 1));
    }
}
