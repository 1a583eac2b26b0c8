//! Line-oriented N-Triples reader.
//!
//! Accepts the line-based subset: one triple per line terminated by `.`,
//! `#` comments, blank lines. Escape sequences inside literals are kept
//! verbatim so the lexical form round-trips byte for byte.

use crate::error::{Error, Result};
use crate::term::Term;

pub type TermTriple = (Term, Term, Term);

pub fn parse_ntriples(input: &str) -> Result<Vec<TermTriple>> {
    let mut triples = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        triples.push(parse_line(line, line_no)?);
    }
    Ok(triples)
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_line(line: &str, line_no: usize) -> Result<TermTriple> {
    let mut rest = line;
    let s = take_term(&mut rest, line_no)?;
    let p = take_term(&mut rest, line_no)?;
    let o = take_term(&mut rest, line_no)?;
    let tail = rest.trim();
    if tail != "." {
        return Err(err(line_no, "expected terminating '.'"));
    }
    if p.kind != crate::term::TermKind::Iri {
        return Err(err(line_no, "predicate must be an IRI"));
    }
    if s.kind == crate::term::TermKind::Literal {
        return Err(err(line_no, "literal not allowed in subject position"));
    }
    Ok((s, p, o))
}

fn take_term(rest: &mut &str, line: usize) -> Result<Term> {
    let s = rest.trim_start();
    if s.is_empty() {
        return Err(err(line, "truncated triple"));
    }
    if let Some(tail) = s.strip_prefix('<') {
        let end = tail.find('>').ok_or_else(|| err(line, "unterminated IRI"))?;
        let iri = &tail[..end];
        if iri.is_empty() {
            return Err(err(line, "empty IRI"));
        }
        *rest = &tail[end + 1..];
        return Ok(Term::iri(iri));
    }
    if let Some(tail) = s.strip_prefix("_:") {
        let end = tail
            .find(|c: char| c.is_whitespace())
            .unwrap_or(tail.len());
        let label = &tail[..end];
        if label.is_empty() || label == "." {
            return Err(err(line, "empty blank node label"));
        }
        *rest = &tail[end..];
        return Ok(Term::blank(label));
    }
    if s.starts_with('"') {
        let (lexical, tail) = take_literal(s, line)?;
        *rest = tail;
        return Ok(Term::literal(lexical));
    }
    Err(err(line, format!("unrecognized term starting at {:?}", s.chars().take(12).collect::<String>())))
}

/// Scans a literal token: quoted string (backslash escapes skipped, not
/// decoded) plus optional `@lang` or `^^<datatype>` suffix. Returns the full
/// token text and the remaining input.
fn take_literal(s: &str, line: usize) -> Result<(String, &str)> {
    let bytes = s.as_bytes();
    debug_assert_eq!(bytes[0], b'"');
    let mut i = 1;
    loop {
        if i >= bytes.len() {
            return Err(err(line, "unterminated literal"));
        }
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => break,
            _ => i += 1,
        }
    }
    let mut end = i + 1; // past closing quote
    let tail = &s[end..];
    if let Some(lang) = tail.strip_prefix('@') {
        let n = lang
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(lang.len());
        if n == 0 {
            return Err(err(line, "empty language tag"));
        }
        end += 1 + n;
    } else if let Some(dt) = tail.strip_prefix("^^") {
        if !dt.starts_with('<') {
            return Err(err(line, "datatype must be an IRI"));
        }
        let close = dt.find('>').ok_or_else(|| err(line, "unterminated datatype IRI"))?;
        end += 2 + close + 1;
    }
    Ok((s[..end].to_string(), &s[end..]))
}
