//! Query text parser and AST for the join fragment: nested groups, triple
//! patterns, and OPTIONAL blocks under a `SELECT * WHERE { ... }` shell.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::Term;

pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatTerm {
    Const(Term),
    Var(VarId),
}

impl PatTerm {
    pub fn var(&self) -> Option<VarId> {
        match self {
            PatTerm::Var(v) => Some(*v),
            PatTerm::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub id: usize,
    pub s: PatTerm,
    pub p: PatTerm,
    pub o: PatTerm,
}

impl TriplePattern {
    /// Distinct variables in s, p, o order of first appearance.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for t in [&self.s, &self.p, &self.o] {
            if let Some(v) = t.var() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn has_var(&self, v: VarId) -> bool {
        [&self.s, &self.p, &self.o].into_iter().any(|t| t.var() == Some(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Bgp,
    Join,
    LeftJoin,
}

#[derive(Debug, Clone)]
pub enum Node {
    Bgp(Vec<usize>),
    Join(usize, usize),
    LeftJoin(usize, usize),
}

/// Parsed query: pattern table plus a binary tree of BGP leaves resolved to
/// arena indexes.
#[derive(Debug, Clone)]
pub struct Query {
    pub patterns: Vec<TriplePattern>,
    pub nodes: Vec<Node>,
    pub root: usize,
    pub var_names: Vec<String>,
}

impl Query {
    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    /// Triple pattern ids in a subtree, in query order.
    pub fn subtree_tps(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_tps(node, &mut out);
        out.sort_unstable();
        out
    }

    fn collect_tps(&self, node: usize, out: &mut Vec<usize>) {
        match &self.nodes[node] {
            Node::Bgp(tps) => out.extend_from_slice(tps),
            Node::Join(l, r) | Node::LeftJoin(l, r) => {
                self.collect_tps(*l, out);
                self.collect_tps(*r, out);
            }
        }
    }

    pub fn subtree_vars(&self, node: usize) -> BTreeSet<VarId> {
        self.subtree_tps(node)
            .into_iter()
            .flat_map(|tp| self.patterns[tp].vars())
            .collect()
    }

    /// Rewrites the given LeftJoin nodes into Joins, returning the modified
    /// tree. Pattern ids and node ids are preserved.
    pub fn with_leftjoins_converted(&self, nodes: &BTreeSet<usize>) -> Query {
        let mut q = self.clone();
        for id in nodes {
            if let Node::LeftJoin(l, r) = q.nodes[*id] {
                q.nodes[*id] = Node::Join(l, r);
            }
        }
        q
    }
}

impl fmt::Display for PatTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatTerm::Const(t) => write!(f, "{t}"),
            PatTerm::Var(v) => write!(f, "?v{v}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Tokenizer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LBrace,
    RBrace,
    Dot,
    Keyword(String),
    Var(String),
    Iri(String),
    Blank(String),
    Literal(String),
    Star,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '{' => {
                toks.push(Tok::LBrace);
                i += 1;
            }
            '}' => {
                toks.push(Tok::RBrace);
                i += 1;
            }
            '.' => {
                toks.push(Tok::Dot);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '<' => {
                let rest = &text[i + 1..];
                let end = rest
                    .find('>')
                    .ok_or_else(|| Error::QueryParse("unterminated IRI".into()))?;
                toks.push(Tok::Iri(rest[..end].to_string()));
                i += end + 2;
            }
            '?' => {
                let rest = &text[i + 1..];
                let end = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(rest.len());
                if end == 0 {
                    return Err(Error::QueryParse("empty variable name".into()));
                }
                toks.push(Tok::Var(rest[..end].to_string()));
                i += end + 1;
            }
            '"' => {
                let (lex, consumed) = scan_literal(&text[i..])?;
                toks.push(Tok::Literal(lex));
                i += consumed;
            }
            '_' if text[i..].starts_with("_:") => {
                let rest = &text[i + 2..];
                let end = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(rest.len());
                if end == 0 {
                    return Err(Error::QueryParse("empty blank node label".into()));
                }
                toks.push(Tok::Blank(rest[..end].to_string()));
                i += end + 2;
            }
            c if c.is_ascii_alphabetic() => {
                let rest = &text[i..];
                let end = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(rest.len());
                toks.push(Tok::Keyword(rest[..end].to_uppercase()));
                i += end;
            }
            other => return Err(Error::QueryParse(format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

fn scan_literal(s: &str) -> Result<(String, usize)> {
    let bytes = s.as_bytes();
    let mut i = 1usize;
    loop {
        if i >= bytes.len() {
            return Err(Error::QueryParse("unterminated literal".into()));
        }
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => break,
            _ => i += 1,
        }
    }
    let mut end = i + 1;
    let tail = &s[end..];
    if let Some(lang) = tail.strip_prefix('@') {
        let n = lang
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(lang.len());
        end += 1 + n;
    } else if let Some(dt) = tail.strip_prefix("^^") {
        let close = dt
            .find('>')
            .ok_or_else(|| Error::QueryParse("unterminated datatype".into()))?;
        if !dt.starts_with('<') {
            return Err(Error::QueryParse("datatype must be an IRI".into()));
        }
        end += 2 + close + 1;
    }
    Ok((s[..end].to_string(), end))
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    patterns: Vec<TriplePattern>,
    nodes: Vec<Node>,
    var_names: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Keyword(k)) if k == kw => Ok(()),
            other => Err(Error::QueryParse(format!("expected {kw}, found {other:?}"))),
        }
    }

    fn var_id(&mut self, name: &str) -> VarId {
        if let Some(i) = self.var_names.iter().position(|n| n == name) {
            return i as VarId;
        }
        self.var_names.push(name.to_string());
        (self.var_names.len() - 1) as VarId
    }

    fn push_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn parse_group(&mut self) -> Result<usize> {
        match self.next() {
            Some(Tok::LBrace) => {}
            other => return Err(Error::QueryParse(format!("expected '{{', found {other:?}"))),
        }
        let mut acc: Option<usize> = None;
        let mut bgp: Vec<usize> = Vec::new();
        loop {
            match self.peek() {
                None => return Err(Error::QueryParse("unterminated group".into())),
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Dot) => {
                    self.pos += 1;
                }
                Some(Tok::Keyword(k)) if k == "OPTIONAL" => {
                    self.pos += 1;
                    if !bgp.is_empty() {
                        let leaf = self.push_node(Node::Bgp(std::mem::take(&mut bgp)));
                        acc = Some(match acc {
                            None => leaf,
                            Some(a) => self.push_node(Node::Join(a, leaf)),
                        });
                    }
                    let left = acc.ok_or_else(|| {
                        Error::QueryParse("OPTIONAL with no preceding pattern".into())
                    })?;
                    let right = self.parse_group()?;
                    acc = Some(self.push_node(Node::LeftJoin(left, right)));
                }
                Some(Tok::Keyword(k)) if k == "UNION" || k == "FILTER" => {
                    return Err(Error::UnsupportedFeature(k.clone()));
                }
                Some(Tok::LBrace) => {
                    if !bgp.is_empty() {
                        let leaf = self.push_node(Node::Bgp(std::mem::take(&mut bgp)));
                        acc = Some(match acc {
                            None => leaf,
                            Some(a) => self.push_node(Node::Join(a, leaf)),
                        });
                    }
                    let inner = self.parse_group()?;
                    acc = Some(match acc {
                        None => inner,
                        Some(a) => self.push_node(Node::Join(a, inner)),
                    });
                }
                Some(_) => {
                    let tp = self.parse_triple_pattern()?;
                    bgp.push(tp);
                }
            }
        }
        if !bgp.is_empty() {
            let leaf = self.push_node(Node::Bgp(std::mem::take(&mut bgp)));
            acc = Some(match acc {
                None => leaf,
                Some(a) => self.push_node(Node::Join(a, leaf)),
            });
        }
        acc.ok_or_else(|| Error::QueryParse("empty group".into()))
    }

    fn parse_term(&mut self, position: &str) -> Result<PatTerm> {
        match self.next() {
            Some(Tok::Var(name)) => Ok(PatTerm::Var(self.var_id(&name))),
            Some(Tok::Iri(iri)) => Ok(PatTerm::Const(Term::iri(iri))),
            Some(Tok::Blank(b)) => Ok(PatTerm::Const(Term::blank(b))),
            Some(Tok::Literal(l)) => {
                if position == "predicate" {
                    return Err(Error::QueryParse("literal not allowed as predicate".into()));
                }
                Ok(PatTerm::Const(Term::literal(l)))
            }
            Some(Tok::Keyword(k)) if k == "UNION" || k == "FILTER" => {
                Err(Error::UnsupportedFeature(k))
            }
            other => Err(Error::QueryParse(format!("expected term in {position} position, found {other:?}"))),
        }
    }

    fn parse_triple_pattern(&mut self) -> Result<usize> {
        let s = self.parse_term("subject")?;
        let p = self.parse_term("predicate")?;
        let o = self.parse_term("object")?;
        if s.var().is_some() && p.var().is_some() && o.var().is_some() {
            return Err(Error::UnsupportedPattern(
                "triple patterns with three variable positions are not supported".into(),
            ));
        }
        let id = self.patterns.len();
        let tp = TriplePattern { id, s, p, o };
        self.patterns.push(tp);
        Ok(id)
    }
}

pub fn parse_query(text: &str) -> Result<Query> {
    // reject out-of-fragment keywords before tokenizing: their argument
    // syntax (parentheses, operators) is not part of this grammar
    let mut word = String::new();
    for c in text.chars().chain(std::iter::once(' ')) {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c.to_ascii_uppercase());
        } else {
            if word == "UNION" || word == "FILTER" {
                return Err(Error::UnsupportedFeature(word));
            }
            word.clear();
        }
    }
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, patterns: Vec::new(), nodes: Vec::new(), var_names: Vec::new() };
    p.expect_keyword("SELECT")?;
    match p.next() {
        Some(Tok::Star) => {}
        other => {
            return Err(Error::UnsupportedFeature(format!(
                "only SELECT * is supported, found {other:?}"
            )))
        }
    }
    p.expect_keyword("WHERE")?;
    let root = p.parse_group()?;
    if p.pos != p.toks.len() {
        return Err(Error::QueryParse("trailing tokens after query body".into()));
    }
    Ok(Query { patterns: p.patterns, nodes: p.nodes, root, var_names: p.var_names })
}
